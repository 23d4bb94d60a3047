fn main() {
    std::process::exit(idbp_cli::run(std::env::args_os()));
}
