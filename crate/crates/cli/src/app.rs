use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use idbp_core::image::{load_pgm, save_pgm};

use crate::bench::{averages, row_for, run_benchmark, run_image, write_summary_file, RunReport, SolverKind, Task};
use crate::config::{parse_number, Settings, DEFAULT_CONFIG_FILE};
use crate::error::{CliError, Result};
use crate::trace_csv::emit_trace_csv;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "idbp", version, about = "Image restoration by iterative denoising and backward projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mask random pixels of a clean image, add noise, and restore it.
    Inpaint(RunArgs),
    /// Blur a clean image with a benchmark scenario, add noise, and restore it.
    Deblur(RunArgs),
    /// Restore with plug-and-play ADMM instead of IDBP.
    Pnp(RunArgs),
    /// Run one configuration over a corpus of images.
    Bench(RunArgs),
    /// Check the solver properties on synthetic problems.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Clean input image (PGM). For `bench`, repeatable, and directories expand to their *.pgm files.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Restored image (PGM); for `bench`, the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fraction of missing pixels.
    #[arg(long, value_parser = parse_number)]
    mask_frac: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise standard deviation.
    #[arg(long, value_parser = parse_number)]
    sigma_n: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    delta: Option<f64>,
    /// Pseudoinverse regularization for deblurring.
    #[arg(long, value_parser = parse_number)]
    epsilon: Option<f64>,
    /// Tune epsilon automatically while deblurring.
    #[arg(long)]
    auto_tune: bool,
    #[arg(long, value_parser = parse_number)]
    tau: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    eps_increment: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// dct, nlm, median, gaussian, identity or external.
    #[arg(long)]
    denoiser: Option<String>,
    /// Shell command implementing the external denoiser protocol.
    #[arg(long)]
    external_cmd: Option<String>,
    /// Deblurring scenario, 1 to 4.
    #[arg(long)]
    scenario: Option<u8>,
    #[arg(long, value_parser = parse_number)]
    beta: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    lambda: Option<f64>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum)]
    task: Option<Task>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    /// Config file; defaults to ./idbp.cfg when present.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn settings(&self) -> Settings {
        Settings {
            task: self.task,
            solver: self.solver,
            input: self.input.clone(),
            output: self.output.clone(),
            mask_frac: self.mask_frac,
            seed: self.seed,
            sigma_n: self.sigma_n,
            delta: self.delta,
            epsilon: self.epsilon,
            auto_tune: self.auto_tune.then_some(true),
            tau: self.tau,
            eps_increment: self.eps_increment,
            iters: self.iters,
            denoiser: self.denoiser.clone(),
            external_cmd: self.external_cmd.clone(),
            scenario: self.scenario,
            beta: self.beta,
            lambda: self.lambda,
            trace: self.trace.clone(),
            report: self.report.clone(),
        }
    }

    /// Defaults, then the config file, then the flags.
    fn merged(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => Some(Settings::from_ini_file(path)?),
            None => {
                let path = Path::new(DEFAULT_CONFIG_FILE);
                if path.is_file() {
                    Some(Settings::from_ini_file(path)?)
                } else {
                    None
                }
            }
        };
        Ok(file.unwrap_or_default().overlay(self.settings()))
    }
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Inpaint(a) => single(&a, Task::Inpaint, SolverKind::Idbp),
        Command::Deblur(a) => single(&a, Task::Deblur, SolverKind::Idbp),
        Command::Pnp(a) => {
            let default_task = if a.scenario.is_some() { Task::Deblur } else { Task::Inpaint };
            if a.solver.is_some_and(|s| s != SolverKind::Pnp) {
                return Err(CliError::usage("`pnp` always uses the pnp solver"));
            }
            single(&a, default_task, SolverKind::Pnp)
        }
        Command::Bench(a) => bench(&a),
        Command::Verify(a) => {
            let results = verify::run_all(a.seed);
            let mut failed = 0;
            for r in &results {
                println!("{:<20} {}  {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
                failed += usize::from(!r.passed);
            }
            Ok(if failed == 0 { 0 } else { 2 })
        }
    }
}

fn single(args: &RunArgs, task: Task, solver: SolverKind) -> Result<i32> {
    let settings = args.merged()?;
    let input = match settings.input.as_slice() {
        [one] => one.clone(),
        [] => return Err(CliError::usage("--input is required")),
        _ => return Err(CliError::usage("expected a single --input; use `bench` for several images")),
    };
    let spec = settings.resolve(task, solver)?;
    let x = load_pgm(&input)?;
    let run = run_image(&spec, &x, spec.seed)?;

    let name = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let m = run.metrics;
    print!(
        "{name}: {task} {solver}, input {:.2} dB, output {:.2} dB, ISNR {:.2} dB",
        run.input_psnr_db,
        m.psnr_db,
        m.isnr_db.unwrap_or(f64::NAN),
        task = spec.task,
        solver = spec.solver,
    );
    if let Some(b) = m.bsnr_db {
        print!(", BSNR {b:.2} dB");
    }
    if run.trace.restarts() > 0 {
        print!(", {} restarts", run.trace.restarts());
    }
    println!();

    if let Some(out) = &settings.output {
        save_pgm(&run.estimate, out)?;
    }
    if let Some(path) = &settings.trace {
        emit_trace_csv(&run.trace, path)?;
    }
    if let Some(path) = &settings.report {
        let rows = vec![row_for(name, &run)];
        let report = RunReport {
            average: averages(&rows),
            rows,
            resolved_config: spec.resolved_ini(),
            trace_files: settings.trace.iter().cloned().collect(),
        };
        write_summary_file(&report, path)?;
    }
    Ok(0)
}

fn expand_corpus(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut corpus = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
                .collect();
            found.sort();
            corpus.extend(found);
        } else {
            corpus.push(p.clone());
        }
    }
    Ok(corpus)
}

fn bench(args: &RunArgs) -> Result<i32> {
    let settings = args.merged()?;
    if settings.input.is_empty() {
        return Err(CliError::usage("--input is required"));
    }
    let default_task = if settings.scenario.is_some() { Task::Deblur } else { Task::Inpaint };
    let mut spec = settings.resolve(default_task, SolverKind::Idbp)?;
    spec.corpus = expand_corpus(&settings.input)?;
    if spec.corpus.is_empty() {
        return Err(CliError::usage("no .pgm images found in --input"));
    }
    spec.output_dir = settings.output.clone();
    let report = run_benchmark(&spec)?;

    print!("{}", report.resolved_config);
    println!("{:<16} {:>10} {:>10} {:>10} {:>10}", "image", "input", "psnr", "isnr", "bsnr");
    let f = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    for r in &report.rows {
        match &r.error {
            None => {
                let m = r.metrics;
                println!(
                    "{:<16} {:>10} {:>10} {:>10} {:>10}",
                    r.image,
                    f(r.input_psnr_db),
                    f(m.map(|m| m.psnr_db)),
                    f(m.and_then(|m| m.isnr_db)),
                    f(m.and_then(|m| m.bsnr_db))
                );
            }
            Some(e) => println!("{:<16} failed: {e}", r.image),
        }
    }
    let a = &report.average;
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>10}",
        "average",
        f(a.input_psnr_db),
        f(a.psnr_db),
        f(a.isnr_db),
        f(a.bsnr_db)
    );
    if let Some(path) = &settings.report {
        write_summary_file(&report, path)?;
    }
    let failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    Ok(if failures == report.rows.len() { 2 } else { 0 })
}
