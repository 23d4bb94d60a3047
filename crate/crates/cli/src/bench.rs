//! Experiment assembly, batch runs over a corpus, and summary files.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use idbp_core::denoisers::{Denoiser, DenoiserSpec};
use idbp_core::image::{bsnr, load_pgm, psnr, save_pgm};
use idbp_core::operators::{generate_random_mask, DegradationOperator, NoiseModel, ScenarioSpec};
use idbp_core::solvers::{
    idbp_auto_tuned, idbp_run, median_initialize, pnp_run, IdbpConfig, IterationTrace, Measurements, OutputMode,
    PnpConfig,
};
use idbp_core::{ImageGrid, MetricReport, RngState};
use ini::Ini;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::trace_csv::{cell, emit_trace_csv, parse_cell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    Inpaint,
    Deblur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverKind {
    Idbp,
    #[value(name = "idbp-auto", alias = "idbp_auto")]
    IdbpAuto,
    Pnp,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Inpaint => "inpaint",
            Task::Deblur => "deblur",
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Idbp => "idbp",
            SolverKind::IdbpAuto => "idbp-auto",
            SolverKind::Pnp => "pnp",
        })
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Task as clap::ValueEnum>::from_str(s, true)
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <SolverKind as clap::ValueEnum>::from_str(s, true)
    }
}

/// A fully resolved, deterministic experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub task: Task,
    pub solver: SolverKind,
    /// Fraction of missing pixels (inpainting).
    pub mask_frac: f64,
    /// Noise standard deviation (inpainting).
    pub sigma_n: f64,
    /// Kernel and noise model (deblurring).
    pub scenario: ScenarioSpec,
    pub denoiser: DenoiserSpec,
    pub idbp: IdbpConfig,
    pub pnp: PnpConfig,
    /// Master seed; image `i` of the corpus uses `seed + i`.
    pub seed: u64,
    pub corpus: Vec<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// The resolved configuration in the config-file format.
    pub fn resolved_ini(&self) -> String {
        let mut ini = Ini::new();
        let mut run = ini.with_section(Some("run"));
        run.set("task", self.task.to_string())
            .set("solver", self.solver.to_string())
            .set("seed", self.seed.to_string())
            .set("denoiser", self.denoiser.name());
        match self.task {
            Task::Inpaint => {
                run.set("mask-frac", self.mask_frac.to_string())
                    .set("sigma-n", self.sigma_n.to_string());
            }
            Task::Deblur => {
                let noise = match self.scenario.noise {
                    NoiseModel::Variance(v) => format!("variance {v}"),
                    NoiseModel::Bsnr(db) => format!("bsnr {db} dB"),
                };
                run.set("scenario", self.scenario.id.to_string()).set("noise", noise);
            }
        }
        match self.solver {
            SolverKind::Idbp | SolverKind::IdbpAuto => {
                let c = &self.idbp;
                let mut s = ini.with_section(Some("idbp"));
                s.set("delta", c.delta.to_string())
                    .set("iters", c.iterations.to_string())
                    .set(
                        "output-mode",
                        match c.output_mode {
                            OutputMode::LastX => "last_x",
                            OutputMode::LastY => "last_y",
                        },
                    );
                if self.task == Task::Deblur {
                    s.set("epsilon", c.epsilon.to_string());
                }
                if self.solver == SolverKind::IdbpAuto {
                    s.set("tau", c.condition_margin_tau.to_string())
                        .set("eps-increment", c.epsilon_increment.to_string())
                        .set("restart-cap", c.restart_cap.to_string());
                }
            }
            SolverKind::Pnp => {
                let c = &self.pnp;
                ini.with_section(Some("pnp"))
                    .set("beta", c.beta.to_string())
                    .set("lambda", c.lambda.to_string())
                    .set("iters", c.iterations.to_string())
                    .set("sigma-floor", c.sigma_floor.to_string());
            }
        }
        if !self.corpus.is_empty() {
            let mut s = ini.with_section(Some("corpus"));
            for (i, p) in self.corpus.iter().enumerate() {
                s.set(format!("image.{i}"), p.display().to_string());
            }
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }
}

/// Everything produced by one image run.
#[derive(Debug, Clone)]
pub struct ImageRun {
    pub degraded: ImageGrid,
    pub estimate: ImageGrid,
    pub trace: IterationTrace,
    pub input_psnr_db: f64,
    pub metrics: MetricReport,
}

/// Synthesizes the degradation of `x` from `seed` and restores it.
pub fn run_image(spec: &ExperimentSpec, x: &ImageGrid, seed: u64) -> idbp_core::Result<ImageRun> {
    let (h, w) = x.dims();
    let mut rng = RngState::new(seed);
    let den: &dyn Denoiser = &spec.denoiser;
    let (y, estimate, trace, bsnr_db) = match spec.task {
        Task::Inpaint => {
            let op = generate_random_mask(h, w, spec.mask_frac, &mut rng)?;
            let y = op.observe(x, spec.sigma_n, &mut rng)?;
            let init = median_initialize(&op, &y)?;
            let meas = Measurements::new(&y, spec.sigma_n).with_truth(x);
            let (est, trace) = match spec.solver {
                SolverKind::Pnp => pnp_run(&op, meas, den, &spec.pnp, &init)?,
                SolverKind::Idbp => idbp_run(&op, meas, den, &spec.idbp, &init)?,
                SolverKind::IdbpAuto => {
                    return Err(idbp_core::Error::InvalidArgument(
                        "auto-tuned IDBP is defined for deblurring only".into(),
                    ))
                }
            };
            (y, est, trace, None)
        }
        Task::Deblur => {
            let (y, sigma_n, blurred) = spec.scenario.degrade(x, &mut rng)?;
            let op = spec.scenario.operator(h, w, spec.idbp.epsilon, sigma_n)?;
            let meas = Measurements::new(&y, sigma_n).with_truth(x);
            let (est, trace) = match spec.solver {
                SolverKind::Pnp => pnp_run(&op, meas, den, &spec.pnp, &y)?,
                SolverKind::Idbp => idbp_run(&op, meas, den, &spec.idbp, &y)?,
                SolverKind::IdbpAuto => idbp_auto_tuned(&op, meas, den, &spec.idbp, &y)?,
            };
            let b = if sigma_n > 0.0 { Some(bsnr(&blurred, sigma_n)?) } else { None };
            (y, est, trace, b)
        }
    };
    let input_psnr_db = psnr(x, &y)?;
    let psnr_db = psnr(x, &estimate)?;
    Ok(ImageRun {
        degraded: y,
        estimate,
        trace,
        input_psnr_db,
        metrics: MetricReport {
            psnr_db,
            isnr_db: Some(psnr_db - input_psnr_db),
            bsnr_db,
        },
    })
}

/// One summary row; `error` is set when the image failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image: String,
    pub input_psnr_db: Option<f64>,
    pub metrics: Option<MetricReport>,
    pub restarts: Option<usize>,
    pub final_epsilon: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub count: usize,
    pub input_psnr_db: Option<f64>,
    pub psnr_db: Option<f64>,
    pub isnr_db: Option<f64>,
    pub bsnr_db: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub average: Averages,
    pub resolved_config: String,
    pub trace_files: Vec<PathBuf>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    match v {
        Some(v) if !v.is_empty() => Some(v.iter().sum::<f64>() / v.len() as f64),
        _ => None,
    }
}

/// Arithmetic means over the rows that succeeded.
pub fn averages(rows: &[ReportRow]) -> Averages {
    let ok: Vec<&ReportRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    Averages {
        count: ok.len(),
        input_psnr_db: mean(ok.iter().map(|r| r.input_psnr_db)),
        psnr_db: mean(ok.iter().map(|r| r.metrics.map(|m| m.psnr_db))),
        isnr_db: mean(ok.iter().map(|r| r.metrics.and_then(|m| m.isnr_db))),
        bsnr_db: mean(ok.iter().map(|r| r.metrics.and_then(|m| m.bsnr_db))),
    }
}

pub fn row_for(image: String, run: &ImageRun) -> ReportRow {
    let last = run.trace.last();
    ReportRow {
        image,
        input_psnr_db: Some(run.input_psnr_db),
        metrics: Some(run.metrics),
        restarts: Some(run.trace.restarts()),
        final_epsilon: last.and_then(|r| r.epsilon),
        error: None,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `spec` on every image of its corpus. Images run concurrently; rows keep
/// corpus order. Per-image failures are recorded in the row and do not abort
/// the batch.
pub fn run_benchmark(spec: &ExperimentSpec) -> Result<RunReport> {
    if spec.corpus.is_empty() {
        return Err(CliError::usage("the corpus is empty"));
    }
    let results: Vec<(String, idbp_core::Result<ImageRun>)> = spec
        .corpus
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let run = load_pgm(path).and_then(|x| run_image(spec, &x, spec.seed.wrapping_add(i as u64)));
            (stem(path), run)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut trace_files = Vec::new();
    if let Some(dir) = &spec.output_dir {
        std::fs::create_dir_all(dir.join("traces")).map_err(io_err(dir))?;
        std::fs::create_dir_all(dir.join("restored")).map_err(io_err(dir))?;
    }
    for (name, result) in results {
        match result {
            Ok(run) => {
                if let Some(dir) = &spec.output_dir {
                    let trace_path = dir.join("traces").join(format!("{name}.csv"));
                    emit_trace_csv(&run.trace, &trace_path)?;
                    trace_files.push(trace_path);
                    save_pgm(&run.estimate, dir.join("restored").join(format!("{name}.pgm")))?;
                }
                rows.push(row_for(name, &run));
            }
            Err(e) => rows.push(ReportRow {
                image: name,
                input_psnr_db: None,
                metrics: None,
                restarts: None,
                final_epsilon: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let report = RunReport {
        average: averages(&rows),
        rows,
        resolved_config: spec.resolved_ini(),
        trace_files,
    };
    if let Some(dir) = &spec.output_dir {
        write_summary_file(&report, &dir.join("summary.csv"))?;
        let cfg = dir.join("config.ini");
        std::fs::write(&cfg, &report.resolved_config).map_err(io_err(&cfg))?;
    }
    Ok(report)
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "image",
    "input_psnr_db",
    "psnr_db",
    "isnr_db",
    "bsnr_db",
    "restarts",
    "epsilon",
    "status",
];

pub const AVERAGE_LABEL: &str = "average";

/// Summary table with one row per image followed by the average row.
pub fn write_summary_csv(report: &RunReport, out: impl Write) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in &report.rows {
        let m = r.metrics;
        w.write_record([
            r.image.clone(),
            cell(r.input_psnr_db),
            cell(m.map(|m| m.psnr_db)),
            cell(m.and_then(|m| m.isnr_db)),
            cell(m.and_then(|m| m.bsnr_db)),
            r.restarts.map(|n| n.to_string()).unwrap_or_default(),
            cell(r.final_epsilon),
            match &r.error {
                None => "ok".to_string(),
                Some(e) => format!("error: {e}"),
            },
        ])?;
    }
    let a = &report.average;
    w.write_record([
        AVERAGE_LABEL.to_string(),
        cell(a.input_psnr_db),
        cell(a.psnr_db),
        cell(a.isnr_db),
        cell(a.bsnr_db),
        String::new(),
        String::new(),
        format!("n={}", a.count),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_summary_file(report: &RunReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_summary_csv(report, std::io::BufWriter::new(file)).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a summary back into rows and the average row.
pub fn parse_summary_csv(input: impl Read) -> std::result::Result<(Vec<ReportRow>, Averages), String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    let mut average = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if &rec[0] == AVERAGE_LABEL {
            let count = rec[7]
                .strip_prefix("n=")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("bad average status {:?}", &rec[7]))?;
            average = Some(Averages {
                count,
                input_psnr_db: parse_cell(&rec[1])?,
                psnr_db: parse_cell(&rec[2])?,
                isnr_db: parse_cell(&rec[3])?,
                bsnr_db: parse_cell(&rec[4])?,
            });
            continue;
        }
        let error = match &rec[7] {
            "ok" => None,
            s => Some(s.strip_prefix("error: ").unwrap_or(s).to_string()),
        };
        let metrics = parse_cell(&rec[2])?.map(|psnr_db| -> std::result::Result<MetricReport, String> {
            Ok(MetricReport {
                psnr_db,
                isnr_db: parse_cell(&rec[3])?,
                bsnr_db: parse_cell(&rec[4])?,
            })
        });
        rows.push(ReportRow {
            image: rec[0].to_string(),
            input_psnr_db: parse_cell(&rec[1])?,
            metrics: metrics.transpose()?,
            restarts: if rec[5].is_empty() {
                None
            } else {
                Some(rec[5].parse().map_err(|_| format!("bad restart count {:?}", &rec[5]))?)
            },
            final_epsilon: parse_cell(&rec[6])?,
            error,
        });
    }
    Ok((rows, average.ok_or("missing average row")?))
}
