//! Settings from `idbp.cfg` and the command line, and their resolution into an
//! [`ExperimentSpec`].
//!
//! Precedence: built-in protocol defaults < config file < command-line flags.
//! The config file is INI-style; keys are the long flag names without the
//! leading dashes (`mask-frac = 0.8`). Section headers are allowed and ignored.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use idbp_core::denoisers::{DctParams, DenoiserSpec, ExternalDenoiser, GaussianParams, NlmParams};
use idbp_core::operators::{scenario, NoiseModel};
use idbp_core::solvers::{IdbpConfig, PnpConfig};
use ini::Ini;

use crate::bench::{ExperimentSpec, SolverKind, Task};
use crate::error::{CliError, Result};

pub const DEFAULT_CONFIG_FILE: &str = "idbp.cfg";

/// Parses a number, also accepting a quotient such as `2/255`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("invalid number {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("invalid number {s:?}"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("invalid number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Every overridable setting; `None` means "not given at this layer".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub task: Option<Task>,
    pub solver: Option<SolverKind>,
    pub input: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub mask_frac: Option<f64>,
    pub seed: Option<u64>,
    pub sigma_n: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub auto_tune: Option<bool>,
    pub tau: Option<f64>,
    pub eps_increment: Option<f64>,
    pub iters: Option<usize>,
    pub denoiser: Option<String>,
    pub external_cmd: Option<String>,
    pub scenario: Option<u8>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub trace: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Settings {
    /// `other` wins wherever it has a value.
    pub fn overlay(mut self, other: Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            task, solver, output, mask_frac, seed, sigma_n, delta, epsilon, auto_tune, tau, eps_increment, iters,
            denoiser, external_cmd, scenario, beta, lambda, trace, report
        );
        if !other.input.is_empty() {
            self.input = other.input;
        }
        self
    }

    pub fn from_ini_file(path: &Path) -> Result<Settings> {
        let ini = Ini::load_from_file(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Settings::from_ini(&ini).map_err(|reason| CliError::Config {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn from_ini_str(text: &str) -> std::result::Result<Settings, String> {
        let ini = Ini::load_from_str(text).map_err(|e| e.to_string())?;
        Settings::from_ini(&ini)
    }

    fn from_ini(ini: &Ini) -> std::result::Result<Settings, String> {
        let mut s = Settings::default();
        for (_, props) in ini.iter() {
            for (key, value) in props.iter() {
                s.set(key, value)?;
            }
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn parsed<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.trim().parse().map_err(|_| format!("invalid value {v:?} for {key}"))
        }
        let num = |v: &str| parse_number(v).map_err(|e| format!("{key}: {e}"));
        let v = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "task" => self.task = Some(parsed(key, v)?),
            "solver" => self.solver = Some(parsed(key, v)?),
            "input" => self.input = vec![PathBuf::from(v)],
            "output" => self.output = Some(PathBuf::from(v)),
            "mask-frac" => self.mask_frac = Some(num(v)?),
            "seed" => self.seed = Some(parsed(key, v)?),
            "sigma-n" => self.sigma_n = Some(num(v)?),
            "delta" => self.delta = Some(num(v)?),
            "epsilon" => self.epsilon = Some(num(v)?),
            "auto-tune" => self.auto_tune = Some(parsed(key, v)?),
            "tau" => self.tau = Some(num(v)?),
            "eps-increment" => self.eps_increment = Some(num(v)?),
            "iters" => self.iters = Some(parsed(key, v)?),
            "denoiser" => self.denoiser = Some(v.to_string()),
            "external-cmd" => self.external_cmd = Some(v.to_string()),
            "scenario" => self.scenario = Some(parsed(key, v)?),
            "beta" => self.beta = Some(num(v)?),
            "lambda" => self.lambda = Some(num(v)?),
            "trace" => self.trace = Some(PathBuf::from(v)),
            "report" => self.report = Some(PathBuf::from(v)),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Fills unset values from the protocol defaults of the chosen task and solver.
    pub fn resolve(&self, default_task: Task, default_solver: SolverKind) -> Result<ExperimentSpec> {
        let task = self.task.unwrap_or(default_task);
        let mut solver = self.solver.unwrap_or(default_solver);
        if self.auto_tune == Some(true) {
            match (task, solver) {
                (Task::Deblur, SolverKind::Idbp | SolverKind::IdbpAuto) => solver = SolverKind::IdbpAuto,
                _ => return Err(CliError::usage("--auto-tune applies to IDBP deblurring only")),
            }
        }
        if task == Task::Inpaint && solver == SolverKind::IdbpAuto {
            return Err(CliError::usage("auto-tuned IDBP is defined for deblurring only"));
        }

        let scenario_id = self.scenario.unwrap_or(1);
        let mut scen = scenario(scenario_id).map_err(|e| CliError::usage(e.to_string()))?;
        let mask_frac = self.mask_frac.unwrap_or(0.8);
        let sigma_n = self.sigma_n.unwrap_or(10.0);
        if !(0.0..1.0).contains(&mask_frac) {
            return Err(CliError::usage(format!("--mask-frac must lie in [0, 1), got {mask_frac}")));
        }
        if !(sigma_n >= 0.0) {
            return Err(CliError::usage(format!("--sigma-n must be nonnegative, got {sigma_n}")));
        }

        let (mut idbp, mut pnp) = match task {
            Task::Inpaint if sigma_n == 0.0 => (IdbpConfig::noiseless_inpainting(), PnpConfig::noiseless_inpainting()),
            Task::Inpaint => (IdbpConfig::noisy_inpainting(), PnpConfig::noisy_inpainting()),
            Task::Deblur => {
                if let Some(s) = self.sigma_n {
                    scen.noise = NoiseModel::Variance(s * s);
                }
                (IdbpConfig::deblurring(scenario_id)?, PnpConfig::deblurring(scenario_id)?)
            }
        };
        if let Some(v) = self.delta {
            idbp.delta = v;
        }
        if let Some(v) = self.epsilon {
            idbp.epsilon = v;
        }
        if let Some(v) = self.tau {
            idbp.condition_margin_tau = v;
        }
        if let Some(v) = self.eps_increment {
            idbp.epsilon_increment = v;
        }
        if let Some(v) = self.iters {
            idbp.iterations = v;
            pnp.iterations = v;
        }
        if let Some(v) = self.beta {
            pnp.beta = v;
        }
        if let Some(v) = self.lambda {
            pnp.lambda = v;
        }
        match solver {
            SolverKind::Pnp => pnp.validate(),
            _ => idbp.validate(),
        }
        .map_err(|e| CliError::usage(e.to_string()))?;

        Ok(ExperimentSpec {
            task,
            solver,
            mask_frac,
            sigma_n,
            scenario: scen,
            denoiser: self.denoiser_spec()?,
            idbp,
            pnp,
            seed: self.seed.unwrap_or(0),
            corpus: Vec::new(),
            output_dir: None,
        })
    }

    fn denoiser_spec(&self) -> Result<DenoiserSpec> {
        let name = match (&self.denoiser, &self.external_cmd) {
            (Some(n), _) => n.to_ascii_lowercase(),
            (None, Some(_)) => "external".into(),
            (None, None) => "dct".into(),
        };
        Ok(match name.as_str() {
            "dct" => DenoiserSpec::DctThreshold(DctParams::default()),
            "nlm" => DenoiserSpec::Nlm(NlmParams::default()),
            "median" => DenoiserSpec::median3x3(),
            "gaussian" => DenoiserSpec::Gaussian(GaussianParams::default()),
            "identity" => DenoiserSpec::Identity,
            "external" => {
                let ext = match &self.external_cmd {
                    Some(cmd) => ExternalDenoiser::new(cmd.clone()),
                    None => ExternalDenoiser::from_env().ok_or_else(|| {
                        CliError::usage(format!(
                            "external denoiser needs --external-cmd or {}",
                            idbp_core::denoisers::EXTERNAL_DENOISER_ENV
                        ))
                    })?,
                };
                DenoiserSpec::External(ext)
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown denoiser {other:?} (expected dct, nlm, median, gaussian, identity or external)"
                )))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotients() {
        assert_eq!(parse_number("2/255").unwrap(), 2.0 / 255.0);
        assert_eq!(parse_number(" 7e-3 ").unwrap(), 7e-3);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn file_then_flags() {
        let file = Settings::from_ini_str("[idbp]\ndelta = 3\niters = 12\n[run]\nlambda = 2/255\n").unwrap();
        let flags = Settings {
            delta: Some(1.0),
            ..Settings::default()
        };
        let s = Settings::default().overlay(file).overlay(flags);
        assert_eq!(s.delta, Some(1.0));
        assert_eq!(s.iters, Some(12));
        assert_eq!(s.lambda, Some(2.0 / 255.0));
        assert!(Settings::from_ini_str("bogus = 1\n").is_err());
    }

    #[test]
    fn protocol_defaults() {
        let spec = Settings::default().resolve(Task::Inpaint, SolverKind::Idbp).unwrap();
        assert_eq!((spec.idbp.delta, spec.idbp.iterations), (0.0, 75));
        let noiseless = Settings {
            sigma_n: Some(0.0),
            ..Settings::default()
        };
        let spec = noiseless.resolve(Task::Inpaint, SolverKind::Idbp).unwrap();
        assert_eq!((spec.idbp.delta, spec.idbp.iterations), (5.0, 150));
        let deblur = Settings {
            scenario: Some(4),
            auto_tune: Some(true),
            ..Settings::default()
        };
        let spec = deblur.resolve(Task::Deblur, SolverKind::Idbp).unwrap();
        assert_eq!(spec.solver, SolverKind::IdbpAuto);
        assert_eq!(spec.idbp.epsilon, 2e-3);
        assert_eq!(spec.pnp.iterations, 50);
    }

    #[test]
    fn bad_combinations_are_usage_errors() {
        let s = Settings {
            auto_tune: Some(true),
            ..Settings::default()
        };
        assert_eq!(s.resolve(Task::Inpaint, SolverKind::Idbp).unwrap_err().exit_code(), 1);
        let s = Settings {
            denoiser: Some("bm4d".into()),
            ..Settings::default()
        };
        assert_eq!(s.resolve(Task::Inpaint, SolverKind::Idbp).unwrap_err().exit_code(), 1);
    }
}
