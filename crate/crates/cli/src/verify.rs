//! Self-checks of the solver properties, runnable from the command line.
//!
//! Each check builds small synthetic problems from a seed and compares the
//! solvers with closed-form behavior.

use idbp_core::denoisers::{DenoiserSpec, GaussianParams};
use idbp_core::operators::{generate_random_mask, scenario, BlurOperator, DegradationOperator};
use idbp_core::solvers::{
    condition_ratio, idbp_run, idbp_run_observed, improved_measurements, median_initialize, pnp_run, IdbpConfig,
    Measurements, PnpConfig,
};
use idbp_core::{ImageGrid, Result, RngState};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn test_image(n: usize, seed: u64) -> Result<ImageGrid> {
    let tex = RngState::new(seed).gaussian_image(n, n, 8.0)?;
    ImageGrid::from_fn(n, n, |r, c| {
        let base = if r + c > n { 160.0 } else { 80.0 };
        base + 30.0 * (0.3 * r as f64).sin() + tex.get(r, c)
    })
}

pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check("projection algebra", || projection_algebra(seed)),
        check("condition identity", || condition_identity(seed)),
        check("oracle decay", || oracle_decay(seed)),
        check("error bound", || error_bound(seed)),
        check("idbp fixed point", || idbp_fixed_point(seed)),
        check("pnp stationarity", || pnp_stationarity(seed)),
        check("determinism", || determinism(seed)),
    ]
}

fn projection_algebra(seed: u64) -> Result<(bool, String)> {
    let mut rng = RngState::new(seed);
    let den = DenoiserSpec::Gaussian(GaussianParams::default());
    for trial in 0..200 {
        let op = generate_random_mask(16, 16, 0.1 + 0.8 * rng.next_f64(), &mut rng)?;
        let x = test_image(16, seed.wrapping_add(trial))?;
        let y = op.observe(&x, 10.0, &mut rng)?;
        if op.forward(&op.pseudoinverse(&y)?)? != y {
            return Ok((false, format!("H H† y ≠ y on instance {trial}")));
        }
        let q = op.project_null(&x)?;
        if op.project_null(&q)? != q {
            return Ok((false, format!("Q² ≠ Q on instance {trial}")));
        }
        let cfg = IdbpConfig {
            iterations: 2,
            ..IdbpConfig::default()
        };
        let mut ok = true;
        idbp_run_observed(&op, Measurements::new(&y, 10.0), &den, &cfg, &y, &mut |s| {
            ok &= op.forward(s.y_tilde).map(|v| v == y).unwrap_or(false);
            ok &= matches!((op.project_null(s.y_tilde), op.project_null(s.x_tilde)), (Ok(a), Ok(b)) if a == b);
        })?;
        if !ok {
            return Ok((false, format!("iterate constraint violated on instance {trial}")));
        }
    }
    Ok((true, "200 instances exact".into()))
}

fn condition_identity(seed: u64) -> Result<(bool, String)> {
    let mut rng = RngState::new(seed ^ 0x2);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let op = generate_random_mask(12, 12, 0.9 * rng.next_f64(), &mut rng)?;
        let sigma = 0.5 + 20.0 * rng.next_f64();
        let delta = if trial % 4 == 0 { 0.0 } else { 10.0 * rng.next_f64() };
        let x = test_image(12, trial)?;
        let y = op.observe(&x, sigma, &mut rng)?;
        let xt = rng.gaussian_image(12, 12, 30.0)?;
        let r = condition_ratio(&op, &y, &xt, sigma, delta)?;
        let expect = (sigma + delta).powi(2) / (sigma * sigma);
        worst = worst.max((r - expect).abs() / expect);
    }
    Ok((worst <= 1e-12, format!("max relative deviation {worst:.1e}")))
}

struct OracleRun {
    ybar_err: Vec<f64>,
    x_err: Vec<f64>,
    y0_err: f64,
    pinv_e: f64,
    bound_b: f64,
}

fn oracle_run(seed: u64, alpha: f64, iterations: usize) -> Result<OracleRun> {
    let (n, sigma_n) = (32, 10.0);
    let x = test_image(n, seed)?;
    let mut rng = RngState::new(seed);
    let op = generate_random_mask(n, n, 0.8, &mut rng)?;
    let e = op.forward(&rng.gaussian_image(n, n, sigma_n)?)?;
    let y = op.forward(&x)?.add(&e)?;
    let ybar = improved_measurements(&x, &op, &e)?;
    let init = median_initialize(&op, &y)?;
    let den = DenoiserSpec::oracle_linear(alpha, x.clone())?;
    let cfg = IdbpConfig {
        iterations,
        ..IdbpConfig::noisy_inpainting()
    };
    let mut run = OracleRun {
        ybar_err: Vec::new(),
        x_err: Vec::new(),
        y0_err: init.distance(&ybar)?,
        pinv_e: op.pseudoinverse(&e)?.norm(),
        bound_b: 0.0,
    };
    idbp_run_observed(&op, Measurements::new(&y, sigma_n), &den, &cfg, &init, &mut |s| {
        run.ybar_err.push(s.y_tilde.distance(&ybar).unwrap_or(f64::NAN));
        run.x_err.push(s.x_tilde.distance(&x).unwrap_or(f64::NAN));
        let b = s.x_tilde.distance(s.y_prev).unwrap_or(f64::NAN) / sigma_n;
        run.bound_b = run.bound_b.max(b);
    })?;
    Ok(run)
}

fn oracle_decay(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.1f64, 0.5, 0.9] {
        // stop before (1−α)ᵏ drops under 1e-6, where round-off dominates
        let iters = (1e-6f64.ln() / (1.0 - alpha).ln()).floor() as usize;
        let run = oracle_run(seed, alpha, iters)?;
        let mut prev = run.y0_err;
        for (k, &e) in run.ybar_err.iter().enumerate() {
            if !(e < prev) {
                return Ok((false, format!("α = {alpha}: no decrease at k = {}", k + 1)));
            }
            let expect = (1.0 - alpha).powi(k as i32 + 1) * run.y0_err;
            worst = worst.max((e - expect).abs() / expect);
            prev = e;
        }
    }
    Ok((worst <= 1e-9, format!("max relative deviation {worst:.1e}")))
}

fn error_bound(seed: u64) -> Result<(bool, String)> {
    let mut min_slack = f64::INFINITY;
    for &alpha in &[0.1f64, 0.5, 0.9] {
        let run = oracle_run(seed ^ 0x4, alpha, 30)?;
        let k_sigma = 1.0 - alpha;
        for (k, &err) in run.x_err.iter().enumerate() {
            let bound = k_sigma.powi(k as i32) * run.y0_err
                + run.pinv_e / (1.0 - k_sigma)
                + (1.0 / (1.0 - k_sigma) + 5.0) * 10.0 * run.bound_b;
            min_slack = min_slack.min(bound + 1e-9 - err);
        }
    }
    Ok((min_slack >= 0.0, format!("minimum slack {min_slack:.3}")))
}

/// With `D(z) = c·z` the IDBP limit solves `(I − c·Q_H)x̃ = c·H†y`; checks the residual.
fn idbp_fixed_point(seed: u64) -> Result<(bool, String)> {
    let (gamma, sigma_n) = (0.01, 5.0);
    let x = test_image(16, seed)?;
    let mut rng = RngState::new(seed ^ 0x5);
    let s = scenario(1)?;
    let blur = BlurOperator::new(s.kernel, 16, 16, s.idbp_epsilon, sigma_n)?;
    let mask = generate_random_mask(16, 16, 0.6, &mut rng)?;
    let cfg = IdbpConfig {
        delta: 3.0,
        iterations: 400,
        ..IdbpConfig::default()
    };
    let c = 1.0 / (1.0 + gamma * (sigma_n + cfg.delta).powi(2));
    let den = DenoiserSpec::LinearShrink { gamma };
    let mut worst: f64 = 0.0;
    for op in [&blur as &dyn DegradationOperator, &mask] {
        let y = op.observe(&x, sigma_n, &mut rng)?;
        let (est, _) = idbp_run(op, Measurements::new(&y, sigma_n), &den, &cfg, &y)?;
        let lhs = est.sub(&op.project_null(&est)?.scale(c))?;
        let rhs = op.pseudoinverse(&y)?.scale(c);
        worst = worst.max(lhs.distance(&rhs)? / rhs.norm().max(1.0));
    }
    Ok((worst <= 1e-8, format!("relative residual {worst:.1e}")))
}

/// With `D(z) = z/(1+γσ²)` and β = 1, P&P converges to `(HᵀH + γσₙ²I)x = Hᵀy`.
fn pnp_stationarity(seed: u64) -> Result<(bool, String)> {
    let (gamma, sigma_n) = (0.01, 5.0);
    let x = test_image(16, seed ^ 0x6)?;
    let mut rng = RngState::new(seed ^ 0x6);
    let op = generate_random_mask(16, 16, 0.5, &mut rng)?;
    let y = op.observe(&x, sigma_n, &mut rng)?;
    let cfg = PnpConfig {
        beta: 1.0,
        lambda: 0.04,
        iterations: 3000,
        sigma_floor: 1e-3,
    };
    let (est, _) = pnp_run(&op, Measurements::new(&y, sigma_n), &DenoiserSpec::LinearShrink { gamma }, &cfg, &y)?;
    // for a mask, Hᵀ is zero filling and HᵀH keeps the observed pixels
    let lhs = op.project_row(&est)?.add(&est.scale(gamma * sigma_n * sigma_n))?;
    let rhs = op.pseudoinverse(&y)?;
    let res = lhs.distance(&rhs)? / rhs.norm().max(1.0);
    Ok((res <= 1e-6, format!("relative residual {res:.1e}")))
}

fn determinism(seed: u64) -> Result<(bool, String)> {
    let run = || -> Result<_> {
        let x = test_image(32, seed)?;
        let mut rng = RngState::new(seed ^ 0x7);
        let op = generate_random_mask(32, 32, 0.8, &mut rng)?;
        let y = op.observe(&x, 10.0, &mut rng)?;
        let init = median_initialize(&op, &y)?;
        let cfg = IdbpConfig {
            iterations: 4,
            ..IdbpConfig::noisy_inpainting()
        };
        idbp_run(&op, Measurements::new(&y, 10.0).with_truth(&x), &DenoiserSpec::default(), &cfg, &init)
    };
    let (a, ta) = run()?;
    let (b, tb) = run()?;
    Ok((a == b && ta == tb, "two identical runs compared bitwise".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for r in run_all(0) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
