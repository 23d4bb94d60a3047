mod common;

use common::{blur_matrix, mask_matrix, rel_err, solve, synthetic, tikhonov_pinv, to_vec};
use idbp_core::denoisers::{estimate_conditions, Denoiser, DenoiserSpec};
use idbp_core::operators::{generate_random_mask, scenario, BlurOperator, DegradationOperator};
use idbp_core::solvers::{
    idbp_run, idbp_run_observed, improved_measurements, median_initialize, pnp_run, IdbpConfig, Measurements,
    OutputMode, PnpConfig,
};
use idbp_core::{ImageGrid, RngState};
use nalgebra::DMatrix;

struct Run {
    ybar_err: Vec<f64>,
    x_err: Vec<f64>,
    y0_err: f64,
    pinv_e: f64,
    bound_b: f64,
    triangle_min_slack: f64,
}

/// Noisy inpainting with the linear oracle; records every quantity the error bounds use.
fn oracle_inpainting(alpha: f64, n: usize, sigma_n: f64, frac: f64, seed: u64, iters: usize) -> Run {
    let x = synthetic(n, n, seed);
    let mut rng = RngState::new(seed);
    let op = generate_random_mask(n, n, frac, &mut rng).unwrap();
    let e = op.forward(&rng.gaussian_image(n, n, sigma_n).unwrap()).unwrap();
    let y = op.forward(&x).unwrap().add(&e).unwrap();
    let ybar = improved_measurements(&x, &op, &e).unwrap();
    let init = median_initialize(&op, &y).unwrap();
    let den = DenoiserSpec::oracle_linear(alpha, x.clone()).unwrap();
    let cfg = IdbpConfig {
        delta: 0.0,
        iterations: iters,
        output_mode: OutputMode::LastX,
        ..IdbpConfig::default()
    };
    let sigma = sigma_n + cfg.delta;

    let mut steps = Vec::new();
    idbp_run_observed(&op, Measurements::new(&y, sigma_n), &den, &cfg, &init, &mut |s| {
        steps.push((s.y_prev.clone(), s.x_tilde.clone(), s.y_tilde.clone()))
    })
    .unwrap();

    let bound_b = steps
        .iter()
        .map(|(z, d, _)| d.distance(z).unwrap() / sigma)
        .fold(0.0, f64::max);
    let mut triangle_min_slack = f64::INFINITY;
    for w in steps.windows(2) {
        let dz = w[1].0.distance(&w[0].0).unwrap();
        let dd = w[1].1.distance(&w[0].1).unwrap();
        triangle_min_slack = triangle_min_slack.min(dz + 2.0 * sigma * bound_b - dd);
    }
    Run {
        ybar_err: steps.iter().map(|(_, _, yt)| yt.distance(&ybar).unwrap()).collect(),
        x_err: steps.iter().map(|(_, xt, _)| xt.distance(&x).unwrap()).collect(),
        y0_err: init.distance(&ybar).unwrap(),
        pinv_e: op.pseudoinverse(&e).unwrap().norm(),
        bound_b,
        triangle_min_slack,
    }
}

/// Iterations until `(1−α)ᵏ` reaches 1e-6; beyond that the distance is dominated by round-off.
fn geometric_horizon(alpha: f64) -> usize {
    (1e-6f64.ln() / (1.0 - alpha).ln()).floor() as usize
}

#[test]
fn oracle_trajectory_decays_geometrically() {
    for &alpha in &[0.1, 0.5, 0.9] {
        let run = oracle_inpainting(alpha, 32, 10.0, 0.8, 1, geometric_horizon(alpha));
        let mut prev = run.y0_err;
        for (k, &e) in run.ybar_err.iter().enumerate() {
            let expect = (1.0 - alpha).powi(k as i32 + 1) * run.y0_err;
            assert!((e - expect).abs() <= 1e-9 * expect.max(1e-300), "α={alpha} k={}", k + 1);
            assert!(e < prev || (e == 0.0 && prev == 0.0));
            prev = e;
        }
    }
}

#[test]
fn error_bound_and_triangle_bound_hold_along_the_run() {
    for &(sigma_n, seed) in &[(10.0, 2u64), (0.5, 3)] {
        for &alpha in &[0.1, 0.5, 0.9] {
            let run = oracle_inpainting(alpha, 24, sigma_n, 0.8, seed, 25);
            let k_sigma = 1.0 - alpha;
            for (k, &err) in run.x_err.iter().enumerate() {
                let bound = k_sigma.powi(k as i32) * run.y0_err
                    + run.pinv_e / (1.0 - k_sigma)
                    + (1.0 / (1.0 - k_sigma) + 5.0) * sigma_n * run.bound_b;
                assert!(err <= bound + 1e-9, "α={alpha} k={k}: {err} > {bound}");
            }
            assert!(run.triangle_min_slack >= -1e-9);
        }
    }
}

#[test]
fn measured_contraction_of_the_oracle() {
    let x = synthetic(16, 16, 4);
    let mut rng = RngState::new(4);
    let op = generate_random_mask(16, 16, 0.5, &mut rng).unwrap();
    let samples: Vec<ImageGrid> = (0..4).map(|i| synthetic(16, 16, 40 + i)).collect();
    let den = DenoiserSpec::oracle_linear(0.3, x).unwrap();
    let d = estimate_conditions(&den, &op, &samples, 5.0, &mut rng).unwrap();
    assert!((d.contraction_estimate_k - 0.7).abs() < 1e-10);
    assert!(d.min_triangle_slack >= 0.0);
}

fn shrink_case() -> (ImageGrid, f64, f64) {
    (synthetic(16, 16, 9), 0.01, 5.0)
}

#[test]
fn pnp_reaches_quadratic_minimizer_for_inpainting() {
    let (x, gamma, sigma_n) = shrink_case();
    let mut rng = RngState::new(9);
    let op = generate_random_mask(16, 16, 0.5, &mut rng).unwrap();
    let y = op.observe(&x, sigma_n, &mut rng).unwrap();
    let hm = mask_matrix(&op);
    let yc = nalgebra::DVector::from_vec(op.compact(&y).unwrap());
    let a = hm.transpose() * &hm + DMatrix::identity(256, 256) * (gamma * sigma_n * sigma_n);
    let expect = solve(a, &(hm.transpose() * yc));

    let cfg = PnpConfig {
        beta: 1.0,
        lambda: 0.04,
        iterations: 3000,
        sigma_floor: 1e-3,
    };
    let den = DenoiserSpec::LinearShrink { gamma };
    let (est, trace) = pnp_run(&op, Measurements::new(&y, sigma_n), &den, &cfg, &y).unwrap();
    assert!(rel_err(est.data(), expect.as_slice()) < 1e-6);
    assert!(trace.last().unwrap().step_norm < 1e-9);
}

#[test]
fn pnp_reaches_quadratic_minimizer_for_blur() {
    let (x, gamma, sigma_n) = shrink_case();
    let s = scenario(3).unwrap();
    let op = BlurOperator::new(s.kernel.clone(), 16, 16, 0.0, sigma_n).unwrap();
    let mut rng = RngState::new(10);
    let y = op.observe(&x, sigma_n, &mut rng).unwrap();
    let hm = blur_matrix(&s.kernel, 16, 16);
    let a = hm.transpose() * &hm + DMatrix::identity(256, 256) * (gamma * sigma_n * sigma_n);
    let expect = solve(a, &(hm.transpose() * to_vec(&y)));

    let cfg = PnpConfig {
        beta: 1.0,
        lambda: 0.04,
        iterations: 3000,
        sigma_floor: 1e-3,
    };
    let den = DenoiserSpec::LinearShrink { gamma };
    let (est, _) = pnp_run(&op, Measurements::new(&y, sigma_n), &den, &cfg, &y).unwrap();
    assert!(rel_err(est.data(), expect.as_slice()) < 1e-6);
}

#[test]
fn idbp_reaches_linear_fixed_point_for_inpainting() {
    let (x, gamma, sigma_n) = shrink_case();
    let mut rng = RngState::new(11);
    let op = generate_random_mask(16, 16, 0.6, &mut rng).unwrap();
    let y = op.observe(&x, sigma_n, &mut rng).unwrap();
    let cfg = IdbpConfig {
        delta: 2.0,
        iterations: 400,
        ..IdbpConfig::default()
    };
    let c = 1.0 / (1.0 + gamma * (sigma_n + cfg.delta).powi(2));
    let hm = mask_matrix(&op);
    let q = DMatrix::identity(256, 256) - hm.transpose() * &hm;
    let rhs = hm.transpose() * nalgebra::DVector::from_vec(op.compact(&y).unwrap()) * c;
    let expect = solve(DMatrix::identity(256, 256) - q * c, &rhs);

    let den = DenoiserSpec::LinearShrink { gamma };
    let (est, trace) = idbp_run(&op, Measurements::new(&y, sigma_n), &den, &cfg, &y).unwrap();
    assert!(rel_err(est.data(), expect.as_slice()) < 1e-8);
    assert!(trace.last().unwrap().step_norm < 1e-9);
}

#[test]
fn idbp_reaches_linear_fixed_point_for_blur() {
    let (x, gamma, sigma_n) = shrink_case();
    let s = scenario(1).unwrap();
    let eps = s.idbp_epsilon;
    let op = BlurOperator::new(s.kernel.clone(), 16, 16, eps, sigma_n).unwrap();
    let mut rng = RngState::new(12);
    let y = op.observe(&x, sigma_n, &mut rng).unwrap();
    let cfg = IdbpConfig {
        delta: 5.0,
        iterations: 400,
        epsilon: eps,
        ..IdbpConfig::default()
    };
    let c = 1.0 / (1.0 + gamma * (sigma_n + cfg.delta).powi(2));
    let hm = blur_matrix(&s.kernel, 16, 16);
    let pinv = tikhonov_pinv(&hm, eps * sigma_n * sigma_n);
    let q = DMatrix::identity(256, 256) - &pinv * &hm;
    let rhs = &pinv * to_vec(&y) * c;
    let expect = solve(DMatrix::identity(256, 256) - q * c, &rhs);

    let den = DenoiserSpec::LinearShrink { gamma };
    let (est, _) = idbp_run(&op, Measurements::new(&y, sigma_n), &den, &cfg, &y).unwrap();
    assert!(rel_err(est.data(), expect.as_slice()) < 1e-8);
}

#[test]
fn runs_are_deterministic() {
    let x = synthetic(32, 32, 5);
    let run = || {
        let mut rng = RngState::new(77);
        let op = generate_random_mask(32, 32, 0.8, &mut rng).unwrap();
        let y = op.observe(&x, 10.0, &mut rng).unwrap();
        let init = median_initialize(&op, &y).unwrap();
        let cfg = IdbpConfig {
            iterations: 5,
            ..IdbpConfig::noisy_inpainting()
        };
        idbp_run(&op, Measurements::new(&y, 10.0).with_truth(&x), &DenoiserSpec::default(), &cfg, &init).unwrap()
    };
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let den = DenoiserSpec::default();
    assert_eq!(den.denoise(&x, 10.0).unwrap(), den.denoise(&x, 10.0).unwrap());
}
