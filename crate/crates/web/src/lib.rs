//! Browser bindings for the static page in `www/`.
//!
//! Three operations, each a plain Rust function (tested natively) plus a thin
//! `wasm_bindgen` wrapper:
//!
//! - [`rate_table`]: lambda rule, theoretical rates and effective dimension
//!   along a doubling grid of sample sizes for `mu_j = j^{-b}`;
//! - [`filter_residuals`]: `|r_lambda(t)|` of the four filter families on a
//!   log grid, which shows where each one saturates;
//! - [`fit_demo`]: one synthetic sample, one fit, the estimate against the
//!   target on a grid, and the exact error norms.

use wasm_bindgen::prelude::*;

use specreg::estimator::CoefficientSolver;
use specreg::filters::{FilterFamily, FilterKind};
use specreg::mercer::{Basis, MercerProblem, NoiseModel, SourceParams};
use specreg::rates::{lambda_rule, theoretical_rate, ModelParams};
use specreg::spectrum::SpectrumProfile;

/// Points on the plotting grid of [`fit_demo`].
pub const PLOT_POINTS: usize = 200;
/// Largest sample size the page may request for a live fit.
pub const MAX_DEMO_N: usize = 2000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Columns of [`rate_table`], one entry per sample size.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub n: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Theoretical rate in `||.||_H` (`s = 0`).
    pub rate_h: Vec<f64>,
    /// Theoretical rate in `L^2` (`s = 1/2`).
    pub rate_l2: Vec<f64>,
    pub effective_dimension: Vec<f64>,
}

pub fn rate_table(b: f64, p: usize, r: f64, sigma: f64, radius: f64, n_max: usize) -> Result<RateTable, String> {
    let profile = SpectrumProfile::polynomial(b, p).map_err(err)?;
    let params = ModelParams::gaussian(sigma, radius, r, profile).map_err(err)?;
    let mut table = RateTable { n: vec![], lambda: vec![], rate_h: vec![], rate_l2: vec![], effective_dimension: vec![] };
    let mut n = 16;
    while n <= n_max.max(16) {
        let lam = lambda_rule(&params, n).map_err(err)?;
        table.n.push(n as f64);
        table.lambda.push(lam);
        table.rate_h.push(theoretical_rate(&params, n, 0.0).map_err(err)?);
        table.rate_l2.push(theoretical_rate(&params, n, 0.5).map_err(err)?);
        table.effective_dimension.push(params.profile.effective_dimension(lam).map_err(err)?);
        n *= 2;
    }
    Ok(table)
}

pub fn parse_filter(name: &str) -> Result<FilterFamily, String> {
    let kind = match name {
        "tikhonov" => FilterKind::Tikhonov,
        "spectral_cutoff" => FilterKind::SpectralCutoff,
        "landweber" => FilterKind::Landweber { step: 1.0 },
        "iterated_tikhonov" => FilterKind::IteratedTikhonov { m: 2 },
        other => return Err(format!("unknown filter '{other}'")),
    };
    FilterFamily::with_default_constants(kind).map_err(err)
}

pub const FILTER_NAMES: [&str; 4] = ["tikhonov", "spectral_cutoff", "landweber", "iterated_tikhonov"];

/// `t` on `[1e-4, 1]` and `|r_lambda(t)|` for each of [`FILTER_NAMES`], in
/// that order, flattened row by row.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn filter_residuals(lambda: f64, points: usize) -> Result<Residuals, String> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(format!("lambda must lie in (0, 1], got {lambda}"));
    }
    if points < 2 {
        return Err("need at least two points".into());
    }
    let t: Vec<f64> = (0..points).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / (points - 1) as f64)).collect();
    let mut values = Vec::with_capacity(points * FILTER_NAMES.len());
    for name in FILTER_NAMES {
        let f = parse_filter(name)?;
        values.extend(t.iter().map(|&x| f.r(lambda, x).abs()));
    }
    Ok(Residuals { t, values })
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct FitDemo {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub grid: Vec<f64>,
    pub estimate: Vec<f64>,
    pub target: Vec<f64>,
    pub lambda: f64,
    pub error_h: f64,
    pub error_l2: f64,
}

/// Fits `filter` at `lambda_scale` times the lambda rule (capped at 1) to `n` draws from
/// the edge-of-class problem on `[0, 1]` with the Fourier basis.
#[allow(clippy::too_many_arguments)]
pub fn fit_demo(
    b: f64,
    p: usize,
    r: f64,
    sigma: f64,
    n: usize,
    lambda_scale: f64,
    filter: &str,
    seed: u64,
) -> Result<FitDemo, String> {
    if n == 0 || n > MAX_DEMO_N {
        return Err(format!("n must lie in 1..={MAX_DEMO_N}"));
    }
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(format!("lambda scale must be positive, got {lambda_scale}"));
    }
    let filter = parse_filter(filter)?;
    let profile = SpectrumProfile::polynomial(b, p).map_err(err)?;
    let problem = MercerProblem::edge_of_class(
        profile.clone(),
        Basis::FourierUnitInterval,
        SourceParams::new(r, 1.0, 0.5).map_err(err)?,
        0.0,
        NoiseModel::Gaussian { sigma },
    )
    .map_err(err)?;
    // the rule needs a positive class sigma even for noiseless draws
    let params = ModelParams::gaussian(sigma.max(1e-3), 1.0, r, profile).map_err(err)?;
    let lambda = (lambda_scale * lambda_rule(&params, n).map_err(err)?).min(1.0);
    let data = problem.sample(n, seed).map_err(err)?;
    let coeffs = CoefficientSolver::new(&problem, &data.x, &data.y)
        .and_then(|s| s.coefficients(&filter, lambda))
        .map_err(err)?;
    let grid: Vec<f64> = (0..PLOT_POINTS).map(|i| i as f64 / (PLOT_POINTS - 1) as f64).collect();
    Ok(FitDemo {
        estimate: grid.iter().map(|&t| problem.synthesize(&coeffs, t)).collect(),
        target: grid.iter().map(|&t| problem.target_eval(t)).collect(),
        grid,
        lambda,
        error_h: problem.error_norm(&coeffs, 0.0).map_err(err)?,
        error_l2: problem.error_norm(&coeffs, 0.5).map_err(err)?,
        x: data.x,
        y: data.y,
    })
}

#[wasm_bindgen(js_name = rateTable)]
pub fn rate_table_js(b: f64, p: usize, r: f64, sigma: f64, radius: f64, n_max: usize) -> Result<RateTable, JsError> {
    rate_table(b, p, r, sigma, radius, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = filterResiduals)]
pub fn filter_residuals_js(lambda: f64, points: usize) -> Result<Residuals, JsError> {
    filter_residuals(lambda, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fitDemo)]
#[allow(clippy::too_many_arguments)]
pub fn fit_demo_js(
    b: f64,
    p: usize,
    r: f64,
    sigma: f64,
    n: usize,
    lambda_scale: f64,
    filter: &str,
    seed: u32,
) -> Result<FitDemo, JsError> {
    fit_demo(b, p, r, sigma, n, lambda_scale, filter, seed as u64).map_err(|e| JsError::new(&e))
}
