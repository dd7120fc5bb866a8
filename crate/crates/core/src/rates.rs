//! Rate calculus and the Monte-Carlo harness that checks it.
//!
//! The a-priori rule is `lambda_n = min(G^{-1}(sigma^2 / (R^2 n)), 1)` and the
//! predicted error in the `||B^s .||_H` norm is `R G^{-1}(sigma^2/(R^2 n))^{r+s}`.
//! Empirical slopes are always compared against the least-squares slope of
//! the theoretical curve on the same `n` grid, never against a closed-form
//! exponent, so irregular spectra are handled uniformly.

use rayon::prelude::*;

use crate::error::{domain, ensure_positive, Error, Result};
use crate::estimator::CoefficientSolver;
use crate::filters::{FilterFamily, MIN_GRID};
use crate::mercer::{check_norm_index, derive_seed, Dataset, MercerProblem};
use crate::spectrum::SpectrumProfile;

/// Minimum number of replicates per grid point.
pub const MIN_REPLICATES: usize = 20;

/// The model class: noise constants `(M, sigma)`, source radius `R`,
/// smoothness `r` and the covariance spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub sigma: f64,
    pub radius: f64,
    pub r: f64,
    pub profile: SpectrumProfile,
}

impl ModelParams {
    pub fn new(m: f64, sigma: f64, radius: f64, r: f64, profile: SpectrumProfile) -> Result<Self> {
        ensure_positive("M", m)?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("R", radius)?;
        ensure_positive("r", r)?;
        Ok(Self { m, sigma, radius, r, profile })
    }

    /// Gaussian instantiation, which satisfies the Bernstein condition with
    /// `M = sigma`.
    pub fn gaussian(sigma: f64, radius: f64, r: f64, profile: SpectrumProfile) -> Result<Self> {
        Self::new(sigma, sigma, radius, r, profile)
    }

    /// Class parameters of a problem; fails for a noiseless problem, whose
    /// rule needs an explicit class `sigma`.
    pub fn of_problem(problem: &MercerProblem) -> Result<Self> {
        let noise = problem.noise();
        Self::new(
            noise.bernstein_m(),
            noise.sigma(),
            problem.source().radius,
            problem.source().r,
            problem.profile().clone(),
        )
    }

    fn noise_level(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        Ok(self.sigma * self.sigma / (self.radius * self.radius * n as f64))
    }
}

/// `min(G^{-1}(sigma^2 / (R^2 n)), 1)`.
pub fn lambda_rule(params: &ModelParams, n: usize) -> Result<f64> {
    let t = params.profile.gee_inverse(params.noise_level(n)?, params.r)?;
    Ok(t.min(1.0))
}

/// `R G^{-1}(sigma^2 / (R^2 n))^{r+s}`.
pub fn theoretical_rate(params: &ModelParams, n: usize, s: f64) -> Result<f64> {
    check_norm_index(s)?;
    let t = params.profile.gee_inverse(params.noise_level(n)?, params.r)?;
    Ok(params.radius * t.powf(params.r + s))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub bound: f64,
    pub admissible: bool,
    /// `R (lambda^r + n^{-1/2})`
    pub approximation: f64,
    /// `M / (n lambda)`
    pub bernstein: f64,
    /// `sqrt(sigma^2 N(lambda) / (n lambda))`
    pub variance: f64,
    /// Smallest admissible `n`: `64 lambda^{-1} max(N(lambda), 1) log^2(8/eta)`.
    pub threshold: f64,
}

/// Non-asymptotic error envelope
/// `C log(8/eta) lambda^s (R(lambda^r + n^{-1/2}) + M/(n lambda) + sqrt(sigma^2 N(lambda)/(n lambda)))`,
/// with admissibility `n >= 64 lambda^{-1} max(N(lambda), 1) log^2(8/eta)`.
/// `constant` is a shape constant, not a certified one.
pub fn envelope(params: &ModelParams, n: usize, lambda: f64, eta: f64, s: f64, constant: f64) -> Result<Envelope> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("C", constant)?;
    check_norm_index(s)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let nf = n as f64;
    let eff = params.profile.effective_dimension(lambda)?;
    let log_term = (8.0 / eta).ln();
    let approximation = params.radius * (lambda.powf(params.r) + nf.powf(-0.5));
    let bernstein = params.m / (nf * lambda);
    let variance = (params.sigma * params.sigma * eff / (nf * lambda)).sqrt();
    let bound = constant * log_term * lambda.powf(s) * (approximation + bernstein + variance);
    let threshold = 64.0 / lambda * eff.max(1.0) * log_term * log_term;
    Ok(Envelope { bound, admissible: nf >= threshold, approximation, bernstein, variance, threshold })
}

/// Everything a rate run needs. `params` drives the lambda rule and the
/// theoretical curve; `problem` generates the data (its noise may be smaller
/// than the class `sigma`, e.g. zero).
#[derive(Clone, Debug)]
pub struct RateConfig {
    pub problem: MercerProblem,
    pub params: ModelParams,
    pub filter: FilterFamily,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub s: f64,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub lambda: f64,
    pub theoretical_rate: f64,
    pub errors: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log(median error)` against `log n`.
    pub fitted_slope: f64,
    /// Least-squares slope of `log(theoretical rate)` against `log n`.
    pub theoretical_slope: f64,
    pub warnings: Vec<String>,
}

impl RateReport {
    pub fn slope_gap(&self) -> f64 {
        self.fitted_slope - self.theoretical_slope
    }

    /// Whether each median is at most `(1 + tolerance)` times its predecessor.
    pub fn monotone_within(&self, tolerance: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].median <= (1.0 + tolerance) * w[0].median)
    }
}

/// Seed of replicate `rep` at sample size `n`; independent of grid order.
pub fn replicate_seed(seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), rep as u64)
}

/// Runs `f` over `items` on a pool of `jobs` threads, preserving order.
pub fn ordered_map<T, U, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn validate_run(n_grid: &[usize], replicates: usize, s: f64) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::Config("n grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] == 0 {
        return Err(Error::Config("n grid must be positive and strictly increasing".into()));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::Config(format!("at least {MIN_REPLICATES} replicates are required, got {replicates}")));
    }
    check_norm_index(s).map_err(|e| Error::Config(e.to_string()))?;
    Ok(())
}

fn qualification_warnings(filter: &FilterFamily, order: f64) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let declared = filter.constants().qualification.order();
    if declared < order {
        warnings.push(format!(
            "filter {} declares qualification {declared} below r+s = {order}",
            filter.kind().tag()
        ));
    }
    let measured = filter.measure_qualification(&[order], MIN_GRID)?;
    if measured[0].saturates {
        warnings.push(format!(
            "filter {} saturates at q = r+s = {order} (sup grows {:?} under refinement)",
            filter.kind().tag(),
            measured[0].sup_by_refinement
        ));
    }
    Ok(warnings)
}

/// Sample, fit and measure `||B^s (f* - fhat)||` for each replicate at each
/// grid size, with `lambda` from the rule.
pub fn run_rate_experiment(config: &RateConfig) -> Result<RateReport> {
    validate_run(&config.n_grid, config.replicates, config.s)?;
    let warnings = qualification_warnings(&config.filter, config.params.r + config.s)?;
    let lambdas = config
        .n_grid
        .iter()
        .map(|&n| lambda_rule(&config.params, n))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize, f64)> = config
        .n_grid
        .iter()
        .zip(&lambdas)
        .flat_map(|(&n, &lam)| (0..config.replicates).map(move |rep| (n, rep, lam)))
        .collect();
    let errors = ordered_map(config.jobs, &tasks, |&(n, rep, lam)| {
        let data = config.problem.sample(n, replicate_seed(config.seed, n, rep))?;
        let coeffs = CoefficientSolver::new(&config.problem, &data.x, &data.y)?.coefficients(&config.filter, lam)?;
        config.problem.error_norm(&coeffs, config.s)
    })?;
    let mut rows = Vec::with_capacity(config.n_grid.len());
    for ((i, &n), &lam) in config.n_grid.iter().enumerate().zip(&lambdas) {
        let errs = errors[i * config.replicates..(i + 1) * config.replicates].to_vec();
        let stats = Summary::of(&errs);
        rows.push(RateRow {
            n,
            lambda: lam,
            theoretical_rate: theoretical_rate(&config.params, n, config.s)?,
            errors: errs,
            mean: stats.mean,
            median: stats.median,
            q10: stats.q10,
            q90: stats.q90,
        });
    }
    let log_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let fitted_slope = ls_slope(&log_n, &rows.iter().map(|r| r.median.ln()).collect::<Vec<_>>());
    let theoretical_slope = ls_slope(&log_n, &rows.iter().map(|r| r.theoretical_rate.ln()).collect::<Vec<_>>());
    Ok(RateReport { rows, fitted_slope, theoretical_slope, warnings })
}

/// Errors on a `lambda` grid for `replicates` datasets of size `n`; one
/// decomposition per dataset serves all `lambda`. Returns `errors[k][rep]`
/// for `lambdas[k]`.
#[allow(clippy::too_many_arguments)]
pub fn lambda_sweep(
    problem: &MercerProblem,
    filter: &FilterFamily,
    n: usize,
    lambdas: &[f64],
    replicates: usize,
    s: f64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<Vec<f64>>> {
    if lambdas.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    validate_run(&[n], replicates, s)?;
    let reps: Vec<usize> = (0..replicates).collect();
    let per_rep = ordered_map(jobs, &reps, |&rep| {
        let data = problem.sample(n, replicate_seed(seed, n, rep))?;
        let solver = CoefficientSolver::new(problem, &data.x, &data.y)?;
        lambdas
            .iter()
            .map(|&lam| problem.error_norm(&solver.coefficients(filter, lam)?, s))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..lambdas.len()).map(|k| per_rep.iter().map(|row| row[k]).collect()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            median: quantile(&sorted, 0.5),
            q10: quantile(&sorted, 0.1),
            q90: quantile(&sorted, 0.9),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    Summary::of(values).median
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoldoutResult {
    pub lambda_hat: f64,
    /// `(lambda, hold-out mean squared error)` in grid order.
    pub table: Vec<(f64, f64)>,
}

/// Fits on the first `floor(split n)` points for each `lambda` and picks the
/// one with the smallest mean squared prediction error on the rest; ties go
/// to the larger `lambda`.
pub fn holdout_select(
    problem: &MercerProblem,
    data: &Dataset,
    lambda_grid: &[f64],
    filter: &FilterFamily,
    split_fraction: f64,
) -> Result<HoldoutResult> {
    if lambda_grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::Config(format!("split fraction must lie in (0, 1), got {split_fraction}")));
    }
    let k = (split_fraction * data.len() as f64).floor() as usize;
    if k < 2 || data.len() - k < 2 {
        return Err(Error::Config(format!("split of {} points leaves fewer than 2 on a side", data.len())));
    }
    let (train, test) = data.split_at(k);
    let solver = CoefficientSolver::new(problem, &train.x, &train.y)?;
    let features: Vec<Vec<f64>> = test.x.iter().map(|&x| problem.features(x)).collect();
    let mut table = Vec::with_capacity(lambda_grid.len());
    for &lam in lambda_grid {
        let coeffs = solver.coefficients(filter, lam)?;
        let mse = features
            .iter()
            .zip(&test.y)
            .map(|(phi, y)| {
                let pred: f64 = phi.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
                (pred - y) * (pred - y)
            })
            .sum::<f64>()
            / test.len() as f64;
        table.push((lam, mse));
    }
    let (lambda_hat, _) = table
        .iter()
        .cloned()
        .reduce(|best, cand| {
            if cand.1 < best.1 || (cand.1 == best.1 && cand.0 > best.0) {
                cand
            } else {
                best
            }
        })
        .expect("nonempty grid");
    Ok(HoldoutResult { lambda_hat, table })
}
