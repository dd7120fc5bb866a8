//! The spectral-filter estimator `f = g_lambda(B_x / kappa^2) S_x^* y / (n kappa^2)`.
//!
//! Sampling is 1/n-normalized: the empirical covariance is `B_x = n^{-1} sum
//! Phi(x_i) (x) Phi(x_i)`, whose nonzero spectrum after `kappa`-rescaling is
//! that of `K / (n kappa^2)`. Two equivalent solvers are provided:
//!
//! - [`DualSolver`] decomposes `K / (n kappa^2) = U diag(theta) U^T` and returns
//!   dual coefficients `alpha = (n kappa^2)^{-1} U g(theta) U^T y`.
//! - [`FeatureSolver`] decomposes the `p x p` matrix `Z^T Z / (n kappa^2)`
//!   (rows of `Z` are feature vectors) and returns the `H`-coefficients
//!   `V g(theta) V^T Z^T y / (n kappa^2)` directly; cheaper when `p < n`.
//!
//! Both cache their decomposition, so sweeping `lambda` costs one
//! matrix-vector product per value.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::filters::FilterFamily;
use crate::mercer::MercerProblem;

/// Normalized eigenvalues at or below this fraction of the largest one are
/// treated as exact zeros and weighted by the limit `g_lambda(0+)`.
pub const NULL_THRESHOLD: f64 = 1e-14;
/// Relative size (to the trace) of the optional diagonal jitter.
pub const JITTER: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// Dual coefficients: `f(.) = sum_j alpha_j k(x_j, .)`.
    pub alpha: Vec<f64>,
    pub lambda: f64,
    pub filter: FilterFamily,
    pub kappa_sq: f64,
    /// `H`-orthonormal coefficients, once attached to a [`MercerProblem`].
    pub eigencoeffs: Option<Vec<f64>>,
}

impl FitResult {
    pub fn with_eigencoeffs(mut self, problem: &MercerProblem, x: &[f64]) -> Result<Self> {
        self.eigencoeffs = Some(eigencoeffs(problem, x, &self.alpha)?);
        Ok(self)
    }
}

/// Gram matrix `K_ij = k(x_i, x_j)`, exactly symmetric.
pub fn gram(problem: &MercerProblem, x: &[f64]) -> Result<DMatrix<f64>> {
    if x.is_empty() {
        return Err(domain("Gram matrix needs at least one input"));
    }
    let z = problem.feature_matrix(x);
    let zt = z.transpose();
    let mut k = &z * &zt;
    mirror_upper(&mut k);
    Ok(k)
}

fn mirror_upper(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            m[(i, j)] = m[(j, i)];
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("lambda must lie in (0, 1], got {lambda}")))
    }
}

fn check_symmetric(k: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() {
        return Err(Error::Shape(format!("Gram matrix is {}x{}", k.nrows(), k.ncols())));
    }
    let scale = k.amax();
    let n = k.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            if (k[(i, j)] - k[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Shape(format!("Gram matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Filter weights `g_lambda(theta_i)`; null directions take `g_lambda(0+)`,
/// which keeps the Tikhonov weights equal to `(theta + lambda)^{-1}` exactly.
fn filter_weights(theta: &[f64], filter: &FilterFamily, lambda: f64) -> Vec<f64> {
    let cutoff = NULL_THRESHOLD * theta.iter().cloned().fold(0.0, f64::max);
    let at_zero = filter.g_at_zero(lambda);
    theta
        .iter()
        .map(|&t| if t > cutoff { filter.g(lambda, t) } else { at_zero })
        .collect()
}

/// Eigendecomposition of `K / (n kappa^2)`, clipped into `[0, 1]`.
#[derive(Clone, Debug)]
pub struct DualSolver {
    u: DMatrix<f64>,
    theta: Vec<f64>,
    kappa_sq: f64,
}

impl DualSolver {
    /// `jitter` adds `1e-12 * trace` to the normalized diagonal before the
    /// decomposition; off by default everywhere in the crate.
    pub fn new(k: &DMatrix<f64>, kappa_sq: f64, jitter: bool) -> Result<Self> {
        check_symmetric(k)?;
        if !(kappa_sq > 0.0 && kappa_sq.is_finite()) {
            return Err(domain(format!("kappa^2 must be positive, got {kappa_sq}")));
        }
        let n = k.nrows();
        let mut normalized = k / (n as f64 * kappa_sq);
        if jitter {
            let shift = JITTER * normalized.trace();
            for i in 0..n {
                normalized[(i, i)] += shift;
            }
        }
        let eig = SymmetricEigen::new(normalized);
        let theta = eig.eigenvalues.iter().map(|t| t.clamp(0.0, 1.0)).collect();
        Ok(Self { u: eig.eigenvectors, theta, kappa_sq })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Clipped normalized eigenvalues (unsorted).
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn fit(&self, y: &[f64], filter: &FilterFamily, lambda: f64) -> Result<FitResult> {
        check_lambda(lambda)?;
        let n = self.n();
        if y.len() != n {
            return Err(Error::Shape(format!("{} responses for a {n}x{n} Gram matrix", y.len())));
        }
        let y = DVector::from_column_slice(y);
        let mut uty = self.u.tr_mul(&y);
        for (v, w) in uty.iter_mut().zip(filter_weights(&self.theta, filter, lambda)) {
            *v *= w;
        }
        let alpha = (&self.u * uty) / (n as f64 * self.kappa_sq);
        Ok(FitResult {
            alpha: alpha.as_slice().to_vec(),
            lambda,
            filter: *filter,
            kappa_sq: self.kappa_sq,
            eigencoeffs: None,
        })
    }
}

/// One-shot fit through [`DualSolver`].
pub fn fit(k: &DMatrix<f64>, y: &[f64], lambda: f64, filter: &FilterFamily, kappa_sq: f64) -> Result<FitResult> {
    check_lambda(lambda)?;
    DualSolver::new(k, kappa_sq, false)?.fit(y, filter, lambda)
}

/// Kernel ridge regression by direct Cholesky solve of
/// `(K + n kappa^2 lambda I) alpha = y`.
pub fn ridge_direct(k: &DMatrix<f64>, y: &[f64], lambda: f64, kappa_sq: f64) -> Result<Vec<f64>> {
    check_symmetric(k)?;
    check_lambda(lambda)?;
    let n = k.nrows();
    if y.len() != n {
        return Err(Error::Shape(format!("{} responses for a {n}x{n} Gram matrix", y.len())));
    }
    let mut a = k.clone();
    let shift = n as f64 * kappa_sq * lambda;
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let chol = a.cholesky().ok_or_else(|| domain("ridge system is not positive definite"))?;
    Ok(chol.solve(&DVector::from_column_slice(y)).as_slice().to_vec())
}

/// `H`-coefficients of `sum_j alpha_j k(x_j, .)`: `sqrt(mu_l) sum_j alpha_j e_l(x_j)`.
pub fn eigencoeffs(problem: &MercerProblem, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    if x.len() != alpha.len() {
        return Err(Error::Shape(format!("{} inputs but {} dual coefficients", x.len(), alpha.len())));
    }
    let p = problem.p();
    let mut out = vec![0.0; p];
    let mut phi = vec![0.0; p];
    for (&xj, &aj) in x.iter().zip(alpha) {
        problem.features_into(xj, &mut phi);
        for (o, f) in out.iter_mut().zip(&phi) {
            *o += aj * f;
        }
    }
    Ok(out)
}

/// `sum_j alpha_j k(x_j, probe)` for each probe.
pub fn predict(problem: &MercerProblem, x: &[f64], alpha: &[f64], probes: &[f64]) -> Result<Vec<f64>> {
    let coeffs = eigencoeffs(problem, x, alpha)?;
    Ok(probes.iter().map(|&t| problem.synthesize(&coeffs, t)).collect())
}

/// In-sample predictions `K alpha`.
pub fn predict_in_sample(k: &DMatrix<f64>, alpha: &[f64]) -> Result<Vec<f64>> {
    if k.ncols() != alpha.len() {
        return Err(Error::Shape(format!("{} dual coefficients for {} columns", alpha.len(), k.ncols())));
    }
    Ok((k * DVector::from_column_slice(alpha)).as_slice().to_vec())
}

/// Primal solver on the feature covariance `Z^T Z / (n kappa^2)`.
#[derive(Clone, Debug)]
pub struct FeatureSolver {
    v: DMatrix<f64>,
    theta: Vec<f64>,
    /// `V^T Z^T y / (n kappa^2)`
    projected: Vec<f64>,
}

impl FeatureSolver {
    pub fn new(problem: &MercerProblem, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!("{} inputs but {} responses", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(domain("fit needs at least one observation"));
        }
        let scale = x.len() as f64 * problem.kappa_sq();
        let z = problem.feature_matrix(x);
        let zt = z.transpose();
        let mut cov = &zt * &z;
        mirror_upper(&mut cov);
        cov /= scale;
        let zty = &zt * DVector::from_column_slice(y);
        let eig = SymmetricEigen::new(cov);
        let projected = (eig.eigenvectors.tr_mul(&zty) / scale).as_slice().to_vec();
        let theta = eig.eigenvalues.iter().map(|t| t.clamp(0.0, 1.0)).collect();
        Ok(Self { v: eig.eigenvectors, theta, projected })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `H`-coefficients of the estimator at `lambda`.
    pub fn coefficients(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        let w = filter_weights(&self.theta, filter, lambda);
        let scaled = DVector::from_iterator(w.len(), w.iter().zip(&self.projected).map(|(a, b)| a * b));
        Ok((&self.v * scaled).as_slice().to_vec())
    }
}

/// `H`-coefficients of the estimator, choosing the cheaper of the dual
/// (`n <= p`) and feature (`p < n`) paths.
pub fn fit_coefficients(
    problem: &MercerProblem,
    x: &[f64],
    y: &[f64],
    filter: &FilterFamily,
    lambda: f64,
) -> Result<Vec<f64>> {
    CoefficientSolver::new(problem, x, y)?.coefficients(filter, lambda)
}

/// Either solver behind one interface, selected by problem shape.
#[derive(Clone, Debug)]
pub enum CoefficientSolver {
    Dual { solver: DualSolver, x: Vec<f64>, y: Vec<f64>, problem: Box<MercerProblem> },
    Feature(FeatureSolver),
}

impl CoefficientSolver {
    pub fn new(problem: &MercerProblem, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!("{} inputs but {} responses", x.len(), y.len())));
        }
        if x.len() <= problem.p() {
            let k = gram(problem, x)?;
            Ok(Self::Dual {
                solver: DualSolver::new(&k, problem.kappa_sq(), false)?,
                x: x.to_vec(),
                y: y.to_vec(),
                problem: Box::new(problem.clone()),
            })
        } else {
            Ok(Self::Feature(FeatureSolver::new(problem, x, y)?))
        }
    }

    pub fn coefficients(&self, filter: &FilterFamily, lambda: f64) -> Result<Vec<f64>> {
        match self {
            Self::Dual { solver, x, y, problem } => {
                let fit = solver.fit(y, filter, lambda)?;
                eigencoeffs(problem, x, &fit.alpha)
            }
            Self::Feature(solver) => solver.coefficients(filter, lambda),
        }
    }
}
