//! Spectral regularization filters `g_lambda` on `(0, 1]` and their residuals
//! `r_lambda(t) = 1 - t g_lambda(t)`.
//!
//! Every family carries declared constants for the conditions
//!
//! ```text
//! sup |t g(t)| <= D,   sup |g(t)| <= E / lambda,   sup |r(t)| <= gamma0,
//! sup |r(t)| t^q <= gamma_q lambda^q        (qualification q)
//! ```
//!
//! for all `0 < lambda <= 1`. The constants are checked numerically on a
//! log-spaced grid, never trusted.

use std::f64::consts::E;

use crate::error::{domain, Error, Result};

/// Lower end of the lambda axis used by [`FilterFamily::verify_constants`].
pub const VERIFY_LAMBDA_MIN: f64 = 1e-6;
/// Lower end of the t axis used by [`FilterFamily::verify_constants`].
pub const VERIFY_T_MIN: f64 = 1e-8;
/// Smallest admissible grid size per axis.
pub const MIN_GRID: usize = 1000;
/// Successive lower ends of the lambda axis in the saturation test.
pub const REFINEMENTS: [f64; 3] = [1e-2, 1e-4, 1e-6];
/// Growth factor per refinement above which a qualification counts as saturated.
pub const SATURATION_GROWTH: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterKind {
    Tikhonov,
    SpectralCutoff,
    /// Gradient descent with the given step size and `ceil(1/lambda)` iterations.
    Landweber { step: f64 },
    IteratedTikhonov { m: u32 },
}

impl FilterKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FilterKind::Tikhonov => "tikhonov",
            FilterKind::SpectralCutoff => "spectral_cutoff",
            FilterKind::Landweber { .. } => "landweber",
            FilterKind::IteratedTikhonov { .. } => "iterated_tikhonov",
        }
    }
}

/// Declared qualification of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Qualification {
    /// Qualification `q` with constant `gamma_q`.
    Finite { q: f64, gamma_q: f64 },
    /// Any order `q`, with `gamma_q = max((q * scale / e)^q, 1)`.
    Arbitrary { scale: f64 },
}

impl Qualification {
    /// Largest supported order (infinite for [`Qualification::Arbitrary`]).
    pub fn order(&self) -> f64 {
        match self {
            Qualification::Finite { q, .. } => *q,
            Qualification::Arbitrary { .. } => f64::INFINITY,
        }
    }

    /// Declared `gamma_q` at order `q`, if `q` is within the qualification.
    pub fn gamma(&self, q: f64) -> Option<f64> {
        match *self {
            Qualification::Finite { q: qual, gamma_q } => (q <= qual).then_some(gamma_q),
            Qualification::Arbitrary { scale } => Some((q * scale / E).powf(q).max(1.0)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConstants {
    pub d: f64,
    pub e: f64,
    pub gamma0: f64,
    pub qualification: Qualification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterFamily {
    kind: FilterKind,
    constants: FilterConstants,
}

/// One row of a constants verification: `condition, declared, measured, worst lambda, worst t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRow {
    pub condition: String,
    pub declared: f64,
    pub measured: f64,
    pub worst_lambda: f64,
    pub worst_t: f64,
}

impl ConditionRow {
    pub fn holds(&self) -> bool {
        self.measured <= self.declared + 1e-12
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsReport {
    pub holds: bool,
    pub rows: Vec<ConditionRow>,
}

impl ConstantsReport {
    /// Measured `(D, E, gamma0)`.
    pub fn measured(&self) -> (f64, f64, f64) {
        (self.rows[0].measured, self.rows[1].measured, self.rows[2].measured)
    }

    /// Rows whose declared constant is exceeded.
    pub fn failures(&self) -> impl Iterator<Item = &ConditionRow> {
        self.rows.iter().filter(|r| !r.holds())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualificationMeasurement {
    pub q: f64,
    /// Supremum of `|r(t)| t^q / lambda^q` on the finest grid.
    pub gamma_q_hat: f64,
    /// Suprema on each refinement in [`REFINEMENTS`] order.
    pub sup_by_refinement: [f64; 3],
    pub saturates: bool,
    pub declared: Option<f64>,
}

impl FilterFamily {
    pub fn new(kind: FilterKind, constants: FilterConstants) -> Result<Self> {
        match kind {
            FilterKind::Landweber { step } if !(step > 0.0 && step <= 1.0) => {
                return Err(domain(format!("landweber step must lie in (0, 1], got {step}")));
            }
            FilterKind::IteratedTikhonov { m: 0 } => {
                return Err(domain("iterated tikhonov needs m >= 1"));
            }
            _ => {}
        }
        let c = &constants;
        if [c.d, c.e, c.gamma0].iter().any(|v| !(*v > 0.0)) {
            return Err(domain("filter constants D, E, gamma0 must be positive"));
        }
        Ok(Self { kind, constants })
    }

    /// The family with its default declared constants:
    ///
    /// | kind | D | E | gamma0 | qualification |
    /// |------|---|---|--------|---------------|
    /// | tikhonov | 1 | 1 | 1 | q = 1, gamma_q = 1 |
    /// | spectral cutoff | 1 | 1 | 1 | any q, gamma_q = 1 |
    /// | landweber(step) | 1 | 2 step | 1 | any q, gamma_q = max((q/(e step))^q, 1) |
    /// | iterated tikhonov(m) | 1 | m | 1 | q = m, gamma_q = 1 |
    pub fn with_default_constants(kind: FilterKind) -> Result<Self> {
        let constants = match kind {
            FilterKind::Tikhonov => FilterConstants {
                d: 1.0,
                e: 1.0,
                gamma0: 1.0,
                qualification: Qualification::Finite { q: 1.0, gamma_q: 1.0 },
            },
            FilterKind::SpectralCutoff => FilterConstants {
                d: 1.0,
                e: 1.0,
                gamma0: 1.0,
                qualification: Qualification::Arbitrary { scale: 0.0 },
            },
            FilterKind::Landweber { step } => FilterConstants {
                d: 1.0,
                // g(0+) = step * ceil(1/lambda) < 2 step / lambda
                e: 2.0 * step,
                gamma0: 1.0,
                qualification: Qualification::Arbitrary { scale: 1.0 / step },
            },
            FilterKind::IteratedTikhonov { m } => FilterConstants {
                d: 1.0,
                e: m as f64,
                gamma0: 1.0,
                qualification: Qualification::Finite { q: m as f64, gamma_q: 1.0 },
            },
        };
        Self::new(kind, constants)
    }

    pub fn tikhonov() -> Self {
        Self::with_default_constants(FilterKind::Tikhonov).expect("valid defaults")
    }

    pub fn spectral_cutoff() -> Self {
        Self::with_default_constants(FilterKind::SpectralCutoff).expect("valid defaults")
    }

    pub fn landweber(step: f64) -> Result<Self> {
        Self::with_default_constants(FilterKind::Landweber { step })
    }

    pub fn iterated_tikhonov(m: u32) -> Result<Self> {
        Self::with_default_constants(FilterKind::IteratedTikhonov { m })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn constants(&self) -> &FilterConstants {
        &self.constants
    }

    /// Landweber iteration count `ceil(1/lambda)`.
    pub fn iterations(lambda: f64) -> f64 {
        (1.0 / lambda).ceil()
    }

    fn check_args(lambda: f64, t: f64) -> Result<()> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(domain(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(domain(format!("t must lie in (0, 1], got {t}")));
        }
        Ok(())
    }

    pub fn g_value(&self, lambda: f64, t: f64) -> Result<f64> {
        Self::check_args(lambda, t)?;
        Ok(self.g(lambda, t))
    }

    pub fn r_value(&self, lambda: f64, t: f64) -> Result<f64> {
        Self::check_args(lambda, t)?;
        Ok(self.r(lambda, t))
    }

    /// `g_lambda(t)` without argument checks.
    pub fn g(&self, lambda: f64, t: f64) -> f64 {
        match self.kind {
            FilterKind::Tikhonov => 1.0 / (t + lambda),
            FilterKind::SpectralCutoff => {
                if t >= lambda {
                    1.0 / t
                } else {
                    0.0
                }
            }
            FilterKind::Landweber { step } => {
                let m = Self::iterations(lambda);
                -(m * (-step * t).ln_1p()).exp_m1() / t
            }
            FilterKind::IteratedTikhonov { m } => {
                -(-(m as f64) * (t / lambda).ln_1p()).exp_m1() / t
            }
        }
    }

    /// `lim_{t -> 0+} g_lambda(t)`.
    pub fn g_at_zero(&self, lambda: f64) -> f64 {
        match self.kind {
            FilterKind::Tikhonov => 1.0 / lambda,
            FilterKind::SpectralCutoff => 0.0,
            FilterKind::Landweber { step } => step * Self::iterations(lambda),
            FilterKind::IteratedTikhonov { m } => m as f64 / lambda,
        }
    }

    /// `r_lambda(t) = 1 - t g_lambda(t)` without argument checks.
    pub fn r(&self, lambda: f64, t: f64) -> f64 {
        match self.kind {
            FilterKind::Tikhonov => lambda / (t + lambda),
            FilterKind::SpectralCutoff => {
                if t >= lambda {
                    0.0
                } else {
                    1.0
                }
            }
            FilterKind::Landweber { step } => {
                let m = Self::iterations(lambda);
                (m * (-step * t).ln_1p()).exp()
            }
            FilterKind::IteratedTikhonov { m } => (-(m as f64) * (t / lambda).ln_1p()).exp(),
        }
    }

    /// Grid check of the declared constants. Rows: `D`, `E`, `gamma0`, and
    /// the qualification bound when the qualification is finite.
    pub fn verify_constants(&self, grid_size: usize) -> Result<ConstantsReport> {
        if grid_size < MIN_GRID {
            return Err(Error::Domain(format!("grid_size must be at least {MIN_GRID}")));
        }
        let (lambdas, ts) = grids(VERIFY_LAMBDA_MIN, VERIFY_T_MIN, grid_size);
        let c = &self.constants;
        let qual = match c.qualification {
            Qualification::Finite { q, gamma_q } => Some((q, gamma_q)),
            Qualification::Arbitrary { .. } => None,
        };

        let mut sups = [Sup::default(); 4];
        for &lam in &lambdas {
            for &t in &ts {
                let g = self.g(lam, t);
                let r = self.r(lam, t);
                sups[0].offer((t * g).abs(), lam, t);
                sups[1].offer(lam * g.abs(), lam, t);
                sups[2].offer(r.abs(), lam, t);
                if let Some((q, _)) = qual {
                    sups[3].offer(r.abs() * (t / lam).powf(q), lam, t);
                }
            }
        }

        let mut rows = vec![
            sups[0].row("D: sup |t g(t)|", c.d),
            sups[1].row("E: sup lambda |g(t)|", c.e),
            sups[2].row("gamma0: sup |r(t)|", c.gamma0),
        ];
        if let Some((q, gamma_q)) = qual {
            rows.push(sups[3].row(&format!("gamma_q: sup |r(t)| (t/lambda)^{q}"), gamma_q));
        }
        let holds = rows.iter().all(ConditionRow::holds);
        Ok(ConstantsReport { holds, rows })
    }

    /// For each candidate order `q`, the supremum of `|r(t)| t^q / lambda^q`
    /// on three grids reaching down to `lambda = 1e-2, 1e-4, 1e-6`. A
    /// candidate saturates when the supremum grows by more than
    /// [`SATURATION_GROWTH`] at both refinements.
    pub fn measure_qualification(
        &self,
        q_candidates: &[f64],
        grid_size: usize,
    ) -> Result<Vec<QualificationMeasurement>> {
        if grid_size < MIN_GRID {
            return Err(Error::Domain(format!("grid_size must be at least {MIN_GRID}")));
        }
        if let Some(q) = q_candidates.iter().find(|q| !(**q > 0.0)) {
            return Err(domain(format!("qualification candidates must be positive, got {q}")));
        }
        let grids: Vec<_> = REFINEMENTS.iter().map(|&lo| grids(lo, lo * 1e-2, grid_size)).collect();
        Ok(q_candidates
            .iter()
            .map(|&q| {
                let mut sup_by_refinement = [0.0; 3];
                for (slot, (lambdas, ts)) in sup_by_refinement.iter_mut().zip(&grids) {
                    let mut sup = Sup::default();
                    for &lam in lambdas {
                        for &t in ts {
                            sup.offer(self.r(lam, t).abs() * (t / lam).powf(q), lam, t);
                        }
                    }
                    *slot = sup.value;
                }
                let saturates = sup_by_refinement[1] > SATURATION_GROWTH * sup_by_refinement[0]
                    && sup_by_refinement[2] > SATURATION_GROWTH * sup_by_refinement[1];
                QualificationMeasurement {
                    q,
                    gamma_q_hat: sup_by_refinement[2],
                    sup_by_refinement,
                    saturates,
                    declared: self.constants.qualification.gamma(q),
                }
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Sup {
    value: f64,
    lambda: f64,
    t: f64,
}

impl Sup {
    fn offer(&mut self, v: f64, lambda: f64, t: f64) {
        if v > self.value {
            *self = Sup { value: v, lambda, t };
        }
    }

    fn row(&self, condition: &str, declared: f64) -> ConditionRow {
        ConditionRow {
            condition: condition.to_string(),
            declared,
            measured: self.value,
            worst_lambda: self.lambda,
            worst_t: self.t,
        }
    }
}

/// Log-spaced lambda axis on `[lambda_min, 1]` and t axis on `[t_min, 1]`
/// merged with the lambda points, so that `t = lambda` is always probed.
fn grids(lambda_min: f64, t_min: f64, size: usize) -> (Vec<f64>, Vec<f64>) {
    let lambdas = crate::spectrum::lemmas::log_space(lambda_min, 1.0, size);
    let mut ts = crate::spectrum::lemmas::log_space(t_min, 1.0, size);
    ts.extend_from_slice(&lambdas);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    (lambdas, ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn all_families() -> Vec<FilterFamily> {
        vec![
            FilterFamily::tikhonov(),
            FilterFamily::spectral_cutoff(),
            FilterFamily::landweber(1.0).unwrap(),
            FilterFamily::landweber(0.5).unwrap(),
            FilterFamily::iterated_tikhonov(1).unwrap(),
            FilterFamily::iterated_tikhonov(3).unwrap(),
        ]
    }

    #[test]
    fn g_and_r_examples() {
        let tik = FilterFamily::tikhonov();
        assert_relative_eq!(tik.g_value(0.1, 0.1).unwrap(), 5.0, max_relative = 1e-15);
        assert_relative_eq!(tik.r_value(0.1, 0.1).unwrap(), 0.5, max_relative = 1e-15);

        let cut = FilterFamily::spectral_cutoff();
        assert_eq!(cut.g_value(0.5, 0.25).unwrap(), 0.0);
        assert_eq!(cut.r_value(0.5, 0.25).unwrap(), 1.0);
        assert_eq!(cut.r_value(0.5, 0.5).unwrap(), 0.0);

        // two steps of size 1 at t = 1/2: g = 1 + (1 - 1/2), r = (1 - 1/2)^2
        let lw = FilterFamily::landweber(1.0).unwrap();
        assert_eq!(FilterFamily::iterations(0.5), 2.0);
        assert_relative_eq!(lw.g_value(0.5, 0.5).unwrap(), 1.5, max_relative = 1e-14);
        assert_relative_eq!(lw.r_value(0.5, 0.5).unwrap(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn domain_errors() {
        let tik = FilterFamily::tikhonov();
        assert!(tik.g_value(0.0, 0.5).is_err());
        assert!(tik.g_value(1.5, 0.5).is_err());
        assert!(tik.g_value(0.5, 0.0).is_err());
        assert!(tik.r_value(0.5, 1.01).is_err());
        assert!(FilterFamily::landweber(0.0).is_err());
        assert!(FilterFamily::landweber(1.5).is_err());
        assert!(FilterFamily::iterated_tikhonov(0).is_err());
        assert!(tik.verify_constants(10).is_err());
    }

    #[test]
    fn residual_identity() {
        let (lambdas, ts) = grids(1e-4, 1e-6, 60);
        for f in all_families() {
            for &lam in &lambdas {
                for &t in &ts {
                    let sum = f.r(lam, t) + t * f.g(lam, t);
                    assert!((sum - 1.0).abs() < 1e-12, "{:?} lam={lam} t={t}: {sum}", f.kind());
                }
            }
        }
    }

    #[test]
    fn landweber_matches_explicit_sum() {
        let lw = FilterFamily::landweber(0.7).unwrap();
        for &lam in &[1.0, 0.5, 0.3, 0.05] {
            let m = FilterFamily::iterations(lam) as i32;
            for &t in &[1e-3, 0.2, 0.9, 1.0] {
                let sum: f64 = (0..m).map(|i| 0.7 * (1.0_f64 - 0.7 * t).powi(i)).sum();
                assert_relative_eq!(lw.g(lam, t), sum, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn zero_limits() {
        for f in all_families() {
            for &lam in &[1.0, 0.3, 1e-3] {
                assert_relative_eq!(f.g_at_zero(lam), f.g(lam, 1e-13), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn tikhonov_is_first_iterate() {
        let tik = FilterFamily::tikhonov();
        let it1 = FilterFamily::iterated_tikhonov(1).unwrap();
        let (lambdas, ts) = grids(1e-6, 1e-8, 80);
        for &lam in &lambdas {
            for &t in &ts {
                assert_relative_eq!(tik.g(lam, t), it1.g(lam, t), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn landweber_approaches_inversion() {
        let lw = FilterFamily::landweber(1.0).unwrap();
        let t = 0.3;
        let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&lam| (lw.g(lam, t) - 1.0 / t).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!(gaps[2] < 1e-12);
    }

    #[test]
    fn tikhonov_constants() {
        let report = FilterFamily::tikhonov().verify_constants(1000).unwrap();
        assert!(report.holds, "{:?}", report.rows);
        let (d, e, g0) = report.measured();
        assert!(d < 1.0 && e < 1.0 && g0 < 1.0);
    }

    #[test]
    fn understated_constant_is_caught() {
        let mut c = *FilterFamily::tikhonov().constants();
        c.d = 0.5;
        let f = FilterFamily::new(FilterKind::Tikhonov, c).unwrap();
        let report = f.verify_constants(1000).unwrap();
        assert!(!report.holds);
        let bad: Vec<_> = report.failures().collect();
        assert_eq!(bad.len(), 1);
        // t / (t + lambda) is largest at t = 1 and the smallest lambda
        assert_eq!(bad[0].worst_t, 1.0);
        assert_eq!(bad[0].worst_lambda, VERIFY_LAMBDA_MIN);
    }

    #[test]
    fn tikhonov_qualification() {
        let m = FilterFamily::tikhonov().measure_qualification(&[1.0, 2.0], 1000).unwrap();
        assert!(m[0].gamma_q_hat <= 1.0 && !m[0].saturates);
        assert!(m[1].saturates);
        assert_eq!(m[1].declared, None);
    }

    #[test]
    fn qualification_rejects_nonpositive() {
        assert!(FilterFamily::tikhonov().measure_qualification(&[0.0], 1000).is_err());
    }

    #[test]
    fn arbitrary_gamma_rule() {
        let q = Qualification::Arbitrary { scale: 1.0 };
        assert_eq!(q.gamma(1.0), Some(1.0));
        assert_relative_eq!(q.gamma(4.0).unwrap(), (4.0 / E).powi(4), max_relative = 1e-14);
        assert_eq!(Qualification::Finite { q: 1.0, gamma_q: 1.0 }.gamma(2.0), None);
    }
}
