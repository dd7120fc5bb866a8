//! Fano lower-bound instances.
//!
//! Given `epsilon`, the block size is `m = F(2^{nu_lower} (epsilon/R)^{1/(r+s)})`
//! and each packing code `rho_i` yields the target `f_i = B^r g_i` with
//! `g_i = (epsilon/sqrt(m)) sum_{l=m+1}^{2m} rho_i^{(l-m)} mu_l^{-(r+s)} e_l`.
//! In `H`-orthonormal coordinates `f_i` has entries
//! `epsilon rho_i^{(l-m)} mu_l^{-s} / sqrt(m)` on the block, so
//! `||B^s (f_i - f_j)||^2 = 4 epsilon^2 hamming(rho_i, rho_j) / m` and, under
//! Gaussian noise, `KL(P_i^n, P_j^n) = n/(2 sigma^2) sum_l mu_l (f_il - f_jl)^2`.

pub mod packing;

pub use packing::{generate_packing, Construction, PackingCertificate};

use crate::error::{domain, Error, Result};
use crate::mercer::check_norm_index;
use crate::rates::ModelParams;

/// Pairs checked directly when the codebook is larger than this many codes
/// are restricted to the first ones plus the reference.
pub const DIRECT_PAIR_CODES: usize = 128;

/// The strict upper bound on `epsilon` for which `m >= 28` is guaranteed:
/// `2^{-nu_lower (r+s)} R mu_{max(28, j0)}`.
pub fn epsilon_threshold(params: &ModelParams, s: f64) -> Result<f64> {
    check_norm_index(s)?;
    let profile = &params.profile;
    let idx = packing::MIN_LENGTH.max(profile.j0());
    let mu = profile.eigenvalue(idx).map_err(|_| {
        domain(format!("profile has p = {} < {idx} eigenvalues; no admissible epsilon", profile.p()))
    })?;
    Ok(2f64.powf(-profile.nu_lower() * (params.r + s)) * params.radius * mu)
}

/// `F(2^{nu_lower} (epsilon/R)^{1/(r+s)})`.
pub fn choose_m(epsilon: f64, params: &ModelParams, s: f64) -> Result<usize> {
    let threshold = epsilon_threshold(params, s)?;
    if !(epsilon > 0.0 && epsilon < threshold) {
        return Err(domain(format!("epsilon = {epsilon} must lie in (0, {threshold})")));
    }
    let profile = &params.profile;
    let t = 2f64.powf(profile.nu_lower()) * (epsilon / params.radius).powf(1.0 / (params.r + s));
    let m = profile.count(t)?;
    if m < packing::MIN_LENGTH {
        return Err(domain(format!(
            "epsilon = {epsilon} gives block size m = {m} < {}",
            packing::MIN_LENGTH
        )));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlternativeFamily {
    pub epsilon: f64,
    pub m: usize,
    pub s: f64,
    pub params: ModelParams,
    pub packing: PackingCertificate,
    /// `epsilon mu_l^{-s} / sqrt(m)` for `l = m+1, ..., 2m`.
    pub amplitudes: Vec<f64>,
    /// `||g_i||_H^2`, identical for every code.
    pub g_norm_sq: f64,
}

impl AlternativeFamily {
    /// Number of materialized members (the last one is the reference).
    pub fn len(&self) -> usize {
        self.packing.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packing.codes.is_empty()
    }

    pub fn reference(&self) -> usize {
        self.packing.reference()
    }

    fn block(&self, l: usize) -> f64 {
        self.params.profile.values()[self.m + l]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Range { index: i, len: self.len() })
        }
    }

    /// `H`-coefficients (length `p`) of member `i`.
    pub fn coefficients(&self, i: usize) -> Result<Vec<f64>> {
        self.check_index(i)?;
        let mut out = vec![0.0; self.params.profile.p()];
        for (l, (&rho, &a)) in self.packing.codes[i].iter().zip(&self.amplitudes).enumerate() {
            out[self.m + l] = rho as f64 * a;
        }
        Ok(out)
    }

    /// `||B^s (f_i - f_j)||_H^2` from the coefficient vectors.
    pub fn separation_sq(&self, i: usize, j: usize) -> Result<f64> {
        let (fi, fj) = (self.coefficients(i)?, self.coefficients(j)?);
        let mu = self.params.profile.values();
        Ok(fi.iter().zip(&fj).zip(mu).map(|((a, b), m)| m.powf(2.0 * self.s) * (a - b) * (a - b)).sum())
    }

    /// Single-observation KL contribution of coordinate `l` of the block when
    /// two members differ there: `mu_l (2 a_l)^2 / (2 sigma^2)`.
    fn coordinate_kl(&self, l: usize) -> f64 {
        let sigma = self.params.sigma;
        self.block(l) * 4.0 * self.amplitudes[l] * self.amplitudes[l] / (2.0 * sigma * sigma)
    }

    /// Upper bound on the KL between any two members of the full codebook
    /// (every active coordinate differing), for `n` observations.
    pub fn max_kl(&self, n: usize) -> f64 {
        n as f64
            * (0..self.m)
                .filter(|&l| self.packing.active[l])
                .map(|l| self.coordinate_kl(l))
                .sum::<f64>()
    }

    /// Mean KL from the non-reference members of the full codebook to the
    /// reference, for `n` observations.
    pub fn mean_kl_to_reference(&self, n: usize) -> f64 {
        n as f64
            * (0..self.m)
                .map(|l| self.packing.difference_rate[l] * self.coordinate_kl(l))
                .sum::<f64>()
    }
}

/// Builds the family from a packing of length `choose_m(epsilon)` and
/// certifies source membership and pairwise separation directly.
pub fn build_alternatives(
    epsilon: f64,
    params: &ModelParams,
    s: f64,
    packing: PackingCertificate,
) -> Result<AlternativeFamily> {
    let m = choose_m(epsilon, params, s)?;
    if packing.m != m {
        return Err(domain(format!("packing has length {} but epsilon requires m = {m}", packing.m)));
    }
    let p = params.profile.p();
    if p < 2 * m {
        return Err(domain(format!("profile has p = {p} < 2m = {}", 2 * m)));
    }
    let mu = &params.profile.values()[m..2 * m];
    let amplitudes: Vec<f64> = mu.iter().map(|v| epsilon * v.powf(-s) / (m as f64).sqrt()).collect();
    let g_norm_sq = epsilon * epsilon / m as f64 * mu.iter().map(|v| v.powf(-2.0 * (params.r + s))).sum::<f64>();
    let radius_sq = params.radius * params.radius;
    if g_norm_sq > radius_sq * (1.0 + 1e-12) {
        return Err(Error::Construction(format!(
            "source element norm^2 {g_norm_sq} exceeds R^2 = {radius_sq}"
        )));
    }
    let family = AlternativeFamily { epsilon, m, s, params: params.clone(), packing, amplitudes, g_norm_sq };
    let eps_sq = epsilon * epsilon;
    for (i, j) in direct_pairs(family.len()) {
        let sep = family.separation_sq(i, j)?;
        if sep <= eps_sq {
            return Err(Error::Construction(format!(
                "members {i} and {j} separated by {sep} <= epsilon^2 = {eps_sq}"
            )));
        }
    }
    Ok(family)
}

/// Pairs among the first [`DIRECT_PAIR_CODES`] members and the reference.
fn direct_pairs(len: usize) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..len.min(DIRECT_PAIR_CODES)).collect();
    if len > DIRECT_PAIR_CODES {
        idx.push(len - 1);
    }
    let mut pairs = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            pairs.push((i, j));
        }
    }
    pairs
}

/// `n/(2 sigma^2) sum_l mu_l (f_il - f_jl)^2`.
pub fn kl_divergence(family: &AlternativeFamily, i: usize, j: usize, n: usize) -> Result<f64> {
    let (fi, fj) = (family.coefficients(i)?, family.coefficients(j)?);
    let sigma = family.params.sigma;
    let mu = family.params.profile.values();
    let sum: f64 = fi.iter().zip(&fj).zip(mu).map(|((a, b), m)| m * (a - b) * (a - b)).sum();
    Ok(n as f64 * sum / (2.0 * sigma * sigma))
}

/// `n 2^{nu_lower (1 - 2s)} (2 sigma^2)^{-1} R^2 (epsilon/R)^{(2r+1)/(r+s)}`,
/// the constant as usually stated.
pub fn kl_bound_stated(params: &ModelParams, s: f64, epsilon: f64, n: usize) -> f64 {
    kl_bound_core(params, s, epsilon, n) / (2.0 * params.sigma * params.sigma)
}

/// `n 2^{nu_lower (1 - 2s)} 2 sigma^{-2} R^2 (epsilon/R)^{(2r+1)/(r+s)}`: the
/// constant that the coefficient algebra actually yields, since differing
/// entries contribute `(2 epsilon/sqrt(m))^2` each. Four times the stated one.
pub fn kl_bound_derived(params: &ModelParams, s: f64, epsilon: f64, n: usize) -> f64 {
    2.0 * kl_bound_core(params, s, epsilon, n) / (params.sigma * params.sigma)
}

fn kl_bound_core(params: &ModelParams, s: f64, epsilon: f64, n: usize) -> f64 {
    let (r, radius) = (params.r, params.radius);
    n as f64
        * 2f64.powf(params.profile.nu_lower() * (1.0 - 2.0 * s))
        * radius
        * radius
        * (epsilon / radius).powf((2.0 * r + 1.0) / (r + s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FanoReport {
    pub n: usize,
    pub s: f64,
    pub epsilon: f64,
    pub m: Option<usize>,
    pub construction: Option<String>,
    /// `ln(N - 1)`
    pub log_capacity: f64,
    pub mean_kl: f64,
    pub max_kl: f64,
    pub kl_bound_stated: f64,
    pub kl_bound_derived: f64,
    pub omega: f64,
    pub lower_bound_prob: f64,
    pub valid: bool,
    pub reason: Option<String>,
}

/// `sqrt(N-1)/(1+sqrt(N-1)) (1 - 2 omega - sqrt(2 omega / ln(N-1)))` from
/// `ln(N-1)`.
pub fn fano_probability(log_capacity: f64, omega: f64) -> f64 {
    let root = (0.5 * log_capacity).exp();
    let lead = if root.is_finite() { root / (1.0 + root) } else { 1.0 };
    lead * (1.0 - 2.0 * omega - (2.0 * omega / log_capacity).sqrt())
}

/// `epsilon = 2^{-nu_lower} (R/288) G^{-1}(sigma^2/(R^2 n))^{r+s}`.
pub fn fano_epsilon(params: &ModelParams, s: f64, n: usize) -> Result<f64> {
    check_norm_index(s)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let u = params.sigma * params.sigma / (params.radius * params.radius * n as f64);
    let t = params.profile.gee_inverse(u, params.r)?;
    Ok(2f64.powf(-params.profile.nu_lower()) * params.radius / 288.0 * t.powf(params.r + s))
}

/// Builds the instance at the canonical `epsilon` and evaluates the Fano
/// reduction with the last packing code as reference. Precondition failures
/// come back as `valid = false` with a reason.
pub fn fano_report(params: &ModelParams, s: f64, n: usize, seed: u64) -> Result<FanoReport> {
    fano_instance(params, s, n, seed).map(|(report, _)| report)
}

/// [`fano_report`] together with the alternative family, when one could be
/// built.
pub fn fano_instance(
    params: &ModelParams,
    s: f64,
    n: usize,
    seed: u64,
) -> Result<(FanoReport, Option<AlternativeFamily>)> {
    let epsilon = fano_epsilon(params, s, n)?;
    let mut report = FanoReport {
        n,
        s,
        epsilon,
        m: None,
        construction: None,
        log_capacity: f64::NAN,
        mean_kl: f64::NAN,
        max_kl: f64::NAN,
        kl_bound_stated: kl_bound_stated(params, s, epsilon, n),
        kl_bound_derived: kl_bound_derived(params, s, epsilon, n),
        omega: f64::NAN,
        lower_bound_prob: f64::NAN,
        valid: false,
        reason: None,
    };
    let m = match choose_m(epsilon, params, s) {
        Ok(m) => m,
        Err(e) => {
            report.reason = Some(e.to_string());
            return Ok((report, None));
        }
    };
    report.m = Some(m);
    let family = match generate_packing(m, seed).and_then(|pk| build_alternatives(epsilon, params, s, pk)) {
        Ok(f) => f,
        Err(e) => {
            report.reason = Some(e.to_string());
            return Ok((report, None));
        }
    };
    report.construction = Some(family.packing.construction.describe());
    report.log_capacity = family.packing.log_capacity;
    report.mean_kl = family.mean_kl_to_reference(n);
    report.max_kl = family.max_kl(n);
    report.omega = report.mean_kl / report.log_capacity;
    report.lower_bound_prob = fano_probability(report.log_capacity, report.omega);
    report.reason = if report.log_capacity < 2f64.ln() {
        Some("fewer than two alternatives besides the reference".into())
    } else if report.omega >= 0.125 {
        Some(format!("omega = {} is not below 1/8", report.omega))
    } else if report.lower_bound_prob <= 0.0 {
        Some("Fano probability is not positive".into())
    } else {
        None
    };
    report.valid = report.reason.is_none();
    Ok((report, Some(family)))
}
