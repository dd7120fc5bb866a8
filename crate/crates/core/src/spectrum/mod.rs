//! Eigenvalue profiles of the covariance operator and the spectral functionals
//! built on them.
//!
//! A [`SpectrumProfile`] is a finite, strictly positive, nonincreasing sequence
//! `mu_1 >= mu_2 >= ... >= mu_p > 0` together with the dyadic decay exponents
//! it is declared to satisfy from index `j0` on:
//!
//! ```text
//! upper decay:  mu_{2j} / mu_j <= 2^{-nu_upper}
//! lower decay:  mu_{2j} / mu_j >= 2^{-nu_lower}
//! ```
//!
//! On top of the sequence live the counting function `F(t) = #{j : mu_j >= t}`,
//! `G(t) = t^{2r+1} / F(t)` (infinite where `F` vanishes), its generalized
//! inverse `G^{-1}(u) = max{t : G(t) <= u}` and the effective dimension
//! `N(lambda) = sum_j mu_j / (mu_j + lambda)`.
//!
//! Construction validates positivity, monotonicity and `1 <= nu_upper <= nu_lower`.
//! The decay assumptions are *reported* by [`SpectrumProfile::verify_decay`] and
//! enforced by [`SpectrumProfile::require_upper_decay`] /
//! [`SpectrumProfile::require_lower_decay`], so that profiles violating them
//! (geometric sequences, long plateaus) can still be inspected.

pub mod lemmas;

use std::cmp::Ordering;
use std::fmt;


use crate::error::{domain, ensure_positive, Error, Result};

/// Relative slack used when comparing dyadic ratios against `2^{-nu}`.
const RATIO_SLACK: f64 = 1e-12;

/// Generator family of an eigenvalue sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumKind {
    /// `mu_j = j^{-b}`.
    Polynomial { b: f64 },
    /// `mu_j = i^{-b} (ln i)^c (ln ln i)^d` with `i = max(j, i_min)`, where
    /// `i_min` is the first index from which the expression is positive and
    /// nonincreasing. The head of the sequence is therefore flat.
    Polylog { b: f64, c: f64, d: f64 },
    /// Consecutive runs `(value, run_length)` of constant eigenvalues.
    Plateau { levels: Vec<(f64, usize)> },
    /// Piecewise power law, continuous at the breakpoints. Each entry is
    /// `(start_index, exponent)`; the first start index must be 1 and
    /// `mu_1 = 1`.
    RegimeSwitch { breakpoints: Vec<(usize, f64)> },
    /// Literal eigenvalues.
    Explicit { values: Vec<f64> },
}

impl SpectrumKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SpectrumKind::Polynomial { .. } => "polynomial",
            SpectrumKind::Polylog { .. } => "polylog",
            SpectrumKind::Plateau { .. } => "plateau",
            SpectrumKind::RegimeSwitch { .. } => "regime_switch",
            SpectrumKind::Explicit { .. } => "explicit",
        }
    }
}

/// Positive real extended with `+infinity`. Infinity compares above every
/// finite value and never enters arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinity)
    }

    /// `self <= u` for a finite `u`.
    pub fn le(self, u: f64) -> bool {
        match self {
            Extended::Finite(v) => v <= u,
            Extended::Infinity => false,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinity) => Some(Ordering::Less),
            (Extended::Infinity, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinity, Extended::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinity => f.write_str("inf"),
        }
    }
}

/// Which dyadic decay bound an index violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayBound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayViolation {
    pub j: usize,
    pub ratio: f64,
    pub bound: DecayBound,
}

/// Result of the exhaustive dyadic-ratio check over `j in [j0, p/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub eigup_ok: bool,
    pub eiglow_ok: bool,
    /// Every violating index, in increasing order of `j`.
    pub violations: Vec<DecayViolation>,
    /// Number of indices examined.
    pub checked: usize,
}

impl DecayReport {
    pub fn violating_indices(&self, bound: DecayBound) -> Vec<usize> {
        self.violations.iter().filter(|v| v.bound == bound).map(|v| v.j).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumProfile {
    kind: SpectrumKind,
    j0: usize,
    nu_upper: f64,
    nu_lower: f64,
    values: Vec<f64>,
}

impl SpectrumProfile {
    /// Builds a profile of length `p`. `p` is required for the analytic
    /// families; for `Plateau` it defaults to the total run length (a smaller
    /// `p` truncates) and for `Explicit` it must equal the number of values
    /// when given.
    pub fn new(
        kind: SpectrumKind,
        p: Option<usize>,
        j0: usize,
        nu_upper: f64,
        nu_lower: f64,
    ) -> Result<Self> {
        if j0 == 0 {
            return Err(domain("j0 must be a positive index"));
        }
        if !(nu_upper >= 1.0 && nu_lower >= nu_upper && nu_lower.is_finite()) {
            return Err(domain(format!(
                "decay exponents must satisfy 1 <= nu_upper <= nu_lower, got nu_upper={nu_upper}, nu_lower={nu_lower}"
            )));
        }
        let values = materialize(&kind, p)?;
        for (i, w) in values.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(domain(format!(
                    "eigenvalues must be nonincreasing: mu_{} = {} < mu_{} = {}",
                    i + 1,
                    w[0],
                    i + 2,
                    w[1]
                )));
            }
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(domain(format!("eigenvalue mu_{} = {v} is not a positive finite real", i + 1)));
        }
        Ok(Self { kind, j0, nu_upper, nu_lower, values })
    }

    /// `mu_j = j^{-b}` with `j0 = 1` and both decay exponents equal to `b`
    /// (which must be at least 1).
    pub fn polynomial(b: f64, p: usize) -> Result<Self> {
        Self::new(SpectrumKind::Polynomial { b }, Some(p), 1, b, b)
    }

    /// Literal eigenvalues with the weakest admissible declaration
    /// (`j0 = 1`, `nu_upper = nu_lower = 1`).
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::new(SpectrumKind::Explicit { values }, None, 1, 1.0, 1.0)
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn p(&self) -> usize {
        self.values.len()
    }

    pub fn j0(&self) -> usize {
        self.j0
    }

    pub fn nu_upper(&self) -> f64 {
        self.nu_upper
    }

    pub fn nu_lower(&self) -> f64 {
        self.nu_lower
    }

    /// All eigenvalues, `values()[j - 1] = mu_j`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest eigenvalue; the profile-level stand-in for `kappa^2` that caps
    /// the generalized inverse.
    pub fn top(&self) -> f64 {
        self.values[0]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `mu_j` for `1 <= j <= p`.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.p() {
            return Err(Error::Range { index: j, len: self.p() });
        }
        Ok(self.values[j - 1])
    }

    /// `F(t) = #{j <= p : mu_j >= t}`. Left-continuous in `t`.
    pub fn count(&self, t: f64) -> Result<usize> {
        ensure_positive("t", t)?;
        Ok(self.count_unchecked(t))
    }

    /// `F(t+) = #{j <= p : mu_j > t}`.
    pub fn count_strict(&self, t: f64) -> Result<usize> {
        ensure_positive("t", t)?;
        Ok(self.values.partition_point(|&v| v > t))
    }

    pub(crate) fn count_unchecked(&self, t: f64) -> usize {
        self.values.partition_point(|&v| v >= t)
    }

    /// `G(t) = t^{2r+1} / F(t)`, infinite where `F(t) = 0`.
    pub fn gee(&self, t: f64, r: f64) -> Result<Extended> {
        ensure_positive("t", t)?;
        ensure_positive("r", r)?;
        Ok(self.gee_unchecked(t, r))
    }

    pub(crate) fn gee_unchecked(&self, t: f64, r: f64) -> Extended {
        match self.count_unchecked(t) {
            0 => Extended::Infinity,
            k => Extended::Finite(t.powf(2.0 * r + 1.0) / k as f64),
        }
    }

    /// `G^{-1}(u) = max{t : G(t) <= u}`.
    ///
    /// On each interval `(mu_{k+1}, mu_k]` where `F = k`, `G` is the monomial
    /// `t^{2r+1}/k`, so the candidate on that piece is
    /// `min(mu_k, (u k)^{1/(2r+1)})` whenever it lies inside the piece. The
    /// answer is the largest candidate, never above `mu_1`. The result is
    /// nudged down until `G(result) <= u` holds on re-evaluation.
    pub fn gee_inverse(&self, u: f64, r: f64) -> Result<f64> {
        ensure_positive("u", u)?;
        ensure_positive("r", r)?;
        let exponent = 1.0 / (2.0 * r + 1.0);
        let p = self.p();
        let mut best = 0.0_f64;
        for k in 1..=p {
            let upper = self.values[k - 1];
            let lower = if k < p { self.values[k] } else { 0.0 };
            if lower >= upper {
                // inside a run of ties, F never equals k
                continue;
            }
            let candidate = upper.min((u * k as f64).powf(exponent));
            if candidate > lower && candidate > best {
                best = candidate;
            }
        }
        debug_assert!(best > 0.0);
        while !self.gee_unchecked(best, r).le(u) {
            best = best.next_down();
        }
        Ok(best)
    }

    /// `N(lambda) = sum_j mu_j / (mu_j + lambda)`.
    pub fn effective_dimension(&self, lambda: f64) -> Result<f64> {
        ensure_positive("lambda", lambda)?;
        Ok(self.values.iter().map(|&m| m / (m + lambda)).sum())
    }

    /// Checks `2^{-nu_lower} <= mu_{2j}/mu_j <= 2^{-nu_upper}` for every
    /// `j in [j0, p/2]` and reports all violations.
    pub fn verify_decay(&self) -> DecayReport {
        let up = 2f64.powf(-self.nu_upper) * (1.0 + RATIO_SLACK);
        let low = 2f64.powf(-self.nu_lower) * (1.0 - RATIO_SLACK);
        let mut violations = Vec::new();
        let mut checked = 0;
        let last = self.p() / 2;
        for j in self.j0..=last {
            checked += 1;
            let ratio = self.values[2 * j - 1] / self.values[j - 1];
            if ratio > up {
                violations.push(DecayViolation { j, ratio, bound: DecayBound::Upper });
            }
            if ratio < low {
                violations.push(DecayViolation { j, ratio, bound: DecayBound::Lower });
            }
        }
        DecayReport {
            eigup_ok: violations.iter().all(|v| v.bound != DecayBound::Upper),
            eiglow_ok: violations.iter().all(|v| v.bound != DecayBound::Lower),
            violations,
            checked,
        }
    }

    pub fn require_upper_decay(&self) -> Result<()> {
        let report = self.verify_decay();
        if report.eigup_ok {
            return Ok(());
        }
        let bad = report.violating_indices(DecayBound::Upper);
        Err(Error::Gate(format!(
            "upper eigenvalue decay (mu_2j/mu_j <= 2^-{}) violated at j = {}",
            self.nu_upper,
            summarize_indices(&bad)
        )))
    }

    pub fn require_lower_decay(&self) -> Result<()> {
        let report = self.verify_decay();
        if report.eiglow_ok {
            return Ok(());
        }
        let bad = report.violating_indices(DecayBound::Lower);
        Err(Error::Gate(format!(
            "lower eigenvalue decay (mu_2j/mu_j >= 2^-{}) violated at j = {}",
            self.nu_lower,
            summarize_indices(&bad)
        )))
    }

    /// Distinct eigenvalues `t` at which `F` jumps, with `F(t)` at each.
    pub fn breakpoints(&self) -> Vec<(f64, usize)> {
        let p = self.p();
        (1..=p)
            .filter(|&k| k == p || self.values[k] < self.values[k - 1])
            .map(|k| (self.values[k - 1], k))
            .collect()
    }
}

fn summarize_indices(idx: &[usize]) -> String {
    const SHOWN: usize = 8;
    let mut s = idx.iter().take(SHOWN).map(|j| j.to_string()).collect::<Vec<_>>().join(", ");
    if idx.len() > SHOWN {
        s.push_str(&format!(", ... ({} total)", idx.len()));
    }
    s
}

fn require_len(kind: &str, p: Option<usize>) -> Result<usize> {
    match p {
        Some(p) if p >= 1 => Ok(p),
        Some(_) => Err(domain("truncation length p must be at least 1")),
        None => Err(domain(format!("{kind} profile needs an explicit truncation length p"))),
    }
}

fn materialize(kind: &SpectrumKind, p: Option<usize>) -> Result<Vec<f64>> {
    match kind {
        SpectrumKind::Polynomial { b } => {
            ensure_positive("b", *b)?;
            let p = require_len("polynomial", p)?;
            Ok((1..=p).map(|j| (j as f64).powf(-b)).collect())
        }
        SpectrumKind::Polylog { b, c, d } => {
            ensure_positive("b", *b)?;
            if !(*c >= 0.0 && *d >= 0.0) {
                return Err(domain("polylog exponents c and d must be nonnegative"));
            }
            let p = require_len("polylog", p)?;
            let start = polylog_start(*b, *c, *d);
            Ok((1..=p).map(|j| polylog_value(j.max(start) as f64, *b, *c, *d)).collect())
        }
        SpectrumKind::Plateau { levels } => {
            if levels.is_empty() {
                return Err(domain("plateau profile needs at least one level"));
            }
            let mut values = Vec::new();
            for &(value, run) in levels {
                if run == 0 {
                    return Err(domain("plateau run lengths must be positive"));
                }
                values.extend(std::iter::repeat_n(value, run));
            }
            match p {
                None => Ok(values),
                Some(p) if p >= 1 && p <= values.len() => {
                    values.truncate(p);
                    Ok(values)
                }
                Some(p) => Err(domain(format!(
                    "plateau truncation p = {p} outside 1..={}",
                    values.len()
                ))),
            }
        }
        SpectrumKind::RegimeSwitch { breakpoints } => {
            let p = require_len("regime_switch", p)?;
            match breakpoints.first() {
                Some(&(1, _)) => {}
                _ => return Err(domain("regime_switch breakpoints must start at index 1")),
            }
            if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(domain("regime_switch start indices must be strictly increasing"));
            }
            for &(_, b) in breakpoints {
                ensure_positive("regime exponent", b)?;
            }
            let mut values = Vec::with_capacity(p);
            let mut anchor = (1usize, 1.0f64);
            let mut regime = 0;
            for j in 1..=p {
                while regime + 1 < breakpoints.len() && j >= breakpoints[regime + 1].0 {
                    let start = breakpoints[regime + 1].0;
                    let b = breakpoints[regime].1;
                    let value = anchor.1 * (start as f64 / anchor.0 as f64).powf(-b);
                    anchor = (start, value);
                    regime += 1;
                }
                let b = breakpoints[regime].1;
                values.push(anchor.1 * (j as f64 / anchor.0 as f64).powf(-b));
            }
            Ok(values)
        }
        SpectrumKind::Explicit { values } => {
            if values.is_empty() {
                return Err(domain("explicit profile needs at least one eigenvalue"));
            }
            if let Some(p) = p {
                if p != values.len() {
                    return Err(domain(format!(
                        "explicit profile has {} values but p = {p}",
                        values.len()
                    )));
                }
            }
            Ok(values.clone())
        }
    }
}

fn polylog_value(i: f64, b: f64, c: f64, d: f64) -> f64 {
    let mut v = i.powf(-b);
    if c != 0.0 {
        v *= i.ln().powf(c);
    }
    if d != 0.0 {
        v *= i.ln().ln().powf(d);
    }
    v
}

/// First integer index from which `i^{-b} (ln i)^c (ln ln i)^d` is positive
/// and nonincreasing: the log-derivative `-b + c/ln i + d/(ln i ln ln i)` is
/// decreasing in `i`, so the first index where it is negative works onwards.
fn polylog_start(b: f64, c: f64, d: f64) -> usize {
    let mut i: usize = if d > 0.0 {
        3
    } else if c > 0.0 {
        2
    } else {
        1
    };
    loop {
        let x = i as f64;
        let mut slope = -b;
        if c > 0.0 {
            slope += c / x.ln();
        }
        if d > 0.0 {
            slope += d / (x.ln() * x.ln().ln());
        }
        if slope < 0.0 {
            return i;
        }
        i += 1;
    }
}
