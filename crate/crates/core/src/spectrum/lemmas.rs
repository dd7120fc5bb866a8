//! Numerical checks of the structural inequalities satisfied by `F`, `G`,
//! `G^{-1}` and the effective dimension.
//!
//! The "for t small enough" thresholds are derived per profile from its `j0`:
//! doubling bounds are checked for `t <= t0 / C` with `t0 = mu_{j0}` (the
//! largest `t` with `F(t) >= j0`), and the lower inverse bound for
//! `G^{-1}(u) < min(mu_{2 j0}, mu_1)`.

use super::{Extended, SpectrumProfile};

/// Relative slack for floating comparisons of `G` values.
const SLACK: f64 = 1e-12;

/// Outcome of one property over a grid of test points.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl PropertyCheck {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), checks: 0, violations: Vec::new() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn finite(g: Extended) -> f64 {
    g.finite().expect("G is finite below the top eigenvalue")
}

/// Distinct eigenvalues plus the geometric midpoint of every gap between
/// consecutive ones and one point below `mu_p`.
pub fn breakpoint_grid(profile: &SpectrumProfile) -> Vec<f64> {
    let bps: Vec<f64> = profile.breakpoints().iter().map(|&(t, _)| t).collect();
    let mut grid = Vec::with_capacity(2 * bps.len() + 1);
    for (i, &t) in bps.iter().enumerate() {
        grid.push(t);
        match bps.get(i + 1) {
            Some(&next) => grid.push((t * next).sqrt()),
            None => grid.push(t / 2.0),
        }
    }
    grid
}

/// `G(c t) <= c G(t)` for `c <= 1` and `t` on the breakpoint grid.
pub fn check_contraction(profile: &SpectrumProfile, r: f64, cs: &[f64]) -> PropertyCheck {
    let mut out = PropertyCheck::new(format!("G(ct) <= c G(t) (r={r})"));
    for &t in &breakpoint_grid(profile) {
        let gt = finite(profile.gee_unchecked(t, r));
        for &c in cs {
            let gct = finite(profile.gee_unchecked(c * t, r));
            out.record(gct <= c * gt * (1.0 + SLACK), || {
                format!("t={t}, c={c}: G(ct)={gct} > c G(t)={}", c * gt)
            });
        }
    }
    out
}

/// `F(t) <= 4 C^{1/nu_upper} F(C t)` and `G(C t) <= 4 C^{2r+1+1/nu_upper} G(t)`
/// for `C >= 1` and `t <= mu_{j0} / C`.
pub fn check_dilation(profile: &SpectrumProfile, r: f64, big_cs: &[f64]) -> PropertyCheck {
    let mut out = PropertyCheck::new(format!("F/G dilation bounds (r={r})"));
    let nu = profile.nu_upper();
    let t0 = match profile.eigenvalue(profile.j0()) {
        Ok(t0) => t0,
        Err(_) => return out,
    };
    let grid = breakpoint_grid(profile);
    for &big_c in big_cs {
        let f_factor = 4.0 * big_c.powf(1.0 / nu);
        let g_factor = 4.0 * big_c.powf(2.0 * r + 1.0 + 1.0 / nu);
        for &t in grid.iter().filter(|&&t| t <= t0 / big_c) {
            let ft = profile.count_unchecked(t) as f64;
            let fct = profile.count_unchecked(big_c * t) as f64;
            out.record(ft <= f_factor * fct, || {
                format!("t={t}, C={big_c}: F(t)={ft} > {f_factor} F(Ct)={}", f_factor * fct)
            });
            let gt = finite(profile.gee_unchecked(t, r));
            let gct = finite(profile.gee_unchecked(big_c * t, r));
            out.record(gct <= g_factor * gt * (1.0 + SLACK), || {
                format!("t={t}, C={big_c}: G(Ct)={gct} > {g_factor} G(t)={}", g_factor * gt)
            });
        }
    }
    out
}

/// Log-spaced `u` values covering the whole range of `G` on the profile,
/// plus the exact `G` values at every breakpoint.
pub fn inverse_grid(profile: &SpectrumProfile, r: f64, points: usize) -> Vec<f64> {
    let lo = finite(profile.gee_unchecked(*profile.values().last().unwrap(), r)) * 1e-3;
    let hi = finite(profile.gee_unchecked(profile.top(), r)) * 10.0;
    let mut us = log_space(lo, hi, points);
    us.extend(profile.breakpoints().iter().map(|&(t, _)| finite(profile.gee_unchecked(t, r))));
    us
}

/// `G(G^{-1}(u)) <= u` everywhere and `G(G^{-1}(u)) >= u/4` whenever
/// `G^{-1}(u) < min(mu_{2 j0}, mu_1)`.
pub fn check_inverse(profile: &SpectrumProfile, r: f64, us: &[f64]) -> PropertyCheck {
    let mut out = PropertyCheck::new(format!("u/4 <= G(G^-1(u)) <= u (r={r})"));
    let threshold = profile.eigenvalue(2 * profile.j0()).ok().map(|t| t.min(profile.top()));
    for &u in us {
        let t = profile.gee_inverse(u, r).expect("u > 0");
        let g = finite(profile.gee_unchecked(t, r));
        out.record(g <= u, || format!("u={u}: G(G^-1(u))={g} > u"));
        if threshold.is_some_and(|t0| t < t0) {
            out.record(g >= u / 4.0 * (1.0 - SLACK), || {
                format!("u={u}: G(G^-1(u))={g} < u/4 (t={t})")
            });
        }
    }
    out
}

/// `1 + 2 (1 - 2^{1-nu})^{-1}`; infinite for `nu <= 1`.
pub fn effective_dimension_factor(nu: f64) -> f64 {
    let denom = 1.0 - 2f64.powf(1.0 - nu);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        1.0 + 2.0 / denom
    }
}

/// `N(lambda) <= F(lambda) (1 + 2 (1 - 2^{1-nu})^{-1})` on `lambdas` with
/// `F(lambda) >= j0` (others are skipped).
pub fn check_effective_dimension(profile: &SpectrumProfile, nu: f64, lambdas: &[f64]) -> PropertyCheck {
    let mut out = PropertyCheck::new(format!("N(lambda) <= F(lambda) (1 + 2/(1 - 2^(1-nu))) (nu={nu})"));
    let factor = effective_dimension_factor(nu);
    for &lam in lambdas {
        let f = profile.count_unchecked(lam);
        if f < profile.j0() {
            continue;
        }
        let n = profile.effective_dimension(lam).expect("lambda > 0");
        let bound = f as f64 * factor;
        out.record(n <= bound, || format!("lambda={lam}: N={n} > {bound}"));
    }
    out
}

/// `count` log-spaced values of lambda between `mu_p` and `mu_{j0}`.
pub fn effective_dimension_grid(profile: &SpectrumProfile, count: usize) -> Vec<f64> {
    let hi = profile.eigenvalue(profile.j0()).unwrap_or(profile.top());
    let lo = *profile.values().last().unwrap();
    log_space(lo, hi, count)
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in log scale.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    for v in &mut out {
        *v = v.clamp(lo.min(hi), lo.max(hi));
    }
    out
}

/// The full property suite at the default test points:
/// `c in {0.1, 0.5, 1}`, `C in {1, 2, 10}`, 200 log-spaced `u` plus the
/// breakpoint values of `G`, and 50 log-spaced `lambda` (the effective-dimension
/// factor uses `nu_lower`). Dilation, inverse
/// and effective-dimension checks only apply to upper-decay verified profiles
/// and are omitted otherwise.
pub fn suite(profile: &SpectrumProfile, r: f64) -> Vec<PropertyCheck> {
    let mut checks = vec![check_contraction(profile, r, &[0.1, 0.5, 1.0])];
    if profile.verify_decay().eigup_ok {
        checks.push(check_dilation(profile, r, &[1.0, 2.0, 10.0]));
        checks.push(check_inverse(profile, r, &inverse_grid(profile, r, 200)));
        checks.push(check_effective_dimension(
            profile,
            profile.nu_lower(),
            &effective_dimension_grid(profile, 50),
        ));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumKind;

    #[test]
    fn polynomial_suite_passes() {
        for &b in &[1.0, 2.0, 4.0] {
            let prof = SpectrumProfile::polynomial(b, 400).unwrap();
            for &r in &[0.25, 0.5, 1.0] {
                for check in suite(&prof, r) {
                    assert!(check.passed(), "b={b} r={r}: {} {:?}", check.name, check.violations);
                    assert!(check.checks > 0);
                }
            }
        }
    }

    #[test]
    fn factor_is_infinite_at_one() {
        assert!(effective_dimension_factor(1.0).is_infinite());
        assert_eq!(effective_dimension_factor(2.0), 5.0);
    }

    #[test]
    fn dilation_detects_long_plateau() {
        // a flat sequence breaks F(t) <= 4 C^{1/nu} F(Ct) once C t crosses the plateau
        let prof = SpectrumProfile::new(
            SpectrumKind::Plateau { levels: vec![(1.0, 1), (0.5, 60)] },
            None,
            1,
            1.0,
            1.0,
        )
        .unwrap();
        let check = check_dilation(&prof, 0.5, &[2.0]);
        assert!(!check.passed());
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1e-4, 1.0, 5);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[4] - 1.0).abs() < 1e-15);
        assert!((g[2] - 1e-2).abs() < 1e-15);
    }
}
