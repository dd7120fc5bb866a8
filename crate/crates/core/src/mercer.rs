//! Synthetic learning problems with an exactly prescribed covariance spectrum.
//!
//! The kernel is the finite Mercer sum `k(x, x') = sum_l mu_l e_l(x) e_l(x')`
//! over an `L^2(nu)`-orthonormal family `e_l`. All coefficient vectors are
//! taken in the `H`-orthonormal basis `phi_l = sqrt(mu_l) e_l`, so that
//! `||f||_H` is a Euclidean norm and `||B^s f||_H` is the diagonally weighted
//! norm `sqrt(sum_l mu_l^{2s} f_l^2)`. The feature map in these coordinates is
//! `Phi(x)_l = sqrt(mu_l) e_l(x)`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{domain, ensure_positive, Error, Result};
use crate::spectrum::SpectrumProfile;

/// Number of grid points for the numeric `kappa^2` certificate.
pub const KAPPA_GRID: usize = 10_000;
/// Safety factor applied to the numeric `kappa^2` supremum.
pub const KAPPA_SAFETY: f64 = 1.01;

/// Orthonormal family in `L^2(nu)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `nu` uniform on `[0, 1]`; `e_1 = 1`, `e_{2k} = sqrt(2) cos(2 pi k x)`,
    /// `e_{2k+1} = sqrt(2) sin(2 pi k x)`.
    FourierUnitInterval,
    /// `nu` uniform over integer labels `x in [0, 2^53)`; `e_l(x)` is a
    /// pseudo-random sign determined by `(x, l)`, so the `e_l` are
    /// orthonormal, mutually independent Rademacher variables.
    AbstractOrthonormal,
}

impl Basis {
    pub fn tag(&self) -> &'static str {
        match self {
            Basis::FourierUnitInterval => "fourier_unit_interval",
            Basis::AbstractOrthonormal => "abstract_orthonormal",
        }
    }

    /// Writes `e_1(x), ..., e_len(x)` into `out`.
    pub fn fill(&self, x: f64, out: &mut [f64]) {
        match self {
            Basis::FourierUnitInterval => fill_fourier(x, out),
            Basis::AbstractOrthonormal => {
                let label = x as u64;
                for (l, slot) in out.iter_mut().enumerate() {
                    *slot = if splitmix64(label ^ splitmix64(l as u64 + 1)) >> 63 == 0 { 1.0 } else { -1.0 };
                }
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            Basis::FourierUnitInterval => (0.0..=1.0).contains(&x),
            Basis::AbstractOrthonormal => x >= 0.0 && x < (1u64 << 53) as f64 && x.fract() == 0.0,
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Basis::FourierUnitInterval => rng.random::<f64>(),
            Basis::AbstractOrthonormal => (rng.random::<u64>() >> 11) as f64,
        }
    }
}

fn fill_fourier(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    let (s1, c1) = (2.0 * PI * x).sin_cos();
    let (mut s, mut c) = (s1, c1);
    let mut k = 1usize;
    loop {
        let cos_slot = 2 * k - 1;
        if cos_slot >= out.len() {
            break;
        }
        out[cos_slot] = SQRT_2 * c;
        if cos_slot + 1 < out.len() {
            out[cos_slot + 1] = SQRT_2 * s;
        }
        k += 1;
        // rotation recurrence, re-anchored periodically against drift
        if k % 32 == 0 {
            (s, c) = (2.0 * PI * k as f64 * x).sin_cos();
        } else {
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
        }
    }
}

/// Conditional law of the noise given `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    BoundedUniform { half_width: f64 },
}

impl NoiseModel {
    /// Standard deviation of the noise.
    pub fn sigma(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma,
            NoiseModel::BoundedUniform { half_width } => half_width / 3f64.sqrt(),
        }
    }

    /// Bernstein constant `M` with `E[eps^m | X] <= m!/2 sigma^2 M^{m-2}`.
    pub fn bernstein_m(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma,
            NoiseModel::BoundedUniform { half_width } => half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            NoiseModel::Gaussian { sigma } => sigma,
            NoiseModel::BoundedUniform { half_width } => half_width,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("noise scale must be a nonnegative finite real, got {v}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } if sigma > 0.0 => {
                Normal::new(0.0, sigma).expect("positive sigma").sample(rng)
            }
            NoiseModel::BoundedUniform { half_width } if half_width > 0.0 => {
                rng.random_range(-half_width..half_width)
            }
            _ => 0.0,
        }
    }
}

/// Source condition `f* = B^r g` with `||g||_H <= radius`, and the norm index
/// `s` of `||B^s . ||_H` in which errors are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceParams {
    pub r: f64,
    pub radius: f64,
    pub s: f64,
}

impl SourceParams {
    pub fn new(r: f64, radius: f64, s: f64) -> Result<Self> {
        ensure_positive("r", r)?;
        ensure_positive("radius R", radius)?;
        check_norm_index(s)?;
        Ok(Self { r, radius, s })
    }
}

pub(crate) fn check_norm_index(s: f64) -> Result<()> {
    if (0.0..=0.5).contains(&s) {
        Ok(())
    } else {
        Err(domain(format!("norm index s must lie in [0, 1/2], got {s}")))
    }
}

/// `n` inputs with responses; regenerating with the same seed reproduces it
/// bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, seed: u64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!("{} inputs but {} responses", x.len(), y.len())));
        }
        Ok(Self { x, y, seed })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// First `k` points and the rest.
    pub fn split_at(&self, k: usize) -> (Dataset, Dataset) {
        (
            Dataset { x: self.x[..k].to_vec(), y: self.y[..k].to_vec(), seed: self.seed },
            Dataset { x: self.x[k..].to_vec(), y: self.y[k..].to_vec(), seed: self.seed },
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MercerProblem {
    profile: SpectrumProfile,
    basis: Basis,
    source: SourceParams,
    g_coeffs: Vec<f64>,
    target_coeffs: Vec<f64>,
    noise: NoiseModel,
    kappa_sq: f64,
}

impl MercerProblem {
    /// Builds the problem with target `f* = B^r g`. Rejects `||g|| > R`.
    pub fn new(
        profile: SpectrumProfile,
        basis: Basis,
        source: SourceParams,
        g_coeffs: Vec<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let p = profile.p();
        if g_coeffs.len() != p {
            return Err(Error::Shape(format!("source element has {} coefficients, profile has p = {p}", g_coeffs.len())));
        }
        noise.validate()?;
        let norm_sq: f64 = g_coeffs.iter().map(|g| g * g).sum();
        let radius_sq = source.radius * source.radius;
        if norm_sq > radius_sq * (1.0 + 1e-12) {
            return Err(domain(format!(
                "source element norm {} exceeds radius R = {}",
                norm_sq.sqrt(),
                source.radius
            )));
        }
        let target_coeffs = profile
            .values()
            .iter()
            .zip(&g_coeffs)
            .map(|(mu, g)| mu.powf(source.r) * g)
            .collect();
        let kappa_sq = certify_kappa_sq(&profile, basis);
        Ok(Self { profile, basis, source, g_coeffs, target_coeffs, noise, kappa_sq })
    }

    /// Default "edge of class" source element
    /// `g_l = R mu_l^rho z_l / ||mu^rho z||` with alternating signs `z_l`;
    /// `rho = 0` spreads `g` evenly and puts `f*` on the boundary of the class.
    pub fn edge_of_class(
        profile: SpectrumProfile,
        basis: Basis,
        source: SourceParams,
        rho: f64,
        noise: NoiseModel,
    ) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(domain(format!("rho must be a nonnegative finite real, got {rho}")));
        }
        let raw: Vec<f64> = profile
            .values()
            .iter()
            .enumerate()
            .map(|(i, mu)| mu.powf(rho) * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = raw.iter().map(|v| source.radius * v / norm).collect();
        Self::new(profile, basis, source, g, noise)
    }

    pub fn profile(&self) -> &SpectrumProfile {
        &self.profile
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn source(&self) -> &SourceParams {
        &self.source
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g_coeffs
    }

    pub fn target_coeffs(&self) -> &[f64] {
        &self.target_coeffs
    }

    /// Certified upper bound on `sup_x k(x, x)`.
    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn p(&self) -> usize {
        self.profile.p()
    }

    /// Same problem with a different target.
    pub fn with_g_coeffs(&self, g_coeffs: Vec<f64>) -> Result<Self> {
        Self::new(self.profile.clone(), self.basis, self.source, g_coeffs, self.noise)
    }

    /// Same problem with a different noise law.
    pub fn with_noise(&self, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        Ok(Self { noise, ..self.clone() })
    }

    /// `Phi(x)` in `H`-orthonormal coordinates: `sqrt(mu_l) e_l(x)`.
    pub fn features_into(&self, x: f64, out: &mut [f64]) {
        self.basis.fill(x, out);
        for (slot, mu) in out.iter_mut().zip(self.profile.values()) {
            *slot *= mu.sqrt();
        }
    }

    pub fn features(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        self.features_into(x, &mut out);
        out
    }

    /// `n x p` matrix whose rows are the feature vectors of `xs`.
    pub fn feature_matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let p = self.p();
        let mut z = DMatrix::zeros(xs.len(), p);
        let mut row = vec![0.0; p];
        for (i, &x) in xs.iter().enumerate() {
            self.features_into(x, &mut row);
            for (l, v) in row.iter().enumerate() {
                z[(i, l)] = *v;
            }
        }
        z
    }

    /// `k(x, x') = sum_l mu_l e_l(x) e_l(x')`.
    pub fn kernel_eval(&self, x: f64, x2: f64) -> f64 {
        let p = self.p();
        let (mut a, mut b) = (vec![0.0; p], vec![0.0; p]);
        self.basis.fill(x, &mut a);
        self.basis.fill(x2, &mut b);
        self.profile.values().iter().zip(a.iter().zip(&b)).map(|(mu, (u, v))| mu * u * v).sum()
    }

    /// Evaluates `sum_l coeffs_l sqrt(mu_l) e_l(x)`.
    pub fn synthesize(&self, coeffs: &[f64], x: f64) -> f64 {
        let mut phi = vec![0.0; self.p()];
        self.features_into(x, &mut phi);
        phi.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// `f*(x)`.
    pub fn target_eval(&self, x: f64) -> f64 {
        self.synthesize(&self.target_coeffs, x)
    }

    /// `n` i.i.d. draws `x ~ nu`, `y = f*(x) + eps`. Inputs are drawn first,
    /// then the noise, from a ChaCha stream keyed by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| self.basis.draw(&mut rng)).collect();
        let mut phi = vec![0.0; self.p()];
        let y = x
            .iter()
            .map(|&xi| {
                self.features_into(xi, &mut phi);
                let f: f64 = phi.iter().zip(&self.target_coeffs).map(|(a, b)| a * b).sum();
                f + self.noise.sample(&mut rng)
            })
            .collect();
        Ok(Dataset { x, y, seed })
    }

    /// `||B^s (f* - fhat)||_H = sqrt(sum_l mu_l^{2s} (a*_l - fhat_l)^2)`.
    pub fn error_norm(&self, fhat_coeffs: &[f64], s: f64) -> Result<f64> {
        check_norm_index(s)?;
        weighted_norm(self.profile.values(), &self.target_coeffs, fhat_coeffs, s)
    }
}

/// `sqrt(sum_l mu_l^{2s} (a_l - b_l)^2)`.
pub fn weighted_norm(mu: &[f64], a: &[f64], b: &[f64], s: f64) -> Result<f64> {
    if a.len() != mu.len() || b.len() != mu.len() {
        return Err(Error::Shape(format!(
            "coefficient vectors of length {} and {} for p = {}",
            a.len(),
            b.len(),
            mu.len()
        )));
    }
    let sum: f64 = mu
        .iter()
        .zip(a.iter().zip(b))
        .map(|(m, (x, y))| {
            let w = if s == 0.0 { 1.0 } else { m.powf(2.0 * s) };
            w * (x - y) * (x - y)
        })
        .sum();
    Ok(sum.sqrt())
}

fn certify_kappa_sq(profile: &SpectrumProfile, basis: Basis) -> f64 {
    let mu = profile.values();
    match basis {
        // e_l(x)^2 = 1 identically
        Basis::AbstractOrthonormal => profile.sum(),
        Basis::FourierUnitInterval => {
            let analytic = mu[0] + 2.0 * mu[1..].iter().sum::<f64>();
            let mut e = vec![0.0; mu.len()];
            let mut sup = 0.0_f64;
            for i in 0..KAPPA_GRID {
                let x = i as f64 / KAPPA_GRID as f64;
                fill_fourier(x, &mut e);
                let diag: f64 = mu.iter().zip(&e).map(|(m, v)| m * v * v).sum();
                sup = sup.max(diag);
            }
            (KAPPA_SAFETY * sup).min(analytic)
        }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for `(seed, stream)`; order-insensitive, so
/// replicates can be evaluated in any order or in parallel.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(values: Vec<f64>, r: f64, g: Vec<f64>, noise: NoiseModel) -> MercerProblem {
        let prof = SpectrumProfile::explicit(values).unwrap();
        MercerProblem::new(prof, Basis::FourierUnitInterval, SourceParams::new(r, 1.0, 0.5).unwrap(), g, noise)
            .unwrap()
    }

    #[test]
    fn fourier_values_match_direct() {
        let mut out = vec![0.0; 301];
        for &x in &[0.0, 0.1234, 0.5, 0.987] {
            fill_fourier(x, &mut out);
            assert_eq!(out[0], 1.0);
            for k in 1..=150 {
                let (s, c) = (2.0 * PI * k as f64 * x).sin_cos();
                assert!((out[2 * k - 1] - SQRT_2 * c).abs() < 1e-12);
                assert!((out[2 * k] - SQRT_2 * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let p1 = problem(vec![1.0], 0.5, vec![1.0], NoiseModel::Gaussian { sigma: 0.0 });
        assert_eq!(p1.kernel_eval(0.3, 0.8), 1.0);
        let p3 = problem(vec![1.0, 0.5, 0.5], 0.5, vec![0.0; 3], NoiseModel::Gaussian { sigma: 0.0 });
        assert_relative_eq!(p3.kernel_eval(0.0, 0.0), 2.0, max_relative = 1e-15);
        for i in 0..100 {
            let (a, b) = (i as f64 * 0.0173 % 1.0, i as f64 * 0.0391 % 1.0);
            assert_eq!(p3.kernel_eval(a, b), p3.kernel_eval(b, a));
            assert!(p3.kernel_eval(a, a) <= p3.kappa_sq());
        }
    }

    #[test]
    fn target_examples() {
        let single = problem(vec![1.0, 0.5], 0.7, vec![1.0, 0.0], NoiseModel::Gaussian { sigma: 0.0 });
        assert_relative_eq!(single.target_eval(0.37), 1.0, max_relative = 1e-15);
        let zero = problem(vec![1.0, 0.5], 0.7, vec![0.0, 0.0], NoiseModel::Gaussian { sigma: 0.0 });
        assert_eq!(zero.target_eval(0.37), 0.0);
        // a* = 0.25^0.5 * 1 = 0.5 and f*(x) = a* sqrt(0.25) e_1(x)
        let quarter = problem(vec![0.25], 0.5, vec![1.0], NoiseModel::Gaussian { sigma: 0.0 });
        assert_relative_eq!(quarter.target_coeffs()[0], 0.5);
        assert_relative_eq!(quarter.target_eval(0.9), 0.25);
    }

    #[test]
    fn source_membership_enforced() {
        let prof = SpectrumProfile::explicit(vec![1.0, 0.5]).unwrap();
        let src = SourceParams::new(0.5, 1.0, 0.0).unwrap();
        let err = MercerProblem::new(prof.clone(), Basis::FourierUnitInterval, src, vec![0.8, 0.7], NoiseModel::Gaussian { sigma: 1.0 });
        assert!(err.is_err());
        let edge = MercerProblem::edge_of_class(prof, Basis::FourierUnitInterval, src, 0.0, NoiseModel::Gaussian { sigma: 1.0 }).unwrap();
        let norm: f64 = edge.g_coeffs().iter().map(|g| g * g).sum();
        assert_relative_eq!(norm, 1.0, max_relative = 1e-12);
        assert!(SourceParams::new(0.5, 1.0, 0.6).is_err());
        assert!(SourceParams::new(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn sampling_noiseless_and_deterministic() {
        let prob = MercerProblem::edge_of_class(
            SpectrumProfile::polynomial(2.0, 30).unwrap(),
            Basis::FourierUnitInterval,
            SourceParams::new(0.5, 1.0, 0.5).unwrap(),
            0.0,
            NoiseModel::Gaussian { sigma: 0.0 },
        )
        .unwrap();
        let d = prob.sample(10, 7).unwrap();
        for (x, y) in d.x.iter().zip(&d.y) {
            assert_eq!(*y, prob.target_eval(*x));
        }
        let noisy = prob.with_noise(NoiseModel::Gaussian { sigma: 1.0 }).unwrap();
        assert_eq!(noisy.sample(50, 99).unwrap(), noisy.sample(50, 99).unwrap());
        assert_ne!(noisy.sample(50, 99).unwrap(), noisy.sample(50, 100).unwrap());
        assert!(prob.sample(0, 1).is_err());
    }

    #[test]
    fn gaussian_noise_variance() {
        let prob = problem(vec![1.0, 0.25], 0.5, vec![0.6, 0.0], NoiseModel::Gaussian { sigma: 1.0 });
        let d = prob.sample(100_000, 2024).unwrap();
        let resid: Vec<f64> = d.x.iter().zip(&d.y).map(|(x, y)| y - prob.target_eval(*x)).collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        assert!((0.98..=1.02).contains(&var), "variance {var}");
    }

    #[test]
    fn bounded_noise_stays_bounded() {
        let prob = problem(vec![1.0], 0.5, vec![0.0], NoiseModel::BoundedUniform { half_width: 0.3 });
        let d = prob.sample(1000, 5).unwrap();
        assert!(d.y.iter().all(|y| y.abs() <= 0.3));
        assert_eq!(prob.noise().bernstein_m(), 0.3);
    }

    #[test]
    fn error_norm_examples() {
        let prob = problem(vec![1.0, 0.5, 0.1], 0.5, vec![0.3, -0.4, 0.5], NoiseModel::Gaussian { sigma: 0.0 });
        let target = prob.target_coeffs().to_vec();
        for &s in &[0.0, 0.25, 0.5] {
            assert_eq!(prob.error_norm(&target, s).unwrap(), 0.0);
        }
        let h_norm = target.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert_relative_eq!(prob.error_norm(&[0.0; 3], 0.0).unwrap(), h_norm);
        assert!(prob.error_norm(&[0.0; 2], 0.0).is_err());
        assert!(prob.error_norm(&target, 0.7).is_err());

        assert_relative_eq!(weighted_norm(&[0.25], &[1.0], &[0.0], 0.5).unwrap(), 0.5);
    }

    #[test]
    fn abstract_basis_is_orthonormal_in_sample() {
        let prob = MercerProblem::edge_of_class(
            SpectrumProfile::polynomial(2.0, 6).unwrap(),
            Basis::AbstractOrthonormal,
            SourceParams::new(0.5, 1.0, 0.5).unwrap(),
            0.0,
            NoiseModel::Gaussian { sigma: 0.0 },
        )
        .unwrap();
        let d = prob.sample(20_000, 3).unwrap();
        let mut e = vec![0.0; 6];
        let mut gram = [[0.0; 6]; 6];
        for &x in &d.x {
            assert!(prob.basis().contains(x));
            prob.basis().fill(x, &mut e);
            for i in 0..6 {
                for j in 0..6 {
                    gram[i][j] += e[i] * e[j] / d.len() as f64;
                }
            }
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 0.05, "({i},{j}) = {v}");
            }
        }
        assert_relative_eq!(prob.kappa_sq(), prob.profile().sum());
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|r| derive_seed(42, r)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
