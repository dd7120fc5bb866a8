//! Sign packings `rho_1, ..., rho_N in {-1, +1}^m` with pairwise Hamming
//! distance above `m/4` and `ln(N - 1) >= m/36`.
//!
//! Short lengths use greedy rejection sampling over random sign vectors.
//! Long lengths, where `N` is astronomically large, use a concatenated code:
//! an outer Reed-Solomon code over `GF(2^k)` whose symbols are expanded by
//! either the simplex code `[2^k - 1, k, 2^{k-1}]` or the first-order
//! Reed-Muller code `[2^{k-1}, k, 2^{k-2}]`. The latter reaches roughly twice
//! the length at the same rate (up to `m` near 9500). Minimum distance and size
//! are known exactly, every non-padding coordinate is balanced over the
//! codebook, and a seeded sample of codewords is materialized for direct
//! checks. The all-`+1` word (zero message) serves as the reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

/// Shortest admissible code length.
pub const MIN_LENGTH: usize = 28;
/// Largest codebook generated greedily; beyond it the algebraic code is used.
pub const GREEDY_MAX_CODES: usize = 4096;
/// Greedy draws allowed per requested codeword.
pub const RETRY_FACTOR: usize = 64;
/// Materialized codewords (besides the reference) for algebraic codebooks.
pub const SAMPLE_CODES: usize = 64;

/// Smallest pairwise distance accepted: strictly above `m/4`.
pub fn required_distance(m: usize) -> usize {
    m / 4 + 1
}

/// `ceil(e^{m/36}) + 1`, the smallest `N` with `ln(N - 1) >= m/36`.
pub fn required_codes(m: usize) -> f64 {
    (m as f64 / 36.0).exp().ceil() + 1.0
}

/// Binary inner code of a concatenated construction over `GF(2^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerCode {
    /// `[2^k - 1, k, 2^{k-1}]`
    Simplex,
    /// `RM(1, k-1)`: `[2^{k-1}, k, 2^{k-2}]`
    ReedMuller,
}

impl InnerCode {
    pub fn length(self, bits: u32) -> usize {
        match self {
            InnerCode::Simplex => (1 << bits) - 1,
            InnerCode::ReedMuller => 1 << (bits - 1),
        }
    }

    pub fn distance(self, bits: u32) -> usize {
        match self {
            InnerCode::Simplex => 1 << (bits - 1),
            InnerCode::ReedMuller => 1 << (bits - 2),
        }
    }

    /// Whether inner coordinate `j` of the encoding of `symbol` is a one.
    fn bit(self, symbol: u16, j: usize) -> bool {
        match self {
            InnerCode::Simplex => (symbol as usize & (j + 1)).count_ones() % 2 == 1,
            InnerCode::ReedMuller => ((symbol as usize & 1) + ((symbol as usize >> 1) & j).count_ones() as usize) % 2 == 1,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            InnerCode::Simplex => "simplex",
            InnerCode::ReedMuller => "rm1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Construction {
    Greedy,
    /// Reed-Solomon over `GF(2^field_bits)` concatenated with `inner`.
    Concatenated { inner: InnerCode, field_bits: u32, outer_length: usize, outer_dimension: usize },
}

impl Construction {
    pub fn describe(&self) -> String {
        match self {
            Construction::Greedy => "greedy".into(),
            Construction::Concatenated { inner, field_bits, outer_length, outer_dimension } => {
                format!("rs_{}(k={field_bits},L={outer_length},K={outer_dimension})", inner.tag())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingCertificate {
    pub m: usize,
    pub construction: Construction,
    /// All codewords when `exhaustive`, otherwise a sample. The last entry is
    /// the reference word.
    pub codes: Vec<Vec<i8>>,
    pub exhaustive: bool,
    /// `ln N`
    pub ln_size: f64,
    /// `ln(N - 1)`
    pub log_capacity: f64,
    /// Certified minimum pairwise Hamming distance over the whole codebook.
    pub min_hamming: usize,
    /// Per coordinate, the fraction of non-reference codewords that differ
    /// from the reference there.
    pub difference_rate: Vec<f64>,
    /// Per coordinate, whether any two codewords can differ there.
    pub active: Vec<bool>,
}

impl PackingCertificate {
    pub fn reference(&self) -> usize {
        self.codes.len() - 1
    }

    /// Re-checks every invariant against the stored codes.
    pub fn verify(&self) -> Result<()> {
        if self.m < MIN_LENGTH {
            return Err(domain(format!("packing length {} below {MIN_LENGTH}", self.m)));
        }
        if let Some(bad) = self.codes.iter().position(|c| c.len() != self.m || c.iter().any(|v| v.abs() != 1)) {
            return Err(Error::Construction(format!("code {bad} is not a sign vector of length {}", self.m)));
        }
        let need = required_distance(self.m);
        if self.min_hamming < need {
            return Err(Error::Construction(format!("certified distance {} below {need}", self.min_hamming)));
        }
        for i in 0..self.codes.len() {
            for j in (i + 1)..self.codes.len() {
                let h = hamming(&self.codes[i], &self.codes[j]);
                if h < self.min_hamming {
                    return Err(Error::Construction(format!(
                        "codes {i} and {j} at distance {h} < certified {}",
                        self.min_hamming
                    )));
                }
            }
        }
        if self.exhaustive && (self.log_capacity - ((self.codes.len() - 1) as f64).ln()).abs() > 1e-12 {
            return Err(Error::Construction("capacity does not match the codebook size".into()));
        }
        if self.log_capacity < self.m as f64 / 36.0 {
            return Err(Error::Construction(format!(
                "ln(N-1) = {} below m/36 = {}",
                self.log_capacity,
                self.m as f64 / 36.0
            )));
        }
        Ok(())
    }
}

pub fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Packing of length `m` meeting both invariants, or a construction error.
pub fn generate_packing(m: usize, seed: u64) -> Result<PackingCertificate> {
    if m < MIN_LENGTH {
        return Err(domain(format!("packing length must be at least {MIN_LENGTH}, got {m}")));
    }
    let cert = if required_codes(m) <= GREEDY_MAX_CODES as f64 {
        greedy(m, seed)?
    } else {
        algebraic(m, seed)?
    };
    cert.verify()?;
    Ok(cert)
}

fn greedy(m: usize, seed: u64) -> Result<PackingCertificate> {
    let target = required_codes(m) as usize;
    let words = m.div_ceil(64);
    let tail_mask = if m % 64 == 0 { u64::MAX } else { (1u64 << (m % 64)) - 1 };
    let need = required_distance(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept: Vec<Vec<u64>> = Vec::with_capacity(target);
    let budget = RETRY_FACTOR * target;
    for _ in 0..budget {
        let mut cand: Vec<u64> = (0..words).map(|_| rng.random()).collect();
        *cand.last_mut().unwrap() &= tail_mask;
        let far = kept.iter().all(|k| {
            k.iter().zip(&cand).map(|(a, b)| (a ^ b).count_ones() as usize).sum::<usize>() >= need
        });
        if far {
            kept.push(cand);
            if kept.len() == target {
                break;
            }
        }
    }
    if kept.len() < target {
        return Err(Error::Construction(format!(
            "greedy packing kept {} of {target} codes for m = {m} within {budget} draws",
            kept.len()
        )));
    }
    let codes: Vec<Vec<i8>> = kept
        .iter()
        .map(|w| (0..m).map(|l| if (w[l / 64] >> (l % 64)) & 1 == 1 { -1 } else { 1 }).collect())
        .collect();
    let mut min_hamming = m;
    for i in 0..codes.len() {
        for j in (i + 1)..codes.len() {
            min_hamming = min_hamming.min(hamming(&codes[i], &codes[j]));
        }
    }
    let reference = &codes[codes.len() - 1];
    let others = (codes.len() - 1) as f64;
    let difference_rate = (0..m)
        .map(|l| codes[..codes.len() - 1].iter().filter(|c| c[l] != reference[l]).count() as f64 / others)
        .collect();
    let active = (0..m).map(|l| codes.iter().any(|c| c[l] != codes[0][l])).collect();
    Ok(PackingCertificate {
        m,
        construction: Construction::Greedy,
        ln_size: (codes.len() as f64).ln(),
        log_capacity: others.ln(),
        min_hamming,
        codes,
        exhaustive: true,
        difference_rate,
        active,
    })
}

/// Primitive polynomials for `GF(2^k)`, `k = 2..=12`.
const PRIMITIVE: [u32; 11] = [0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053];

pub(crate) struct Field {
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Field {
    pub(crate) fn new(bits: u32) -> Self {
        let order = (1usize << bits) - 1;
        let poly = PRIMITIVE[bits as usize - 2];
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut v: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = v as u16;
            log[v as usize] = i as u16;
            v <<= 1;
            if v & (1 << bits) != 0 {
                v ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Self { exp, log }
    }

    fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    /// The `i`-th evaluation point: `0, 1, g, g^2, ...`.
    fn point(&self, i: usize) -> u16 {
        if i == 0 {
            0
        } else {
            self.exp[i - 1]
        }
    }

    /// Multiplicative order of the generator.
    #[cfg(test)]
    pub(crate) fn generator_order(&self) -> usize {
        let order = self.log.len() - 1;
        let g = self.exp[1];
        let mut v = g;
        for i in 1..=order {
            if v == 1 {
                return i;
            }
            v = self.mul(v, g);
        }
        usize::MAX
    }
}

struct Params {
    inner: InnerCode,
    bits: u32,
    length: usize,
    dimension: usize,
}

impl Params {
    fn span(&self) -> usize {
        self.length * self.inner.length(self.bits)
    }
}

fn algebraic_params(m: usize) -> Option<Params> {
    let need = required_distance(m);
    let capacity_target = m as f64 / 36.0;
    let mut best: Option<Params> = None;
    for inner in [InnerCode::Simplex, InnerCode::ReedMuller] {
        for bits in 2..=12u32 {
            let length = (1usize << bits).min(m / inner.length(bits));
            if length == 0 {
                continue;
            }
            // largest K with (L - K + 1) d_inner >= need
            let span = need.div_ceil(inner.distance(bits));
            if span > length {
                continue;
            }
            let dimension = length + 1 - span;
            if (bits as usize * dimension) as f64 * std::f64::consts::LN_2 < capacity_target {
                continue;
            }
            let better = best
                .as_ref()
                .is_none_or(|b| bits as usize * dimension > b.bits as usize * b.dimension);
            if better {
                best = Some(Params { inner, bits, length, dimension });
            }
        }
    }
    best
}

fn encode(field: &Field, params: &Params, message: &[u16], m: usize) -> Vec<i8> {
    let inner = params.inner.length(params.bits);
    let mut out = vec![1i8; m];
    for i in 0..params.length {
        let x = field.point(i);
        let symbol = message.iter().rev().fold(0u16, |acc, &c| field.mul(acc, x) ^ c);
        for j in 0..inner {
            if params.inner.bit(symbol, j) {
                out[i * inner + j] = -1;
            }
        }
    }
    out
}

fn algebraic(m: usize, seed: u64) -> Result<PackingCertificate> {
    let params = algebraic_params(m).ok_or_else(|| {
        Error::Construction(format!("no concatenated Reed-Solomon code meets distance and capacity for m = {m}"))
    })?;
    let field = Field::new(params.bits);
    let span = params.span();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbol_max = 1u16 << params.bits;
    let mut codes = Vec::with_capacity(SAMPLE_CODES + 1);
    while codes.len() < SAMPLE_CODES {
        let message: Vec<u16> = (0..params.dimension).map(|_| rng.random_range(0..symbol_max)).collect();
        if message.iter().all(|&c| c == 0) {
            continue;
        }
        codes.push(encode(&field, &params, &message, m));
    }
    codes.push(vec![1i8; m]);
    let bits_total = params.bits as f64 * params.dimension as f64;
    let ln_size = bits_total * std::f64::consts::LN_2;
    // ln(2^b - 1) = b ln 2 + ln(1 - 2^{-b})
    let log_capacity = ln_size + (-(2f64.powf(-bits_total))).ln_1p();
    // each non-padding coordinate is a nonzero linear functional of the
    // message, hence equals 1 on exactly half of the N codewords
    let half_rate = 0.5 / (1.0 - 2f64.powf(-bits_total));
    let difference_rate = (0..m).map(|l| if l < span { half_rate } else { 0.0 }).collect();
    let active = (0..m).map(|l| l < span).collect();
    let min_hamming = (params.length - params.dimension + 1) * params.inner.distance(params.bits);
    Ok(PackingCertificate {
        m,
        construction: Construction::Concatenated {
            inner: params.inner,
            field_bits: params.bits,
            outer_length: params.length,
            outer_dimension: params.dimension,
        },
        codes,
        exhaustive: false,
        ln_size,
        log_capacity,
        min_hamming,
        difference_rate,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_primitive() {
        for bits in 2..=12 {
            let f = Field::new(bits);
            assert_eq!(f.generator_order(), (1 << bits) - 1, "k = {bits}");
        }
    }

    #[test]
    fn length_36() {
        let cert = generate_packing(36, 1).unwrap();
        assert!(cert.codes.len() >= 4);
        assert!(cert.min_hamming >= 9);
        assert!(cert.exhaustive);
        for i in 0..cert.codes.len() {
            for j in (i + 1)..cert.codes.len() {
                assert!(hamming(&cert.codes[i], &cert.codes[j]) >= 9);
            }
        }
    }

    #[test]
    fn short_length_rejected() {
        assert!(matches!(generate_packing(27, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn tampering_is_detected() {
        let mut cert = generate_packing(40, 3).unwrap();
        cert.codes[1] = cert.codes[0].clone();
        cert.codes[1][0] = -cert.codes[1][0];
        assert!(cert.verify().is_err());
    }

    #[test]
    fn algebraic_code_distance_on_sample() {
        for m in [400, 1000, 3651] {
            let cert = generate_packing(m, 7).unwrap();
            assert!(!cert.exhaustive);
            assert!(cert.log_capacity >= m as f64 / 36.0);
            assert!(cert.min_hamming >= required_distance(m));
            let measured = (0..cert.codes.len())
                .flat_map(|i| ((i + 1)..cert.codes.len()).map(move |j| (i, j)))
                .map(|(i, j)| hamming(&cert.codes[i], &cert.codes[j]))
                .min()
                .unwrap();
            assert!(measured >= cert.min_hamming);
        }
    }

    #[test]
    fn simplex_codewords_have_exact_weight() {
        // single outer symbol: every nonzero word has weight 2^{k-1}
        let params = Params { inner: InnerCode::Simplex, bits: 4, length: 1, dimension: 1 };
        let field = Field::new(4);
        for v in 1..16u16 {
            let word = encode(&field, &params, &[v], 15);
            assert_eq!(word.iter().filter(|&&s| s == -1).count(), 8);
        }
    }

    #[test]
    fn balanced_coordinates_exhaustively() {
        // small code: enumerate all messages and check the claimed balance
        let params = Params { inner: InnerCode::Simplex, bits: 2, length: 4, dimension: 2 };
        let field = Field::new(2);
        let mut ones = vec![0usize; 12];
        for a in 0..4u16 {
            for b in 0..4u16 {
                let w = encode(&field, &params, &[a, b], 12);
                for (l, s) in w.iter().enumerate() {
                    ones[l] += (*s == -1) as usize;
                }
            }
        }
        assert!(ones.iter().all(|&c| c == 8));
    }

    #[test]
    fn reed_muller_inner_weights() {
        // RM(1, 3): the all-ones word for symbol 1, weight 4 for every other nonzero symbol
        let params = Params { inner: InnerCode::ReedMuller, bits: 4, length: 1, dimension: 1 };
        let field = Field::new(4);
        for v in 1..16u16 {
            let weight = encode(&field, &params, &[v], 8).iter().filter(|&&s| s == -1).count();
            assert_eq!(weight, if v == 1 { 8 } else { 4 }, "symbol {v}");
        }
    }

    #[test]
    fn reed_muller_code_exhaustive() {
        // GF(8), L = 8, K = 2: 64 words of length 32, certified distance (8 - 2 + 1) * 2 = 14
        let params = Params { inner: InnerCode::ReedMuller, bits: 3, length: 8, dimension: 2 };
        let field = Field::new(3);
        let words: Vec<Vec<i8>> =
            (0..64u16).map(|v| encode(&field, &params, &[v & 7, v >> 3], 32)).collect();
        let mut min = usize::MAX;
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                min = min.min(hamming(&words[i], &words[j]));
            }
        }
        assert!(min >= 14, "measured {min}");
        for l in 0..32 {
            assert_eq!(words.iter().filter(|w| w[l] == -1).count(), 32, "coordinate {l}");
        }
    }

    #[test]
    fn long_lengths_switch_to_reed_muller() {
        let cert = generate_packing(9216, 2).unwrap();
        assert_eq!(
            cert.construction,
            Construction::Concatenated { inner: InnerCode::ReedMuller, field_bits: 7, outer_length: 128, outer_dimension: 56 }
        );
        assert_eq!(cert.min_hamming, 73 * 32);
        assert!(cert.min_hamming > 9216 / 4);
        assert!(cert.log_capacity >= 256.0);
        assert!(generate_packing(12000, 2).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(generate_packing(60, 5).unwrap(), generate_packing(60, 5).unwrap());
        assert_eq!(generate_packing(2000, 5).unwrap(), generate_packing(2000, 5).unwrap());
    }
}
