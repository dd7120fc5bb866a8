use proptest::prelude::*;

use specreg::filters::FilterFamily;
use specreg::lowerbound::packing::{generate_packing, hamming, required_distance};
use specreg::rates::Summary;
use specreg::spectrum::SpectrumProfile;

fn families() -> Vec<FilterFamily> {
    vec![
        FilterFamily::tikhonov(),
        FilterFamily::spectral_cutoff(),
        FilterFamily::landweber(1.0).unwrap(),
        FilterFamily::landweber(0.5).unwrap(),
        FilterFamily::iterated_tikhonov(3).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_is_a_left_bound(b in 1.0f64..4.0, p in 10usize..300, r in 0.1f64..1.5, log_u in -12.0f64..0.0) {
        let prof = SpectrumProfile::polynomial(b, p).unwrap();
        let u = 10f64.powf(log_u);
        let t = prof.gee_inverse(u, r).unwrap();
        let g = prof.gee(t, r).unwrap().finite().unwrap();
        prop_assert!(g <= u * (1.0 + 1e-12));
        // any larger t in the same count cell overshoots: probe just above
        let above = prof.gee(t * (1.0 + 1e-9), r).unwrap();
        prop_assert!(above.finite().is_none_or(|v| v > u));
    }

    #[test]
    fn count_is_monotone(b in 1.0f64..3.0, p in 1usize..200, t1 in 1e-6f64..1.0, t2 in 1e-6f64..1.0) {
        let prof = SpectrumProfile::polynomial(b, p).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(prof.count(lo).unwrap() >= prof.count(hi).unwrap());
    }

    #[test]
    fn effective_dimension_between_bounds(b in 1.0f64..3.0, p in 1usize..200, log_lam in -6.0f64..1.0) {
        let prof = SpectrumProfile::polynomial(b, p).unwrap();
        let lam = 10f64.powf(log_lam);
        let n = prof.effective_dimension(lam).unwrap();
        prop_assert!(n > 0.0 && n <= p as f64);
        // every mu_j >= lambda contributes at least 1/2
        prop_assert!(n >= prof.count(lam).unwrap() as f64 / 2.0);
    }

    #[test]
    fn filter_bounds_hold_pointwise(log_lam in -6.0f64..0.0, log_t in -8.0f64..0.0) {
        let (lam, t) = (10f64.powf(log_lam), 10f64.powf(log_t));
        for f in families() {
            let c = f.constants();
            let g = f.g(lam, t);
            let r = f.r(lam, t);
            prop_assert!((t * g).abs() <= c.d + 1e-12, "{:?}", f.kind());
            prop_assert!(lam * g.abs() <= c.e + 1e-12, "{:?}", f.kind());
            prop_assert!(r.abs() <= c.gamma0 + 1e-12, "{:?}", f.kind());
            prop_assert!((r - (1.0 - t * g)).abs() <= 1e-12);
        }
    }

    #[test]
    fn summary_is_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let s = Summary::of(&values);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(min <= s.q10 && s.q10 <= s.median && s.median <= s.q90 && s.q90 <= max);
        prop_assert!(min <= s.mean && s.mean <= max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn packings_meet_distance(m in 28usize..120, seed in any::<u64>()) {
        let cert = generate_packing(m, seed).unwrap();
        let need = required_distance(m);
        for i in 0..cert.codes.len() {
            for j in (i + 1)..cert.codes.len() {
                prop_assert!(hamming(&cert.codes[i], &cert.codes[j]) >= need);
            }
        }
        prop_assert!(cert.log_capacity >= m as f64 / 36.0);
    }
}
