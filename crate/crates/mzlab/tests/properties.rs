//! Property tests for the structural invariants: transform unitarity,
//! norm monotonicity, multiplier composition, partition telescoping over
//! random lacunary sequences, index-map growth, and exponent-range
//! monotonicity.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use mzlab::grid::{
    apply_multiplier, forward_transform, inverse_transform, l2_norm, lp_norm,
    synthesize_bandlimited, DomainTag, Grid, GridField, RadialAnnulus,
};
use mzlab::harness::{alpha_range, Clause, TheoremId, TheoremParams};
use mzlab::kernels::{default_delta_probes, delta_gamma_norm, RadialWeight};
use mzlab::littlewood_paley::{
    build_partition, EtaProfile, FrameFlavor, LacunarySequence, TLParams,
};

fn test_grid() -> Grid {
    Grid::new(64, PI).unwrap()
}

fn random_field(seed: u64) -> GridField {
    let ann = RadialAnnulus::new(2.0, 14.0).unwrap();
    synthesize_bandlimited(seed, &ann, test_grid()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn plancherel_and_round_trip(seed in 0u64..10_000) {
        let f = random_field(seed);
        let hat = forward_transform(&f).unwrap();
        let a = l2_norm(&f);
        let b = l2_norm(&hat);
        prop_assert!((a - b).abs() <= 1e-12 * a);
        let back = inverse_transform(&hat).unwrap();
        let diff: f64 = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff <= 1e-12 * a);
    }

    #[test]
    fn lp_norm_monotone_in_pointwise_modulus(seed in 0u64..10_000, p in 1.1f64..6.0) {
        let f = random_field(seed);
        // |g| >= |f| pointwise by construction
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15);
        let g = GridField::from_values(
            f.grid(),
            DomainTag::Spatial,
            f.values()
                .iter()
                .map(|v| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    let bump = 1.0 + (state >> 40) as f64 / (1u64 << 24) as f64;
                    v * bump
                })
                .collect(),
        )
        .unwrap();
        let nf = lp_norm(&f, p).unwrap();
        let ng = lp_norm(&g, p).unwrap();
        prop_assert!(nf <= ng * (1.0 + 1e-12));
    }

    #[test]
    fn multiplier_composition_commutes(seed in 0u64..10_000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = random_field(seed);
        let s1 = move |kx: f64, ky: f64| Complex64::new((a * kx * 0.1).cos(), (ky * 0.07).sin());
        let s2 = move |kx: f64, ky: f64| Complex64::new(0.4, b * 0.01 * (kx - ky));
        let lhs = apply_multiplier(&apply_multiplier(&f, s1).unwrap(), s2).unwrap();
        let rhs = apply_multiplier(&f, |kx, ky| s1(kx, ky) * s2(kx, ky)).unwrap();
        let diff: f64 = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff < 1e-11);
    }

    #[test]
    fn partition_telescopes_for_random_sequences(
        ratios in proptest::collection::vec(1.15f64..4.0, 6..10),
        order in 1u32..4,
    ) {
        let a = ratios.iter().fold(f64::INFINITY, |m, &r| m.min(r));
        let mut values = vec![0.5f64];
        for r in &ratios {
            values.push(values.last().unwrap() * r);
        }
        let seq = LacunarySequence::from_values("random", values, 0, a, None).unwrap();
        let eta = EtaProfile::new(a, order).unwrap();
        let frame = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        let (clo, chi) = frame.covered_band();
        let (k0, k1) = frame.piece_range();
        for i in 0..160 {
            let r = clo * (chi / clo).powf(i as f64 / 159.0);
            let mut sum = 0.0;
            for k in k0..=k1 {
                sum += frame.piece(k, r).unwrap();
            }
            prop_assert!((sum - 1.0).abs() < 1e-10, "r = {r}, sum = {sum}");
            for k in k0..=(k1 - 2) {
                prop_assert!(frame.piece(k, r).unwrap() * frame.piece(k + 2, r).unwrap() == 0.0);
            }
        }
    }

    #[test]
    fn index_map_growth(ratios in proptest::collection::vec(1.3f64..3.5, 5..9)) {
        let a = ratios.iter().fold(f64::INFINITY, |m, &r| m.min(r));
        let c0 = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
        let mut values = vec![1.0f64];
        for r in &ratios {
            values.push(values.last().unwrap() * r);
        }
        let seq = LacunarySequence::from_values("random", values, 0, a, Some(c0)).unwrap();
        let m = seq.index_map();
        let bound = 1.0 + c0.ln() / a.ln();
        for w in m.windows(2) {
            prop_assert!(w[1] >= w[0] + 1);
            prop_assert!((w[1] - w[0]) as f64 <= bound + 1e-9);
        }
    }

    #[test]
    fn tl_norm_scalar_homogeneity(seed in 0u64..10_000, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 0.01);
        let f = random_field(seed);
        let c = Complex64::new(re, im);
        let cf = GridField::from_values(
            f.grid(),
            DomainTag::Spatial,
            f.values().iter().map(|v| v * c).collect(),
        )
        .unwrap();
        let frame = build_partition(
            LacunarySequence::dyadic(-2, 6).unwrap(),
            EtaProfile::new(2.0, 1).unwrap(),
            FrameFlavor::Adapted,
        )
        .unwrap();
        let params = TLParams::new(0.4, 2.0, 3.0).unwrap();
        let a = mzlab::littlewood_paley::tl_norm(&f, &params, &frame).unwrap();
        let b = mzlab::littlewood_paley::tl_norm(&cf, &params, &frame).unwrap();
        prop_assert!((b - c.norm() * a).abs() <= 1e-10 * b.max(1e-12));
    }

    #[test]
    fn delta_gamma_nesting(gamma_lo in 1.0f64..3.0, bump in 1.05f64..2.0, cutoff in 0.2f64..4.0) {
        // Delta_beta inside Delta_alpha for alpha < beta: the norm grows
        // with gamma
        let probes = default_delta_probes();
        let b = RadialWeight::step(cutoff);
        let lo = delta_gamma_norm(&b, gamma_lo, &probes).unwrap().value();
        let hi = delta_gamma_norm(&b, gamma_lo * bump, &probes).unwrap().value();
        prop_assert!(hi >= lo * (1.0 - 1e-9));
    }

    #[test]
    fn alpha_range_antitone_in_exponents(p in 1.2f64..8.0, widen in 1.05f64..3.0) {
        let mk = |p: f64| TheoremParams {
            theorem: TheoremId::T11,
            clause: Clause::I,
            p,
            q: 2.0,
            gamma: None,
            beta: None,
            rho: 1.0,
            c1: 1.0,
            log2_c0: 1.0,
        };
        let base = alpha_range(&mk(p)).unwrap().hi;
        // widening p-tilde shrinks the interval
        let pt = p.max(p / (p - 1.0));
        let wider = pt * widen; // > 2, so tilde(wider) = wider
        let shrunk = alpha_range(&mk(wider)).unwrap().hi;
        prop_assert!(shrunk <= base * (1.0 + 1e-12));
    }
}
