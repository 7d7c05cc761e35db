//! Property tests for the measure and diagnostics invariants.

use pplab::diagnostics::IntervalRing;
use pplab::geom::BoxRegion;
use pplab::measure::{ball_measure, invert_ball_measure, DensityKind, DensityModel};
use proptest::prelude::*;

fn linear_density() -> DensityModel {
    DensityModel::new(
        DensityKind::Linear { a: 2.0, b: 1.0 },
        BoxRegion::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_measure_monotone_in_radius(
        cx in -0.5f64..0.5,
        cy in -0.5f64..0.5,
        r1 in 0.01f64..0.4,
        r2 in 0.01f64..0.4,
    ) {
        let density = linear_density();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let m_lo = ball_measure(&density, &[cx, cy], lo).unwrap();
        let m_hi = ball_measure(&density, &[cx, cy], hi).unwrap();
        prop_assert!(m_lo <= m_hi + 1e-12);
        if hi - lo > 1e-6 {
            prop_assert!(m_lo < m_hi);
        }
    }

    #[test]
    fn inversion_round_trip(
        cx in -0.4f64..0.4,
        cy in -0.4f64..0.4,
        r in 0.01f64..0.5,
    ) {
        let density = linear_density();
        let center = [cx, cy];
        let reach = density.support().boundary_distance(&center);
        let r = r.min(reach * 0.95);
        let mass = ball_measure(&density, &center, r).unwrap();
        let back = invert_ball_measure(&density, &center, mass).unwrap();
        prop_assert!((back - r).abs() <= 1e-9, "r={r}, back={back}");
    }

    #[test]
    fn ring_canonical_form_is_disjoint_and_sorted(
        raw in proptest::collection::vec((-10.0f64..10.0, 0.01f64..5.0), 1..8)
    ) {
        let intervals: Vec<(f64, f64)> = raw.into_iter().map(|(a, len)| (a, a + len)).collect();
        let ring = IntervalRing::new(intervals).unwrap();
        let ivs = ring.intervals();
        for w in ivs.windows(2) {
            prop_assert!(w[0].1 <= w[1].0, "overlap after canonicalization: {ivs:?}");
        }
        for &(a, b) in ivs {
            prop_assert!(a < b);
        }
    }

    #[test]
    fn ring_mass_additive_under_union(
        a1 in -5.0f64..0.0,
        len1 in 0.1f64..2.0,
        gap in 0.1f64..2.0,
        len2 in 0.1f64..2.0,
    ) {
        use pplab::diagnostics::MeasureDescriptor;
        let b1 = a1 + len1;
        let a2 = b1 + gap;
        let b2 = a2 + len2;
        let separate = IntervalRing::new(vec![(a1, b1), (a2, b2)]).unwrap();
        let first = IntervalRing::new(vec![(a1, b1)]).unwrap();
        let second = IntervalRing::new(vec![(a2, b2)]).unwrap();
        for descriptor in [
            MeasureDescriptor::LebesgueHalfline,
            MeasureDescriptor::ExpTail,
            MeasureDescriptor::PowerLaw { mu_w: 1.5, exponent: 2 },
        ] {
            let total = descriptor.ring_mass(&separate);
            let split = descriptor.ring_mass(&first) + descriptor.ring_mass(&second);
            prop_assert!((total - split).abs() <= 1e-12 * total.abs().max(1.0));
        }
    }
}
