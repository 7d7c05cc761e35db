//! Cross-validation of the cap-coverage geometry against the independent
//! half-plane clipping and direction-sweep oracles.

use pplab::process::PointConfig;
use pplab::rng::StreamSeed;
use pplab::voronoi::{
    boundedness, cell_contained_in_ball, circumradius, inradius, Boundedness, Circumradius,
};
use rand::Rng;

fn random_cloud(rng: &mut impl Rng, n: usize, spread: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(-spread..spread),
                rng.random_range(-spread..spread),
            ]
        })
        .collect()
}

fn to_config(points: &[[f64; 2]]) -> PointConfig {
    let coords: Vec<f64> = points.iter().flatten().copied().collect();
    PointConfig::manual(2, coords).unwrap()
}

#[test]
fn circumradius_and_inradius_match_clipping_oracle() {
    let mut rng = StreamSeed::new(2024, 0).rng();
    let mut bounded_checked = 0usize;
    while bounded_checked < 300 {
        let n = rng.random_range(4..12);
        let cloud = random_cloud(&mut rng, n, 1.5);
        let x = [0.0, 0.0];
        let cell = pplab_oracles::clipped_cell(x, &cloud, 1e3);
        let config = to_config(&cloud);
        let oracle_bounded = cell.is_bounded();
        let ours = circumradius(&x, &config).unwrap();
        match (oracle_bounded, ours) {
            // near-degenerate hulls give bounded cells larger than the
            // oracle's clip square; skip those, the oracle cannot see them
            (_, Circumradius::Bounded(r)) if r >= 100.0 => {}
            (true, Circumradius::Bounded(r)) => {
                let oracle_r = cell.circumradius();
                // vertices far from the nucleus lose absolute precision in
                // the oracle's intersection arithmetic; scale its tolerance
                let tol = if r <= 10.0 { 1e-9 } else { 1e-9 * (r / 10.0).powi(2) };
                assert!(
                    (r - oracle_r).abs() <= tol,
                    "C mismatch: caps {r} vs clip {oracle_r} on {cloud:?}"
                );
                let our_inr = inradius(&x, &config).unwrap();
                let oracle_inr = cell.inradius();
                assert!(
                    (our_inr - oracle_inr).abs() <= 1e-9,
                    "inradius mismatch: {our_inr} vs {oracle_inr}"
                );
                assert!(our_inr <= r + 1e-9, "inradius exceeds circumradius");
                if r <= 10.0 {
                    bounded_checked += 1;
                }
            }
            (false, Circumradius::Unbounded) => {}
            (ob, ours) => panic!("boundedness mismatch: oracle {ob}, ours {ours:?} on {cloud:?}"),
        }
    }
}

#[test]
fn boundedness_matches_oracle_on_many_configs() {
    let mut rng = StreamSeed::new(77, 0).rng();
    for _ in 0..2000 {
        let n = rng.random_range(3..9);
        let cloud = random_cloud(&mut rng, n, 1.2);
        let x = [0.0, 0.0];
        let oracle = pplab_oracles::clipped_cell(x, &cloud, 1e3).is_bounded();
        let config = to_config(&cloud);
        let ours = matches!(boundedness(&x, &config).unwrap(), Boundedness::Bounded);
        if ours && !oracle {
            // bounded but larger than the oracle's clip square: verify via
            // the circumradius instead of calling it a mismatch
            if let Circumradius::Bounded(r) = circumradius(&x, &config).unwrap() {
                assert!(r >= 100.0, "oracle missed a small bounded cell: {cloud:?}");
                continue;
            }
        }
        assert_eq!(ours, oracle, "boundedness mismatch on {cloud:?}");
    }
}

#[test]
fn coverage_matches_direction_sweep() {
    let mut rng = StreamSeed::new(99, 0).rng();
    for _ in 0..150 {
        let n = rng.random_range(3..10);
        let cloud = random_cloud(&mut rng, n, 1.3);
        let x = [0.0, 0.0];
        let config = to_config(&cloud);
        for r in [0.4, 0.8, 1.3, 2.0] {
            let ours = cell_contained_in_ball(&x, &config, r).unwrap();
            let sweep = pplab_oracles::coverage_sweep(x, &cloud, r, 1_000_000);
            // the finite fan can only misjudge hairline margins; tolerate
            // disagreement only when the radius sits within the sweep's
            // angular resolution of the true circumradius
            if ours != sweep {
                let c = match circumradius(&x, &config).unwrap() {
                    Circumradius::Bounded(c) => c,
                    Circumradius::Unbounded => f64::INFINITY,
                };
                assert!(
                    (r - c).abs() < 1e-4,
                    "coverage mismatch at r={r}, C={c}, cloud {cloud:?}"
                );
            }
        }
    }
}

#[test]
fn bounded_center_makes_all_neighbors_unbounded() {
    // configurations of d+2 = 4 points: when the center cell is bounded,
    // every neighbor's cell in the same configuration is unbounded
    let mut rng = StreamSeed::new(31, 0).rng();
    let mut seen_bounded = 0usize;
    for _ in 0..3000 {
        let cloud = random_cloud(&mut rng, 3, 1.4);
        let x = [0.0, 0.0];
        let config = to_config(&cloud);
        if !matches!(boundedness(&x, &config).unwrap(), Boundedness::Bounded) {
            continue;
        }
        seen_bounded += 1;
        for i in 0..3 {
            let mut rest: Vec<[f64; 2]> = vec![x];
            for (j, p) in cloud.iter().enumerate() {
                if j != i {
                    rest.push(*p);
                }
            }
            let neighbor_config = to_config(&rest);
            assert!(
                !matches!(
                    boundedness(&cloud[i], &neighbor_config).unwrap(),
                    Boundedness::Bounded
                ),
                "neighbor {i} of a bounded center is bounded: {cloud:?}"
            );
        }
    }
    assert!(seen_bounded > 100, "too few bounded configurations sampled");
}

#[test]
fn quadrature_matches_midpoint_oracle() {
    use pplab::geom::BoxRegion;
    use pplab::measure::{ball_measure, ball_measure_quadrature, DensityKind, DensityModel};

    let density = DensityModel::new(
        DensityKind::Linear { a: 1.0, b: 1.0 },
        BoxRegion::new(vec![-0.4, -0.4], vec![0.4, 0.4]).unwrap(),
    )
    .unwrap();
    let f = |y: &[f64]| density.evaluate(y);
    for (center, radius) in [([0.0, 0.0], 0.1), ([0.1, -0.05], 0.2), ([-0.2, 0.1], 0.15)] {
        let oracle = pplab_oracles::ball_mass_midpoint(&f, center, radius, 2048);
        let closed = ball_measure(&density, &center, radius).unwrap();
        let quad = ball_measure_quadrature(&density, &center, radius).unwrap();
        assert!((closed - oracle).abs() <= 1e-8 * oracle.abs().max(1.0));
        assert!((quad - oracle).abs() <= 1e-7 * oracle.abs().max(1.0));
    }

    // step density on the line against the interval midpoint oracle
    use pplab::measure::StepDensity;
    let step = DensityModel::new(
        DensityKind::Step(StepDensity::new(vec![vec![-1.0, 0.2, 1.0]], vec![1.0, 2.0]).unwrap()),
        BoxRegion::new(vec![-1.0], vec![1.0]).unwrap(),
    )
    .unwrap();
    let g = |y: &[f64]| step.evaluate(y);
    let oracle = pplab_oracles::interval_mass_midpoint(&g, -0.1, 0.5, 1_200_000);
    let closed = ball_measure(&step, &[0.2], 0.3).unwrap();
    assert!(
        (closed - oracle).abs() <= 1e-6,
        "step mass {closed} vs oracle {oracle}"
    );
}
