//! Inradius and circumscribed radius of Voronoi cells via spherical-cap
//! coverage, plus Monte Carlo estimation of the cap-coverage probability
//! p_k and the constant alpha_2 built from it.
//!
//! The cell of nucleus x lies inside B(x, R) exactly when the caps
//! `A_j(R) = {u : <u, (x_j - x)/|x_j - x|> >= |x_j - x| / (2R)}` over the
//! neighbors within distance 2R cover the unit sphere of directions. On
//! the line the caps are the two signs; in the plane they are arcs and a
//! sorted sweep decides coverage.

use crate::error::{Error, Result};
use crate::geom::distance;
use crate::process::PointConfig;
use crate::rng::StreamSeed;
use rand::Rng;

/// Gap slack for the circular sweep; resolves exact-touching arcs that
/// differ by floating-point noise. Far below any meaningful arc width.
const ARC_EPS: f64 = 1e-12;

/// Tolerance for declaring a nucleus degenerately on its hull boundary.
const HULL_EPS: f64 = 1e-12;

/// Spherical caps induced by the neighbors of a nucleus at radius R.
#[derive(Debug, Clone)]
pub enum CapSet {
    /// d = 1: each neighbor within 2R covers one of the two directions.
    Line { left: bool, right: bool },
    /// d = 2: arcs (center angle, half width), half widths in [0, pi/2].
    Circle { arcs: Vec<(f64, f64)> },
}

impl CapSet {
    /// Builds the cap set of `x` at radius `R` from the neighbors
    /// (points different from x) in `neighbors`.
    pub fn from_neighbors<'a>(
        x: &[f64],
        neighbors: impl Iterator<Item = &'a [f64]>,
        radius: f64,
    ) -> Result<Self> {
        match x.len() {
            1 => {
                let (mut left, mut right) = (false, false);
                for p in neighbors {
                    let delta = p[0] - x[0];
                    if delta == 0.0 || delta.abs() > 2.0 * radius {
                        continue;
                    }
                    if delta > 0.0 {
                        right = true;
                    } else {
                        left = true;
                    }
                }
                Ok(CapSet::Line { left, right })
            }
            2 => {
                let mut arcs = Vec::new();
                for p in neighbors {
                    let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
                    let dist = (dx * dx + dy * dy).sqrt();
                    if dist == 0.0 || dist > 2.0 * radius {
                        continue;
                    }
                    let theta = dy.atan2(dx);
                    let half_width = (dist / (2.0 * radius)).clamp(-1.0, 1.0).acos();
                    arcs.push((theta, half_width));
                }
                Ok(CapSet::Circle { arcs })
            }
            d => Err(Error::UnsupportedDimension {
                dim: d,
                op: "cap coverage",
            }),
        }
    }

    /// Whether the caps cover the whole sphere of directions.
    pub fn covers_sphere(&self) -> bool {
        match self {
            CapSet::Line { left, right } => *left && *right,
            CapSet::Circle { arcs } => arcs_cover_circle(arcs),
        }
    }
}

/// Circular coverage by closed arcs: cut the circle at angle 0, split
/// arcs that straddle the cut, and run linear interval covering of
/// [0, 2pi].
pub(crate) fn arcs_cover_circle(arcs: &[(f64, f64)]) -> bool {
    if arcs.is_empty() {
        return false;
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(arcs.len() + 4);
    for &(theta, half) in arcs {
        if half >= std::f64::consts::PI {
            return true;
        }
        let mut start = (theta - half) % tau;
        if start < 0.0 {
            start += tau;
        }
        let end = start + 2.0 * half;
        if end > tau {
            pieces.push((start, tau));
            pieces.push((0.0, end - tau));
        } else {
            pieces.push((start, end));
        }
    }
    pieces.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut reach = 0.0f64;
    for &(s, e) in &pieces {
        if s > reach + ARC_EPS {
            return false;
        }
        reach = reach.max(e);
        if reach >= tau - ARC_EPS {
            return true;
        }
    }
    false
}

fn neighbors_of<'a>(x: &'a [f64], config: &'a PointConfig) -> impl Iterator<Item = &'a [f64]> {
    config.iter_points().filter(move |p| *p != x)
}

/// Half the nearest-neighbor distance: the inradius of the cell of `x` in
/// the tessellation generated by `config + delta_x`.
pub fn inradius(x: &[f64], config: &PointConfig) -> Result<f64> {
    let best = neighbors_of(x, config)
        .map(|p| distance(p, x))
        .fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        Ok(0.5 * best)
    } else {
        Err(Error::EmptyNeighborhood)
    }
}

/// Whether the cell of `x` lies inside B(x, R).
pub fn cell_contained_in_ball(x: &[f64], config: &PointConfig, radius: f64) -> Result<bool> {
    Ok(CapSet::from_neighbors(x, neighbors_of(x, config), radius)?.covers_sphere())
}

/// Position of a nucleus relative to the convex hull of its neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    /// Within tolerance of the hull boundary; treated as unbounded.
    Degenerate,
    Unbounded,
}

/// Classifies the cell of `x`: bounded iff x lies in the interior of the
/// convex hull of its neighbors, i.e. the open half-spheres of neighbor
/// directions cover the direction sphere.
pub fn boundedness(x: &[f64], config: &PointConfig) -> Result<Boundedness> {
    match x.len() {
        1 => {
            let (mut left, mut right) = (false, false);
            for p in neighbors_of(x, config) {
                if p[0] > x[0] {
                    right = true;
                } else if p[0] < x[0] {
                    left = true;
                }
            }
            Ok(if left && right {
                Boundedness::Bounded
            } else {
                Boundedness::Unbounded
            })
        }
        2 => {
            let mut angles: Vec<f64> = neighbors_of(x, config)
                .map(|p| (p[1] - x[1]).atan2(p[0] - x[0]))
                .collect();
            if angles.len() < 3 {
                return Ok(Boundedness::Unbounded);
            }
            angles.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let tau = 2.0 * std::f64::consts::PI;
            let mut max_gap = angles[0] + tau - angles[angles.len() - 1];
            for w in angles.windows(2) {
                max_gap = max_gap.max(w[1] - w[0]);
            }
            let pi = std::f64::consts::PI;
            Ok(if (max_gap - pi).abs() <= HULL_EPS {
                Boundedness::Degenerate
            } else if max_gap < pi {
                Boundedness::Bounded
            } else {
                Boundedness::Unbounded
            })
        }
        d => Err(Error::UnsupportedDimension {
            dim: d,
            op: "boundedness",
        }),
    }
}

pub fn is_cell_bounded(x: &[f64], config: &PointConfig) -> Result<bool> {
    Ok(matches!(boundedness(x, config)?, Boundedness::Bounded))
}

/// Circumscribed radius of the cell of `x`, or `Unbounded`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Circumradius {
    Bounded(f64),
    Unbounded,
}

/// Absolute bisection tolerance for the circumscribed radius.
pub const CIRCUMRADIUS_TOL: f64 = 1e-10;

pub fn circumradius(x: &[f64], config: &PointConfig) -> Result<Circumradius> {
    if !matches!(boundedness(x, config)?, Boundedness::Bounded) {
        return Ok(Circumradius::Unbounded);
    }
    let mut lo = inradius(x, config)?;
    // max neighbor distance is a natural first guess but not an upper
    // bound (thin cells exceed it); double until the coverage test holds
    let mut hi = neighbors_of(x, config)
        .map(|p| distance(p, x))
        .fold(0.0, f64::max);
    let mut guard = 0;
    while !cell_contained_in_ball(x, config, hi)? {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 2048 {
            return Ok(Circumradius::Unbounded);
        }
    }
    while hi - lo > CIRCUMRADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if cell_contained_in_ball(x, config, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Circumradius::Bounded(0.5 * (lo + hi)))
}

/// Monte Carlo estimate of the cap-coverage probability
/// `p_k = P(N(0, sum delta_Yj) inside B(0,1))` with Y_j uniform in B(0,2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PkEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

pub fn estimate_p_k(dim: usize, k: usize, samples: u64, seed: StreamSeed) -> Result<PkEstimate> {
    if dim != 1 && dim != 2 {
        return Err(Error::UnsupportedDimension {
            dim,
            op: "p_k estimation",
        });
    }
    if k < dim + 1 {
        return Err(Error::InvalidModel(format!(
            "p_k needs k >= d+1, got k={k} in dimension {dim}"
        )));
    }
    let mut rng = seed.rng();
    let mut hits = 0u64;
    let mut pts = vec![0.0f64; 2 * k];
    for _ in 0..samples {
        sample_uniform_ball2(dim, k, &mut rng, &mut pts);
        if caps_cover_unit(dim, k, &pts) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(PkEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Per-sample coverage indicators for k and k+1 points drawn nested, used
/// to exercise the monotone coupling of p_k in k.
pub fn p_k_nested_indicators(
    dim: usize,
    k_max: usize,
    samples: u64,
    seed: StreamSeed,
) -> Result<Vec<Vec<bool>>> {
    if dim != 1 && dim != 2 {
        return Err(Error::UnsupportedDimension {
            dim,
            op: "p_k estimation",
        });
    }
    let mut rng = seed.rng();
    let mut out = vec![Vec::with_capacity(samples as usize); k_max + 1 - (dim + 1)];
    let mut pts = vec![0.0f64; 2 * k_max];
    for _ in 0..samples {
        sample_uniform_ball2(dim, k_max, &mut rng, &mut pts);
        for k in (dim + 1)..=k_max {
            out[k - dim - 1].push(caps_cover_unit(dim, k, &pts));
        }
    }
    Ok(out)
}

fn sample_uniform_ball2(dim: usize, k: usize, rng: &mut impl Rng, pts: &mut [f64]) {
    match dim {
        1 => {
            for j in 0..k {
                pts[j] = rng.random_range(-2.0..2.0);
            }
        }
        2 => {
            for j in 0..k {
                let r = 2.0 * rng.random::<f64>().sqrt();
                let theta = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                pts[2 * j] = r * theta.cos();
                pts[2 * j + 1] = r * theta.sin();
            }
        }
        _ => unreachable!(),
    }
}

fn caps_cover_unit(dim: usize, k: usize, pts: &[f64]) -> bool {
    match dim {
        1 => {
            let (mut left, mut right) = (false, false);
            for &p in pts.iter().take(k) {
                // B(0,2) means every |p| <= 2 = 2R with R = 1
                if p > 0.0 {
                    right = true;
                } else if p < 0.0 {
                    left = true;
                }
            }
            left && right
        }
        2 => {
            let mut arcs = Vec::with_capacity(k);
            for j in 0..k {
                let (px, py) = (pts[2 * j], pts[2 * j + 1]);
                let dist = (px * px + py * py).sqrt();
                if dist == 0.0 || dist > 2.0 {
                    continue;
                }
                let half = (dist / 2.0).clamp(-1.0, 1.0).acos();
                arcs.push((py.atan2(px), half));
            }
            arcs_cover_circle(&arcs)
        }
        _ => unreachable!(),
    }
}

/// `alpha_2 = (2^(d(d+1)) / (d+1)! * p)^(1/(d+1))`.
pub fn alpha2(dim: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ProbabilityDomain { p });
    }
    let d = dim as i32;
    let factorial: f64 = (1..=(dim + 1)).map(|i| i as f64).product();
    Ok((f64::powi(2.0, d * (d + 1)) / factorial * p).powf(1.0 / (d + 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn manual_config(dim: usize, coords: Vec<f64>) -> PointConfig {
        PointConfig::manual(dim, coords).unwrap()
    }

    #[test]
    fn inradius_is_half_nearest_distance() {
        let c = manual_config(2, vec![2.0, 0.0]);
        assert_relative_eq!(inradius(&[0.0, 0.0], &c).unwrap(), 1.0);
        let c = manual_config(2, vec![2.0, 0.0, -3.0, 0.0, 0.0, 5.0]);
        assert_relative_eq!(inradius(&[0.0, 0.0], &c).unwrap(), 1.0);
        assert!(matches!(
            inradius(&[0.0, 0.0], &manual_config(2, vec![])),
            Err(Error::EmptyNeighborhood)
        ));
    }

    #[test]
    fn cross_configuration_coverage() {
        let c = manual_config(2, vec![2.0, 0.0, -2.0, 0.0, 0.0, 2.0, 0.0, -2.0]);
        let x = [0.0, 0.0];
        assert!(cell_contained_in_ball(&x, &c, 2.0_f64.sqrt()).unwrap());
        assert!(!cell_contained_in_ball(&x, &c, 1.41).unwrap());
        match circumradius(&x, &c).unwrap() {
            Circumradius::Bounded(r) => assert_relative_eq!(r, 2.0_f64.sqrt(), epsilon = 1e-9),
            Circumradius::Unbounded => panic!("cross cell is bounded"),
        }
    }

    #[test]
    fn no_neighbors_within_reach_is_uncovered() {
        let c = manual_config(2, vec![5.0, 0.0, -5.0, 0.0, 0.0, 5.0, 0.0, -5.0]);
        assert!(!cell_contained_in_ball(&[0.0, 0.0], &c, 1.0).unwrap());
    }

    #[test]
    fn line_coverage_and_circumradius() {
        let a = 1.3;
        let b = 0.4;
        let c = manual_config(1, vec![-2.0 * a, 2.0 * b]);
        let x = [0.0];
        assert!(cell_contained_in_ball(&x, &c, a.max(b) + 1e-12).unwrap());
        assert!(!cell_contained_in_ball(&x, &c, a.max(b) - 1e-6).unwrap());
        match circumradius(&x, &c).unwrap() {
            Circumradius::Bounded(r) => assert_relative_eq!(r, a.max(b), epsilon = 1e-9),
            Circumradius::Unbounded => panic!("two-sided line cell is bounded"),
        }
    }

    #[test]
    fn half_plane_cell_unbounded() {
        let c = manual_config(2, vec![1.0, 0.0, 2.0, 1.0, 3.0, -1.0]);
        let x = [0.0, 0.0];
        assert!(!is_cell_bounded(&x, &c).unwrap());
        assert_eq!(circumradius(&x, &c).unwrap(), Circumradius::Unbounded);
    }

    #[test]
    fn triangle_encloses_origin() {
        let c = manual_config(2, vec![1.0, 0.0, -1.0, 1.0, -1.0, -1.0]);
        assert!(is_cell_bounded(&[0.0, 0.0], &c).unwrap());
    }

    #[test]
    fn thin_cell_circumradius_exceeds_neighbor_distance() {
        // bounded cell whose vertices escape far beyond the neighbors
        let eps = 0.05;
        let c = manual_config(2, vec![1.0, 0.0, -1.0, eps, -1.0, -eps]);
        let x = [0.0, 0.0];
        assert!(is_cell_bounded(&x, &c).unwrap());
        let max_neighbor = 1.0 + eps;
        match circumradius(&x, &c).unwrap() {
            Circumradius::Bounded(r) => assert!(r > 2.0 * max_neighbor, "r = {r}"),
            Circumradius::Unbounded => panic!("cell is bounded"),
        }
    }

    #[test]
    fn degenerate_hull_position_flagged() {
        let c = manual_config(2, vec![1.0, 0.0, -1.0, 0.0, 0.0, 1.0]);
        // x on the segment between the first two neighbors: gap exactly pi
        assert_eq!(
            boundedness(&[0.0, 0.0], &c).unwrap(),
            Boundedness::Degenerate
        );
        assert!(!is_cell_bounded(&[0.0, 0.0], &c).unwrap());
    }

    #[test]
    fn coverage_monotone_in_radius() {
        let c = manual_config(
            2,
            vec![1.5, 0.2, -0.7, 1.1, -1.0, -0.9, 0.3, -1.4, 2.2, 2.0],
        );
        let x = [0.1, 0.0];
        let mut prev = false;
        for i in 0..200 {
            let r = 0.05 * (i + 1) as f64;
            let now = cell_contained_in_ball(&x, &c, r).unwrap();
            assert!(!prev || now, "coverage lost when growing R at r={r}");
            prev = now;
        }
    }

    #[test]
    fn removing_a_neighbor_grows_radii() {
        let full = manual_config(
            2,
            vec![1.0, 0.1, -0.8, 0.9, -0.9, -0.7, 0.2, -1.1, 0.6, 0.8],
        );
        let reduced = manual_config(2, vec![1.0, 0.1, -0.8, 0.9, -0.9, -0.7, 0.2, -1.1]);
        let x = [0.0, 0.0];
        assert!(inradius(&x, &full).unwrap() <= inradius(&x, &reduced).unwrap());
        if let (Circumradius::Bounded(rf), Circumradius::Bounded(rr)) = (
            circumradius(&x, &full).unwrap(),
            circumradius(&x, &reduced).unwrap(),
        ) {
            assert!(rf <= rr + 1e-12);
        }
    }

    #[test]
    fn p2_on_line_is_half() {
        let est = estimate_p_k(1, 2, 40_000, StreamSeed::new(21, 0)).unwrap();
        assert!(
            (est.estimate - 0.5).abs() <= 3.0 * est.std_error,
            "p2 = {} +- {}",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn p_k_monotone_in_k_by_coupling() {
        let ind = p_k_nested_indicators(2, 6, 4000, StreamSeed::new(22, 0)).unwrap();
        for w in ind.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                assert!(*b || !*a, "coverage lost when adding a point");
            }
        }
    }

    #[test]
    fn alpha2_values() {
        assert_relative_eq!(alpha2(1, 0.5).unwrap(), 1.0);
        assert_relative_eq!(alpha2(1, 1.0).unwrap(), 2.0_f64.sqrt());
        assert!(alpha2(1, 0.3).unwrap() < alpha2(1, 0.4).unwrap());
        assert!(alpha2(2, 0.0).is_err());
        assert!(alpha2(2, -0.1).is_err());
    }

    #[test]
    fn p_k_reproducible_and_in_range() {
        let a = estimate_p_k(2, 3, 20_000, StreamSeed::new(5, 1)).unwrap();
        let b = estimate_p_k(2, 3, 20_000, StreamSeed::new(5, 2)).unwrap();
        assert!(a.estimate > 0.0 && a.estimate < 1.0);
        let spread = (a.estimate - b.estimate).abs();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(spread <= 4.0 * se, "seeds disagree: {a:?} vs {b:?}");
    }
}
