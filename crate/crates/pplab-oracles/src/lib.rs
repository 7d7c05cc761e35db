//! Independent reference implementations used as test oracles.
//!
//! Everything here is deliberately self-contained (std only) and follows
//! different computational routes than the main crate: Voronoi cells are
//! materialized by half-plane clipping instead of cap coverage, sphere
//! coverage is brute-forced over a direction fan, and ball masses come
//! from a polar midpoint grid.

/// A planar Voronoi cell materialized by clipping a large square with the
/// bisector half-planes of the neighbors.
#[derive(Debug, Clone)]
pub struct ClippedCell {
    pub vertices: Vec<[f64; 2]>,
    /// Half-width of the artificial bounding square used for clipping.
    pub clip_half_width: f64,
    nucleus: [f64; 2],
}

/// Clips the square of half-width `half_width` around `x` by all neighbor
/// bisectors (Sutherland-Hodgman).
pub fn clipped_cell(x: [f64; 2], neighbors: &[[f64; 2]], half_width: f64) -> ClippedCell {
    let mut poly: Vec<[f64; 2]> = vec![
        [x[0] - half_width, x[1] - half_width],
        [x[0] + half_width, x[1] - half_width],
        [x[0] + half_width, x[1] + half_width],
        [x[0] - half_width, x[1] + half_width],
    ];
    for p in neighbors {
        if *p == x {
            continue;
        }
        // keep side of the bisector containing x:
        //   n . y <= n . m, with n = p - x and m the midpoint
        let n = [p[0] - x[0], p[1] - x[1]];
        let m = [0.5 * (p[0] + x[0]), 0.5 * (p[1] + x[1])];
        let bound = n[0] * m[0] + n[1] * m[1];
        poly = clip_half_plane(&poly, n, bound);
        if poly.is_empty() {
            break;
        }
    }
    ClippedCell {
        vertices: poly,
        clip_half_width: half_width,
        nucleus: x,
    }
}

fn clip_half_plane(poly: &[[f64; 2]], n: [f64; 2], bound: f64) -> Vec<[f64; 2]> {
    let inside = |v: &[f64; 2]| n[0] * v[0] + n[1] * v[1] <= bound;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let da = n[0] * a[0] + n[1] * a[1] - bound;
            let db = n[0] * b[0] + n[1] * b[1] - bound;
            let t = da / (da - db);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

impl ClippedCell {
    /// Whether the true cell is bounded: no vertex touches the clip square.
    pub fn is_bounded(&self) -> bool {
        let limit = self.clip_half_width * (1.0 - 1e-9);
        self.vertices.iter().all(|v| {
            (v[0] - self.nucleus[0]).abs() < limit && (v[1] - self.nucleus[1]).abs() < limit
        })
    }

    /// Max vertex distance from the nucleus (the circumscribed radius for
    /// bounded cells).
    pub fn circumradius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| ((v[0] - self.nucleus[0]).powi(2) + (v[1] - self.nucleus[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Distance from the nucleus to the cell boundary: the largest R with
    /// B(x, R) inside the clipped polygon (minimum over edge segments).
    pub fn inradius(&self) -> f64 {
        let v = &self.vertices;
        if v.len() < 3 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..v.len() {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            best = best.min(segment_distance(self.nucleus, a, b));
        }
        best
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()
}

/// Brute-force containment test: the cell lies in B(x, R) iff along every
/// direction of a uniform fan some bisector is hit within R.
pub fn coverage_sweep(x: [f64; 2], neighbors: &[[f64; 2]], radius: f64, directions: usize) -> bool {
    for i in 0..directions {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / directions as f64;
        let u = [theta.cos(), theta.sin()];
        let mut exits_within = false;
        for p in neighbors {
            if *p == x {
                continue;
            }
            let d = [p[0] - x[0], p[1] - x[1]];
            let along = u[0] * d[0] + u[1] * d[1];
            if along <= 0.0 {
                continue;
            }
            let dist2 = d[0] * d[0] + d[1] * d[1];
            // the ray x + s u crosses the bisector of (x, p) at s = |d|^2 / (2 u.d)
            if dist2 / (2.0 * along) <= radius {
                exits_within = true;
                break;
            }
        }
        if !exits_within {
            return false;
        }
    }
    true
}

/// Polar midpoint-grid ball mass in the plane; exact for affine densities,
/// O(h^2) otherwise.
pub fn ball_mass_midpoint(
    f: &dyn Fn(&[f64]) -> f64,
    center: [f64; 2],
    radius: f64,
    grid: usize,
) -> f64 {
    let mut total = 0.0;
    let dr = radius / grid as f64;
    let dtheta = 2.0 * std::f64::consts::PI / grid as f64;
    for i in 0..grid {
        let rho = (i as f64 + 0.5) * dr;
        let mut ring = 0.0;
        for j in 0..grid {
            let theta = (j as f64 + 0.5) * dtheta;
            ring += f(&[
                center[0] + rho * theta.cos(),
                center[1] + rho * theta.sin(),
            ]);
        }
        total += rho * ring;
    }
    total * dr * dtheta
}

/// Midpoint-grid mass of an interval on the line.
pub fn interval_mass_midpoint(f: &dyn Fn(&[f64]) -> f64, a: f64, b: f64, grid: usize) -> f64 {
    let h = (b - a) / grid as f64;
    (0..grid)
        .map(|i| f(&[a + (i as f64 + 0.5) * h]))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_cell_is_unit_square() {
        let neighbors = [[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]];
        let cell = clipped_cell([0.0, 0.0], &neighbors, 1e3);
        assert!(cell.is_bounded());
        assert_eq!(cell.vertices.len(), 4);
        assert!((cell.circumradius() - 2.0f64.sqrt()).abs() < 1e-9);
        assert!((cell.inradius() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_plane_cell_touches_square() {
        let neighbors = [[1.0, 0.0], [2.0, 1.0], [3.0, -1.0]];
        let cell = clipped_cell([0.0, 0.0], &neighbors, 1e3);
        assert!(!cell.is_bounded());
    }

    #[test]
    fn sweep_agrees_on_cross() {
        let neighbors = [[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]];
        assert!(coverage_sweep([0.0, 0.0], &neighbors, 1.4143, 100_000));
        assert!(!coverage_sweep([0.0, 0.0], &neighbors, 1.41, 100_000));
    }

    #[test]
    fn midpoint_disk_area() {
        let area = ball_mass_midpoint(&|_| 1.0, [0.3, 0.1], 0.5, 512);
        assert!((area - std::f64::consts::PI * 0.25).abs() < 1e-10);
    }

    #[test]
    fn midpoint_linear_exact() {
        let f = |y: &[f64]| 1.0 + y[0];
        let mass = ball_mass_midpoint(&f, [0.0, 0.0], 0.1, 1024);
        assert!((mass - std::f64::consts::PI * 0.01).abs() < 1e-12);
    }
}
