//! Elementary Euclidean geometry: boxes, convex polygons, balls.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {d}"),
    }
}

pub fn sq_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    sq_distance(a, b).sqrt()
}

/// An axis-aligned box, the ambient region for sampling and density supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return Err(Error::InvalidModel(format!(
                "box needs 1..=3 matching coordinate bounds, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (&a, &b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidInterval { a, b });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    /// Distance from `x` to the boundary, positive inside, 0 outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for (&v, (&a, &b)) in x.iter().zip(self.lo.iter().zip(&self.hi)) {
            m = m.min(v - a).min(b - v);
        }
        m.max(0.0)
    }

    pub fn contains_ball(&self, center: &[f64], radius: f64) -> bool {
        self.boundary_distance(center) >= radius
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains(other.lo()) && self.contains(other.hi())
    }

    /// The box grown by `margin` on every side.
    pub fn dilated(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.lo.iter().map(|a| a - margin).collect(),
            self.hi.iter().map(|b| b + margin).collect(),
        )
    }
}

/// A convex polygon in the plane, counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidModel(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let poly = Self { vertices };
        if poly.signed_area() <= 0.0 {
            return Err(Error::InvalidModel(
                "polygon vertices must be in counter-clockwise order with positive area".into(),
            ));
        }
        if !poly.is_convex() {
            return Err(Error::InvalidModel("polygon is not convex".into()));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            let [x1, y1] = self.vertices[i];
            let [x2, y2] = self.vertices[(i + 1) % n];
            s += x1 * y2 - x2 * y1;
        }
        s / 2.0
    }

    fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let [ax, ay] = self.vertices[i];
            let [bx, by] = self.vertices[(i + 1) % n];
            let [cx, cy] = self.vertices[(i + 2) % n];
            (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) >= 0.0
        })
    }

    pub fn area(&self) -> f64 {
        self.signed_area()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len();
        let a = self.signed_area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let [x1, y1] = self.vertices[i];
            let [x2, y2] = self.vertices[(i + 1) % n];
            let w = x1 * y2 - x2 * y1;
            cx += (x1 + x2) * w;
            cy += (y1 + y2) * w;
        }
        [cx / (6.0 * a), cy / (6.0 * a)]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let [ax, ay] = self.vertices[i];
            let [bx, by] = self.vertices[(i + 1) % n];
            (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) >= 0.0
        })
    }

    pub fn bounding_box(&self) -> BoxRegion {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        BoxRegion::new(lo.to_vec(), hi.to_vec()).expect("finite vertices")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn box_basics() {
        let b = BoxRegion::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.dim(), 2);
        assert_relative_eq!(b.volume(), 2.0);
        assert!(b.contains(&[1.0, 0.5]));
        assert!(!b.contains(&[-0.1, 0.5]));
        assert_relative_eq!(b.boundary_distance(&[0.25, 0.5]), 0.25);
        assert!(b.contains_ball(&[1.0, 0.5], 0.5));
        assert!(!b.contains_ball(&[1.0, 0.5], 0.51));
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(BoxRegion::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxRegion::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn polygon_area_centroid() {
        let p = ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]).unwrap();
        assert_relative_eq!(p.area(), 4.0);
        let c = p.centroid();
        assert_relative_eq!(c[0], 1.0);
        assert_relative_eq!(c[1], 1.0);
        assert!(p.contains(&[0.5, 1.9]));
        assert!(!p.contains(&[2.1, 1.0]));
    }

    #[test]
    fn clockwise_polygon_rejected() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn nonconvex_polygon_rejected() {
        assert!(ConvexPolygon::new(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [1.0, 0.5],
            [2.0, 2.0],
            [0.0, 2.0]
        ])
        .is_err());
    }
}
