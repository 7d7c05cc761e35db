//! Uniform-grid spatial hash for fixed-radius and nearest-neighbor queries.
//!
//! Query radii in the pipelines are known a priori from the threshold
//! bounds, so cells sized near the expected nearest-neighbor spacing make
//! lookups O(1) amortized.

use crate::geom::{sq_distance, BoxRegion};
use crate::process::PointConfig;

const MAX_CELLS: usize = 1 << 22;

pub struct SpatialGrid<'a> {
    points: &'a PointConfig,
    lo: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    /// CSR layout: point ids sorted by flat cell index.
    ids: Vec<u32>,
    starts: Vec<u32>,
}

impl<'a> SpatialGrid<'a> {
    /// Builds a grid over `bounds` with roughly `target_per_cell` points
    /// per cell.
    pub fn build(points: &'a PointConfig, bounds: &BoxRegion, target_per_cell: f64) -> Self {
        let d = points.dim();
        let n = points.len().max(1);
        let vol = bounds.volume();
        let mut cell = (vol * target_per_cell / n as f64).powf(1.0 / d as f64);
        let extent: Vec<f64> = (0..d).map(|k| bounds.hi()[k] - bounds.lo()[k]).collect();
        loop {
            let total: usize = extent
                .iter()
                .map(|e| ((e / cell).ceil() as usize).max(1))
                .product();
            if total <= MAX_CELLS {
                break;
            }
            cell *= 2.0;
        }
        let dims: Vec<usize> = extent
            .iter()
            .map(|e| ((e / cell).ceil() as usize).max(1))
            .collect();
        let total: usize = dims.iter().product();
        let lo = bounds.lo().to_vec();

        let flat = |p: &[f64]| -> usize {
            let mut idx = 0usize;
            for k in 0..d {
                let c = (((p[k] - lo[k]) / cell) as usize).min(dims[k] - 1);
                idx = idx * dims[k] + c;
            }
            idx
        };

        let mut counts = vec![0u32; total + 1];
        for p in points.iter_points() {
            counts[flat(p) + 1] += 1;
        }
        for i in 1..=total {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut cursor = starts.clone();
        let mut ids = vec![0u32; points.len()];
        for (i, p) in points.iter_points().enumerate() {
            let c = flat(p);
            ids[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        Self {
            points,
            lo,
            cell,
            dims,
            ids,
            starts,
        }
    }

    fn cell_coord(&self, v: f64, axis: usize) -> isize {
        ((v - self.lo[axis]) / self.cell).floor() as isize
    }

    fn cell_points(&self, coords: &[isize]) -> &[u32] {
        let mut idx = 0usize;
        for (k, &c) in coords.iter().enumerate() {
            if c < 0 || c as usize >= self.dims[k] {
                return &[];
            }
            idx = idx * self.dims[k] + c as usize;
        }
        &self.ids[self.starts[idx] as usize..self.starts[idx + 1] as usize]
    }

    /// All point ids at Euclidean distance <= r from x, excluding `exclude`.
    pub fn neighbors_within(&self, x: &[f64], r: f64, exclude: Option<u32>, out: &mut Vec<u32>) {
        out.clear();
        let d = x.len();
        let r2 = r * r;
        let lo: Vec<isize> = (0..d).map(|k| self.cell_coord(x[k] - r, k)).collect();
        let hi: Vec<isize> = (0..d).map(|k| self.cell_coord(x[k] + r, k)).collect();
        let mut c = lo.clone();
        loop {
            for &id in self.cell_points(&c) {
                if Some(id) != exclude && sq_distance(self.points.point(id as usize), x) <= r2 {
                    out.push(id);
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                c[k] += 1;
                if c[k] <= hi[k] {
                    break;
                }
                c[k] = lo[k];
            }
        }
    }

    /// Nearest point to x (excluding `exclude`), by expanding ring search.
    pub fn nearest_neighbor(&self, x: &[f64], exclude: Option<u32>) -> Option<(u32, f64)> {
        let d = x.len();
        let center: Vec<isize> = (0..d).map(|k| self.cell_coord(x[k], k)).collect();
        let max_ring = self
            .dims
            .iter()
            .zip(&center)
            .map(|(&dim, &c)| (c.max(0) as usize).max(dim.saturating_sub(c.max(0) as usize)))
            .max()
            .unwrap_or(0)
            + 1;
        let mut best: Option<(u32, f64)> = None;
        for ring in 0..=max_ring {
            self.scan_ring(&center, ring, x, exclude, &mut best);
            if let Some((_, d2)) = best {
                // points in rings > ring are at distance >= ring * cell
                if d2.sqrt() <= ring as f64 * self.cell {
                    break;
                }
            }
        }
        best.map(|(id, d2)| (id, d2.sqrt()))
    }

    fn scan_ring(
        &self,
        center: &[isize],
        ring: usize,
        x: &[f64],
        exclude: Option<u32>,
        best: &mut Option<(u32, f64)>,
    ) {
        let d = center.len();
        let r = ring as isize;
        let mut c = vec![0isize; d];
        let mut offsets = vec![-r; d];
        loop {
            // only cells on the Chebyshev shell of radius `ring`
            if offsets.iter().any(|o| o.abs() == r) || ring == 0 {
                for k in 0..d {
                    c[k] = center[k] + offsets[k];
                }
                for &id in self.cell_points(&c) {
                    if Some(id) == exclude {
                        continue;
                    }
                    let d2 = sq_distance(self.points.point(id as usize), x);
                    if best.map_or(true, |(_, b)| d2 < b) {
                        *best = Some((id, d2));
                    }
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                offsets[k] += 1;
                if offsets[k] <= r {
                    break;
                }
                offsets[k] = -r;
            }
        }
    }
}
