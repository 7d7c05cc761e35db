//! Samplers for Poisson, binomial, and coupled sandwich point processes.
//!
//! All samplers draw uniform proposals in a box and thin them with the
//! density/envelope ratio, so counts in any subregion are Poisson (or
//! multinomial) with the intended measure. Given the same `StreamSeed`
//! the output is bit-exact.

use crate::error::{Error, Result};
use crate::geom::BoxRegion;
use crate::measure::{DensityModel, WindowRegion};
use crate::rng::StreamSeed;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Poisson,
    Binomial,
    CoupledLayer,
    Manual,
}

/// Provenance of a sampled configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub kind: GeneratorKind,
    /// Intensity multiplier t (Poisson/coupled) or point count n (binomial).
    pub size: f64,
    pub seed: StreamSeed,
    pub sampling_box: BoxRegion,
}

/// A finite point configuration with flat coordinate storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    dim: usize,
    coords: Vec<f64>,
    meta: GeneratorMeta,
}

impl PointConfig {
    pub fn from_coords(dim: usize, coords: Vec<f64>, meta: GeneratorMeta) -> Result<Self> {
        assert_eq!(coords.len() % dim, 0, "ragged coordinate buffer");
        let config = Self { dim, coords, meta };
        for p in config.iter_points() {
            if !config.meta.sampling_box.contains(p) {
                return Err(Error::InvalidModel(
                    "point outside the declared sampling box".into(),
                ));
            }
        }
        if config.has_duplicates() {
            return Err(Error::InvalidModel(
                "duplicate points in configuration (sampler bug)".into(),
            ));
        }
        Ok(config)
    }

    /// A configuration from explicit coordinates, with a box padded around
    /// them; point distinctness is still enforced.
    pub fn manual(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let mut lo = vec![-1.0f64; dim];
        let mut hi = vec![1.0f64; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k] - 1.0);
                hi[k] = hi[k].max(p[k] + 1.0);
            }
        }
        Self::from_coords(
            dim,
            coords,
            GeneratorMeta {
                kind: GeneratorKind::Manual,
                size: 0.0,
                seed: crate::rng::StreamSeed::new(0, 0),
                sampling_box: BoxRegion::new(lo, hi)?,
            },
        )
    }

    fn has_duplicates(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_unstable_by(|&i, &j| {
            self.point(i)
                .partial_cmp(self.point(j))
                .expect("finite coordinates")
        });
        idx.windows(2)
            .any(|w| self.point(w[0]) == self.point(w[1]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn meta(&self) -> &GeneratorMeta {
        &self.meta
    }

    pub fn count_in(&self, region: &WindowRegion) -> usize {
        self.iter_points().filter(|p| region.contains(p)).count()
    }

    /// One point per row, columns x1..xd.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            out,
            "{}",
            (1..=self.dim)
                .map(|k| format!("x{k}"))
                .collect::<Vec<_>>()
                .join(",")
        )?;
        for p in self.iter_points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Seed, size and box in a JSON sidecar next to the CSV.
    pub fn write_metadata(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, &self.meta).map_err(std::io::Error::from)?;
        Ok(())
    }
}

/// Sub-configuration of the points inside `region`; metadata preserved.
pub fn restrict(config: &PointConfig, region: &WindowRegion) -> PointConfig {
    let mut coords = Vec::new();
    for p in config.iter_points() {
        if region.contains(p) {
            coords.extend_from_slice(p);
        }
    }
    PointConfig {
        dim: config.dim,
        coords,
        meta: config.meta.clone(),
    }
}

fn draw_poisson_count(rng: &mut impl Rng, mean: f64) -> Result<u64> {
    if !mean.is_finite() {
        return Err(Error::InfiniteIntensity { intensity: mean });
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let n: f64 = Poisson::new(mean)
        .map_err(|_| Error::InfiniteIntensity { intensity: mean })?
        .sample(rng);
    Ok(n as u64)
}

fn uniform_in_box(rng: &mut impl Rng, region: &BoxRegion, out: &mut Vec<f64>) {
    for k in 0..region.dim() {
        out.push(rng.random_range(region.lo()[k]..region.hi()[k]));
    }
}

/// Poisson process with intensity measure `t * mu` on `box_region`, by
/// thinning uniform proposals under the f_max envelope.
pub fn sample_poisson(
    density: &DensityModel,
    t: f64,
    box_region: &BoxRegion,
    seed: StreamSeed,
) -> Result<PointConfig> {
    if !density.support().contains_box(box_region) {
        return Err(Error::InvalidModel(
            "sampling box must lie inside the density support".into(),
        ));
    }
    let envelope = density.f_max();
    let mean = t * envelope * box_region.volume();
    let mut rng = seed.rng();
    let n = draw_poisson_count(&mut rng, mean)?;
    let dim = density.dim();
    let mut coords = Vec::with_capacity(dim * (n as usize / 2 + 1));
    let mut proposal = Vec::with_capacity(dim);
    for _ in 0..n {
        proposal.clear();
        uniform_in_box(&mut rng, box_region, &mut proposal);
        let accept: f64 = rng.random();
        if accept * envelope < density.evaluate(&proposal) {
            coords.extend_from_slice(&proposal);
        }
    }
    PointConfig::from_coords(
        dim,
        coords,
        GeneratorMeta {
            kind: GeneratorKind::Poisson,
            size: t,
            seed,
            sampling_box: box_region.clone(),
        },
    )
}

/// Exactly `n` i.i.d. points from the density normalized over the box,
/// by rejection sampling.
pub fn sample_binomial(
    density: &DensityModel,
    n: usize,
    box_region: &BoxRegion,
    seed: StreamSeed,
) -> Result<PointConfig> {
    if !density.support().contains_box(box_region) {
        return Err(Error::InvalidModel(
            "sampling box must lie inside the density support".into(),
        ));
    }
    let envelope = density.f_max();
    let dim = density.dim();
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(dim * n);
    let mut proposal = Vec::with_capacity(dim);
    let mut kept = 0usize;
    while kept < n {
        proposal.clear();
        uniform_in_box(&mut rng, box_region, &mut proposal);
        let accept: f64 = rng.random();
        if accept * envelope < density.evaluate(&proposal) {
            coords.extend_from_slice(&proposal);
            kept += 1;
        }
    }
    PointConfig::from_coords(
        dim,
        coords,
        GeneratorMeta {
            kind: GeneratorKind::Binomial,
            size: n as f64,
            seed,
            sampling_box: box_region.clone(),
        },
    )
}

/// Three nested thinnings of one shared marked uniform process.
#[derive(Debug, Clone)]
pub struct SandwichTriple {
    pub lower: PointConfig,
    pub mid: PointConfig,
    pub upper: PointConfig,
}

/// Thins a single marked process by the thresholds `t*f1 <= t*phi <= t*f2`,
/// so the layers are Poisson with intensities `t*mu_1`, `t*vartheta`,
/// `t*mu_2` and are nested as point sets, replicate by replicate.
pub fn sample_coupled_sandwich(
    phi: &DensityModel,
    f1: &DensityModel,
    f2: &DensityModel,
    t: f64,
    box_region: &BoxRegion,
    seed: StreamSeed,
) -> Result<SandwichTriple> {
    for d in [phi, f1, f2] {
        if !d.support().contains_box(box_region) {
            return Err(Error::InvalidModel(
                "sampling box must lie inside every density support".into(),
            ));
        }
        if d.dim() != phi.dim() {
            return Err(Error::InvalidModel("sandwich dimensions differ".into()));
        }
    }
    validate_ordering(phi, f1, f2, box_region)?;

    let envelope = f2.f_max().max(phi.f_max()).max(f1.f_max());
    let mean = t * envelope * box_region.volume();
    let mut rng = seed.rng();
    let n = draw_poisson_count(&mut rng, mean)?;
    let dim = phi.dim();
    let (mut lo, mut mi, mut up) = (Vec::new(), Vec::new(), Vec::new());
    let mut proposal = Vec::with_capacity(dim);
    for _ in 0..n {
        proposal.clear();
        uniform_in_box(&mut rng, box_region, &mut proposal);
        // mark uniform in [0, envelope); point kept by layer j iff mark < f_j
        let mark: f64 = rng.random::<f64>() * envelope;
        if mark < f1.evaluate(&proposal) {
            lo.extend_from_slice(&proposal);
        }
        if mark < phi.evaluate(&proposal) {
            mi.extend_from_slice(&proposal);
        }
        if mark < f2.evaluate(&proposal) {
            up.extend_from_slice(&proposal);
        }
    }
    let build = |coords: Vec<f64>| {
        PointConfig::from_coords(
            dim,
            coords,
            GeneratorMeta {
                kind: GeneratorKind::CoupledLayer,
                size: t,
                seed,
                sampling_box: box_region.clone(),
            },
        )
    };
    Ok(SandwichTriple {
        lower: build(lo)?,
        mid: build(mi)?,
        upper: build(up)?,
    })
}

/// Grid check of `f1 <= phi <= f2` on the box; violation is an error.
fn validate_ordering(
    phi: &DensityModel,
    f1: &DensityModel,
    f2: &DensityModel,
    box_region: &BoxRegion,
) -> Result<()> {
    let dim = box_region.dim();
    let per_axis = match dim {
        1 => 4096,
        2 => 128,
        _ => 32,
    };
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        for k in 0..dim {
            let frac = (idx[k] as f64 + 0.5) / per_axis as f64;
            x[k] = box_region.lo()[k] + frac * (box_region.hi()[k] - box_region.lo()[k]);
        }
        let (a, b, c) = (f1.evaluate(&x), phi.evaluate(&x), f2.evaluate(&x));
        if a > b || b > c {
            return Err(Error::OrderingViolation {
                at: x.clone(),
                f1: a,
                phi: b,
                f2: c,
            });
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
}
