//! The rescaled point processes built from sampled Poisson configurations:
//! inradius transforms (Gumbel regime) and circumscribed-radius transforms
//! (Weibull regime).
//!
//! Simulation happens on the window dilated by a margin sized from the
//! threshold-radius bounds, so every emitted atom is exactly what the
//! infinite-volume process would produce. A nucleus whose geometry reaches
//! beyond the margin triggers a resimulation with a larger box (inradius)
//! or is dropped behind a recorded atom floor (circumradius).

use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, BoxRegion};
use crate::grid::SpatialGrid;
use crate::measure::{ball_measure, density_bounds, threshold_radii_bound, DensityModel, Window};
use crate::process::{sample_poisson, PointConfig};
use crate::rng::StreamSeed;
use crate::sample::{RescaledSample, SampleMeta};
use crate::voronoi::CapSet;

/// Safety factor applied on top of the analytic margin bounds.
const MARGIN_SAFETY: f64 = 2.0;
/// Margin retries before giving up on a replicate.
pub const MAX_MARGIN_ATTEMPTS: u16 = 6;

/// Which inradius transform to apply per nucleus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InradiusVariant {
    /// atom = t mu(B(x, 2 c(x))) - log t
    TwoC,
    /// atom = 2^d t mu(B(x, c(x))) - log t
    TwoPowDC,
}

impl InradiusVariant {
    pub fn label(self) -> &'static str {
        match self {
            InradiusVariant::TwoC => "inradius-2c",
            InradiusVariant::TwoPowDC => "inradius-hat",
        }
    }
}

/// Inradius pipeline: sample eta_t on the margined box, transform every
/// nucleus in W.
#[derive(Debug, Clone)]
pub struct InradiusPipeline<'a> {
    pub density: &'a DensityModel,
    pub window: &'a Window,
    pub t: f64,
    /// Largest level any downstream statistic inspects; fixes the margin.
    pub u_max: f64,
    pub variant: InradiusVariant,
}

impl InradiusPipeline<'_> {
    fn margin(&self, boost: f64) -> f64 {
        2.0 * MARGIN_SAFETY * boost * threshold_radii_bound(self.density, self.u_max, self.t)
    }

    pub fn run(&self, seed: StreamSeed, boost: f64) -> Result<RescaledSample> {
        let margin = self.margin(boost);
        let sim_box = margined_box(self.density, self.window, margin)?;
        let config = sample_poisson(self.density, self.t, &sim_box, seed)?;
        let grid = SpatialGrid::build(&config, &sim_box, 2.0);
        let d = self.density.dim();
        let log_t = self.t.ln();
        let two_pow_d = f64::powi(2.0, d as i32);
        let mut atoms = Vec::new();
        let mut nuclei = 0u64;
        for i in 0..config.len() {
            let x = config.point(i);
            if !self.window.contains(x) {
                continue;
            }
            nuclei += 1;
            let (_, nn_dist) = grid.nearest_neighbor(x, Some(i as u32)).ok_or(
                Error::MarginTooSmall {
                    radius: f64::INFINITY,
                    margin,
                },
            )?;
            if nn_dist > margin {
                return Err(Error::MarginTooSmall {
                    radius: nn_dist,
                    margin,
                });
            }
            let c = 0.5 * nn_dist;
            let atom = match self.variant {
                InradiusVariant::TwoC => self.t * ball_measure(self.density, x, 2.0 * c)? - log_t,
                InradiusVariant::TwoPowDC => {
                    two_pow_d * (self.t * ball_measure(self.density, x, c)?) - log_t
                }
            };
            atoms.push(atom);
        }
        Ok(RescaledSample::new(
            atoms,
            SampleMeta {
                transform: self.variant.label().into(),
                scale_param: self.t,
                seed,
                sources: nuclei,
                dropped: 0,
                valid_below: None,
            },
        ))
    }

    /// Retries with doubled margins on `MarginTooSmall`, each attempt on
    /// its own stream. Returns the sample and the number of retries.
    pub fn run_with_retry(
        &self,
        master: u64,
        phase: u16,
        replicate: u32,
    ) -> Result<(RescaledSample, u16)> {
        run_retry_loop(|attempt| {
            self.run(
                StreamSeed::for_replicate(master, phase, attempt, replicate),
                f64::powi(2.0, attempt as i32),
            )
        })
    }
}

/// Circumradius pipeline: atoms `s_t mu(B(x, C(x)))` for nuclei in W with
/// `s_t = alpha_2 t^((d+2)/(d+1))`; cells unbounded or reaching beyond the
/// cutoff contribute no atom below the recorded floor.
#[derive(Debug, Clone)]
pub struct CircumradiusPipeline<'a> {
    pub density: &'a DensityModel,
    pub window: &'a Window,
    pub t: f64,
    pub u_max: f64,
    pub alpha2: f64,
}

impl CircumradiusPipeline<'_> {
    pub fn scale_factor(&self) -> f64 {
        let d = self.density.dim() as f64;
        self.alpha2 * self.t.powf((d + 2.0) / (d + 1.0))
    }

    /// Radius below which every circumradius is computed exactly; the
    /// paper's comparison scale `4 (2u_t / (beta k_d))^(1/d)` at u_max.
    fn cutoff(&self, boost: f64) -> Result<f64> {
        let d = self.density.dim();
        let (beta, _) = density_bounds(self.density, self.window)?;
        let u_t = self.u_max / self.scale_factor();
        Ok(4.0 * boost * (2.0 * u_t / (beta * unit_ball_volume(d))).powf(1.0 / d as f64))
    }

    pub fn run(&self, seed: StreamSeed, boost: f64) -> Result<RescaledSample> {
        if self.density.dim() > 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.density.dim(),
                op: "circumradius process",
            });
        }
        let cutoff = self.cutoff(boost)?;
        let margin = MARGIN_SAFETY * 2.0 * cutoff;
        let sim_box = margined_box(self.density, self.window, margin)?;
        let config = sample_poisson(self.density, self.t, &sim_box, seed)?;
        circumradius_atoms(
            self.density,
            self.window,
            &config,
            self.scale_factor(),
            cutoff,
            seed,
        )
    }

    pub fn run_with_retry(
        &self,
        master: u64,
        phase: u16,
        replicate: u32,
    ) -> Result<(RescaledSample, u16)> {
        run_retry_loop(|attempt| {
            self.run(
                StreamSeed::for_replicate(master, phase, attempt, replicate),
                f64::powi(2.0, attempt as i32),
            )
        })
    }
}

fn run_retry_loop(
    mut attempt_fn: impl FnMut(u16) -> Result<RescaledSample>,
) -> Result<(RescaledSample, u16)> {
    let mut attempt = 0u16;
    loop {
        match attempt_fn(attempt) {
            Ok(sample) => return Ok((sample, attempt)),
            Err(Error::MarginTooSmall { .. }) if attempt + 1 < MAX_MARGIN_ATTEMPTS => {
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// The window bounding box dilated by `margin`, checked against the support.
fn margined_box(density: &DensityModel, window: &Window, margin: f64) -> Result<BoxRegion> {
    let bbox = window.region().bounding_box();
    let support = density.support();
    let mut available = f64::INFINITY;
    for k in 0..bbox.dim() {
        available = available
            .min(bbox.lo()[k] - support.lo()[k])
            .min(support.hi()[k] - bbox.hi()[k]);
    }
    if margin > available {
        return Err(Error::MarginExceedsSupport {
            required: margin,
            available,
        });
    }
    bbox.dilated(margin)
}

/// Circumradius atoms for an existing configuration, measured with
/// `measure_density` (the sandwich layers each use their own measure).
///
/// Exact for every cell with C <= cutoff; others are counted as dropped.
/// Counts and minima below the returned `valid_below` floor are exact.
pub fn circumradius_atoms(
    measure_density: &DensityModel,
    window: &Window,
    config: &PointConfig,
    scale_factor: f64,
    cutoff: f64,
    seed: StreamSeed,
) -> Result<RescaledSample> {
    let d = config.dim();
    if d > 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            op: "circumradius process",
        });
    }
    let sim_box = &config.meta().sampling_box;
    // every nucleus in W must see all neighbors within 2*cutoff
    let bbox = window.region().bounding_box();
    for k in 0..bbox.dim() {
        let clearance = (bbox.lo()[k] - sim_box.lo()[k]).min(sim_box.hi()[k] - bbox.hi()[k]);
        if clearance < 2.0 * cutoff {
            return Err(Error::MarginTooSmall {
                radius: 2.0 * cutoff,
                margin: clearance,
            });
        }
    }
    let grid = SpatialGrid::build(config, sim_box, 2.0);
    let mut atoms = Vec::new();
    let mut nuclei = 0u64;
    let mut dropped = 0u64;
    let mut scratch = CircumradiusScratch::default();
    for i in 0..config.len() {
        let x = config.point(i);
        if !window.contains(x) {
            continue;
        }
        nuclei += 1;
        match local_circumradius(config, &grid, i as u32, x, cutoff, &mut scratch)? {
            Some(c_radius) => {
                atoms.push(scale_factor * ball_measure(measure_density, x, c_radius)?);
            }
            None => dropped += 1,
        }
    }
    let floor = scale_factor
        * measure_density.f_min()
        * unit_ball_volume(d)
        * cutoff.powi(d as i32);
    Ok(RescaledSample::new(
        atoms,
        SampleMeta {
            transform: "circumradius".into(),
            scale_param: config.meta().size,
            seed,
            sources: nuclei,
            dropped,
            valid_below: Some(floor),
        },
    ))
}

/// Scratch buffers reused across nuclei in the circumradius loop.
#[derive(Default)]
struct CircumradiusScratch {
    ids: Vec<u32>,
    /// (distance, direction angle) per neighbor, d = 2 only.
    polar: Vec<(f64, f64)>,
    arcs: Vec<(f64, f64)>,
}

/// Circumradius of the cell of point `i`, exact when it is <= cutoff;
/// `None` when the cell is unbounded or larger than the cutoff.
///
/// The search stages the neighbor queries outward from the nearest
/// neighbor, so typical cells never touch the (much larger) cutoff ball;
/// neighbor angles are computed once per stage and the coverage test per
/// radius is a filter + arccos + sweep.
fn local_circumradius(
    config: &PointConfig,
    grid: &SpatialGrid,
    i: u32,
    x: &[f64],
    cutoff: f64,
    scratch: &mut CircumradiusScratch,
) -> Result<Option<f64>> {
    let dim = x.len();
    let nn_dist = match grid.nearest_neighbor(x, Some(i)) {
        Some((_, d)) => d,
        None => return Ok(None),
    };
    if nn_dist > 2.0 * cutoff {
        return Ok(None);
    }
    let fetch = |radius: f64, scratch: &mut CircumradiusScratch| {
        grid.neighbors_within(x, 2.0 * radius, Some(i), &mut scratch.ids);
        if dim == 2 {
            scratch.polar.clear();
            for &j in &scratch.ids {
                let p = config.point(j as usize);
                let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
                scratch.polar.push(((dx * dx + dy * dy).sqrt(), dy.atan2(dx)));
            }
        }
    };
    let covered = |radius: f64, scratch: &mut CircumradiusScratch| -> Result<bool> {
        if dim == 1 {
            let caps = CapSet::from_neighbors(
                x,
                scratch.ids.iter().map(|&j| config.point(j as usize)),
                radius,
            )?;
            Ok(caps.covers_sphere())
        } else {
            scratch.arcs.clear();
            for &(dist, theta) in &scratch.polar {
                if dist <= 2.0 * radius {
                    let half = (dist / (2.0 * radius)).clamp(-1.0, 1.0).acos();
                    scratch.arcs.push((theta, half));
                }
            }
            Ok(crate::voronoi::arcs_cover_circle(&scratch.arcs))
        }
    };
    // grow the tested radius; neighbors within 2R decide coverage at R
    let mut hi = nn_dist.min(cutoff);
    let mut lo = 0.5 * nn_dist;
    loop {
        fetch(hi, scratch);
        if covered(hi, scratch)? {
            break;
        }
        lo = hi;
        if hi >= cutoff {
            return Ok(None);
        }
        hi = (2.0 * hi).min(cutoff);
    }
    // the neighbor list of the covered stage serves every radius below it
    while hi - lo > crate::voronoi::CIRCUMRADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if covered(mid, scratch)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Extreme atoms of a sample, with the empty conventions -inf / +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub max: f64,
    pub min: f64,
}

pub fn extreme_statistics(sample: &RescaledSample) -> Extremes {
    Extremes {
        max: sample.max_atom(),
        min: sample.min_atom(),
    }
}

/// Which derived process to run for intensity estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessKind {
    Inradius(InradiusVariant),
    Circumradius { alpha2: f64 },
}

/// Monte Carlo estimate of `E xi_t(B)` with its standard error.
pub fn intensity_estimate(
    density: &DensityModel,
    window: &Window,
    t: f64,
    ring: &crate::diagnostics::IntervalRing,
    reps: u32,
    master_seed: u64,
    phase: u16,
    kind: ProcessKind,
) -> Result<(f64, f64)> {
    let u_max = ring.upper_bound().unwrap_or(1.0).max(1.0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for replicate in 0..reps {
        let sample = match kind {
            ProcessKind::Inradius(variant) => {
                let pipeline = InradiusPipeline {
                    density,
                    window,
                    t,
                    u_max,
                    variant,
                };
                pipeline.run_with_retry(master_seed, phase, replicate)?.0
            }
            ProcessKind::Circumradius { alpha2 } => {
                let pipeline = CircumradiusPipeline {
                    density,
                    window,
                    t,
                    u_max,
                    alpha2,
                };
                pipeline.run_with_retry(master_seed, phase, replicate)?.0
            }
        };
        let count = ring.count(&sample)? as f64;
        sum += count;
        sum_sq += count * count;
    }
    let mean = sum / reps as f64;
    let var = (sum_sq / reps as f64 - mean * mean).max(0.0);
    Ok((mean, (var / reps as f64).sqrt()))
}
