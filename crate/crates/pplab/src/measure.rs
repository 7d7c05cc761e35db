//! Density models, ball masses, and the radius solvers built on them.
//!
//! A `DensityModel` is a density f with declared support box A and exact
//! bounds f_min, f_max on A. Ball masses mu(B(x, r)) use a closed form
//! where one exists (constant and linear densities in every dimension,
//! step densities on the line) and adaptive quadrature otherwise.

use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, BoxRegion, ConvexPolygon};
use crate::quadrature;
use serde::{Deserialize, Serialize};

/// Relative tolerance for quadrature ball masses.
pub const MASS_REL_TOL: f64 = 1e-8;
/// Absolute radius tolerance for the monotone bisection inverters.
pub const RADIUS_TOL: f64 = 1e-12;

/// Piecewise-constant density on an axis-aligned grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDensity {
    /// Per-axis sorted breakpoints; axis k has `breaks[k].len() - 1` cells.
    breaks: Vec<Vec<f64>>,
    /// Cell values in row-major order (last axis fastest).
    values: Vec<f64>,
}

impl StepDensity {
    pub fn new(breaks: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() > 3 {
            return Err(Error::InvalidModel("step grid needs 1..=3 axes".into()));
        }
        let mut cells = 1usize;
        for axis in &breaks {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidModel(
                    "step breakpoints must be strictly increasing with >= 2 entries".into(),
                ));
            }
            cells *= axis.len() - 1;
        }
        if values.len() != cells {
            return Err(Error::InvalidModel(format!(
                "step grid has {cells} cells but {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidModel(
                "step values must be finite and non-negative".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    fn dim(&self) -> usize {
        self.breaks.len()
    }

    fn grid_box(&self) -> BoxRegion {
        BoxRegion::new(
            self.breaks.iter().map(|b| b[0]).collect(),
            self.breaks.iter().map(|b| *b.last().unwrap()).collect(),
        )
        .expect("validated breakpoints")
    }

    fn cell_index(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for (axis, &v) in self.breaks.iter().zip(x) {
            if v < axis[0] || v > *axis.last().unwrap() {
                return None;
            }
            // rightmost cell whose left edge is <= v
            let k = match axis.binary_search_by(|b| b.partial_cmp(&v).unwrap()) {
                Ok(j) => j.min(axis.len() - 2),
                Err(j) => j - 1,
            };
            idx = idx * (axis.len() - 1) + k;
        }
        Some(idx)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.cell_index(x).map_or(0.0, |i| self.values[i])
    }

    /// Exact integral over an axis-aligned box (sum of cell overlaps).
    fn box_integral(&self, region: &BoxRegion) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        let counts: Vec<usize> = self.breaks.iter().map(|b| b.len() - 1).collect();
        let mut cell = vec![0usize; d];
        loop {
            let mut overlap = 1.0;
            let mut idx = 0usize;
            for k in 0..d {
                let lo = self.breaks[k][cell[k]].max(region.lo()[k]);
                let hi = self.breaks[k][cell[k] + 1].min(region.hi()[k]);
                overlap *= (hi - lo).max(0.0);
                idx = idx * counts[k] + cell[k];
            }
            total += self.values[idx] * overlap;
            // advance the multi-index
            let mut k = d;
            loop {
                if k == 0 {
                    return total;
                }
                k -= 1;
                cell[k] += 1;
                if cell[k] < counts[k] {
                    break;
                }
                cell[k] = 0;
            }
        }
    }

    fn min_max_over_box(&self, region: &BoxRegion) -> (f64, f64) {
        let d = self.dim();
        let counts: Vec<usize> = self.breaks.iter().map(|b| b.len() - 1).collect();
        let mut cell = vec![0usize; d];
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        loop {
            let mut overlap = 1.0;
            let mut idx = 0usize;
            for k in 0..d {
                let lo = self.breaks[k][cell[k]].max(region.lo()[k]);
                let hi = self.breaks[k][cell[k] + 1].min(region.hi()[k]);
                overlap *= (hi - lo).max(0.0);
                idx = idx * counts[k] + cell[k];
            }
            if overlap > 0.0 {
                mn = mn.min(self.values[idx]);
                mx = mx.max(self.values[idx]);
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return (mn, mx);
                }
                k -= 1;
                cell[k] += 1;
                if cell[k] < counts[k] {
                    break;
                }
                cell[k] = 0;
            }
        }
    }
}

/// The density families the lab understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityKind {
    /// f = c.
    Constant { c: f64 },
    /// f(x) = max(0, a + b * x_1); the clip must be inactive on the support.
    Linear { a: f64, b: f64 },
    /// Piecewise constant on a grid covering the support.
    Step(StepDensity),
}

/// A density with support box, exact bounds, and optional closed-form masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    dim: usize,
    kind: DensityKind,
    support: BoxRegion,
    scale: f64,
    f_min: f64,
    f_max: f64,
}

impl DensityModel {
    pub fn new(kind: DensityKind, support: BoxRegion) -> Result<Self> {
        let dim = support.dim();
        let (raw_min, raw_max) = match &kind {
            DensityKind::Constant { c } => {
                if !c.is_finite() || *c <= 0.0 {
                    return Err(Error::InvalidModel("constant density must be positive".into()));
                }
                (*c, *c)
            }
            DensityKind::Linear { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidModel("linear coefficients must be finite".into()));
                }
                let at_lo = a + b * support.lo()[0];
                let at_hi = a + b * support.hi()[0];
                let mn = at_lo.min(at_hi);
                if mn <= 0.0 {
                    return Err(Error::InvalidModel(
                        "linear density must stay positive on the support (clip inactive)".into(),
                    ));
                }
                (mn, at_lo.max(at_hi))
            }
            DensityKind::Step(step) => {
                if step.dim() != dim {
                    return Err(Error::InvalidModel(
                        "step grid dimension does not match the support".into(),
                    ));
                }
                if !step.grid_box().contains_box(&support) {
                    return Err(Error::InvalidModel(
                        "step grid must cover the support box".into(),
                    ));
                }
                let (mn, mx) = step.min_max_over_box(&support);
                if mn <= 0.0 {
                    return Err(Error::InvalidModel(
                        "step density must be positive on the support".into(),
                    ));
                }
                (mn, mx)
            }
        };
        Ok(Self {
            dim,
            kind,
            support,
            scale: 1.0,
            f_min: raw_min,
            f_max: raw_max,
        })
    }

    /// The same density multiplied by `factor` (e.g. 1/mu(W) normalization).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidModel("scale factor must be positive".into()));
        }
        let mut out = self.clone();
        out.scale = self.scale * factor;
        out.f_min = self.f_min * factor;
        out.f_max = self.f_max * factor;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &BoxRegion {
        &self.support
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let raw = match &self.kind {
            DensityKind::Constant { c } => *c,
            DensityKind::Linear { a, b } => (a + b * x[0]).max(0.0),
            DensityKind::Step(step) => step.eval(x),
        };
        self.scale * raw
    }

    /// Lipschitz constant, where one is declared by the family.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Constant { .. } => Some(0.0),
            DensityKind::Linear { b, .. } => Some(self.scale * b.abs()),
            DensityKind::Step(_) => None,
        }
    }

    /// Closed-form ball mass, when the family admits one.
    pub fn closed_form_ball_mass(&self, center: &[f64], radius: f64) -> Option<f64> {
        let kd = unit_ball_volume(self.dim);
        match &self.kind {
            DensityKind::Constant { c } => {
                Some(self.scale * c * kd * radius.powi(self.dim as i32))
            }
            DensityKind::Linear { a, b } => {
                // the odd part integrates out over the ball
                Some(self.scale * (a + b * center[0]) * kd * radius.powi(self.dim as i32))
            }
            DensityKind::Step(step) if self.dim == 1 => {
                let interval = BoxRegion::new(vec![center[0] - radius], vec![center[0] + radius])
                    .ok()?;
                Some(self.scale * step.box_integral(&interval))
            }
            DensityKind::Step(_) => None,
        }
    }

    fn quadrature_ball_mass(&self, center: &[f64], radius: f64) -> f64 {
        quadrature::ball_integral(&|x: &[f64]| self.evaluate(x), center, radius, MASS_REL_TOL)
    }
}

/// mu(B(x, r)): closed form when available, adaptive quadrature otherwise.
pub fn ball_measure(density: &DensityModel, center: &[f64], radius: f64) -> Result<f64> {
    if radius < 0.0 || !radius.is_finite() {
        return Err(Error::InvalidModel(format!("invalid radius {radius}")));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    if !density.support().contains_ball(center, radius) {
        return Err(Error::BallEscapesSupport { radius });
    }
    match density.closed_form_ball_mass(center, radius) {
        Some(m) => Ok(m),
        None => {
            let m = density.quadrature_ball_mass(center, radius);
            if !m.is_finite() {
                return Err(Error::NonFiniteDensity {
                    at: center.to_vec(),
                });
            }
            Ok(m)
        }
    }
}

/// Force the quadrature path regardless of closed forms (used for
/// cross-validation of the closed forms).
pub fn ball_measure_quadrature(density: &DensityModel, center: &[f64], radius: f64) -> Result<f64> {
    if !density.support().contains_ball(center, radius) {
        return Err(Error::BallEscapesSupport { radius });
    }
    Ok(density.quadrature_ball_mass(center, radius))
}

/// g(x, u): the unique r with mu(B(x, r)) = u, by monotone bisection.
pub fn invert_ball_measure(density: &DensityModel, center: &[f64], mass: f64) -> Result<f64> {
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(Error::InvalidModel(format!("invalid mass {mass}")));
    }
    if mass == 0.0 {
        return Ok(0.0);
    }
    let r_max = density.support().boundary_distance(center);
    let reach = ball_measure(density, center, r_max)?;
    if mass > reach {
        return Err(Error::MassExceedsReach { mass, reach });
    }
    let (mut lo, mut hi) = (0.0, r_max);
    while hi - lo > RADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if ball_measure(density, center, mid)? < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The pair (v_t(x,u), q_t(x,u)) solving
/// `t mu(B(x, 2v)) = u + log t` and `2^d t mu(B(x, q)) = u + log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRadii {
    pub v: f64,
    pub q: f64,
}

pub fn threshold_radii(
    density: &DensityModel,
    center: &[f64],
    u: f64,
    t: f64,
) -> Result<ThresholdRadii> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidModel(format!("invalid t {t}")));
    }
    let target = u + t.ln();
    if target <= 0.0 {
        return Err(Error::BelowThreshold {
            t,
            u,
            detail: "u + log(t) must be positive".into(),
        });
    }
    let solve = |mass: f64| -> Result<f64> {
        invert_ball_measure(density, center, mass).map_err(|e| match e {
            Error::MassExceedsReach { mass, reach } => Error::BelowThreshold {
                t,
                u,
                detail: format!(
                    "needed ball mass {mass} exceeds reach {reach} inside the support"
                ),
            },
            other => other,
        })
    };
    let two_v = solve(target / t)?;
    let q = solve(target / (f64::powi(2.0, density.dim() as i32) * t))?;
    Ok(ThresholdRadii { v: 0.5 * two_v, q })
}

/// Upper bound of the threshold radii from the density minimum:
/// `((u + log t) / (2^d f_min k_d t))^(1/d)`.
pub fn threshold_radii_bound(density: &DensityModel, u: f64, t: f64) -> f64 {
    let d = density.dim();
    let target = u + t.ln();
    (target / (f64::powi(2.0, d as i32) * density.f_min() * unit_ball_volume(d) * t))
        .powf(1.0 / d as f64)
}

/// A compact observation window inside the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindowRegion {
    Box(BoxRegion),
    Polygon(ConvexPolygon),
}

impl WindowRegion {
    pub fn dim(&self) -> usize {
        match self {
            WindowRegion::Box(b) => b.dim(),
            WindowRegion::Polygon(_) => 2,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            WindowRegion::Box(b) => b.contains(x),
            WindowRegion::Polygon(p) => p.contains(x),
        }
    }

    pub fn bounding_box(&self) -> BoxRegion {
        match self {
            WindowRegion::Box(b) => b.clone(),
            WindowRegion::Polygon(p) => p.bounding_box(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            WindowRegion::Box(b) => b.volume(),
            WindowRegion::Polygon(p) => p.area(),
        }
    }
}

/// Window with its measure under a fixed density. Only convex regions are
/// constructible, so every window is safe for the circumradius pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    region: WindowRegion,
    mu: f64,
    margin: f64,
}

impl Window {
    pub fn new(region: WindowRegion, density: &DensityModel) -> Result<Self> {
        if region.dim() != density.dim() {
            return Err(Error::InvalidModel(
                "window and density dimensions differ".into(),
            ));
        }
        let margin = match &region {
            WindowRegion::Box(b) => {
                let a = density.support();
                let mut m = f64::INFINITY;
                for k in 0..b.dim() {
                    m = m.min(b.lo()[k] - a.lo()[k]).min(a.hi()[k] - b.hi()[k]);
                }
                m
            }
            WindowRegion::Polygon(p) => p
                .vertices()
                .iter()
                .map(|v| density.support().boundary_distance(v))
                .fold(f64::INFINITY, f64::min),
        };
        if margin <= 0.0 {
            return Err(Error::MarginExceedsSupport {
                required: 0.0,
                available: margin,
            });
        }
        let mu = region_measure(density, &region)?;
        Ok(Self { region, mu, margin })
    }

    pub fn region(&self) -> &WindowRegion {
        &self.region
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Distance between the window and the support boundary.
    pub fn support_margin(&self) -> f64 {
        self.margin
    }

    pub fn is_convex(&self) -> bool {
        true
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.region.contains(x)
    }
}

/// Exact measure of a window region under the density.
pub fn region_measure(density: &DensityModel, region: &WindowRegion) -> Result<f64> {
    let raw = match (region, density.kind()) {
        (WindowRegion::Box(b), DensityKind::Constant { c }) => c * b.volume(),
        (WindowRegion::Box(b), DensityKind::Linear { a, b: slope }) => {
            let mid = 0.5 * (b.lo()[0] + b.hi()[0]);
            (a + slope * mid) * b.volume()
        }
        (WindowRegion::Box(b), DensityKind::Step(step)) => step.box_integral(b),
        (WindowRegion::Polygon(p), DensityKind::Constant { c }) => c * p.area(),
        (WindowRegion::Polygon(p), DensityKind::Linear { a, b: slope }) => {
            (a + slope * p.centroid()[0]) * p.area()
        }
        (WindowRegion::Polygon(_), DensityKind::Step(_)) => {
            return Err(Error::InvalidModel(
                "step densities require box windows".into(),
            ))
        }
    };
    Ok(density.scale() * raw)
}

/// Exact (min, max) of the density over a window region.
pub fn density_bounds(density: &DensityModel, window: &Window) -> Result<(f64, f64)> {
    let (mn, mx) = match (window.region(), density.kind()) {
        (_, DensityKind::Constant { c }) => (*c, *c),
        (WindowRegion::Box(b), DensityKind::Linear { a, b: slope }) => {
            let at_lo = a + slope * b.lo()[0];
            let at_hi = a + slope * b.hi()[0];
            (at_lo.min(at_hi), at_lo.max(at_hi))
        }
        (WindowRegion::Polygon(p), DensityKind::Linear { a, b: slope }) => {
            // linear over a convex polygon: extremes at vertices
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for v in p.vertices() {
                let val = a + slope * v[0];
                mn = mn.min(val);
                mx = mx.max(val);
            }
            (mn, mx)
        }
        (WindowRegion::Box(b), DensityKind::Step(step)) => step.min_max_over_box(b),
        (WindowRegion::Polygon(_), DensityKind::Step(_)) => {
            return Err(Error::InvalidModel(
                "step densities require box windows".into(),
            ))
        }
    };
    let beta = density.scale() * mn;
    let sup = density.scale() * mx;
    if beta <= 0.0 {
        return Err(Error::NonpositiveMinimum { beta });
    }
    Ok((beta, sup))
}
