//! Convergence diagnostics: count distributions over interval rings, the
//! consecutive-probability statistic, Kolmogorov-Smirnov distances, and
//! the assembled goodness-of-fit battery.
//!
//! The consecutive-probability statistic `D_k = k P(N = k) - lambda(B)
//! P(N = k-1)` vanishes for every k exactly when the counts are Poisson;
//! the battery evaluates it on a family of open interval unions together
//! with a chi-square fit and the mean-intensity proxy for tightness.

use crate::error::{Error, Result};
use crate::sample::RescaledSample;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// A finite union of disjoint bounded open intervals, canonically sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRing {
    intervals: Vec<(f64, f64)>,
}

impl IntervalRing {
    /// Sorts and merges strictly overlapping intervals; intervals touching
    /// at an endpoint stay separate (their union misses the endpoint).
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidInterval { a, b });
            }
        }
        intervals.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn upper_bound(&self) -> Option<f64> {
        self.intervals.last().map(|&(_, b)| b)
    }

    /// Atom count of a sample on the ring, guarding the sample's exactness
    /// region.
    pub fn count(&self, sample: &RescaledSample) -> Result<usize> {
        if let (Some(valid), Some(upper)) = (sample.meta().valid_below, self.upper_bound()) {
            if upper > valid {
                return Err(Error::SupportExceeded);
            }
        }
        Ok(self
            .intervals
            .iter()
            .map(|&(a, b)| sample.count_open_interval(a, b))
            .sum())
    }
}

/// Closed-form limit intensity measures on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeasureDescriptor {
    /// Lebesgue measure restricted to the half line [0, inf).
    LebesgueHalfline,
    /// M([u, inf)) = exp(-u) on the whole line.
    ExpTail,
    /// M([0, u]) = mu_w * u^exponent on [0, inf).
    PowerLaw { mu_w: f64, exponent: u32 },
}

impl MeasureDescriptor {
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if a >= b {
            return 0.0;
        }
        match self {
            MeasureDescriptor::LebesgueHalfline => (b.max(0.0) - a.max(0.0)).max(0.0),
            MeasureDescriptor::ExpTail => (-a).exp() - (-b).exp(),
            MeasureDescriptor::PowerLaw { mu_w, exponent } => {
                mu_w * (b.max(0.0).powi(*exponent as i32) - a.max(0.0).powi(*exponent as i32))
            }
        }
    }

    pub fn ring_mass(&self, ring: &IntervalRing) -> f64 {
        ring.intervals()
            .iter()
            .map(|&(a, b)| self.interval_mass(a, b))
            .sum()
    }

    /// A bounded ring standing in for [lo, inf): truncated where the tail
    /// mass drops below `tail_tol`.
    pub fn truncated_halfline(&self, lo: f64, tail_tol: f64) -> Result<IntervalRing> {
        let hi = match self {
            MeasureDescriptor::ExpTail => -tail_tol.ln(),
            // the other measures are infinite on half lines; callers
            // choose an explicit cap instead
            _ => {
                return Err(Error::InvalidModel(
                    "truncated half line needs a finite-tail measure".into(),
                ))
            }
        };
        IntervalRing::new(vec![(lo, hi.max(lo + 1.0))])
    }
}

/// Limit laws the lab tests against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetLaw {
    PoissonProcess(MeasureDescriptor),
    /// P(max <= u) -> exp(-exp(-u)).
    Gumbel,
    /// P(min > u) -> exp(-scale * u^shape): CDF 1 - exp(-scale u^shape).
    WeibullMin { shape: u32, scale: f64 },
    /// Exp(1).
    ExpUnit,
}

impl TargetLaw {
    pub fn cdf(&self, u: f64) -> Result<f64> {
        match self {
            TargetLaw::Gumbel => Ok((-(-u).exp()).exp()),
            TargetLaw::WeibullMin { shape, scale } => Ok(if u <= 0.0 {
                0.0
            } else {
                1.0 - (-scale * u.powi(*shape as i32)).exp()
            }),
            TargetLaw::ExpUnit => Ok(if u <= 0.0 { 0.0 } else { 1.0 - (-u).exp() }),
            TargetLaw::PoissonProcess(_) => Err(Error::InvalidModel(
                "a Poisson process target has no scalar CDF".into(),
            )),
        }
    }
}

/// Empirical count distribution of replicates on one ring, with the
/// closed-form target mass lambda(B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    /// histogram[c] = number of replicates with count c.
    pub histogram: Vec<u64>,
    pub replicates: u64,
    pub lambda: f64,
}

impl EmpiricalLaw {
    pub fn from_counts(counts: impl IntoIterator<Item = usize>, lambda: f64) -> Self {
        let mut histogram: Vec<u64> = Vec::new();
        let mut replicates = 0u64;
        for c in counts {
            if c >= histogram.len() {
                histogram.resize(c + 1, 0);
            }
            histogram[c] += 1;
            replicates += 1;
        }
        Self {
            histogram,
            replicates,
            lambda,
        }
    }

    pub fn p_hat(&self, c: usize) -> f64 {
        self.histogram.get(c).copied().unwrap_or(0) as f64 / self.replicates as f64
    }

    pub fn mean(&self) -> f64 {
        self.histogram
            .iter()
            .enumerate()
            .map(|(c, &n)| c as f64 * n as f64)
            .sum::<f64>()
            / self.replicates as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.histogram
            .iter()
            .enumerate()
            .map(|(c, &n)| (c as f64 - m).powi(2) * n as f64)
            .sum::<f64>()
            / self.replicates as f64
    }
}

/// Tabulates ring counts across replicates; lambda(B) comes from the
/// closed-form descriptor, never from the data.
pub fn count_distribution(
    samples: &[RescaledSample],
    ring: &IntervalRing,
    descriptor: MeasureDescriptor,
) -> Result<EmpiricalLaw> {
    let mut counts = Vec::with_capacity(samples.len());
    for s in samples {
        counts.push(ring.count(s)?);
    }
    Ok(EmpiricalLaw::from_counts(
        counts,
        descriptor.ring_mass(ring),
    ))
}

/// The consecutive-probability statistic
/// `D_k = k P(N = k) - lambda P(N = k-1)` with its multinomial standard
/// error. Zero in expectation for every k exactly under Poisson counts.
pub fn consecutive_ratio_statistic(law: &EmpiricalLaw, k: u32) -> Result<(f64, f64)> {
    if law.replicates < 100 {
        return Err(Error::InsufficientReplicates {
            needed: 100,
            got: law.replicates,
        });
    }
    if k == 0 {
        return Err(Error::InvalidModel("D_k needs k >= 1".into()));
    }
    let kf = k as f64;
    let pk = law.p_hat(k as usize);
    let pk1 = law.p_hat(k as usize - 1);
    let d = kf * pk - law.lambda * pk1;
    let var = (kf * kf * pk * (1.0 - pk)
        + law.lambda * law.lambda * pk1 * (1.0 - pk1)
        + 2.0 * kf * law.lambda * pk * pk1)
        / law.replicates as f64;
    Ok((d, var.sqrt()))
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and
/// the target law.
pub fn ks_distance(values: &[f64], target: &TargetLaw) -> Result<(f64, usize)> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = target.cdf(x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok((d, sorted.len()))
}

/// One verdict of the goodness-of-fit battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofCheck {
    pub ring_index: usize,
    pub label: String,
    pub statistic: f64,
    pub std_error: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub checks: Vec<GofCheck>,
    pub level: f64,
    pub bonferroni_checks: usize,
    pub pass: bool,
    /// Any finite ring battery is a necessary-condition check only.
    pub necessary_condition_only: bool,
}

/// The full battery: per-(ring, k) consecutive-probability checks, a
/// per-ring chi-square against Poisson(lambda(B)), and the mean-intensity
/// tightness proxy, Bonferroni-adjusted to the requested level.
pub fn poisson_process_gof(
    samples: &[RescaledSample],
    rings: &[IntervalRing],
    descriptor: MeasureDescriptor,
    k_max: u32,
    level: f64,
) -> Result<GofReport> {
    if rings.len() < 3 {
        return Err(Error::InvalidModel(
            "the gof battery needs at least 3 rings".into(),
        ));
    }
    let n_checks = rings.len() * (k_max as usize + 2);
    let alpha = level / n_checks as f64;
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / 2.0);
    let mut checks = Vec::with_capacity(n_checks);
    for (ring_index, ring) in rings.iter().enumerate() {
        let law = count_distribution(samples, ring, descriptor)?;
        for k in 1..=k_max {
            let (d, se) = consecutive_ratio_statistic(&law, k)?;
            checks.push(GofCheck {
                ring_index,
                label: format!("D_{k}"),
                statistic: d,
                std_error: Some(se),
                threshold: z * se,
                pass: d.abs() <= z * se,
            });
        }
        let (chi, p_value) = poisson_chi_square(&law, k_max as usize);
        checks.push(GofCheck {
            ring_index,
            label: "chi-square".into(),
            statistic: chi,
            std_error: None,
            threshold: alpha,
            // the statistic column holds chi^2; the verdict uses p >= alpha
            pass: p_value >= alpha,
        });
        let mean = law.mean();
        let se_mean = (law.variance() / law.replicates as f64).sqrt();
        checks.push(GofCheck {
            ring_index,
            label: "mean-intensity".into(),
            statistic: mean - law.lambda,
            std_error: Some(se_mean),
            threshold: z * se_mean,
            pass: (mean - law.lambda).abs() <= z * se_mean,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(GofReport {
        checks,
        level,
        bonferroni_checks: n_checks,
        pass,
        necessary_condition_only: true,
    })
}

/// Chi-square of the count histogram against Poisson(lambda), tail bins
/// merged until every expected cell count is at least 5.
/// Returns (statistic, p-value).
pub fn poisson_chi_square(law: &EmpiricalLaw, k_max: usize) -> (f64, f64) {
    let r = law.replicates as f64;
    let lambda = law.lambda;
    // expected bin masses for 0..=k_max and the upper tail
    let mut probs = Vec::with_capacity(k_max + 2);
    let mut pmf = (-lambda).exp();
    let mut cumulative = 0.0;
    for c in 0..=k_max {
        if c > 0 {
            pmf *= lambda / c as f64;
        }
        probs.push(pmf);
        cumulative += pmf;
    }
    probs.push((1.0 - cumulative).max(0.0));
    let mut observed: Vec<f64> = (0..=k_max).map(|c| law.histogram.get(c).copied().unwrap_or(0) as f64).collect();
    let tail: u64 = law
        .histogram
        .iter()
        .skip(k_max + 1)
        .sum();
    observed.push(tail as f64);
    // merge bins from the tail down until expected counts reach 5
    let mut bins: Vec<(f64, f64)> = probs
        .iter()
        .zip(&observed)
        .map(|(&p, &o)| (p * r, o))
        .collect();
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for bin in bins.drain(..) {
        merged.push(bin);
        loop {
            let last = *merged.last().unwrap();
            if last.0 >= 5.0 || merged.len() < 2 {
                break;
            }
            merged.pop();
            let prev = merged.last_mut().unwrap();
            prev.0 += last.0;
            prev.1 += last.1;
        }
    }
    // a leading under-populated bin merges forward
    while merged.len() > 1 && merged[0].0 < 5.0 {
        let first = merged.remove(0);
        merged[0].0 += first.0;
        merged[0].1 += first.1;
    }
    if merged.len() < 2 {
        return (0.0, 1.0);
    }
    let chi: f64 = merged
        .iter()
        .map(|&(e, o)| if e > 0.0 { (o - e) * (o - e) / e } else { 0.0 })
        .sum();
    let df = (merged.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).expect("positive df").cdf(chi);
    (chi, p)
}

/// Per-replicate minimum statistics of one coupled sandwich triple, each
/// layer measured with its own intensity measure and already multiplied by
/// `alpha_2 t^((d+2)/(d+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichMins {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub u: f64,
    /// P(s * stat > u) and its exponential upper bound.
    pub upper_tail: f64,
    pub upper_bound: f64,
    pub upper_pass: bool,
    /// P(r * stat > u) and its exponential lower bound.
    pub lower_tail: f64,
    pub lower_bound: f64,
    pub lower_pass: bool,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub pass: bool,
}

/// Checks the one-sided exponential bounds on the tail of the scaled
/// minimum statistic of the middle layer:
/// `P(s stat > u) <= exp(-s theta_w u^(d+1)) + tol` and
/// `P(r stat > u) >= exp(-r theta_w u^(d+1)) - tol` with `tol = se_mult * se`.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_bound_check(
    mins: &[SandwichMins],
    s: f64,
    r: f64,
    theta_w: f64,
    dim: usize,
    u_grid: &[f64],
    se_mult: f64,
) -> Result<SandwichReport> {
    if mins.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::ProbabilityDomain { p: s });
    }
    if r < 1.0 {
        return Err(Error::InvalidModel("sandwich needs r >= 1".into()));
    }
    let n = mins.len() as f64;
    let exponent = (dim + 1) as i32;
    let mut rows = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let upper_tail =
            mins.iter().filter(|m| s * m.mid > u).count() as f64 / n;
        let lower_tail =
            mins.iter().filter(|m| r * m.mid > u).count() as f64 / n;
        let se = |p: f64| (p * (1.0 - p) / n).sqrt();
        let std_error = se(upper_tail).max(se(lower_tail));
        let upper_bound = (-s * theta_w * u.powi(exponent)).exp();
        let lower_bound = (-r * theta_w * u.powi(exponent)).exp();
        let upper_pass = upper_tail <= upper_bound + se_mult * se(upper_tail).max(1.0 / n);
        let lower_pass = lower_tail >= lower_bound - se_mult * se(lower_tail).max(1.0 / n);
        rows.push(SandwichRow {
            u,
            upper_tail,
            upper_bound,
            upper_pass,
            lower_tail,
            lower_bound,
            lower_pass,
            std_error,
        });
    }
    let pass = rows.iter().all(|row| row.upper_pass && row.lower_pass);
    Ok(SandwichReport { rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use crate::sample::SampleMeta;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    fn meta() -> SampleMeta {
        SampleMeta {
            transform: "test".into(),
            scale_param: 1.0,
            seed: StreamSeed::new(0, 0),
            sources: 0,
            dropped: 0,
            valid_below: None,
        }
    }

    #[test]
    fn ring_canonicalization() {
        let ring = IntervalRing::new(vec![(1.0, 2.5), (0.0, 1.5), (3.0, 4.0)]).unwrap();
        assert_eq!(ring.intervals(), &[(0.0, 2.5), (3.0, 4.0)]);
        // touching intervals stay separate
        let ring = IntervalRing::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(ring.intervals(), &[(0.0, 1.0), (1.0, 2.0)]);
        assert!(IntervalRing::new(vec![(2.0, 1.0)]).is_err());
        assert!(IntervalRing::new(vec![(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn ring_counts_open_intervals() {
        let ring = IntervalRing::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let s = RescaledSample::new(vec![0.5, 1.0, 1.5], meta());
        // the atom at exactly 1.0 is in neither open interval
        assert_eq!(ring.count(&s).unwrap(), 2);
    }

    #[test]
    fn ring_respects_sample_validity() {
        let mut m = meta();
        m.valid_below = Some(2.0);
        let s = RescaledSample::new(vec![0.5], m);
        let ok = IntervalRing::new(vec![(0.0, 1.5)]).unwrap();
        assert_eq!(ok.count(&s).unwrap(), 1);
        let too_far = IntervalRing::new(vec![(0.0, 3.0)]).unwrap();
        assert!(matches!(too_far.count(&s), Err(Error::SupportExceeded)));
    }

    #[test]
    fn measure_descriptors() {
        assert_relative_eq!(
            MeasureDescriptor::LebesgueHalfline.interval_mass(0.5, 2.5),
            2.0
        );
        assert_relative_eq!(
            MeasureDescriptor::LebesgueHalfline.interval_mass(-1.0, 1.0),
            1.0
        );
        let tail = MeasureDescriptor::ExpTail;
        let ring = IntervalRing::new(vec![(0.0, 50.0)]).unwrap();
        assert_relative_eq!(tail.ring_mass(&ring), 1.0, max_relative = 1e-15);
        let pw = MeasureDescriptor::PowerLaw { mu_w: 1.0, exponent: 2 };
        assert_relative_eq!(pw.interval_mass(0.0, 1.0), 1.0);
        assert_relative_eq!(pw.interval_mass(1.0, 2.0), 3.0);
        // ring additivity on disjoint pieces
        let split = IntervalRing::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_relative_eq!(pw.ring_mass(&split), pw.interval_mass(0.0, 2.0));
    }

    #[test]
    fn truncated_halfline_mass_near_one() {
        let ring = MeasureDescriptor::ExpTail
            .truncated_halfline(0.0, 1e-6)
            .unwrap();
        let mass = MeasureDescriptor::ExpTail.ring_mass(&ring);
        assert!((mass - 1.0).abs() < 1e-5);
    }

    #[test]
    fn d_k_vanishes_for_exact_poisson() {
        let lambda = 2.0;
        let mut rng = StreamSeed::new(42, 0).rng();
        let dist = Poisson::new(lambda).unwrap();
        let counts: Vec<usize> = (0..200_000).map(|_| dist.sample(&mut rng) as usize).collect();
        let law = EmpiricalLaw::from_counts(counts, lambda);
        for k in 1..=6 {
            let (d, se) = consecutive_ratio_statistic(&law, k).unwrap();
            assert!(d.abs() <= 4.0 * se, "k={k}: D={d}, se={se}");
        }
    }

    #[test]
    fn d_k_point_mass_example() {
        // counts identically 1, lambda = 1: D_1 = 1
        let law = EmpiricalLaw::from_counts(std::iter::repeat(1).take(1000), 1.0);
        let (d, _) = consecutive_ratio_statistic(&law, 1).unwrap();
        assert_relative_eq!(d, 1.0);
    }

    #[test]
    fn d_k_binomial_example() {
        // counts ~ Binomial(2, 1/2), lambda = 1:
        // D_2 = 2 * 1/4 - 1 * 1/2 = 0, D_1 = 1/2 - 1/4 = 1/4
        let counts = [0usize, 1, 1, 2];
        let law = EmpiricalLaw::from_counts(
            counts.iter().copied().cycle().take(4000),
            1.0,
        );
        let (d2, _) = consecutive_ratio_statistic(&law, 2).unwrap();
        assert_relative_eq!(d2, 0.0);
        let (d1, _) = consecutive_ratio_statistic(&law, 1).unwrap();
        assert_relative_eq!(d1, 0.25);
    }

    #[test]
    fn d_k_needs_replicates() {
        let law = EmpiricalLaw::from_counts(std::iter::repeat(1).take(50), 1.0);
        assert!(matches!(
            consecutive_ratio_statistic(&law, 1),
            Err(Error::InsufficientReplicates { .. })
        ));
    }

    #[test]
    fn ks_exact_members() {
        // a single value at the target median has KS distance 1/2
        let (d, n) = ks_distance(&[std::f64::consts::LN_2], &TargetLaw::ExpUnit).unwrap();
        assert_eq!(n, 1);
        assert_relative_eq!(d, 0.5, epsilon = 1e-12);
        // all-zero values against Gumbel: KS = 1 - exp(-1)
        let zeros = vec![0.0; 100];
        let (d, _) = ks_distance(&zeros, &TargetLaw::Gumbel).unwrap();
        assert_relative_eq!(d, 1.0 - (-1.0f64).exp(), epsilon = 1e-12);
        assert!(ks_distance(&[], &TargetLaw::ExpUnit).is_err());
    }

    #[test]
    fn ks_calibrated_on_exponential_draws() {
        let mut rng = StreamSeed::new(7, 0).rng();
        let values: Vec<f64> = (0..5000)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let (d, n) = ks_distance(&values, &TargetLaw::ExpUnit).unwrap();
        // 1% asymptotic critical value
        assert!(d <= 1.63 / (n as f64).sqrt(), "KS = {d}");
    }

    #[test]
    fn gof_passes_on_synthetic_poisson_process() {
        // atoms sampled directly from the Lebesgue half-line target
        let mut rng = StreamSeed::new(11, 0).rng();
        let horizon = 5.0;
        let dist = Poisson::new(horizon).unwrap();
        let samples: Vec<RescaledSample> = (0..4000)
            .map(|_| {
                let n = dist.sample(&mut rng) as usize;
                let atoms: Vec<f64> =
                    (0..n).map(|_| rng.random::<f64>() * horizon).collect();
                RescaledSample::new(atoms, meta())
            })
            .collect();
        let rings = vec![
            IntervalRing::new(vec![(0.0, 1.0)]).unwrap(),
            IntervalRing::new(vec![(1.0, 2.0)]).unwrap(),
            IntervalRing::new(vec![(0.0, 0.6), (1.2, 1.8)]).unwrap(),
            IntervalRing::new(vec![(0.3, 1.7)]).unwrap(),
        ];
        let report = poisson_process_gof(
            &samples,
            &rings,
            MeasureDescriptor::LebesgueHalfline,
            6,
            0.01,
        )
        .unwrap();
        assert!(report.pass, "{:#?}", report.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert!(report.necessary_condition_only);
    }

    #[test]
    fn gof_rejects_duplicated_atoms() {
        // every atom doubled: counts are 2 * Poisson, mean matches but
        // the count law is not Poisson
        let mut rng = StreamSeed::new(13, 0).rng();
        let dist = Poisson::new(2.5).unwrap();
        let samples: Vec<RescaledSample> = (0..4000)
            .map(|_| {
                let n = dist.sample(&mut rng) as usize;
                let mut atoms = Vec::with_capacity(2 * n);
                for _ in 0..n {
                    let a = rng.random::<f64>() * 5.0;
                    atoms.push(a);
                    atoms.push(a + 1e-12);
                }
                RescaledSample::new(atoms, meta())
            })
            .collect();
        let rings = vec![
            IntervalRing::new(vec![(0.0, 1.0)]).unwrap(),
            IntervalRing::new(vec![(1.0, 2.0)]).unwrap(),
            IntervalRing::new(vec![(0.0, 3.0)]).unwrap(),
        ];
        let report = poisson_process_gof(
            &samples,
            &rings,
            MeasureDescriptor::LebesgueHalfline,
            6,
            0.01,
        )
        .unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn chi_square_merges_small_bins() {
        let mut rng = StreamSeed::new(17, 0).rng();
        let dist = Poisson::new(0.3).unwrap();
        let counts: Vec<usize> = (0..2000).map(|_| dist.sample(&mut rng) as usize).collect();
        let law = EmpiricalLaw::from_counts(counts, 0.3);
        let (chi, p) = poisson_chi_square(&law, 6);
        assert!(chi >= 0.0);
        assert!(p > 1e-6, "null chi-square rejected: p = {p}");
    }

    #[test]
    fn sandwich_degenerate_bounds() {
        // s = r = 1: both bounds collapse to the same exponential
        let mins: Vec<SandwichMins> = (0..1000)
            .map(|i| {
                let v = (i as f64 + 0.5) / 1000.0;
                // stat with P(stat > u) = exp(-u^2): stat = sqrt(-ln V)
                let stat = (-(v.ln())).sqrt();
                SandwichMins {
                    lower: stat,
                    mid: stat,
                    upper: stat,
                }
            })
            .collect();
        let report =
            sandwich_bound_check(&mins, 1.0, 1.0, 1.0, 1, &[0.0, 0.5, 1.0], 3.0).unwrap();
        assert!(report.pass, "{:#?}", report.rows);
        // at u = 0 both tails and bounds are 1
        assert_relative_eq!(report.rows[0].upper_tail, 1.0);
        assert_relative_eq!(report.rows[0].upper_bound, 1.0);
    }
}
