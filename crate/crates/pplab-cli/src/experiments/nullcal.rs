//! Null calibration: the gof battery applied to atoms sampled directly
//! from the target Poisson process must reject at most at its nominal
//! rate.

use super::{replicate_map, Outcome, RunError, PHASE_MAIN};
use crate::config::{build_rings, ExperimentConfig, NullCalibrationParams};
use crate::report::{CsvBundle, Metric, ScheduleEntry};
use pplab::diagnostics::{poisson_process_gof, IntervalRing, MeasureDescriptor};
use pplab::rng::StreamSeed;
use pplab::sample::{RescaledSample, SampleMeta};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

pub fn run(config: &ExperimentConfig, p: &NullCalibrationParams) -> Result<Outcome, RunError> {
    let rings = build_rings(&p.rings)?;
    let (lo, hi) = sampling_bounds(&rings, p.target);
    let total_mass = p.target.interval_mass(lo, hi);

    let rejections = replicate_map(config.workers, p.trials, |trial| {
        let seed = StreamSeed::for_replicate(config.seed, PHASE_MAIN, 0, trial);
        let mut rng = seed.rng();
        let dist = Poisson::new(total_mass).expect("positive mass");
        let samples: Vec<RescaledSample> = (0..p.replicates_per_trial)
            .map(|_| {
                let n = dist.sample(&mut rng) as usize;
                let atoms: Vec<f64> = (0..n)
                    .map(|_| inverse_cdf(p.target, lo, hi, total_mass, rng.random::<f64>()))
                    .collect();
                RescaledSample::new(
                    atoms,
                    SampleMeta {
                        transform: "direct-target".into(),
                        scale_param: total_mass,
                        seed,
                        sources: n as u64,
                        dropped: 0,
                        valid_below: None,
                    },
                )
            })
            .collect();
        let report = poisson_process_gof(&samples, &rings, p.target, p.k_max, p.level)?;
        Ok(u64::from(!report.pass))
    })?;

    let rejected: u64 = rejections.iter().sum();
    let rate = rejected as f64 / p.trials as f64;
    let se = (rate * (1.0 - rate) / p.trials as f64).sqrt();
    let rate_metric = Metric {
        name: "rejection_rate".into(),
        value: rate,
        std_error: Some(se),
        exact: false,
        target: Some(0.0),
        tolerance: Some(p.max_rejection_rate),
        pass: Some(rate <= p.max_rejection_rate),
    };
    let pass = rate <= p.max_rejection_rate;
    let entry = ScheduleEntry {
        schedule_point: p.trials as f64,
        metrics: vec![
            rate_metric,
            Metric::exact("trials", p.trials as f64),
            Metric::exact("replicates_per_trial", p.replicates_per_trial as f64),
            Metric::exact("level", p.level),
        ],
        ks: vec![],
        gof: None,
        sandwich: None,
        dropped_atoms: 0,
        margin_retries: 0,
        pass,
    };
    Ok(Outcome {
        entries: vec![entry],
        bundle: CsvBundle::default(),
    })
}

/// A bounded superset of all rings on which the target measure is finite.
fn sampling_bounds(rings: &[IntervalRing], target: MeasureDescriptor) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ring in rings {
        for &(a, b) in ring.intervals() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    match target {
        MeasureDescriptor::ExpTail => (lo - 0.5, hi + 0.5),
        // half-line measures vanish below zero
        MeasureDescriptor::LebesgueHalfline | MeasureDescriptor::PowerLaw { .. } => {
            (0.0, hi + 0.5)
        }
    }
}

/// Inverse-CDF sampling of one atom of the target measure restricted to
/// (lo, hi).
fn inverse_cdf(target: MeasureDescriptor, lo: f64, hi: f64, total: f64, v: f64) -> f64 {
    match target {
        MeasureDescriptor::LebesgueHalfline => lo + v * (hi - lo),
        MeasureDescriptor::ExpTail => {
            // mass((lo, u]) = e^{-lo} - e^{-u}
            -((-lo).exp() - v * total).ln()
        }
        MeasureDescriptor::PowerLaw { mu_w, exponent } => {
            // mass((0, u]) = mu_w u^e
            let e = exponent as f64;
            ((lo.max(0.0).powf(e) * mu_w + v * total) / mu_w).powf(1.0 / e)
        }
    }
}
