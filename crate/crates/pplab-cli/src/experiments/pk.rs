//! Monte Carlo estimation of the cap-coverage probabilities p_k and the
//! derived constant alpha_2.

use super::{Outcome, RunError, PHASE_PK};
use crate::config::{ExperimentConfig, PkParams};
use crate::report::{CsvBundle, Metric, ScheduleEntry};
use pplab::rng::StreamSeed;
use pplab::voronoi::{alpha2, estimate_p_k};

pub fn run(config: &ExperimentConfig, p: &PkParams) -> Result<Outcome, RunError> {
    let mut metrics = Vec::new();
    let mut last_estimate: Option<(usize, f64)> = None;
    for (i, &k) in p.k_values.iter().enumerate() {
        let est = estimate_p_k(
            p.dim,
            k,
            p.samples,
            StreamSeed::for_replicate(config.seed, PHASE_PK, 0, i as u32),
        )?;
        metrics.push(Metric::estimated(
            format!("p_{k}"),
            est.estimate,
            est.std_error,
        ));
        if k == p.dim + 1 {
            let a = alpha2(p.dim, est.estimate)?;
            let rel_se = est.std_error / ((p.dim + 1) as f64 * est.estimate);
            metrics.push(Metric::estimated("alpha2", a, a * rel_se));
        }
        if let Some((prev_k, prev_p)) = last_estimate {
            // monotone in k up to Monte Carlo noise
            metrics.push(Metric::exact(
                format!("p_{k}_minus_p_{prev_k}"),
                est.estimate - prev_p,
            ));
        }
        last_estimate = Some((k, est.estimate));
    }
    let entry = ScheduleEntry {
        schedule_point: p.samples as f64,
        metrics,
        ks: vec![],
        gof: None,
        sandwich: None,
        dropped_atoms: 0,
        margin_retries: 0,
        pass: true,
    };
    Ok(Outcome {
        entries: vec![entry],
        bundle: CsvBundle::default(),
    })
}
