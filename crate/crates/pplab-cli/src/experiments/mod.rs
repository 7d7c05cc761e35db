//! Experiment drivers: seeded, worker-count-independent replicate loops
//! feeding the diagnostics, one module per experiment kind.

pub mod circumradius;
pub mod inradius;
pub mod nullcal;
pub mod pk;
pub mod runs;
pub mod sandwich;

use crate::config::{ConfigError, ExperimentConfig, ExperimentSpec};
use crate::report::{CsvBundle, Report, ScheduleEntry};
use rayon::prelude::*;
use thiserror::Error;

/// Stream phases keep pipeline stages on disjoint random streams.
pub const PHASE_MAIN: u16 = 0;
pub const PHASE_PK: u16 = 1;
pub const PHASE_HYPOTHESIS: u16 = 2;

/// Default battery configuration (level with Bonferroni, D_k depth).
pub const GOF_LEVEL: f64 = 0.01;
pub const GOF_K_MAX: u32 = 6;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(#[from] pplab::Error),
}

/// Runs `f` over replicate indices on a dedicated pool. The collected
/// output order is the replicate order, so reductions do not depend on
/// the worker count.
pub fn replicate_map<T: Send>(
    workers: usize,
    replicates: u32,
    f: impl Fn(u32) -> Result<T, pplab::Error> + Sync,
) -> Result<Vec<T>, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let out: Result<Vec<T>, pplab::Error> =
        pool.install(|| (0..replicates).into_par_iter().map(&f).collect());
    Ok(out?)
}

pub struct Outcome {
    pub entries: Vec<ScheduleEntry>,
    pub bundle: CsvBundle,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<(Report, CsvBundle), RunError> {
    config.validate()?;
    let start = std::time::Instant::now();
    let outcome = match &config.experiment {
        ExperimentSpec::Runs(p) => runs::run(config, p)?,
        ExperimentSpec::Inradius(p) | ExperimentSpec::InradiusHat(p) => {
            inradius::run(config, p, config.experiment.inradius_variant().unwrap())?
        }
        ExperimentSpec::Circumradius(p) => circumradius::run(config, p)?,
        ExperimentSpec::Sandwich(p) => sandwich::run(config, p)?,
        ExperimentSpec::PkEstimate(p) => pk::run(config, p)?,
        ExperimentSpec::NullCalibration(p) => nullcal::run(config, p)?,
    };
    let report = Report::new(
        config.clone(),
        outcome.entries,
        start.elapsed().as_secs_f64(),
    );
    Ok((report, outcome.bundle))
}

/// Lines describing the resolved schedule without running it.
pub fn describe(config: &ExperimentConfig) -> Result<Vec<String>, RunError> {
    config.validate()?;
    let mut lines = vec![
        format!("experiment: {}", config.experiment.kind_name()),
        format!("seed: {}", config.seed),
        format!("replicates: {}", config.replicates),
        format!(
            "workers: {}",
            if config.workers == 0 {
                "auto".to_string()
            } else {
                config.workers.to_string()
            }
        ),
    ];
    match &config.experiment {
        ExperimentSpec::Runs(p) => {
            let model = p.model.build(p.k)?;
            for &n in &p.n_schedule {
                let y = model.y_n(n).map_err(RunError::Simulation)?;
                let horizon = pplab::runs::horizon_for_intervals(
                    p.u_max,
                    y,
                    model.dependence_range(),
                    p.k,
                )
                .max(pplab::runs::horizon_for_censoring(y, p.censor_prob, p.k));
                lines.push(format!("n = {n}: y_n = {y:.3e}, horizon = {horizon} bits"));
            }
            lines.push(format!("rings: {}", p.rings.len()));
        }
        ExperimentSpec::Inradius(p) | ExperimentSpec::InradiusHat(p) => {
            for &t in &p.schedule {
                lines.push(format!("t = {t}: u_max = {}, rings = {}", p.u_max, p.rings.len()));
            }
        }
        ExperimentSpec::Circumradius(p) => {
            for &t in &p.schedule {
                lines.push(format!(
                    "t = {t}: u_max = {}, pk_samples = {}",
                    p.u_max, p.pk_samples
                ));
            }
        }
        ExperimentSpec::Sandwich(p) => {
            for &t in &p.schedule {
                lines.push(format!(
                    "t = {t}: s = {}, r = {}, u_grid = {:?}",
                    p.s, p.r, p.u_grid
                ));
            }
        }
        ExperimentSpec::PkEstimate(p) => {
            lines.push(format!(
                "d = {}, k values {:?}, {} samples each",
                p.dim, p.k_values, p.samples
            ));
        }
        ExperimentSpec::NullCalibration(p) => {
            lines.push(format!(
                "{} trials x {} replicates, level {}, target {:?}",
                p.trials, p.replicates_per_trial, p.level, p.target
            ));
        }
    }
    Ok(lines)
}
