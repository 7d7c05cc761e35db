//! Coupled sandwich experiment on the line: three nested thinnings of one
//! marked process, each layer's minimal transformed circumradius measure,
//! and the one-sided exponential tail bounds.

use super::{replicate_map, Outcome, RunError, PHASE_MAIN};
use crate::config::{ExperimentConfig, SandwichParams};
use crate::report::{CsvBundle, ExtremeRow, Metric, ScheduleEntry};
use pplab::diagnostics::{sandwich_bound_check, SandwichMins};
use pplab::geom::unit_ball_volume;
use pplab::measure::{density_bounds, DensityModel, Window};
use pplab::process::{sample_coupled_sandwich, PointConfig};
use pplab::rng::StreamSeed;
use pplab::tessellation::circumradius_atoms;

pub fn run(config: &ExperimentConfig, p: &SandwichParams) -> Result<Outcome, RunError> {
    let phi = p.phi.build(&p.support)?;
    let f1 = p.f1.build(&p.support)?;
    let f2 = p.f2.build(&p.support)?;
    let window = p.window.build(&phi)?;
    let window_f1 = p.window.build(&f1)?;
    let window_f2 = p.window.build(&f2)?;
    let theta_w = window.mu();
    let d = phi.dim();

    let mut entries = Vec::new();
    let mut bundle = CsvBundle::default();

    for &t in &p.schedule {
        // alpha_2 = 1 exactly on the line
        let s_t = t.powf((d as f64 + 2.0) / (d as f64 + 1.0));
        let u_t = p.u_max / s_t;
        let cutoff_for = |density: &DensityModel, w: &Window| -> Result<f64, RunError> {
            let (beta, _) = density_bounds(density, w)?;
            Ok(4.0 * (2.0 * u_t / (beta * unit_ball_volume(d))).powf(1.0 / d as f64))
        };
        let cut_phi = cutoff_for(&phi, &window)?;
        let cut_f1 = cutoff_for(&f1, &window_f1)?;
        let cut_f2 = cutoff_for(&f2, &window_f2)?;
        let margin = 2.0 * cut_phi.max(cut_f1).max(cut_f2) * 2.0;
        let bbox = window.region().bounding_box();
        let sim_box = bbox
            .dilated(margin)
            .map_err(RunError::Simulation)?;
        if !phi.support().contains_box(&sim_box) {
            return Err(RunError::Simulation(pplab::Error::MarginExceedsSupport {
                required: margin,
                available: window.support_margin(),
            }));
        }

        let per_rep = replicate_map(config.workers, config.replicates, |r| {
            let seed = StreamSeed::for_replicate(config.seed, PHASE_MAIN, 0, r);
            let triple = sample_coupled_sandwich(&phi, &f1, &f2, t, &sim_box, seed)?;
            let inclusion_ok = is_subset(&triple.lower, &triple.mid)
                && is_subset(&triple.mid, &triple.upper);
            let lower = circumradius_atoms(&f1, &window_f1, &triple.lower, s_t, cut_f1, seed)?;
            let mid = circumradius_atoms(&phi, &window, &triple.mid, s_t, cut_phi, seed)?;
            let upper = circumradius_atoms(&f2, &window_f2, &triple.upper, s_t, cut_f2, seed)?;
            Ok((
                SandwichMins {
                    lower: lower.min_atom(),
                    mid: mid.min_atom(),
                    upper: upper.min_atom(),
                },
                inclusion_ok,
                lower.meta().dropped + mid.meta().dropped + upper.meta().dropped,
            ))
        })?;

        let mins: Vec<SandwichMins> = per_rep.iter().map(|&(m, _, _)| m).collect();
        let inclusion_violations =
            per_rep.iter().filter(|&&(_, ok, _)| !ok).count() as u64;
        let dropped_atoms: u64 = per_rep.iter().map(|&(_, _, d)| d).sum();
        for (r, m) in mins.iter().enumerate() {
            for (name, v) in [("min_lower", m.lower), ("min_mid", m.mid), ("min_upper", m.upper)] {
                if v.is_finite() {
                    bundle.extremes.push(ExtremeRow {
                        schedule_point: t,
                        replicate: r as u32,
                        statistic: name,
                        value: v,
                    });
                }
            }
        }

        let report = sandwich_bound_check(&mins, p.s, p.r, theta_w, d, &p.u_grid, 3.0)?;
        let metrics = vec![
            Metric::exact("theta_w", theta_w),
            Metric::exact("inclusion_violations", inclusion_violations as f64),
            Metric::exact("scale_factor", s_t),
        ];
        let pass = report.pass && inclusion_violations == 0;
        entries.push(ScheduleEntry {
            schedule_point: t,
            metrics,
            ks: vec![],
            gof: None,
            sandwich: Some(report),
            dropped_atoms,
            margin_retries: 0,
            pass,
        });
    }
    Ok(Outcome { entries, bundle })
}

/// Exact point-set inclusion; coupled layers share identical coordinates.
fn is_subset(small: &PointConfig, big: &PointConfig) -> bool {
    use std::collections::HashSet;
    let key = |p: &[f64]| -> Vec<u64> { p.iter().map(|v| v.to_bits()).collect() };
    let big_set: HashSet<Vec<u64>> = big.iter_points().map(key).collect();
    small.iter_points().all(|p| big_set.contains(&key(p)))
}
