//! Circumradius experiment: Weibull law of the minimal transformed cell
//! measure, with alpha_2 exact on the line and Monte Carlo in the plane.

use super::{replicate_map, Outcome, RunError, GOF_K_MAX, PHASE_MAIN, PHASE_PK};
use crate::config::{build_normalized, build_rings, CircumradiusParams, ExperimentConfig};
use crate::report::{cdf_pairs, CountsRow, CsvBundle, ExtremeRow, KsEntry, Metric, ScheduleEntry};
use pplab::diagnostics::{
    consecutive_ratio_statistic, count_distribution, ks_distance, IntervalRing,
    MeasureDescriptor, TargetLaw,
};
use pplab::measure::DensityKind;
use pplab::rng::StreamSeed;
use pplab::tessellation::CircumradiusPipeline;
use pplab::voronoi::{alpha2, p_k_nested_indicators};

/// Depth of the p_k table used for the finite-t intensity reference.
const PK_TABLE_MAX: usize = 14;

pub fn run(config: &ExperimentConfig, p: &CircumradiusParams) -> Result<Outcome, RunError> {
    let (density, window) =
        build_normalized(&p.density, &p.support, &p.window, p.normalize_window_mass)?;
    let rings = build_rings(&p.rings)?;
    let d = density.dim();
    let shape = (d + 1) as u32;

    // alpha_2: exact on the line, Monte Carlo via p_{d+1} in the plane
    // (one nested table serves both alpha_2 and the finite-t reference)
    let (alpha2_value, alpha2_rel_se, pk_table, alpha_metrics) = if d == 1 {
        (1.0, 0.0, None, vec![Metric::exact("alpha2", 1.0)])
    } else {
        let table = PkTable::estimate(
            p.pk_samples,
            StreamSeed::for_replicate(config.seed, PHASE_PK, 0, 0),
        )?;
        let (p3, p3_se) = table.at(3);
        let a = alpha2(d, p3)?;
        // delta method: d alpha / d p = alpha / ((d+1) p)
        let rel_se = p3_se / ((d + 1) as f64 * p3);
        let metrics = vec![
            Metric::estimated(format!("p_{}", d + 1), p3, p3_se),
            Metric::estimated("alpha2", a, a * rel_se),
        ];
        (a, rel_se, Some(table), metrics)
    };

    let mut entries = Vec::new();
    let mut bundle = CsvBundle::default();
    let target = TargetLaw::WeibullMin {
        shape,
        scale: window.mu(),
    };
    // alpha_2 estimation error shifts the statistic scale; widen the KS
    // threshold by 3 relative se times the law's scale sensitivity
    let ks_allowance = 3.0 * alpha2_rel_se * weibull_scale_sensitivity(shape, window.mu());

    for &t in &p.schedule {
        let pipeline = CircumradiusPipeline {
            density: &density,
            window: &window,
            t,
            u_max: p.u_max,
            alpha2: alpha2_value,
        };
        let per_rep = replicate_map(config.workers, config.replicates, |r| {
            pipeline.run_with_retry(config.seed, PHASE_MAIN, r)
        })?;
        let samples: Vec<_> = per_rep.iter().map(|(s, _)| s.clone()).collect();
        let margin_retries: u64 = per_rep.iter().map(|&(_, a)| a as u64).sum();
        let dropped_atoms: u64 = samples.iter().map(|s| s.meta().dropped).sum();

        for (r, sample) in samples.iter().enumerate() {
            for (ring_index, ring) in rings.iter().enumerate() {
                bundle.counts.push(CountsRow {
                    schedule_point: t,
                    replicate: r as u32,
                    ring_index,
                    count: ring.count(sample)? as u64,
                });
            }
        }

        let mut metrics = alpha_metrics.clone();

        // mean count in (0,1): the limit value is mu(W) * 1^{d+1}
        let unit_ring = IntervalRing::new(vec![(0.0, 1.0)]).map_err(pplab::Error::from)?;
        let counts: Vec<f64> = samples
            .iter()
            .map(|s| unit_ring.count(s).map(|c| c as f64))
            .collect::<Result<_, _>>()?;
        let rn = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / rn;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / rn;
        let se = (var / rn).sqrt();
        let target_mass = window.mu();
        let mean_metric = match (&pk_table, density.kind()) {
            // constant density: p_k(x, r) = p_k exactly by scale invariance,
            // so the finite-t intensity is computable from the p_k table and
            // the mean is compared against it exactly
            (Some(table), DensityKind::Constant { .. }) => {
                let (reference, ref_se) =
                    table.finite_t_intensity(1.0, t, alpha2_value, target_mass);
                metrics.push(Metric::estimated(
                    "finite_t_reference_unit_interval",
                    reference,
                    ref_se,
                ));
                metrics.push(Metric::exact(
                    "predicted_ks_drift",
                    table.predicted_ks_drift(t, alpha2_value, target_mass),
                ));
                Metric::estimated("mean_count_unit_interval", mean, se)
                    .gated(reference, 3.0 * (se + ref_se))
            }
            // otherwise gate against the limit with a drift allowance
            _ => {
                let drift = p.drift_coeff * target_mass * t.powf(-1.0 / (d as f64 + 1.0));
                Metric::estimated("mean_count_unit_interval", mean, se)
                    .gated(target_mass, 3.0 * se + drift)
            }
        };
        let mean_pass = mean_metric.pass.unwrap_or(false);
        metrics.push(mean_metric);

        // informational D_k table against the power-law target
        let descriptor = MeasureDescriptor::PowerLaw {
            mu_w: window.mu(),
            exponent: shape,
        };
        for (ring_index, ring) in rings.iter().enumerate() {
            let law = count_distribution(&samples, ring, descriptor)?;
            for k in 1..=GOF_K_MAX {
                let (dk, dk_se) = consecutive_ratio_statistic(&law, k)?;
                metrics.push(Metric::estimated(format!("D_{k}@ring{ring_index}"), dk, dk_se));
            }
        }

        // minima; censored replicates (no atom below the floor) are counted
        let mut minima = Vec::with_capacity(samples.len());
        let mut censored = 0u64;
        for (r, sample) in samples.iter().enumerate() {
            let m = sample.min_atom();
            let floor = sample.meta().valid_below.unwrap_or(f64::INFINITY);
            if m.is_finite() && (sample.meta().dropped == 0 || m < floor) {
                minima.push(m);
                bundle.extremes.push(ExtremeRow {
                    schedule_point: t,
                    replicate: r as u32,
                    statistic: "min_circumradius_stat",
                    value: m,
                });
            } else {
                censored += 1;
            }
        }
        metrics.push(Metric::exact("censored_minima", censored as f64));

        let (ks, ks_n) = ks_distance(&minima, &target)?;
        let threshold = p.ks_threshold + ks_allowance;
        let ks_entry = KsEntry {
            statistic: "min_circumradius_stat".into(),
            target: format!("weibull_min(shape={shape}, scale={})", window.mu()),
            ks,
            sample_size: ks_n,
            threshold,
            pass: ks <= threshold,
        };
        bundle.cdf_pairs.extend(cdf_pairs(
            t,
            "min_circumradius_stat",
            &minima,
            |u| target.cdf(u).expect("scalar law"),
            200,
        ));

        let censor_ok = censored <= (config.replicates as u64 / 100).max(2);
        let pass = mean_pass && ks_entry.pass && censor_ok;
        entries.push(ScheduleEntry {
            schedule_point: t,
            metrics,
            ks: vec![ks_entry],
            gof: None,
            sandwich: None,
            dropped_atoms,
            margin_retries,
            pass,
        });
    }
    Ok(Outcome { entries, bundle })
}

/// Monte Carlo table of the coverage probabilities p_3..p_14 in the
/// plane, estimated on one nested point set per sample.
struct PkTable {
    /// (estimate, standard error) for k = 3..=PK_TABLE_MAX.
    entries: Vec<(f64, f64)>,
}

impl PkTable {
    fn estimate(samples: u64, seed: StreamSeed) -> Result<Self, pplab::Error> {
        let indicators = p_k_nested_indicators(2, PK_TABLE_MAX, samples, seed)?;
        let entries = indicators
            .iter()
            .map(|hits| {
                let p = hits.iter().filter(|&&b| b).count() as f64 / samples as f64;
                (p, (p * (1.0 - p) / samples as f64).sqrt())
            })
            .collect();
        Ok(Self { entries })
    }

    fn at(&self, k: usize) -> (f64, f64) {
        self.entries[k - 3]
    }

    /// Exact finite-t intensity `M_t([0, u])` for a constant density:
    /// `mu(W) * t * sum_k Poisson_lambda(k) p_k` with
    /// `lambda = 2^d u / (alpha_2 t^(1/(d+1)))`, d = 2.
    fn finite_t_intensity(&self, u: f64, t: f64, alpha2_value: f64, mu_w: f64) -> (f64, f64) {
        let lambda = 4.0 * u / (alpha2_value * t.powf(1.0 / 3.0));
        let mut value = 0.0;
        let mut se = 0.0;
        let mut pois = (-lambda).exp();
        let mut cumulative = pois;
        for k in 1..=PK_TABLE_MAX {
            pois *= lambda / k as f64;
            cumulative += pois;
            if k >= 3 {
                let (p, p_se) = self.at(k);
                value += t * pois * p;
                se += t * pois * p_se;
            }
        }
        // beyond the table the coverage probability is bounded by 1
        let tail = t * (1.0 - cumulative).max(0.0);
        (mu_w * (value + 0.5 * tail), mu_w * (se + 0.5 * tail))
    }

    /// Finite-t Kolmogorov distance between the predicted law of the
    /// minimum, `exp(-M_t([0,u]))`, and the limit `exp(-mu_w u^3)`.
    fn predicted_ks_drift(&self, t: f64, alpha2_value: f64, mu_w: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=600 {
            let u = i as f64 * 0.01;
            let (m, _) = self.finite_t_intensity(u, t, alpha2_value, mu_w);
            worst = worst.max(((-m).exp() - (-mu_w * u.powi(3)).exp()).abs());
        }
        worst
    }
}

/// sup_u u * pdf(u) of the Weibull-min law: the KS shift per unit of
/// relative scale error in the statistic.
fn weibull_scale_sensitivity(shape: u32, scale: f64) -> f64 {
    let pdf = |u: f64| {
        scale * shape as f64 * u.powi(shape as i32 - 1) * (-scale * u.powi(shape as i32)).exp()
    };
    let mut best = 0.0f64;
    for i in 1..4000 {
        let u = i as f64 * 1e-3;
        best = best.max(u * pdf(u));
    }
    best
}
