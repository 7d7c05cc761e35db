//! k-head runs in Bernoulli arrays: generators, run indicators, the
//! rescaled run process, first arrivals, and a conditional Monte Carlo
//! estimator for the local-dependence hypothesis.

use crate::error::{Error, Result};
use crate::rng::StreamSeed;
use crate::sample::{RescaledSample, SampleMeta};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Success probability as a function of the array index n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbabilityLaw {
    Const { p: f64 },
    /// p_n = coeff * n^exponent.
    Power { coeff: f64, exponent: f64 },
}

impl ProbabilityLaw {
    pub fn at(&self, n: u64) -> f64 {
        match self {
            ProbabilityLaw::Const { p } => *p,
            ProbabilityLaw::Power { coeff, exponent } => coeff * (n as f64).powf(*exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BernoulliKind {
    /// Independent bits with success probability p_n.
    Iid { p: ProbabilityLaw },
    /// m-dependent blocks: `X_i = 1{U_i <= a, ..., U_{i+m} <= a}` over iid
    /// uniforms, so `X_q` is independent of bits at distance >= m+1.
    Block { m: usize, a: f64 },
}

/// A Bernoulli array model together with the run length k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliModel {
    pub kind: BernoulliKind,
    pub k: usize,
}

impl BernoulliModel {
    pub fn new(kind: BernoulliKind, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidModel("run length k must be >= 1".into()));
        }
        match kind {
            BernoulliKind::Iid { .. } => {}
            BernoulliKind::Block { m, a } => {
                if m == 0 {
                    return Err(Error::InvalidModel("block model needs m >= 1".into()));
                }
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::InvalidModel(
                        "block threshold a must lie in (0,1)".into(),
                    ));
                }
            }
        }
        Ok(Self { kind, k })
    }

    /// y_n = P(k consecutive successes); p^k for iid, a^(k+m) for blocks.
    pub fn y_n(&self, n: u64) -> Result<f64> {
        let y = match self.kind {
            BernoulliKind::Iid { p } => {
                let p = p.at(n);
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "success probability {p} outside (0,1] at n={n}"
                    )));
                }
                p.powi(self.k as i32)
            }
            BernoulliKind::Block { m, a } => a.powi((self.k + m) as i32),
        };
        Ok(y)
    }

    /// The independence range f(n): bits at distance >= f(n) are independent.
    pub fn dependence_range(&self) -> usize {
        match self.kind {
            BernoulliKind::Iid { .. } => 1,
            BernoulliKind::Block { m, .. } => m + 1,
        }
    }

    /// Bits X_1..X_horizon (0-indexed storage).
    pub fn simulate(&self, n: u64, horizon: usize, seed: StreamSeed) -> Result<Vec<bool>> {
        let mut rng = seed.rng();
        match self.kind {
            BernoulliKind::Iid { p } => {
                let p = p.at(n);
                if !(p >= 0.0 && p <= 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "success probability {p} outside [0,1] at n={n}"
                    )));
                }
                Ok((0..horizon).map(|_| rng.random::<f64>() < p).collect())
            }
            BernoulliKind::Block { m, a } => {
                let lows: Vec<bool> = (0..horizon + m).map(|_| rng.random::<f64>() < a).collect();
                Ok(all_true_windows(&lows, m + 1))
            }
        }
    }
}

/// w[i] = 1 iff bits[i..i+len] are all true; output length |bits| - len + 1.
fn all_true_windows(bits: &[bool], len: usize) -> Vec<bool> {
    if bits.len() < len {
        return Vec::new();
    }
    let mut trailing = vec![0u32; bits.len() + 1];
    for i in (0..bits.len()).rev() {
        trailing[i] = if bits[i] { trailing[i + 1] + 1 } else { 0 };
    }
    (0..=bits.len() - len)
        .map(|i| trailing[i] >= len as u32)
        .collect()
}

/// I_i = 1{X_i = 1, ..., X_{i+k-1} = 1}; every window of k successes
/// counts, overlaps included.
pub fn run_indicators(bits: &[bool], k: usize) -> Vec<bool> {
    all_true_windows(bits, k)
}

/// The run point process: an atom at i * y_n for every I_i = 1
/// (i counted from 1).
pub fn build_run_process(bits: &[bool], k: usize, y_n: f64, seed: StreamSeed, n: u64) -> RescaledSample {
    let indicators = run_indicators(bits, k);
    let atoms: Vec<f64> = indicators
        .iter()
        .enumerate()
        .filter(|(_, &hit)| hit)
        .map(|(j, _)| (j + 1) as f64 * y_n)
        .collect();
    let sources = indicators.len() as u64;
    RescaledSample::new(
        atoms,
        SampleMeta {
            transform: "runs".into(),
            scale_param: n as f64,
            seed,
            sources,
            dropped: 0,
            // the horizon truncates the process at the last indicator
            valid_below: Some(sources as f64 * y_n),
        },
    )
}

/// First arrival y_n * T_n, censored when no run occurs in the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstArrival {
    Time(f64),
    Censored,
}

pub fn first_arrival(bits: &[bool], k: usize, y_n: f64) -> FirstArrival {
    match run_indicators(bits, k).iter().position(|&hit| hit) {
        Some(j) => FirstArrival::Time((j + 1) as f64 * y_n),
        None => FirstArrival::Censored,
    }
}

/// Horizon that keeps every interval up to `u_max` exact.
pub fn horizon_for_intervals(u_max: f64, y_n: f64, f_n: usize, k: usize) -> usize {
    (u_max / y_n).ceil() as usize + f_n + k
}

/// Horizon with run-free probability below `censor_prob` (iid-scale bound).
pub fn horizon_for_censoring(y_n: f64, censor_prob: f64, k: usize) -> usize {
    ((-censor_prob.ln()) / y_n).ceil() as usize + k
}

/// Estimates of the theorem hypothesis `sup_i y_n^{-1} E[I_i 1{W_i > 0}]`
/// and of the pairwise-moment sum `y_n^{-1} sum_j E[I_i I_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodCondition {
    pub sup_estimate: f64,
    pub sup_std_error: f64,
    /// (probe index i, estimate, se) for each probed i.
    pub per_probe: Vec<(usize, f64, f64)>,
    pub pair_sum: f64,
    pub pair_sum_std_error: f64,
}

/// Conditional Monte Carlo: both families are driven by iid uniforms, so
/// conditioning on I_i = 1 just forces the run's uniforms into [0, a]
/// (or the run's bits to 1). The estimator is
/// `y_n^{-1} E[I_i 1{W_i>0}] = P(W_i > 0 | I_i = 1)`.
pub fn estimate_neighborhood_condition(
    model: &BernoulliModel,
    n: u64,
    reps: u64,
    seed: StreamSeed,
) -> Result<NeighborhoodCondition> {
    let k = model.k;
    let f_n = model.dependence_range();
    let reach = f_n + k - 2; // W_i sums I_j over 1 <= |j - i| <= reach
    let probes: Vec<usize> = [1, f_n + k, 2 * (f_n + k)]
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = seed.rng();

    let mut per_probe = Vec::new();
    let mut pair_sum_acc = (0.0f64, 0.0f64); // sum, sum of squares
    let interior_probe = *probes.last().expect("probe set nonempty");
    for &i0 in &probes {
        if reach == 0 {
            per_probe.push((i0, 0.0, 0.0));
            continue;
        }
        let lo = i0.saturating_sub(reach).max(1);
        let hi_indicator = i0 + reach;
        let hi_bit = hi_indicator + k - 1;
        let len = hi_bit - lo + 1;
        let run_start = i0 - lo; // offset of X_{i0} in the local buffer
        let iid_p = match model.kind {
            BernoulliKind::Iid { p } => p.at(n),
            BernoulliKind::Block { .. } => 0.0,
        };
        let mut hits = 0u64;
        let mut bits = vec![false; len];
        for _ in 0..reps {
            match model.kind {
                BernoulliKind::Iid { .. } => {
                    for (j, b) in bits.iter_mut().enumerate() {
                        let forced = j >= run_start && j < run_start + k;
                        *b = forced || rng.random::<f64>() < iid_p;
                    }
                }
                BernoulliKind::Block { m, a } => {
                    let mut lows = vec![false; len + m];
                    for (j, low) in lows.iter_mut().enumerate() {
                        let forced = j >= run_start && j < run_start + k + m;
                        *low = if forced {
                            true
                        } else {
                            rng.random::<f64>() < a
                        };
                    }
                    bits = all_true_windows(&lows, m + 1);
                }
            }
            let indicators = run_indicators(&bits, k);
            let mut w = 0u64;
            for j in lo..=hi_indicator {
                if j == i0 {
                    continue;
                }
                if indicators[j - lo] {
                    w += 1;
                }
            }
            if w > 0 {
                hits += 1;
            }
            // the pairwise sum reuses the draws of an interior probe,
            // where the index window is not clipped at 1
            if i0 == interior_probe {
                pair_sum_acc.0 += w as f64;
                pair_sum_acc.1 += (w * w) as f64;
            }
        }
        let p_hat = hits as f64 / reps as f64;
        let se = (p_hat * (1.0 - p_hat) / reps as f64).sqrt();
        per_probe.push((i0, p_hat, se));
    }

    let (sup_estimate, sup_std_error) = per_probe
        .iter()
        .map(|&(_, est, se)| (est, se))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let mean_w = pair_sum_acc.0 / reps as f64;
    let var_w = (pair_sum_acc.1 / reps as f64 - mean_w * mean_w).max(0.0);
    Ok(NeighborhoodCondition {
        sup_estimate,
        sup_std_error,
        per_probe,
        pair_sum: mean_w,
        pair_sum_std_error: (var_w / reps as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iid(p: f64, k: usize) -> BernoulliModel {
        BernoulliModel::new(
            BernoulliKind::Iid {
                p: ProbabilityLaw::Const { p },
            },
            k,
        )
        .unwrap()
    }

    #[test]
    fn all_ones_and_all_zeros() {
        let ones = iid(1.0, 2).simulate(1, 64, StreamSeed::new(1, 0)).unwrap();
        assert!(ones.iter().all(|&b| b));
        let zeros = iid(1e-300, 2).simulate(1, 64, StreamSeed::new(1, 1)).unwrap();
        assert!(zeros.iter().all(|&b| !b));
    }

    #[test]
    fn iid_sample_mean_matches_p() {
        let bits = iid(0.3, 1)
            .simulate(1, 200_000, StreamSeed::new(2, 0))
            .unwrap();
        let mean = bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64;
        let se = (0.3f64 * 0.7 / bits.len() as f64).sqrt();
        assert!((mean - 0.3).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn indicators_mark_overlapping_windows() {
        assert_eq!(run_indicators(&[true, true, true], 2), vec![true, true]);
        assert_eq!(run_indicators(&[true, false, true], 2), vec![false, false]);
        assert_eq!(run_indicators(&[true], 2), Vec::<bool>::new());
    }

    #[test]
    fn indicator_sum_matches_brute_force() {
        let bits = iid(0.4, 1).simulate(1, 4000, StreamSeed::new(3, 0)).unwrap();
        for k in [1, 2, 3, 5] {
            let fast: usize = run_indicators(&bits, k).iter().filter(|&&b| b).count();
            let brute: usize = (0..=bits.len() - k)
                .filter(|&i| bits[i..i + k].iter().all(|&b| b))
                .count();
            assert_eq!(fast, brute, "k = {k}");
        }
    }

    #[test]
    fn run_process_atoms() {
        let bits = [true, false, true, true];
        // k=1: I = (1,0,1,1)
        let s = build_run_process(&bits, 1, 0.5, StreamSeed::new(0, 0), 1);
        assert_eq!(s.atoms(), &[0.5, 1.5, 2.0]);
        let empty = build_run_process(&[false, false], 1, 0.5, StreamSeed::new(0, 0), 1);
        assert!(empty.is_empty());
    }

    #[test]
    fn first_arrival_times() {
        assert_eq!(
            first_arrival(&[false, true, true], 2, 0.1),
            FirstArrival::Time(0.2)
        );
        assert_eq!(
            first_arrival(&[true, true, false], 2, 0.1),
            FirstArrival::Time(0.1)
        );
        assert_eq!(first_arrival(&[true, false], 2, 0.1), FirstArrival::Censored);
    }

    #[test]
    fn block_model_run_probability() {
        // X_i = 1{U_i <= a, U_{i+1} <= a}: y_n for k=2 is a^3
        let model = BernoulliModel::new(BernoulliKind::Block { m: 1, a: 0.4 }, 2).unwrap();
        assert!((model.y_n(10).unwrap() - 0.4f64.powi(3)).abs() < 1e-15);
        assert_eq!(model.dependence_range(), 2);
        let bits = model.simulate(10, 300_000, StreamSeed::new(4, 0)).unwrap();
        let runs = run_indicators(&bits, 2);
        let freq = runs.iter().filter(|&&b| b).count() as f64 / runs.len() as f64;
        let y = model.y_n(10).unwrap();
        // dependent windows: allow a generous band around a^3
        assert!((freq - y).abs() < 5.0 * (y / runs.len() as f64).sqrt(), "freq {freq} vs y {y}");
    }

    #[test]
    fn iid_y_n_is_p_to_k() {
        let model = BernoulliModel::new(
            BernoulliKind::Iid {
                p: ProbabilityLaw::Power {
                    coeff: 1.0,
                    exponent: -0.25,
                },
            },
            2,
        )
        .unwrap();
        let n = 100_000u64;
        let p = (n as f64).powf(-0.25);
        assert!((model.y_n(n).unwrap() - p * p).abs() < 1e-15);
        // empirical check of y_n via long simulation
        let bits = model.simulate(n, 400_000, StreamSeed::new(5, 0)).unwrap();
        let runs = run_indicators(&bits, 2);
        let freq = runs.iter().filter(|&&b| b).count() as f64 / runs.len() as f64;
        let y = p * p;
        let se = (y * (1.0 - y) / runs.len() as f64).sqrt();
        assert!((freq - y).abs() < 4.0 * se, "freq {freq} vs y {y}");
    }

    #[test]
    fn neighborhood_condition_k1_iid_is_zero() {
        // f(n)=1, k=1: the window 1 <= |j-i| <= f+k-2 = 0 is empty
        let model = iid(0.5, 1);
        let cond = estimate_neighborhood_condition(&model, 1, 1000, StreamSeed::new(6, 0)).unwrap();
        assert_eq!(cond.sup_estimate, 0.0);
        assert_eq!(cond.pair_sum, 0.0);
    }

    #[test]
    fn neighborhood_condition_decreases_with_p() {
        let mut last = f64::INFINITY;
        for p in [0.1, 0.03, 0.01] {
            let model = iid(p, 2);
            let cond =
                estimate_neighborhood_condition(&model, 1, 40_000, StreamSeed::new(7, 0)).unwrap();
            assert!(cond.sup_estimate < last, "p={p}: {}", cond.sup_estimate);
            last = cond.sup_estimate;
            // iid k=2: P(W>0 | I=1) = 1 - (1-p)^2, within MC error
            let exact = 1.0 - (1.0 - p) * (1.0 - p);
            assert!(
                (cond.sup_estimate - exact).abs() < 4.0 * cond.sup_std_error.max(1e-4),
                "p={p}: est {} vs exact {exact}",
                cond.sup_estimate
            );
        }
    }

    #[test]
    fn neighborhood_condition_all_ones_is_one() {
        let model = iid(1.0, 2);
        let cond = estimate_neighborhood_condition(&model, 1, 500, StreamSeed::new(8, 0)).unwrap();
        assert_eq!(cond.sup_estimate, 1.0);
    }

    #[test]
    fn horizons() {
        assert_eq!(horizon_for_intervals(2.0, 0.01, 1, 2), 203);
        let h = horizon_for_censoring(0.01, 1e-4, 2);
        assert!(h >= 921, "h = {h}");
    }
}
