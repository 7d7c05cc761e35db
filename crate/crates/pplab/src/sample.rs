//! Derived point processes on the line: sorted atom lists with provenance.

use crate::rng::StreamSeed;
use serde::{Deserialize, Serialize};

/// Provenance of a rescaled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    /// Transform that produced the atoms (e.g. "runs", "inradius-2c").
    pub transform: String,
    /// t (Poisson pipelines) or n (Bernoulli pipelines).
    pub scale_param: f64,
    pub seed: StreamSeed,
    /// Points/indices that could have produced an atom.
    pub sources: u64,
    /// Atoms omitted because the cell was unbounded or reached beyond the
    /// simulation margin; every omitted atom exceeds `valid_below`.
    pub dropped: u64,
    /// Counts on sets below this level are exact; `None` means every
    /// level is exact.
    pub valid_below: Option<f64>,
}

/// Atoms of a point process on the real line, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSample {
    atoms: Vec<f64>,
    meta: SampleMeta,
}

impl RescaledSample {
    pub fn new(mut atoms: Vec<f64>, meta: SampleMeta) -> Self {
        atoms.sort_unstable_by(f64::total_cmp);
        Self { atoms, meta }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of atoms strictly inside the open interval (a, b).
    pub fn count_open_interval(&self, a: f64, b: f64) -> usize {
        if a >= b {
            return 0;
        }
        let lo = self.atoms.partition_point(|&x| x <= a);
        let hi = self.atoms.partition_point(|&x| x < b);
        hi - lo
    }

    /// Number of atoms in the closed half line [u, infinity).
    pub fn count_from(&self, u: f64) -> usize {
        self.atoms.len() - self.atoms.partition_point(|&x| x < u)
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_atom(&self) -> f64 {
        self.atoms.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn atoms_sorted_and_counted() {
        let s = RescaledSample::new(vec![1.7, 0.2, 0.9], meta());
        assert_eq!(s.atoms(), &[0.2, 0.9, 1.7]);
        assert_eq!(s.count_open_interval(0.0, 1.0), 2);
        assert_eq!(s.count_open_interval(0.2, 0.9), 0); // open on both ends
        assert_eq!(s.count_from(0.9), 2);
        assert_eq!(s.max_atom(), 1.7);
        assert_eq!(s.min_atom(), 0.2);
    }

    #[test]
    fn empty_extremes_conventions() {
        let s = RescaledSample::new(vec![], meta());
        assert_eq!(s.max_atom(), f64::NEG_INFINITY);
        assert_eq!(s.min_atom(), f64::INFINITY);
        assert_eq!(s.count_open_interval(-1.0, 1.0), 0);
    }
}
