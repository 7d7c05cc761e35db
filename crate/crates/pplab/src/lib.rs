//! Monte Carlo laboratory for Poisson-process limit laws.
//!
//! The crate simulates three families of point processes on the line —
//! rescaled starting points of k-head runs in Bernoulli sequences, and
//! transformed inradii / circumscribed radii of Voronoi cells generated by
//! inhomogeneous Poisson processes — and checks their convergence to
//! Poisson processes through the consecutive-probability statistic
//! `k P(N=k) - lambda(B) P(N=k-1)` together with the closed-form limit
//! laws (Gumbel for maximal inradii, Weibull for minimal circumscribed
//! radii, Exp(1) for first arrivals).
//!
//! Modules follow the pipeline: `measure` (densities and ball masses),
//! `process` (Poisson/binomial/coupled samplers), `voronoi` (cell radii
//! via spherical-cap coverage), `runs` (Bernoulli arrays), `tessellation`
//! (the derived point processes), `diagnostics` (count laws and
//! goodness-of-fit).

pub mod diagnostics;
pub mod error;
pub mod geom;
pub mod grid;
pub mod measure;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod runs;
pub mod sample;
pub mod tessellation;
pub mod voronoi;

pub use error::{Error, Result};
