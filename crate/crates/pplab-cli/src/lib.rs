//! Config-driven experiment runner on top of the lab library.

pub mod config;
pub mod experiments;
pub mod report;
