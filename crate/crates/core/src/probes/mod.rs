//! Empirical measurement of a priori constants on manufactured data.
//!
//! None of these probes claims a universal constant. They record ratios
//! and check that the ratios are stable under refinement and covariant
//! under the symmetries of the equation.

mod decay;
mod gradient;
mod schauder;

pub use decay::{derivative_decay_probe, kinetic_weight, CaloricFunction, DecayProbeReport, DECAY_RADII, MAX_WEIGHT, SLOPE_TOL};
pub use gradient::{gradient_batch, gradient_probe, GradientBatch, GradientSource};
pub use schauder::{schauder_batch, schauder_probe, ManufacturedCase, SchauderBatch, SchauderLevel};

use serde::{Deserialize, Serialize};

use crate::holder::Witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub case_id: u64,
    /// Grid level or quadrature level, depending on the probe.
    pub level: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Individual terms of each side, in the order they are summed.
    pub lhs_terms: Vec<f64>,
    pub rhs_terms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Set when both sides vanish and the case carries no information.
    #[serde(default)]
    pub skipped: bool,
}

/// `max / min` of a set of positive ratios; `1` for fewer than two.
pub fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 {
        1.0
    } else {
        hi / lo
    }
}
