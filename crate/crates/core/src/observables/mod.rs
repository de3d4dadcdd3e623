//! Concentration invariants of finite pm-spaces: partial and observable
//! diameter, separation distance, and the variance family.
//!
//! Exact modes are limited to small spaces (see [`EXACT_LIMIT`]); heuristic
//! modes return values attained by explicit 1-Lipschitz functions and are
//! therefore lower bounds.

mod diameter;
mod polytope;
mod separation;
mod suites;
mod variance;

use serde::{Deserialize, Serialize};

pub use diameter::{
    gaussian_comparison_witness, obs_diam, obs_diam_gaussian_formula, partial_diameter, ComparisonWitness,
};
pub use polytope::lipschitz_vertices;
pub use separation::{
    components, separation, separation_config, SeparationConfig, MASS_TOL, POINT_SEARCH_LIMIT,
    SEP_BIN_LIMIT,
};
pub use suites::{
    monotone_along, separation_properties_suite, variance_diam_bound_check, MonotonicityReport,
    SuiteReport,
};
pub use variance::{p_deviation, p_variance, variance, variance_of};

/// Largest space accepted by exact modes.
pub const EXACT_LIMIT: usize = 6;

/// Number of starting functions used by heuristic modes.
pub const HEURISTIC_STARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Heuristic,
}

/// A real sequence with an implicit zero tail.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KappaSequence {
    pub entries: Vec<f64>,
}

impl KappaSequence {
    pub fn new(entries: Vec<f64>) -> Self {
        KappaSequence { entries }
    }

    /// Entry `i` (0-based); zero beyond the stored prefix.
    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(i).copied().unwrap_or(0.0)
    }

    /// Entries that are strictly positive, in stored order.
    pub fn positive(&self) -> Vec<f64> {
        self.entries.iter().copied().filter(|&k| k > 0.0).collect()
    }

    /// `kappa - (eps, eps, ...)`; the tail becomes negative and is dropped.
    pub fn minus(&self, eps: f64) -> Self {
        KappaSequence { entries: self.entries.iter().map(|k| k - eps).collect() }
    }

    /// Interleaving `(kappa_1, lambda_1, kappa_2, lambda_2, ...)`.
    pub fn interleave(&self, other: &Self) -> Self {
        let len = self.entries.len().max(other.entries.len());
        let mut out = Vec::with_capacity(2 * len);
        for i in 0..len {
            out.push(self.get(i));
            out.push(other.get(i));
        }
        KappaSequence { entries: out }
    }

    /// Entrywise sum.
    pub fn plus(&self, other: &Self) -> Self {
        let len = self.entries.len().max(other.entries.len());
        KappaSequence { entries: (0..len).map(|i| self.get(i) + other.get(i)).collect() }
    }

    /// Concatenation of stored prefixes.
    pub fn concat(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        KappaSequence { entries }
    }
}

impl From<Vec<f64>> for KappaSequence {
    fn from(entries: Vec<f64>) -> Self {
        KappaSequence { entries }
    }
}

impl From<&[f64]> for KappaSequence {
    fn from(entries: &[f64]) -> Self {
        KappaSequence { entries: entries.to_vec() }
    }
}
