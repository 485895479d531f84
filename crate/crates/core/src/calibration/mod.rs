//! Fits country/product adaptation behaviour from historical parameter
//! series: growth normalization, availability-loss event detection,
//! weight/rewiring rule derivation, substitutability testing and rule
//! stability measurement.

pub mod events;
pub mod growth;
pub mod rules;
pub mod stability;
pub mod substitution;

pub use events::{detect_events, Event};
pub use growth::normalize_growth;
pub use rules::{
    aggregate_rules, derive_rule_components, AdaptationRuleSet, Branch, EventComponents, Family,
    RawComponent, RuleEntry, RuleTable,
};
pub use stability::{stability_analysis, StabilityConfig, StabilityReport};
pub use substitution::{derive_substitutability, SubstitutionOutcome, SubstitutionTest};

use crate::error::{Error, Result};

/// Thresholds and bounds for event detection and rule fitting.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    /// Relative availability drop a loss event must exceed.
    pub delta_rel: f64,
    /// Absolute drop (tonnes) a loss event must exceed.
    pub delta_abs: f64,
    /// Coefficient-of-variation ceiling for the windows around an event.
    pub delta_dev: f64,
    /// Years required strictly before and strictly after a candidate year.
    pub min_window_years: usize,
    pub first_event_year: i32,
    pub last_event_year: i32,
    /// Reference year growth normalization rescales against.
    pub base_year: i32,
    /// Draws for the substitutability permutation test.
    pub n_permutations: usize,
    /// Significance level shared by both substitutability hypotheses.
    pub alpha_sig: f64,
    pub rng_seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            delta_rel: 0.26,
            delta_abs: 1000.0,
            delta_dev: 0.32,
            min_window_years: 5,
            first_event_year: 1997,
            last_event_year: 2015,
            base_year: 1992,
            n_permutations: 1000,
            alpha_sig: 0.05,
            rng_seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_rel > 0.0 && self.delta_abs > 0.0 && self.delta_dev > 0.0) {
            return Err(Error::validation(
                "calibration thresholds must all be positive",
            ));
        }
        if self.first_event_year > self.last_event_year {
            return Err(Error::validation(format!(
                "first_event_year {} after last_event_year {}",
                self.first_event_year, self.last_event_year
            )));
        }
        if self.n_permutations < 100 {
            return Err(Error::validation(
                "n_permutations must be at least 100 for a usable permutation test",
            ));
        }
        if !(self.alpha_sig > 0.0 && self.alpha_sig < 1.0) {
            return Err(Error::validation("alpha_sig must lie in (0, 1)"));
        }
        Ok(())
    }
}
