use serde::{Deserialize, Serialize};

use super::estimators::MitigatedEstimate;

/// One serialised estimate or optimizer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub strategy: String,
    pub m: f64,
    pub gamma: f64,
    pub samples: usize,
    pub value: f64,
    pub std_error: f64,
    pub params: Vec<f64>,
    pub step: usize,
}

impl EstimateRecord {
    pub fn new(strategy: &str, m: f64, est: &MitigatedEstimate, params: &[f64], step: usize) -> Self {
        EstimateRecord {
            strategy: strategy.to_string(),
            m,
            gamma: est.gamma,
            samples: est.samples_used,
            value: est.value,
            std_error: est.std_error,
            params: params.to_vec(),
            step,
        }
    }

    /// Record of a deterministic value (no sampling).
    pub fn exact(strategy: &str, value: f64, params: &[f64], step: usize) -> Self {
        EstimateRecord {
            strategy: strategy.to_string(),
            m: 0.0,
            gamma: 1.0,
            samples: 0,
            value,
            std_error: 0.0,
            params: params.to_vec(),
            step,
        }
    }
}
