use serde::{Deserialize, Serialize};

use super::{mean, ClassifierError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule {
    /// Two-sided band of one mean absolute deviation.
    Avg,
    /// One-sided bound at the largest training excess over the mean.
    AvgMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModel {
    pub rule: ThresholdRule,
    pub mean: f64,
    pub factor: f64,
}

pub fn avg_fit(h: &[f64]) -> Result<ThresholdModel, ClassifierError> {
    if h.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let mu = mean(h);
    let mad = h.iter().map(|x| (x - mu).abs()).sum::<f64>() / h.len() as f64;
    Ok(ThresholdModel { rule: ThresholdRule::Avg, mean: mu, factor: mad })
}

pub fn avgmax_fit(h: &[f64]) -> Result<ThresholdModel, ClassifierError> {
    if h.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let mu = mean(h);
    let factor = h.iter().map(|x| x - mu).fold(0.0, f64::max);
    Ok(ThresholdModel { rule: ThresholdRule::AvgMax, mean: mu, factor })
}

pub fn avg_decide(tm: &ThresholdModel, value: f64) -> bool {
    (value - tm.mean).abs() <= tm.factor
}

pub fn avgmax_decide(tm: &ThresholdModel, value: f64) -> bool {
    value - tm.mean <= tm.factor
}
