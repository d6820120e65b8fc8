use serde::{Deserialize, Serialize};

use super::{mean, ClassifierError};

/// Smallest anchor spread, relative to the mean feature magnitude.
const MIN_RELATIVE_SPREAD: f64 = 1e-6;

/// One-class nearest-neighbour model over genuine references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub references: Vec<f64>,
    pub k_nn: usize,
    /// Largest leave-one-out local-mean distance among the references.
    pub theta: f64,
    pub m_f: f64,
    /// Start of the rejection half-line used by the fuzzy rule.
    pub anchor: f64,
}

fn k_for(p: usize) -> usize {
    ((p as f64).sqrt().round() as usize).clamp(1, p)
}

/// Mean of the `k` smallest entries of `d`.
fn mean_of_smallest(mut d: Vec<f64>, k: usize) -> f64 {
    d.sort_by(f64::total_cmp);
    d[..k].iter().sum::<f64>() / k as f64
}

pub fn knn_fit(h: &[f64], m_f: f64) -> Result<KnnModel, ClassifierError> {
    if h.len() < 2 {
        return Err(ClassifierError::TooFewSamples(h.len()));
    }
    if !(m_f > 1.0) {
        return Err(ClassifierError::BadFuzzifier(m_f));
    }
    let k_nn = k_for(h.len());
    let theta = (0..h.len())
        .map(|s| {
            let others = h.iter().enumerate().filter(|&(t, _)| t != s).map(|(_, &x)| (x - h[s]).abs()).collect();
            mean_of_smallest(others, k_nn)
        })
        .fold(0.0, f64::max);
    let mu = mean(h);
    let mean_abs = h.iter().map(|x| x.abs()).sum::<f64>() / h.len() as f64;
    let mut spread = theta.max(MIN_RELATIVE_SPREAD * mean_abs);
    if spread == 0.0 {
        spread = MIN_RELATIVE_SPREAD;
    }
    Ok(KnnModel { references: h.to_vec(), k_nn, theta, m_f, anchor: mu + 2.0 * spread })
}

/// Mean distance from `value` to its `k_nn` nearest references.
pub fn knn_score(model: &KnnModel, value: f64) -> f64 {
    mean_of_smallest(model.references.iter().map(|&r| (value - r).abs()).collect(), model.k_nn)
}

pub fn knn_classify(model: &KnnModel, value: f64) -> bool {
    knn_score(model, value) <= model.theta
}

/// Genuine membership of `value` and the accept decision (membership ≥ 0.5).
///
/// Neighbours are drawn from the references plus a rejection region covering
/// everything at or above `anchor`; references win distance ties.
pub fn fuzzy_knn_classify(model: &KnnModel, value: f64) -> (f64, bool) {
    let membership = fuzzy_knn_membership(model, value);
    (membership, membership >= 0.5)
}

fn fuzzy_knn_membership(model: &KnnModel, value: f64) -> f64 {
    let mut refs: Vec<f64> = model.references.iter().map(|&r| (value - r).abs()).collect();
    refs.sort_by(f64::total_cmp);
    let d_anchor = (model.anchor - value).max(0.0);
    // Neighbours in distance order; `true` marks a genuine reference.
    let mut picked: Vec<(f64, bool)> = Vec::with_capacity(model.k_nn);
    let mut anchor_used = false;
    let mut next_ref = 0;
    while picked.len() < model.k_nn {
        if !anchor_used && (next_ref == refs.len() || d_anchor < refs[next_ref]) {
            picked.push((d_anchor, false));
            anchor_used = true;
        } else {
            picked.push((refs[next_ref], true));
            next_ref += 1;
        }
    }
    if let Some(&(_, genuine)) = picked.iter().find(|(d, _)| *d == 0.0) {
        return if genuine { 1.0 } else { 0.0 };
    }
    let d_min = picked.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let exp = 2.0 / (model.m_f - 1.0);
    let (mut genuine, mut total) = (0.0, 0.0);
    for &(d, is_ref) in &picked {
        let w = (d_min / d).powf(exp);
        total += w;
        if is_ref {
            genuine += w;
        }
    }
    genuine / total
}
