use serde::{Deserialize, Serialize};

use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyParams {
    /// Fuzzifier, strictly above 1.
    pub m_f: f64,
    /// Stop once no membership moves by this much.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self { m_f: 2.0, epsilon: 1e-5, max_iter: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyModel {
    pub centers: Vec<f64>,
    pub m_f: f64,
    /// Row per training value, column per cluster.
    pub partition: Vec<Vec<f64>>,
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    /// Largest membership change of the last iteration.
    #[serde(default)]
    pub final_change: f64,
}

/// Memberships of `value` in each cluster. A value sitting exactly on a
/// center belongs fully to the lowest such center.
pub fn memberships(centers: &[f64], m_f: f64, value: f64) -> Vec<f64> {
    let d: Vec<f64> = centers.iter().map(|&c| (value - c).abs()).collect();
    let mut u = vec![0.0; centers.len()];
    if let Some(hit) = d.iter().position(|&x| x == 0.0) {
        u[hit] = 1.0;
        return u;
    }
    let p = 2.0 / (m_f - 1.0);
    for (j, uj) in u.iter_mut().enumerate() {
        let s: f64 = d.iter().map(|&dk| (d[j] / dk).powf(p)).sum();
        *uj = 1.0 / s;
    }
    u
}

/// Σ_i Σ_j u_ij^m · (x_i − v_j)².
pub fn fuzzy_objective(values: &[f64], partition: &[Vec<f64>], centers: &[f64], m_f: f64) -> f64 {
    values
        .iter()
        .zip(partition)
        .map(|(&x, row)| {
            row.iter()
                .zip(centers)
                .map(|(&u, &v)| u.powf(m_f) * (x - v) * (x - v))
                .sum::<f64>()
        })
        .sum()
}

fn update_centers(values: &[f64], partition: &[Vec<f64>], prev: &[f64], m_f: f64) -> Vec<f64> {
    (0..prev.len())
        .map(|j| {
            let (mut num, mut den) = (0.0, 0.0);
            for (&x, row) in values.iter().zip(partition) {
                let w = row[j].powf(m_f);
                num += w * x;
                den += w;
            }
            if den > 0.0 {
                num / den
            } else {
                prev[j]
            }
        })
        .collect()
}

/// Alternating center/membership updates from the seed centers `init`.
pub fn fuzzy_fit(values: &[f64], init: &[f64], params: FuzzyParams) -> Result<FuzzyModel, ClassifierError> {
    if values.is_empty() {
        return Err(ClassifierError::Empty);
    }
    if init.is_empty() || init.len() > values.len() {
        return Err(ClassifierError::TooFewValues { k: init.len(), n: values.len() });
    }
    if !(params.m_f > 1.0) {
        return Err(ClassifierError::BadFuzzifier(params.m_f));
    }
    let m = params.m_f;
    let partition_for = |c: &[f64]| values.iter().map(|&x| memberships(c, m, x)).collect::<Vec<_>>();
    let mut centers = init.to_vec();
    let mut u = partition_for(&centers);
    let mut history = vec![fuzzy_objective(values, &u, &centers, m)];
    for it in 1..=params.max_iter {
        centers = update_centers(values, &u, &centers, m);
        let next = partition_for(&centers);
        history.push(fuzzy_objective(values, &next, &centers, m));
        let delta = u
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u = next;
        if delta < params.epsilon {
            return Ok(FuzzyModel { centers, m_f: m, partition: u, iterations: it, objective_history: history, final_change: delta });
        }
    }
    Err(ClassifierError::NoConvergence(params.max_iter))
}

/// Memberships for `value` and the 1-based cluster with the highest one.
pub fn fuzzy_classify(model: &FuzzyModel, value: f64) -> (Vec<f64>, usize) {
    let u = memberships(&model.centers, model.m_f, value);
    let c = argmax_membership(&u);
    (u, c)
}

/// 1-based index of the largest membership; ties pick the lower index.
pub fn argmax_membership(u: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in u.iter().enumerate() {
        if x > u[best] {
            best = j;
        }
    }
    best + 1
}
