use serde::{Deserialize, Serialize};

use super::{ClassifierError, Metric, GENUINE_CLUSTER};

/// Cluster centroids plus the metric used for nearest-centroid assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub centroids: Vec<f64>,
    pub metric: Metric,
    pub genuine_cluster: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub model: CentroidModel,
    /// 1-based cluster of each training value.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each centroid update.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

/// 1-based nearest centroid; ties resolve to the lower cluster number.
fn nearest(centroids: &[f64], metric: Metric, v: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centroids.iter().enumerate() {
        let d = metric.distance(v, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best + 1
}

/// Σ over values of the squared distance to the assigned centroid.
pub fn kmeans_objective(values: &[f64], assignments: &[usize], centroids: &[f64]) -> f64 {
    values
        .iter()
        .zip(assignments)
        .map(|(&v, &a)| {
            let d = v - centroids[a - 1];
            d * d
        })
        .sum()
}

/// Lloyd iteration from the given seeds. A cluster that loses all members
/// keeps its previous centroid.
pub fn kmeans_fit(values: &[f64], init: &[f64], metric: Metric) -> Result<KMeansFit, ClassifierError> {
    if values.is_empty() {
        return Err(ClassifierError::Empty);
    }
    if init.is_empty() || init.len() > values.len() {
        return Err(ClassifierError::TooFewValues { k: init.len(), n: values.len() });
    }
    let k = init.len();
    let mut centroids = init.to_vec();
    let assign = |c: &[f64]| values.iter().map(|&v| nearest(c, metric, v)).collect::<Vec<_>>();
    let mut assignments = assign(&centroids);
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &a) in values.iter().zip(&assignments) {
            sums[a - 1] += v;
            counts[a - 1] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        history.push(kmeans_objective(values, &assignments, &centroids));
        let next = assign(&centroids);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    Ok(KMeansFit {
        model: CentroidModel { centroids, metric, genuine_cluster: GENUINE_CLUSTER },
        assignments,
        objective_history: history,
        iterations,
    })
}

/// 1-based cluster for `value`. Equidistant values go to the genuine cluster.
pub fn kmeans_classify(model: &CentroidModel, value: f64) -> usize {
    let g = model.genuine_cluster - 1;
    let dg = model.metric.distance(value, model.centroids[g]);
    let other = nearest(&model.centroids, model.metric, value);
    if dg <= model.metric.distance(value, model.centroids[other - 1]) {
        model.genuine_cluster
    } else {
        other
    }
}
