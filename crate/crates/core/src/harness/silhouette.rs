use super::{HarnessError, Result};
use crate::classifiers::Metric;

/// Mean silhouette coefficient of a 1-based clustering of scalars.
///
/// Points alone in their cluster score 0, as do points whose intra- and
/// nearest-cluster distances are both 0.
pub fn silhouette_score(values: &[f64], assignments: &[usize], metric: Metric) -> Result<f64> {
    if values.len() != assignments.len() {
        return Err(HarnessError::Config(format!(
            "{} values but {} assignments",
            values.len(),
            assignments.len()
        )));
    }
    let k = assignments.iter().copied().max().unwrap_or(0);
    let mut sizes = vec![0usize; k + 1];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(HarnessError::SingleCluster);
    }
    let mut total = 0.0;
    for (i, (&x, &ci)) in values.iter().zip(assignments).enumerate() {
        if sizes[ci] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k + 1];
        for (j, (&y, &cj)) in values.iter().zip(assignments).enumerate() {
            if i != j {
                sums[cj] += metric.distance(x, y);
            }
        }
        let a = sums[ci] / (sizes[ci] - 1) as f64;
        let b = (0..=k)
            .filter(|&c| c != ci && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / values.len() as f64)
}
