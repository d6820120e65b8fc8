//! Verification back-ends over the scalar moment-summation feature.
//!
//! All models are one-dimensional. Cluster numbers are 1-based and cluster 1
//! is always the one seeded from genuine training data.

mod fuzzy;
mod kmeans;
mod knn;
mod threshold;

pub use fuzzy::{argmax_membership, fuzzy_classify, fuzzy_fit, fuzzy_objective, memberships, FuzzyModel, FuzzyParams};
pub use kmeans::{kmeans_classify, kmeans_fit, kmeans_objective, CentroidModel, KMeansFit};
pub use knn::{fuzzy_knn_classify, knn_classify, knn_fit, knn_score, KnnModel};
pub use threshold::{avg_decide, avg_fit, avgmax_decide, avgmax_fit, ThresholdModel, ThresholdRule};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The cluster seeded from genuine samples.
pub const GENUINE_CLUSTER: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("no training values")]
    Empty,
    #[error("cannot form {k} clusters from {n} values")]
    TooFewValues { k: usize, n: usize },
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("fuzzifier must exceed 1, got {0}")]
    BadFuzzifier(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cityblock,
}

impl Metric {
    pub fn distance(self, a: f64, b: f64) -> f64 {
        match self {
            Metric::Euclidean => ((a - b) * (a - b)).sqrt(),
            Metric::Cityblock => (a - b).abs(),
        }
    }
}

/// Seeds for the genuine and imposter clusters from the genuine features `H`.
///
/// The second seed sits halfway between `min(H)` and a threshold above
/// `max(H)`; the threshold is `2·max(H)`, or `max(H) + 1` when `max(H) <= 0`.
pub fn initial_centroids(h: &[f64]) -> Result<(f64, f64), ClassifierError> {
    if h.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let m1 = h.iter().copied().fold(f64::INFINITY, f64::min);
    let m2 = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = if m2 > 0.0 { 2.0 * m2 } else { m2 + 1.0 };
    Ok((m1, (m1 + threshold) / 2.0))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// The seven decision rules an experiment can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierId {
    KmeansEuclidean,
    KmeansCityblock,
    FuzzyKmeans,
    Knn,
    FuzzyKnn,
    Avg,
    Avgmax,
}

impl ClassifierId {
    pub const ALL: [ClassifierId; 7] = [
        ClassifierId::KmeansEuclidean,
        ClassifierId::KmeansCityblock,
        ClassifierId::FuzzyKmeans,
        ClassifierId::Knn,
        ClassifierId::FuzzyKnn,
        ClassifierId::Avg,
        ClassifierId::Avgmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierId::KmeansEuclidean => "kmeans-euclidean",
            ClassifierId::KmeansCityblock => "kmeans-cityblock",
            ClassifierId::FuzzyKmeans => "fuzzy-kmeans",
            ClassifierId::Knn => "knn",
            ClassifierId::FuzzyKnn => "fuzzy-knn",
            ClassifierId::Avg => "avg",
            ClassifierId::Avgmax => "avgmax",
        }
    }

    /// Label used in the classifier-by-b text tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierId::KmeansEuclidean => "k-means(Euclidean)",
            ClassifierId::KmeansCityblock => "k-means(Cityblock)",
            ClassifierId::FuzzyKmeans => "Fuzzy k-means",
            ClassifierId::Knn => "k-nn",
            ClassifierId::FuzzyKnn => "Fuzzy k-nn",
            ClassifierId::Avg => "avg",
            ClassifierId::Avgmax => "avgmax",
        }
    }

    pub fn is_kmeans(self) -> bool {
        matches!(self, ClassifierId::KmeansEuclidean | ClassifierId::KmeansCityblock)
    }
}

impl std::fmt::Display for ClassifierId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassifierId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ClassifierId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown classifier {s:?}"))
    }
}

/// Outcome of one verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub accept: bool,
    /// Rule-specific evidence: cluster number, genuine membership, or
    /// distance to the genuine references.
    pub score: f64,
}

/// A fitted decision rule for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verifier {
    Kmeans(CentroidModel),
    FuzzyKmeans(FuzzyModel),
    Knn(KnnModel),
    FuzzyKnn(KnnModel),
    Threshold(ThresholdModel),
}

impl Verifier {
    /// Fits `id` on genuine features `h`. `imposter` holds features of
    /// imposter samples used for training; the k-means variants cluster
    /// them together with `h`, the other rules ignore them.
    pub fn fit(id: ClassifierId, h: &[f64], imposter: &[f64], fuzzy: FuzzyParams) -> Result<Self, ClassifierError> {
        let pooled = || h.iter().chain(imposter).copied().collect::<Vec<f64>>();
        Ok(match id {
            ClassifierId::KmeansEuclidean | ClassifierId::KmeansCityblock => {
                let metric = if id == ClassifierId::KmeansEuclidean { Metric::Euclidean } else { Metric::Cityblock };
                let (c1, c2) = initial_centroids(h)?;
                Verifier::Kmeans(kmeans_fit(&pooled(), &[c1, c2], metric)?.model)
            }
            ClassifierId::FuzzyKmeans => {
                let (c1, c2) = initial_centroids(h)?;
                Verifier::FuzzyKmeans(fuzzy_fit(&pooled(), &[c1, c2], fuzzy)?)
            }
            ClassifierId::Knn => Verifier::Knn(knn_fit(h, fuzzy.m_f)?),
            ClassifierId::FuzzyKnn => Verifier::FuzzyKnn(knn_fit(h, fuzzy.m_f)?),
            ClassifierId::Avg => Verifier::Threshold(avg_fit(h)?),
            ClassifierId::Avgmax => Verifier::Threshold(avgmax_fit(h)?),
        })
    }

    pub fn decide(&self, value: f64) -> Decision {
        match self {
            Verifier::Kmeans(m) => {
                let c = kmeans_classify(m, value);
                Decision { accept: c == m.genuine_cluster, score: c as f64 }
            }
            Verifier::FuzzyKmeans(m) => {
                let (u, c) = fuzzy_classify(m, value);
                Decision { accept: c == GENUINE_CLUSTER, score: u[GENUINE_CLUSTER - 1] }
            }
            Verifier::Knn(m) => Decision { accept: knn_classify(m, value), score: knn_score(m, value) },
            Verifier::FuzzyKnn(m) => {
                let (membership, accept) = fuzzy_knn_classify(m, value);
                Decision { accept, score: membership }
            }
            Verifier::Threshold(m) => {
                let accept = match m.rule {
                    ThresholdRule::Avg => avg_decide(m, value),
                    ThresholdRule::AvgMax => avgmax_decide(m, value),
                };
                Decision { accept, score: value - m.mean }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_centroid_substitution() {
        assert_eq!(initial_centroids(&[2.0, 4.0]).unwrap(), (2.0, 5.0));
        let (c1, c2) = initial_centroids(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((c1, c2), (1.0, 1.5));
        assert!(c2 > 1.0);
        assert_eq!(initial_centroids(&[]), Err(ClassifierError::Empty));
        // Non-positive maximum falls back to max + 1.
        assert_eq!(initial_centroids(&[-3.0, -1.0]).unwrap(), (-3.0, -1.5));
    }

    #[test]
    fn second_seed_exceeds_max_for_positive_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..1000 {
            let n = rng.gen_range(1..12);
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-6..1e3)).collect();
            let (_, c2) = initial_centroids(&h).unwrap();
            assert!(c2 > h.iter().copied().fold(f64::MIN, f64::max));
        }
    }

    #[test]
    fn metrics_agree_on_scalars() {
        for (a, b) in [(0.0, 3.5), (-2.0, 7.25), (1e10, -1e10)] {
            assert_eq!(Metric::Euclidean.distance(a, b), Metric::Cityblock.distance(a, b));
        }
    }

    #[test]
    fn classifier_names_round_trip() {
        for id in ClassifierId::ALL {
            assert_eq!(id.name().parse::<ClassifierId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
        assert!("svm".parse::<ClassifierId>().is_err());
    }

    #[test]
    fn verifier_serializes() {
        let h = [1.0, 1.2, 0.9];
        for id in ClassifierId::ALL {
            let v = Verifier::fit(id, &h, &[], FuzzyParams::default()).unwrap();
            let json = serde_json::to_string(&v).unwrap();
            let back: Verifier = serde_json::from_str(&json).unwrap();
            assert_eq!(back, v, "{id}");
            assert!(v.decide(1.0).accept, "{id} rejects a training value");
            assert!(!v.decide(50.0).accept, "{id} accepts a far value");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn genuine() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.1f64..100.0, 2..8)
        }

        proptest! {
            #[test]
            fn scaling_keeps_decisions(h in genuine(), v in 0.0f64..300.0, k in -8i32..8) {
                // Powers of two scale exactly, so any flip would be a real defect.
                let c = 2f64.powi(k);
                let scaled: Vec<f64> = h.iter().map(|x| x * c).collect();
                for id in [
                    ClassifierId::KmeansEuclidean,
                    ClassifierId::KmeansCityblock,
                    ClassifierId::Knn,
                    ClassifierId::Avg,
                    ClassifierId::Avgmax,
                ] {
                    let a = Verifier::fit(id, &h, &[], FuzzyParams::default()).unwrap();
                    let b = Verifier::fit(id, &scaled, &[], FuzzyParams::default()).unwrap();
                    prop_assert_eq!(a.decide(v).accept, b.decide(v * c).accept, "{}", id);
                }
            }

            #[test]
            fn nearer_values_stay_accepted(h in genuine(), t in -200.0f64..200.0, shrink in 0.0f64..1.0) {
                let mu = mean(&h);
                let v = mu + t;
                let closer = mu + t * shrink;
                for id in [ClassifierId::Avg, ClassifierId::Avgmax] {
                    let m = Verifier::fit(id, &h, &[], FuzzyParams::default()).unwrap();
                    if m.decide(v).accept {
                        prop_assert!(m.decide(closer).accept, "{}", id);
                    }
                }
            }
        }
    }
}
