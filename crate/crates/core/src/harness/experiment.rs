use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridConfig};
use super::dataset::{Dataset, Modality};
use super::silhouette::silhouette_score;
use super::{HarnessError, Result};
use crate::classifiers::{ClassifierId, Metric, Verifier};
use crate::moments::MomentKind;
use crate::mvqc::{component_moments, enroll_from_components, EnrollParams};
use crate::quadtree::{decompose, TileOrder};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectResult {
    pub id: String,
    pub genuine_tested: usize,
    pub genuine_rejected: usize,
    pub frr: f64,
    pub imposter_tested: usize,
    pub imposter_accepted: usize,
    /// Absent when the subject had no imposter trials.
    pub far: Option<f64>,
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub subjects: Vec<SubjectResult>,
    pub frr: f64,
    pub far: Option<f64>,
    pub zero_frr: usize,
    pub zero_far: usize,
    /// Mean silhouette of the k-means test-time clustering, where defined.
    pub silhouette: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub version: u32,
    pub modality: Modality,
    pub database: String,
    pub training_count: usize,
    pub config: GridConfig,
    pub runs: Vec<EvalReport>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// Sample indices a subject is trained and tested on.
struct TrialPlan {
    subject: usize,
    train: Vec<usize>,
    genuine_test: Vec<usize>,
    imposter_train: Vec<usize>,
    imposter_test: Vec<usize>,
}

/// Imposter samples for subject `si`: its explicit list, or else every other
/// subject's genuine test samples; capped by `max_imposters` with a seeded draw.
pub(super) fn imposter_pool(ds: &Dataset, cfg: &GridConfig, si: usize) -> Vec<usize> {
    let p = ds.training_count();
    let subjects = ds.subjects();
    let mut imposters: Vec<usize> = if subjects[si].imposter.is_empty() {
        subjects
            .iter()
            .enumerate()
            .filter(|&(oi, _)| oi != si)
            .flat_map(|(_, o)| o.genuine.iter().skip(p).copied())
            .collect()
    } else {
        subjects[si].imposter.clone()
    };
    if let Some(cap) = cfg.max_imposters {
        if imposters.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (si as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut keep = rand::seq::index::sample(&mut rng, imposters.len(), cap).into_vec();
            keep.sort_unstable();
            imposters = keep.into_iter().map(|i| imposters[i]).collect();
        }
    }
    imposters
}

fn plan_trials(ds: &Dataset, cfg: &GridConfig, warnings: &mut Vec<String>) -> Vec<TrialPlan> {
    let p = ds.training_count();
    let subjects = ds.subjects();
    let mut plans = Vec::new();
    for (si, s) in subjects.iter().enumerate() {
        if s.genuine.len() < p + 1 {
            warnings.push(format!(
                "subject {} skipped: {} genuine samples, need at least {}",
                s.id,
                s.genuine.len(),
                p + 1
            ));
            continue;
        }
        let mut imposters = imposter_pool(ds, cfg, si);
        let n_train = cfg.imposter_training.min(imposters.len());
        let imposter_test = imposters.split_off(n_train);
        plans.push(TrialPlan {
            subject: si,
            train: s.genuine[..p].to_vec(),
            genuine_test: s.genuine[p..].to_vec(),
            imposter_train: imposters,
            imposter_test,
        });
    }
    plans
}

/// Component moments of every sample for one (d1, kind).
pub(super) fn sample_features(ds: &Dataset, d1: usize, kind: MomentKind, order: TileOrder) -> Result<Vec<Vec<f64>>> {
    let grid = decompose(d1, order).map_err(crate::mvqc::MvqcError::from)?;
    (0..ds.sample_count())
        .into_par_iter()
        .map(|i| {
            let mass = ds.sample(i)?.to_mass();
            Ok(component_moments(&mass, &grid, kind)?)
        })
        .collect()
}

/// Per-classifier outcome for one subject, plus its silhouette if defined.
fn evaluate_subject(
    ds: &Dataset,
    plan: &TrialPlan,
    features: &[Vec<f64>],
    params: EnrollParams,
    classifiers: &[ClassifierId],
    cfg: &GridConfig,
) -> Result<Vec<(SubjectResult, Option<f64>)>> {
    let id = &ds.subjects()[plan.subject].id;
    let rows = plan.train.iter().map(|&i| features[i].clone()).collect();
    let template = enroll_from_components(id, rows, params)?;
    let sum = |idx: &[usize]| idx.iter().map(|&i| template.summation_of(&features[i])).collect::<Vec<f64>>();
    let imposter_train = sum(&plan.imposter_train);
    let genuine = sum(&plan.genuine_test);
    let imposter = sum(&plan.imposter_test);
    classifiers
        .iter()
        .map(|&c| {
            let model = Verifier::fit(c, &template.training_features, &imposter_train, cfg.fuzzy)?;
            let genuine_rejected = genuine.iter().filter(|&&v| !model.decide(v).accept).count();
            let imposter_accepted = imposter.iter().filter(|&&v| model.decide(v).accept).count();
            let silhouette = if c.is_kmeans() {
                let metric = if c == ClassifierId::KmeansEuclidean { Metric::Euclidean } else { Metric::Cityblock };
                let values: Vec<f64> = genuine.iter().chain(&imposter).copied().collect();
                let clusters: Vec<usize> = values.iter().map(|&v| model.decide(v).score as usize).collect();
                silhouette_score(&values, &clusters, metric).ok()
            } else {
                None
            };
            let result = SubjectResult {
                id: id.clone(),
                genuine_tested: genuine.len(),
                genuine_rejected,
                frr: 100.0 * genuine_rejected as f64 / genuine.len() as f64,
                imposter_tested: imposter.len(),
                imposter_accepted,
                far: (!imposter.is_empty()).then(|| 100.0 * imposter_accepted as f64 / imposter.len() as f64),
            };
            Ok((result, silhouette))
        })
        .collect()
}

fn summarize(config: ExperimentConfig, rows: Vec<(SubjectResult, Option<f64>)>) -> EvalReport {
    let n = rows.len();
    let frr = if n == 0 { 0.0 } else { rows.iter().map(|r| r.0.frr).sum::<f64>() / n as f64 };
    let fars: Vec<f64> = rows.iter().filter_map(|r| r.0.far).collect();
    let far = (!fars.is_empty()).then(|| fars.iter().sum::<f64>() / fars.len() as f64);
    let sil: Vec<f64> = rows.iter().filter_map(|r| r.1).collect();
    let silhouette = (!sil.is_empty()).then(|| sil.iter().sum::<f64>() / sil.len() as f64);
    let subjects: Vec<SubjectResult> = rows.into_iter().map(|r| r.0).collect();
    EvalReport {
        config,
        zero_frr: subjects.iter().filter(|s| s.genuine_rejected == 0).count(),
        zero_far: subjects.iter().filter(|s| s.far == Some(0.0)).count(),
        subjects,
        frr,
        far,
        silhouette,
    }
}

fn run_grid(ds: &Dataset, cfg: &GridConfig) -> Result<(Vec<EvalReport>, Vec<String>)> {
    let mut warnings = Vec::new();
    let plans = plan_trials(ds, cfg, &mut warnings);
    let mut runs = Vec::new();
    for &kind in &cfg.kind {
        for &d1 in &cfg.d1 {
            let features = sample_features(ds, d1, kind, cfg.tile_order)?;
            for &b in &cfg.b {
                let params = EnrollParams { d1, kind, b, tile_order: cfg.tile_order };
                let per_subject = plans
                    .par_iter()
                    .map(|plan| evaluate_subject(ds, plan, &features, params, &cfg.classifier, cfg))
                    .collect::<Result<Vec<_>>>()?;
                for (ci, &classifier) in cfg.classifier.iter().enumerate() {
                    let rows = per_subject.iter().map(|s| s[ci].clone()).collect();
                    runs.push(summarize(ExperimentConfig { d1, b, kind, classifier }, rows));
                }
            }
        }
    }
    Ok((runs, warnings))
}

/// Runs every grid point of `cfg` over `ds`.
///
/// Each subject enrolls on its first P genuine samples and is tested on the
/// rest of its genuine samples and on its imposter samples. Subjects run in
/// parallel and results are merged in manifest order, so the report does not
/// depend on the thread count. `timing` adds the wall-clock duration.
pub fn run_experiment(ds: &Dataset, cfg: &GridConfig, timing: bool) -> Result<GridReport> {
    cfg.validate()?;
    if let Some(m) = cfg.modality {
        if m != ds.modality() {
            return Err(HarnessError::Config(format!("config expects {m} data, manifest holds {}", ds.modality())));
        }
    }
    let start = Instant::now();
    let (runs, warnings) = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(|| run_grid(ds, cfg))?,
        None => run_grid(ds, cfg)?,
    };
    let manifest = ds.manifest();
    Ok(GridReport {
        version: REPORT_VERSION,
        modality: manifest.modality,
        database: manifest.database.clone(),
        training_count: manifest.training_count,
        config: GridConfig { threads: None, eager: GridConfig::default().eager, ..cfg.clone() },
        runs,
        warnings,
        elapsed_ms: timing.then(|| start.elapsed().as_millis() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dataset::{DatasetManifest, PreprocessOptions, SubjectRecord};
    use crate::imaging::{write_pgm, GrayImage};
    use std::path::Path;

    /// Full-frame signature page over a 4×4 layout of 128-pixel cells. Cells
    /// listed in `rings` hold a ring of the given radius, the rest a solid block.
    fn page(dir: &Path, name: &str, rings: &[(usize, i64)]) -> std::path::PathBuf {
        let img = GrayImage::from_fn(512, 512, |x, y| {
            if x == 0 || y == 0 || x == 511 || y == 511 {
                return 0;
            }
            let cell = (y / 128) * 4 + x / 128;
            let (cx, cy) = ((x % 128) as i64 - 64, (y % 128) as i64 - 64);
            match rings.iter().find(|r| r.0 == cell) {
                Some(&(_, r)) => {
                    let d2 = cx * cx + cy * cy;
                    if d2 <= r * r && d2 >= (r - 3) * (r - 3) {
                        0
                    } else {
                        255
                    }
                }
                None if cx.abs() < 30 && cy.abs() < 30 => 0,
                None => 255,
            }
        });
        let path = dir.join(name);
        write_pgm(&path, &img).unwrap();
        path
    }

    fn config(classifiers: Vec<ClassifierId>) -> GridConfig {
        GridConfig { d1: vec![128], b: vec![4], classifier: classifiers, ..GridConfig::default() }
    }

    #[test]
    fn separated_imposters_give_zero_error_rates() {
        let dir = tempfile::tempdir().unwrap();
        // Genuine pages vary only in the bottom row; imposters ring every other cell.
        let genuine: Vec<_> = (0..5)
            .map(|k| page(dir.path(), &format!("g{k}.pgm"), &[(12, 20 + k), (13, 30 + k), (14, 40 + k), (15, 50 - k)]))
            .collect();
        let imposter: Vec<_> = (0..3)
            .map(|k| {
                let rings: Vec<(usize, i64)> = (0..12).map(|c| (c, 25 + k + c as i64)).collect();
                page(dir.path(), &format!("i{k}.pgm"), &rings)
            })
            .collect();
        let manifest = DatasetManifest {
            modality: Modality::Signature,
            database: "test".into(),
            training_count: 3,
            subjects: vec![SubjectRecord {
                id: "a".into(),
                genuine: genuine.iter().map(|p| p.file_name().unwrap().into()).collect(),
                imposter: imposter.iter().map(|p| p.file_name().unwrap().into()).collect(),
            }],
        };
        let ds = Dataset::new(manifest, dir.path(), PreprocessOptions::default(), true).unwrap();
        let report = run_experiment(&ds, &config(ClassifierId::ALL.to_vec()), false).unwrap();
        assert_eq!(report.runs.len(), 7);
        for run in &report.runs {
            let s = &run.subjects[0];
            assert_eq!((s.genuine_tested, s.imposter_tested), (2, 3));
            assert_eq!(run.frr, 0.0, "{}", run.config.classifier);
            assert_eq!(run.far, Some(0.0), "{}", run.config.classifier);
            assert_eq!((run.zero_frr, run.zero_far), (1, 1));
        }
    }

    #[test]
    fn copied_genuine_imposters_are_all_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let genuine: Vec<_> = (0..5)
            .map(|k| page(dir.path(), &format!("g{k}.pgm"), &[(12, 20 + k), (13, 30 + k)]))
            .collect();
        let names: Vec<std::path::PathBuf> = genuine.iter().map(|p| p.file_name().unwrap().into()).collect();
        let manifest = DatasetManifest {
            modality: Modality::Signature,
            database: "test".into(),
            training_count: 3,
            subjects: vec![SubjectRecord { id: "a".into(), genuine: names.clone(), imposter: names[..3].to_vec() }],
        };
        let ds = Dataset::new(manifest, dir.path(), PreprocessOptions::default(), true).unwrap();
        let report = run_experiment(&ds, &config(vec![ClassifierId::Avg, ClassifierId::Avgmax]), false).unwrap();
        for run in &report.runs {
            assert_eq!(run.far, Some(100.0), "{}", run.config.classifier);
        }
    }

    #[test]
    fn undersampled_subjects_are_skipped_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let mk = |n: usize, tag: &str| -> Vec<std::path::PathBuf> {
            (0..n)
                .map(|k| {
                    page(dir.path(), &format!("{tag}{k}.pgm"), &[(12, 20 + k as i64)]);
                    format!("{tag}{k}.pgm").into()
                })
                .collect()
        };
        let manifest = DatasetManifest {
            modality: Modality::Signature,
            database: "test".into(),
            training_count: 3,
            subjects: vec![
                SubjectRecord { id: "short".into(), genuine: mk(3, "s"), imposter: vec![] },
                SubjectRecord { id: "full".into(), genuine: mk(5, "f"), imposter: vec![] },
            ],
        };
        let ds = Dataset::new(manifest, dir.path(), PreprocessOptions::default(), false).unwrap();
        let report = run_experiment(&ds, &config(vec![ClassifierId::Knn]), false).unwrap();
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("short"));
        let run = &report.runs[0];
        assert_eq!(run.subjects.len(), 1);
        // The short subject has no test samples to lend, so `full` has no imposters.
        assert_eq!(run.subjects[0].imposter_tested, 0);
        assert_eq!(run.far, None);
        assert_eq!(run.zero_far, 0);
    }

    #[test]
    fn modality_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let names: Vec<std::path::PathBuf> = (0..3)
            .map(|k| {
                page(dir.path(), &format!("g{k}.pgm"), &[]);
                format!("g{k}.pgm").into()
            })
            .collect();
        let manifest = DatasetManifest {
            modality: Modality::Signature,
            database: "test".into(),
            training_count: 2,
            subjects: vec![SubjectRecord { id: "a".into(), genuine: names, imposter: vec![] }],
        };
        let ds = Dataset::new(manifest, dir.path(), PreprocessOptions::default(), false).unwrap();
        let cfg = GridConfig { modality: Some(Modality::Iris), ..config(vec![ClassifierId::Avg]) };
        assert!(run_experiment(&ds, &cfg, false).is_err());
    }
}
