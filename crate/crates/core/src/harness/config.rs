use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::dataset::{IrisMass, Modality, PreprocessOptions};
use super::{HarnessError, Result};
use crate::classifiers::{ClassifierId, FuzzyParams};
use crate::iris::WindowSpec;
use crate::moments::MomentKind;
use crate::quadtree::{TileOrder, IMAGE_SIDE};

/// Subregion sides accepted by experiments.
pub const SUPPORTED_D1: [usize; 3] = [64, 128, 256];

/// Offsets used when the database has no published window.
const FALLBACK_WINDOW: WindowSpec = WindowSpec { offset_1: 20, offset_2: 40 };

/// One point of an experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d1: usize,
    pub b: usize,
    pub kind: MomentKind,
    pub classifier: ClassifierId,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_D1.contains(&self.d1) {
            return Err(HarnessError::Config(format!("d1 must be one of {SUPPORTED_D1:?}, got {}", self.d1)));
        }
        let l = (IMAGE_SIDE / self.d1).pow(2);
        if self.b == 0 || self.b > l {
            return Err(HarnessError::Config(format!("b must lie in 1..={l} for d1 = {}, got {}", self.d1, self.b)));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Experiment settings. List-valued fields span a grid; each accepts a
/// single value or an array in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub d1: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub b: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub kind: Vec<MomentKind>,
    #[serde(deserialize_with = "one_or_many")]
    pub classifier: Vec<ClassifierId>,
    /// Expected modality; a mismatch with the manifest is an error.
    pub modality: Option<Modality>,
    pub offset_1: Option<i64>,
    pub offset_2: Option<i64>,
    pub swap_axes: bool,
    pub tile_order: TileOrder,
    pub seed: u64,
    pub iris_mass: IrisMass,
    /// Upper bound on imposter samples per subject, drawn with `seed`.
    pub max_imposters: Option<usize>,
    /// Leading imposter samples fed to the k-means fits instead of being tested.
    pub imposter_training: usize,
    pub fuzzy: FuzzyParams,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub eager: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            d1: vec![128],
            b: vec![6],
            kind: vec![MomentKind::C],
            classifier: ClassifierId::ALL.to_vec(),
            modality: None,
            offset_1: None,
            offset_2: None,
            swap_axes: true,
            tile_order: TileOrder::Morton,
            seed: 0,
            iris_mass: IrisMass::Gray,
            max_imposters: None,
            imposter_training: 0,
            fuzzy: FuzzyParams::default(),
            threads: None,
            eager: true,
        }
    }
}

impl GridConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Schema { path: path.to_owned(), source })
    }

    /// Grid points in (kind, d1, b, classifier) nesting order.
    pub fn points(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &kind in &self.kind {
            for &d1 in &self.d1 {
                for &b in &self.b {
                    for &classifier in &self.classifier {
                        out.push(ExperimentConfig { d1, b, kind, classifier });
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.d1.is_empty() || self.b.is_empty() || self.kind.is_empty() || self.classifier.is_empty() {
            return Err(HarnessError::Config("d1, b, kind and classifier need at least one value".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be positive".into()));
        }
        if !(self.fuzzy.m_f > 1.0) || !(self.fuzzy.epsilon > 0.0) {
            return Err(HarnessError::Config("fuzzy m_f must exceed 1 and epsilon must be positive".into()));
        }
        self.points().iter().try_for_each(ExperimentConfig::validate)
    }

    /// Window offsets: explicit values win over the database's published ones.
    pub fn window(&self, database: &str) -> WindowSpec {
        let base = WindowSpec::for_database(database).unwrap_or(FALLBACK_WINDOW);
        WindowSpec::new(self.offset_1.unwrap_or(base.offset_1), self.offset_2.unwrap_or(base.offset_2))
    }

    pub fn preprocess_options(&self, database: &str) -> PreprocessOptions {
        PreprocessOptions { window: self.window(database), swap_axes: self.swap_axes, iris_mass: self.iris_mass }
    }
}
