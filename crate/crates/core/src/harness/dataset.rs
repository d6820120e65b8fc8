use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::imaging::{otsu_binarize, read_image, BinaryImage, GrayImage};
use crate::iris::{extract_pif, WindowSpec};
use crate::moments::MassImage;
use crate::signature::preprocess_signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Iris,
    Signature,
}

impl std::str::FromStr for Modality {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "iris" => Ok(Modality::Iris),
            "signature" => Ok(Modality::Signature),
            other => Err(format!("unknown modality {other:?} (iris|signature)")),
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Iris => "iris",
            Modality::Signature => "signature",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub genuine: Vec<PathBuf>,
    /// Explicit imposter or forgery samples. When empty, the experiment
    /// draws imposters from the other subjects' genuine test samples.
    #[serde(default)]
    pub imposter: Vec<PathBuf>,
}

/// On-disk description of a corpus. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub modality: Modality,
    pub database: String,
    pub training_count: usize,
    pub subjects: Vec<SubjectRecord>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| io_error(path, source))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Schema { path: path.to_owned(), source })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|source| io_error(path, source))
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(HarnessError::NoSubjects);
        }
        if self.training_count < 2 {
            return Err(HarnessError::Config(format!(
                "training_count must be at least 2, got {}",
                self.training_count
            )));
        }
        let mut seen = HashSet::new();
        for s in &self.subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(HarnessError::DuplicateSubject(s.id.clone()));
            }
            if s.genuine.len() < self.training_count {
                return Err(HarnessError::TooFewGenuine {
                    subject: s.id.clone(),
                    count: s.genuine.len(),
                    needed: self.training_count,
                });
            }
        }
        Ok(())
    }
}

fn io_error(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.to_owned(), source }
}

/// Pixel mass used for iris crops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IrisMass {
    /// Intensity / 255.
    #[default]
    Gray,
    /// Otsu-binarised crop; dark pixels carry unit mass.
    Binary,
}

impl std::str::FromStr for IrisMass {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gray" => Ok(IrisMass::Gray),
            "binary" => Ok(IrisMass::Binary),
            other => Err(format!("unknown iris mass {other:?} (gray|binary)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub window: WindowSpec,
    pub swap_axes: bool,
    pub iris_mass: IrisMass,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { window: WindowSpec::new(20, 40), swap_axes: true, iris_mass: IrisMass::Gray }
    }
}

/// A 512×512 pipeline output, ready for moment extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prepared {
    Gray(GrayImage),
    Binary(BinaryImage),
}

impl Prepared {
    pub fn to_mass(&self) -> MassImage {
        match self {
            Prepared::Gray(g) => MassImage::from_gray(g),
            Prepared::Binary(b) => MassImage::from_binary(b),
        }
    }
}

/// Decodes and normalises one sample file.
pub fn preprocess_file(
    path: &Path,
    modality: Modality,
    opts: &PreprocessOptions,
) -> std::result::Result<Prepared, String> {
    let img = read_image(path).map_err(|e| e.to_string())?;
    match modality {
        Modality::Signature => {
            let sig = preprocess_signature(img).map_err(|e| e.to_string())?;
            Ok(Prepared::Binary(sig.into_image()))
        }
        Modality::Iris => {
            let eye = img.into_gray().map_err(|e| e.to_string())?;
            let pif = extract_pif(&eye, &opts.window, opts.swap_axes).map_err(|e| e.to_string())?;
            match opts.iris_mass {
                IrisMass::Gray => Ok(Prepared::Gray(pif.into_image())),
                IrisMass::Binary => otsu_binarize(pif.image()).map(Prepared::Binary).map_err(|e| e.to_string()),
            }
        }
    }
}

/// Sample indices of one subject, in manifest order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectSamples {
    pub id: String,
    pub genuine: Vec<usize>,
    pub imposter: Vec<usize>,
}

/// A validated manifest with every distinct sample path resolved and
/// (eagerly or on first use) preprocessed.
#[derive(Debug)]
pub struct Dataset {
    manifest: DatasetManifest,
    options: PreprocessOptions,
    paths: Vec<PathBuf>,
    /// First subject referencing each path, for error context.
    owners: Vec<String>,
    subjects: Vec<SubjectSamples>,
    cache: Vec<OnceLock<std::result::Result<Arc<Prepared>, String>>>,
}

pub fn load_dataset(manifest_path: &Path, options: PreprocessOptions, eager: bool) -> Result<Dataset> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    Dataset::new(manifest, root, options, eager)
}

impl Dataset {
    pub fn new(manifest: DatasetManifest, root: &Path, options: PreprocessOptions, eager: bool) -> Result<Self> {
        manifest.validate()?;
        let mut index: HashMap<PathBuf, usize> = HashMap::new();
        let mut paths = Vec::new();
        let mut owners = Vec::new();
        let mut subjects = Vec::with_capacity(manifest.subjects.len());
        for s in &manifest.subjects {
            let mut resolve = |p: &PathBuf| -> Result<usize> {
                let full = root.join(p);
                if let Some(&i) = index.get(&full) {
                    return Ok(i);
                }
                if !full.is_file() {
                    return Err(HarnessError::MissingFile(full));
                }
                index.insert(full.clone(), paths.len());
                paths.push(full);
                owners.push(s.id.clone());
                Ok(paths.len() - 1)
            };
            let genuine = s.genuine.iter().map(&mut resolve).collect::<Result<Vec<_>>>()?;
            let imposter = s.imposter.iter().map(&mut resolve).collect::<Result<Vec<_>>>()?;
            subjects.push(SubjectSamples { id: s.id.clone(), genuine, imposter });
        }
        let cache = (0..paths.len()).map(|_| OnceLock::new()).collect();
        let ds = Dataset { manifest, options, paths, owners, subjects, cache };
        if eager {
            (0..ds.paths.len()).into_par_iter().try_for_each(|i| ds.sample(i).map(|_| ()))?;
        }
        Ok(ds)
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn modality(&self) -> Modality {
        self.manifest.modality
    }

    pub fn training_count(&self) -> usize {
        self.manifest.training_count
    }

    pub fn subjects(&self) -> &[SubjectSamples] {
        &self.subjects
    }

    pub fn sample_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, sample: usize) -> &Path {
        &self.paths[sample]
    }

    /// Preprocessed sample, computed once and shared afterwards.
    pub fn sample(&self, sample: usize) -> Result<Arc<Prepared>> {
        let cell = self.cache[sample]
            .get_or_init(|| preprocess_file(&self.paths[sample], self.manifest.modality, &self.options).map(Arc::new));
        cell.clone().map_err(|message| HarnessError::Sample {
            subject: self.owners[sample].clone(),
            path: self.paths[sample].clone(),
            message,
        })
    }
}
