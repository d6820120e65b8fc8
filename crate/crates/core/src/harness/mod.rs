//! Dataset ingestion, the enroll/verify protocol, FRR/FAR evaluation,
//! synthetic corpora and report rendering.

mod config;
mod dataset;
mod enrollment;
mod experiment;
mod report;
mod silhouette;
mod synth;

pub use config::{ExperimentConfig, GridConfig};
pub use dataset::{
    load_dataset, preprocess_file, Dataset, DatasetManifest, IrisMass, Modality, PreprocessOptions, Prepared,
    SubjectRecord,
};
pub use enrollment::{enroll_dataset, verify_sample, ClassifierModel, TemplateDocument};
pub use experiment::{run_experiment, EvalReport, GridReport, SubjectResult, REPORT_VERSION};
pub use report::{read_report, render, report_emit, ReportFormat};
pub use silhouette::silhouette_score;
pub use synth::{parse_separation, synth_generate, SynthParams};

use std::path::PathBuf;

use thiserror::Error;

use crate::classifiers::ClassifierError;
use crate::mvqc::MvqcError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no subjects")]
    NoSubjects,
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Schema { path: PathBuf, source: serde_json::Error },
    #[error("subject {subject}: {}: {message}", path.display())]
    Sample { subject: String, path: PathBuf, message: String },
    #[error("subject {subject} has {count} genuine samples, training needs {needed}")]
    TooFewGenuine { subject: String, count: usize, needed: usize },
    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("silhouette needs at least two non-empty clusters")]
    SingleCluster,
    #[error(transparent)]
    Mvqc(#[from] MvqcError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
