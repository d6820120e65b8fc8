use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::GridConfig;
use super::dataset::{preprocess_file, Dataset, Modality, PreprocessOptions};
use super::experiment::imposter_pool;
use super::{HarnessError, Result};
use crate::classifiers::{ClassifierId, Decision, Verifier};
use crate::mvqc::{component_moments, enroll_from_components, moment_summation, EnrollParams, MvqcTemplate};
use crate::quadtree::decompose;

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub classifier: ClassifierId,
    pub model: Verifier,
}

/// Everything needed to verify a claim against one subject: how to
/// preprocess a probe, which components to sum, and the fitted rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateDocument {
    pub version: u32,
    pub modality: Modality,
    pub preprocess: PreprocessOptions,
    pub template: MvqcTemplate,
    pub models: Vec<ClassifierModel>,
}

impl TemplateDocument {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Schema { path: path.to_owned(), source })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("template serializes") + "\n";
        std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
    }

    /// Model for `classifier`, or the first stored one.
    pub fn model(&self, classifier: Option<ClassifierId>) -> Result<&ClassifierModel> {
        match classifier {
            None => self.models.first(),
            Some(c) => self.models.iter().find(|m| m.classifier == c),
        }
        .ok_or_else(|| HarnessError::Config(format!("template has no model for {classifier:?}")))
    }
}

/// Enrolls every subject on its first P genuine samples. The grid must
/// name a single d1, b and moment kind; one model is fitted per classifier.
pub fn enroll_dataset(ds: &Dataset, cfg: &GridConfig, options: PreprocessOptions) -> Result<Vec<TemplateDocument>> {
    cfg.validate()?;
    let ([d1], [b], [kind]) = (cfg.d1.as_slice(), cfg.b.as_slice(), cfg.kind.as_slice()) else {
        return Err(HarnessError::Config("enrollment needs exactly one d1, b and kind".into()));
    };
    let params = EnrollParams { d1: *d1, kind: *kind, b: *b, tile_order: cfg.tile_order };
    let grid = decompose(params.d1, params.tile_order).map_err(crate::mvqc::MvqcError::from)?;
    let p = ds.training_count();
    let features = |idx: &[usize]| -> Result<Vec<Vec<f64>>> {
        idx.iter()
            .map(|&i| Ok(component_moments(&ds.sample(i)?.to_mass(), &grid, params.kind)?))
            .collect()
    };
    (0..ds.subjects().len())
        .into_par_iter()
        .map(|si| {
            let s = &ds.subjects()[si];
            let template = enroll_from_components(&s.id, features(&s.genuine[..p])?, params)?;
            let pool = imposter_pool(ds, cfg, si);
            let imposters: Vec<f64> = features(&pool[..cfg.imposter_training.min(pool.len())])?
                .iter()
                .map(|row| template.summation_of(row))
                .collect();
            let models = cfg
                .classifier
                .iter()
                .map(|&c| {
                    Ok(ClassifierModel {
                        classifier: c,
                        model: Verifier::fit(c, &template.training_features, &imposters, cfg.fuzzy)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TemplateDocument { version: DOCUMENT_VERSION, modality: ds.modality(), preprocess: options, template, models })
        })
        .collect()
}

/// Preprocesses `sample`, sums its template components and applies the
/// chosen rule. Returns the decision and the probe's moment summation.
pub fn verify_sample(doc: &TemplateDocument, sample: &Path, classifier: Option<ClassifierId>) -> Result<(Decision, f64)> {
    let model = doc.model(classifier)?;
    let prepared = preprocess_file(sample, doc.modality, &doc.preprocess).map_err(|message| HarnessError::Sample {
        subject: doc.template.subject_id.clone(),
        path: sample.to_owned(),
        message,
    })?;
    let value = moment_summation(&prepared.to_mass(), &doc.template)?;
    Ok((model.model.decide(value), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dataset::load_dataset;
    use crate::harness::synth::{synth_generate, SynthParams};

    #[test]
    fn enroll_then_verify() {
        let dir = tempfile::tempdir().unwrap();
        let params = SynthParams { subjects: 3, genuine: 4, training_count: 3, ..SynthParams::default() };
        let manifest = synth_generate(&params, dir.path()).unwrap();
        let cfg = GridConfig::default();
        let opts = cfg.preprocess_options("synthetic");
        let ds = load_dataset(&dir.path().join("manifest.json"), opts, false).unwrap();
        let docs = enroll_dataset(&ds, &cfg, opts).unwrap();
        assert_eq!(docs.len(), 3);

        let path = dir.path().join("t.json");
        docs[0].write(&path).unwrap();
        let doc = TemplateDocument::read(&path).unwrap();
        assert_eq!(doc, docs[0]);
        assert_eq!(doc.models.len(), ClassifierId::ALL.len());

        let own = dir.path().join(&manifest.subjects[0].genuine[3]);
        let other = dir.path().join(&manifest.subjects[1].genuine[3]);
        for c in ClassifierId::ALL {
            assert!(verify_sample(&doc, &own, Some(c)).unwrap().0.accept, "{c}");
            assert!(!verify_sample(&doc, &other, Some(c)).unwrap().0.accept, "{c}");
        }
    }

    #[test]
    fn grids_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let params = SynthParams { subjects: 2, genuine: 3, training_count: 2, ..SynthParams::default() };
        synth_generate(&params, dir.path()).unwrap();
        let cfg = GridConfig { b: vec![4, 6], ..GridConfig::default() };
        let opts = cfg.preprocess_options("synthetic");
        let ds = load_dataset(&dir.path().join("manifest.json"), opts, false).unwrap();
        assert!(enroll_dataset(&ds, &cfg, opts).is_err());
    }
}
