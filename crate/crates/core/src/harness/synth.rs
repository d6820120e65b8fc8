//! Deterministic synthetic corpora standing in for licensed biometric data.
//!
//! Both modalities share one layout idea: the 4×4 cells of the normalised
//! frame (the d1 = 128 components) are either *stable*, holding content that
//! is identical across a subject's samples, or *volatile*, redrawn for every
//! sample. Each subject owns a distinct set of six stable cells, so another
//! subject's sample is volatile in at least one of them. Volatile content
//! is built to carry a larger Moment_C than stable content.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{DatasetManifest, Modality, SubjectRecord};
use super::{HarnessError, Result};
use crate::imaging::{write_pgm, GrayImage};

const STABLE_CELLS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub subjects: usize,
    pub modality: Modality,
    /// Larger values mean less within-subject variation; must be positive.
    pub separation: f64,
    /// Genuine samples per subject.
    pub genuine: usize,
    pub training_count: usize,
}

impl SynthParams {
    /// Defaults shaped like the public corpora: 15 signatures with 10 for
    /// training, or 7 eye images with 3 for training.
    pub fn new(modality: Modality) -> Self {
        let (genuine, training_count) = match modality {
            Modality::Signature => (15, 10),
            Modality::Iris => (7, 3),
        };
        Self { seed: 42, subjects: 20, modality, separation: 16.0, genuine, training_count }
    }
}

impl Default for SynthParams {
    fn default() -> Self {
        Self::new(Modality::Signature)
    }
}

/// Accepts a positive number or one of `low` (1), `medium` (4), `high` (16).
pub fn parse_separation(s: &str) -> std::result::Result<f64, String> {
    let v = match s {
        "low" => 1.0,
        "medium" => 4.0,
        "high" => 16.0,
        other => other.parse::<f64>().map_err(|_| format!("invalid separation {other:?}"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("separation must be positive, got {s}"))
    }
}

/// Writes a corpus under `out_dir` plus `manifest.json`, and returns the manifest.
/// Imposter lists are left empty, so every subject is tested against the
/// other subjects' genuine samples.
pub fn synth_generate(params: &SynthParams, out_dir: &Path) -> Result<DatasetManifest> {
    if !(params.separation.is_finite() && params.separation > 0.0) {
        return Err(HarnessError::Config(format!("separation must be positive, got {}", params.separation)));
    }
    if params.subjects == 0 {
        return Err(HarnessError::NoSubjects);
    }
    if params.training_count < 2 || params.genuine < params.training_count {
        return Err(HarnessError::Config(format!(
            "need 2 <= training_count <= genuine, got {} and {}",
            params.training_count, params.genuine
        )));
    }
    let candidates: Vec<usize> = match params.modality {
        Modality::Signature => (0..16).collect(),
        // The four central cells overlap the pupil and always vary.
        Modality::Iris => (0..16).filter(|c| !INNER_CELLS.contains(c)).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut stable_sets: Vec<Vec<usize>> = Vec::with_capacity(params.subjects);
    while stable_sets.len() < params.subjects {
        let mut pick: Vec<usize> = rand::seq::index::sample(&mut rng, candidates.len(), STABLE_CELLS)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        pick.sort_unstable();
        if !stable_sets.contains(&pick) {
            stable_sets.push(pick);
        }
    }

    let width = params.subjects.to_string().len().max(2);
    let ids: Vec<String> = (1..=params.subjects).map(|i| format!("s{i:0width$}")).collect();
    let jobs: Vec<(usize, usize)> =
        (0..params.subjects).flat_map(|s| (0..params.genuine).map(move |k| (s, k))).collect();
    for id in &ids {
        let dir = out_dir.join(id);
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir, source })?;
    }
    let rel = |s: usize, k: usize| PathBuf::from(&ids[s]).join(format!("g{:02}.pgm", k + 1));
    jobs.par_iter().try_for_each(|&(s, k)| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(1 + (s * params.genuine + k) as u64);
        let img = match params.modality {
            Modality::Signature => signature_page(&stable_sets[s], params.separation, &mut rng),
            Modality::Iris => eye_image(&stable_sets[s], params.separation, &mut rng),
        };
        let path = out_dir.join(rel(s, k));
        write_pgm(&path, &img).map_err(|e| HarnessError::Sample {
            subject: ids[s].clone(),
            path: path.clone(),
            message: e.to_string(),
        })
    })?;

    let manifest = DatasetManifest {
        modality: params.modality,
        database: "synthetic".into(),
        training_count: params.training_count,
        subjects: (0..params.subjects)
            .map(|s| SubjectRecord {
                id: ids[s].clone(),
                genuine: (0..params.genuine).map(|k| rel(s, k)).collect(),
                imposter: Vec::new(),
            })
            .collect(),
    };
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(manifest)
}

/// Uniform integer jitter in ±`amp`, rounded; exactly zero when `amp < 0.5`.
fn jitter(rng: &mut ChaCha8Rng, amp: f64) -> i64 {
    (rng.gen_range(-1.0..=1.0) * amp).round() as i64
}

const PAGE_W: usize = 850;
const PAGE_H: usize = 360;
const CANVAS_W: usize = 640;
const CANVAS_H: usize = 300;
const CELL_W: i64 = 160;
const CELL_H: i64 = 75;
/// Solid quadrilateral shared by every subject's stable cells.
const BLOB: [(i64, i64); 4] = [(40, 14), (120, 18), (116, 60), (44, 57)];

fn inside_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn signature_page(stable: &[usize], separation: f64, rng: &mut ChaCha8Rng) -> GrayImage {
    let mut ink = vec![false; CANVAS_W * CANVAS_H];
    let mut mark = |x: i64, y: i64| ink[y as usize * CANVAS_W + x as usize] = true;
    // Corner dots pin the ink bounding box to the canvas.
    for (cx, cy) in [(0, 0), (CANVAS_W as i64 - 3, 0), (0, CANVAS_H as i64 - 3), (CANVAS_W as i64 - 3, CANVAS_H as i64 - 3)] {
        for dy in 0..3 {
            for dx in 0..3 {
                mark(cx + dx, cy + dy);
            }
        }
    }
    let amp = 6.0 / separation;
    for cell in 0..16 {
        let (ox, oy) = ((cell % 4) as i64 * CELL_W, (cell / 4) as i64 * CELL_H);
        if stable.contains(&cell) {
            let poly: Vec<(f64, f64)> = BLOB
                .iter()
                .map(|&(x, y)| ((x + jitter(rng, amp)) as f64, (y + jitter(rng, amp)) as f64))
                .collect();
            for y in 0..CELL_H {
                for x in 0..CELL_W {
                    if inside_polygon(&poly, x as f64 + 0.5, y as f64 + 0.5) {
                        mark(ox + x, oy + y);
                    }
                }
            }
        } else {
            let cx = 80.0 + rng.gen_range(-15.0..=15.0);
            let cy = 37.0 + rng.gen_range(-6.0..=6.0);
            let rx: f64 = rng.gen_range(25.0..=55.0);
            let ry: f64 = rng.gen_range(12.0..=25.0);
            let t = 3.0;
            for y in 0..CELL_H {
                for x in 0..CELL_W {
                    let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                    let outer = (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0;
                    let inner = (dx / (rx - t)).powi(2) + (dy / (ry - t)).powi(2) <= 1.0;
                    if outer && !inner {
                        mark(ox + x, oy + y);
                    }
                }
            }
        }
    }
    let off_x = rng.gen_range(0..=PAGE_W - CANVAS_W);
    let off_y = rng.gen_range(0..=PAGE_H - CANVAS_H);
    GrayImage::from_fn(PAGE_W, PAGE_H, |x, y| {
        let on_canvas = x >= off_x && y >= off_y && x < off_x + CANVAS_W && y < off_y + CANVAS_H;
        if on_canvas && ink[(y - off_y) * CANVAS_W + (x - off_x)] {
            rng.gen_range(0..=40)
        } else {
            rng.gen_range(215..=255)
        }
    })
}

const EYE_SIDE: usize = 240;
const PUPIL_RADIUS: i64 = 24;
/// Matches the fallback window: corner offset 20, side 2·24 + 40 = 88.
const IRIS_CELL: i64 = 22;
const INNER_CELLS: [usize; 4] = [5, 6, 9, 10];
const PUPIL_LEVEL: u8 = 10;
const STABLE_LEVEL: u8 = 255;
/// Kept above the pupil search band so only the pupil reads as dark.
const VOLATILE_LEVELS: std::ops::RangeInclusive<u8> = 128..=150;
const VOLATILE_RIM_LEVEL: u8 = 139;
const SPECKLES_PER_CELL: usize = 2;
const SPECKLE_LEVEL: u8 = 245;
const SCLERA_LEVEL: u8 = 200;

fn eye_image(stable: &[usize], separation: f64, rng: &mut ChaCha8Rng) -> GrayImage {
    // Diagonal shift keeps the window identical with swapped axes.
    let c = EYE_SIDE as i64 / 2 + rng.gen_range(-40..=40);
    let origin = c - 2 * IRIS_CELL;
    // Volatile cells get a fresh background level and a few bright speckles.
    let mut levels = [STABLE_LEVEL; 16];
    let mut speckles: Vec<(i64, i64)> = Vec::new();
    for cell in (0..16).filter(|cell| !stable.contains(cell)) {
        levels[cell] = rng.gen_range(VOLATILE_LEVELS);
        let (gx, gy) = (origin + (cell % 4) as i64 * IRIS_CELL, origin + (cell / 4) as i64 * IRIS_CELL);
        for _ in 0..SPECKLES_PER_CELL {
            let (sx, sy) = (gx + rng.gen_range(4..=IRIS_CELL - 5), gy + rng.gen_range(4..=IRIS_CELL - 5));
            let (dx, dy) = (sx - c, sy - c);
            if dx * dx + dy * dy >= (PUPIL_RADIUS + 4).pow(2) {
                speckles.push((sx, sy));
            }
        }
    }
    let noise = (8.0 / separation).floor() as i64;
    GrayImage::from_fn(EYE_SIDE, EYE_SIDE, |x, y| {
        let (x, y) = (x as i64, y as i64);
        let (dx, dy) = (x - c, y - c);
        if dx * dx + dy * dy <= PUPIL_RADIUS * PUPIL_RADIUS {
            return PUPIL_LEVEL;
        }
        let (gx, gy) = (x - origin, y - origin);
        let base = if (0..4 * IRIS_CELL).contains(&gx) && (0..4 * IRIS_CELL).contains(&gy) {
            let cell = (gy / IRIS_CELL * 4 + gx / IRIS_CELL) as usize;
            let (lx, ly) = (gx % IRIS_CELL, gy % IRIS_CELL);
            let rim = lx < 2 || ly < 2 || lx >= IRIS_CELL - 2 || ly >= IRIS_CELL - 2;
            if stable.contains(&cell) {
                STABLE_LEVEL
            } else if rim {
                // Fixed rim: resampling never carries per-sample content into a neighbour.
                VOLATILE_RIM_LEVEL
            } else if speckles.iter().any(|&(sx, sy)| (x - sx).pow(2) + (y - sy).pow(2) <= 4) {
                SPECKLE_LEVEL
            } else {
                levels[cell]
            }
        } else {
            SCLERA_LEVEL
        };
        let n = if noise > 0 { rng.gen_range(-noise..=noise) } else { 0 };
        (base as i64 + n).clamp(*VOLATILE_LEVELS.start() as i64, 255) as u8
    })
}
