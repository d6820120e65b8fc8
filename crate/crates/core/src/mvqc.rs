//! Minimum-variance quadtree component (MVQC) selection and enrollment.
//!
//! Each genuine training sample gives one moment value per quadtree
//! component. Components whose variance across samples is below the running
//! average survive a filtering round; rounds repeat until the budget `b` is
//! met. The template keeps the surviving component indices and the moment
//! sums `H` of the training samples over them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::{MassImage, MomentKind, SecondOrder};
use crate::quadtree::{self, ComponentGrid, QuadtreeError, TileOrder};

pub const TEMPLATE_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum MvqcError {
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),
    #[error("training rows have different lengths")]
    Ragged,
    #[error("component budget b={b} outside 1..={count}")]
    BadBudget { b: usize, count: usize },
    #[error(transparent)]
    Quadtree(#[from] QuadtreeError),
}

/// `values[s][i]`: moment of component `i + 1` in training sample `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix {
    values: Vec<Vec<f64>>,
}

impl TrainingMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self, MvqcError> {
        if values.len() < 2 {
            return Err(MvqcError::TooFewSamples(values.len()));
        }
        let l = values[0].len();
        if values.iter().any(|r| r.len() != l) {
            return Err(MvqcError::Ragged);
        }
        Ok(Self { values })
    }

    pub fn samples(&self) -> usize {
        self.values.len()
    }

    pub fn components(&self) -> usize {
        self.values[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Population variance (divide by P) of every component column.
    pub fn variances(&self) -> Vec<f64> {
        let p = self.samples() as f64;
        (0..self.components())
            .map(|i| {
                let mean = self.values.iter().map(|r| r[i]).sum::<f64>() / p;
                self.values.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / p
            })
            .collect()
    }
}

/// Outcome of the variance filter: the chosen 1-based indices and the
/// surviving set after every round, starting with all components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub rounds: Vec<Vec<usize>>,
}

pub fn select_mvqc(tm: &TrainingMatrix, b: usize) -> Result<Vec<usize>, MvqcError> {
    Ok(select_from_variances(&tm.variances(), b)?.indices)
}

/// Runs the below-average filter over per-component variances.
///
/// Each round keeps the members whose variance is strictly below the mean
/// variance of the current set. A round that lands on exactly `b` members is
/// the answer. If a round would leave fewer than `b` members, or removes
/// nothing, the `b` lowest-variance members of the current set are taken
/// instead (ties to the lower index).
pub fn select_from_variances(variances: &[f64], b: usize) -> Result<Selection, MvqcError> {
    let count = variances.len();
    if b == 0 || b > count {
        return Err(MvqcError::BadBudget { b, count });
    }
    let mut current: Vec<usize> = (1..=count).collect();
    let mut rounds = vec![current.clone()];
    let var = |i: usize| variances[i - 1];

    loop {
        if current.len() == b {
            return Ok(Selection { indices: current, rounds });
        }
        let avg = current.iter().map(|&i| var(i)).sum::<f64>() / current.len() as f64;
        let survivors: Vec<usize> = current.iter().copied().filter(|&i| var(i) < avg).collect();
        if survivors.len() == b {
            rounds.push(survivors.clone());
            return Ok(Selection { indices: survivors, rounds });
        }
        if survivors.len() < b || survivors.len() == current.len() {
            let mut ranked = current.clone();
            ranked.sort_by(|&x, &y| var(x).total_cmp(&var(y)).then(x.cmp(&y)));
            let mut chosen = ranked[..b].to_vec();
            chosen.sort_unstable();
            return Ok(Selection { indices: chosen, rounds });
        }
        rounds.push(survivors.clone());
        current = survivors;
    }
}

/// Moment of each quadtree component; massless components count as 0.
pub fn component_moments(img: &MassImage, grid: &ComponentGrid, kind: MomentKind) -> Result<Vec<f64>, MvqcError> {
    quadtree::check_size(img, grid)?;
    Ok(grid
        .regions()
        .iter()
        .map(|&r| SecondOrder::of_region(img, r).map_or(0.0, |s| s.invariant(kind)))
        .collect())
}

/// A subject's enrolled model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvqcTemplate {
    pub version: u32,
    pub subject_id: String,
    pub kind: MomentKind,
    pub d1: usize,
    pub b: usize,
    pub tile_order: TileOrder,
    /// Selected components, 1-based and strictly increasing.
    pub indices: Vec<usize>,
    /// Moment sums `H` of the training samples over `indices`.
    pub training_features: Vec<f64>,
}

impl MvqcTemplate {
    pub fn grid(&self) -> Result<ComponentGrid, MvqcError> {
        Ok(quadtree::decompose(self.d1, self.tile_order)?)
    }

    /// Sum of precomputed component values over the template's components.
    pub fn summation_of(&self, components: &[f64]) -> f64 {
        self.indices.iter().map(|&i| components[i - 1]).sum()
    }
}

pub fn moment_summation(img: &MassImage, template: &MvqcTemplate) -> Result<f64, MvqcError> {
    let values = component_moments(img, &template.grid()?, template.kind)?;
    Ok(template.summation_of(&values))
}

/// Parameters shared by every enrollment in one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnrollParams {
    pub d1: usize,
    pub kind: MomentKind,
    pub b: usize,
    pub tile_order: TileOrder,
}

pub fn enroll(subject_id: &str, samples: &[MassImage], params: EnrollParams) -> Result<MvqcTemplate, MvqcError> {
    let grid = quadtree::decompose(params.d1, params.tile_order)?;
    let rows = samples
        .iter()
        .map(|s| component_moments(s, &grid, params.kind))
        .collect::<Result<Vec<_>, _>>()?;
    enroll_from_components(subject_id, rows, params)
}

/// Enrollment from per-sample component moments already computed with
/// `params.d1`, `params.kind` and `params.tile_order`.
pub fn enroll_from_components(
    subject_id: &str,
    rows: Vec<Vec<f64>>,
    params: EnrollParams,
) -> Result<MvqcTemplate, MvqcError> {
    let tm = TrainingMatrix::new(rows)?;
    let indices = select_mvqc(&tm, params.b)?;
    let training_features = tm.rows().iter().map(|r| indices.iter().map(|&i| r[i - 1]).sum()).collect();
    Ok(MvqcTemplate {
        version: TEMPLATE_VERSION,
        subject_id: subject_id.to_owned(),
        kind: params.kind,
        d1: params.d1,
        b: params.b,
        tile_order: params.tile_order,
        indices,
        training_features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{BinaryImage, GrayImage};
    use crate::quadtree::{extract_region, IMAGE_SIDE};
    use crate::moments::hu_moment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Variance row of the published 16-component worked example.
    const PUBLISHED_VARIANCES: [f64; 16] = [
        1.048e78, 1.116e77, 4.353e78, 3.492e79, 7.684e75, 4.914e37, 9.374e47, 2.383e78, 2.927e75,
        6.924e36, 2.064e60, 1.299e79, 1.098e78, 4.630e78, 2.276e79, 1.219e79,
    ];

    fn params(b: usize) -> EnrollParams {
        EnrollParams { d1: 128, kind: MomentKind::C, b, tile_order: TileOrder::Morton }
    }

    #[test]
    fn published_example_selects_six() {
        let sel = select_from_variances(&PUBLISHED_VARIANCES, 6).unwrap();
        assert_eq!(sel.indices, vec![5, 6, 7, 9, 10, 11]);
        // Intermediate lists match the published b=10 and b=8 stages.
        assert_eq!(sel.rounds[2], vec![1, 2, 5, 6, 7, 9, 10, 11, 13]);
        assert_eq!(sel.rounds[3], vec![2, 5, 6, 7, 9, 10, 11]);
    }

    #[test]
    fn published_example_through_training_matrix() {
        // Two samples at mean ± sqrt(var) reproduce each population variance.
        let sd: Vec<f64> = PUBLISHED_VARIANCES.iter().map(|v| v.sqrt()).collect();
        let rows = vec![sd.iter().map(|s| 1e40 + s).collect(), sd.iter().map(|s| 1e40 - s).collect()];
        let tm = TrainingMatrix::new(rows).unwrap();
        assert_eq!(select_mvqc(&tm, 6).unwrap(), vec![5, 6, 7, 9, 10, 11]);
    }

    #[test]
    fn equal_variances_take_lowest_indices() {
        let sel = select_from_variances(&[2.0; 16], 4).unwrap();
        assert_eq!(sel.indices, vec![1, 2, 3, 4]);
        assert_eq!(select_from_variances(&[0.0; 4], 4).unwrap().indices, vec![1, 2, 3, 4]);
    }

    #[test]
    fn undershoot_falls_back_to_smallest() {
        // One round leaves only {1}; b=3 is completed from the full set.
        let sel = select_from_variances(&[0.0, 10.0, 10.0, 10.0, 9.0], 3).unwrap();
        assert_eq!(sel.indices, vec![1, 2, 5]);
    }

    #[test]
    fn budget_errors() {
        assert_eq!(
            select_from_variances(&[1.0, 2.0], 3),
            Err(MvqcError::BadBudget { b: 3, count: 2 })
        );
        assert!(select_from_variances(&[1.0], 0).is_err());
        assert_eq!(TrainingMatrix::new(vec![vec![1.0]]), Err(MvqcError::TooFewSamples(1)));
        assert_eq!(TrainingMatrix::new(vec![vec![1.0], vec![1.0, 2.0]]), Err(MvqcError::Ragged));
    }

    #[test]
    fn variances_are_population() {
        let tm = TrainingMatrix::new(vec![vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(tm.variances(), vec![1.0, 0.0]);
    }

    #[test]
    fn uniform_image_components_are_equal() {
        let img = MassImage::from_gray(&GrayImage::filled(IMAGE_SIDE, IMAGE_SIDE, 180));
        let grid = quadtree::decompose(256, TileOrder::Morton).unwrap();
        let v = component_moments(&img, &grid, MomentKind::A).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|&x| x == v[0]) && v[0] > 0.0);
    }

    #[test]
    fn ink_in_first_component_only() {
        let bw = BinaryImage::from_fn(IMAGE_SIDE, IMAGE_SIDE, |x, y| x < 100 && y < 90 && (x + y) % 3 == 0);
        let img = MassImage::from_binary(&bw);
        let grid = quadtree::decompose(128, TileOrder::Morton).unwrap();
        let v = component_moments(&img, &grid, MomentKind::B).unwrap();
        assert!(v[0] > 0.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn component_moments_match_region_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let img = MassImage::from_gray(&GrayImage::from_fn(IMAGE_SIDE, IMAGE_SIDE, |_, _| rng.gen()));
        let grid = quadtree::decompose(128, TileOrder::Raster).unwrap();
        for kind in MomentKind::ALL {
            let v = component_moments(&img, &grid, kind).unwrap();
            for (i, &got) in v.iter().enumerate() {
                let region = extract_region(&img, &grid, i + 1).unwrap();
                let want = hu_moment(&region, kind).unwrap();
                assert!((got - want).abs() <= 1e-12 * want.abs(), "{kind} component {}", i + 1);
            }
        }
    }

    #[test]
    fn summation_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let img = MassImage::from_gray(&GrayImage::from_fn(IMAGE_SIDE, IMAGE_SIDE, |_, _| rng.gen()));
        let grid = quadtree::decompose(128, TileOrder::Morton).unwrap();
        let v = component_moments(&img, &grid, MomentKind::C).unwrap();
        let mut t = MvqcTemplate {
            version: TEMPLATE_VERSION,
            subject_id: "s".into(),
            kind: MomentKind::C,
            d1: 128,
            b: 1,
            tile_order: TileOrder::Morton,
            indices: vec![7],
            training_features: vec![],
        };
        assert_eq!(moment_summation(&img, &t).unwrap(), v[6]);
        t.indices = vec![2, 3, 13, 15];
        t.b = 4;
        assert_eq!(moment_summation(&img, &t).unwrap(), v[1] + v[2] + v[12] + v[14]);
        let blank = MassImage::from_binary(&BinaryImage::zeros(IMAGE_SIDE, IMAGE_SIDE));
        assert_eq!(moment_summation(&blank, &t).unwrap(), 0.0);
    }

    #[test]
    fn identical_samples_enroll_degenerately() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let img = MassImage::from_gray(&GrayImage::from_fn(IMAGE_SIDE, IMAGE_SIDE, |_, _| rng.gen()));
        let t = enroll("s1", &[img.clone(), img.clone(), img], params(6)).unwrap();
        assert_eq!(t.indices, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(t.training_features.len(), 3);
        assert!(t.training_features.iter().all(|&h| h == t.training_features[0]));
    }

    #[test]
    fn enroll_h_matches_pipeline_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let samples: Vec<MassImage> = (0..3)
            .map(|_| MassImage::from_binary(&BinaryImage::from_fn(IMAGE_SIDE, IMAGE_SIDE, |_, _| rng.gen_bool(0.2))))
            .collect();
        let t = enroll("s2", &samples, params(8)).unwrap();
        assert_eq!(t.indices.len(), 8);
        for (s, &h) in samples.iter().zip(&t.training_features) {
            assert_eq!(moment_summation(s, &t).unwrap(), h);
        }
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<MvqcTemplate>(&json).unwrap(), t);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
            (2usize..6, 1usize..20).prop_flat_map(|(p, l)| {
                proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, l), p)
            })
        }

        /// Integer entries with a power-of-two sample count keep every
        /// variance computation exact, so reorderings and shifts compare bit for bit.
        fn exact_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
            (prop_oneof![Just(2usize), Just(4), Just(8)], 1usize..20).prop_flat_map(|(p, l)| {
                proptest::collection::vec(
                    proptest::collection::vec((-1000i32..1000).prop_map(f64::from), l),
                    p,
                )
            })
        }

        proptest! {
            #[test]
            fn selection_shape(rows in matrix(), b_frac in 0.0f64..1.0) {
                let l = rows[0].len();
                let b = 1 + ((l - 1) as f64 * b_frac) as usize;
                let sel = select_from_variances(&TrainingMatrix::new(rows).unwrap().variances(), b).unwrap();
                prop_assert_eq!(sel.indices.len(), b);
                prop_assert!(sel.indices.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(sel.indices.iter().all(|&i| (1..=l).contains(&i)));
                for w in sel.rounds.windows(2) {
                    prop_assert!(w[1].iter().all(|i| w[0].contains(i)));
                }
            }

            #[test]
            fn sample_order_does_not_matter(rows in exact_matrix(), b_frac in 0.0f64..1.0, rot in 0usize..8) {
                let l = rows[0].len();
                let b = 1 + ((l - 1) as f64 * b_frac) as usize;
                let mut permuted = rows.clone();
                let n = permuted.len();
                permuted.rotate_left(rot % n);
                permuted.swap(0, n - 1);
                let a = enroll_from_components("x", rows, EnrollParams { b, ..params(1) }).unwrap();
                let r = enroll_from_components("x", permuted, EnrollParams { b, ..params(1) }).unwrap();
                prop_assert_eq!(a.indices, r.indices);
            }

            #[test]
            fn column_offset_keeps_selection(rows in exact_matrix(), col in 0usize..20, offset in -1000i32..1000) {
                let l = rows[0].len();
                let col = col % l;
                let b = (l / 2).max(1);
                let mut shifted = rows.clone();
                for r in shifted.iter_mut() {
                    r[col] += offset as f64;
                }
                let base = TrainingMatrix::new(rows).unwrap();
                let moved = TrainingMatrix::new(shifted).unwrap();
                prop_assert_eq!(base.variances(), moved.variances());
                prop_assert_eq!(select_mvqc(&base, b).unwrap(), select_mvqc(&moved, b).unwrap());
            }
        }
    }
}
