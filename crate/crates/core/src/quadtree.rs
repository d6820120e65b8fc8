//! Full region-quadtree decomposition of a square image down to `d1`×`d1`
//! leaves.
//!
//! Every leaf sits at the same depth, so the tree is stored as its flat list of
//! `L = (M/d1)²` leaves. Leaves are numbered from 1, either in Morton order
//! (recursive NW, NE, SW, SE) or in row-major order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{BinaryImage, GrayImage};

/// Side of the images fed to the decomposition.
pub const IMAGE_SIDE: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadtreeError {
    #[error("subregion side {d1} does not evenly split {side} into a quadtree")]
    BadSubregion { side: usize, d1: usize },
    #[error("component index {index} outside 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("image is {width}x{height}, grid expects {side}x{side}")]
    SizeMismatch { width: usize, height: usize, side: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileOrder {
    #[default]
    Morton,
    Raster,
}

impl std::str::FromStr for TileOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "morton" => Ok(Self::Morton),
            "raster" => Ok(Self::Raster),
            other => Err(format!("unknown tile order {other:?} (morton|raster)")),
        }
    }
}

/// A leaf square: top-left column `x`, row `y`, side `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentGrid {
    side: usize,
    d1: usize,
    order: TileOrder,
    regions: Vec<Region>,
}

impl ComponentGrid {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn order(&self) -> TileOrder {
        self.order
    }

    /// Number of components `L`.
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Region of 1-based component `index`.
    pub fn region(&self, index: usize) -> Result<Region, QuadtreeError> {
        index
            .checked_sub(1)
            .and_then(|i| self.regions.get(i))
            .copied()
            .ok_or(QuadtreeError::IndexOutOfRange { index, count: self.regions.len() })
    }
}

/// Decomposes the standard 512×512 frame.
pub fn decompose(d1: usize, order: TileOrder) -> Result<ComponentGrid, QuadtreeError> {
    decompose_side(IMAGE_SIDE, d1, order)
}

pub fn decompose_side(side: usize, d1: usize, order: TileOrder) -> Result<ComponentGrid, QuadtreeError> {
    if d1 == 0 || side % d1 != 0 || !(side / d1).is_power_of_two() {
        return Err(QuadtreeError::BadSubregion { side, d1 });
    }
    let per_side = side / d1;
    let regions = (0..per_side * per_side)
        .map(|k| {
            let (row, col) = match order {
                TileOrder::Raster => (k / per_side, k % per_side),
                TileOrder::Morton => morton_decode(k),
            };
            Region { x: col * d1, y: row * d1, size: d1 }
        })
        .collect();
    Ok(ComponentGrid { side, d1, order, regions })
}

/// Splits an interleaved index into (row, col): each base-4 digit, most
/// significant first, picks NW=0, NE=1, SW=2, SE=3.
fn morton_decode(k: usize) -> (usize, usize) {
    let (mut row, mut col) = (0, 0);
    let mut bit = 0;
    let mut rest = k;
    while rest > 0 {
        col |= (rest & 1) << bit;
        row |= ((rest >> 1) & 1) << bit;
        rest >>= 2;
        bit += 1;
    }
    (row, col)
}

/// Images that can hand out an in-bounds square window of themselves.
pub trait Tiled: Sized {
    fn dims(&self) -> (usize, usize);
    fn window(&self, region: Region) -> Self;
}

impl Tiled for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn window(&self, r: Region) -> Self {
        GrayImage::from_fn(r.size, r.size, |x, y| self.get(r.x + x, r.y + y))
    }
}

impl Tiled for BinaryImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn window(&self, r: Region) -> Self {
        BinaryImage::from_fn(r.size, r.size, |x, y| self.get(r.x + x, r.y + y))
    }
}

pub fn check_size<T: Tiled>(img: &T, grid: &ComponentGrid) -> Result<(), QuadtreeError> {
    let (width, height) = img.dims();
    if width != grid.side || height != grid.side {
        return Err(QuadtreeError::SizeMismatch { width, height, side: grid.side });
    }
    Ok(())
}

/// Pixel copy of component `index` (1-based).
pub fn extract_region<T: Tiled>(img: &T, grid: &ComponentGrid, index: usize) -> Result<T, QuadtreeError> {
    check_size(img, grid)?;
    Ok(img.window(grid.region(index)?))
}
