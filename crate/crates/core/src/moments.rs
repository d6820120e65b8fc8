//! Geometric moments and the three Hu-derived invariants used as features.
//!
//! Pixel coordinates are `(i, j)` = (row, column), 0-based. Binary images
//! weigh each pixel 0 or 1; gray images weigh it `intensity / 255`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{BinaryImage, GrayImage};
use crate::quadtree::{Region, Tiled};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MomentError {
    #[error("massless region")]
    Massless,
}

/// Which invariant to compute: `A` = φ1, `B` = φ2 as printed, `C` = the
/// determinant form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MomentKind {
    A,
    B,
    C,
}

impl MomentKind {
    pub const ALL: [MomentKind; 3] = [MomentKind::A, MomentKind::B, MomentKind::C];
}

impl std::fmt::Display for MomentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentKind::A => "A",
            MomentKind::B => "B",
            MomentKind::C => "C",
        })
    }
}

impl std::str::FromStr for MomentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            other => Err(format!("unknown moment kind {other:?} (A|B|C)")),
        }
    }
}

/// Non-negative per-pixel mass, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MassImage {
    width: usize,
    height: usize,
    mass: Vec<f64>,
}

impl MassImage {
    /// # Panics
    /// If `mass.len() != width * height` or any mass is negative or NaN.
    pub fn new(width: usize, height: usize, mass: Vec<f64>) -> Self {
        assert_eq!(mass.len(), width * height, "mass length");
        assert!(mass.iter().all(|&m| m >= 0.0), "mass must be non-negative");
        Self { width, height, mass }
    }

    pub fn from_binary(img: &BinaryImage) -> Self {
        let mass = img.data().iter().map(|&v| v as f64).collect();
        Self { width: img.width(), height: img.height(), mass }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        let mass = img.data().iter().map(|&v| v as f64 / 255.0).collect();
        Self { width: img.width(), height: img.height(), mass }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Mass at row `i`, column `j`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.width + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

impl Tiled for MassImage {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn window(&self, r: Region) -> Self {
        let mut mass = Vec::with_capacity(r.size * r.size);
        for i in r.y..r.y + r.size {
            mass.extend_from_slice(&self.mass[i * self.width + r.x..i * self.width + r.x + r.size]);
        }
        Self { width: r.size, height: r.size, mass }
    }
}

/// Rows and columns of a rectangular view, in local coordinates.
#[derive(Clone, Copy)]
struct View<'a> {
    img: &'a MassImage,
    x: usize,
    y: usize,
    width: usize,
    height: usize,
}

impl<'a> View<'a> {
    fn whole(img: &'a MassImage) -> Self {
        Self { img, x: 0, y: 0, width: img.width, height: img.height }
    }

    fn region(img: &'a MassImage, r: Region) -> Self {
        Self { img, x: r.x, y: r.y, width: r.size, height: r.size }
    }

    fn rows(self) -> impl Iterator<Item = (usize, &'a [f64])> {
        let stride = self.img.width;
        (0..self.height).map(move |i| {
            let start = (self.y + i) * stride + self.x;
            (i, &self.img.mass[start..start + self.width])
        })
    }
}

pub fn raw_moment(img: &MassImage, p: u32, q: u32) -> f64 {
    let mut sum = 0.0;
    for (i, row) in View::whole(img).rows() {
        let ip = (i as f64).powi(p as i32);
        for (j, &m) in row.iter().enumerate() {
            if m != 0.0 {
                sum += m * ip * (j as f64).powi(q as i32);
            }
        }
    }
    sum
}

/// Mass centre `(a, b)`: row and column.
pub fn centroid(img: &MassImage) -> Result<(f64, f64), MomentError> {
    let m00 = raw_moment(img, 0, 0);
    if m00 <= 0.0 {
        return Err(MomentError::Massless);
    }
    Ok((raw_moment(img, 1, 0) / m00, raw_moment(img, 0, 1) / m00))
}

pub fn central_moment(img: &MassImage, p: u32, q: u32) -> Result<f64, MomentError> {
    let (a, b) = centroid(img)?;
    let mut sum = 0.0;
    for (i, row) in View::whole(img).rows() {
        let di = (i as f64 - a).powi(p as i32);
        for (j, &m) in row.iter().enumerate() {
            if m != 0.0 {
                sum += m * di * (j as f64 - b).powi(q as i32);
            }
        }
    }
    Ok(sum)
}

/// Mass and second-order central moments of one image or region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrder {
    pub m00: f64,
    pub mu20: f64,
    pub mu02: f64,
    pub mu11: f64,
}

impl SecondOrder {
    pub fn of(img: &MassImage) -> Result<Self, MomentError> {
        Self::of_view(View::whole(img))
    }

    /// Moments of `region` computed in place, without copying it out.
    pub fn of_region(img: &MassImage, region: Region) -> Result<Self, MomentError> {
        Self::of_view(View::region(img, region))
    }

    fn of_view(view: View<'_>) -> Result<Self, MomentError> {
        let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
        for (i, row) in view.rows() {
            let mut row_mass = 0.0;
            for (j, &m) in row.iter().enumerate() {
                row_mass += m;
                m01 += m * j as f64;
            }
            m00 += row_mass;
            m10 += row_mass * i as f64;
        }
        if m00 <= 0.0 {
            return Err(MomentError::Massless);
        }
        let (a, b) = (m10 / m00, m01 / m00);
        let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
        for (i, row) in view.rows() {
            let di = i as f64 - a;
            let (mut row_mass, mut row_dj, mut row_dj2) = (0.0, 0.0, 0.0);
            for (j, &m) in row.iter().enumerate() {
                if m != 0.0 {
                    let dj = j as f64 - b;
                    row_mass += m;
                    row_dj += m * dj;
                    row_dj2 += m * dj * dj;
                }
            }
            mu20 += row_mass * di * di;
            mu11 += row_dj * di;
            mu02 += row_dj2;
        }
        Ok(Self { m00, mu20, mu02, mu11 })
    }

    pub fn invariant(&self, kind: MomentKind) -> f64 {
        let m00_2 = self.m00 * self.m00;
        match kind {
            MomentKind::A => (self.mu20 + self.mu02) / m00_2,
            MomentKind::B => {
                let d = self.mu20 - self.mu02;
                (d * d + 4.0 * self.mu11 * self.mu11) / m00_2
            }
            MomentKind::C => (self.mu20 * self.mu02 - self.mu11 * self.mu11) / (m00_2 * m00_2),
        }
    }
}

pub fn hu_moment(img: &MassImage, kind: MomentKind) -> Result<f64, MomentError> {
    Ok(SecondOrder::of(img)?.invariant(kind))
}
