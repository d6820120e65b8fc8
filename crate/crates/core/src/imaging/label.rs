use super::{BinaryImage, ImagingError, Result};

/// Per-pixel component labels; 0 is background, components are `1..=num`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub num: u32,
}

impl LabelMap {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

/// Inclusive pixel extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub x_max: usize,
    pub y_min: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn point(x: usize, y: usize) -> Self {
        Self { x_min: x, x_max: x, y_min: y, y_max: y }
    }

    pub fn include(&mut self, x: usize, y: usize) {
        self.x_min = self.x_min.min(x);
        self.x_max = self.x_max.max(x);
        self.y_min = self.y_min.min(y);
        self.y_max = self.y_max.max(y);
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi as usize] = lo;
    }
}

/// 8-connected labelling. Labels are numbered by first appearance in raster
/// order, so the component containing the first foreground pixel is 1.
pub fn label_components(bw: &BinaryImage) -> LabelMap {
    let (w, h) = (bw.width(), bw.height());
    let mut provisional = vec![0u32; w * h];
    // parent[0] is a placeholder for background.
    let mut parent: Vec<u32> = vec![0];

    for y in 0..h {
        for x in 0..w {
            if !bw.get(x, y) {
                continue;
            }
            // Already-visited neighbours: W, NW, N, NE.
            let mut neighbours = [0u32; 4];
            if x > 0 {
                neighbours[0] = provisional[y * w + x - 1];
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 {
                    neighbours[1] = provisional[up + x - 1];
                }
                neighbours[2] = provisional[up + x];
                if x + 1 < w {
                    neighbours[3] = provisional[up + x + 1];
                }
            }
            let mut label = 0;
            for &n in neighbours.iter().filter(|&&n| n != 0) {
                if label == 0 {
                    label = n;
                } else {
                    union(&mut parent, label, n);
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            provisional[y * w + x] = label;
        }
    }

    let mut remap = vec![0u32; parent.len()];
    let mut num = 0u32;
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = find(&mut parent, p);
        if remap[root as usize] == 0 {
            num += 1;
            remap[root as usize] = num;
        }
        labels[i] = remap[root as usize];
    }
    LabelMap { width: w, height: h, labels, num }
}

/// Pixel count per component; entry `i` is the area of label `i + 1`.
pub fn component_areas(lm: &LabelMap) -> Vec<u64> {
    let mut areas = vec![0u64; lm.num as usize];
    for &l in &lm.labels {
        if l > 0 {
            areas[l as usize - 1] += 1;
        }
    }
    areas
}

/// Label (1-based) of the largest area; ties go to the lowest label.
pub fn largest_component(areas: &[u64]) -> Result<u32> {
    let mut best: Option<(usize, u64)> = None;
    for (i, &a) in areas.iter().enumerate() {
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| i as u32 + 1).ok_or(ImagingError::NoComponents)
}

pub fn component_bbox(lm: &LabelMap, label: u32) -> Result<BoundingBox> {
    if label == 0 || label > lm.num {
        return Err(ImagingError::UnknownLabel(label));
    }
    let mut bbox: Option<BoundingBox> = None;
    for y in 0..lm.height {
        for x in 0..lm.width {
            if lm.get(x, y) == label {
                match bbox.as_mut() {
                    Some(b) => b.include(x, y),
                    None => bbox = Some(BoundingBox::point(x, y)),
                }
            }
        }
    }
    bbox.ok_or(ImagingError::UnknownLabel(label))
}
