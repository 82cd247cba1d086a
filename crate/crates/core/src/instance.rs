//! Lane-marking instance detection by breadth-first flood fill.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Row-major boolean grid of lane-marking pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        Self::from_bits(height, width, vec![false; height.saturating_mul(width)])
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::validation(format!(
                "mask dimensions must be positive, got {height}x{width}"
            )));
        }
        if height.checked_mul(width) != Some(bits.len()) {
            return Err(Error::validation(format!(
                "mask {height}x{width} needs {} bits, got {}",
                height.saturating_mul(width),
                bits.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

/// One connected lane-marking blob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: usize,
    /// Pixels in flood-fill visiting order.
    pub pixels: Vec<Pixel>,
    pub bbox: BoundingBox,
}

impl Instance {
    pub fn size(&self) -> usize {
        self.pixels.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
    const EIGHT: [(isize, isize); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];

    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &Self::FOUR,
            Connectivity::Eight => &Self::EIGHT,
        }
    }

    pub fn from_neighbors(n: u32) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn neighbors(self) -> u32 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Labels every maximal connected component of true pixels.
///
/// Components smaller than `min_size` are dropped. Surviving components get
/// dense ids `0..n` in the row-major order of their first pixel.
pub fn label_instances(
    mask: &BinaryMask,
    connectivity: Connectivity,
    min_size: usize,
) -> Vec<Instance> {
    let (h, w) = (mask.height, mask.width);
    let mut visited = vec![false; h * w];
    let mut queue = VecDeque::new();
    let mut instances = Vec::new();
    let offsets = connectivity.offsets();

    for start in 0..h * w {
        if !mask.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        let (sr, sc) = (start / w, start % w);
        let mut bbox = BoundingBox {
            min_row: sr,
            min_col: sc,
            max_row: sr,
            max_col: sc,
        };

        while let Some(idx) = queue.pop_front() {
            let (r, c) = (idx / w, idx % w);
            pixels.push(Pixel::new(r, c));
            bbox.min_row = bbox.min_row.min(r);
            bbox.max_row = bbox.max_row.max(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_col = bbox.max_col.max(c);

            for &(dr, dc) in offsets {
                let (Some(nr), Some(nc)) = (r.checked_add_signed(dr), c.checked_add_signed(dc))
                else {
                    continue;
                };
                if nr >= h || nc >= w {
                    continue;
                }
                let n = nr * w + nc;
                if mask.bits[n] && !visited[n] {
                    visited[n] = true;
                    queue.push_back(n);
                }
            }
        }

        if pixels.len() >= min_size {
            instances.push(Instance {
                id: instances.len(),
                pixels,
                bbox,
            });
        }
    }
    instances
}

/// Bottom-most (max row) and top-most (min row) pixels; ties go to the smaller column.
pub fn extremal_pixels(inst: &Instance) -> Result<(Pixel, Pixel)> {
    let first = *inst
        .pixels
        .first()
        .ok_or_else(|| Error::validation(format!("instance {} has no pixels", inst.id)))?;
    let (mut bottom, mut top) = (first, first);
    for &p in &inst.pixels[1..] {
        if p.row > bottom.row || (p.row == bottom.row && p.col < bottom.col) {
            bottom = p;
        }
        if p.row < top.row || (p.row == top.row && p.col < top.col) {
            top = p;
        }
    }
    Ok((bottom, top))
}
