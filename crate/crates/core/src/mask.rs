//! Binary raster masks and scanline polygon fill.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Point2;
use crate::{Error, Result};

/// A square binary image, row-major, 1 = foreground.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask { width, height, data: vec![0; width * height] }
    }

    /// Builds a mask from rows of 0/1 bytes; rows must be equally long.
    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::LengthMismatch { left: width, right: 0 });
        }
        let mut data = Vec::with_capacity(width * height);
        for r in rows {
            data.extend(r.iter().map(|&v| u8::from(v != 0)));
        }
        Ok(BinaryMask { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col] != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.width + col] = u8::from(value);
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Iterates foreground pixels as (row, col).
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, _)| (i / self.width, i % self.width))
    }
}

/// Mass centroid of the foreground: the mean of foreground pixel indices,
/// returned as (x, y) = (mean column, mean row).
pub fn centroid(mask: &BinaryMask) -> Result<(f64, f64)> {
    let mut n = 0u64;
    let (mut sx, mut sy) = (0u64, 0u64);
    for (row, col) in mask.foreground() {
        n += 1;
        sx += col as u64;
        sy += row as u64;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sx as f64 / n as f64, sy as f64 / n as f64))
}

/// Rasterizes a closed polygon into a `resolution` x `resolution` mask.
///
/// The polygon is scaled uniformly (aspect preserved) to fit the square
/// minus `margin` pixels on each side, centered, then filled by an even-odd
/// scanline pass sampling pixel centers (col + 0.5, row + 0.5). Horizontal
/// crossings use the half-open rule [y_low, y_high) so shared vertices are
/// counted once. Translating the input polygon does not change the output.
pub fn rasterize_polygon(
    polygon: &[Point2],
    resolution: usize,
    margin: usize,
) -> Result<BinaryMask> {
    if resolution < 16 {
        return Err(Error::InvalidParameter { what: "resolution must be >= 16" });
    }
    if 2 * margin >= resolution {
        return Err(Error::InvalidParameter { what: "margin too large for resolution" });
    }
    if polygon.len() < 3 {
        return Err(Error::DegenerateGeometry { what: "polygon needs at least 3 vertices" });
    }
    if polygon.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite { what: "polygon vertex" });
    }

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in polygon {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let extent = (max_x - min_x).max(max_y - min_y);
    if extent <= 0.0 {
        return Err(Error::DegenerateGeometry { what: "polygon has zero extent" });
    }
    let inner = (resolution - 2 * margin) as f64;
    let scale = inner / extent;
    // center the scaled bounding box inside the full square
    let off_x = (resolution as f64 - scale * (max_x - min_x)) / 2.0;
    let off_y = (resolution as f64 - scale * (max_y - min_y)) / 2.0;

    let mapped: Vec<Point2> = polygon
        .iter()
        .map(|p| Point2::new((p.x - min_x) * scale + off_x, (p.y - min_y) * scale + off_y))
        .collect();

    let mut mask = BinaryMask::new(resolution, resolution);
    let mut crossings: Vec<f64> = Vec::with_capacity(mapped.len());
    let n = mapped.len();
    for row in 0..resolution {
        let sy = row as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let a = mapped[i];
            let b = mapped[(i + 1) % n];
            let (lo, hi, x_lo, x_hi) =
                if a.y <= b.y { (a.y, b.y, a.x, b.x) } else { (b.y, a.y, b.x, a.x) };
            if lo <= sy && sy < hi {
                crossings.push(x_lo + (sy - lo) * (x_hi - x_lo) / (hi - lo));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in crossings.chunks_exact(2) {
            let c_start = libm::ceil(pair[0] - 0.5).max(0.0) as usize;
            let c_end = libm::ceil(pair[1] - 0.5) as isize - 1;
            if c_end < 0 {
                continue;
            }
            for col in c_start..=(c_end as usize).min(resolution - 1) {
                mask.set(row, col, true);
            }
        }
    }
    if mask.foreground_count() == 0 {
        return Err(Error::DegenerateGeometry { what: "rasterization produced no foreground" });
    }
    Ok(mask)
}
