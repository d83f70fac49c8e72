//! Region maps, per-sample feature fusion, and feature matrices.
//!
//! A [`RegionMap`] names facial sub-regions by landmark indices. Elliptic
//! regions contribute an elliptic Fourier spectrum of their contour;
//! generic regions are rasterized and contribute a generic Fourier
//! descriptor. Segments are concatenated in region-map order into one fused
//! vector whose [`FeatureLayout`] is a pure function of (map, config).

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use crate::efd::{efd_coefficients, harmonic_spectrum};
use crate::geometry::{convex_hull, fit_ellipse, sample_ellipse, zscore_normalize, Contour, Point2};
use crate::gfd::gfd;
use crate::landmarks::{LandmarkScheme, LandmarkSet};
use crate::mask::{rasterize_polygon, BinaryMask};
use crate::{Error, Result};

/// What a region contributes to the fused vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RegionKind {
    /// Contour region: ellipse fit (or landmark polygon) + EFD spectrum.
    Elliptic,
    /// Raster region: polygon mask + GFD.
    Generic,
}

/// How a region's landmark indices become a closed outline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OutlineMode {
    /// The indices in listed order form the polygon.
    Polygon,
    /// Convex hull of the indexed points.
    Hull,
}

/// One named sub-region of the face.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub id: String,
    pub kind: RegionKind,
    pub outline: OutlineMode,
    pub indices: Vec<usize>,
}

/// Ordered collection of regions tied to a landmark scheme.
///
/// Invariants: unique ids of `[A-Za-z0-9_-]`, every index valid for the
/// scheme, at least 3 indices per region.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionMap {
    scheme: LandmarkScheme,
    regions: Vec<Region>,
}

impl RegionMap {
    pub fn new(scheme: LandmarkScheme, regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidParameter { what: "region map has no regions" });
        }
        for (i, r) in regions.iter().enumerate() {
            if r.id.is_empty()
                || !r.id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
            {
                return Err(Error::InvalidParameter {
                    what: "region id must be non-empty [A-Za-z0-9_-]",
                });
            }
            if regions[..i].iter().any(|q| q.id == r.id) {
                return Err(Error::InvalidParameter { what: "duplicate region id" });
            }
            if r.indices.len() < 3 {
                return Err(Error::InvalidParameter { what: "region needs at least 3 indices" });
            }
            if r.indices.iter().any(|&ix| ix >= scheme.point_count()) {
                return Err(Error::InvalidParameter { what: "region index out of scheme range" });
            }
        }
        Ok(RegionMap { scheme, regions })
    }

    /// The built-in map: three elliptic regions (both eyes and the outer
    /// mouth) and ten generic regions f1..f10 (brows, eyes, nose, both lip
    /// outlines, per-side brow+eye hulls, face outline hull).
    pub fn default_for(scheme: LandmarkScheme) -> Self {
        // 68-point indices; the 49-point tracker scheme is the same layout
        // without the 17 jaw points
        let table: &[(&str, RegionKind, OutlineMode, &[usize])] = &[
            ("left_eye", RegionKind::Elliptic, OutlineMode::Polygon, &[36, 37, 38, 39, 40, 41]),
            ("right_eye", RegionKind::Elliptic, OutlineMode::Polygon, &[42, 43, 44, 45, 46, 47]),
            (
                "mouth",
                RegionKind::Elliptic,
                OutlineMode::Polygon,
                &[48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59],
            ),
            ("f1", RegionKind::Generic, OutlineMode::Polygon, &[17, 18, 19, 20, 21]),
            ("f2", RegionKind::Generic, OutlineMode::Polygon, &[22, 23, 24, 25, 26]),
            ("f3", RegionKind::Generic, OutlineMode::Polygon, &[36, 37, 38, 39, 40, 41]),
            ("f4", RegionKind::Generic, OutlineMode::Polygon, &[42, 43, 44, 45, 46, 47]),
            (
                "f5",
                RegionKind::Generic,
                OutlineMode::Polygon,
                &[27, 28, 29, 30, 31, 32, 33, 34, 35],
            ),
            (
                "f6",
                RegionKind::Generic,
                OutlineMode::Polygon,
                &[48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59],
            ),
            (
                "f7",
                RegionKind::Generic,
                OutlineMode::Polygon,
                &[60, 61, 62, 63, 64, 65, 66, 67],
            ),
            (
                "f8",
                RegionKind::Generic,
                OutlineMode::Hull,
                &[17, 18, 19, 20, 21, 36, 37, 38, 39, 40, 41],
            ),
            (
                "f9",
                RegionKind::Generic,
                OutlineMode::Hull,
                &[22, 23, 24, 25, 26, 42, 43, 44, 45, 46, 47],
            ),
            (
                "f10",
                RegionKind::Generic,
                OutlineMode::Hull,
                &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16],
            ),
        ];
        let regions = table
            .iter()
            .map(|(id, kind, outline, idx68)| {
                let indices: Vec<usize> = match scheme {
                    LandmarkScheme::Ibug68 => idx68.to_vec(),
                    // the 49-point scheme is the 68-point one minus the jaw,
                    // except the face outline (no jaw: hull of everything)
                    // and the inner mouth (6 points instead of 8)
                    LandmarkScheme::Tracker49 => match *id {
                        "f10" => (0..49).collect(),
                        "f7" => (43..49).collect(),
                        _ => idx68.iter().map(|&i| i - 17).collect(),
                    },
                };
                Region { id: (*id).to_owned(), kind: *kind, outline: *outline, indices }
            })
            .collect();
        RegionMap::new(scheme, regions).unwrap()
    }

    pub fn scheme(&self) -> LandmarkScheme {
        self.scheme
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn get(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }
}

/// Source of an elliptic region's contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ContourSource {
    /// Least-squares ellipse through the region's landmarks, sampled at
    /// uniform parameter steps.
    FittedEllipse,
    /// The landmarks themselves as a closed polygon.
    LandmarkPolygon,
}

/// Which values an elliptic region contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpectrumMode {
    /// Per-harmonic power P_1..P_N (N values).
    Vector,
    /// The single power sum fs.
    Scalar,
}

/// Knobs of the feature-extraction stage.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtractionConfig {
    pub contour_source: ContourSource,
    /// Points sampled on a fitted ellipse before EFD.
    pub ellipse_samples: usize,
    /// EFD harmonic count N.
    pub harmonics: usize,
    pub spectrum_mode: SpectrumMode,
    /// GFD radial frequency count.
    pub radial_freqs: usize,
    /// GFD angular frequency count.
    pub angular_freqs: usize,
    /// Raster side length for generic regions.
    pub resolution: usize,
    /// Blank border kept around the rasterized shape.
    pub margin: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            contour_source: ContourSource::FittedEllipse,
            ellipse_samples: 64,
            harmonics: 10,
            spectrum_mode: SpectrumMode::Vector,
            radial_freqs: 4,
            angular_freqs: 9,
            resolution: 64,
            margin: 2,
        }
    }
}

impl ExtractionConfig {
    /// Bounds every field; deserialized configs must pass before use.
    pub fn validate(&self) -> Result<()> {
        if self.ellipse_samples < 3 {
            return Err(Error::InvalidParameter { what: "ellipse_samples must be >= 3" });
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidParameter { what: "harmonics must be >= 1" });
        }
        if self.radial_freqs == 0 || self.angular_freqs == 0 {
            return Err(Error::InvalidParameter { what: "GFD frequency counts must be >= 1" });
        }
        if self.resolution < 16 {
            return Err(Error::InvalidParameter { what: "resolution must be >= 16" });
        }
        if 2 * self.margin >= self.resolution {
            return Err(Error::InvalidParameter { what: "margin too large for resolution" });
        }
        Ok(())
    }
}

/// Descriptor family of a layout segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DescriptorKind {
    Efd,
    Gfd,
}

impl DescriptorKind {
    pub const fn name(&self) -> &'static str {
        match self {
            DescriptorKind::Efd => "efd",
            DescriptorKind::Gfd => "gfd",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "efd" => Ok(DescriptorKind::Efd),
            "gfd" => Ok(DescriptorKind::Gfd),
            _ => Err(Error::InvalidParameter { what: "unknown descriptor kind" }),
        }
    }
}

/// One contiguous slice of the fused vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayoutSegment {
    pub region: String,
    pub kind: DescriptorKind,
    pub offset: usize,
    pub len: usize,
}

/// Ordered segment list describing a fused vector. Identical across all
/// samples extracted under one (region map, config) pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureLayout {
    pub segments: Vec<LayoutSegment>,
}

impl FeatureLayout {
    pub fn dim(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len)
    }

    /// FNV-1a 64 over the canonical `region.kind:offset:len;` serialization.
    /// Stored in model files; predict refuses inputs whose layout hashes
    /// differently.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        for s in &self.segments {
            eat(s.region.as_bytes());
            eat(b".");
            eat(s.kind.name().as_bytes());
            eat(b":");
            eat(&(s.offset as u64).to_le_bytes());
            eat(&(s.len as u64).to_le_bytes());
            eat(b";");
        }
        h
    }
}

/// The layout produced by [`extract_features`] under this map and config.
/// Pure: no landmark data involved.
pub fn feature_layout(map: &RegionMap, config: &ExtractionConfig) -> FeatureLayout {
    let mut segments = Vec::with_capacity(map.regions().len());
    let mut offset = 0;
    for r in map.regions() {
        let (kind, len) = match r.kind {
            RegionKind::Elliptic => (
                DescriptorKind::Efd,
                match config.spectrum_mode {
                    SpectrumMode::Vector => config.harmonics,
                    SpectrumMode::Scalar => 1,
                },
            ),
            RegionKind::Generic => {
                (DescriptorKind::Gfd, config.radial_freqs * config.angular_freqs)
            }
        };
        segments.push(LayoutSegment { region: r.id.clone(), kind, offset, len });
        offset += len;
    }
    FeatureLayout { segments }
}

/// One sample's fused descriptor vector plus the layout it follows.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeature {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

fn region_points(norm: &[Point2], region: &Region) -> Vec<Point2> {
    region.indices.iter().map(|&i| norm[i]).collect()
}

fn region_outline(norm: &[Point2], region: &Region) -> Result<Vec<Point2>> {
    let pts = region_points(norm, region);
    match region.outline {
        OutlineMode::Polygon => Ok(pts),
        OutlineMode::Hull => {
            let hull = convex_hull(&pts);
            if hull.len() < 3 {
                Err(Error::DegenerateGeometry { what: "hull collapsed below 3 vertices" })
            } else {
                Ok(hull)
            }
        }
    }
}

fn contour_from_norm(
    norm: &[Point2],
    region: &Region,
    source: ContourSource,
    samples: usize,
) -> Result<Contour> {
    match source {
        ContourSource::FittedEllipse => {
            let fit = fit_ellipse(&region_points(norm, region))?;
            Contour::new(sample_ellipse(&fit.ellipse, samples))
        }
        ContourSource::LandmarkPolygon => Contour::new(region_outline(norm, region)?),
    }
}

/// Contour of one region in z-score-normalized coordinates.
///
/// `FittedEllipse` fits the region's landmarks and samples `samples` points
/// at uniform parameter steps; `LandmarkPolygon` uses the landmarks
/// directly as a closed polygon.
pub fn region_contour(
    landmarks: &LandmarkSet,
    map: &RegionMap,
    region_id: &str,
    source: ContourSource,
    samples: usize,
) -> Result<Contour> {
    check_scheme(landmarks, map)?;
    let region = map.get(region_id).ok_or_else(|| Error::UnknownRegion(region_id.into()))?;
    let norm = zscore_normalize(landmarks.points())?;
    contour_from_norm(&norm, region, source, samples).map_err(|e| e.in_region(region_id))
}

/// Binary mask of one region's outline polygon in z-score-normalized
/// coordinates, fitted into a `resolution` square with a 2-pixel margin.
pub fn rasterize_region(
    landmarks: &LandmarkSet,
    map: &RegionMap,
    region_id: &str,
    resolution: usize,
) -> Result<BinaryMask> {
    check_scheme(landmarks, map)?;
    let region = map.get(region_id).ok_or_else(|| Error::UnknownRegion(region_id.into()))?;
    let norm = zscore_normalize(landmarks.points())?;
    let outline = region_outline(&norm, region).map_err(|e| e.in_region(region_id))?;
    rasterize_polygon(&outline, resolution, 2).map_err(|e| e.in_region(region_id))
}

fn check_scheme(landmarks: &LandmarkSet, map: &RegionMap) -> Result<()> {
    if landmarks.scheme() != map.scheme() {
        return Err(Error::InvalidParameter { what: "landmark scheme does not match region map" });
    }
    Ok(())
}

/// Extracts the fused feature vector of one sample.
///
/// Landmarks are z-score normalized once; each elliptic region contributes
/// its EFD spectrum (N powers or the single sum, per `spectrum_mode`), each
/// generic region its GFD magnitudes, concatenated in region-map order.
/// With the default map and config: 3 x 10 + 10 x 36 = 390 values.
pub fn extract_features(
    landmarks: &LandmarkSet,
    map: &RegionMap,
    config: &ExtractionConfig,
) -> Result<FusedFeature> {
    extract_features_with(landmarks, map, config, &mut |_, _| {})
}

/// [`extract_features`] with a mask observer, called once per generic
/// region (used by the CLI's mask-dump flag).
pub fn extract_features_with(
    landmarks: &LandmarkSet,
    map: &RegionMap,
    config: &ExtractionConfig,
    mask_sink: &mut dyn FnMut(&str, &BinaryMask),
) -> Result<FusedFeature> {
    check_scheme(landmarks, map)?;
    config.validate()?;
    let layout = feature_layout(map, config);
    let norm = zscore_normalize(landmarks.points())?;
    let mut values = Vec::with_capacity(layout.dim());
    for region in map.regions() {
        match region.kind {
            RegionKind::Elliptic => {
                let contour =
                    contour_from_norm(&norm, region, config.contour_source, config.ellipse_samples)
                        .map_err(|e| e.in_region(&region.id))?;
                let coeffs = efd_coefficients(&contour, config.harmonics)
                    .map_err(|e| e.in_region(&region.id))?;
                let spectrum = harmonic_spectrum(&coeffs);
                match config.spectrum_mode {
                    SpectrumMode::Vector => values.extend_from_slice(&spectrum.power),
                    SpectrumMode::Scalar => values.push(spectrum.fs),
                }
            }
            RegionKind::Generic => {
                let outline =
                    region_outline(&norm, region).map_err(|e| e.in_region(&region.id))?;
                let mask = rasterize_polygon(&outline, config.resolution, config.margin)
                    .map_err(|e| e.in_region(&region.id))?;
                mask_sink(&region.id, &mask);
                values.extend(
                    gfd(&mask, config.radial_freqs, config.angular_freqs)
                        .map_err(|e| e.in_region(&region.id))?,
                );
            }
        }
    }
    debug_assert_eq!(values.len(), layout.dim());
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "fused feature value" });
    }
    Ok(FusedFeature { values, layout })
}

/// Dense row-major matrix of feature rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    /// Stacks equally long rows; empty input yields a 0 x 0 matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        FeatureMatrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copies the given rows into a new matrix, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix { rows: indices.len(), cols: self.cols, data }
    }
}

/// Per-dimension centering/scaling learned from training rows.
///
/// A stored std of 0 flags a zero-variance dimension: applied rows get that
/// dimension centered but not divided. The zero-variance test is relative
/// (`std <= 1e-10 * (1 + |mean|)`) because an exactly-constant column still
/// accumulates rounding dust that must not become a divisor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(matrix: &FeatureMatrix) -> Result<Self> {
        let all: Vec<usize> = (0..matrix.rows()).collect();
        Self::fit_rows(matrix, &all)
    }

    /// Fits on a row subset only; evaluation uses this with train-fold
    /// indices so test rows never touch the statistics.
    pub fn fit_rows(matrix: &FeatureMatrix, rows: &[usize]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: rows.len() });
        }
        let d = matrix.cols();
        let n = rows.len() as f64;
        let mut mean = alloc::vec![0.0; d];
        for &i in rows {
            for (m, v) in mean.iter_mut().zip(matrix.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = alloc::vec![0.0; d];
        for &i in rows {
            for ((s, v), m) in var.iter_mut().zip(matrix.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(&s, &m)| {
                let sd = libm::sqrt(s / (n - 1.0));
                if sd <= 1e-10 * (1.0 + m.abs()) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Rebuilds a standardizer from stored vectors (model loading).
    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(Error::LengthMismatch { left: mean.len(), right: std.len() });
        }
        if mean.iter().chain(&std).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "standardizer parameter" });
        }
        if std.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidParameter { what: "negative standardizer std" });
        }
        Ok(Standardizer { mean, std })
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: row.len() });
        }
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| if *s > 0.0 { (x - m) / s } else { x - m })
            .collect())
    }

    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        if matrix.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: matrix.cols(),
            });
        }
        let mut data = Vec::with_capacity(matrix.rows() * matrix.cols());
        for i in 0..matrix.rows() {
            data.extend(self.apply_row(matrix.row(i))?);
        }
        FeatureMatrix::new(matrix.rows(), matrix.cols(), data)
    }
}

/// Fits on `matrix` ([`Standardizer::fit`]); free-function form.
pub fn fit_standardizer(matrix: &FeatureMatrix) -> Result<Standardizer> {
    Standardizer::fit(matrix)
}

/// Applies `s` to every row ([`Standardizer::apply`]); free-function form.
pub fn apply_standardizer(s: &Standardizer, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    s.apply(matrix)
}
