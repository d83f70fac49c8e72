//! Planar primitives: points, contours, z-score normalization, convex hulls,
//! and direct least-squares ellipse fitting.

pub mod ellipse;

pub use ellipse::{fit_ellipse, sample_ellipse, EllipseFit, EllipseParams};

use alloc::vec::Vec;

use crate::{Error, Result};

/// A point in the plane. Image convention: x grows right, y grows down.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// A closed polygonal contour. The edge from the last vertex back to the
/// first is implicit.
///
/// Invariants: at least 3 vertices, all finite, perimeter > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    vertices: Vec<Point2>,
}

impl Contour {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry { what: "contour needs at least 3 vertices" });
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "contour vertex" });
        }
        let c = Contour { vertices };
        if c.perimeter() <= 0.0 {
            return Err(Error::DegenerateGeometry { what: "contour has zero perimeter" });
        }
        Ok(c)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Sum of all edge lengths including the closing edge.
    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        let mut t = 0.0;
        for i in 0..n {
            t += self.vertices[i].dist(&self.vertices[(i + 1) % n]);
        }
        t
    }

    /// Signed area (shoelace). Positive when vertices wind counter-clockwise
    /// in a y-up frame; sign flips in the image (y-down) convention.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            s += p.x * q.y - q.x * p.y;
        }
        0.5 * s
    }
}

/// Per-axis sample mean and standard deviation of a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
}

/// Computes per-axis mean and sample (n-1) standard deviation.
pub fn axis_stats(points: &[Point2]) -> Result<AxisStats> {
    if points.len() < 2 {
        return Err(Error::DegenerateGeometry { what: "need at least 2 points for axis stats" });
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite { what: "landmark coordinate" });
    }
    let n = points.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for p in points {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;
    let (mut vx, mut vy) = (0.0, 0.0);
    for p in points {
        vx += (p.x - mx) * (p.x - mx);
        vy += (p.y - my) * (p.y - my);
    }
    vx /= n - 1.0;
    vy /= n - 1.0;
    Ok(AxisStats { mean_x: mx, mean_y: my, std_x: libm::sqrt(vx), std_y: libm::sqrt(vy) })
}

/// Z-score normalization: per axis, subtract the mean and divide by the
/// sample standard deviation. Removes translation and per-axis scale.
///
/// Errors with [`Error::DegenerateGeometry`] if either axis has zero
/// variance. Applying the transform a second time changes nothing beyond
/// floating-point dust (idempotent within 1e-12).
pub fn zscore_normalize(points: &[Point2]) -> Result<Vec<Point2>> {
    let s = axis_stats(points)?;
    if s.std_x == 0.0 || s.std_y == 0.0 {
        return Err(Error::DegenerateGeometry { what: "zero variance along an axis" });
    }
    Ok(points
        .iter()
        .map(|p| Point2::new((p.x - s.mean_x) / s.std_x, (p.y - s.mean_y) / s.std_y))
        .collect())
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by Andrew's monotone chain. Returns hull vertices in
/// counter-clockwise order (y-up convention) without the repeated first
/// point. Collinear input collapses to fewer than 3 vertices.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zscore_unit_stats() {
        let pts = vec![
            Point2::new(1.0, 10.0),
            Point2::new(3.0, 30.0),
            Point2::new(5.0, 20.0),
            Point2::new(7.0, 40.0),
        ];
        let out = zscore_normalize(&pts).unwrap();
        let s = axis_stats(&out).unwrap();
        assert!(s.mean_x.abs() < 1e-12 && s.mean_y.abs() < 1e-12);
        assert!((s.std_x - 1.0).abs() < 1e-12 && (s.std_y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zscore_idempotent() {
        let pts = vec![
            Point2::new(2.0, -1.0),
            Point2::new(4.5, 3.0),
            Point2::new(-1.0, 7.5),
            Point2::new(0.25, 2.0),
            Point2::new(9.0, -3.5),
        ];
        let once = zscore_normalize(&pts).unwrap();
        let twice = zscore_normalize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_zero_variance_rejected() {
        let pts = vec![Point2::new(1.0, 1.0), Point2::new(1.0, 2.0), Point2::new(1.0, 3.0)];
        assert!(matches!(zscore_normalize(&pts), Err(Error::DegenerateGeometry { .. })));
    }

    #[test]
    fn zscore_nonfinite_rejected() {
        let pts = vec![Point2::new(f64::NAN, 1.0), Point2::new(1.0, 2.0)];
        assert!(matches!(zscore_normalize(&pts), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
        let same = Point2::new(2.0, 2.0);
        assert!(matches!(
            Contour::new(vec![same, same, same]),
            Err(Error::DegenerateGeometry { .. })
        ));
        let tri = Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!((tri.perimeter() - (2.0 + libm::sqrt(2.0))).abs() < 1e-12);
        assert!((tri.signed_area().abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
            Point2::new(2.0, 2.0),
            Point2::new(1.0, 3.0),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        for p in &hull {
            assert!(p.x == 0.0 || p.x == 4.0 || p.y == 0.0 || p.y == 4.0);
        }
    }

    #[test]
    fn hull_collinear_collapses() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)];
        assert!(convex_hull(&pts).len() < 3);
    }
}
