//! Elliptic Fourier descriptors of closed polygonal contours.
//!
//! Coefficients follow the chord-length parameterization of Kuhl and
//! Giardina: the contour is traversed at unit speed along its edges, and
//! each harmonic n gets the quadruple (a_n, b_n, c_n, d_n) where (a, b)
//! expand x(t) and (c, d) expand y(t). The closed form below is exact for
//! piecewise-linear contours, no numerical quadrature involved.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{Contour, Point2};
use crate::{Error, Result};

/// Elliptic Fourier coefficients: one `[a_n, b_n, c_n, d_n]` quadruple per
/// harmonic plus the DC (centroid) terms `[A_0, C_0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfdCoefficients {
    harmonics: Vec<[f64; 4]>,
    dc: [f64; 2],
}

impl EfdCoefficients {
    pub fn harmonics(&self) -> &[[f64; 4]] {
        &self.harmonics
    }

    pub fn n_harmonics(&self) -> usize {
        self.harmonics.len()
    }

    /// DC terms `[A_0, C_0]`: the curve's average position under the
    /// arc-length parameterization.
    pub fn dc(&self) -> [f64; 2] {
        self.dc
    }
}

/// Per-harmonic power and its running total.
///
/// `P_n = (a_n^2 + b_n^2 + c_n^2 + d_n^2) / 2`; `fs` is the plain sum of the
/// entries of `power` in index order, so `fs == power.iter().sum()` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    pub power: Vec<f64>,
    pub fs: f64,
}

/// Computes `n_harmonics` elliptic Fourier quadruples of a closed contour.
///
/// The closing edge from the last vertex back to the first is included.
/// Zero-length edges (repeated vertices) contribute nothing and are
/// skipped.
pub fn efd_coefficients(contour: &Contour, n_harmonics: usize) -> Result<EfdCoefficients> {
    if n_harmonics == 0 {
        return Err(Error::InvalidParameter { what: "n_harmonics must be >= 1" });
    }
    let pts = contour.vertices();
    let k = pts.len();

    // cumulative chord length; t[0] = 0, t[k] = perimeter
    let mut t = Vec::with_capacity(k + 1);
    t.push(0.0);
    let mut total = 0.0;
    for i in 0..k {
        total += pts[i].dist(&pts[(i + 1) % k]);
        t.push(total);
    }
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::DegenerateGeometry { what: "contour has zero perimeter" });
    }

    let mut dc = [0.0; 2];
    for i in 0..k {
        let p = pts[i];
        let q = pts[(i + 1) % k];
        let dt = t[i + 1] - t[i];
        // trapezoid rule, exact for linear segments
        dc[0] += dt * (p.x + q.x) * 0.5;
        dc[1] += dt * (p.y + q.y) * 0.5;
    }
    dc[0] /= total;
    dc[1] /= total;

    let mut harmonics = Vec::with_capacity(n_harmonics);
    for n in 1..=n_harmonics {
        let w = 2.0 * PI * n as f64 / total;
        let scale = total / (2.0 * (n as f64) * (n as f64) * PI * PI);
        let mut quad = [0.0; 4];
        for i in 0..k {
            let p = pts[i];
            let q = pts[(i + 1) % k];
            let dt = t[i + 1] - t[i];
            if dt == 0.0 {
                continue;
            }
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let (c1, s1) = (libm::cos(w * t[i]), libm::sin(w * t[i]));
            let (c2, s2) = (libm::cos(w * t[i + 1]), libm::sin(w * t[i + 1]));
            quad[0] += dx / dt * (c2 - c1);
            quad[1] += dx / dt * (s2 - s1);
            quad[2] += dy / dt * (c2 - c1);
            quad[3] += dy / dt * (s2 - s1);
        }
        for v in &mut quad {
            *v *= scale;
        }
        harmonics.push(quad);
    }
    Ok(EfdCoefficients { harmonics, dc })
}

/// Per-harmonic power spectrum and its sum `fs`.
pub fn harmonic_spectrum(coeffs: &EfdCoefficients) -> HarmonicSpectrum {
    let power: Vec<f64> = coeffs
        .harmonics
        .iter()
        .map(|[a, b, c, d]| (a * a + b * b + c * c + d * d) / 2.0)
        .collect();
    let fs = power.iter().sum();
    HarmonicSpectrum { power, fs }
}

/// Evaluates the truncated Fourier series at `samples` uniform parameter
/// values. With zero harmonics every point sits at the DC term, so the
/// result is returned as raw points rather than a validated contour.
pub fn efd_reconstruct(coeffs: &EfdCoefficients, samples: usize) -> Vec<Point2> {
    let mut out = Vec::with_capacity(samples);
    for j in 0..samples {
        let u = j as f64 / samples as f64;
        let (mut x, mut y) = (coeffs.dc[0], coeffs.dc[1]);
        for (idx, [a, b, c, d]) in coeffs.harmonics.iter().enumerate() {
            let ang = 2.0 * PI * (idx + 1) as f64 * u;
            let (cn, sn) = (libm::cos(ang), libm::sin(ang));
            x += a * cn + b * sn;
            y += c * cn + d * sn;
        }
        out.push(Point2::new(x, y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Contour;
    use alloc::vec;
    use alloc::vec::Vec;

    fn regular_polygon(k: usize, r: f64) -> Contour {
        let pts: Vec<Point2> = (0..k)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / k as f64;
                Point2::new(r * libm::cos(a), r * libm::sin(a))
            })
            .collect();
        Contour::new(pts).unwrap()
    }

    fn square() -> Contour {
        Contour::new(vec![
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
        ])
        .unwrap()
    }

    #[test]
    fn unit_circle_first_harmonic() {
        let c = regular_polygon(360, 1.0);
        let coeffs = efd_coefficients(&c, 4).unwrap();
        let [a1, b1, c1, d1] = coeffs.harmonics()[0];
        assert!((a1 - 1.0).abs() < 1e-3, "a1 = {a1}");
        assert!(b1.abs() < 1e-3 && c1.abs() < 1e-3);
        assert!((d1 - 1.0).abs() < 1e-3, "d1 = {d1}");
        let spec = harmonic_spectrum(&coeffs);
        for p in &spec.power[1..] {
            assert!(*p < 1e-5, "higher harmonic power {p}");
        }
        assert!(coeffs.dc()[0].abs() < 1e-12 && coeffs.dc()[1].abs() < 1e-12);
    }

    #[test]
    fn square_even_harmonics_vanish() {
        // a centered square maps to itself under a half-period shift with a
        // sign flip, so even harmonics cancel exactly
        let coeffs = efd_coefficients(&square(), 8).unwrap();
        let spec = harmonic_spectrum(&coeffs);
        for n in [2usize, 4, 6, 8] {
            assert!(spec.power[n - 1] < 1e-10, "P_{n} = {}", spec.power[n - 1]);
        }
        assert!(spec.power[0] > 0.1);
        // odd power decays fast
        assert!(spec.power[2] < spec.power[0] / 10.0);
        assert!(spec.power[4] < spec.power[2]);
    }

    #[test]
    fn spectrum_sum_matches_fs_exactly() {
        let coeffs = efd_coefficients(&regular_polygon(17, 2.5), 12).unwrap();
        let spec = harmonic_spectrum(&coeffs);
        let manual: f64 = spec.power.iter().sum();
        assert_eq!(spec.fs, manual);
        assert_eq!(spec.power.len(), 12);
    }

    #[test]
    fn zero_harmonics_rejected() {
        assert!(matches!(
            efd_coefficients(&square(), 0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn repeated_vertices_are_skipped() {
        let dup = Contour::new(vec![
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(-1.0, -1.0),
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
        ])
        .unwrap();
        let a = efd_coefficients(&dup, 6).unwrap();
        let b = efd_coefficients(&square(), 6).unwrap();
        for (ha, hb) in a.harmonics().iter().zip(b.harmonics()) {
            for i in 0..4 {
                assert!((ha[i] - hb[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_zero_coefficients_sits_at_dc() {
        let coeffs = EfdCoefficients { harmonics: vec![[0.0; 4]; 3], dc: [2.0, -5.0] };
        for p in efd_reconstruct(&coeffs, 10) {
            assert_eq!(p, Point2::new(2.0, -5.0));
        }
    }

    #[test]
    fn reconstruct_single_harmonic_is_ellipse() {
        let coeffs = EfdCoefficients { harmonics: vec![[3.0, 0.0, 0.0, 1.5]], dc: [1.0, 1.0] };
        let pts = efd_reconstruct(&coeffs, 64);
        for p in &pts {
            let u = (p.x - 1.0) / 3.0;
            let v = (p.y - 1.0) / 1.5;
            assert!((u * u + v * v - 1.0).abs() < 1e-12);
        }
    }
}
