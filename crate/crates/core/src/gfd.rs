//! Polar Fourier spectrum of a binary mask and the generic Fourier
//! descriptor derived from it.
//!
//! For each foreground pixel the polar coordinates (r, theta) are taken
//! about the mask centroid, and
//!
//! ```text
//! pf(rho, phi) = sum over foreground of exp(-j * (2*pi*rho*r/R + phi*theta))
//! ```
//!
//! with R the maximum centroid-to-pixel distance. Pixels keep their exact
//! angle; there is no resampling onto a polar grid. The descriptor is the
//! magnitude spectrum normalized so the first entry carries the area ratio
//! |pf(0,0)| / (2*pi*R^2) and every other entry is |pf(rho,phi)| / |pf(0,0)|.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::mask::{centroid, BinaryMask};
use crate::{Error, Result};

/// Complex polar spectrum, rho-major: `values[rho * t_freq + phi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSpectrum {
    pub r_freq: usize,
    pub t_freq: usize,
    pub values: Vec<Complex64>,
    /// Maximum centroid-to-foreground-pixel distance used as R.
    pub radius: f64,
}

impl PolarSpectrum {
    pub fn at(&self, rho: usize, phi: usize) -> Complex64 {
        self.values[rho * self.t_freq + phi]
    }
}

/// Evaluates the polar Fourier spectrum of a mask for `r_freq` radial and
/// `t_freq` angular frequencies.
///
/// `pf(0,0)` is exactly the foreground pixel count. A single-pixel mask has
/// zero maximum radius; R is then taken as 1 so all phases stay defined
/// (every r is 0 anyway).
pub fn polar_ft(mask: &BinaryMask, r_freq: usize, t_freq: usize) -> Result<PolarSpectrum> {
    if r_freq == 0 || t_freq == 0 {
        return Err(Error::InvalidParameter { what: "frequency counts must be >= 1" });
    }
    let (cx, cy) = centroid(mask)?;

    let mut radius = 0.0f64;
    for (row, col) in mask.foreground() {
        let r = libm::hypot(col as f64 - cx, row as f64 - cy);
        radius = radius.max(r);
    }
    let r_norm = if radius > 0.0 { radius } else { 1.0 };

    let mut values = alloc::vec![Complex64::new(0.0, 0.0); r_freq * t_freq];
    for (row, col) in mask.foreground() {
        let (dx, dy) = (col as f64 - cx, row as f64 - cy);
        let r = libm::hypot(dx, dy);
        let theta = libm::atan2(dy, dx);
        let ang_rad = -2.0 * PI * r / r_norm;
        let base_rad = Complex64::new(libm::cos(ang_rad), libm::sin(ang_rad));
        let base_ang = Complex64::new(libm::cos(-theta), libm::sin(-theta));
        let mut rad_pow = Complex64::new(1.0, 0.0);
        for rho in 0..r_freq {
            let mut w = rad_pow;
            for phi in 0..t_freq {
                values[rho * t_freq + phi] += w;
                w *= base_ang;
            }
            rad_pow *= base_rad;
        }
    }
    Ok(PolarSpectrum { r_freq, t_freq, values, radius })
}

/// Generic Fourier descriptor: magnitudes of [`polar_ft`] in rho-major
/// order, normalized per the construction above. Default sizing is
/// `r_freq = 4`, `t_freq = 9` (36 values).
pub fn gfd(mask: &BinaryMask, r_freq: usize, t_freq: usize) -> Result<Vec<f64>> {
    let spec = polar_ft(mask, r_freq, t_freq)?;
    let dc = libm::hypot(spec.values[0].re, spec.values[0].im);
    if dc == 0.0 {
        return Err(Error::ZeroDc);
    }
    let r = if spec.radius > 0.0 { spec.radius } else { 1.0 };
    let mut out = Vec::with_capacity(spec.values.len());
    out.push(dc / (2.0 * PI * r * r));
    for v in &spec.values[1..] {
        out.push(libm::hypot(v.re, v.im) / dc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::mask::rasterize_polygon;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Direct double-loop evaluation, structured independently of the
    /// phasor recurrences in `polar_ft`.
    fn brute_force(mask: &BinaryMask, r_freq: usize, t_freq: usize) -> Vec<Complex64> {
        let (cx, cy) = centroid(mask).unwrap();
        let mut radius = 0.0f64;
        for (row, col) in mask.foreground() {
            radius = radius.max(libm::hypot(col as f64 - cx, row as f64 - cy));
        }
        if radius == 0.0 {
            radius = 1.0;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); r_freq * t_freq];
        for rho in 0..r_freq {
            for phi in 0..t_freq {
                let mut acc = Complex64::new(0.0, 0.0);
                for (row, col) in mask.foreground() {
                    let (dx, dy) = (col as f64 - cx, row as f64 - cy);
                    let r = libm::hypot(dx, dy);
                    let theta = libm::atan2(dy, dx);
                    let arg = -(2.0 * PI * r * rho as f64 / radius + phi as f64 * theta);
                    acc += Complex64::new(libm::cos(arg), libm::sin(arg));
                }
                out[rho * t_freq + phi] = acc;
            }
        }
        out
    }

    fn checker(n: usize) -> BinaryMask {
        let mut m = BinaryMask::new(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, (r * 7 + c * 13 + r * c) % 3 == 0);
            }
        }
        m
    }

    #[test]
    fn dc_term_is_pixel_count() {
        let m = checker(12);
        let spec = polar_ft(&m, 4, 9).unwrap();
        assert_eq!(spec.values[0].re, m.foreground_count() as f64);
        assert_eq!(spec.values[0].im, 0.0);
    }

    #[test]
    fn matches_brute_force_on_small_masks() {
        for n in [5usize, 8, 13, 16] {
            let m = checker(n);
            let fast = polar_ft(&m, 4, 9).unwrap();
            let slow = brute_force(&m, 4, 9);
            for (a, b) in fast.values.iter().zip(&slow) {
                assert!((a.re - b.re).abs() < 1e-10, "re {} vs {}", a.re, b.re);
                assert!((a.im - b.im).abs() < 1e-10, "im {} vs {}", a.im, b.im);
            }
        }
    }

    #[test]
    fn disk_is_angularly_flat() {
        // |pf(0, phi)| for phi >= 1 stays under 1% of pf(0,0) on a disk
        let k = 64;
        let circle: Vec<Point2> = (0..k)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / k as f64;
                Point2::new(libm::cos(a), libm::sin(a))
            })
            .collect();
        let mask = rasterize_polygon(&circle, 128, 2).unwrap();
        let spec = polar_ft(&mask, 2, 9).unwrap();
        let dc = spec.values[0].re;
        for phi in 1..9 {
            let v = spec.at(0, phi);
            let mag = libm::hypot(v.re, v.im);
            assert!(mag < 0.01 * dc, "phi {phi}: {mag} vs dc {dc}");
        }
    }

    #[test]
    fn gfd_layout_and_normalization() {
        let m = checker(16);
        let values = gfd(&m, 4, 9).unwrap();
        assert_eq!(values.len(), 36);
        let spec = polar_ft(&m, 4, 9).unwrap();
        let dc = spec.values[0].re;
        assert!((values[0] - dc / (2.0 * PI * spec.radius * spec.radius)).abs() < 1e-12);
        for (k, v) in values.iter().enumerate().skip(1) {
            let m = libm::hypot(spec.values[k].re, spec.values[k].im);
            assert!((v - m / dc).abs() < 1e-12);
            assert!(*v <= 1.0 + 1e-12, "normalized magnitude exceeds DC");
        }
    }

    #[test]
    fn single_pixel_mask_is_finite() {
        let mut m = BinaryMask::new(16, 16);
        m.set(8, 8, true);
        let values = gfd(&m, 4, 9).unwrap();
        assert!(values.iter().all(|v| v.is_finite()));
        assert!((values[0] - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_rejected() {
        let m = BinaryMask::new(8, 8);
        assert!(matches!(polar_ft(&m, 4, 9), Err(Error::EmptyMask)));
        assert!(matches!(gfd(&m, 4, 9), Err(Error::EmptyMask)));
    }

    #[test]
    fn zero_freqs_rejected() {
        let m = checker(8);
        assert!(matches!(polar_ft(&m, 0, 9), Err(Error::InvalidParameter { .. })));
        assert!(matches!(polar_ft(&m, 4, 0), Err(Error::InvalidParameter { .. })));
    }
}
