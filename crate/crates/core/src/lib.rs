//! Shape-descriptor pipeline for facial expression recognition.
//!
//! The crate turns a set of facial landmarks into a fused feature vector and
//! classifies it with a one-vs-all RBF SVM:
//!
//! 1. z-score normalization of the landmark cloud ([`geometry::zscore_normalize`])
//! 2. region contours, either fitted ellipses or landmark polygons
//!    ([`pipeline::region_contour`])
//! 3. elliptic Fourier descriptors of each contour ([`efd`])
//! 4. binary masks of polygonal regions and their polar Fourier spectra
//!    ([`mask`], [`gfd`])
//! 5. feature fusion and standardization ([`pipeline`])
//! 6. SMO-trained binary SVMs combined one-vs-all ([`svm`])
//! 7. k-fold cross-validation, grid search and confusion matrices ([`eval`])
//!
//! Everything here is `no_std` + `alloc`; file formats and the CLI live in the
//! companion `fsd` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod efd;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod gfd;
pub mod landmarks;
pub mod mask;
pub mod pipeline;
pub mod svm;

pub use error::Error;
pub use geometry::{Contour, Point2};
pub use landmarks::{ExpressionLabel, LandmarkScheme, LandmarkSet, SampleMeta};

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
