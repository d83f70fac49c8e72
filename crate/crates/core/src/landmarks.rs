//! Landmark sets, markup schemes, and expression labels.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Point2;
use crate::{Error, Result};

/// The seven expression classes in canonical order. All per-class output
/// (confusion matrices, decision columns, reports) follows this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExpressionLabel {
    Angry,
    Neutral,
    Disgusted,
    Fearful,
    Happy,
    Sad,
    Surprised,
}

impl ExpressionLabel {
    pub const ALL: [ExpressionLabel; 7] = [
        ExpressionLabel::Angry,
        ExpressionLabel::Neutral,
        ExpressionLabel::Disgusted,
        ExpressionLabel::Fearful,
        ExpressionLabel::Happy,
        ExpressionLabel::Sad,
        ExpressionLabel::Surprised,
    ];

    /// Two-letter code used in files and reports.
    pub const fn code(&self) -> &'static str {
        match self {
            ExpressionLabel::Angry => "AN",
            ExpressionLabel::Neutral => "NE",
            ExpressionLabel::Disgusted => "DI",
            ExpressionLabel::Fearful => "FE",
            ExpressionLabel::Happy => "HA",
            ExpressionLabel::Sad => "SA",
            ExpressionLabel::Surprised => "SU",
        }
    }

    /// Position in [`ExpressionLabel::ALL`].
    pub fn canonical_index(&self) -> usize {
        Self::ALL.iter().position(|l| l == self).unwrap()
    }

    pub fn from_code(code: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.code() == code)
            .ok_or_else(|| Error::UnknownLabel(String::from(code)))
    }
}

impl fmt::Display for ExpressionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Supported landmark markup schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LandmarkScheme {
    /// 68-point markup: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47,
    /// mouth 48-67.
    Ibug68,
    /// 49-point tracker markup: the 68-point layout without the jaw,
    /// indices shifted down by 17.
    Tracker49,
}

impl LandmarkScheme {
    pub const fn point_count(&self) -> usize {
        match self {
            LandmarkScheme::Ibug68 => 68,
            LandmarkScheme::Tracker49 => 49,
        }
    }

    pub const fn name(&self) -> &'static str {
        match self {
            LandmarkScheme::Ibug68 => "ibug68",
            LandmarkScheme::Tracker49 => "tracker49",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "ibug68" => Ok(LandmarkScheme::Ibug68),
            "tracker49" => Ok(LandmarkScheme::Tracker49),
            _ => Err(Error::InvalidParameter { what: "unknown landmark scheme" }),
        }
    }
}

/// One face's landmarks under a given scheme, with an optional class label
/// (absent at prediction time).
///
/// Invariants: point count matches the scheme exactly, every coordinate
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Point2>,
    scheme: LandmarkScheme,
    pub label: Option<ExpressionLabel>,
}

impl LandmarkSet {
    pub fn new(
        points: Vec<Point2>,
        scheme: LandmarkScheme,
        label: Option<ExpressionLabel>,
    ) -> Result<Self> {
        if points.len() != scheme.point_count() {
            return Err(Error::DimensionMismatch {
                expected: scheme.point_count(),
                got: points.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "landmark coordinate" });
        }
        Ok(LandmarkSet { points, scheme, label })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn scheme(&self) -> LandmarkScheme {
        self.scheme
    }
}

/// Identity and label of one dataset sample; the feature row lives
/// elsewhere.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleMeta {
    pub sample_id: String,
    pub subject_id: String,
    pub label: ExpressionLabel,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn canonical_order_is_stable() {
        let codes: Vec<&str> = ExpressionLabel::ALL.iter().map(|l| l.code()).collect();
        assert_eq!(codes, vec!["AN", "NE", "DI", "FE", "HA", "SA", "SU"]);
        for (i, l) in ExpressionLabel::ALL.iter().enumerate() {
            assert_eq!(l.canonical_index(), i);
            assert_eq!(ExpressionLabel::from_code(l.code()).unwrap(), *l);
        }
    }

    #[test]
    fn unknown_label_rejected() {
        assert!(matches!(ExpressionLabel::from_code("XX"), Err(Error::UnknownLabel(_))));
        assert!(matches!(ExpressionLabel::from_code("an"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn landmark_count_must_match_scheme() {
        let pts = vec![Point2::new(0.0, 0.0); 49];
        assert!(LandmarkSet::new(pts.clone(), LandmarkScheme::Tracker49, None).is_ok());
        assert!(matches!(
            LandmarkSet::new(pts, LandmarkScheme::Ibug68, None),
            Err(Error::DimensionMismatch { expected: 68, got: 49 })
        ));
    }

    #[test]
    fn nonfinite_landmark_rejected() {
        let mut pts = vec![Point2::new(1.0, 2.0); 68];
        pts[10].y = f64::INFINITY;
        assert!(matches!(
            LandmarkSet::new(pts, LandmarkScheme::Ibug68, None),
            Err(Error::NonFinite { .. })
        ));
    }
}
