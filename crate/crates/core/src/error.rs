use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors produced by the descriptor pipeline and the classifier.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Input contains a NaN or infinite coordinate/value.
    NonFinite { what: &'static str },
    /// Geometry too degenerate to process (zero variance, zero perimeter,
    /// too few or collinear points, empty rasterization...).
    DegenerateGeometry { what: &'static str },
    /// The fitted conic is not an ellipse.
    NotAnEllipse,
    /// A mask with no foreground pixels.
    EmptyMask,
    /// The DC term of a polar spectrum is zero, so ratios are undefined.
    ZeroDc,
    /// A region id that the region map does not define.
    UnknownRegion(String),
    /// A parameter outside its documented domain.
    InvalidParameter { what: &'static str },
    /// Vector/matrix dimensions that do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// SVM regularization parameter must be finite and > 0.
    InvalidC(f64),
    /// Training or evaluation needs at least two distinct classes.
    SingleClass,
    /// A class token that is not one of the seven expression codes.
    UnknownLabel(String),
    /// Fewer samples than the fold count (or than a stated minimum).
    TooFewSamples { needed: usize, got: usize },
    /// Fewer distinct subjects than the fold count.
    TooFewSubjects { needed: usize, got: usize },
    /// Two sequences that must be equally long are not.
    LengthMismatch { left: usize, right: usize },
    /// A model was built for a different feature layout.
    LayoutMismatch { expected: u64, got: u64 },
    /// An error raised while processing a named region.
    InRegion { region: String, source: Box<Error> },
}

impl Error {
    /// Wraps `self` with the region id it occurred in.
    pub fn in_region(self, region: &str) -> Error {
        Error::InRegion { region: String::from(region), source: Box::new(self) }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::DegenerateGeometry { what } => write!(f, "degenerate geometry: {what}"),
            Error::NotAnEllipse => write!(f, "fitted conic is not an ellipse"),
            Error::EmptyMask => write!(f, "mask has no foreground pixels"),
            Error::ZeroDc => write!(f, "polar spectrum has zero DC term"),
            Error::UnknownRegion(id) => write!(f, "unknown region id `{id}`"),
            Error::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidC(c) => write!(f, "invalid SVM C parameter {c} (must be finite and > 0)"),
            Error::SingleClass => write!(f, "need at least two distinct classes"),
            Error::UnknownLabel(tok) => write!(f, "unknown class label `{tok}`"),
            Error::TooFewSamples { needed, got } => {
                write!(f, "too few samples: need at least {needed}, got {got}")
            }
            Error::TooFewSubjects { needed, got } => {
                write!(f, "too few subjects: need at least {needed}, got {got}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::LayoutMismatch { expected, got } => write!(
                f,
                "feature layout mismatch: model fingerprint {expected:016x}, input {got:016x}"
            ),
            Error::InRegion { region, source } => write!(f, "region `{region}`: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::InRegion { source, .. } => Some(source),
            _ => None,
        }
    }
}
