//! Landmark file parsing and writing.
//!
//! Two encodings of the same point list: plain text with one "x y" pair
//! per line, and the pts framing
//!
//! ```text
//! version: 1
//! n_points: 68
//! {
//! x y
//! ...
//! }
//! ```
//!
//! The encoding is detected from the content, never the file name.

use std::fs;
use std::path::Path;

use fsd_core::geometry::Point2;
use fsd_core::{LandmarkScheme, LandmarkSet};

use crate::error::{CliError, Result};

pub fn parse_landmark_file(path: &Path, scheme: LandmarkScheme) -> Result<LandmarkSet> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_landmarks(&text, scheme, path)
}

pub fn parse_landmarks(text: &str, scheme: LandmarkScheme, path: &Path) -> Result<LandmarkSet> {
    let is_pts = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with("version:"));
    let points = if is_pts { parse_pts(text, path)? } else { parse_plain(text, path)? };
    if points.len() != scheme.point_count() {
        return Err(CliError::format(
            path,
            0,
            format!(
                "expected {} points for scheme {}, found {}",
                scheme.point_count(),
                scheme.name(),
                points.len()
            ),
        ));
    }
    LandmarkSet::new(points, scheme, None).map_err(CliError::from)
}

fn parse_point(line: &str, lineno: usize, path: &Path) -> Result<Point2> {
    let mut parts = line.split_whitespace();
    let (x, y) = match (parts.next(), parts.next(), parts.next()) {
        (Some(x), Some(y), None) => (x, y),
        _ => {
            return Err(CliError::format(path, lineno, "expected exactly two coordinates"));
        }
    };
    let parse = |tok: &str| -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| CliError::format(path, lineno, format!("invalid number `{tok}`")))?;
        if !v.is_finite() {
            return Err(CliError::format(path, lineno, format!("non-finite coordinate `{tok}`")));
        }
        Ok(v)
    };
    Ok(Point2::new(parse(x)?, parse(y)?))
}

fn parse_plain(text: &str, path: &Path) -> Result<Vec<Point2>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        points.push(parse_point(line, i + 1, path)?);
    }
    Ok(points)
}

fn parse_pts(text: &str, path: &Path) -> Result<Vec<Point2>> {
    let mut n_points: Option<usize> = None;
    let mut in_body = false;
    let mut closed = false;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if closed {
            return Err(CliError::format(path, lineno, "content after closing `}`"));
        }
        if !in_body {
            if let Some(rest) = line.strip_prefix("version:") {
                rest.trim().parse::<u32>().map_err(|_| {
                    CliError::format(path, lineno, "version must be an integer")
                })?;
            } else if let Some(rest) = line.strip_prefix("n_points:") {
                n_points = Some(rest.trim().parse().map_err(|_| {
                    CliError::format(path, lineno, "n_points must be an integer")
                })?);
            } else if line == "{" {
                if n_points.is_none() {
                    return Err(CliError::format(path, lineno, "`{` before n_points header"));
                }
                in_body = true;
            } else {
                return Err(CliError::format(path, lineno, format!("unexpected line `{line}`")));
            }
        } else if line == "}" {
            closed = true;
        } else {
            points.push(parse_point(line, lineno, path)?);
        }
    }
    if !closed {
        return Err(CliError::format(path, 0, "missing closing `}`"));
    }
    let declared = n_points.expect("checked before entering the body");
    if points.len() != declared {
        return Err(CliError::format(
            path,
            0,
            format!("n_points says {declared} but body has {}", points.len()),
        ));
    }
    Ok(points)
}

/// Writes the plain encoding; `{}` float formatting round-trips exactly.
pub fn write_plain(path: &Path, points: &[Point2]) -> Result<()> {
    let mut out = String::new();
    for p in points {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn write_pts(path: &Path, points: &[Point2]) -> Result<()> {
    let mut out = format!("version: 1\nn_points: {}\n{{\n", points.len());
    for p in points {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    out.push_str("}\n");
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}
