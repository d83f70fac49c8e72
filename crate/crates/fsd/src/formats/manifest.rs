//! Dataset manifest: CSV with header
//! `sample_id,subject_id,label,landmark_path[,scheme]`.
//!
//! Relative landmark paths are resolved against the manifest's directory,
//! so a dataset folder can be moved as a unit.

use std::path::{Path, PathBuf};

use fsd_core::landmarks::{ExpressionLabel, LandmarkScheme};

use crate::error::{CliError, Result};
use crate::formats::manifest_csv_error as csv_error;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub subject_id: String,
    pub label: ExpressionLabel,
    pub landmark_path: PathBuf,
    pub scheme: Option<LandmarkScheme>,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (id_col, subj_col, label_col, path_col) = match (
        col("sample_id"),
        col("subject_id"),
        col("label"),
        col("landmark_path"),
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => {
            return Err(CliError::format(
                path,
                1,
                "header must contain sample_id,subject_id,label,landmark_path",
            ));
        }
    };
    let scheme_col = col("scheme");
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let lineno = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |c: usize| -> Result<&str> {
            record
                .get(c)
                .ok_or_else(|| CliError::format(path, lineno, "missing column"))
        };
        let sample_id = field(id_col)?.to_string();
        if sample_id.is_empty() {
            return Err(CliError::format(path, lineno, "empty sample_id"));
        }
        if entries.iter().any(|e| e.sample_id == sample_id) {
            return Err(CliError::format(
                path,
                lineno,
                format!("duplicate sample_id `{sample_id}`"),
            ));
        }
        let label = ExpressionLabel::from_code(field(label_col)?)
            .map_err(|e| CliError::format(path, lineno, e.to_string()))?;
        let raw_path = PathBuf::from(field(path_col)?);
        let landmark_path =
            if raw_path.is_absolute() { raw_path } else { base.join(raw_path) };
        let scheme = match scheme_col {
            Some(c) => {
                let tok = field(c)?;
                if tok.is_empty() {
                    None
                } else {
                    Some(
                        LandmarkScheme::from_name(tok)
                            .map_err(|e| CliError::format(path, lineno, e.to_string()))?,
                    )
                }
            }
            None => None,
        };
        entries.push(ManifestEntry {
            sample_id,
            subject_id: field(subj_col)?.to_string(),
            label,
            landmark_path,
            scheme,
        });
    }
    if entries.is_empty() {
        return Err(CliError::format(path, 0, "manifest has no samples"));
    }
    Ok(entries)
}

/// Paths are written as given (callers pass manifest-relative paths).
pub fn write_manifest(path: &Path, rows: &[(String, String, ExpressionLabel, String)]) -> Result<()> {
    let mut out = String::from("sample_id,subject_id,label,landmark_path\n");
    for (sample_id, subject_id, label, rel_path) in rows {
        out.push_str(&format!("{sample_id},{subject_id},{},{rel_path}\n", label.code()));
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}
