//! Feature matrix CSV: header `sample_id,subject_id,label` followed by one
//! column per dimension named `region.kind.index`; the layout is recovered
//! from those names on read. Values use shortest-round-trip formatting, so
//! write-then-read reproduces every f64 bit for bit.

use std::path::Path;

use fsd_core::landmarks::{ExpressionLabel, SampleMeta};
use fsd_core::pipeline::{DescriptorKind, FeatureLayout, FeatureMatrix, LayoutSegment};

use crate::error::{CliError, Result};

pub struct FeatureFile {
    pub metas: Vec<SampleMeta>,
    pub matrix: FeatureMatrix,
    pub layout: FeatureLayout,
}

pub fn column_names(layout: &FeatureLayout) -> Vec<String> {
    let mut names = Vec::with_capacity(layout.dim());
    for seg in &layout.segments {
        for i in 0..seg.len {
            names.push(format!("{}.{}.{}", seg.region, seg.kind.name(), i));
        }
    }
    names
}

pub fn write_features(
    path: &Path,
    metas: &[SampleMeta],
    matrix: &FeatureMatrix,
    layout: &FeatureLayout,
) -> Result<()> {
    if metas.len() != matrix.rows() {
        return Err(fsd_core::Error::LengthMismatch {
            left: metas.len(),
            right: matrix.rows(),
        }
        .into());
    }
    if layout.dim() != matrix.cols() {
        return Err(fsd_core::Error::DimensionMismatch {
            expected: layout.dim(),
            got: matrix.cols(),
        }
        .into());
    }
    let mut out = String::from("sample_id,subject_id,label");
    for name in column_names(layout) {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (meta, row) in metas.iter().zip((0..matrix.rows()).map(|i| matrix.row(i))) {
        out.push_str(&meta.sample_id);
        out.push(',');
        out.push_str(&meta.subject_id);
        out.push(',');
        out.push_str(meta.label.code());
        for v in row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Rebuilds layout segments from `region.kind.index` column names: each
/// segment is a maximal run of one region+kind with indices 0,1,2,...
fn layout_from_columns(names: &[&str], path: &Path) -> Result<FeatureLayout> {
    let mut segments: Vec<LayoutSegment> = Vec::new();
    for (col, name) in names.iter().enumerate() {
        let bad = || {
            CliError::format(
                path,
                1,
                format!("feature column `{name}` is not region.kind.index"),
            )
        };
        let mut parts = name.rsplitn(3, '.');
        let index: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let kind = parts
            .next()
            .and_then(|s| DescriptorKind::from_name(s).ok())
            .ok_or_else(bad)?;
        let region = parts.next().ok_or_else(bad)?;
        match segments.last_mut() {
            Some(seg) if seg.region == region && seg.kind == kind && index == seg.len => {
                seg.len += 1;
            }
            _ if index == 0 => {
                segments.push(LayoutSegment {
                    region: region.to_string(),
                    kind,
                    offset: col,
                    len: 1,
                });
            }
            _ => {
                return Err(CliError::format(
                    path,
                    1,
                    format!("feature column `{name}` breaks the segment index sequence"),
                ));
            }
        }
    }
    let layout = FeatureLayout { segments };
    if layout.segments.is_empty() {
        return Err(CliError::format(path, 1, "no feature columns in header"));
    }
    Ok(layout)
}

pub fn read_features(path: &Path) -> Result<FeatureFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| super::manifest_csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| super::manifest_csv_error(path, e))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 4 || cols[0] != "sample_id" || cols[1] != "subject_id" || cols[2] != "label"
    {
        return Err(CliError::format(
            path,
            1,
            "header must start with sample_id,subject_id,label and have feature columns",
        ));
    }
    let layout = layout_from_columns(&cols[3..], path)?;
    let dim = layout.dim();

    let mut metas = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let lineno = i + 2;
        let record = record.map_err(|e| super::manifest_csv_error(path, e))?;
        if record.len() != dim + 3 {
            return Err(CliError::format(
                path,
                lineno,
                format!("expected {} fields, found {}", dim + 3, record.len()),
            ));
        }
        let label = ExpressionLabel::from_code(&record[2])
            .map_err(|e| CliError::format(path, lineno, e.to_string()))?;
        metas.push(SampleMeta {
            sample_id: record[0].to_string(),
            subject_id: record[1].to_string(),
            label,
        });
        let mut row = Vec::with_capacity(dim);
        for tok in record.iter().skip(3) {
            let v: f64 = tok.parse().map_err(|_| {
                CliError::format(path, lineno, format!("invalid feature value `{tok}`"))
            })?;
            if !v.is_finite() {
                return Err(CliError::format(path, lineno, "non-finite feature value"));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::format(path, 0, "feature file has no rows"));
    }
    let matrix = FeatureMatrix::from_rows(&rows)?;
    Ok(FeatureFile { metas, matrix, layout })
}
