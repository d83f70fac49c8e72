//! Manifest → feature matrix: loads each landmark file and runs the
//! extraction pipeline, collecting per-sample failures in lenient mode.

use fsd_core::landmarks::{LandmarkScheme, SampleMeta};
use fsd_core::mask::BinaryMask;
use fsd_core::pipeline::{
    extract_features_with, ExtractionConfig, FeatureLayout, FeatureMatrix, RegionMap,
};

use crate::error::{CliError, Result};
use crate::formats::landmarks::parse_landmark_file;
use crate::formats::ManifestEntry;

pub struct BuiltFeatures {
    pub metas: Vec<SampleMeta>,
    pub matrix: FeatureMatrix,
    pub layout: FeatureLayout,
    /// `(sample_id, reason)` for samples skipped in lenient mode.
    pub failures: Vec<(String, String)>,
}

/// Extracts one fused vector per manifest entry. `default_scheme` applies to
/// entries without a per-sample scheme override. In strict mode the first
/// failing sample aborts; otherwise failures are collected and the matrix
/// holds the successful rows in manifest order.
pub fn build_feature_matrix(
    entries: &[ManifestEntry],
    default_scheme: LandmarkScheme,
    map: &RegionMap,
    config: &ExtractionConfig,
    strict: bool,
    mask_sink: &mut dyn FnMut(&str, &str, &BinaryMask),
) -> Result<BuiltFeatures> {
    let mut metas = Vec::with_capacity(entries.len());
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(entries.len());
    let mut layout: Option<FeatureLayout> = None;
    let mut failures = Vec::new();

    for entry in entries {
        let scheme = entry.scheme.unwrap_or(default_scheme);
        match extract_one(entry, scheme, map, config, mask_sink) {
            Ok(fused) => {
                match &layout {
                    Some(l) if *l != fused.layout => {
                        // Same map+config always yields one layout; per-sample
                        // scheme overrides must not change the region map.
                        return Err(CliError::Data(format!(
                            "sample `{}` produced a different feature layout",
                            entry.sample_id
                        )));
                    }
                    Some(_) => {}
                    None => layout = Some(fused.layout),
                }
                metas.push(SampleMeta {
                    sample_id: entry.sample_id.clone(),
                    subject_id: entry.subject_id.clone(),
                    label: entry.label,
                });
                rows.push(fused.values);
            }
            Err(e) if strict => {
                return Err(CliError::Data(format!(
                    "sample `{}`: {e}",
                    entry.sample_id
                )));
            }
            Err(e) => failures.push((entry.sample_id.clone(), e.to_string())),
        }
    }

    let layout = layout.ok_or_else(|| {
        CliError::Data("no sample could be extracted".to_string())
    })?;
    let matrix = FeatureMatrix::from_rows(&rows)?;
    Ok(BuiltFeatures { metas, matrix, layout, failures })
}

fn extract_one(
    entry: &ManifestEntry,
    scheme: LandmarkScheme,
    map: &RegionMap,
    config: &ExtractionConfig,
    mask_sink: &mut dyn FnMut(&str, &str, &BinaryMask),
) -> Result<fsd_core::pipeline::FusedFeature> {
    let set = parse_landmark_file(&entry.landmark_path, scheme)?;
    let sample_id = entry.sample_id.as_str();
    let fused = extract_features_with(&set, map, config, &mut |region, mask| {
        mask_sink(sample_id, region, mask)
    })?;
    Ok(fused)
}
