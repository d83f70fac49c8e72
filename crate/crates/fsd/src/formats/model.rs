//! Versioned JSON model file.
//!
//! Self-describing: classes, kernel and C, per-class support vectors with
//! dual coefficients and bias, the feature layout plus its fingerprint,
//! standardizer statistics, and (when trained from landmarks) the region
//! map and extraction config needed to featurize new landmark files.

use std::path::Path;

use fsd_core::landmarks::ExpressionLabel;
use fsd_core::pipeline::{ExtractionConfig, FeatureLayout, FeatureMatrix, RegionMap, Standardizer};
use fsd_core::svm::{BinarySvmModel, MultiClassSvmModel, RbfKernel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MODEL_FORMAT: &str = "fsd-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct BinaryPart {
    class: ExpressionLabel,
    support_vectors: FeatureMatrix,
    coefficients: Vec<f64>,
    bias: f64,
    converged: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    classes: Vec<ExpressionLabel>,
    c: f64,
    gamma: f64,
    layout_fingerprint: String,
    layout: FeatureLayout,
    standardizer: Standardizer,
    binaries: Vec<BinaryPart>,
    /// Present when the model was trained straight from landmarks; lets
    /// `predict` featurize landmark inputs itself.
    extraction: Option<ExtractionEcho>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionEcho {
    pub region_map: RegionMap,
    pub config: ExtractionConfig,
}

pub struct LoadedModel {
    pub model: MultiClassSvmModel,
    pub layout: FeatureLayout,
    pub extraction: Option<ExtractionEcho>,
}

pub fn save_model(
    path: &Path,
    model: &MultiClassSvmModel,
    layout: &FeatureLayout,
    extraction: Option<&ExtractionEcho>,
) -> Result<()> {
    let first = &model.binaries()[0];
    let doc = ModelDoc {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        classes: model.classes().to_vec(),
        c: first.c(),
        gamma: first.kernel().gamma(),
        layout_fingerprint: format!("{:016x}", model.layout_fingerprint()),
        layout: layout.clone(),
        standardizer: model.standardizer().clone(),
        binaries: model
            .classes()
            .iter()
            .zip(model.binaries())
            .map(|(&class, b)| BinaryPart {
                class,
                support_vectors: b.support_vectors().clone(),
                coefficients: b.dual_coefficients().to_vec(),
                bias: b.bias(),
                converged: b.converged(),
            })
            .collect(),
        extraction: extraction.cloned(),
    };
    let json = serde_json::to_string_pretty(&doc).expect("model serialization cannot fail");
    std::fs::write(path, json).map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: ModelDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::format(path, e.line(), e.to_string()))?;
    if doc.format != MODEL_FORMAT {
        return Err(CliError::format(
            path,
            0,
            format!("not a {MODEL_FORMAT} file (format field is `{}`)", doc.format),
        ));
    }
    if doc.version != MODEL_VERSION {
        return Err(CliError::format(
            path,
            0,
            format!("unsupported model version {} (supported: {MODEL_VERSION})", doc.version),
        ));
    }
    let fingerprint = u64::from_str_radix(&doc.layout_fingerprint, 16)
        .map_err(|_| CliError::format(path, 0, "layout_fingerprint is not a hex number"))?;
    if doc.layout.fingerprint() != fingerprint {
        return Err(CliError::format(
            path,
            0,
            "stored layout does not hash to the stored fingerprint",
        ));
    }
    if doc.layout.dim() != doc.standardizer.dim() {
        return Err(CliError::format(
            path,
            0,
            format!(
                "layout dimension {} does not match standardizer dimension {}",
                doc.layout.dim(),
                doc.standardizer.dim()
            ),
        ));
    }
    let kernel = RbfKernel::new(doc.gamma)?;
    let mut classes = Vec::with_capacity(doc.binaries.len());
    let mut binaries = Vec::with_capacity(doc.binaries.len());
    for part in doc.binaries {
        classes.push(part.class);
        binaries.push(BinarySvmModel::from_parts(
            part.support_vectors,
            part.coefficients,
            part.bias,
            kernel,
            doc.c,
            part.converged,
        )?);
    }
    if classes != doc.classes {
        return Err(CliError::format(path, 0, "classes field disagrees with binaries"));
    }
    let extraction = match doc.extraction {
        Some(echo) => {
            // deserialization bypasses the constructors; re-validate
            let region_map =
                RegionMap::new(echo.region_map.scheme(), echo.region_map.regions().to_vec())?;
            echo.config.validate()?;
            Some(ExtractionEcho { region_map, config: echo.config })
        }
        None => None,
    };
    let model =
        MultiClassSvmModel::from_parts(classes, binaries, doc.standardizer, fingerprint)?;
    Ok(LoadedModel { model, layout: doc.layout, extraction })
}
