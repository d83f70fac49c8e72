//! Command implementations. Flag-value bounds are checked here and map to
//! usage errors; file and data problems keep their own exit codes.

use std::path::Path;

use fsd_core::eval::{evaluate, EvaluationConfig, FoldMode, ParamGrid, SolverSettings};
use fsd_core::landmarks::{ExpressionLabel, SampleMeta};
use fsd_core::mask::BinaryMask;
use fsd_core::pipeline::{FeatureLayout, FeatureMatrix, RegionMap};
use fsd_core::svm::{ova_predict, ova_train, SvmParams};

use crate::cli::{
    Command, EvaluateArgs, ExtractArgs, ExtractOpts, FoldModeArg, PredictArgs, SynthArgs,
    TrainArgs,
};
use crate::dataset::build_feature_matrix;
use crate::error::{CliError, Result};
use crate::formats::features::{read_features, write_features};
use crate::formats::manifest::read_manifest;
use crate::formats::model::{load_model, save_model, ExtractionEcho};
use crate::formats::pgm::write_pgm;
use crate::formats::regionmap::read_region_map;
use crate::report::write_report_bundle;
use crate::synth::{generate, SynthSpec};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract(args) => cmd_extract(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn resolve_region_map(opts: &ExtractOpts) -> Result<RegionMap> {
    match &opts.region_map {
        Some(path) => read_region_map(path),
        None => Ok(RegionMap::default_for(opts.scheme.into())),
    }
}

fn check_positive(flag: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must be positive and finite, got {v}")))
    }
}

fn check_passes(max_passes: usize) -> Result<()> {
    if max_passes == 0 {
        return Err(CliError::Usage("--max-passes must be at least 1".to_string()));
    }
    Ok(())
}

fn usage_one_source() -> CliError {
    CliError::Usage("exactly one of --features or --manifest is required".to_string())
}

fn parse_gamma(text: &str, dim: usize) -> Result<f64> {
    if text == "auto" {
        return Ok(1.0 / dim as f64);
    }
    let v: f64 = text.parse().map_err(|_| {
        CliError::Usage(format!("--gamma must be `auto` or a number, got `{text}`"))
    })?;
    check_positive("--gamma", v)?;
    Ok(v)
}

/// File-name-safe version of an id (sample ids are arbitrary strings).
fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect()
}

/// Validated extraction config; bad flag values are usage errors.
fn extraction_config(opts: &ExtractOpts) -> Result<fsd_core::pipeline::ExtractionConfig> {
    let config = opts.config();
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn features_from_manifest(
    path: &Path,
    opts: &ExtractOpts,
) -> Result<(Vec<SampleMeta>, FeatureMatrix, FeatureLayout, ExtractionEcho)> {
    let config = extraction_config(opts)?;
    let map = resolve_region_map(opts)?;
    let entries = read_manifest(path)?;
    let built = build_feature_matrix(
        &entries,
        opts.scheme.into(),
        &map,
        &config,
        true,
        &mut |_, _, _| {},
    )?;
    let echo = ExtractionEcho { region_map: map, config };
    Ok((built.metas, built.matrix, built.layout, echo))
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let config = extraction_config(&args.opts)?;
    let map = resolve_region_map(&args.opts)?;
    let entries = read_manifest(&args.manifest)?;

    if let Some(dir) = &args.dump_masks {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut mask_errors: Vec<CliError> = Vec::new();
    let mut sink = |sample_id: &str, region: &str, mask: &BinaryMask| {
        if let Some(dir) = &args.dump_masks {
            let file = dir.join(format!("{}_{}.pgm", safe_name(sample_id), safe_name(region)));
            if let Err(e) = write_pgm(&file, mask) {
                mask_errors.push(e);
            }
        }
    };
    let built = build_feature_matrix(
        &entries,
        args.opts.scheme.into(),
        &map,
        &config,
        args.strict,
        &mut sink,
    )?;
    if let Some(e) = mask_errors.into_iter().next() {
        return Err(e);
    }

    write_features(&args.out, &built.metas, &built.matrix, &built.layout)?;
    println!(
        "extracted {}/{} samples (dim {}) -> {}",
        built.metas.len(),
        entries.len(),
        built.layout.dim(),
        args.out.display()
    );
    if !built.failures.is_empty() {
        for (id, msg) in &built.failures {
            eprintln!("sample `{id}`: {msg}");
        }
        return Err(CliError::Data(format!(
            "{} of {} samples failed extraction",
            built.failures.len(),
            entries.len()
        )));
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    check_positive("--c", args.c)?;
    check_positive("--tol", args.tol)?;
    check_passes(args.max_passes)?;

    let (metas, matrix, layout, echo) = match (&args.features, &args.manifest) {
        (Some(file), None) => {
            let f = read_features(file)?;
            (f.metas, f.matrix, f.layout, None)
        }
        (None, Some(manifest)) => {
            let (metas, matrix, layout, echo) = features_from_manifest(manifest, &args.opts)?;
            (metas, matrix, layout, Some(echo))
        }
        _ => return Err(usage_one_source()),
    };

    let gamma = parse_gamma(&args.gamma, layout.dim())?;
    let params = SvmParams { c: args.c, gamma, tol: args.tol, max_passes: args.max_passes };
    let labels: Vec<ExpressionLabel> = metas.iter().map(|m| m.label).collect();
    let model = ova_train(&matrix, &labels, &params, layout.fingerprint())?;

    let mut correct = 0usize;
    for (i, meta) in metas.iter().enumerate() {
        let (predicted, _) = ova_predict(&model, matrix.row(i))?;
        if predicted == meta.label {
            correct += 1;
        }
    }

    save_model(&args.out, &model, &layout, echo.as_ref())?;
    println!(
        "trained {}-class model on {} samples (dim {})",
        model.classes().len(),
        metas.len(),
        layout.dim()
    );
    println!("C: {}  gamma: {gamma}", args.c);
    println!(
        "training accuracy: {:.2}% ({correct}/{})",
        100.0 * correct as f64 / metas.len() as f64,
        metas.len()
    );
    println!("model -> {}", args.out.display());
    if !model.converged() {
        eprintln!("warning: at least one binary classifier hit the iteration cap");
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let loaded = load_model(&args.model)?;
    let (metas, matrix, layout) = match (&args.features, &args.manifest) {
        (Some(file), None) => {
            let f = read_features(file)?;
            (f.metas, f.matrix, f.layout)
        }
        (None, Some(manifest)) => {
            let echo = loaded.extraction.as_ref().ok_or_else(|| {
                CliError::Data(
                    "model carries no extraction settings; predict from --features instead"
                        .to_string(),
                )
            })?;
            let entries = read_manifest(manifest)?;
            let built = build_feature_matrix(
                &entries,
                echo.region_map.scheme(),
                &echo.region_map,
                &echo.config,
                true,
                &mut |_, _, _| {},
            )?;
            (built.metas, built.matrix, built.layout)
        }
        _ => return Err(usage_one_source()),
    };

    if layout.fingerprint() != loaded.model.layout_fingerprint() {
        return Err(fsd_core::Error::LayoutMismatch {
            expected: loaded.model.layout_fingerprint(),
            got: layout.fingerprint(),
        }
        .into());
    }

    let mut out = String::from("sample_id,predicted");
    for class in loaded.model.classes() {
        out.push_str(&format!(",decision_{}", class.code()));
    }
    out.push('\n');
    let mut correct = 0usize;
    for (i, meta) in metas.iter().enumerate() {
        let (predicted, decisions) = ova_predict(&loaded.model, matrix.row(i))?;
        if predicted == meta.label {
            correct += 1;
        }
        out.push_str(&meta.sample_id);
        out.push_str(&format!(",{}", predicted.code()));
        for d in decisions {
            out.push_str(&format!(",{d}"));
        }
        out.push('\n');
    }
    std::fs::write(&args.out, out).map_err(|e| CliError::io(&args.out, e))?;

    println!("predicted {} samples -> {}", metas.len(), args.out.display());
    println!(
        "accuracy vs labels: {:.2}% ({correct}/{})",
        100.0 * correct as f64 / metas.len() as f64,
        metas.len()
    );
    Ok(())
}

fn grid_values(flag: &str, given: Option<Vec<f64>>, default: Vec<f64>) -> Result<Vec<f64>> {
    match given {
        None => Ok(default),
        Some(values) => {
            if values.is_empty() {
                return Err(CliError::Usage(format!("{flag} needs at least one value")));
            }
            for v in &values {
                check_positive(flag, *v)?;
            }
            Ok(values)
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    if args.k < 2 {
        return Err(CliError::Usage(format!("--k must be at least 2, got {}", args.k)));
    }
    check_positive("--tol", args.tol)?;
    check_passes(args.max_passes)?;
    let defaults = ParamGrid::default();
    let grid = ParamGrid {
        c_values: grid_values("--grid-c", args.grid_c, defaults.c_values)?,
        gamma_values: grid_values("--grid-gamma", args.grid_gamma, defaults.gamma_values)?,
    };

    let (metas, matrix) = match (&args.features, &args.manifest) {
        (Some(file), None) => {
            let f = read_features(file)?;
            (f.metas, f.matrix)
        }
        (None, Some(manifest)) => {
            let (metas, matrix, _, _) = features_from_manifest(manifest, &args.opts)?;
            (metas, matrix)
        }
        _ => return Err(usage_one_source()),
    };

    let config = EvaluationConfig {
        k: args.k,
        mode: match args.fold_mode {
            FoldModeArg::Stratified => FoldMode::Stratified,
            FoldModeArg::SubjectIndependent => FoldMode::SubjectIndependent,
        },
        seed: args.seed,
        grid,
        settings: SolverSettings { tol: args.tol, max_passes: args.max_passes },
        six_class: true,
    };
    let report = evaluate(&matrix, &metas, &config)?;
    write_report_bundle(&args.out_dir, &report)?;

    println!(
        "seed: {}  folds: {} ({})  samples: {}",
        report.seed,
        report.k,
        report.mode.name(),
        report.n_samples
    );
    let seven = &report.seven_class;
    println!(
        "{}-class accuracy: {:.2}% (best C {}, gamma {})",
        seven.classes.len(),
        seven.overall_accuracy,
        seven.grid.best_c,
        seven.grid.best_gamma
    );
    if let Some(six) = &report.six_class {
        println!(
            "{}-class accuracy: {:.2}% (best C {}, gamma {})",
            six.classes.len(),
            six.overall_accuracy,
            six.grid.best_c,
            six.grid.best_gamma
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("report bundle -> {}", args.out_dir.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        classes: args.classes,
        per_class: args.per_class,
        noise: args.noise,
        seed: args.seed,
    };
    let out = generate(&args.out_dir, &spec)?;
    println!(
        "wrote {} landmark files + manifest + synth.json under {} (seed {})",
        out.files_written,
        args.out_dir.display(),
        args.seed
    );
    Ok(())
}
