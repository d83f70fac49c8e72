//! Evaluation report bundle: report.txt for humans, raw-count confusion
//! CSVs, the full grid table, and metrics.json for machines. Nothing here
//! is time- or host-dependent, so a fixed-seed rerun reproduces every byte.

use std::path::Path;

use fsd_core::eval::{ConfusionMatrix, CvSection, EvaluationReport};
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn write_report_bundle(dir: &Path, report: &EvaluationReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_file(&dir.join("report.txt"), report_text(report))?;
    write_file(
        &dir.join("confusion.csv"),
        confusion_csv(&report.seven_class.confusion),
    )?;
    if let Some(six) = &report.six_class {
        write_file(&dir.join("confusion_6class.csv"), confusion_csv(&six.confusion))?;
    }
    write_file(&dir.join("grid.csv"), grid_csv(report))?;
    write_file(&dir.join("metrics.json"), metrics_json(report))?;
    Ok(())
}

fn write_file(path: &Path, body: String) -> Result<()> {
    std::fs::write(path, body).map_err(|e| CliError::io(path, e))
}

fn report_text(report: &EvaluationReport) -> String {
    let mut t = String::from("expression recognition evaluation\n");
    t.push_str(&format!("seed: {}\n", report.seed));
    t.push_str(&format!("folds: {} ({})\n", report.k, report.mode.name()));
    t.push_str(&format!("samples: {}\n\n", report.n_samples));
    t.push_str(&section_text("7-class", &report.seven_class));
    if let Some(six) = &report.six_class {
        t.push('\n');
        t.push_str(&section_text("6-class, neutral dropped", six));
    }
    t.push('\n');
    if report.warnings.is_empty() {
        t.push_str("warnings: none\n");
    } else {
        t.push_str("warnings:\n");
        for w in &report.warnings {
            t.push_str(&format!("- {w}\n"));
        }
    }
    t
}

fn section_text(title: &str, s: &CvSection) -> String {
    let mut t = String::new();
    t.push_str(&format!("[{title}]\n"));
    t.push_str(&format!("samples: {}\n", s.n_samples));
    t.push_str(&format!(
        "best C: {}  best gamma: {}\n",
        s.grid.best_c, s.grid.best_gamma
    ));
    t.push_str(&format!("cross-validated accuracy: {:.2}%\n", s.overall_accuracy));
    t.push_str(&format!(
        "mean fold accuracy: {:.2}%\n\n",
        s.mean_fold_accuracy * 100.0
    ));
    t.push_str(&confusion_table(&s.confusion));
    t
}

/// Row-normalized percentages with TP/FN columns, one decimal.
fn confusion_table(m: &ConfusionMatrix) -> String {
    let classes = m.classes();
    let mut t = format!("{:<10}", "true\\pred");
    for c in classes {
        t.push_str(&format!("{:>7}", c.code()));
    }
    t.push_str(&format!("{:>7}{:>7}\n", "TP", "FN"));
    for (i, c) in classes.iter().enumerate() {
        t.push_str(&format!("{:<10}", c.code()));
        for j in 0..classes.len() {
            t.push_str(&format!("{:>7.1}", m.percentage(i, j)));
        }
        t.push_str(&format!("{:>7.1}{:>7.1}\n", m.tp_rate(i), m.fn_rate(i)));
    }
    t
}

/// Raw counts, true class per row, predicted class per column.
fn confusion_csv(m: &ConfusionMatrix) -> String {
    let classes = m.classes();
    let mut t = String::from("true\\predicted");
    for c in classes {
        t.push(',');
        t.push_str(c.code());
    }
    t.push('\n');
    for (i, c) in classes.iter().enumerate() {
        t.push_str(c.code());
        for j in 0..classes.len() {
            t.push_str(&format!(",{}", m.count(i, j)));
        }
        t.push('\n');
    }
    t
}

/// Every grid cell of every section; accuracy is the mean fold fraction.
fn grid_csv(report: &EvaluationReport) -> String {
    let mut t = String::from("section,c,gamma,accuracy,failed,converged\n");
    let mut push = |name: &str, s: &CvSection| {
        for cell in &s.grid.cells {
            t.push_str(&format!(
                "{name},{},{},{},{},{}\n",
                cell.c, cell.gamma, cell.accuracy, cell.failed, cell.converged
            ));
        }
    };
    push("seven_class", &report.seven_class);
    if let Some(six) = &report.six_class {
        push("six_class", six);
    }
    t
}

#[derive(Serialize)]
struct SectionMetrics {
    classes: Vec<&'static str>,
    n_samples: usize,
    best_c: f64,
    best_gamma: f64,
    overall_accuracy_percent: f64,
    mean_fold_accuracy: f64,
    tp_rate_percent: Vec<f64>,
    confusion_counts: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    seed: u64,
    k: usize,
    mode: &'a str,
    n_samples: usize,
    seven_class: SectionMetrics,
    six_class: Option<SectionMetrics>,
    warnings: &'a [String],
}

fn section_metrics(s: &CvSection) -> SectionMetrics {
    let m = &s.confusion;
    let n = m.classes().len();
    SectionMetrics {
        classes: m.classes().iter().map(|c| c.code()).collect(),
        n_samples: s.n_samples,
        best_c: s.grid.best_c,
        best_gamma: s.grid.best_gamma,
        overall_accuracy_percent: s.overall_accuracy,
        mean_fold_accuracy: s.mean_fold_accuracy,
        tp_rate_percent: (0..n).map(|i| m.tp_rate(i)).collect(),
        confusion_counts: (0..n)
            .map(|i| (0..n).map(|j| m.count(i, j)).collect())
            .collect(),
    }
}

fn metrics_json(report: &EvaluationReport) -> String {
    let doc = MetricsDoc {
        seed: report.seed,
        k: report.k,
        mode: report.mode.name(),
        n_samples: report.n_samples,
        seven_class: section_metrics(&report.seven_class),
        six_class: report.six_class.as_ref().map(section_metrics),
        warnings: &report.warnings,
    };
    serde_json::to_string_pretty(&doc).expect("plain struct serializes") + "\n"
}
