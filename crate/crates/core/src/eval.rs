//! Cross-validated evaluation: fold plans, (C, gamma) grid search,
//! confusion matrices, and the 7-class / 6-class accuracy protocol.
//!
//! All randomness flows from one explicit u64 seed, so a report is a pure
//! function of (features, sample metadata, config).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::landmarks::{ExpressionLabel, SampleMeta};
use crate::pipeline::{FeatureMatrix, Standardizer};
use crate::svm::{self, MultiClassSvmModel, PrecomputedKernel, SvmParams};
use crate::{Error, Result};

/// How samples are dealt into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FoldMode {
    /// Per-class shuffling, then round-robin dealing: fold sizes differ by
    /// at most 1 overall and within each class.
    Stratified,
    /// Whole subjects assigned greedily to the smallest fold; no subject
    /// appears in more than one fold.
    SubjectIndependent,
}

impl FoldMode {
    pub const fn name(&self) -> &'static str {
        match self {
            FoldMode::Stratified => "stratified",
            FoldMode::SubjectIndependent => "subject_independent",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "stratified" => Ok(FoldMode::Stratified),
            "subject_independent" => Ok(FoldMode::SubjectIndependent),
            _ => Err(Error::InvalidParameter { what: "unknown fold mode" }),
        }
    }
}

/// A k-way partition of sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    mode: FoldMode,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> FoldMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold id per sample index.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Splits samples into k folds, deterministically for a fixed seed.
pub fn make_folds(
    samples: &[SampleMeta],
    k: usize,
    mode: FoldMode,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter { what: "fold count must be >= 2" });
    }
    if samples.len() < k {
        return Err(Error::TooFewSamples { needed: k, got: samples.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; samples.len()];
    match mode {
        FoldMode::Stratified => {
            // one global cursor across classes keeps overall fold sizes
            // within 1 of each other, not only the per-class sizes
            let mut cursor = 0usize;
            for class in ExpressionLabel::ALL {
                let mut members: Vec<usize> = (0..samples.len())
                    .filter(|&i| samples[i].label == class)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                members.shuffle(&mut rng);
                for i in members {
                    assignments[i] = cursor % k;
                    cursor += 1;
                }
            }
        }
        FoldMode::SubjectIndependent => {
            let mut subjects: Vec<&str> = Vec::new();
            for s in samples {
                if !subjects.contains(&s.subject_id.as_str()) {
                    subjects.push(&s.subject_id);
                }
            }
            if subjects.len() < k {
                return Err(Error::TooFewSubjects { needed: k, got: subjects.len() });
            }
            subjects.shuffle(&mut rng);
            let count_of = |subj: &str| -> usize {
                samples.iter().filter(|s| s.subject_id == subj).count()
            };
            // big subjects first evens the greedy fill; the sort is stable
            // so the shuffle still decides ties
            subjects.sort_by_key(|s| core::cmp::Reverse(count_of(s)));
            let mut sizes = vec![0usize; k];
            for subj in subjects {
                let fold = sizes
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &s)| s)
                    .map(|(f, _)| f)
                    .unwrap();
                for (i, s) in samples.iter().enumerate() {
                    if s.subject_id == subj {
                        assignments[i] = fold;
                        sizes[fold] += 1;
                    }
                }
            }
        }
    }
    Ok(FoldPlan { k, assignments, mode, seed })
}

/// Candidate (C, gamma) values for the grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
}

impl Default for ParamGrid {
    /// C in 2^-3 .. 2^9 and gamma in 2^-11 .. 2^1, both stepping x4.
    fn default() -> Self {
        let pow2 = |e: i32| libm::exp2(f64::from(e));
        ParamGrid {
            c_values: (0..7).map(|t| pow2(-3 + 2 * t)).collect(),
            gamma_values: (0..7).map(|t| pow2(-11 + 2 * t)).collect(),
        }
    }
}

impl ParamGrid {
    fn validated_sorted(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.c_values.is_empty() || self.gamma_values.is_empty() {
            return Err(Error::InvalidParameter { what: "parameter grid must be non-empty" });
        }
        if self.c_values.iter().chain(&self.gamma_values).any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidParameter {
                what: "grid values must be positive and finite",
            });
        }
        let mut cs = self.c_values.clone();
        let mut gs = self.gamma_values.clone();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cs.dedup();
        gs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        gs.dedup();
        Ok((cs, gs))
    }
}

/// One grid cell's cross-validation outcome. `accuracy` is the mean of the
/// per-fold accuracies, as a fraction in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub failed: bool,
    pub converged: bool,
}

/// All grid cells (C ascending, then gamma ascending) plus the winner.
/// Ties go to the smaller C, then the smaller gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub cells: Vec<GridCell>,
    pub best_c: f64,
    pub best_gamma: f64,
    pub best_accuracy: f64,
}

impl GridSearchResult {
    pub fn best_cell(&self) -> &GridCell {
        self.cells
            .iter()
            .find(|cell| cell.c == self.best_c && cell.gamma == self.best_gamma)
            .unwrap()
    }
}

/// Numeric knobs shared by grid search and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-3, max_passes: 100_000 }
    }
}

struct CellState {
    fold_accuracies: Vec<f64>,
    failed: bool,
    converged: bool,
    predictions: Vec<Option<ExpressionLabel>>,
}

struct GridRun {
    // indexed [c][gamma]
    cells: Vec<Vec<CellState>>,
    cs: Vec<f64>,
    gammas: Vec<f64>,
    classes: Vec<ExpressionLabel>,
    first_error: Option<Error>,
}

fn present_classes(labels: &[ExpressionLabel]) -> Vec<ExpressionLabel> {
    ExpressionLabel::ALL.iter().copied().filter(|c| labels.contains(c)).collect()
}

/// Shared CV engine. Per fold it fits the standardizer on train rows only,
/// computes squared-distance matrices once, then reuses them across every
/// gamma (one exponentiation each) and every C and class (one kernel).
fn run_grid(
    features: &FeatureMatrix,
    samples: &[SampleMeta],
    plan: &FoldPlan,
    grid: &ParamGrid,
    settings: &SolverSettings,
) -> Result<GridRun> {
    if features.rows() != samples.len() {
        return Err(Error::LengthMismatch { left: features.rows(), right: samples.len() });
    }
    if plan.assignments().len() != samples.len() {
        return Err(Error::LengthMismatch {
            left: plan.assignments().len(),
            right: samples.len(),
        });
    }
    let (cs, gammas) = grid.validated_sorted()?;
    let labels: Vec<ExpressionLabel> = samples.iter().map(|s| s.label).collect();
    let classes = present_classes(&labels);
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let n = samples.len();
    let mut cells: Vec<Vec<CellState>> = cs
        .iter()
        .map(|_| {
            gammas
                .iter()
                .map(|_| CellState {
                    fold_accuracies: Vec::with_capacity(plan.k()),
                    failed: false,
                    converged: true,
                    predictions: vec![None; n],
                })
                .collect()
        })
        .collect();
    let mut first_error: Option<Error> = None;

    for fold in 0..plan.k() {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let outcome = run_fold(
            features, &labels, &classes, &train, &test, &cs, &gammas, settings, &mut cells,
        );
        if let Err(e) = outcome {
            for row in &mut cells {
                for cell in row {
                    cell.failed = true;
                    cell.fold_accuracies.push(0.0);
                }
            }
            if first_error.is_none() {
                first_error = Some(e);
            }
        }
    }
    Ok(GridRun { cells, cs, gammas, classes, first_error })
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    features: &FeatureMatrix,
    labels: &[ExpressionLabel],
    classes: &[ExpressionLabel],
    train: &[usize],
    test: &[usize],
    cs: &[f64],
    gammas: &[f64],
    settings: &SolverSettings,
    cells: &mut [Vec<CellState>],
) -> Result<()> {
    let train_labels: Vec<ExpressionLabel> = train.iter().map(|&i| labels[i]).collect();
    for &class in classes {
        if !train_labels.contains(&class) {
            return Err(Error::InvalidParameter {
                what: "a class is absent from a training fold",
            });
        }
    }
    if test.is_empty() {
        return Err(Error::InvalidParameter { what: "empty test fold" });
    }
    let standardizer = Standardizer::fit_rows(features, train)?;
    let train_m = standardizer.apply(&features.select_rows(train))?;
    let test_m = standardizer.apply(&features.select_rows(test))?;
    let n_tr = train_m.rows();
    let n_te = test_m.rows();

    // gamma-independent squared distances
    let mut dist_train = vec![0.0; n_tr * n_tr];
    for i in 0..n_tr {
        for j in (i + 1)..n_tr {
            let mut s = 0.0;
            for (a, b) in train_m.row(i).iter().zip(train_m.row(j)) {
                let d = a - b;
                s += d * d;
            }
            dist_train[i * n_tr + j] = s;
            dist_train[j * n_tr + i] = s;
        }
    }
    let mut dist_cross = vec![0.0; n_te * n_tr];
    for u in 0..n_te {
        for t in 0..n_tr {
            let mut s = 0.0;
            for (a, b) in test_m.row(u).iter().zip(train_m.row(t)) {
                let d = a - b;
                s += d * d;
            }
            dist_cross[u * n_tr + t] = s;
        }
    }

    // per-class sign vectors are also gamma- and C-independent
    let signs: Vec<Vec<f64>> = classes
        .iter()
        .map(|&class| {
            train_labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect()
        })
        .collect();

    for (gi, &gamma) in gammas.iter().enumerate() {
        let mut gram = PrecomputedKernel::from_squared_distances(n_tr, &dist_train, gamma)?;
        let cross: Vec<f64> = dist_cross.iter().map(|&d| libm::exp(-gamma * d)).collect();
        for (ci, &c) in cs.iter().enumerate() {
            let mut converged = true;
            let mut decisions = vec![0.0; n_te * classes.len()];
            for (ki, y) in signs.iter().enumerate() {
                let raw = svm::solve(&mut gram, y, c, settings.tol, settings.max_passes, false);
                converged &= raw.converged;
                for u in 0..n_te {
                    let mut f = raw.bias;
                    let row = &cross[u * n_tr..(u + 1) * n_tr];
                    for t in 0..n_tr {
                        if raw.alpha[t] > 0.0 {
                            f += raw.alpha[t] * y[t] * row[t];
                        }
                    }
                    decisions[u * classes.len() + ki] = f;
                }
            }
            let cell = &mut cells[ci][gi];
            let mut correct = 0usize;
            for (u, &sample_idx) in test.iter().enumerate() {
                let dec = &decisions[u * classes.len()..(u + 1) * classes.len()];
                let winner = svm::argmax_decision(dec).unwrap();
                let pred = classes[winner];
                cell.predictions[sample_idx] = Some(pred);
                if pred == labels[sample_idx] {
                    correct += 1;
                }
            }
            cell.fold_accuracies.push(correct as f64 / n_te as f64);
            cell.converged &= converged;
        }
    }
    Ok(())
}

fn assemble_cells(run: &GridRun) -> Vec<GridCell> {
    let k = run.cells[0][0].fold_accuracies.len().max(1);
    let mut out = Vec::with_capacity(run.cs.len() * run.gammas.len());
    for (ci, &c) in run.cs.iter().enumerate() {
        for (gi, &gamma) in run.gammas.iter().enumerate() {
            let state = &run.cells[ci][gi];
            let accuracy = if state.failed {
                0.0
            } else {
                state.fold_accuracies.iter().sum::<f64>() / k as f64
            };
            out.push(GridCell {
                c,
                gamma,
                accuracy,
                fold_accuracies: state.fold_accuracies.clone(),
                failed: state.failed,
                converged: state.converged,
            });
        }
    }
    out
}

fn pick_best(cells: &[GridCell]) -> &GridCell {
    // cells are ordered C ascending then gamma ascending; strict > keeps
    // the earliest maximum, which is the smaller-C-then-smaller-gamma rule
    let mut best = &cells[0];
    for cell in cells {
        if cell.accuracy > best.accuracy {
            best = cell;
        }
    }
    best
}

/// Cross-validates every (C, gamma) cell on one fold plan and returns the
/// full table plus the winning cell.
pub fn grid_search(
    features: &FeatureMatrix,
    samples: &[SampleMeta],
    plan: &FoldPlan,
    grid: &ParamGrid,
    settings: &SolverSettings,
) -> Result<GridSearchResult> {
    let run = run_grid(features, samples, plan, grid, settings)?;
    let cells = assemble_cells(&run);
    let best = pick_best(&cells);
    Ok(GridSearchResult {
        best_c: best.c,
        best_gamma: best.gamma,
        best_accuracy: best.accuracy,
        cells,
    })
}

/// Trains the multi-class model of one fold at fixed (C, gamma): the rows
/// of every other fold are the training set. Test-fold rows cannot
/// influence the result; the no-leakage test perturbs them and asserts the
/// model is unchanged.
pub fn fold_model(
    features: &FeatureMatrix,
    samples: &[SampleMeta],
    plan: &FoldPlan,
    fold: usize,
    params: &SvmParams,
    layout_fingerprint: u64,
) -> Result<MultiClassSvmModel> {
    if features.rows() != samples.len() {
        return Err(Error::LengthMismatch { left: features.rows(), right: samples.len() });
    }
    if fold >= plan.k() {
        return Err(Error::InvalidParameter { what: "fold index out of range" });
    }
    let train = plan.train_indices(fold);
    let labels: Vec<ExpressionLabel> = train.iter().map(|&i| samples[i].label).collect();
    svm::ova_train(&features.select_rows(&train), &labels, params, layout_fingerprint)
}

/// Row-major class confusion counts; rows are true classes, columns are
/// predictions, both in the order of `classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    classes: Vec<ExpressionLabel>,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> &[ExpressionLabel] {
        &self.classes
    }

    pub fn count(&self, true_class: usize, predicted: usize) -> usize {
        self.counts[true_class * self.classes.len() + predicted]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn row_sum(&self, true_class: usize) -> usize {
        let m = self.classes.len();
        self.counts[true_class * m..(true_class + 1) * m].iter().sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Row-normalized percentage; 0 for an empty row.
    pub fn percentage(&self, true_class: usize, predicted: usize) -> f64 {
        let row = self.row_sum(true_class);
        if row == 0 {
            0.0
        } else {
            100.0 * self.count(true_class, predicted) as f64 / row as f64
        }
    }

    /// Diagonal percentage of one class.
    pub fn tp_rate(&self, class: usize) -> f64 {
        self.percentage(class, class)
    }

    /// Off-diagonal percentage of one class: 100 - TP for non-empty rows.
    pub fn fn_rate(&self, class: usize) -> f64 {
        if self.row_sum(class) == 0 {
            0.0
        } else {
            100.0 - self.tp_rate(class)
        }
    }

    /// Pooled accuracy percentage: 100 * trace / total.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let m = self.classes.len();
        let trace: usize = (0..m).map(|i| self.counts[i * m + i]).sum();
        100.0 * trace as f64 / total as f64
    }
}

/// Counts (true, predicted) pairs into a matrix over `classes`.
pub fn confusion(
    truth: &[ExpressionLabel],
    predicted: &[ExpressionLabel],
    classes: &[ExpressionLabel],
) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: predicted.len() });
    }
    let m = classes.len();
    let index_of = |l: ExpressionLabel| -> Result<usize> {
        classes
            .iter()
            .position(|&c| c == l)
            .ok_or_else(|| Error::UnknownLabel(String::from(l.code())))
    };
    let mut counts = vec![0usize; m * m];
    for (&t, &p) in truth.iter().zip(predicted) {
        counts[index_of(t)? * m + index_of(p)?] += 1;
    }
    Ok(ConfusionMatrix { classes: classes.to_vec(), counts })
}

/// Full evaluation protocol configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub k: usize,
    pub mode: FoldMode,
    pub seed: u64,
    pub grid: ParamGrid,
    pub settings: SolverSettings,
    /// Also evaluate with neutral samples dropped.
    pub six_class: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            k: 5,
            mode: FoldMode::Stratified,
            seed: 42,
            grid: ParamGrid::default(),
            settings: SolverSettings::default(),
            six_class: true,
        }
    }
}

/// One classified protocol run: grid table, winning cell, and the pooled
/// cross-validated confusion matrix at the winning cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSection {
    pub classes: Vec<ExpressionLabel>,
    pub n_samples: usize,
    pub grid: GridSearchResult,
    pub confusion: ConfusionMatrix,
    /// Pooled accuracy percentage over all held-out predictions.
    pub overall_accuracy: f64,
    /// Mean of the winning cell's per-fold accuracy fractions.
    pub mean_fold_accuracy: f64,
}

/// Complete evaluation output. `six_class` is absent when dropping neutral
/// leaves fewer than two classes or too few samples; `warnings` records
/// every degradation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub seed: u64,
    pub k: usize,
    pub mode: FoldMode,
    pub n_samples: usize,
    pub seven_class: CvSection,
    pub six_class: Option<CvSection>,
    pub warnings: Vec<String>,
}

fn run_section(
    features: &FeatureMatrix,
    samples: &[SampleMeta],
    config: &EvaluationConfig,
    warnings: &mut Vec<String>,
) -> Result<CvSection> {
    let plan = make_folds(samples, config.k, config.mode, config.seed)?;
    let run = run_grid(features, samples, &plan, &config.grid, &config.settings)?;
    let cells = assemble_cells(&run);
    let best = pick_best(&cells).clone();
    if best.failed {
        return Err(run.first_error.unwrap_or(Error::InvalidParameter {
            what: "every grid cell failed",
        }));
    }
    if !best.converged {
        warnings.push(String::from("winning grid cell had non-converged binary solvers"));
    }
    let failed = cells.iter().filter(|cell| cell.failed).count();
    if failed > 0 {
        warnings.push(alloc::format!("{failed} grid cells failed and scored 0"));
    }
    // pooled predictions of the winning cell: folds partition the samples,
    // so each one was predicted exactly once
    let ci = run.cs.iter().position(|&c| c == best.c).unwrap();
    let gi = run.gammas.iter().position(|&g| g == best.gamma).unwrap();
    let preds: Vec<ExpressionLabel> = run.cells[ci][gi]
        .predictions
        .iter()
        .map(|p| p.expect("unfailed cell predicts every sample"))
        .collect();
    let truth: Vec<ExpressionLabel> = samples.iter().map(|s| s.label).collect();
    let matrix = confusion(&truth, &preds, &run.classes)?;
    Ok(CvSection {
        classes: run.classes,
        n_samples: samples.len(),
        overall_accuracy: matrix.accuracy(),
        mean_fold_accuracy: best.accuracy,
        confusion: matrix,
        grid: GridSearchResult {
            best_c: best.c,
            best_gamma: best.gamma,
            best_accuracy: best.accuracy,
            cells,
        },
    })
}

/// Runs the full protocol: folds, grid search, pooled confusion at the
/// winning cell, then the same once more without neutral samples.
pub fn evaluate(
    features: &FeatureMatrix,
    samples: &[SampleMeta],
    config: &EvaluationConfig,
) -> Result<EvaluationReport> {
    if features.rows() != samples.len() {
        return Err(Error::LengthMismatch { left: features.rows(), right: samples.len() });
    }
    let mut warnings = Vec::new();
    let seven_class = run_section(features, samples, config, &mut warnings)?;
    let six_class = if config.six_class {
        let keep: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].label != ExpressionLabel::Neutral)
            .collect();
        let sub_samples: Vec<SampleMeta> = keep.iter().map(|&i| samples[i].clone()).collect();
        let sub_features = features.select_rows(&keep);
        let distinct = present_classes(
            &sub_samples.iter().map(|s| s.label).collect::<Vec<_>>(),
        );
        if sub_samples.len() < config.k || distinct.len() < 2 {
            warnings.push(String::from(
                "six-class section skipped: too few samples or classes without neutral",
            ));
            None
        } else {
            Some(run_section(&sub_features, &sub_samples, config, &mut warnings)?)
        }
    } else {
        None
    };
    Ok(EvaluationReport {
        seed: config.seed,
        k: config.k,
        mode: config.mode,
        n_samples: samples.len(),
        seven_class,
        six_class,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::ExpressionLabel as L;
    use alloc::format;
    use alloc::string::ToString;

    fn meta(label: L, subject: usize, idx: usize) -> SampleMeta {
        SampleMeta {
            sample_id: format!("{}_{idx}", label.code()),
            subject_id: format!("s{subject}"),
            label,
        }
    }

    fn uniform_samples(per_class: usize, classes: &[L]) -> Vec<SampleMeta> {
        let mut out = Vec::new();
        for &c in classes {
            for t in 0..per_class {
                out.push(meta(c, t, t));
            }
        }
        out
    }

    fn assert_partition(plan: &FoldPlan, n: usize) {
        assert_eq!(plan.assignments().len(), n);
        assert!(plan.assignments().iter().all(|&f| f < plan.k()));
        let total: usize = plan.fold_sizes().iter().sum();
        assert_eq!(total, n);
    }

    #[test]
    fn stratified_folds_are_balanced() {
        let samples = uniform_samples(230, &L::ALL);
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 7).unwrap();
        assert_partition(&plan, 1610);
        assert!(plan.fold_sizes().iter().all(|&s| s == 322));
        // per-class balance: 230 / 5 = 46 in each fold
        for class in L::ALL {
            for fold in 0..5 {
                let count = samples
                    .iter()
                    .enumerate()
                    .filter(|(i, s)| s.label == class && plan.assignments()[*i] == fold)
                    .count();
                assert_eq!(count, 46);
            }
        }
    }

    #[test]
    fn ten_samples_make_folds_of_two() {
        let samples = uniform_samples(10, &[L::Happy]);
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 0).unwrap();
        assert_partition(&plan, 10);
        assert!(plan.fold_sizes().iter().all(|&s| s == 2));
    }

    #[test]
    fn fold_parameter_validation() {
        let samples = uniform_samples(4, &[L::Happy]);
        assert!(matches!(
            make_folds(&samples, 1, FoldMode::Stratified, 0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            make_folds(&samples, 5, FoldMode::Stratified, 0),
            Err(Error::TooFewSamples { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn subject_mode_keeps_subjects_whole() {
        // 10 subjects, 3 samples each
        let mut samples = Vec::new();
        for subj in 0..10 {
            for (t, &c) in [L::Angry, L::Happy, L::Sad].iter().enumerate() {
                samples.push(meta(c, subj, t));
            }
        }
        let plan = make_folds(&samples, 5, FoldMode::SubjectIndependent, 3).unwrap();
        assert_partition(&plan, 30);
        for subj in 0..10 {
            let folds: Vec<usize> = samples
                .iter()
                .enumerate()
                .filter(|(_, s)| s.subject_id == format!("s{subj}"))
                .map(|(i, _)| plan.assignments()[i])
                .collect();
            assert!(folds.windows(2).all(|w| w[0] == w[1]), "subject s{subj} split");
        }
        assert!(plan.fold_sizes().iter().all(|&s| s == 6));
    }

    #[test]
    fn too_few_subjects_is_rejected() {
        let mut samples = Vec::new();
        for subj in 0..3 {
            for t in 0..4 {
                samples.push(meta(L::Happy, subj, t));
            }
        }
        assert!(matches!(
            make_folds(&samples, 5, FoldMode::SubjectIndependent, 0),
            Err(Error::TooFewSubjects { needed: 5, got: 3 })
        ));
    }

    #[test]
    fn folds_are_seed_deterministic() {
        let samples = uniform_samples(20, &[L::Angry, L::Happy]);
        let a = make_folds(&samples, 5, FoldMode::Stratified, 99).unwrap();
        let b = make_folds(&samples, 5, FoldMode::Stratified, 99).unwrap();
        assert_eq!(a, b);
        let c = make_folds(&samples, 5, FoldMode::Stratified, 100).unwrap();
        assert_ne!(a.assignments(), c.assignments());
    }

    #[test]
    fn confusion_all_correct() {
        let truth = vec![L::Angry, L::Happy, L::Happy, L::Neutral];
        let classes = [L::Angry, L::Neutral, L::Happy];
        let m = confusion(&truth, &truth, &classes).unwrap();
        for i in 0..3 {
            if m.row_sum(i) > 0 {
                assert_eq!(m.tp_rate(i), 100.0);
                assert_eq!(m.fn_rate(i), 0.0);
            }
        }
        assert_eq!(m.accuracy(), 100.0);
    }

    #[test]
    fn confusion_percentages_match_hand_computation() {
        // 33 angry samples: 28 kept, 4 to disgusted, 1 to fearful
        let truth = vec![L::Angry; 33];
        let mut pred = vec![L::Angry; 28];
        pred.extend(vec![L::Disgusted; 4]);
        pred.extend(vec![L::Fearful; 1]);
        let classes = [L::Angry, L::Disgusted, L::Fearful];
        let m = confusion(&truth, &pred, &classes).unwrap();
        let round1 = |v: f64| libm::round(v * 10.0) / 10.0;
        assert_eq!(round1(m.percentage(0, 0)), 84.8);
        assert_eq!(round1(m.percentage(0, 1)), 12.1);
        assert_eq!(round1(m.percentage(0, 2)), 3.0);
        let row_total: f64 = (0..3).map(|p| m.percentage(0, p)).sum();
        assert!((row_total - 100.0).abs() < 0.1);
        assert_eq!(round1(m.fn_rate(0)), round1(100.0 - 84.8));
    }

    #[test]
    fn confusion_input_validation() {
        let classes = [L::Angry, L::Happy];
        assert!(matches!(
            confusion(&[L::Angry], &[], &classes),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion(&[L::Sad], &[L::Sad], &classes),
            Err(Error::UnknownLabel(_))
        ));
    }

    fn clustered(classes: &[L], per: usize, spread: f64) -> (FeatureMatrix, Vec<SampleMeta>) {
        let mut rows = Vec::new();
        let mut samples = Vec::new();
        for (k, &cl) in classes.iter().enumerate() {
            let angle = k as f64 * core::f64::consts::TAU / classes.len() as f64;
            let (cx, cy) = (50.0 * libm::cos(angle), 50.0 * libm::sin(angle));
            for t in 0..per {
                let a = t as f64 * 0.83 + k as f64 * 0.17;
                rows.push(vec![
                    cx + spread * libm::sin(a),
                    cy + spread * libm::cos(a * 1.7),
                ]);
                samples.push(meta(cl, t, t));
            }
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), samples)
    }

    #[test]
    fn single_cell_grid_reports_itself() {
        let (features, samples) = clustered(&[L::Angry, L::Happy], 10, 1.0);
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 1).unwrap();
        let grid = ParamGrid { c_values: vec![4.0], gamma_values: vec![0.25] };
        let res =
            grid_search(&features, &samples, &plan, &grid, &SolverSettings::default()).unwrap();
        assert_eq!(res.cells.len(), 1);
        assert_eq!(res.best_c, 4.0);
        assert_eq!(res.best_gamma, 0.25);
        assert_eq!(res.best_accuracy, res.cells[0].accuracy);
        assert_eq!(res.cells[0].fold_accuracies.len(), 5);
    }

    #[test]
    fn separable_clusters_hit_full_accuracy_and_ties_pick_small_c() {
        let (features, samples) = clustered(&[L::Angry, L::Disgusted, L::Happy], 20, 1.0);
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 2).unwrap();
        let grid = ParamGrid { c_values: vec![1.0, 10.0], gamma_values: vec![0.1, 1.0] };
        let res =
            grid_search(&features, &samples, &plan, &grid, &SolverSettings::default()).unwrap();
        assert_eq!(res.best_accuracy, 1.0);
        // both C values separate this data; the tie must go to C = 1
        assert_eq!(res.best_c, 1.0);
        assert_eq!(res.best_gamma, 0.1);
        assert_eq!(res.cells.len(), 4);
    }

    #[test]
    fn default_grid_shape() {
        let g = ParamGrid::default();
        assert_eq!(g.c_values.len(), 7);
        assert_eq!(g.gamma_values.len(), 7);
        assert_eq!(g.c_values[0], 0.125);
        assert_eq!(g.c_values[6], 512.0);
        assert_eq!(g.gamma_values[0], libm::exp2(-11.0));
        assert_eq!(g.gamma_values[6], 2.0);
    }

    #[test]
    fn evaluate_produces_deterministic_sections() {
        let (features, samples) =
            clustered(&[L::Angry, L::Neutral, L::Happy], 10, 1.0);
        let config = EvaluationConfig {
            grid: ParamGrid { c_values: vec![1.0, 8.0], gamma_values: vec![0.05, 0.5] },
            ..EvaluationConfig::default()
        };
        let report = evaluate(&features, &samples, &config).unwrap();
        assert_eq!(report.n_samples, 30);
        assert_eq!(report.seven_class.classes, vec![L::Angry, L::Neutral, L::Happy]);
        assert_eq!(report.seven_class.confusion.total(), 30);
        let six = report.six_class.as_ref().expect("six-class section");
        assert_eq!(six.classes, vec![L::Angry, L::Happy]);
        assert_eq!(six.n_samples, 20);
        assert_eq!(six.confusion.total(), 20);
        // separable clusters: both sections perfect
        assert_eq!(report.seven_class.overall_accuracy, 100.0);
        assert_eq!(six.overall_accuracy, 100.0);
        let again = evaluate(&features, &samples, &config).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn evaluate_rejects_single_class() {
        let (features, samples) = clustered(&[L::Happy], 10, 1.0);
        let config = EvaluationConfig::default();
        assert!(matches!(
            evaluate(&features, &samples, &config),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn fold_model_ignores_test_rows() {
        let (features, samples) = clustered(&[L::Angry, L::Happy], 10, 1.0);
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 11).unwrap();
        let params = SvmParams::new(4.0, 0.2);
        let base = fold_model(&features, &samples, &plan, 0, &params, 0).unwrap();
        // corrupt every test-fold row, retrain: identical model
        let mut rows: Vec<Vec<f64>> =
            (0..features.rows()).map(|i| features.row(i).to_vec()).collect();
        for &i in &plan.test_indices(0) {
            for v in &mut rows[i] {
                *v = *v * -3.5 + 1000.0;
            }
        }
        let perturbed = FeatureMatrix::from_rows(&rows).unwrap();
        let retrained = fold_model(&perturbed, &samples, &plan, 0, &params, 0).unwrap();
        assert_eq!(base, retrained);
    }

    #[test]
    fn six_class_section_skipped_when_degenerate() {
        // dropping neutral leaves one class: section absent plus warning
        let (features, samples) = clustered(&[L::Neutral, L::Happy], 10, 1.0);
        let config = EvaluationConfig {
            grid: ParamGrid { c_values: vec![1.0], gamma_values: vec![0.1] },
            ..EvaluationConfig::default()
        };
        let report = evaluate(&features, &samples, &config).unwrap();
        assert!(report.six_class.is_none());
        assert!(report.warnings.iter().any(|w| w.contains("six-class")));
    }

    #[test]
    fn failed_cells_score_zero_and_are_flagged() {
        // one angry sample: it sits in one test fold, so that fold's train
        // set misses the class and every cell fails for that fold
        let mut samples = uniform_samples(9, &[L::Happy]);
        samples.push(meta(L::Angry, 9, 0));
        let rows: Vec<Vec<f64>> = (0..10).map(|t| vec![t as f64, 1.0]).collect();
        let features = FeatureMatrix::from_rows(&rows).unwrap();
        let plan = make_folds(&samples, 5, FoldMode::Stratified, 0).unwrap();
        let grid = ParamGrid { c_values: vec![1.0], gamma_values: vec![0.1] };
        let res =
            grid_search(&features, &samples, &plan, &grid, &SolverSettings::default()).unwrap();
        assert!(res.cells[0].failed);
        assert_eq!(res.cells[0].accuracy, 0.0);
        let config = EvaluationConfig { grid, ..EvaluationConfig::default() };
        assert!(evaluate(&features, &samples, &config).is_err());
    }

    #[test]
    fn fold_mode_names_round_trip() {
        for mode in [FoldMode::Stratified, FoldMode::SubjectIndependent] {
            assert_eq!(FoldMode::from_name(mode.name()).unwrap(), mode);
        }
        assert!(FoldMode::from_name("bogus").is_err());
        assert_eq!(FoldMode::Stratified.name().to_string(), "stratified");
    }
}
