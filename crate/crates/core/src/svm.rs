//! One-against-all SVM with an RBF kernel, trained by SMO.
//!
//! The solver is sequential minimal optimization with second-order working
//! set selection on the standard dual: minimize ½αᵀQα − Σα subject to
//! 0 ≤ α ≤ C and yᵀα = 0, where Q_ts = y_t y_s k(x_t, x_s).

use alloc::vec;
use alloc::vec::Vec;

use crate::landmarks::ExpressionLabel;
use crate::pipeline::{FeatureMatrix, Standardizer};
use crate::{Error, Result};

/// Guards division when a kernel submatrix is numerically flat.
const TAU: f64 = 1e-12;

/// Gaussian kernel k(x, x') = exp(-gamma * ||x - x'||^2).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RbfKernel {
    gamma: f64,
}

impl RbfKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter { what: "gamma must be positive and finite" });
        }
        Ok(RbfKernel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        rbf(x, y, self.gamma)
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        s += d * d;
    }
    s
}

/// k(x, y) = exp(-gamma * ||x - y||^2); in (0, 1] and symmetric.
pub fn rbf(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(libm::exp(-gamma * sq_dist(x, y)))
}

/// Row access to a kernel matrix. Rows may be lazily computed; `row` takes
/// `&mut self` so implementations can keep a cache.
pub trait KernelMatrix {
    fn dim(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    /// Row i of the kernel matrix, valid until the next `row` call.
    fn row(&mut self, i: usize) -> &[f64];
}

/// Fully materialized kernel matrix.
pub struct PrecomputedKernel {
    n: usize,
    data: Vec<f64>,
}

impl PrecomputedKernel {
    pub fn compute(matrix: &FeatureMatrix, kernel: RbfKernel) -> Self {
        let n = matrix.rows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = libm::exp(-kernel.gamma() * sq_dist(matrix.row(i), matrix.row(j)));
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        PrecomputedKernel { n, data }
    }

    /// Exponentiates a precomputed squared-distance matrix. Distances do
    /// not depend on gamma, so a grid search computes them once per fold
    /// and reuses them for every gamma.
    pub fn from_squared_distances(n: usize, dist: &[f64], gamma: f64) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: dist.len() });
        }
        Ok(PrecomputedKernel {
            n,
            data: dist.iter().map(|&d| libm::exp(-gamma * d)).collect(),
        })
    }
}

impl KernelMatrix for PrecomputedKernel {
    fn dim(&self) -> usize {
        self.n
    }

    fn diag(&self, i: usize) -> f64 {
        self.data[i * self.n + i]
    }

    fn row(&mut self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

struct CacheSlot {
    row: usize,
    stamp: u64,
    data: Vec<f64>,
}

/// Kernel rows computed on demand and kept in a least-recently-used cache
/// of fixed capacity. Produces bit-identical values to
/// [`PrecomputedKernel`]; only memory use differs.
pub struct CachedKernel<'a> {
    matrix: &'a FeatureMatrix,
    kernel: RbfKernel,
    capacity: usize,
    slots: Vec<CacheSlot>,
    tick: u64,
}

impl<'a> CachedKernel<'a> {
    /// `capacity` counts cached rows; values below 1 are raised to 1.
    pub fn new(matrix: &'a FeatureMatrix, kernel: RbfKernel, capacity: usize) -> Self {
        CachedKernel {
            matrix,
            kernel,
            capacity: capacity.max(1),
            slots: Vec::new(),
            tick: 0,
        }
    }

    fn fill(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        let xi = self.matrix.row(i);
        for j in 0..self.matrix.rows() {
            out.push(libm::exp(-self.kernel.gamma() * sq_dist(xi, self.matrix.row(j))));
        }
    }
}

impl KernelMatrix for CachedKernel<'_> {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn diag(&self, _i: usize) -> f64 {
        // k(x, x) = exp(0) exactly
        1.0
    }

    fn row(&mut self, i: usize) -> &[f64] {
        self.tick += 1;
        let stamp = self.tick;
        if let Some(pos) = self.slots.iter().position(|s| s.row == i) {
            self.slots[pos].stamp = stamp;
            return &self.slots[pos].data;
        }
        let pos = if self.slots.len() < self.capacity {
            self.slots.push(CacheSlot { row: i, stamp, data: Vec::new() });
            self.slots.len() - 1
        } else {
            let pos = self
                .slots
                .iter()
                .enumerate()
                .min_by_key(|(_, s)| s.stamp)
                .map(|(p, _)| p)
                .unwrap();
            self.slots[pos].row = i;
            self.slots[pos].stamp = stamp;
            pos
        };
        let mut data = core::mem::take(&mut self.slots[pos].data);
        self.fill(i, &mut data);
        self.slots[pos].data = data;
        &self.slots[pos].data
    }
}

pub(crate) struct RawSolve {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: Option<Vec<f64>>,
}

/// Core SMO loop. `y` entries must be exactly +1.0 or -1.0 with both signs
/// present; callers validate.
pub(crate) fn solve(
    kernel: &mut dyn KernelMatrix,
    y: &[f64],
    c: f64,
    tol: f64,
    max_passes: usize,
    want_trace: bool,
) -> RawSolve {
    let n = y.len();
    debug_assert_eq!(kernel.dim(), n);
    let diag: Vec<f64> = (0..n).map(|t| kernel.diag(t)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut row_i = vec![0.0; n];
    let mut trace = want_trace.then(|| vec![0.0]);
    #[cfg(debug_assertions)]
    let mut prev_obj = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_passes {
        // working set: i maximizes -y G over I_up
        let mut m_up = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > m_up {
                m_up = v;
                i = t;
            }
            if low && v < m_low {
                m_low = v;
            }
        }
        if i == usize::MAX || m_up - m_low <= tol {
            converged = true;
            break;
        }

        row_i.copy_from_slice(kernel.row(i));
        let kii = diag[i];

        // j minimizes -b^2/a over I_low entries that still violate with i
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if !low {
                continue;
            }
            let b = m_up + y[t] * grad[t];
            if b <= 0.0 {
                continue;
            }
            let mut a = kii + diag[t] - 2.0 * row_i[t];
            if a <= 0.0 {
                a = TAU;
            }
            let score = -(b * b) / a;
            if score < best {
                best = score;
                j = t;
            }
        }
        if j == usize::MAX {
            converged = true;
            break;
        }

        let old_i = alpha[i];
        let old_j = alpha[j];
        let kjj = diag[j];
        let kij = row_i[j];
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[i] * y[t] * row_i[t] * d_i;
        }
        let row_j = kernel.row(j);
        for t in 0..n {
            grad[t] += y[j] * y[t] * row_j[t] * d_j;
        }
        iterations += 1;

        #[cfg(debug_assertions)]
        {
            // min-form objective via the maintained gradient
            let w: f64 =
                0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
            debug_assert!(
                w <= prev_obj + 1e-9 * (1.0 + prev_obj.abs()),
                "dual objective regressed: {prev_obj} -> {w}"
            );
            prev_obj = w;
            if let Some(tr) = trace.as_mut() {
                tr.push(-w);
            }
        }
        #[cfg(not(debug_assertions))]
        if let Some(tr) = trace.as_mut() {
            let w: f64 =
                0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
            tr.push(-w);
        }
    }

    // bias from free support vectors, midpoint of the KKT gap otherwise
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    RawSolve { alpha, bias: -rho, converged, iterations, objective: trace }
}

fn check_binary_inputs(matrix: &FeatureMatrix, labels: &[i8], c: f64) -> Result<()> {
    if labels.len() != matrix.rows() {
        return Err(Error::LengthMismatch { left: matrix.rows(), right: labels.len() });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidC(c));
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::InvalidParameter { what: "binary labels must be +1 or -1" });
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Raw dual solution of one binary problem: all alphas (zeros included),
/// bias, and the max-form dual objective after each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: Vec<f64>,
}

/// Solves the dual without packaging a model; test and diagnostic entry.
pub fn smo_solve(
    matrix: &FeatureMatrix,
    labels: &[i8],
    c: f64,
    kernel: RbfKernel,
    tol: f64,
    max_passes: usize,
) -> Result<SmoSolution> {
    check_binary_inputs(matrix, labels, c)?;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut gram = PrecomputedKernel::compute(matrix, kernel);
    let raw = solve(&mut gram, &y, c, tol, max_passes, true);
    Ok(SmoSolution {
        alpha: raw.alpha,
        bias: raw.bias,
        converged: raw.converged,
        iterations: raw.iterations,
        objective: raw.objective.unwrap_or_default(),
    })
}

/// One two-class maximum-margin classifier.
///
/// Rows with alpha = 0 are dropped; `dual_coefficients[i]` is alpha_i *
/// y_i for the kept rows, so 0 < |coef| <= C.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel {
    support_vectors: FeatureMatrix,
    dual_coefficients: Vec<f64>,
    bias: f64,
    kernel: RbfKernel,
    c: f64,
    converged: bool,
}

impl BinarySvmModel {
    pub fn from_parts(
        support_vectors: FeatureMatrix,
        dual_coefficients: Vec<f64>,
        bias: f64,
        kernel: RbfKernel,
        c: f64,
        converged: bool,
    ) -> Result<Self> {
        if support_vectors.rows() != dual_coefficients.len() {
            return Err(Error::LengthMismatch {
                left: support_vectors.rows(),
                right: dual_coefficients.len(),
            });
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidC(c));
        }
        if !bias.is_finite() {
            return Err(Error::NonFinite { what: "bias" });
        }
        let bound = c * (1.0 + 1e-9);
        for &a in &dual_coefficients {
            if !a.is_finite() || a == 0.0 || a.abs() > bound {
                return Err(Error::InvalidParameter {
                    what: "dual coefficients must be nonzero with |coef| <= C",
                });
            }
        }
        Ok(BinarySvmModel { support_vectors, dual_coefficients, bias, kernel, c, converged })
    }

    pub fn support_vectors(&self) -> &FeatureMatrix {
        &self.support_vectors
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self) -> RbfKernel {
        self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// f(x) = sum_i coef_i k(sv_i, x) + bias.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.support_vectors.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.support_vectors.cols(),
                got: x.len(),
            });
        }
        let mut f = self.bias;
        for (i, &coef) in self.dual_coefficients.iter().enumerate() {
            f += coef * libm::exp(-self.kernel.gamma() * sq_dist(self.support_vectors.row(i), x));
        }
        Ok(f)
    }
}

fn package_model(
    matrix: &FeatureMatrix,
    y: &[f64],
    raw: &RawSolve,
    kernel: RbfKernel,
    c: f64,
) -> BinarySvmModel {
    let kept: Vec<usize> = (0..y.len()).filter(|&t| raw.alpha[t] > 0.0).collect();
    let support_vectors = matrix.select_rows(&kept);
    let dual_coefficients = kept.iter().map(|&t| raw.alpha[t] * y[t]).collect();
    BinarySvmModel {
        support_vectors,
        dual_coefficients,
        bias: raw.bias,
        kernel,
        c,
        converged: raw.converged,
    }
}

/// Trains one binary classifier. Exhausting `max_passes` is not an error;
/// the model comes back flagged `converged() == false`.
pub fn smo_train(
    matrix: &FeatureMatrix,
    labels: &[i8],
    c: f64,
    kernel: RbfKernel,
    tol: f64,
    max_passes: usize,
) -> Result<BinarySvmModel> {
    check_binary_inputs(matrix, labels, c)?;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut gram = PrecomputedKernel::compute(matrix, kernel);
    let raw = solve(&mut gram, &y, c, tol, max_passes, false);
    Ok(package_model(matrix, &y, &raw, kernel, c))
}

/// [`smo_train`] through a row cache holding at most `cache_rows` kernel
/// rows; results are identical, only memory use differs.
pub fn smo_train_cached(
    matrix: &FeatureMatrix,
    labels: &[i8],
    c: f64,
    kernel: RbfKernel,
    tol: f64,
    max_passes: usize,
    cache_rows: usize,
) -> Result<BinarySvmModel> {
    check_binary_inputs(matrix, labels, c)?;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut cached = CachedKernel::new(matrix, kernel, cache_rows);
    let raw = solve(&mut cached, &y, c, tol, max_passes, false);
    Ok(package_model(matrix, &y, &raw, kernel, c))
}

/// Largest KKT violation of a dual solution over its training set.
///
/// alpha = 0 rows must satisfy y f >= 1, free rows y f = 1, alpha = C rows
/// y f <= 1; the return value is the worst slack across all rows.
pub fn max_kkt_violation(
    matrix: &FeatureMatrix,
    labels: &[i8],
    solution: &SmoSolution,
    kernel: RbfKernel,
    c: f64,
) -> Result<f64> {
    check_binary_inputs(matrix, labels, c)?;
    if solution.alpha.len() != labels.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: solution.alpha.len() });
    }
    let mut worst = 0.0f64;
    for t in 0..labels.len() {
        let mut f = solution.bias;
        for (s, &a) in solution.alpha.iter().enumerate() {
            if a > 0.0 {
                f += a * f64::from(labels[s])
                    * libm::exp(-kernel.gamma() * sq_dist(matrix.row(s), matrix.row(t)));
            }
        }
        let margin = f64::from(labels[t]) * f;
        let v = if solution.alpha[t] <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if solution.alpha[t] >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Hyperparameters of one multi-class training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        SvmParams { c, gamma, tol: 1e-3, max_passes: 100_000 }
    }
}

/// One-against-all multi-class model: one binary classifier per class, a
/// shared standardizer, and the fingerprint of the feature layout it was
/// trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiClassSvmModel {
    classes: Vec<ExpressionLabel>,
    binaries: Vec<BinarySvmModel>,
    standardizer: Standardizer,
    layout_fingerprint: u64,
}

impl MultiClassSvmModel {
    pub fn from_parts(
        classes: Vec<ExpressionLabel>,
        binaries: Vec<BinarySvmModel>,
        standardizer: Standardizer,
        layout_fingerprint: u64,
    ) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        if classes.len() != binaries.len() {
            return Err(Error::LengthMismatch { left: classes.len(), right: binaries.len() });
        }
        if classes.windows(2).any(|w| w[0].canonical_index() >= w[1].canonical_index()) {
            return Err(Error::InvalidParameter {
                what: "classes must be unique and in canonical order",
            });
        }
        for b in &binaries {
            if b.support_vectors().cols() != standardizer.dim() {
                return Err(Error::DimensionMismatch {
                    expected: standardizer.dim(),
                    got: b.support_vectors().cols(),
                });
            }
        }
        Ok(MultiClassSvmModel { classes, binaries, standardizer, layout_fingerprint })
    }

    pub fn classes(&self) -> &[ExpressionLabel] {
        &self.classes
    }

    pub fn binaries(&self) -> &[BinarySvmModel] {
        &self.binaries
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn layout_fingerprint(&self) -> u64 {
        self.layout_fingerprint
    }

    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    pub fn converged(&self) -> bool {
        self.binaries.iter().all(|b| b.converged())
    }
}

/// Index of the largest value; exact ties go to the lowest index. Adding
/// one constant to every value cannot change the winner.
pub fn argmax_decision(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Trains one binary model per class present (that class +1, rest -1), all
/// on identically standardized rows and one shared kernel matrix. Classes
/// come out in canonical label order.
pub fn ova_train(
    matrix: &FeatureMatrix,
    labels: &[ExpressionLabel],
    params: &SvmParams,
    layout_fingerprint: u64,
) -> Result<MultiClassSvmModel> {
    if labels.len() != matrix.rows() {
        return Err(Error::LengthMismatch { left: matrix.rows(), right: labels.len() });
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidC(params.c));
    }
    let kernel = RbfKernel::new(params.gamma)?;
    let classes: Vec<ExpressionLabel> = ExpressionLabel::ALL
        .iter()
        .copied()
        .filter(|cl| labels.contains(cl))
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let standardizer = Standardizer::fit(matrix)?;
    let std_matrix = standardizer.apply(matrix)?;
    let mut gram = PrecomputedKernel::compute(&std_matrix, kernel);
    let mut binaries = Vec::with_capacity(classes.len());
    for &class in &classes {
        let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let raw = solve(&mut gram, &y, params.c, params.tol, params.max_passes, false);
        binaries.push(package_model(&std_matrix, &y, &raw, kernel, params.c));
    }
    Ok(MultiClassSvmModel { classes, binaries, standardizer, layout_fingerprint })
}

/// Predicted class plus the per-class decision values, in the model's
/// class order. Prediction is the argmax; ties go to the lower canonical
/// index.
pub fn ova_predict(
    model: &MultiClassSvmModel,
    x: &[f64],
) -> Result<(ExpressionLabel, Vec<f64>)> {
    let xs = model.standardizer.apply_row(x)?;
    let mut decisions = Vec::with_capacity(model.binaries.len());
    for b in &model.binaries {
        decisions.push(b.decision(&xs)?);
    }
    let winner = argmax_decision(&decisions).ok_or(Error::SingleClass)?;
    Ok((model.classes[winner], decisions))
}
