//! Soft-margin kernel SVM trained by sequential minimal optimization, with
//! min-max feature scaling.
//!
//! The solver minimizes `½ αᵀQα − Σα` subject to `0 ≤ α ≤ C` and `yᵀα = 0`,
//! with `Q_ij = y_i y_j K(x_i, x_j)`. Each iteration picks the maximal
//! violating pair (first index wins ties) and solves the two-variable
//! subproblem analytically; it stops once the violation drops below `tol`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Iteration cap used when none is configured.
pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000_000;
/// Kernel-evaluation cap used when none is configured.
pub const DEFAULT_MAX_KERNEL_EVALUATIONS: u64 = 10_000_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

const TAU: f64 = 1e-12;
const MODEL_HEADER: &str = "argfeat-svm 1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvmError {
    #[error("training data is empty")]
    EmptyTraining,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("regularization constant must be positive, got {0}")]
    InvalidC(f64),
    #[error("rbf gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("SMO did not converge within {iterations} iterations / {kernel_evaluations} kernel evaluations")]
    NotConverged { iterations: u64, kernel_evaluations: u64 },
    #[error("model line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(self) -> Result<Self, SvmError> {
        match self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(SvmError::InvalidGamma(gamma)),
            k => Ok(k),
        }
    }

    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    /// Kernel value from a dot product and the two squared norms.
    pub fn from_gram(self, dot: f64, norm_a: f64, norm_b: f64) -> f64 {
        match self {
            KernelSpec::Linear => dot,
            KernelSpec::Rbf { gamma } => (-gamma * (norm_a + norm_b - 2.0 * dot).max(0.0)).exp(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-dimension min-max scaling to [0, 1] fit on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, SvmError> {
        let first = rows.first().ok_or(SvmError::EmptyTraining)?;
        let d = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for row in rows {
            if row.len() != d {
                return Err(SvmError::DimensionMismatch { expected: d, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    /// Identity scaling for data already in [0, 1].
    pub fn identity(dimension: usize) -> Self {
        MinMaxScaler { min: vec![0.0; dimension], max: vec![1.0; dimension] }
    }

    pub fn dimension(&self) -> usize {
        self.min.len()
    }

    /// Scales one value of dimension `j`; constant dimensions map to 0 and
    /// out-of-range values are clamped.
    pub fn scale(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range <= 0.0 {
            0.0
        } else {
            ((v - self.min[j]) / range).clamp(0.0, 1.0)
        }
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>, SvmError> {
        if row.len() != self.dimension() {
            return Err(SvmError::DimensionMismatch { expected: self.dimension(), found: row.len() });
        }
        Ok(row.iter().enumerate().map(|(j, &v)| self.scale(j, v)).collect())
    }
}

/// Fits a scaler on the training rows and returns it with the scaled rows.
pub fn scale_fit_transform(train: &[Vec<f64>]) -> Result<(MinMaxScaler, Vec<Vec<f64>>), SvmError> {
    let scaler = MinMaxScaler::fit(train)?;
    let scaled = train.iter().map(|r| scaler.transform(r)).collect::<Result<_, _>>()?;
    Ok((scaler, scaled))
}

/// Source of kernel rows for the solver.
pub trait KernelRows {
    fn len(&self) -> usize;
    fn diagonal(&self, i: usize) -> f64;
    /// Row `i` of the kernel matrix.
    fn row(&mut self, i: usize) -> &[f64];
    /// Kernel evaluations performed so far.
    fn evaluations(&self) -> u64 {
        0
    }
}

/// Kernel over data rows; rows are computed on first use and cached.
pub struct KernelCache<'a> {
    data: &'a [Vec<f64>],
    kernel: KernelSpec,
    diag: Vec<f64>,
    rows: Vec<Option<Vec<f64>>>,
    evaluations: u64,
}

impl<'a> KernelCache<'a> {
    pub fn new(data: &'a [Vec<f64>], kernel: KernelSpec) -> Self {
        let diag: Vec<f64> = data.iter().map(|x| kernel.eval(x, x)).collect();
        KernelCache {
            evaluations: data.len() as u64,
            data,
            kernel,
            diag,
            rows: vec![None; data.len()],
        }
    }
}

impl KernelRows for KernelCache<'_> {
    fn len(&self) -> usize {
        self.data.len()
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let xi = &self.data[i];
            let row = self.data.iter().map(|xj| self.kernel.eval(xi, xj)).collect();
            self.evaluations += self.data.len() as u64;
            self.rows[i] = Some(row);
        }
        self.rows[i].as_deref().expect("row cached above")
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// A fully precomputed symmetric kernel matrix.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    /// # Panics
    /// If `values.len() != n * n`.
    pub fn new(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n, "kernel matrix must be n × n");
        KernelMatrix { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

impl KernelRows for KernelMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    fn row(&mut self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: u64,
    pub max_kernel_evaluations: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_kernel_evaluations: DEFAULT_MAX_KERNEL_EVALUATIONS,
        }
    }
}

/// Optimal dual variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function offset: `f(x) = Σ α_i y_i K(x_i, x) − rho`.
    pub rho: f64,
    /// Value of `Σα − ½ αᵀQα` at the solution.
    pub objective: f64,
    pub iterations: u64,
}

/// Solves the soft-margin dual. `y` holds ±1 labels.
pub fn solve_dual(
    kernel: &mut dyn KernelRows,
    y: &[f64],
    c: f64,
    options: SolverOptions,
) -> Result<DualSolution, SvmError> {
    let n = kernel.len();
    if y.len() != n {
        return Err(SvmError::LengthMismatch { rows: n, labels: y.len() });
    }
    if n == 0 {
        return Err(SvmError::EmptyTraining);
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SvmError::InvalidC(c));
    }
    if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
        return Err(SvmError::SingleClass);
    }
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0u64;
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    loop {
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < options.tol {
            break;
        }
        iterations += 1;
        if iterations > options.max_iterations || kernel.evaluations() > options.max_kernel_evaluations {
            return Err(SvmError::NotConverged { iterations, kernel_evaluations: kernel.evaluations() });
        }
        let (kii, kjj) = (kernel.diagonal(i), kernel.diagonal(j));
        let kij = kernel.row(i)[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (kii + kjj + 2.0 * kij).max(TAU);
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
            let quad = (kii + kjj - 2.0 * kij).max(TAU);
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
        let d_i = (alpha[i] - old_i) * y[i];
        let d_j = (alpha[j] - old_j) * y[j];
        let row_i = kernel.row(i).to_vec();
        let row_j = kernel.row(j);
        for t in 0..n {
            grad[t] += y[t] * (row_i[t] * d_i + row_j[t] * d_j);
        }
    }
    let rho = compute_rho(&alpha, &grad, y, c);
    let objective = alpha.iter().zip(&grad).map(|(a, g)| -0.5 * a * (g - 1.0)).sum();
    Ok(DualSolution { alpha, rho, objective, iterations })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
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
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Hyperparameters for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// `None` selects an RBF kernel with gamma = 1 / dimensions.
    pub kernel: Option<KernelSpec>,
    pub c: f64,
    pub solver: SolverOptions,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { kernel: None, c: 1.0, solver: SolverOptions::default() }
    }
}

impl SvmParams {
    /// The concrete kernel for data with `dimension` features.
    pub fn resolve_kernel(&self, dimension: usize) -> Result<KernelSpec, SvmError> {
        self.kernel
            .unwrap_or(KernelSpec::Rbf { gamma: 1.0 / dimension.max(1) as f64 })
            .validate()
    }
}

/// A trained binary SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` per support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub scaling: MinMaxScaler,
}

fn signs(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect()
}

/// Trains on already scaled rows (`true` is the positive class). The
/// model's scaling is the identity.
pub fn train(x: &[Vec<f64>], y: &[bool], kernel: KernelSpec, c: f64, tol: f64) -> Result<SvmModel, SvmError> {
    let options = SolverOptions { tol, ..SolverOptions::default() };
    train_with(x, y, kernel, c, options)
}

pub fn train_with(
    x: &[Vec<f64>],
    y: &[bool],
    kernel: KernelSpec,
    c: f64,
    options: SolverOptions,
) -> Result<SvmModel, SvmError> {
    let kernel = kernel.validate()?;
    if x.len() != y.len() {
        return Err(SvmError::LengthMismatch { rows: x.len(), labels: y.len() });
    }
    let d = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(SvmError::DimensionMismatch { expected: d, found: bad.len() });
    }
    let ys = signs(y);
    let mut cache = KernelCache::new(x, kernel);
    let solution = solve_dual(&mut cache, &ys, c, options)?;
    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for (t, &a) in solution.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(x[t].clone());
            dual_coefficients.push(a * ys[t]);
        }
    }
    Ok(SvmModel {
        kernel,
        c,
        support_vectors,
        dual_coefficients,
        bias: -solution.rho,
        scaling: MinMaxScaler::identity(d),
    })
}

/// Scales raw training rows, then trains. The fitted scaling is stored in
/// the model and applied by [`SvmModel::decision_value_raw`].
pub fn fit(x_raw: &[Vec<f64>], y: &[bool], params: &SvmParams) -> Result<SvmModel, SvmError> {
    let (scaler, scaled) = scale_fit_transform(x_raw)?;
    let kernel = params.resolve_kernel(scaler.dimension())?;
    let mut model = train_with(&scaled, y, kernel, params.c, params.solver)?;
    model.scaling = scaler;
    Ok(model)
}

impl SvmModel {
    pub fn dimension(&self) -> usize {
        self.scaling.dimension()
    }

    /// `Σ (α_i y_i) K(sv_i, x) + bias` for an already scaled `x`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dimension() {
            return Err(SvmError::DimensionMismatch { expected: self.dimension(), found: x.len() });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Scales `x` with the model's training statistics, then evaluates.
    pub fn decision_value_raw(&self, x: &[f64]) -> Result<f64, SvmError> {
        self.decision_value(&self.scaling.transform(x)?)
    }

    /// `true` (helpful) when the decision value is ≥ 0.
    pub fn predict(&self, x: &[f64]) -> Result<bool, SvmError> {
        Ok(label_of(self.decision_value(x)?))
    }

    /// Explicit weight vector of a linear model.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != KernelSpec::Linear {
            return None;
        }
        let mut w = vec![0.0; self.dimension()];
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefficients) {
            for (wj, xj) in w.iter_mut().zip(sv) {
                *wj += coef * xj;
            }
        }
        Some(w)
    }

    /// Versioned text form; floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_HEADER}\n");
        match self.kernel {
            KernelSpec::Linear => out.push_str("kernel linear\n"),
            KernelSpec::Rbf { gamma } => writeln!(out, "kernel rbf {gamma}").unwrap(),
        }
        writeln!(out, "c {}", self.c).unwrap();
        writeln!(out, "bias {}", self.bias).unwrap();
        writeln!(out, "dimension {}", self.dimension()).unwrap();
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        writeln!(out, "scale_min {}", join(&self.scaling.min)).unwrap();
        writeln!(out, "scale_max {}", join(&self.scaling.max)).unwrap();
        writeln!(out, "support_vectors {}", self.support_vectors.len()).unwrap();
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefficients) {
            out.push_str(&coef.to_string());
            for (j, v) in sv.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                write!(out, " {j}:{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SvmError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |key: &str| -> Result<(usize, String), SvmError> {
            let (ln, line) = lines.next().ok_or(SvmError::Format { line: 0, message: format!("missing `{key}`") })?;
            let rest = if key.is_empty() {
                line
            } else {
                line.strip_prefix(key)
                    .map(str::trim)
                    .ok_or_else(|| SvmError::Format { line: ln, message: format!("expected `{key}`") })?
            };
            Ok((ln, rest.to_string()))
        };
        let bad = |line: usize, message: &str| SvmError::Format { line, message: message.to_string() };
        let num = |line: usize, s: &str| s.parse::<f64>().map_err(|_| bad(line, &format!("bad number `{s}`")));
        let (ln, header) = next("")?;
        if header != MODEL_HEADER {
            return Err(bad(ln, "unsupported model header"));
        }
        let (ln, kernel) = next("kernel")?;
        let kernel = match kernel.split_whitespace().collect::<Vec<_>>()[..] {
            ["linear"] => KernelSpec::Linear,
            ["rbf", g] => KernelSpec::Rbf { gamma: num(ln, g)? },
            _ => return Err(bad(ln, "unknown kernel")),
        };
        let (ln, c) = next("c")?;
        let c = num(ln, &c)?;
        let (ln, bias) = next("bias")?;
        let bias = num(ln, &bias)?;
        let (ln, dim) = next("dimension")?;
        let dimension: usize = dim.parse().map_err(|_| bad(ln, "bad dimension"))?;
        let mut vector = |key: &str| -> Result<Vec<f64>, SvmError> {
            let (ln, rest) = next(key)?;
            let v = rest.split_whitespace().map(|s| num(ln, s)).collect::<Result<Vec<_>, _>>()?;
            if v.len() != dimension {
                return Err(bad(ln, "scaling length does not match dimension"));
            }
            Ok(v)
        };
        let scaling = MinMaxScaler { min: vector("scale_min")?, max: vector("scale_max")? };
        let (ln, count) = next("support_vectors")?;
        let count: usize = count.parse().map_err(|_| bad(ln, "bad support vector count"))?;
        let mut support_vectors = Vec::with_capacity(count);
        let mut dual_coefficients = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = next("")?;
            let mut parts = line.split_whitespace();
            let coef = num(ln, parts.next().ok_or_else(|| bad(ln, "empty support vector line"))?)?;
            let mut sv = vec![0.0; dimension];
            for pair in parts {
                let (j, v) = pair.split_once(':').ok_or_else(|| bad(ln, "expected `index:value`"))?;
                let j: usize = j.parse().map_err(|_| bad(ln, "bad index"))?;
                if j >= dimension {
                    return Err(bad(ln, "index outside dimension"));
                }
                sv[j] = num(ln, v)?;
            }
            support_vectors.push(sv);
            dual_coefficients.push(coef);
        }
        Ok(SvmModel { kernel: kernel.validate()?, c, support_vectors, dual_coefficients, bias, scaling })
    }
}

/// Sign rule: exactly 0 counts as positive (helpful).
pub fn label_of(decision_value: f64) -> bool {
    decision_value >= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn scaling() {
        let (scaler, scaled) = scale_fit_transform(&[vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]]).unwrap();
        assert_eq!(scaled.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!(scaled.iter().all(|r| r[1] == 0.0));
        assert_eq!(scaler.transform(&[8.0, 5.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(scaler.transform(&[-1.0, 9.0]).unwrap(), vec![0.0, 0.0]);
        assert!(scale_fit_transform(&[]).is_err());
        assert!(matches!(scaler.transform(&[1.0]), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn separable_pair() {
        let x = vec![vec![0.0], vec![1.0]];
        let model = train(&x, &[false, true], KernelSpec::Linear, 1.0, 1e-3).unwrap();
        assert!(!model.predict(&[0.0]).unwrap());
        assert!(model.predict(&[1.0]).unwrap());
        assert!(model.decision_value(&[0.5]).unwrap().abs() < 1e-3);
        assert!(matches!(model.decision_value(&[0.5, 1.0]), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let x = pts(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]);
        let y = [false, false, true, true];
        let model = train(&x, &y, KernelSpec::Linear, 1.0, 1e-3).unwrap();
        let correct = x.iter().zip(&y).filter(|(p, &l)| model.predict(p).unwrap() == l).count();
        assert!(correct <= 3);
        let rbf = train(&x, &y, KernelSpec::Rbf { gamma: 2.0 }, 10.0, 1e-3).unwrap();
        assert!(x.iter().zip(&y).all(|(p, &l)| rbf.predict(p).unwrap() == l));
    }

    #[test]
    fn input_errors() {
        let x = vec![vec![0.0], vec![1.0]];
        assert_eq!(train(&x, &[true, true], KernelSpec::Linear, 1.0, 1e-3), Err(SvmError::SingleClass));
        assert_eq!(train(&x, &[true, false], KernelSpec::Linear, 0.0, 1e-3), Err(SvmError::InvalidC(0.0)));
        assert!(matches!(
            train(&x, &[true, false], KernelSpec::Rbf { gamma: -1.0 }, 1.0, 1e-3),
            Err(SvmError::InvalidGamma(_))
        ));
        let tight = SolverOptions { tol: 1e-9, max_iterations: 1, max_kernel_evaluations: u64::MAX };
        let x = pts(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0], [0.5, 0.4]]);
        let y = [false, false, true, true, false];
        assert!(matches!(
            train_with(&x, &y, KernelSpec::Rbf { gamma: 1.0 }, 1.0, tight),
            Err(SvmError::NotConverged { .. })
        ));
    }

    #[test]
    fn free_support_vectors_sit_on_margin() {
        let x = pts(&[[0.0, 0.1], [0.2, 0.3], [0.1, 0.9], [0.8, 0.7], [0.9, 0.2], [0.7, 1.0]]);
        let y = [false, false, false, true, true, true];
        let model = train(&x, &y, KernelSpec::Linear, 10.0, 1e-6).unwrap();
        for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coefficients) {
            if coef.abs() < model.c - 1e-9 {
                assert!((model.decision_value(sv).unwrap().abs() - 1.0).abs() < 1e-4);
            }
        }
        let sum: f64 = model.dual_coefficients.iter().sum();
        assert!(sum.abs() < 1e-6);
        let w = model.linear_weights().unwrap();
        for p in &x {
            let explicit = dot(&w, p) + model.bias;
            assert!((explicit - model.decision_value(p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn rbf_lone_positive() {
        // f(sv+) = a·1 − a·exp(−γ·d²) + b with d² = 2 in scaled space.
        let model = SvmModel {
            kernel: KernelSpec::Rbf { gamma: 1.0 },
            c: 1.0,
            support_vectors: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            dual_coefficients: vec![0.8, -0.8],
            bias: 0.0,
            scaling: MinMaxScaler { min: vec![0.0; 2], max: vec![5.0; 2] },
        };
        let v = model.decision_value(&[0.0, 0.0]).unwrap();
        assert!((v - 0.8 * (1.0 - (-2f64).exp())).abs() < 1e-12);
        assert!(model.predict(&[0.0, 0.0]).unwrap());
        assert!(model.decision_value_raw(&[5.0, 5.0]).unwrap() < 0.0);
    }

    #[test]
    fn prediction_sign_rule() {
        assert!(label_of(0.7));
        assert!(!label_of(-0.7));
        assert!(label_of(0.0));
    }

    #[test]
    fn model_text_round_trip() {
        let x = vec![vec![0.0, 3.0], vec![1.0, 2.0], vec![2.0, 0.5], vec![3.0, 0.1]];
        let y = [false, false, true, true];
        let model = fit(&x, &y, &SvmParams::default()).unwrap();
        let reloaded = SvmModel::parse(&model.to_text()).unwrap();
        assert_eq!(reloaded, model);
        for p in &x {
            assert_eq!(
                model.decision_value_raw(p).unwrap().to_bits(),
                reloaded.decision_value_raw(p).unwrap().to_bits()
            );
        }
        assert!(SvmModel::parse("argfeat-svm 2\n").is_err());
    }
}
