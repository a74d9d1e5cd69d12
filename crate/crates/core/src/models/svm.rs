//! Soft-margin SVM trained in the dual by sequential minimal optimization.
//!
//! The solver works on the minimization form
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a     s.t.  0 <= a_i <= C,  y^T a = 0
//! Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! keeping the gradient `G = Q a - e` up to date. Each step picks the
//! maximal violating pair
//!
//! ```text
//! i = argmax { -y_t G_t : t in I_up },   j = argmin { -y_t G_t : t in I_low }
//! ```
//!
//! and stops once `m(a) - M(a) <= tol`, which bounds every KKT violation of
//! `y_i f(x_i)` by `tol`. Kernel rows are computed on demand and kept in a
//! bounded LRU cache.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::{SparseMatrix, SparseVector};

use super::{check_training_set, LinearKind, LinearModel, ModelError, Result};

pub const DEFAULT_CACHE_MB: usize = 256;
const TAU: f64 = 1e-12;
const PARALLEL_ROW_MIN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// `linear: k(x, z) = x . z`, `rbf: k(x, z) = exp(-gamma |x - z|^2)`.
/// An RBF kernel without an explicit gamma uses [`scale_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub gamma: Option<f64>,
}

impl KernelConfig {
    pub fn linear() -> Self {
        KernelConfig {
            kind: KernelKind::Linear,
            gamma: None,
        }
    }

    pub fn rbf(gamma: Option<f64>) -> Self {
        KernelConfig {
            kind: KernelKind::Rbf,
            gamma,
        }
    }
}

/// `1 / (n_features * Var(X))` over all matrix entries, or 1 when the
/// variance vanishes.
pub fn scale_gamma(x: &SparseMatrix) -> f64 {
    let var = x.entry_variance();
    if var > 0.0 && x.n_cols() > 0 {
        1.0 / (x.n_cols() as f64 * var)
    } else {
        1.0
    }
}

/// A kernel with its gamma fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Kernel {
    kind: KernelKind,
    gamma: f64,
}

impl Kernel {
    fn eval(&self, a: &SparseVector, a_sq: f64, b: &SparseVector, b_sq: f64) -> f64 {
        let d = a.dot(b);
        match self.kind {
            KernelKind::Linear => d,
            KernelKind::Rbf => (-self.gamma * (a_sq + b_sq - 2.0 * d).max(0.0)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelConfig,
    pub tol: f64,
    /// Defaults to `max(10_000_000, 100 n)`.
    pub max_iter: Option<usize>,
    pub cache_mb: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelConfig::rbf(None),
            tol: 1e-3,
            max_iter: None,
            cache_mb: DEFAULT_CACHE_MB,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: KernelKind,
    /// Resolved gamma (ignored by the linear kernel).
    pub gamma: f64,
    /// `alpha_i * y_i` for every support vector.
    pub dual_coef: Vec<f64>,
    pub support_vectors: Vec<SparseVector>,
    pub bias: f64,
    pub c: f64,
    pub n_features: usize,
    sv_norms: Vec<f64>,
}

/// Solver diagnostics; `alpha` covers every training point.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrainReport {
    pub iterations: usize,
    pub alpha: Vec<f64>,
    pub support_indices: Vec<usize>,
    pub max_violation: f64,
    pub duality_gap: f64,
    pub dual_objective: f64,
}

impl SvmModel {
    pub fn new(
        kernel: KernelKind,
        gamma: f64,
        dual_coef: Vec<f64>,
        support_vectors: Vec<SparseVector>,
        bias: f64,
        c: f64,
        n_features: usize,
    ) -> Result<Self> {
        let sv_norms = support_vectors.iter().map(SparseVector::norm_squared).collect();
        let model = SvmModel {
            kernel,
            gamma,
            dual_coef,
            support_vectors,
            bias,
            c,
            n_features,
            sv_norms,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn resolved_kernel(&self) -> Kernel {
        Kernel {
            kind: self.kernel,
            gamma: self.gamma,
        }
    }

    /// `sum_i alpha_i y_i k(sv_i, x) + b`.
    pub fn decision_function(&self, x: &SparseVector) -> Result<f64> {
        x.check_dim(self.n_features)?;
        let kernel = self.resolved_kernel();
        let x_sq = x.norm_squared();
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.sv_norms)
            .zip(&self.dual_coef)
            .map(|((sv, sv_sq), coef)| coef * kernel.eval(sv, *sv_sq, x, x_sq))
            .sum();
        Ok(sum + self.bias)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Label> {
        Ok(Label::from_decision(self.decision_function(x)?))
    }

    /// Collapses a linear-kernel model to `w = sum_i alpha_i y_i x_i`.
    pub fn to_linear(&self) -> Result<LinearModel> {
        if self.kernel != KernelKind::Linear {
            return Err(ModelError::Invalid("only a linear-kernel SVM has a primal weight vector".into()));
        }
        let mut weights = vec![0.0; self.n_features];
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coef) {
            for (j, v) in sv.iter() {
                weights[j] += coef * v;
            }
        }
        Ok(LinearModel {
            weights,
            bias: self.bias,
            c: self.c,
            kind: LinearKind::SvmLinear,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ModelError::Invalid(format!("C = {} must be positive", self.c)));
        }
        if self.kernel == KernelKind::Rbf && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::Invalid(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.dual_coef.len() != self.support_vectors.len() {
            return Err(ModelError::Invalid("coefficient / support vector count mismatch".into()));
        }
        if let Some(coef) = self.dual_coef.iter().find(|c| !(c.abs() > 0.0 && c.abs() <= self.c)) {
            return Err(ModelError::Invalid(format!(
                "dual coefficient {coef} outside (0, C = {}]",
                self.c
            )));
        }
        for sv in &self.support_vectors {
            sv.check_dim(self.n_features)?;
        }
        if !self.bias.is_finite() {
            return Err(ModelError::Invalid("non-finite bias".into()));
        }
        Ok(())
    }
}

struct KernelRows<'a> {
    x: &'a [SparseVector],
    norms: Vec<f64>,
    y: &'a [f64],
    kernel: Kernel,
    rows: Vec<Option<Vec<f64>>>,
    last_used: Vec<u64>,
    clock: u64,
    cached: usize,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [SparseVector], y: &'a [f64], kernel: Kernel, cache_mb: usize) -> Self {
        let n = x.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        let capacity = ((cache_mb << 20) / row_bytes).clamp(2, n.max(2));
        KernelRows {
            x,
            norms: x.iter().map(SparseVector::norm_squared).collect(),
            y,
            kernel,
            rows: vec![None; n],
            last_used: vec![0; n],
            clock: 0,
            cached: 0,
            capacity,
        }
    }

    fn diag(&self, i: usize) -> f64 {
        self.kernel.eval(&self.x[i], self.norms[i], &self.x[i], self.norms[i])
    }

    fn compute(&self, i: usize) -> Vec<f64> {
        let (xi, ni, yi) = (&self.x[i], self.norms[i], self.y[i]);
        let entry = |j: usize| yi * self.y[j] * self.kernel.eval(xi, ni, &self.x[j], self.norms[j]);
        if self.x.len() >= PARALLEL_ROW_MIN {
            (0..self.x.len()).into_par_iter().map(entry).collect()
        } else {
            (0..self.x.len()).map(entry).collect()
        }
    }

    /// Makes row `i` of Q resident, evicting the least recently used row if
    /// needed. `pinned` is never evicted.
    fn load(&mut self, i: usize, pinned: Option<usize>) {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if self.rows[i].is_some() {
            return;
        }
        if self.cached >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&t| self.rows[t].is_some() && Some(t) != pinned)
                .min_by_key(|&t| self.last_used[t]);
            if let Some(v) = victim {
                self.rows[v] = None;
                self.cached -= 1;
            }
        }
        self.rows[i] = Some(self.compute(i));
        self.cached += 1;
    }

    fn row(&self, i: usize) -> &[f64] {
        self.rows[i].as_deref().expect("row loaded")
    }
}

fn in_up(y: f64, alpha: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(y: f64, alpha: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Maximal violating pair `(i, j, m - M)`; `None` when a set is empty.
fn select_pair(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> Option<(usize, usize, f64)> {
    let mut best_up: Option<(usize, f64)> = None;
    let mut best_low: Option<(usize, f64)> = None;
    for t in 0..y.len() {
        let v = -y[t] * grad[t];
        if in_up(y[t], alpha[t], c) && best_up.is_none_or(|(_, m)| v > m) {
            best_up = Some((t, v));
        }
        if in_low(y[t], alpha[t], c) && best_low.is_none_or(|(_, m)| v < m) {
            best_low = Some((t, v));
        }
    }
    let ((i, m), (j, big_m)) = (best_up?, best_low?);
    Some((i, j, m - big_m))
}

/// `b = -rho`, with rho the mean `y_t G_t` over free vectors, else the
/// midpoint of the feasible interval.
fn compute_bias(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..y.len() {
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
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    -rho
}

/// Primal minus dual objective for the current iterate.
fn duality_gap(y: &[f64], alpha: &[f64], grad: &[f64], bias: f64, c: f64) -> (f64, f64) {
    let mut quad = 0.0;
    let mut hinge = 0.0;
    let mut alpha_sum = 0.0;
    for t in 0..y.len() {
        quad += alpha[t] * (grad[t] + 1.0);
        alpha_sum += alpha[t];
        let f = y[t] * (grad[t] + 1.0) + bias;
        hinge += (1.0 - y[t] * f).max(0.0);
    }
    let primal = 0.5 * quad + c * hinge;
    let dual = alpha_sum - 0.5 * quad;
    (primal - dual, dual)
}

pub fn train_svm(x: &SparseMatrix, y: &[Label], params: &SvmParams) -> Result<(SvmModel, SvmTrainReport)> {
    let c = params.c;
    if !(c > 0.0 && c.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("C = {c} must be positive")));
    }
    if !(params.tol > 0.0) {
        return Err(ModelError::InvalidParameter("tol must be positive".into()));
    }
    check_training_set(x, y)?;
    let gamma = match (params.kernel.kind, params.kernel.gamma) {
        (KernelKind::Linear, _) => 0.0,
        (KernelKind::Rbf, Some(g)) if g > 0.0 && g.is_finite() => g,
        (KernelKind::Rbf, Some(g)) => return Err(ModelError::InvalidParameter(format!("gamma = {g} must be positive"))),
        (KernelKind::Rbf, None) => scale_gamma(x),
    };
    let kernel = Kernel {
        kind: params.kernel.kind,
        gamma,
    };

    let n = y.len();
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let mut rows = KernelRows::new(x.rows(), &signs, kernel, params.cache_mb);
    let diag: Vec<f64> = (0..n).map(|i| rows.diag(i)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000));

    let mut iterations = 0;
    let mut violation;
    loop {
        let Some((i, j, gap)) = select_pair(&signs, &alpha, &grad, c) else {
            violation = 0.0;
            break;
        };
        violation = gap;
        if gap <= params.tol {
            break;
        }
        if iterations >= max_iter {
            let bias = compute_bias(&signs, &alpha, &grad, c);
            let (duality_gap, _) = duality_gap(&signs, &alpha, &grad, bias, c);
            return Err(ModelError::NonConvergence {
                iterations,
                max_violation: violation,
                duality_gap,
            });
        }
        iterations += 1;

        rows.load(i, None);
        rows.load(j, Some(i));
        let q_ij = rows.row(i)[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if signs[i] != signs[j] {
            let quad = (diag[i] + diag[j] + 2.0 * q_ij).max(TAU);
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
            let quad = (diag[i] + diag[j] - 2.0 * q_ij).max(TAU);
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

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (row_i, row_j) = (rows.row(i), rows.row(j));
        for t in 0..n {
            grad[t] += row_i[t] * di + row_j[t] * dj;
        }
    }

    let bias = compute_bias(&signs, &alpha, &grad, c);
    let (gap, dual_objective) = duality_gap(&signs, &alpha, &grad, bias, c);
    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let model = SvmModel::new(
        kernel.kind,
        gamma,
        support_indices.iter().map(|&t| alpha[t] * signs[t]).collect(),
        support_indices.iter().map(|&t| x.row(t).clone()).collect(),
        bias,
        c,
        x.n_cols(),
    )?;
    let report = SvmTrainReport {
        iterations,
        alpha,
        support_indices,
        max_violation: violation,
        duality_gap: gap,
        dual_objective,
    };
    Ok((model, report))
}
