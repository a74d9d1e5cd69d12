//! L2-regularized logistic regression.
//!
//! Minimizes
//!
//! ```text
//! J(w, b) = 1/2 |w|^2 + C * sum_i ln(1 + exp(-y_i (w . x_i + b)))
//! ```
//!
//! (bias unpenalized) with full-batch L-BFGS and an Armijo backtracking line
//! search. Every accepted step strictly lowers J, so the recorded objective
//! trace is non-increasing. There is no randomness anywhere in the solver.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::SparseMatrix;

use super::{check_training_set, LinearKind, LinearModel, ModelError, Result};

const HISTORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub iterations: usize,
    /// Gradient infinity-norm reached `tol`.
    pub converged: bool,
    pub gradient_norm: f64,
    /// Objective at the start point and after every accepted step.
    pub objective_trace: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(-m))` without overflow.
fn log_loss(margin: f64) -> f64 {
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

fn margins(x: &SparseMatrix, y: &[f64], w: &[f64], b: f64) -> Vec<f64> {
    x.rows()
        .iter()
        .zip(y)
        .map(|(row, yi)| yi * (row.dot_dense(w) + b))
        .collect()
}

/// Objective value at `(w, b)`.
pub fn logreg_objective(x: &SparseMatrix, y: &[Label], w: &[f64], b: f64, c: f64) -> f64 {
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    objective_from_margins(w, &margins(x, &signs, w, b), c)
}

fn objective_from_margins(w: &[f64], margins: &[f64], c: f64) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    reg + c * margins.iter().map(|&m| log_loss(m)).sum::<f64>()
}

/// Analytic gradient `(dJ/dw, dJ/db)` at `(w, b)`.
pub fn logreg_gradient(x: &SparseMatrix, y: &[Label], w: &[f64], b: f64, c: f64) -> (Vec<f64>, f64) {
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let m = margins(x, &signs, w, b);
    let g = gradient_from_margins(x, &signs, w, &m, c);
    let gb = g[w.len()];
    (g[..w.len()].to_vec(), gb)
}

/// Gradient stacked as `[dJ/dw..., dJ/db]`.
fn gradient_from_margins(x: &SparseMatrix, y: &[f64], w: &[f64], margins: &[f64], c: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(w.len() + 1);
    g.extend_from_slice(w);
    g.push(0.0);
    let bias_slot = w.len();
    for ((row, &yi), &m) in x.rows().iter().zip(y).zip(margins) {
        // d/dm ln(1 + e^-m) = -sigmoid(-m)
        let coef = -c * yi * sigmoid(-m);
        if coef == 0.0 {
            continue;
        }
        for (j, v) in row.iter() {
            g[j] += coef * v;
        }
        g[bias_slot] += coef;
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fits the model; `max_iter = 0` returns the all-zero start point.
pub fn train_logreg(x: &SparseMatrix, y: &[Label], params: &LogRegParams) -> Result<(LinearModel, OptimizationReport)> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("C = {} must be positive", params.c)));
    }
    if !(params.tol >= 0.0) {
        return Err(ModelError::InvalidParameter("tol must be non-negative".into()));
    }
    check_training_set(x, y)?;

    let dim = x.n_cols();
    let c = params.c;
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    // theta = [w..., b]
    let mut theta = vec![0.0; dim + 1];
    let eval = |theta: &[f64]| -> (f64, Vec<f64>) {
        let (w, b) = theta.split_at(dim);
        let m = margins(x, &signs, w, b[0]);
        (objective_from_margins(w, &m, c), gradient_from_margins(x, &signs, w, &m, c))
    };

    let (mut f, mut g) = eval(&theta);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let mut converged = inf_norm(&g) <= params.tol;

    while !converged && iterations < params.max_iter {
        let mut direction = two_loop(&g, &history);
        let mut slope = dot(&g, &direction);
        if !(slope < 0.0) {
            history.clear();
            direction = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = if history.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let (fc, gc) = eval(&candidate);
            if fc.is_finite() && fc <= f + ARMIJO_C1 * step * slope && fc < f {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            // no decrease representable at this precision
            break;
        };

        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        theta = next;
        f = f_next;
        g = g_next;
        trace.push(f);
        iterations += 1;
        converged = inf_norm(&g) <= params.tol;
    }

    let bias = theta.pop().unwrap();
    let model = LinearModel {
        weights: theta,
        bias,
        c,
        kind: LinearKind::Logistic,
    };
    let report = OptimizationReport {
        iterations,
        converged,
        gradient_norm: inf_norm(&g),
        objective_trace: trace,
    };
    Ok((model, report))
}

/// L-BFGS two-loop recursion: returns `-H g`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - beta) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
