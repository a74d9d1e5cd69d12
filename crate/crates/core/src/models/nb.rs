//! Multinomial naive Bayes with additive smoothing.

use crate::corpus::Label;
use crate::features::{SparseMatrix, SparseVector};

use super::{check_training_set, ModelError, Result};

/// Class log-priors and per-class feature log-likelihoods, indexed by
/// [`Label::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct NBModel {
    pub class_log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
    pub alpha: f64,
}

/// `log P(c) = ln(N_c / N)` and
/// `log P(t | c) = ln((count(c, t) + alpha) / (total(c) + alpha * V))`.
///
/// Feature values may be fractional (TF-IDF weights are accepted as counts)
/// but not negative.
pub fn train_nb(x: &SparseMatrix, y: &[Label], alpha: f64) -> Result<NBModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    check_training_set(x, y)?;
    let v = x.n_cols();
    if v == 0 {
        return Err(ModelError::InvalidParameter("no features".into()));
    }

    let mut doc_counts = [0usize; 2];
    let mut feature_counts = [vec![0.0; v], vec![0.0; v]];
    for (row, &label) in x.rows().iter().zip(y) {
        let c = label.index();
        doc_counts[c] += 1;
        for (i, value) in row.iter() {
            if value < 0.0 {
                return Err(ModelError::NegativeFeature(value));
            }
            feature_counts[c][i] += value;
        }
    }

    let n = y.len() as f64;
    let class_log_prior = [
        (doc_counts[0] as f64 / n).ln(),
        (doc_counts[1] as f64 / n).ln(),
    ];
    let feature_log_prob = feature_counts.map(|counts| {
        let total: f64 = counts.iter().sum();
        let denom = (total + alpha * v as f64).ln();
        counts.iter().map(|c| (c + alpha).ln() - denom).collect()
    });
    Ok(NBModel {
        class_log_prior,
        feature_log_prob,
        alpha,
    })
}

impl NBModel {
    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// `log P(c) + sum_t x_t log P(t | c)` for both classes.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> Result<[f64; 2]> {
        x.check_dim(self.n_features())?;
        Ok([0, 1].map(|c| self.class_log_prior[c] + x.dot_dense(&self.feature_log_prob[c])))
    }

    /// Most probable label (ties go to Hope) and the normalized posteriors.
    pub fn predict(&self, x: &SparseVector) -> Result<(Label, [f64; 2])> {
        let jll = self.joint_log_likelihood(x)?;
        let max = jll[0].max(jll[1]);
        let log_norm = max + ((jll[0] - max).exp() + (jll[1] - max).exp()).ln();
        let posterior = jll.map(|l| (l - log_norm).exp());
        let label = if jll[0] >= jll[1] { Label::Hope } else { Label::NotHope };
        Ok((label, posterior))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(ModelError::Invalid("alpha must be positive".into()));
        }
        if self.feature_log_prob[0].len() != self.feature_log_prob[1].len() {
            return Err(ModelError::Invalid("class likelihood vectors differ in length".into()));
        }
        let prior_mass: f64 = self.class_log_prior.iter().map(|l| l.exp()).sum();
        if (prior_mass - 1.0).abs() > 1e-9 {
            return Err(ModelError::Invalid(format!("priors sum to {prior_mass}")));
        }
        for (c, probs) in self.feature_log_prob.iter().enumerate() {
            let mass: f64 = probs.iter().map(|l| l.exp()).sum();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(ModelError::Invalid(format!("class {c} likelihoods sum to {mass}")));
            }
        }
        Ok(())
    }
}
