//! The four classical classifiers and their shared prediction contract.
//!
//! Labels map to margins as Hope = +1, NotHope = -1. A decision value of
//! exactly zero predicts Hope.

mod logreg;
mod nb;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::features::{FeatureError, SparseMatrix, SparseVector};

pub use logreg::{logreg_gradient, logreg_objective, train_logreg, LogRegParams, OptimizationReport};
pub use nb::{train_nb, NBModel};
pub use svm::{
    scale_gamma, train_svm, KernelConfig, KernelKind, SvmParams, SvmModel, SvmTrainReport, DEFAULT_CACHE_MB,
};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("class {0} has no training documents")]
    MissingClass(Label),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("naive Bayes needs non-negative features, found {0}")]
    NegativeFeature(f64),
    #[error("SMO did not converge after {iterations} iterations (max KKT violation {max_violation:.3e}, duality gap {duality_gap:.3e})")]
    NonConvergence {
        iterations: usize,
        max_violation: f64,
        duality_gap: f64,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check_training_set(x: &SparseMatrix, y: &[Label]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(ModelError::LengthMismatch {
            features: x.n_rows(),
            labels: y.len(),
        });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    for label in Label::ALL {
        if !y.contains(&label) {
            return Err(ModelError::MissingClass(label));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearKind {
    Logistic,
    SvmLinear,
}

impl LinearKind {
    pub fn name(self) -> &'static str {
        match self {
            LinearKind::Logistic => "logistic",
            LinearKind::SvmLinear => "svm-linear",
        }
    }
}

/// `w . x + b` classifier from logistic regression or a collapsed linear SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub kind: LinearKind,
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_function(&self, x: &SparseVector) -> Result<f64> {
        x.check_dim(self.weights.len())?;
        Ok(x.dot_dense(&self.weights) + self.bias)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Label> {
        Ok(Label::from_decision(self.decision_function(x)?))
    }

    /// Logistic probability of Hope, `1 / (1 + exp(-(w . x + b)))`.
    pub fn probability(&self, x: &SparseVector) -> Result<f64> {
        let z = self.decision_function(x)?;
        Ok(logreg::sigmoid(z))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ModelError::Invalid(format!("C = {} must be positive", self.c)));
        }
        if self.weights.iter().chain(std::iter::once(&self.bias)).any(|w| !w.is_finite()) {
            return Err(ModelError::Invalid("non-finite weight".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Nb,
    Logreg,
    SvmLinear,
    SvmRbf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Nb, ModelKind::Logreg, ModelKind::SvmLinear, ModelKind::SvmRbf];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Logreg => "logreg",
            ModelKind::SvmLinear => "svm-linear",
            ModelKind::SvmRbf => "svm-rbf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model {s:?} (expected nb, logreg, svm-linear or svm-rbf)"))
    }
}

/// Hyperparameters for every model kind. Defaults: NB alpha 1, logistic
/// regression C 1 (tol 1e-6, 1000 iterations), SVM C 1 (tol 1e-3) with
/// the "scale" RBF gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub nb_alpha: f64,
    pub logreg: LogRegParams,
    pub svm_c: f64,
    pub svm_tol: f64,
    /// `None` selects `1 / (n_features * Var(X))`.
    pub rbf_gamma: Option<f64>,
    pub svm_max_iter: Option<usize>,
    pub svm_cache_mb: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            nb_alpha: 1.0,
            logreg: LogRegParams::default(),
            svm_c: 1.0,
            svm_tol: 1e-3,
            rbf_gamma: None,
            svm_max_iter: None,
            svm_cache_mb: DEFAULT_CACHE_MB,
        }
    }
}

impl Hyperparameters {
    pub fn svm_params(&self, kernel: KernelConfig) -> SvmParams {
        SvmParams {
            c: self.svm_c,
            kernel,
            tol: self.svm_tol,
            max_iter: self.svm_max_iter,
            cache_mb: self.svm_cache_mb,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NBModel),
    Linear(LinearModel),
    Svm(SvmModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::NaiveBayes(m) => m.n_features(),
            Model::Linear(m) => m.n_features(),
            Model::Svm(m) => m.n_features(),
        }
    }

    /// Positive favours Hope. For naive Bayes this is the log-odds
    /// `log P(Hope|x) - log P(NotHope|x)`.
    pub fn decision_function(&self, x: &SparseVector) -> Result<f64> {
        match self {
            Model::NaiveBayes(m) => {
                let jll = m.joint_log_likelihood(x)?;
                Ok(jll[0] - jll[1])
            }
            Model::Linear(m) => m.decision_function(x),
            Model::Svm(m) => m.decision_function(x),
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Label> {
        match self {
            Model::NaiveBayes(m) => Ok(m.predict(x)?.0),
            _ => Ok(Label::from_decision(self.decision_function(x)?)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::NaiveBayes(m) => m.validate(),
            Model::Linear(m) => m.validate(),
            Model::Svm(m) => m.validate(),
        }
    }
}

/// Trains `kind` with `hyper`. The linear SVM is solved in the dual with a
/// linear kernel and then collapsed to a primal weight vector.
pub fn train_model(kind: ModelKind, x: &SparseMatrix, y: &[Label], hyper: &Hyperparameters) -> Result<Model> {
    match kind {
        ModelKind::Nb => Ok(Model::NaiveBayes(train_nb(x, y, hyper.nb_alpha)?)),
        ModelKind::Logreg => Ok(Model::Linear(train_logreg(x, y, &hyper.logreg)?.0)),
        ModelKind::SvmLinear => {
            let (svm, _) = train_svm(x, y, &hyper.svm_params(KernelConfig::linear()))?;
            Ok(Model::Linear(svm.to_linear()?))
        }
        ModelKind::SvmRbf => {
            let (svm, _) = train_svm(x, y, &hyper.svm_params(KernelConfig::rbf(hyper.rbf_gamma)))?;
            Ok(Model::Svm(svm))
        }
    }
}
