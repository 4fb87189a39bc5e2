//! Gradient-boosted regression trees with squared-error loss.
//!
//! Each round fits one tree to the gradient `ŷ − y` and unit hessian of
//! `½(ŷ − y)²` using exact greedy split search, with Newton leaf values
//! `−G/(H + λ)`. Trees are stored as flat node arrays in single precision,
//! the same layout the model file uses, and training rounds every threshold,
//! leaf, base score and learning rate to `f32` as it goes. A model therefore
//! predicts bit-identically before and after a save/load cycle.

mod split;
mod tree;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::ScalerParams;

pub use split::{find_best_split, split_gain, storable_threshold, Split, SplitParams};
pub use tree::{Tree, TreeDefect, TreeNode, LEAF, MAX_NODES};

use tree::TreeGrower;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("training set is empty")]
    Empty,
    #[error("feature matrix has {x} rows but target has {y}")]
    RowMismatch { x: usize, y: usize },
    #[error("non-finite value in {what} at row {row}")]
    NonFinite { what: &'static str, row: usize },
    #[error("too many features for the model format: {0}")]
    TooManyFeatures(usize),
    #[error("a tree exceeded the per-tree node limit")]
    TreeTooLarge,
}

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("model expects {expected} features, input has {found}")]
    FeatureCount { expected: usize, found: usize },
    #[error("NaN feature at row {row}, column {column}")]
    NaN { row: usize, column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

/// Capacity tier with many deep trees.
pub fn full_config() -> ModelConfig {
    ModelConfig {
        n_trees: 100,
        max_depth: 6,
        learning_rate: 0.3,
        lambda: 1.0,
        gamma: 0.0,
        min_samples_leaf: 1,
        seed: 42,
    }
}

/// Capacity tier sized for microcontroller flash.
pub fn tiny_config() -> ModelConfig {
    ModelConfig {
        n_trees: 25,
        max_depth: 3,
        ..full_config()
    }
}

impl ModelConfig {
    /// Every violated constraint, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_trees == 0 {
            out.push("n_trees must be at least 1".to_string());
        }
        if self.n_trees > u16::MAX as usize {
            out.push(format!("n_trees must be at most {}", u16::MAX));
        }
        if self.max_depth == 0 {
            out.push("max_depth must be at least 1".to_string());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            out.push(format!("learning_rate must lie in (0, 1], got {}", self.learning_rate));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            out.push(format!("lambda must be a finite value >= 0, got {}", self.lambda));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            out.push(format!("gamma must be a finite value >= 0, got {}", self.gamma));
        }
        if self.min_samples_leaf == 0 {
            out.push("min_samples_leaf must be at least 1".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(TrainError::Config(problems))
        }
    }

    fn split_params(&self) -> SplitParams {
        SplitParams {
            lambda: self.lambda,
            gamma: self.gamma,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

/// A trained model: `base_score + learning_rate · Σ tree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub base_score: f32,
    pub learning_rate: f32,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    /// Ranges used to scale raw inputs and unscale predictions.
    pub scaler: ScalerParams,
}

impl Ensemble {
    /// Attach scaling ranges, rounded to the precision they are stored in.
    pub fn with_scaler(mut self, scaler: &ScalerParams) -> Ensemble {
        assert_eq!(scaler.n_features(), self.n_features, "scaler width differs from model");
        self.scaler = scaler.to_f32_exact();
        self
    }

    #[inline]
    fn combine(&self, tree_sum: f64) -> f64 {
        f64::from(self.base_score) + f64::from(self.learning_rate) * tree_sum
    }

    /// Prediction for one scaled row of exactly `n_features` values.
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum = self
            .trees
            .iter()
            .fold(0.0f64, |acc, t| acc + f64::from(t.eval(row)));
        self.combine(sum)
    }

    /// Predictions in scaled target units for a scaled feature matrix.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, PredictError> {
        if x.ncols() != self.n_features {
            return Err(PredictError::FeatureCount {
                expected: self.n_features,
                found: x.ncols(),
            });
        }
        let x = x.as_standard_layout();
        let data = x.as_slice().expect("standard layout");
        if let Some(i) = data.iter().position(|v| v.is_nan()) {
            return Err(PredictError::NaN {
                row: i / self.n_features.max(1),
                column: i % self.n_features.max(1),
            });
        }
        let mut out = vec![0.0; x.nrows()];
        self.predict_into(data, &mut out);
        Ok(Array1::from(out))
    }

    /// Row-major batch prediction into a caller-provided buffer; performs
    /// no allocation.
    pub fn predict_into(&self, rows: &[f64], out: &mut [f64]) {
        let width = self.n_features;
        if width == 0 {
            out.fill(self.combine(0.0));
            return;
        }
        for (row, slot) in rows.chunks_exact(width).zip(out.iter_mut()) {
            *slot = self.predict_row(row);
        }
    }

    /// Predictions in physical target units from unscaled features, using
    /// the embedded scaler.
    pub fn predict_raw(&self, raw: ArrayView2<f64>) -> Result<Array1<f64>, PredictError> {
        if raw.ncols() != self.n_features {
            return Err(PredictError::FeatureCount {
                expected: self.n_features,
                found: raw.ncols(),
            });
        }
        let scaled = crate::preprocess::apply_scaler(raw, &self.scaler)
            .expect("width checked above");
        let y = self.predict(scaled.view())?;
        Ok(self.scaler.invert_target(y.view()))
    }

    pub fn n_nodes(&self) -> usize {
        self.trees.iter().map(|t| t.nodes.len()).sum()
    }
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// Training RMSE after each boosting round, in target units.
    pub train_rmse: Vec<f64>,
}

pub fn train(x: ArrayView2<f64>, y: ArrayView1<f64>, cfg: &ModelConfig) -> Result<Ensemble, TrainError> {
    train_with_log(x, y, cfg).map(|(model, _)| model)
}

/// Fit an ensemble and record the training RMSE after every round.
///
/// The result depends only on `(x, y, cfg)`.
pub fn train_with_log(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &ModelConfig,
) -> Result<(Ensemble, TrainLog), TrainError> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(TrainError::RowMismatch {
            x: x.nrows(),
            y: y.len(),
        });
    }
    if y.is_empty() {
        return Err(TrainError::Empty);
    }
    if x.ncols() >= LEAF as usize {
        return Err(TrainError::TooManyFeatures(x.ncols()));
    }
    for (row, r) in x.rows().into_iter().enumerate() {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite { what: "features", row });
        }
    }
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(TrainError::NonFinite { what: "target", row });
    }

    let n = y.len();
    let x = x.as_standard_layout();
    let rows = x.as_slice().expect("standard layout");
    let width = x.ncols();

    let mut model = Ensemble {
        base_score: (y.sum() / n as f64) as f32,
        learning_rate: cfg.learning_rate as f32,
        n_features: width,
        trees: Vec::with_capacity(cfg.n_trees),
        scaler: ScalerParams::identity(width),
    };
    let grower = TreeGrower::new(x.view(), cfg.split_params(), cfg.max_depth);

    let hess = vec![1.0; n];
    let mut tree_sums = vec![0.0f64; n];
    let mut grad = vec![0.0; n];
    let mut log = TrainLog::default();

    for _ in 0..cfg.n_trees {
        for i in 0..n {
            grad[i] = model.combine(tree_sums[i]) - y[i];
        }
        let tree = grower.grow(&grad, &hess)?;
        let mut sq = 0.0;
        for i in 0..n {
            let row = &rows[i * width..(i + 1) * width];
            tree_sums[i] += f64::from(tree.eval(row));
            let r = model.combine(tree_sums[i]) - y[i];
            sq += r * r;
        }
        log.train_rmse.push((sq / n as f64).sqrt());
        model.trees.push(tree);
    }
    Ok((model, log))
}

/// Gradient of `½(ŷ − y)²` with respect to `ŷ`.
#[inline]
pub fn squared_error_gradient(prediction: f64, target: f64) -> f64 {
    prediction - target
}

#[inline]
pub fn squared_error_loss(prediction: f64, target: f64) -> f64 {
    0.5 * (prediction - target) * (prediction - target)
}
