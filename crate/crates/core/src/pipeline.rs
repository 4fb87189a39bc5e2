//! Dataset → scaled train/test matrices → trained tiers.
//!
//! Shared by the CLI commands so `train`, `evaluate` and `profile` all see
//! exactly the same split for a given seed.

use std::fmt;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbrt::{self, Ensemble, ModelConfig, TrainError, TrainLog};
use crate::ingest::{self, Dataset, IngestError};
use crate::preprocess::{self, PreprocessError, ScalerParams, SplitSpec};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// Pollutants the experiment predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Pollutant {
    #[value(name = "CO")]
    #[serde(rename = "CO")]
    Co,
    #[value(name = "NO2")]
    #[serde(rename = "NO2")]
    No2,
}

impl Pollutant {
    pub const ALL: [Pollutant; 2] = [Pollutant::Co, Pollutant::No2];

    pub fn column(self) -> &'static str {
        match self {
            Pollutant::Co => "CO(GT)",
            Pollutant::No2 => "NO2(GT)",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pollutant::Co => "CO",
            Pollutant::No2 => "NO2",
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Model capacity tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Full,
    Tiny,
}

impl Tier {
    pub const ALL: [Tier; 2] = [Tier::Full, Tier::Tiny];

    pub fn config(self) -> ModelConfig {
        match self {
            Tier::Full => gbrt::full_config(),
            Tier::Tiny => gbrt::tiny_config(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Tier::Full => "full",
            Tier::Tiny => "tiny",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which rows the min-max ranges are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScalerFit {
    /// Every cleaned row, before splitting.
    #[default]
    All,
    /// Training rows only.
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrepOptions {
    pub split: SplitSpec,
    pub scaler_fit: ScalerFit,
}

/// Scaled matrices for one target.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub feature_names: Vec<String>,
    pub scaler: ScalerParams,
    pub x_train: Array2<f64>,
    pub y_train: Array1<f64>,
    pub x_test: Array2<f64>,
    pub y_test: Array1<f64>,
    /// Rows surviving the missing-target filter.
    pub n_clean: usize,
    /// Scaled test cells outside `[0, 1]`.
    pub test_out_of_range: usize,
}

/// Select, clean, scale and split one target column.
pub fn prepare(ds: &Dataset, target_column: &str, opts: &PrepOptions) -> Result<Prepared, PipelineError> {
    let (features, target) = ingest::select_xy(ds, target_column)?;
    let (features, target) = preprocess::handle_missing(&features, &target)?;
    let n_clean = target.len();
    let (train_idx, test_idx) = preprocess::split(n_clean, &opts.split)?;

    let scaler = match opts.scaler_fit {
        ScalerFit::All => preprocess::fit_scaler(features.values.view(), target.values.view()),
        ScalerFit::Train => preprocess::fit_scaler(
            features.values.select(Axis(0), &train_idx).view(),
            target.values.select(Axis(0), &train_idx).view(),
        ),
    };
    let x = preprocess::apply_scaler(features.values.view(), &scaler)?;
    let y = scaler.scale_target(target.values.view());

    let x_test = x.select(Axis(0), &test_idx);
    Ok(Prepared {
        feature_names: features.column_names,
        test_out_of_range: preprocess::count_out_of_range(x_test.view()),
        x_train: x.select(Axis(0), &train_idx),
        y_train: y.select(Axis(0), &train_idx),
        x_test,
        y_test: y.select(Axis(0), &test_idx),
        scaler,
        n_clean,
    })
}

/// Train on the prepared split and embed its scaler in the model.
pub fn fit(prepared: &Prepared, cfg: &ModelConfig) -> Result<(Ensemble, TrainLog), PipelineError> {
    let (model, log) = gbrt::train_with_log(prepared.x_train.view(), prepared.y_train.view(), cfg)?;
    Ok((model.with_scaler(&prepared.scaler), log))
}
