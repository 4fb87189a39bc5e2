//! Accuracy metrics. All four are computed in whatever units `y` is given
//! in; the pipeline passes min-max scaled targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("no samples")]
    Empty,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("R² is undefined for a constant target")]
    ConstantTarget,
}

const PAIRWISE_CUTOFF: usize = 4096;

/// Sum with pairwise splitting above 4096 terms.
pub fn sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_CUTOFF {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        sum(a) + sum(b)
    }
}

fn check(y: &[f64], y_hat: &[f64]) -> Result<(), MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch {
            actual: y.len(),
            predicted: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some(i) = y
        .iter()
        .zip(y_hat)
        .position(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(MetricError::NonFinite(i));
    }
    Ok(())
}

fn mean_of(y: &[f64], y_hat: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let terms: Vec<f64> = y.iter().zip(y_hat).map(|(&a, &p)| f(a, p)).collect();
    sum(&terms) / y.len() as f64
}

pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64, MetricError> {
    check(y, y_hat)?;
    Ok(mean_of(y, y_hat, |a, p| (a - p).abs()))
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64, MetricError> {
    check(y, y_hat)?;
    Ok(mean_of(y, y_hat, |a, p| (a - p) * (a - p)).sqrt())
}

/// Mean of `y_hat - y`: positive means the model overestimates.
pub fn mbe(y: &[f64], y_hat: &[f64]) -> Result<f64, MetricError> {
    check(y, y_hat)?;
    Ok(mean_of(y, y_hat, |a, p| p - a))
}

pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<f64, MetricError> {
    check(y, y_hat)?;
    let mean = sum(y) / y.len() as f64;
    let residual: Vec<f64> = y.iter().zip(y_hat).map(|(a, p)| (a - p) * (a - p)).collect();
    let total: Vec<f64> = y.iter().map(|a| (a - mean) * (a - mean)).collect();
    let ss_tot = sum(&total);
    if ss_tot == 0.0 {
        return Err(MetricError::ConstantTarget);
    }
    Ok(1.0 - sum(&residual) / ss_tot)
}

/// One row of the accuracy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: String,
    pub model: String,
    pub mae: f64,
    pub rmse: f64,
    pub mbe: f64,
    pub r2: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn compute(
        target: &str,
        model: &str,
        y: &[f64],
        y_hat: &[f64],
    ) -> Result<EvalReport, MetricError> {
        Ok(EvalReport {
            target: target.to_string(),
            model: model.to_string(),
            mae: mae(y, y_hat)?,
            rmse: rmse(y, y_hat)?,
            mbe: mbe(y, y_hat)?,
            r2: r2(y, y_hat)?,
            n: y.len(),
        })
    }

    /// `rmse >= mae >= 0`, `|mbe| <= mae`, `r2 <= 1`, with a little slack
    /// for rounding.
    pub fn identities_hold(&self) -> bool {
        let slack = 1e-12;
        self.mae >= 0.0
            && self.rmse + slack >= self.mae
            && self.mbe.abs() <= self.mae + slack
            && self.r2 <= 1.0
    }
}
