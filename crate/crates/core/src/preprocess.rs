//! Missing-value handling, min-max scaling and the train/test split.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Dataset, Target};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("features have {features} rows but target has {target}")]
    RowMismatch { features: usize, target: usize },
    #[error("column {0:?} has no observed values after dropping rows with a missing target")]
    AllMissing(String),
    #[error("expected {expected} columns, got {found}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("cannot split {0} rows; at least 10 are required")]
    TooFewRows(usize),
    #[error("train fraction {0} is outside (0, 1)")]
    BadFraction(f64),
}

/// Median of a non-empty slice; even lengths average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Drop rows whose target is missing, then fill each remaining missing
/// feature cell with its column median over observed cells.
///
/// Observed cells are copied through unchanged and the returned masks are
/// all `false`.
pub fn handle_missing(ds: &Dataset, target: &Target) -> Result<(Dataset, Target), PreprocessError> {
    if ds.n_rows() != target.len() {
        return Err(PreprocessError::RowMismatch {
            features: ds.n_rows(),
            target: target.len(),
        });
    }
    let keep: Vec<usize> = (0..target.len()).filter(|&i| !target.missing[i]).collect();
    let mut values = ds.values.select(Axis(0), &keep);
    let missing = ds.missing.select(Axis(0), &keep);

    for (c, name) in ds.column_names.iter().enumerate() {
        let col_missing = missing.column(c);
        if !col_missing.iter().any(|&m| m) {
            continue;
        }
        let observed: Vec<f64> = values
            .column(c)
            .iter()
            .zip(col_missing.iter())
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
            .collect();
        let fill = median(&observed).ok_or_else(|| PreprocessError::AllMissing(name.clone()))?;
        for (v, &m) in values.column_mut(c).iter_mut().zip(col_missing.iter()) {
            if m {
                *v = fill;
            }
        }
    }

    let n = keep.len();
    Ok((
        Dataset {
            column_names: ds.column_names.clone(),
            missing: Array2::from_elem(values.raw_dim(), false),
            values,
        },
        Target {
            name: target.name.clone(),
            values: target.values.select(Axis(0), &keep),
            missing: Array1::from_elem(n, false),
        },
    ))
}

/// Observed range of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub const UNIT: MinMax = MinMax { min: 0.0, max: 1.0 };

    pub fn of(values: ArrayView1<f64>) -> MinMax {
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if min > max {
            // empty column
            MinMax::UNIT
        } else {
            MinMax { min, max }
        }
    }

    /// Degenerate (constant) columns map to 0.
    #[inline]
    pub fn scale(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (x - self.min) / span
        } else {
            0.0
        }
    }

    #[inline]
    pub fn invert(&self, scaled: f64) -> f64 {
        scaled * (self.max - self.min) + self.min
    }

    /// Both bounds rounded to the nearest single-precision value.
    pub fn to_f32_exact(self) -> MinMax {
        MinMax {
            min: self.min as f32 as f64,
            max: self.max as f32 as f64,
        }
    }
}

/// Per-column ranges for the feature columns and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub features: Vec<MinMax>,
    pub target: MinMax,
}

impl ScalerParams {
    /// Parameters that leave data untouched.
    pub fn identity(n_features: usize) -> ScalerParams {
        ScalerParams {
            features: vec![MinMax::UNIT; n_features],
            target: MinMax::UNIT,
        }
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn to_f32_exact(&self) -> ScalerParams {
        ScalerParams {
            features: self.features.iter().map(|m| m.to_f32_exact()).collect(),
            target: self.target.to_f32_exact(),
        }
    }

    pub fn scale_target(&self, y: ArrayView1<f64>) -> Array1<f64> {
        y.mapv(|v| self.target.scale(v))
    }

    pub fn invert_target(&self, y: ArrayView1<f64>) -> Array1<f64> {
        y.mapv(|v| self.target.invert(v))
    }
}

/// Fit per-column min/max over every row given, features and target alike.
pub fn fit_scaler(features: ArrayView2<f64>, target: ArrayView1<f64>) -> ScalerParams {
    ScalerParams {
        features: features.axis_iter(Axis(1)).map(MinMax::of).collect(),
        target: MinMax::of(target),
    }
}

/// `x' = (x - min) / (max - min)` per feature column. Values outside the
/// fitted range are not clamped; see [`count_out_of_range`].
pub fn apply_scaler(values: ArrayView2<f64>, params: &ScalerParams) -> Result<Array2<f64>, PreprocessError> {
    check_columns(values, params)?;
    let mut out = values.to_owned();
    for (mut col, mm) in out.axis_iter_mut(Axis(1)).zip(&params.features) {
        col.mapv_inplace(|v| mm.scale(v));
    }
    Ok(out)
}

pub fn invert_scaler(scaled: ArrayView2<f64>, params: &ScalerParams) -> Result<Array2<f64>, PreprocessError> {
    check_columns(scaled, params)?;
    let mut out = scaled.to_owned();
    for (mut col, mm) in out.axis_iter_mut(Axis(1)).zip(&params.features) {
        col.mapv_inplace(|v| mm.invert(v));
    }
    Ok(out)
}

fn check_columns(values: ArrayView2<f64>, params: &ScalerParams) -> Result<(), PreprocessError> {
    if values.ncols() != params.n_features() {
        return Err(PreprocessError::ColumnMismatch {
            expected: params.n_features(),
            found: values.ncols(),
        });
    }
    Ok(())
}

/// Number of scaled cells outside `[0, 1]`.
pub fn count_out_of_range(scaled: ArrayView2<f64>) -> usize {
    scaled.iter().filter(|&&v| !(0.0..=1.0).contains(&v)).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Shuffled,
    Chronological,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: DEFAULT_SEED,
            mode: SplitMode::Shuffled,
        }
    }
}

/// Partition `0..n_rows` into train and test indices, each sorted ascending.
///
/// The train set holds `floor(train_fraction * n_rows)` rows. Shuffled mode
/// draws a ChaCha8 permutation seeded with `spec.seed`; chronological mode
/// takes the leading rows.
pub fn split(n_rows: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), PreprocessError> {
    if n_rows < 10 {
        return Err(PreprocessError::TooFewRows(n_rows));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(PreprocessError::BadFraction(spec.train_fraction));
    }
    let n_train = (n_rows as f64 * spec.train_fraction).floor() as usize;
    let mut order: Vec<usize> = (0..n_rows).collect();
    if spec.mode == SplitMode::Shuffled {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        order.shuffle(&mut rng);
    }
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
