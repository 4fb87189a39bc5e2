//! Reading AirQualityUCI-style sensor exports.
//!
//! The canonical file is semicolon-delimited with comma decimals, carries two
//! unnamed trailing columns and a block of fully-empty rows at the end, and
//! tags absent measurements with `-200`. Parsing is split in two stages:
//! [`parse_csv`] only tokenizes (cell text is preserved verbatim), and
//! [`to_dataset`] converts the retained columns to numbers and builds the
//! missing-value mask.

use std::collections::HashSet;
use std::io::Read;

use ndarray::{Array1, Array2, Axis};
use thiserror::Error;

/// Default tag for absent measurements in the canonical file.
pub const DEFAULT_MISSING_SENTINEL: f64 = -200.0;

/// Columns dropped before modeling unless the caller overrides the list.
///
/// `NMHC(GT)` is missing for roughly 90% of the rows.
pub const DEFAULT_DROP_COLUMNS: &[&str] = &["NMHC(GT)"];

/// Suffix marking reference-analyzer (ground truth) columns.
pub const GROUND_TRUTH_SUFFIX: &str = "(GT)";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is empty")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("delimiter and decimal separator must differ (both {0:?})")]
    SameSeparators(char),
    #[error("separator {0:?} is not a single-byte character")]
    WideSeparator(char),
    #[error("row {row}, column {column:?}: cannot parse {token:?} as a number")]
    BadNumber {
        row: usize,
        column: String,
        token: String,
    },
    #[error("unknown column {name:?}; available: {}", available.join(", "))]
    UnknownColumn { name: String, available: Vec<String> },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvOptions {
    pub delimiter: char,
    pub decimal_separator: char,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: ';',
            decimal_separator: ',',
        }
    }
}

/// Tokenized CSV: header plus a row-major grid of untouched cell text.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub cells: Vec<Vec<String>>,
    pub decimal_separator: char,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }
}

/// Numeric sensor table with an explicit missing-value mask.
///
/// Missing cells hold the sentinel they were read as, so `values` never
/// contains uninitialized or non-finite data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub column_names: Vec<String>,
    pub values: Array2<f64>,
    pub missing: Array2<bool>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Missing-cell count per column, in column order.
    pub fn missing_counts(&self) -> Vec<usize> {
        self.missing
            .axis_iter(Axis(1))
            .map(|col| col.iter().filter(|&&m| m).count())
            .collect()
    }
}

/// One named column with its missing mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub name: String,
    pub values: Array1<f64>,
    pub missing: Array1<bool>,
}

impl Target {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Non-fatal findings from [`to_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    AbsentDropColumn(String),
}

impl std::fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IngestWarning::AbsentDropColumn(c) => {
                write!(f, "drop list names column {c:?}, which is not present")
            }
        }
    }
}

fn single_byte(c: char) -> Result<u8, IngestError> {
    if c.is_ascii() {
        Ok(c as u8)
    } else {
        Err(IngestError::WideSeparator(c))
    }
}

/// Tokenize delimited text into a [`RawTable`].
///
/// Trailing header columns with an empty name are dropped along with their
/// cells, and trailing rows whose cells are all empty are discarded. Every
/// remaining row must have exactly as many fields as the header.
pub fn parse_csv<R: Read>(input: R, options: CsvOptions) -> Result<RawTable, IngestError> {
    if options.delimiter == options.decimal_separator {
        return Err(IngestError::SameSeparators(options.delimiter));
    }
    let delimiter = single_byte(options.delimiter)?;
    single_byte(options.decimal_separator)?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(input);

    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(IngestError::Empty),
    };
    let width = header.len();
    let mut column_names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    while column_names.last().is_some_and(|c| c.is_empty()) {
        column_names.pop();
    }
    if column_names.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut seen = HashSet::new();
    for name in &column_names {
        if !seen.insert(name.as_str()) {
            return Err(IngestError::DuplicateColumn(name.clone()));
        }
    }
    let kept = column_names.len();

    let mut cells = Vec::new();
    for rec in records {
        let rec = rec?;
        if rec.len() != width {
            let line = rec.position().map_or(0, |p| p.line());
            return Err(IngestError::Ragged {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        cells.push(rec.iter().take(kept).map(str::to_string).collect::<Vec<_>>());
    }
    while cells
        .last()
        .is_some_and(|row: &Vec<String>| row.iter().all(|c| c.trim().is_empty()))
    {
        cells.pop();
    }

    Ok(RawTable {
        column_names,
        cells,
        decimal_separator: options.decimal_separator,
    })
}

fn is_timestamp_column(name: &str) -> bool {
    name.eq_ignore_ascii_case("date") || name.eq_ignore_ascii_case("time")
}

fn parse_number(token: &str, decimal_separator: char) -> Option<f64> {
    let token = token.trim();
    let value = if decimal_separator == '.' {
        token.parse::<f64>().ok()?
    } else {
        token.replace(decimal_separator, ".").parse::<f64>().ok()?
    };
    value.is_finite().then_some(value)
}

/// Convert a tokenized table to numbers.
///
/// Date/time columns and every column in `drop_columns` are removed. Cells
/// equal to `missing_sentinel` are flagged missing. Drop-list entries that do
/// not match any column are reported as warnings.
pub fn to_dataset(
    table: &RawTable,
    missing_sentinel: f64,
    drop_columns: &[&str],
) -> Result<(Dataset, Vec<IngestWarning>), IngestError> {
    let warnings: Vec<IngestWarning> = drop_columns
        .iter()
        .filter(|d| !table.column_names.iter().any(|c| c == *d))
        .map(|d| IngestWarning::AbsentDropColumn(d.to_string()))
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }

    let retained: Vec<usize> = table
        .column_names
        .iter()
        .enumerate()
        .filter(|(_, name)| !is_timestamp_column(name) && !drop_columns.contains(&name.as_str()))
        .map(|(i, _)| i)
        .collect();

    let n_rows = table.n_rows();
    let n_cols = retained.len();
    let mut values = Array2::<f64>::zeros((n_rows, n_cols));
    let mut missing = Array2::<bool>::from_elem((n_rows, n_cols), false);

    for (r, row) in table.cells.iter().enumerate() {
        for (c, &src) in retained.iter().enumerate() {
            let token = &row[src];
            let value = parse_number(token, table.decimal_separator).ok_or_else(|| {
                IngestError::BadNumber {
                    row: r,
                    column: table.column_names[src].clone(),
                    token: token.clone(),
                }
            })?;
            values[[r, c]] = value;
            missing[[r, c]] = value == missing_sentinel;
        }
    }

    let column_names = retained
        .iter()
        .map(|&i| table.column_names[i].clone())
        .collect();
    Ok((
        Dataset {
            column_names,
            values,
            missing,
        },
        warnings,
    ))
}

/// Split off `target_column` as the label.
///
/// Every ground-truth analyzer column (`*(GT)`) is removed from the feature
/// set, so a model for one pollutant never sees the reference readings of
/// its siblings.
pub fn select_xy(ds: &Dataset, target_column: &str) -> Result<(Dataset, Target), IngestError> {
    let t = ds
        .column_index(target_column)
        .ok_or_else(|| IngestError::UnknownColumn {
            name: target_column.to_string(),
            available: ds.column_names.clone(),
        })?;

    let keep: Vec<usize> = (0..ds.n_cols())
        .filter(|&c| c != t && !ds.column_names[c].ends_with(GROUND_TRUTH_SUFFIX))
        .collect();

    let features = Dataset {
        column_names: keep.iter().map(|&c| ds.column_names[c].clone()).collect(),
        values: ds.values.select(Axis(1), &keep),
        missing: ds.missing.select(Axis(1), &keep),
    };
    let target = Target {
        name: target_column.to_string(),
        values: ds.values.column(t).to_owned(),
        missing: ds.missing.column(t).to_owned(),
    };
    Ok((features, target))
}
