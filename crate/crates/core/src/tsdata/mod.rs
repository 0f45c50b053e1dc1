//! Time-series data handling: parsing, validation, normalization,
//! windowing, feature selection, and split handling.

mod parse;
mod transform;

pub use parse::{parse_csv, parse_timestamp};
pub use transform::{
    make_windows, split_by_column, unsupervised_feature_select, zscore_normalize, DropReason,
    DroppedColumn, FeatureSelection, NormStats, CORRELATION_THRESHOLD, VARIANCE_EPSILON,
};

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsDataError {
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("row {row}: cannot parse `{value}` with time format `{format}`")]
    TimeParse {
        row: usize,
        value: String,
        format: String,
    },
    #[error("row {row}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { row: usize, timestamp: i64 },
    #[error("row {row}, column `{column}`: non-numeric value `{value}`")]
    NonNumericValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: label `{value}` is not one of 1, +1, -1")]
    BadLabelValue { row: usize, value: String },
    #[error("row {row}: unknown split tag `{value}` (expected train, val or test)")]
    UnknownSplitValue { row: usize, value: String },
    #[error("normalization fit range is empty or out of bounds")]
    EmptyFitRange,
    #[error("series of length {len} is too short for lookback window {lookback}")]
    SeriesTooShort { len: usize, lookback: usize },
    #[error("column lengths do not match the timestamp count")]
    LengthMismatch,
    #[error("timestamps must strictly increase")]
    NonMonotonicTimestamps,
    #[error("frame has no rows")]
    EmptyFrame,
    #[error("invalid column roles: {0}")]
    BadRoles(String),
    #[error("invalid window spec: {0}")]
    BadWindow(String),
}

/// Membership tag for train/validation/test partitioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl SplitTag {
    pub fn parse(value: &str) -> Option<SplitTag> {
        match value {
            "train" => Some(SplitTag::Train),
            "val" => Some(SplitTag::Val),
            "test" => Some(SplitTag::Test),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }
}

/// Which columns of an input file play which role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub time_column: String,
    pub time_format: String,
    pub target_columns: Vec<String>,
    #[serde(default)]
    pub feature_columns: Vec<String>,
    #[serde(default)]
    pub label_column: Option<String>,
    #[serde(default)]
    pub split_column: Option<String>,
}

impl ColumnRoles {
    pub fn validate(&self) -> Result<(), TsDataError> {
        if self.target_columns.is_empty() {
            return Err(TsDataError::BadRoles("target_columns must be non-empty".into()));
        }
        for f in &self.feature_columns {
            if self.target_columns.contains(f) {
                return Err(TsDataError::BadRoles(format!(
                    "column `{f}` cannot be both target and feature"
                )));
            }
        }
        Ok(())
    }

    /// Targets first, then features; the value-column order of parsed frames.
    pub fn value_columns(&self) -> Vec<String> {
        let mut cols = self.target_columns.clone();
        cols.extend(self.feature_columns.iter().cloned());
        cols
    }
}

/// Lookback/observation window sizes for windowed detectors and stream scoring.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lookback_window: usize,
    pub observation_window: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            lookback_window: 10,
            observation_window: 10,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<(), TsDataError> {
        if self.lookback_window == 0 {
            return Err(TsDataError::BadWindow("lookback_window must be >= 1".into()));
        }
        if self.observation_window == 0 {
            return Err(TsDataError::BadWindow("observation_window must be >= 1".into()));
        }
        Ok(())
    }
}

/// A validated multivariate time series: strictly increasing timestamps
/// (epoch milliseconds) plus equal-length named value columns, with
/// optional ±1 labels and train/val/test tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFrame {
    timestamps: Vec<i64>,
    columns: IndexMap<String, Vec<f64>>,
    label_column: Option<String>,
    labels: Option<Vec<i8>>,
    split_column: Option<String>,
    splits: Option<Vec<SplitTag>>,
}

impl MetricFrame {
    pub fn new(
        timestamps: Vec<i64>,
        columns: IndexMap<String, Vec<f64>>,
    ) -> Result<Self, TsDataError> {
        let frame = MetricFrame {
            timestamps,
            columns,
            label_column: None,
            labels: None,
            split_column: None,
            splits: None,
        };
        frame.check_invariants()?;
        Ok(frame)
    }

    pub fn with_labels(mut self, name: &str, labels: Vec<i8>) -> Result<Self, TsDataError> {
        if labels.len() != self.timestamps.len() {
            return Err(TsDataError::LengthMismatch);
        }
        self.label_column = Some(name.to_string());
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_splits(mut self, name: &str, splits: Vec<SplitTag>) -> Result<Self, TsDataError> {
        if splits.len() != self.timestamps.len() {
            return Err(TsDataError::LengthMismatch);
        }
        self.split_column = Some(name.to_string());
        self.splits = Some(splits);
        Ok(self)
    }

    fn check_invariants(&self) -> Result<(), TsDataError> {
        let n = self.timestamps.len();
        for values in self.columns.values() {
            if values.len() != n {
                return Err(TsDataError::LengthMismatch);
            }
        }
        for w in self.timestamps.windows(2) {
            if w[1] <= w[0] {
                return Err(TsDataError::NonMonotonicTimestamps);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Number of value columns.
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.keys().cloned().collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.get(name).map(|v| v.as_slice())
    }

    pub fn labels(&self) -> Option<&[i8]> {
        self.labels.as_deref()
    }

    pub fn label_column(&self) -> Option<&str> {
        self.label_column.as_deref()
    }

    pub fn splits(&self) -> Option<&[SplitTag]> {
        self.splits.as_deref()
    }

    pub fn split_column(&self) -> Option<&str> {
        self.split_column.as_deref()
    }

    /// Row `i` across all value columns, in column order.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.values().map(|v| v[i]).collect()
    }

    /// Dense n-by-d matrix of all value columns, in column order.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let d = self.width();
        DMatrix::from_fn(n, d, |r, c| self.columns[c][r])
    }

    /// New frame restricted to `names`, preserving the requested order.
    pub fn select_columns(&self, names: &[String]) -> Result<MetricFrame, TsDataError> {
        let mut columns = IndexMap::new();
        for name in names {
            let values = self
                .columns
                .get(name)
                .ok_or_else(|| TsDataError::MissingColumn(name.clone()))?;
            columns.insert(name.clone(), values.clone());
        }
        Ok(MetricFrame {
            timestamps: self.timestamps.clone(),
            columns,
            label_column: self.label_column.clone(),
            labels: self.labels.clone(),
            split_column: self.split_column.clone(),
            splits: self.splits.clone(),
        })
    }

    /// New frame keeping only the rows at `indices` (must be strictly increasing).
    pub fn take_rows(&self, indices: &[usize]) -> MetricFrame {
        let pick = |v: &Vec<f64>| indices.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        MetricFrame {
            timestamps: indices.iter().map(|&i| self.timestamps[i]).collect(),
            columns: self.columns.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            label_column: self.label_column.clone(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            split_column: self.split_column.clone(),
            splits: self
                .splits
                .as_ref()
                .map(|s| indices.iter().map(|&i| s[i]).collect()),
        }
    }

    /// New frame over the contiguous row range.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> MetricFrame {
        let indices: Vec<usize> = range.collect();
        self.take_rows(&indices)
    }

    /// Replace the values of every column via `f(column_index, row_value)`.
    pub(crate) fn map_columns(&self, mut f: impl FnMut(usize, &str, &[f64]) -> Vec<f64>) -> MetricFrame {
        MetricFrame {
            timestamps: self.timestamps.clone(),
            columns: self
                .columns
                .iter()
                .enumerate()
                .map(|(i, (k, v))| (k.clone(), f(i, k, v)))
                .collect(),
            label_column: self.label_column.clone(),
            labels: self.labels.clone(),
            split_column: self.split_column.clone(),
            splits: self.splits.clone(),
        }
    }

    /// Serialize to CSV with epoch-millisecond timestamps under `time_column`.
    /// `parse_csv` with time format `epoch_ms` reads this back identically.
    pub fn to_csv(&self, time_column: &str) -> String {
        let mut out = String::new();
        out.push_str(time_column);
        for name in self.columns.keys() {
            out.push(',');
            out.push_str(name);
        }
        if let Some(name) = &self.label_column {
            out.push(',');
            out.push_str(name);
        }
        if let Some(name) = &self.split_column {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.timestamps[i].to_string());
            for values in self.columns.values() {
                out.push(',');
                out.push_str(&format_value(values[i]));
            }
            if let Some(labels) = &self.labels {
                out.push(',');
                out.push_str(if labels[i] < 0 { "-1" } else { "1" });
            }
            if let Some(splits) = &self.splits {
                out.push(',');
                out.push_str(splits[i].as_str());
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal text that parses back to the same f64.
pub(crate) fn format_value(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(ts: Vec<i64>, cols: Vec<(&str, Vec<f64>)>) -> MetricFrame {
        let columns: IndexMap<String, Vec<f64>> =
            cols.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        MetricFrame::new(ts, columns).unwrap()
    }

    #[test]
    fn rejects_unequal_column_lengths() {
        let mut columns = IndexMap::new();
        columns.insert("a".to_string(), vec![1.0, 2.0]);
        columns.insert("b".to_string(), vec![1.0]);
        assert!(matches!(
            MetricFrame::new(vec![0, 1], columns),
            Err(TsDataError::LengthMismatch)
        ));
    }

    #[test]
    fn rejects_non_increasing_timestamps() {
        let mut columns = IndexMap::new();
        columns.insert("a".to_string(), vec![1.0, 2.0]);
        assert!(matches!(
            MetricFrame::new(vec![5, 5], columns),
            Err(TsDataError::NonMonotonicTimestamps)
        ));
    }

    #[test]
    fn select_and_slice() {
        let f = frame(vec![0, 1, 2], vec![("a", vec![1.0, 2.0, 3.0]), ("b", vec![4.0, 5.0, 6.0])]);
        let sel = f.select_columns(&["b".to_string()]).unwrap();
        assert_eq!(sel.column_names(), vec!["b"]);
        let sl = f.slice_rows(1..3);
        assert_eq!(sl.timestamps(), &[1, 2]);
        assert_eq!(sl.column("a").unwrap(), &[2.0, 3.0]);
    }

    #[test]
    fn roles_require_targets() {
        let roles = ColumnRoles {
            time_column: "t".into(),
            time_format: "epoch_ms".into(),
            target_columns: vec![],
            feature_columns: vec![],
            label_column: None,
            split_column: None,
        };
        assert!(roles.validate().is_err());
    }

    #[test]
    fn roles_reject_target_feature_overlap() {
        let roles = ColumnRoles {
            time_column: "t".into(),
            time_format: "epoch_ms".into(),
            target_columns: vec!["x".into()],
            feature_columns: vec!["x".into()],
            label_column: None,
            split_column: None,
        };
        assert!(roles.validate().is_err());
    }
}
