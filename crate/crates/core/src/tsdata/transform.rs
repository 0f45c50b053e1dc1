//! Normalization, windowing, unsupervised feature selection, and split
//! partitioning over [`MetricFrame`]s.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{MetricFrame, SplitTag, TsDataError, WindowSpec};

/// Guard against division by zero on constant columns.
pub const VARIANCE_EPSILON: f64 = 1e-12;

/// Absolute Pearson correlation above which the later column is dropped.
pub const CORRELATION_THRESHOLD: f64 = 0.99;

/// Per-column mean and population standard deviation from a fit range,
/// reusable on stream data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub columns: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// `(x - mean) / max(std, epsilon)` for every column in `self.columns`.
    pub fn apply(&self, frame: &MetricFrame) -> Result<MetricFrame, TsDataError> {
        self.check_schema(frame)?;
        Ok(frame.map_columns(|i, _, values| {
            let denom = self.std[i].max(VARIANCE_EPSILON);
            values.iter().map(|&x| (x - self.mean[i]) / denom).collect()
        }))
    }

    /// Inverse of [`NormStats::apply`].
    pub fn invert(&self, frame: &MetricFrame) -> Result<MetricFrame, TsDataError> {
        self.check_schema(frame)?;
        Ok(frame.map_columns(|i, _, values| {
            let denom = self.std[i].max(VARIANCE_EPSILON);
            values.iter().map(|&x| x * denom + self.mean[i]).collect()
        }))
    }

    fn check_schema(&self, frame: &MetricFrame) -> Result<(), TsDataError> {
        if frame.column_names() != self.columns {
            let missing = self
                .columns
                .iter()
                .find(|c| frame.column(c).is_none())
                .cloned()
                .unwrap_or_else(|| self.columns.join(","));
            return Err(TsDataError::MissingColumn(missing));
        }
        Ok(())
    }
}

/// Z-score every value column, with statistics computed over `fit_rows` only.
pub fn zscore_normalize(
    frame: &MetricFrame,
    fit_rows: Range<usize>,
) -> Result<(MetricFrame, NormStats), TsDataError> {
    if fit_rows.is_empty() || fit_rows.end > frame.len() {
        return Err(TsDataError::EmptyFitRange);
    }
    let names = frame.column_names();
    let mut mean = Vec::with_capacity(names.len());
    let mut std = Vec::with_capacity(names.len());
    for name in &names {
        let values = &frame.column(name).unwrap()[fit_rows.clone()];
        let (m, s) = mean_std(values);
        mean.push(m);
        std.push(s);
    }
    let stats = NormStats {
        columns: names,
        mean,
        std,
    };
    let normalized = stats.apply(frame)?;
    Ok((normalized, stats))
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Emit `(input row range, target row)` pairs for a lookback forecaster:
/// pair `i` covers input rows `[i, i + lookback)` with target `i + lookback`.
pub fn make_windows(
    frame: &MetricFrame,
    spec: &WindowSpec,
) -> Result<Vec<(Range<usize>, usize)>, TsDataError> {
    spec.validate()?;
    let len = frame.len();
    let lookback = spec.lookback_window;
    if len <= lookback {
        return Err(TsDataError::SeriesTooShort { len, lookback });
    }
    Ok((0..len - lookback).map(|i| (i..i + lookback, i + lookback)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DropReason {
    ZeroVariance,
    Correlated { with: String, correlation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub retained: Vec<String>,
    pub dropped: Vec<DroppedColumn>,
}

impl FeatureSelection {
    /// True when every candidate column was constant.
    pub fn all_dropped(&self) -> bool {
        self.retained.is_empty()
    }
}

/// Drop zero-variance columns, then for any pair with |Pearson r| above
/// [`CORRELATION_THRESHOLD`] drop the later column in input order.
pub fn unsupervised_feature_select(
    frame: &MetricFrame,
    columns: &[String],
) -> Result<FeatureSelection, TsDataError> {
    let mut retained: Vec<String> = Vec::new();
    let mut dropped: Vec<DroppedColumn> = Vec::new();
    for name in columns {
        let values = frame
            .column(name)
            .ok_or_else(|| TsDataError::MissingColumn(name.clone()))?;
        let (_, std) = mean_std(values);
        if std <= VARIANCE_EPSILON {
            dropped.push(DroppedColumn {
                name: name.clone(),
                reason: DropReason::ZeroVariance,
            });
            continue;
        }
        let mut keep = true;
        for kept in &retained {
            let r = pearson(frame.column(kept).unwrap(), values);
            if r.abs() > CORRELATION_THRESHOLD {
                dropped.push(DroppedColumn {
                    name: name.clone(),
                    reason: DropReason::Correlated {
                        with: kept.clone(),
                        correlation: r,
                    },
                });
                keep = false;
                break;
            }
        }
        if keep {
            retained.push(name.clone());
        }
    }
    Ok(FeatureSelection { retained, dropped })
}

/// Pearson correlation coefficient of two equal-length series.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        let da = a[i] - ma;
        let db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Partition rows by their train/val/test tag, preserving order.
pub fn split_by_column(
    frame: &MetricFrame,
) -> Result<(MetricFrame, MetricFrame, MetricFrame), TsDataError> {
    let splits = frame
        .splits()
        .ok_or_else(|| TsDataError::MissingColumn("train_val_test_column".into()))?;
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (i, tag) in splits.iter().enumerate() {
        match tag {
            SplitTag::Train => train.push(i),
            SplitTag::Val => val.push(i),
            SplitTag::Test => test.push(i),
        }
    }
    Ok((
        frame.take_rows(&train),
        frame.take_rows(&val),
        frame.take_rows(&test),
    ))
}
