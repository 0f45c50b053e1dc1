//! CSV ingestion with strftime-style time formats.

use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use indexmap::IndexMap;

use super::{ColumnRoles, MetricFrame, SplitTag, TsDataError};

/// Parse a timestamp cell to epoch milliseconds.
///
/// `format` is either the literal `epoch_ms` / `epoch_s` or a
/// strftime-style pattern (`%Y-%m-%d %H:%M:%S`, optionally with `%z`).
/// Patterns without a timezone directive are interpreted as UTC.
pub fn parse_timestamp(value: &str, format: &str) -> Option<i64> {
    let value = value.trim();
    match format {
        "epoch_ms" => {
            if let Ok(ms) = value.parse::<i64>() {
                return Some(ms);
            }
            let f: f64 = value.parse().ok()?;
            if f.fract() == 0.0 {
                Some(f as i64)
            } else {
                None
            }
        }
        "epoch_s" => {
            let f: f64 = value.parse().ok()?;
            Some((f * 1000.0).round() as i64)
        }
        _ => {
            if format.contains("%z") || format.contains("%:z") || format.contains("%#z") {
                let dt = DateTime::parse_from_str(value, format).ok()?;
                return Some(dt.timestamp_millis());
            }
            if let Ok(dt) = NaiveDateTime::parse_from_str(value, format) {
                return Some(dt.and_utc().timestamp_millis());
            }
            let d = NaiveDate::parse_from_str(value, format).ok()?;
            Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis())
        }
    }
}

/// Parse header-bearing CSV into a [`MetricFrame`], sorted by timestamp.
///
/// Value columns are targets followed by features; missing or non-numeric
/// cells in those columns are errors rather than silently imputed.
pub fn parse_csv<R: Read>(reader: R, roles: &ColumnRoles) -> Result<MetricFrame, TsDataError> {
    roles.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|_| TsDataError::MissingColumn(roles.time_column.clone()))?
        .clone();
    let mut index_of = IndexMap::new();
    for (i, name) in headers.iter().enumerate() {
        if index_of.insert(name.to_string(), i).is_some() {
            return Err(TsDataError::DuplicateColumn(name.to_string()));
        }
    }
    let col_index = |name: &str| -> Result<usize, TsDataError> {
        index_of
            .get(name)
            .copied()
            .ok_or_else(|| TsDataError::MissingColumn(name.to_string()))
    };

    let time_idx = col_index(&roles.time_column)?;
    let value_names = roles.value_columns();
    let value_idx: Vec<usize> = value_names
        .iter()
        .map(|n| col_index(n))
        .collect::<Result<_, _>>()?;
    let label_idx = roles
        .label_column
        .as_ref()
        .map(|n| col_index(n))
        .transpose()?;
    let split_idx = roles
        .split_column
        .as_ref()
        .map(|n| col_index(n))
        .transpose()?;

    struct Row {
        source_row: usize,
        ts: i64,
        values: Vec<f64>,
        label: Option<i8>,
        split: Option<SplitTag>,
    }

    let mut rows: Vec<Row> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1; // 1-based data row number
        let record = record.map_err(|_| TsDataError::TimeParse {
            row,
            value: String::new(),
            format: roles.time_format.clone(),
        })?;
        let cell = |idx: usize| record.get(idx).unwrap_or("");

        let ts_text = cell(time_idx);
        let ts = parse_timestamp(ts_text, &roles.time_format).ok_or_else(|| {
            TsDataError::TimeParse {
                row,
                value: ts_text.to_string(),
                format: roles.time_format.clone(),
            }
        })?;

        let mut values = Vec::with_capacity(value_idx.len());
        for (k, &idx) in value_idx.iter().enumerate() {
            let text = cell(idx);
            let v: f64 = text.parse().map_err(|_| TsDataError::NonNumericValue {
                row,
                column: value_names[k].clone(),
                value: text.to_string(),
            })?;
            if !v.is_finite() {
                return Err(TsDataError::NonNumericValue {
                    row,
                    column: value_names[k].clone(),
                    value: text.to_string(),
                });
            }
            values.push(v);
        }

        let label = match label_idx {
            Some(idx) => {
                let text = cell(idx);
                Some(match text {
                    "1" | "+1" => 1i8,
                    "-1" => -1i8,
                    _ => {
                        return Err(TsDataError::BadLabelValue {
                            row,
                            value: text.to_string(),
                        })
                    }
                })
            }
            None => None,
        };
        let split = match split_idx {
            Some(idx) => {
                let text = cell(idx);
                Some(SplitTag::parse(text).ok_or_else(|| TsDataError::UnknownSplitValue {
                    row,
                    value: text.to_string(),
                })?)
            }
            None => None,
        };

        rows.push(Row {
            source_row: row,
            ts,
            values,
            label,
            split,
        });
    }

    rows.sort_by_key(|r| r.ts);
    for w in rows.windows(2) {
        if w[1].ts == w[0].ts {
            return Err(TsDataError::DuplicateTimestamp {
                row: w[1].source_row,
                timestamp: w[1].ts,
            });
        }
    }

    let timestamps: Vec<i64> = rows.iter().map(|r| r.ts).collect();
    let mut columns: IndexMap<String, Vec<f64>> = value_names
        .iter()
        .map(|n| (n.clone(), Vec::with_capacity(rows.len())))
        .collect();
    for r in &rows {
        for (k, &v) in r.values.iter().enumerate() {
            columns[k].push(v);
        }
    }

    let mut frame = MetricFrame::new(timestamps, columns)?;
    if let Some(name) = &roles.label_column {
        let labels = rows.iter().map(|r| r.label.unwrap()).collect();
        frame = frame.with_labels(name, labels)?;
    }
    if let Some(name) = &roles.split_column {
        let splits = rows.iter().map(|r| r.split.unwrap()).collect();
        frame = frame.with_splits(name, splits)?;
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roles(targets: &[&str]) -> ColumnRoles {
        ColumnRoles {
            time_column: "time".into(),
            time_format: "%Y-%m-%d %H:%M:%S".into(),
            target_columns: targets.iter().map(|s| s.to_string()).collect(),
            feature_columns: vec![],
            label_column: None,
            split_column: None,
        }
    }

    #[test]
    fn parses_three_row_csv() {
        let csv = "time,cpu\n2024-01-01 00:00:00,1.5\n2024-01-01 00:01:00,2.0\n2024-01-01 00:02:00,2.5\n";
        let frame = parse_csv(csv.as_bytes(), &roles(&["cpu"])).unwrap();
        assert_eq!(frame.len(), 3);
        assert_eq!(frame.column("cpu").unwrap(), &[1.5, 2.0, 2.5]);
        assert_eq!(frame.timestamps()[0], 1704067200000);
    }

    #[test]
    fn missing_target_column() {
        let csv = "time,cpu\n2024-01-01 00:00:00,1.5\n";
        let err = parse_csv(csv.as_bytes(), &roles(&["memory"])).unwrap_err();
        assert!(matches!(err, TsDataError::MissingColumn(name) if name == "memory"));
    }

    #[test]
    fn out_of_order_rows_are_sorted() {
        let csv = "time,v\n3,30.0\n1,10.0\n2,20.0\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        let frame = parse_csv(csv.as_bytes(), &r).unwrap();
        assert_eq!(frame.timestamps(), &[1, 2, 3]);
        assert_eq!(frame.column("v").unwrap(), &[10.0, 20.0, 30.0]);
    }

    #[test]
    fn duplicate_timestamp_is_error() {
        let csv = "time,v\n1,10.0\n1,20.0\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        assert!(matches!(
            parse_csv(csv.as_bytes(), &r),
            Err(TsDataError::DuplicateTimestamp { .. })
        ));
    }

    #[test]
    fn non_numeric_target_cell_is_error() {
        let csv = "time,v\n1,abc\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        assert!(matches!(
            parse_csv(csv.as_bytes(), &r),
            Err(TsDataError::NonNumericValue { row: 1, .. })
        ));
    }

    #[test]
    fn empty_cell_is_rejected_not_imputed() {
        let csv = "time,v\n1,\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        assert!(matches!(
            parse_csv(csv.as_bytes(), &r),
            Err(TsDataError::NonNumericValue { .. })
        ));
    }

    #[test]
    fn labels_and_splits_parse() {
        let csv = "time,v,y,part\n1,1.0,+1,train\n2,2.0,-1,val\n3,3.0,1,test\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        r.label_column = Some("y".into());
        r.split_column = Some("part".into());
        let frame = parse_csv(csv.as_bytes(), &r).unwrap();
        assert_eq!(frame.labels().unwrap(), &[1, -1, 1]);
        assert_eq!(
            frame.splits().unwrap(),
            &[SplitTag::Train, SplitTag::Val, SplitTag::Test]
        );
    }

    #[test]
    fn bad_label_is_error() {
        let csv = "time,v,y\n1,1.0,2\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        r.label_column = Some("y".into());
        assert!(matches!(
            parse_csv(csv.as_bytes(), &r),
            Err(TsDataError::BadLabelValue { .. })
        ));
    }

    #[test]
    fn unknown_split_tag_is_error() {
        let csv = "time,v,part\n1,1.0,holdout\n";
        let mut r = roles(&["v"]);
        r.time_format = "epoch_ms".into();
        r.split_column = Some("part".into());
        assert!(matches!(
            parse_csv(csv.as_bytes(), &r),
            Err(TsDataError::UnknownSplitValue { .. })
        ));
    }

    #[test]
    fn epoch_seconds_and_tz_formats() {
        assert_eq!(parse_timestamp("10", "epoch_s"), Some(10_000));
        assert_eq!(parse_timestamp("10.5", "epoch_s"), Some(10_500));
        assert_eq!(
            parse_timestamp("2024-01-01 00:00:00 +0100", "%Y-%m-%d %H:%M:%S %z"),
            Some(1704063600000)
        );
        assert_eq!(parse_timestamp("2024-01-01", "%Y-%m-%d"), Some(1704067200000));
        assert_eq!(parse_timestamp("oops", "epoch_ms"), None);
    }
}
