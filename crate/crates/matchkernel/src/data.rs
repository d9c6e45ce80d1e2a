//! Tabular dataset loading, validation and min-max scaling.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A loaded dataset: numeric feature matrix plus contiguous 0-based labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
    /// Original label values in class-index order (re-indexing record).
    pub label_values: Vec<i64>,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.features.ncols()
    }
}

/// How to find the label column in a CSV file.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// Parses either a 0-based column index or a header name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(idx) => LabelColumn::Index(idx),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

/// Loads a CSV file with numeric features and one label column. Labels are
/// re-indexed to a contiguous 0-based range with the original values
/// recorded in class order.
pub fn load_csv(
    path: &std::path::Path,
    label: &LabelColumn,
    has_header: bool,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut label_idx: Option<usize> = match label {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(_) => None,
    };
    if has_header {
        if let LabelColumn::Name(name) = label {
            let headers = reader.headers()?;
            label_idx = headers.iter().position(|h| h == name);
            if label_idx.is_none() {
                return Err(Error::Config(format!(
                    "label column `{name}` not found in header"
                )));
            }
        }
    } else if matches!(label, LabelColumn::Name(_)) {
        return Err(Error::Config(
            "label column by name requires a header row".into(),
        ));
    }
    let label_idx = label_idx.expect("resolved above");

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        if label_idx >= record.len() {
            return Err(Error::CsvCell {
                row: row_no,
                col: label_idx,
                reason: format!("label column {label_idx} beyond row width {}", record.len()),
            });
        }
        let mut features = Vec::with_capacity(record.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::CsvCell {
                    row: row_no,
                    col,
                    reason: "missing value".into(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::CsvCell {
                row: row_no,
                col,
                reason: format!("non-numeric cell `{cell}`"),
            })?;
            if col == label_idx {
                let rounded = value.round();
                if (value - rounded).abs() > 1e-9 {
                    return Err(Error::CsvCell {
                        row: row_no,
                        col,
                        reason: format!("label `{cell}` is not an integer"),
                    });
                }
                raw_labels.push(rounded as i64);
            } else {
                if !value.is_finite() {
                    return Err(Error::CsvCell {
                        row: row_no,
                        col,
                        reason: "non-finite value".into(),
                    });
                }
                features.push(value);
            }
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(Error::Empty { what: "dataset" });
    }
    let chi = rows[0].len();
    if chi == 0 {
        return Err(Error::Empty {
            what: "feature columns",
        });
    }
    for (row_no, row) in rows.iter().enumerate() {
        if row.len() != chi {
            return Err(Error::CsvCell {
                row: row_no,
                col: row.len(),
                reason: format!("expected {chi} features, got {}", row.len()),
            });
        }
    }

    // Re-index labels to 0..classes in sorted order of original values.
    let mut label_values: Vec<i64> = raw_labels.clone();
    label_values.sort_unstable();
    label_values.dedup();
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|v| label_values.binary_search(v).expect("present"))
        .collect();

    let mut features = Array2::zeros((rows.len(), chi));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[(i, j)] = v;
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Dataset {
        name,
        classes: label_values.len(),
        features,
        labels,
        label_values,
    })
}

/// Per-feature scaling parameters.
#[derive(Debug, Clone)]
pub struct ScalingRecord {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingRecord {
    /// Computes per-column minima and maxima over the given rows.
    pub fn from_rows(features: &ArrayView2<f64>, rows: &[usize]) -> Self {
        let chi = features.ncols();
        let mut min = vec![f64::INFINITY; chi];
        let mut max = vec![f64::NEG_INFINITY; chi];
        for &i in rows {
            for j in 0..chi {
                let v = features[(i, j)];
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    /// Applies the scaling to a full feature matrix. Constant columns map
    /// to zero.
    pub fn apply(&self, features: &ArrayView2<f64>) -> Array2<f64> {
        let mut out = features.to_owned();
        for j in 0..features.ncols() {
            let span = self.max[j] - self.min[j];
            for i in 0..features.nrows() {
                out[(i, j)] = if span == 0.0 {
                    0.0
                } else {
                    (features[(i, j)] - self.min[j]) / span
                };
            }
        }
        out
    }
}

/// Min-max scales every feature column to `[0, 1]` over the full dataset,
/// returning the scaled dataset and the per-feature parameters.
pub fn minmax_scale(ds: &Dataset) -> Result<(Dataset, ScalingRecord)> {
    if ds.samples() < 2 {
        return Err(Error::Config(
            "min-max scaling needs at least 2 samples".into(),
        ));
    }
    let rows: Vec<usize> = (0..ds.samples()).collect();
    let record = ScalingRecord::from_rows(&ds.features.view(), &rows);
    let features = record.apply(&ds.features.view());
    Ok((
        Dataset {
            name: ds.name.clone(),
            features,
            labels: ds.labels.clone(),
            classes: ds.classes,
            label_values: ds.label_values.clone(),
        },
        record,
    ))
}
