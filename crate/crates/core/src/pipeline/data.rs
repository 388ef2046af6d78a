use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Iris species in label order.
pub const IRIS_CLASSES: [&str; 3] = ["setosa", "versicolor", "virginica"];

/// The 150-row Iris table shipped with the crate.
pub const IRIS_CSV: &str = include_str!("../../data/iris.csv");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    /// File path, or `bundled:iris.csv`.
    pub source: String,
    /// SHA-256 of the raw file bytes.
    pub sha256: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Feature rows and labels at `indices`.
    pub fn select(&self, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
        (
            indices.iter().map(|&i| self.features[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Species name to label; accepts an optional `Iris-` prefix, any case.
pub fn class_index(name: &str) -> Option<usize> {
    let name = name.trim();
    let name = name.strip_prefix("Iris-").unwrap_or(name);
    IRIS_CLASSES.iter().position(|c| c.eq_ignore_ascii_case(name))
}

pub fn bundled_iris() -> Dataset {
    parse_csv(IRIS_CSV.as_bytes(), "bundled:iris.csv").expect("bundled iris.csv parses")
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    parse_csv(&bytes, &path.display().to_string())
}

/// Parses a headed CSV whose last column is the species label.
///
/// Error rows are file line numbers, so the header is row 1.
pub fn parse_csv(bytes: &[u8], source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(Error::Size("need at least one feature column and a label column".into()));
    }
    let p = header.len() - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Ingestion {
                row,
                column: header[record.len().min(p)].clone(),
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        let mut x = Vec::with_capacity(p);
        for (j, cell) in record.iter().take(p).enumerate() {
            let fail = |message: String| Error::Ingestion { row, column: header[j].clone(), message };
            if cell.is_empty() {
                return Err(fail("missing value".into()));
            }
            let v: f64 = cell.parse().map_err(|_| fail(format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(fail(format!("non-finite value {cell:?}")));
            }
            x.push(v);
        }
        let label = &record[p];
        if label.is_empty() {
            return Err(Error::Ingestion { row, column: header[p].clone(), message: "missing label".into() });
        }
        labels.push(class_index(label).ok_or_else(|| Error::Label(label.to_string()))?);
        features.push(x);
    }
    if features.is_empty() {
        return Err(Error::Size(format!("{source} has no data rows")));
    }
    Ok(Dataset {
        features,
        labels,
        feature_names: header[..p].to_vec(),
        class_names: IRIS_CLASSES.iter().map(|c| c.to_string()).collect(),
        source: source.to_string(),
        sha256: sha256_hex(bytes),
    })
}
