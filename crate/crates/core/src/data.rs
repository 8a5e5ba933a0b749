//! Embedded datasets, CSV ingestion and descriptive summaries.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, quantile_sorted};

/// Failure times (hours) of Kevlar 49/epoxy strands at 90% stress.
const KEVLAR: [f64; 101] = [
    0.02, 0.09, 0.18, 0.19, 0.20, 0.23, 0.24, 0.24, 0.29, 0.34, 0.35, 0.36, 0.38, 0.40, 0.42, 0.43,
    0.52, 0.54, 0.56, 0.60, 0.60, 0.63, 0.65, 0.10, 0.12, 0.67, 0.68, 0.72, 0.72, 0.72, 0.73, 0.03,
    0.04, 0.79, 0.79, 0.80, 0.80, 0.83, 0.85, 0.90, 0.92, 0.10, 0.95, 0.99, 1.00, 1.01, 1.02, 1.03,
    1.05, 1.10, 1.10, 0.07, 1.11, 1.15, 1.18, 1.20, 1.29, 1.31, 1.33, 1.34, 1.40, 0.01, 1.43, 0.11,
    0.11, 1.45, 1.50, 1.51, 1.52, 0.06, 0.08, 1.53, 1.54, 1.54, 0.03, 1.55, 1.58, 1.60, 1.63, 1.64,
    1.80, 0.01, 1.80, 1.81, 2.02, 2.05, 0.09, 0.13, 2.14, 2.17, 2.33, 0.02, 0.05, 3.03, 3.03, 0.07,
    3.34, 4.20, 4.69, 0.02, 7.89,
];

/// Remission times (months) of bladder cancer patients.
const CANCER: [f64; 128] = [
    23.63, 0.40, 2.23, 1.40, 3.02, 4.34, 5.71, 7.93, 11.79, 18.10, 1.46, 4.40, 5.85, 8.26, 11.98,
    19.13, 1.76, 3.25, 4.50, 6.25, 8.37, 12.02, 2.02, 3.31, 4.51, 6.54, 8.53, 12.03, 20.28, 2.02,
    3.36, 6.76, 12.07, 21.73, 2.07, 3.36, 6.93, 8.65, 12.63, 22.69, 0.08, 2.09, 3.48, 4.87, 6.94,
    8.66, 13.11, 0.20, 3.52, 4.98, 6.97, 9.02, 13.29, 2.26, 3.57, 5.06, 7.09, 9.22, 13.80, 25.74,
    0.50, 2.46, 3.64, 5.09, 7.26, 9.47, 14.24, 25.82, 0.51, 2.54, 3.70, 5.17, 7.28, 10.06, 14.77,
    26.31, 0.81, 2.62, 3.82, 5.32, 7.32, 10.06, 14.77, 32.15, 2.64, 3.88, 5.32, 7.39, 10.34, 14.83,
    34.26, 0.90, 2.69, 4.18, 5.34, 7.59, 10.66, 15.96, 36.66, 1.05, 2.69, 4.23, 5.41, 7.62, 10.75,
    16.62, 43.01, 1.19, 2.75, 4.26, 5.41, 7.63, 17.12, 46.12, 1.26, 2.83, 4.33, 5.49, 7.66, 11.25,
    17.14, 79.05, 1.35, 2.87, 5.62, 7.87, 11.64, 17.36,
];

/// Failure times of 50 devices put on a life test.
const DEVICE: [f64; 50] = [
    0.1, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0, 6.0, 7.0, 11.0, 12.0, 18.0, 18.0, 18.0, 18.0,
    18.0, 21.0, 32.0, 36.0, 40.0, 45.0, 46.0, 47.0, 50.0, 55.0, 60.0, 63.0, 63.0, 67.0, 67.0, 67.0,
    67.0, 72.0, 75.0, 79.0, 82.0, 82.0, 83.0, 84.0, 84.0, 84.0, 85.0, 85.0, 85.0, 85.0, 85.0, 86.0,
    86.0,
];

pub const EMBEDDED: [&str; 3] = ["kevlar", "cancer", "device"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<f64>,
    pub source: String,
}

impl Dataset {
    /// Validates that `values` is nonempty and strictly positive.
    pub fn new(name: impl Into<String>, values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("dataset is empty".into()));
        }
        if let Some((i, x)) = values.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Row {
                row: i + 1,
                message: format!("value {x} is not a positive number"),
            });
        }
        Ok(Self {
            name: name.into(),
            values,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn load_embedded(name: &str) -> Result<Dataset> {
    let (values, source): (&[f64], &str) = match name.trim().to_ascii_lowercase().as_str() {
        "kevlar" => (&KEVLAR, "embedded: Kevlar 49/epoxy strand failure times"),
        "cancer" => (&CANCER, "embedded: bladder cancer remission times"),
        "device" => (&DEVICE, "embedded: device failure times"),
        _ => return Err(Error::UnknownDataset(name.to_string())),
    };
    Dataset::new(name.trim().to_ascii_lowercase(), values.to_vec(), source)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    /// Sample variance (`n − 1` denominator).
    pub variance: f64,
    /// `m3 / m2^{3/2}` with population central moments.
    pub skewness: f64,
    /// `m4 / m2²` (not excess).
    pub kurtosis: f64,
}

pub fn describe(dataset: &Dataset) -> DescriptiveStats {
    let sorted = dataset.sorted();
    let n = sorted.len();
    let nf = n as f64;
    let mean = compensated_sum(sorted.iter().copied()) / nf;
    let central = |p: i32| compensated_sum(sorted.iter().map(|x| (x - mean).powi(p))) / nf;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    DescriptiveStats {
        n,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        variance: if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 },
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    }
}

/// Scaled total time on test: `(i/n, T_i)` for `i = 1..n`.
pub fn ttt_transform(dataset: &Dataset) -> Vec<(f64, f64)> {
    let sorted = dataset.sorted();
    let n = sorted.len();
    let total = compensated_sum(sorted.iter().copied());
    let mut partial = 0.0;
    let mut out = Vec::with_capacity(n);
    for (idx, &x) in sorted.iter().enumerate() {
        let i = idx + 1;
        partial += x;
        let t = if i == n {
            1.0
        } else {
            (partial + (n - i) as f64 * x) / total
        };
        out.push((i as f64 / n as f64, t));
    }
    out
}

/// Reads one numeric column. Without `column` the file has no header and the
/// first field of each row is used; with it the named header column is used.
pub fn load_csv(path: &Path, column: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(column.is_some())
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let index = match column {
        Some(name) => reader
            .headers()?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column `{name}` not found")))?,
        None => 0,
    };
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = record.get(index).ok_or_else(|| Error::Row {
            row,
            message: "missing field".into(),
        })?;
        let x: f64 = field.parse().map_err(|_| Error::Row {
            row,
            message: format!("`{field}` is not a number"),
        })?;
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Row {
                row,
                message: format!("value {x} is not positive"),
            });
        }
        values.push(x);
    }
    if values.is_empty() {
        return Err(Error::Data(format!("{} contains no values", path.display())));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::new(name, values, format!("csv: {}", path.display()))
}

/// Writes the values one per line with no header, atomically.
pub fn write_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut body = Vec::new();
    for x in &dataset.values {
        writeln!(body, "{x}")?;
    }
    atomic_write(path, &body)
}

/// Writes through a temporary file in the target directory and renames it.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
