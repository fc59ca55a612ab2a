//! CSV ingestion, min-max normalization, and stratified train/test splits.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KantsError, Result};

/// One data row: a raw feature vector plus its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: String,
}

/// A loaded dataset. `labels` is the distinct class set in lexicographic
/// order; all tie-breaking "class order" rules refer to positions in it.
/// `feature_ranges` is present only after [`Dataset::normalize`] and holds
/// the per-feature (min, max) that produced the current values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub nvars: usize,
    pub labels: Vec<String>,
    pub feature_ranges: Option<Vec<(f64, f64)>>,
}

/// How to cut a dataset in two. Splits are always stratified: each class
/// keeps its original proportion on both sides, up to rounding.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    /// Fraction of each class that goes to the training side, in (0,1).
    pub train_fraction: f64,
    pub seed: u64,
}

impl Dataset {
    /// Build a dataset from parsed samples, deriving `nvars` and the label set.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(KantsError::data("dataset has no samples"));
        }
        let nvars = samples[0].features.len();
        if nvars == 0 {
            return Err(KantsError::data("samples have no features"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != nvars {
                return Err(KantsError::data(format!(
                    "sample {} has {} features, expected {}",
                    i,
                    s.features.len(),
                    nvars
                )));
            }
            if s.label.contains(',') || s.label.contains('\n') {
                return Err(KantsError::data(format!(
                    "label {:?} contains a comma or newline",
                    s.label
                )));
            }
        }
        let mut labels: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
        labels.sort();
        labels.dedup();
        Ok(Dataset {
            samples,
            nvars,
            labels,
            feature_ranges: None,
        })
    }

    /// Load a comma-separated file. `label_column` indexes the original row
    /// (default: last column); `ignore_columns` drops columns such as ID
    /// fields before anything else is interpreted. A header line is detected
    /// by any feature cell failing to parse as a number.
    pub fn load_csv(
        path: impl AsRef<Path>,
        label_column: Option<usize>,
        ignore_columns: &[usize],
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| KantsError::io(path, e))?;
        Self::parse_csv(&text, path, label_column, ignore_columns)
    }

    fn parse_csv(
        text: &str,
        path: &Path,
        label_column: Option<usize>,
        ignore_columns: &[usize],
    ) -> Result<Self> {
        let mut samples = Vec::new();
        let mut ncols = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let cols = match ncols {
                Some(n) => {
                    if cells.len() != n {
                        return Err(KantsError::parse(
                            path,
                            lineno + 1,
                            format!("expected {} columns, found {}", n, cells.len()),
                        ));
                    }
                    n
                }
                None => {
                    ncols = Some(cells.len());
                    cells.len()
                }
            };
            let label_idx = label_column.unwrap_or(cols.saturating_sub(1));
            if label_idx >= cols {
                return Err(KantsError::parse(
                    path,
                    lineno + 1,
                    format!("label column {} out of range ({} columns)", label_idx, cols),
                ));
            }
            let mut features = Vec::with_capacity(cols - 1);
            let mut parse_failure = None;
            for (i, cell) in cells.iter().enumerate() {
                if i == label_idx || ignore_columns.contains(&i) {
                    continue;
                }
                match cell.parse::<f64>() {
                    Ok(v) => features.push(v),
                    Err(_) => {
                        parse_failure = Some((i, *cell));
                        break;
                    }
                }
            }
            if let Some((col, cell)) = parse_failure {
                // A non-numeric feature cell on the first line is a header.
                if samples.is_empty() && lineno == 0 {
                    continue;
                }
                return Err(KantsError::parse(
                    path,
                    lineno + 1,
                    format!("column {} is not a number: {:?}", col, cell),
                ));
            }
            samples.push(Sample {
                features,
                label: cells[label_idx].to_string(),
            });
        }
        if samples.is_empty() {
            return Err(KantsError::parse(path, 1, "no data rows"));
        }
        Self::from_samples(samples)
    }

    /// Write the dataset back out with the same schema it was loaded with
    /// (features, then the label as the last column). Feature values use
    /// Rust's shortest round-trip float formatting, so a reload is exact.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for s in &self.samples {
            for v in &s.features {
                out.push_str(&format!("{},", v));
            }
            out.push_str(&s.label);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| KantsError::io(path, e))
    }

    /// Min-max normalize every feature to [0,1]. With `ranges` absent the
    /// ranges are computed from this dataset (the training case); with
    /// `ranges` given (the test case) values are mapped with those ranges
    /// and clamped into [0,1]. A constant feature maps to 0.5 everywhere.
    pub fn normalize(&self, ranges: Option<&[(f64, f64)]>) -> Result<Dataset> {
        let used: Vec<(f64, f64)> = match ranges {
            Some(r) => {
                if r.len() != self.nvars {
                    return Err(KantsError::data(format!(
                        "got {} feature ranges, expected {}",
                        r.len(),
                        self.nvars
                    )));
                }
                r.to_vec()
            }
            None => (0..self.nvars)
                .map(|v| {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for s in &self.samples {
                        lo = lo.min(s.features[v]);
                        hi = hi.max(s.features[v]);
                    }
                    (lo, hi)
                })
                .collect(),
        };
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                features: s
                    .features
                    .iter()
                    .zip(&used)
                    .map(|(&x, &(lo, hi))| {
                        if hi > lo {
                            ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                        } else {
                            0.5
                        }
                    })
                    .collect(),
                label: s.label.clone(),
            })
            .collect();
        Ok(Dataset {
            samples,
            nvars: self.nvars,
            labels: self.labels.clone(),
            feature_ranges: Some(used),
        })
    }

    /// Stratified partition into (train, test). Per class, round(fraction·n)
    /// samples go to train (at least one on each side when the class has two
    /// or more). A single-sample class goes wholly to train with a warning.
    /// Row order within each side follows the original dataset.
    pub fn stratified_split(&self, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
        if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
            return Err(KantsError::invalid(format!(
                "train fraction must be in (0,1), got {}",
                spec.train_fraction
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for label in &self.labels {
            let mut idx: Vec<usize> = (0..self.samples.len())
                .filter(|&i| &self.samples[i].label == label)
                .collect();
            if idx.len() < 2 {
                log::warn!(
                    "class {:?} has only {} sample(s); placing it wholly in train",
                    label,
                    idx.len()
                );
                train_idx.extend(idx);
                continue;
            }
            idx.shuffle(&mut rng);
            let want = (spec.train_fraction * idx.len() as f64).round() as usize;
            let n_train = want.clamp(1, idx.len() - 1);
            train_idx.extend(idx.drain(..n_train));
            test_idx.extend(idx);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let pick = |idx: &[usize]| -> Result<Dataset> {
            Dataset::from_samples(idx.iter().map(|&i| self.samples[i].clone()).collect())
        };
        Ok((pick(&train_idx)?, pick(&test_idx)?))
    }

    /// Position of `label` in the lexicographic class order.
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Per-class sample counts, in class order.
    pub fn class_counts(&self) -> Vec<(String, usize)> {
        self.labels
            .iter()
            .map(|l| {
                (
                    l.clone(),
                    self.samples.iter().filter(|s| &s.label == l).count(),
                )
            })
            .collect()
    }
}
