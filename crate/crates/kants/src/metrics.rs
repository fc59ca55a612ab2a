//! Cluster-emergence quantification and multi-run accuracy aggregation.

use std::fmt;

use crate::error::{KantsError, Result};
use crate::grid::CellCoord;

/// Euclidean distance between two cells on the torus: per axis the shorter
/// way around, min(|Δ|, dim−|Δ|), then combined.
pub fn toroidal_distance(a: CellCoord, b: CellCoord, width: usize, height: usize) -> f64 {
    let dx = a.x.abs_diff(b.x).min(width - a.x.abs_diff(b.x)) as f64;
    let dy = a.y.abs_diff(b.y).min(height - a.y.abs_diff(b.y)) as f64;
    (dx * dx + dy * dy).sqrt()
}

/// How tightly classes cluster on the grid. The ratio is the pooled mean
/// intra-class pairwise distance over the mean inter-class pairwise
/// distance: ≈1 for disorder, near 0 for tight well-separated clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessReport {
    /// Mean pairwise distance among ants of each class, in class order;
    /// `None` for classes with fewer than two ants.
    pub per_class: Vec<(String, Option<f64>)>,
    /// Pooled mean over all same-class pairs.
    pub intra_mean: f64,
    /// Mean over all cross-class pairs.
    pub inter_mean: f64,
    /// intra_mean / inter_mean; absent when only one class is present or
    /// the inter mean is zero.
    pub ratio: Option<f64>,
}

/// Pairwise toroidal compactness of labeled ant positions.
pub fn compactness(
    positions: &[CellCoord],
    labels: &[String],
    width: usize,
    height: usize,
) -> Result<CompactnessReport> {
    if positions.len() != labels.len() {
        return Err(KantsError::data(format!(
            "{} positions but {} labels",
            positions.len(),
            labels.len()
        )));
    }
    if positions.len() < 2 {
        return Err(KantsError::data("compactness needs at least two ants"));
    }
    let mut class_order: Vec<String> = labels.to_vec();
    class_order.sort();
    class_order.dedup();

    let mut intra_sum = 0.0;
    let mut intra_n = 0usize;
    let mut inter_sum = 0.0;
    let mut inter_n = 0usize;
    let mut per_class_sum = vec![0.0; class_order.len()];
    let mut per_class_n = vec![0usize; class_order.len()];

    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let d = toroidal_distance(positions[i], positions[j], width, height);
            if labels[i] == labels[j] {
                intra_sum += d;
                intra_n += 1;
                let ci = class_order
                    .iter()
                    .position(|l| *l == labels[i])
                    .expect("label present");
                per_class_sum[ci] += d;
                per_class_n[ci] += 1;
            } else {
                inter_sum += d;
                inter_n += 1;
            }
        }
    }

    let intra_mean = if intra_n > 0 {
        intra_sum / intra_n as f64
    } else {
        0.0
    };
    let inter_mean = if inter_n > 0 {
        inter_sum / inter_n as f64
    } else {
        0.0
    };
    let ratio = if inter_n > 0 && inter_mean > 0.0 {
        Some(intra_mean / inter_mean)
    } else {
        None
    };
    let per_class = class_order
        .into_iter()
        .zip(per_class_n.iter().zip(&per_class_sum))
        .map(|(l, (&n, &s))| (l, if n > 0 { Some(s / n as f64) } else { None }))
        .collect();
    Ok(CompactnessReport {
        per_class,
        intra_mean,
        inter_mean,
        ratio,
    })
}

/// Accuracy aggregation over repeated stochastic runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub best: f64,
    pub mean: f64,
    /// Population standard deviation (divisor n — the protocol is a small
    /// fixed run count, not a sample of a larger one).
    pub stddev: f64,
    pub n_runs: usize,
}

/// Best/mean/stddev over run accuracies. Errors on an empty list.
pub fn aggregate_runs(accuracies: &[f64]) -> Result<RunStats> {
    if accuracies.is_empty() {
        return Err(KantsError::data("no run accuracies to aggregate"));
    }
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let var = accuracies
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / n;
    let best = accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RunStats {
        best,
        mean,
        stddev: var.sqrt(),
        n_runs: accuracies.len(),
    })
}

impl RunStats {
    /// The two-decimal "mean ±std" rendering used in result tables.
    pub fn mean_std(&self) -> String {
        format!("{:.2} ±{:.2}", self.mean, self.stddev)
    }
}

impl fmt::Display for RunStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "best {:.2}, mean {}", self.best, self.mean_std())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: usize, y: usize) -> CellCoord {
        CellCoord::new(x, y)
    }

    #[test]
    fn wraparound_beats_direct_path() {
        assert_eq!(toroidal_distance(c(0, 0), c(0, 9), 10, 10), 1.0);
        assert_eq!(toroidal_distance(c(0, 0), c(5, 0), 10, 10), 5.0);
        let d = toroidal_distance(c(1, 1), c(9, 9), 10, 10);
        assert!((d - (8.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perfect_clusters_have_zero_ratio() {
        let positions = vec![c(0, 0), c(0, 0), c(5, 5), c(5, 5)];
        let labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let r = compactness(&positions, &labels, 10, 10).unwrap();
        assert_eq!(r.intra_mean, 0.0);
        assert_eq!(r.ratio, Some(0.0));
    }

    #[test]
    fn hand_computed_four_ant_case() {
        // intra pairs both distance 1; inter pairs √50, √41, √41, √50
        let positions = vec![c(0, 0), c(1, 0), c(5, 5), c(6, 5)];
        let labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let r = compactness(&positions, &labels, 10, 10).unwrap();
        assert!((r.intra_mean - 1.0).abs() < 1e-12);
        assert!((r.inter_mean - 6.737096024649162).abs() < 1e-12);
        assert!((r.ratio.unwrap() - 0.14843190542947257).abs() < 1e-12);
    }

    #[test]
    fn single_class_reports_absent_ratio() {
        let positions = vec![c(0, 0), c(3, 3), c(6, 6)];
        let labels: Vec<String> = vec!["a".into(), "a".into(), "a".into()];
        let r = compactness(&positions, &labels, 10, 10).unwrap();
        assert!(r.ratio.is_none());
        assert!(r.intra_mean > 0.0);
    }

    #[test]
    fn too_few_ants_is_an_error() {
        assert!(compactness(&[c(0, 0)], &["a".to_string()], 10, 10).is_err());
    }

    #[test]
    fn translation_invariance() {
        let positions = vec![c(0, 0), c(1, 0), c(5, 5), c(6, 5)];
        let labels: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let base = compactness(&positions, &labels, 10, 10).unwrap();
        let shifted: Vec<CellCoord> = positions
            .iter()
            .map(|p| c((p.x + 7) % 10, (p.y + 4) % 10))
            .collect();
        let moved = compactness(&shifted, &labels, 10, 10).unwrap();
        assert!((base.ratio.unwrap() - moved.ratio.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn stats_trivial_cases() {
        let s = aggregate_runs(&[100.0, 100.0]).unwrap();
        assert_eq!((s.best, s.mean, s.stddev), (100.0, 100.0, 0.0));
        let s = aggregate_runs(&[0.0, 100.0]).unwrap();
        assert_eq!((s.mean, s.stddev), (50.0, 50.0));
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn stats_population_stddev_and_format() {
        let s = aggregate_runs(&[98.0, 97.0, 99.0, 98.5, 97.5]).unwrap();
        assert_eq!(s.mean, 98.0);
        assert!((s.stddev - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.mean_std(), "98.00 ±0.71");
        assert_eq!(s.best, 99.0);
    }

    #[test]
    fn stats_permutation_invariant() {
        let a = aggregate_runs(&[90.0, 95.0, 85.0]).unwrap();
        let b = aggregate_runs(&[85.0, 90.0, 95.0]).unwrap();
        assert_eq!(a, b);
    }
}
