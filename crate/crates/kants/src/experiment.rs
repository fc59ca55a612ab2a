//! Multi-run experiment protocols: the repeated-seed classification
//! protocol, the β–δ sweep, and the full table reproduction. Individual
//! runs are independent and fan out over a thread pool; everything is
//! deterministic given the master seed.

use rayon::prelude::*;

use crate::classifier::{evaluate, knn_baseline, label_cells};
use crate::dataset::{Dataset, SplitSpec};
use crate::engine::{derive_seed, train, KantsParams};
use crate::error::{KantsError, Result};
use crate::grid::CellCoord;
use crate::metrics::{aggregate_runs, compactness, RunStats};

/// One training+evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub seed: u64,
    pub accuracy: f64,
    /// Compactness ratio of the initial random placement (absent for
    /// single-class training sets).
    pub initial_ratio: Option<f64>,
    /// Compactness ratio of the final placement.
    pub final_ratio: Option<f64>,
    /// Final ant positions with class indices (class order), for rendering.
    pub positions: Vec<(CellCoord, usize)>,
}

/// Train on `train_set` and score on `test_set`; both must already be
/// normalized with the training ranges.
pub fn run_once(
    train_set: &Dataset,
    test_set: &Dataset,
    params: &KantsParams,
) -> Result<RunOutcome> {
    let model = train(train_set, params)?;
    let labeled = label_cells(&model)?;
    let ev = evaluate(&labeled, test_set, params.k)?;
    let labels: Vec<String> = model.ants.iter().map(|a| a.label.clone()).collect();
    let final_positions: Vec<CellCoord> = model.ants.iter().map(|a| a.position).collect();
    let initial_ratio = compactness(
        &model.initial_positions,
        &labels,
        params.grid_x,
        params.grid_y,
    )?
    .ratio;
    let final_ratio = compactness(&final_positions, &labels, params.grid_x, params.grid_y)?.ratio;
    let class_index = |l: &str| {
        train_set
            .label_index(l)
            .expect("ant label comes from the training set")
    };
    Ok(RunOutcome {
        seed: params.seed,
        accuracy: ev.accuracy,
        initial_ratio,
        final_ratio,
        positions: model
            .ants
            .iter()
            .map(|a| (a.position, class_index(&a.label)))
            .collect(),
    })
}

/// Result of the repeated-seed protocol on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub stats: RunStats,
    pub knn_accuracy: f64,
    pub runs: Vec<RunOutcome>,
    pub train_size: usize,
    pub test_size: usize,
}

/// The repeated-run protocol: one stratified split of `raw` (stream 0 of the
/// master seed), then `n_runs` independent trainings (streams 1..=n) scored
/// on the held-out side, plus a KNN baseline on the same split. Runs execute
/// in parallel; results are ordered by run index.
pub fn protocol(
    raw: &Dataset,
    train_fraction: f64,
    n_runs: usize,
    master_seed: u64,
    base: &KantsParams,
) -> Result<ProtocolResult> {
    if n_runs == 0 {
        return Err(KantsError::invalid("protocol needs at least one run"));
    }
    let (train_raw, test_raw) = raw.stratified_split(&SplitSpec {
        train_fraction,
        seed: derive_seed(master_seed, 0),
    })?;
    let train_norm = train_raw.normalize(None)?;
    let ranges = train_norm
        .feature_ranges
        .clone()
        .expect("normalize sets ranges");
    let test_norm = test_raw.normalize(Some(&ranges))?;
    let sized = base.clone().with_grid_for(train_norm.samples.len());
    sized.validate()?; // fail before any run starts, not inside the pool

    let runs: Vec<RunOutcome> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let params = KantsParams {
                seed: derive_seed(master_seed, 1 + i as u64),
                ..sized.clone()
            };
            run_once(&train_norm, &test_norm, &params)
        })
        .collect::<Result<_>>()?;

    let stats = aggregate_runs(&runs.iter().map(|r| r.accuracy).collect::<Vec<_>>())?;
    let knn_accuracy = knn_baseline(&train_norm, &test_norm, sized.k)?;
    Ok(ProtocolResult {
        stats,
        knn_accuracy,
        runs,
        train_size: train_norm.samples.len(),
        test_size: test_norm.samples.len(),
    })
}

/// One sweep grid point outcome (also one CSV row).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub beta: f64,
    pub delta: f64,
    pub seed: u64,
    pub final_ratio: Option<f64>,
    pub accuracy: f64,
    pub positions: Vec<(CellCoord, usize)>,
    pub grid_x: usize,
    pub grid_y: usize,
    pub n_classes: usize,
}

/// β–δ parameter sweep. One shared 50/50 split of `raw` keeps points
/// comparable; every (β, δ, run) triple trains independently in parallel.
/// Rows come back in (β outer, δ inner, run innermost) order.
pub fn sweep(
    raw: &Dataset,
    betas: &[f64],
    deltas: &[f64],
    runs_per_point: usize,
    master_seed: u64,
    base: &KantsParams,
) -> Result<Vec<SweepRun>> {
    if betas.is_empty() || deltas.is_empty() {
        return Err(KantsError::invalid(
            "sweep needs at least one beta and one delta",
        ));
    }
    if runs_per_point == 0 {
        return Err(KantsError::invalid(
            "sweep needs at least one run per point",
        ));
    }
    let (train_raw, test_raw) = raw.stratified_split(&SplitSpec {
        train_fraction: 0.5,
        seed: derive_seed(master_seed, 0),
    })?;
    let train_norm = train_raw.normalize(None)?;
    let ranges = train_norm
        .feature_ranges
        .clone()
        .expect("normalize sets ranges");
    let test_norm = test_raw.normalize(Some(&ranges))?;
    let sized = base.clone().with_grid_for(train_norm.samples.len());
    sized.validate()?; // fail before any run starts, not inside the pool
    let n_classes = train_norm.labels.len();

    let jobs: Vec<(f64, f64, u64)> = betas
        .iter()
        .enumerate()
        .flat_map(|(bi, &beta)| {
            deltas.iter().enumerate().flat_map(move |(di, &delta)| {
                (0..runs_per_point).map(move |r| {
                    let stream = 1 + ((bi * deltas.len() + di) * runs_per_point + r) as u64;
                    (beta, delta, derive_seed(master_seed, stream))
                })
            })
        })
        .collect();

    jobs.into_par_iter()
        .map(|(beta, delta, seed)| {
            let params = KantsParams {
                beta,
                delta,
                seed,
                ..sized.clone()
            };
            let out = run_once(&train_norm, &test_norm, &params)?;
            Ok(SweepRun {
                beta,
                delta,
                seed,
                final_ratio: out.final_ratio,
                accuracy: out.accuracy,
                positions: out.positions,
                grid_x: params.grid_x,
                grid_y: params.grid_y,
                n_classes,
            })
        })
        .collect()
}

/// Render sweep rows as the documented CSV (`beta,delta,seed,final_ratio,accuracy`).
pub fn sweep_csv(rows: &[SweepRun]) -> String {
    let mut out = String::from("beta,delta,seed,final_ratio,accuracy\n");
    for r in rows {
        let ratio = r
            .final_ratio
            .map(|x| format!("{}", x))
            .unwrap_or_else(|| "NA".to_string());
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.beta, r.delta, r.seed, ratio, r.accuracy
        ));
    }
    out
}

/// One row of the reproduction report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproRow {
    /// e.g. `iris-50tra-50tst-set1`
    pub name: String,
    pub stats: RunStats,
    pub knn_accuracy: f64,
}

/// Full table reproduction: `n_sets` independent split pairs per fraction
/// in {0.5, 0.9}, the repeated-seed protocol on each. Row order: all sets at
/// 50/50 first, then at 90/10.
pub fn reproduce(
    raw: &Dataset,
    dataset_name: &str,
    n_sets: usize,
    n_runs: usize,
    master_seed: u64,
    base: &KantsParams,
) -> Result<Vec<ReproRow>> {
    let mut rows = Vec::new();
    for (f_idx, &fraction) in [0.5, 0.9].iter().enumerate() {
        for set in 0..n_sets {
            let sub_master = derive_seed(master_seed, (f_idx * n_sets + set) as u64);
            let res = protocol(raw, fraction, n_runs, sub_master, base)?;
            let pct = (fraction * 100.0).round() as usize;
            rows.push(ReproRow {
                name: format!(
                    "{}-{}tra-{}tst-set{}",
                    dataset_name,
                    pct,
                    100 - pct,
                    set + 1
                ),
                stats: res.stats,
                knn_accuracy: res.knn_accuracy,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two well-separated Gaussian-ish blobs in [0,1]²; trivially separable,
    /// so the whole pipeline should score near 100%.
    fn blobs(n_per_class: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::new();
        for (cx, cy, label) in [(0.25, 0.25, "low"), (0.75, 0.75, "high")] {
            for _ in 0..n_per_class {
                let x: f64 = cx + (rng.gen::<f64>() - 0.5) * 0.2;
                let y: f64 = cy + (rng.gen::<f64>() - 0.5) * 0.2;
                samples.push(Sample {
                    features: vec![x, y],
                    label: label.to_string(),
                });
            }
        }
        Dataset::from_samples(samples).unwrap()
    }

    #[test]
    fn protocol_is_deterministic_and_accurate_on_blobs() {
        let raw = blobs(30, 7);
        let base = KantsParams {
            iterations: 30,
            ..KantsParams::default()
        };
        let a = protocol(&raw, 0.5, 3, 42, &base).unwrap();
        let b = protocol(&raw, 0.5, 3, 42, &base).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train_size, 30);
        assert_eq!(a.test_size, 30);
        assert_eq!(a.runs.len(), 3);
        assert!(a.stats.mean > 90.0, "blobs should be easy: {:?}", a.stats);
        assert!(a.knn_accuracy > 90.0);
    }

    #[test]
    fn protocol_run_seeds_differ() {
        let raw = blobs(15, 3);
        let base = KantsParams {
            iterations: 10,
            ..KantsParams::default()
        };
        let res = protocol(&raw, 0.5, 3, 9, &base).unwrap();
        assert_ne!(res.runs[0].seed, res.runs[1].seed);
        assert_ne!(res.runs[1].seed, res.runs[2].seed);
    }

    #[test]
    fn sweep_has_expected_cardinality_and_rerun_identity() {
        let raw = blobs(12, 1);
        let base = KantsParams {
            iterations: 10,
            ..KantsParams::default()
        };
        let rows = sweep(&raw, &[1.0, 2.0], &[0.1, 0.5, 1.0], 2, 5, &base).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        let again = sweep(&raw, &[1.0, 2.0], &[0.1, 0.5, 1.0], 2, 5, &base).unwrap();
        assert_eq!(rows, again);
        // CSV row order: beta outer, delta inner, run innermost
        let csv = sweep_csv(&rows);
        let first_two: Vec<&str> = csv.lines().skip(1).take(2).collect();
        assert!(first_two[0].starts_with("1,0.1,"));
        assert!(first_two[1].starts_with("1,0.1,"));
        assert_ne!(first_two[0], first_two[1], "different run seeds");
    }

    #[test]
    fn reproduce_emits_named_rows() {
        let raw = blobs(10, 2);
        let base = KantsParams {
            iterations: 5,
            ..KantsParams::default()
        };
        let rows = reproduce(&raw, "blobs", 2, 2, 11, &base).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "blobs-50tra-50tst-set1",
                "blobs-50tra-50tst-set2",
                "blobs-90tra-10tst-set1",
                "blobs-90tra-10tst-set2",
            ]
        );
    }
}
