//! Classification with a trained grid, plus a classical KNN baseline for
//! side-by-side comparison.

use std::collections::HashMap;

use crate::dataset::Dataset;
use crate::engine::TrainedModel;
use crate::error::{KantsError, Result};
use crate::grid::{CellCoord, Grid};

/// A trained grid with class labels attached to the cells that hosted ants
/// when training ended. Only those cells participate in classification.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGrid {
    pub grid: Grid,
    /// Row-major, one entry per cell; `None` for unoccupied cells.
    pub cell_labels: Vec<Option<String>>,
    /// The training label set in class order (lexicographic).
    pub labels: Vec<String>,
}

/// Outcome of classifying one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// Distances to the K neighbors consulted, ascending.
    pub neighbor_distances: Vec<f64>,
    /// Votes per class in class order; they sum to K.
    pub votes: Vec<(String, usize)>,
}

/// Accuracy plus per-sample records, ready for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Percentage of correct predictions, 0..=100.
    pub accuracy: f64,
    /// (sample_index, true_label, predicted_label, correct)
    pub records: Vec<(usize, String, String, bool)>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl LabeledGrid {
    /// Labeled cells with their coordinates, in row-major order.
    pub fn labeled_cells(&self) -> impl Iterator<Item = (CellCoord, &str)> + '_ {
        self.grid
            .coords()
            .zip(&self.cell_labels)
            .filter_map(|(c, l)| l.as_deref().map(|l| (c, l)))
    }

    pub fn labeled_count(&self) -> usize {
        self.cell_labels.iter().filter(|l| l.is_some()).count()
    }
}

/// Attach classes to cells by final ant occupancy: each occupied cell takes
/// the majority class of its occupants; a tied cell takes the class of the
/// tied-class occupant whose vector is nearest (Euclidean) to the cell's
/// current vector, with exact ties falling back to class order.
pub fn label_cells(model: &TrainedModel) -> Result<LabeledGrid> {
    if model.ants.is_empty() {
        return Err(KantsError::data("model has no ants"));
    }
    let grid = &model.grid;
    let mut occupants: HashMap<CellCoord, Vec<usize>> = HashMap::new();
    for (i, ant) in model.ants.iter().enumerate() {
        occupants.entry(ant.position).or_default().push(i);
    }
    let mut labels: Vec<String> = model.ants.iter().map(|a| a.label.clone()).collect();
    labels.sort();
    labels.dedup();

    let mut cell_labels = vec![None; grid.width() * grid.height()];
    for (coord, ants_here) in occupants {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for &i in &ants_here {
            *counts.entry(model.ants[i].label.as_str()).or_insert(0) += 1;
        }
        let top = *counts.values().max().expect("occupied cell has votes");
        let mut tied: Vec<&str> = counts
            .iter()
            .filter(|(_, &n)| n == top)
            .map(|(&l, _)| l)
            .collect();
        tied.sort(); // class order for the final fallback
        let winner = if tied.len() == 1 {
            tied[0].to_string()
        } else {
            let cell_vec = grid.cell(coord);
            let mut best: Option<(f64, &str)> = None;
            for &label in &tied {
                let nearest = ants_here
                    .iter()
                    .filter(|&&i| model.ants[i].label == label)
                    .map(|&i| euclidean(&model.ants[i].vector, cell_vec))
                    .fold(f64::INFINITY, f64::min);
                match best {
                    None => best = Some((nearest, label)),
                    Some((bd, _)) if nearest < bd => best = Some((nearest, label)),
                    _ => {}
                }
            }
            best.expect("tied set is nonempty").1.to_string()
        };
        cell_labels[coord.y * grid.width() + coord.x] = Some(winner);
    }
    Ok(LabeledGrid {
        grid: grid.clone(),
        cell_labels,
        labels,
    })
}

/// Shared vote resolution: given the K selected (distance, class) neighbors,
/// pick the plurality class; break vote ties by summed inverse distance
/// (a zero-distance neighbor makes its class unbeatable), then class order.
fn resolve_votes(
    neighbors: &[(f64, &str)],
    class_order: &[String],
) -> (String, Vec<(String, usize)>) {
    let mut votes: Vec<(String, usize)> = class_order.iter().map(|l| (l.clone(), 0)).collect();
    for (_, label) in neighbors {
        if let Some(v) = votes.iter_mut().find(|(l, _)| l == label) {
            v.1 += 1;
        }
    }
    let top = votes.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let tied: Vec<&String> = votes
        .iter()
        .filter(|(_, n)| *n == top)
        .map(|(l, _)| l)
        .collect();
    let winner = if tied.len() == 1 {
        tied[0].clone()
    } else {
        // summed inverse distance per tied class; 1/0 = +inf wins outright
        let mut best: Option<(f64, &String)> = None;
        for label in tied {
            let mass: f64 = neighbors
                .iter()
                .filter(|(_, l)| l == label)
                .map(|(d, _)| if *d > 0.0 { 1.0 / d } else { f64::INFINITY })
                .sum();
            match best {
                None => best = Some((mass, label)),
                Some((bm, _)) if mass > bm => best = Some((mass, label)),
                _ => {} // equal mass: earlier label wins (class order)
            }
        }
        best.expect("tie set nonempty").1.clone()
    };
    (winner, votes)
}

/// Classify one normalized sample against the K nearest labeled cells,
/// nearest by Euclidean distance between the sample and the cells' CURRENT
/// vectors (feature space, not grid space).
pub fn classify(sample: &[f64], lg: &LabeledGrid, k: usize) -> Result<Prediction> {
    if k == 0 {
        return Err(KantsError::invalid("k must be >= 1"));
    }
    let n_labeled = lg.labeled_count();
    if k > n_labeled {
        return Err(KantsError::invalid(format!(
            "k={} exceeds the {} labeled cells",
            k, n_labeled
        )));
    }
    if sample.len() != lg.grid.nvars() {
        return Err(KantsError::data(format!(
            "sample has {} features, grid has {}",
            sample.len(),
            lg.grid.nvars()
        )));
    }
    // (distance, y, x) sort gives a deterministic K-set under ties.
    let mut scored: Vec<(f64, CellCoord, &str)> = lg
        .labeled_cells()
        .map(|(c, l)| (euclidean(sample, lg.grid.cell(c)), c, l))
        .collect();
    scored.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| (a.1.y, a.1.x).cmp(&(b.1.y, b.1.x)))
    });
    let neighbors: Vec<(f64, &str)> = scored[..k].iter().map(|&(d, _, l)| (d, l)).collect();
    let (label, votes) = resolve_votes(&neighbors, &lg.labels);
    Ok(Prediction {
        label,
        neighbor_distances: neighbors.iter().map(|(d, _)| *d).collect(),
        votes,
    })
}

/// Alternative classification mode: K nearest final ANT vectors instead of
/// labeled cell vectors. Kept for comparing the two labeling readings.
pub fn classify_by_ants(sample: &[f64], model: &TrainedModel, k: usize) -> Result<Prediction> {
    if k == 0 || k > model.ants.len() {
        return Err(KantsError::invalid(format!(
            "k={} invalid for {} ants",
            k,
            model.ants.len()
        )));
    }
    let mut labels: Vec<String> = model.ants.iter().map(|a| a.label.clone()).collect();
    labels.sort();
    labels.dedup();
    let class_idx = |l: &str| -> usize { labels.iter().position(|x| x == l).expect("known label") };
    let mut scored: Vec<(f64, usize, &str)> = model
        .ants
        .iter()
        .map(|a| {
            let d = euclidean(sample, &a.vector);
            (d, class_idx(&a.label), a.label.as_str())
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let neighbors: Vec<(f64, &str)> = scored[..k].iter().map(|&(d, _, l)| (d, l)).collect();
    let (label, votes) = resolve_votes(&neighbors, &labels);
    Ok(Prediction {
        label,
        neighbor_distances: neighbors.iter().map(|(d, _)| *d).collect(),
        votes,
    })
}

/// Classic KNN over the raw training vectors. Both sets must be normalized
/// with the training ranges. The neighbor sort key is (distance, class
/// index), never the input position, so training-order permutations cannot
/// change any prediction.
pub fn knn_baseline(train: &Dataset, test: &Dataset, k: usize) -> Result<f64> {
    if k == 0 || k > train.samples.len() {
        return Err(KantsError::invalid(format!(
            "k={} invalid for {} training samples",
            k,
            train.samples.len()
        )));
    }
    if test.samples.is_empty() {
        return Err(KantsError::data("test set is empty"));
    }
    if train.nvars != test.nvars {
        return Err(KantsError::data(format!(
            "train has {} features, test has {}",
            train.nvars, test.nvars
        )));
    }
    let mut correct = 0usize;
    for s in &test.samples {
        let mut scored: Vec<(f64, usize, &str)> = train
            .samples
            .iter()
            .map(|t| {
                let d = euclidean(&s.features, &t.features);
                let ci = train.label_index(&t.label).expect("label in label set");
                (d, ci, t.label.as_str())
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let neighbors: Vec<(f64, &str)> = scored[..k].iter().map(|&(d, _, l)| (d, l)).collect();
        let (label, _) = resolve_votes(&neighbors, &train.labels);
        if label == s.label {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / test.samples.len() as f64)
}

/// Classify every test sample against the labeled grid and report accuracy
/// plus per-sample records.
pub fn evaluate(lg: &LabeledGrid, test: &Dataset, k: usize) -> Result<Evaluation> {
    if test.samples.is_empty() {
        return Err(KantsError::data("test set is empty"));
    }
    let mut records = Vec::with_capacity(test.samples.len());
    let mut correct = 0usize;
    for (i, s) in test.samples.iter().enumerate() {
        let pred = classify(&s.features, lg, k)?;
        let ok = pred.label == s.label;
        if ok {
            correct += 1;
        }
        records.push((i, s.label.clone(), pred.label, ok));
    }
    Ok(Evaluation {
        accuracy: 100.0 * correct as f64 / test.samples.len() as f64,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use crate::engine::{Ant, KantsParams};

    /// Hand-built 4x4 labeled grid, nvars=2: cell vectors ramp along x.
    fn toy_labeled() -> LabeledGrid {
        let mut cells = Vec::new();
        for y in 0..4 {
            for x in 0..4 {
                cells.extend_from_slice(&[x as f64 / 3.0, y as f64 / 3.0]);
            }
        }
        let grid = Grid::from_cells(4, 4, 2, cells.clone(), cells).unwrap();
        let mut cell_labels = vec![None; 16];
        cell_labels[0] = Some("a".to_string()); // (0,0) vector [0,0]
        cell_labels[3] = Some("b".to_string()); // (3,0) vector [1,0]
        cell_labels[12] = Some("a".to_string()); // (0,3) vector [0,1]
        cell_labels[15] = Some("b".to_string()); // (3,3) vector [1,1]
        LabeledGrid {
            grid,
            cell_labels,
            labels: vec!["a".to_string(), "b".to_string()],
        }
    }

    fn toy_model(positions_labels: &[((usize, usize), &str, [f64; 2])]) -> TrainedModel {
        let cells = vec![0.5; 5 * 5 * 2];
        let grid = Grid::from_cells(5, 5, 2, cells.clone(), cells).unwrap();
        let ants: Vec<Ant> = positions_labels
            .iter()
            .map(|&((x, y), l, v)| Ant {
                vector: v.to_vec(),
                label: l.to_string(),
                position: CellCoord::new(x, y),
            })
            .collect();
        let initial_positions = ants.iter().map(|a| a.position).collect();
        TrainedModel {
            grid,
            ants,
            params: KantsParams {
                grid_x: 5,
                grid_y: 5,
                cr: 1,
                ..KantsParams::default()
            },
            initial_positions,
            history: Vec::new(),
        }
    }

    #[test]
    fn exact_match_returns_cell_label() {
        let lg = toy_labeled();
        for (c, l) in lg.labeled_cells() {
            let p = classify(lg.grid.cell(c), &lg, 1).unwrap();
            assert_eq!(p.label, l);
            assert_eq!(p.neighbor_distances[0], 0.0);
        }
    }

    #[test]
    fn votes_sum_to_k() {
        let lg = toy_labeled();
        for k in 1..=4 {
            let p = classify(&[0.4, 0.6], &lg, k).unwrap();
            let total: usize = p.votes.iter().map(|(_, n)| n).sum();
            assert_eq!(total, k);
        }
    }

    #[test]
    fn k_larger_than_labeled_cells_errors() {
        let lg = toy_labeled();
        assert!(classify(&[0.5, 0.5], &lg, 5).is_err());
        assert!(classify(&[0.5, 0.5], &lg, 0).is_err());
    }

    #[test]
    fn singleton_cells_take_their_ant_class() {
        let model = toy_model(&[((0, 0), "a", [0.1, 0.1]), ((2, 2), "b", [0.9, 0.9])]);
        let lg = label_cells(&model).unwrap();
        assert_eq!(lg.labeled_count(), 2);
        let got: Vec<(CellCoord, &str)> = lg.labeled_cells().collect();
        assert_eq!(got[0], (CellCoord::new(0, 0), "a"));
        assert_eq!(got[1], (CellCoord::new(2, 2), "b"));
    }

    #[test]
    fn strict_majority_wins_cell() {
        let model = toy_model(&[
            ((1, 1), "a", [0.2, 0.2]),
            ((1, 1), "a", [0.3, 0.3]),
            ((1, 1), "b", [0.9, 0.9]),
        ]);
        let lg = label_cells(&model).unwrap();
        let (_, label) = lg.labeled_cells().next().unwrap();
        assert_eq!(label, "a");
    }

    #[test]
    fn tied_cell_goes_to_nearest_ant_class() {
        // cell vector is [0.5,0.5]; b's ant is closer to it
        let model = toy_model(&[((1, 1), "a", [0.0, 0.0]), ((1, 1), "b", [0.6, 0.6])]);
        let lg = label_cells(&model).unwrap();
        let (_, label) = lg.labeled_cells().next().unwrap();
        assert_eq!(label, "b");
    }

    #[test]
    fn knn_self_test_is_perfect() {
        let d = Dataset::from_samples(
            (0..10)
                .map(|i| Sample {
                    features: vec![i as f64 / 10.0, (9 - i) as f64 / 10.0],
                    label: if i < 5 { "x" } else { "y" }.to_string(),
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(knn_baseline(&d, &d, 1).unwrap(), 100.0);
    }

    #[test]
    fn knn_two_point_hand_case() {
        let train = Dataset::from_samples(vec![
            Sample {
                features: vec![0.0],
                label: "lo".into(),
            },
            Sample {
                features: vec![1.0],
                label: "hi".into(),
            },
        ])
        .unwrap();
        let test = Dataset::from_samples(vec![Sample {
            features: vec![0.3],
            label: "lo".into(),
        }])
        .unwrap();
        assert_eq!(knn_baseline(&train, &test, 1).unwrap(), 100.0);
    }

    #[test]
    fn knn_is_training_order_invariant() {
        let mk = |order: &[usize]| {
            let rows = [
                (vec![0.1, 0.1], "a"),
                (vec![0.1, 0.2], "a"),
                (vec![0.5, 0.5], "b"), // equidistant pair from the query below
                (vec![0.5, 0.5], "c"),
                (vec![0.9, 0.9], "c"),
            ];
            Dataset::from_samples(
                order
                    .iter()
                    .map(|&i| Sample {
                        features: rows[i].0.clone(),
                        label: rows[i].1.to_string(),
                    })
                    .collect(),
            )
            .unwrap()
        };
        let test = Dataset::from_samples(vec![Sample {
            features: vec![0.5, 0.5],
            label: "b".into(),
        }])
        .unwrap();
        let a = knn_baseline(&mk(&[0, 1, 2, 3, 4]), &test, 1).unwrap();
        let b = knn_baseline(&mk(&[4, 3, 2, 1, 0]), &test, 1).unwrap();
        let c = knn_baseline(&mk(&[2, 0, 4, 1, 3]), &test, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn evaluate_empty_test_errors() {
        let lg = toy_labeled();
        let empty = Dataset {
            samples: vec![],
            nvars: 2,
            labels: vec!["a".into()],
            feature_ranges: None,
        };
        assert!(evaluate(&lg, &empty, 1).is_err());
    }

    #[test]
    fn evaluate_all_correct_is_hundred() {
        let lg = toy_labeled();
        let test = Dataset::from_samples(vec![
            Sample {
                features: vec![0.0, 0.0],
                label: "a".into(),
            },
            Sample {
                features: vec![1.0, 0.0],
                label: "b".into(),
            },
        ])
        .unwrap();
        let ev = evaluate(&lg, &test, 1).unwrap();
        assert_eq!(ev.accuracy, 100.0);
        assert!(ev.records.iter().all(|r| r.3));
    }

    #[test]
    fn classify_by_ants_matches_nearest_ant() {
        let model = toy_model(&[((0, 0), "a", [0.1, 0.1]), ((2, 2), "b", [0.9, 0.9])]);
        let p = classify_by_ants(&[0.2, 0.2], &model, 1).unwrap();
        assert_eq!(p.label, "a");
    }
}
