//! Ant-based self-organizing grid clustering and classification.
//!
//! Training samples act as ants walking a toroidal grid of feature vectors.
//! Each ant is drawn toward zones whose vectors resemble its own sample and
//! reinforces the cell it lands on, so similar samples carve out shared
//! regions; a mild per-iteration evaporation relaxes the grid back toward
//! its initial state and keeps the process plastic. After enough
//! iterations the colony settles into class-coherent clusters, and the grid
//! itself — cells labeled by their final occupants — serves as a
//! nearest-neighbor classifier for unseen samples.

pub mod classifier;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod ppm;

pub use classifier::{classify, evaluate, knn_baseline, label_cells, LabeledGrid, Prediction};
pub use dataset::{Dataset, Sample, SplitSpec};
pub use engine::{
    decide_where_to_go, default_grid_dim, derive_seed, radius_schedule, train, train_with_history,
    weight, Ant, KantsParams, SigmaSource, TrainedModel,
};
pub use error::{KantsError, Result};
pub use grid::{CellCoord, Grid};
pub use metrics::{aggregate_runs, compactness, toroidal_distance, CompactnessReport, RunStats};
