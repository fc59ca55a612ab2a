//! The training loop: ant placement, the decide-where-to-go rule, the
//! radius schedule, and per-iteration update/evaporation orchestration.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{KantsError, Result};
use crate::grid::{CellCoord, Grid};

/// Which vector σ compares against a candidate zone's centroid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaSource {
    /// The ant's own sample vector (default: ants seek zones similar to
    /// themselves).
    AntVector,
    /// The vector of the cell the ant currently stands on (alternative
    /// reading, kept for comparison).
    CellVector,
}

impl SigmaSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SigmaSource::AntVector => "ant",
            SigmaSource::CellVector => "cell",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ant" => Ok(SigmaSource::AntVector),
            "cell" => Ok(SigmaSource::CellVector),
            other => Err(KantsError::invalid(format!(
                "sigma source must be `ant` or `cell`, got {:?}",
                other
            ))),
        }
    }
}

/// The full hyperparameter set for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct KantsParams {
    /// Exponent of the weighting function; ≥ 0.
    pub beta: f64,
    /// Sensory term of the weighting function; ≥ 0. δ=0 flattens W to 1.
    pub delta: f64,
    /// Exploit/explore balance in [0,1]: with probability q0 the best
    /// candidate is taken, otherwise the roulette wheel decides.
    pub q0: f64,
    /// Learning rate in (0,1], constant over training.
    pub alpha: f64,
    /// Evaporation rate in [0,1].
    pub rho: f64,
    /// Initial movement radius (decays to 1 over the run).
    pub nr0: usize,
    /// Centroid radius.
    pub cr: usize,
    pub iterations: usize,
    pub grid_x: usize,
    pub grid_y: usize,
    /// Neighbors consulted at classification time.
    pub k: usize,
    pub seed: u64,
    pub sigma_source: SigmaSource,
}

impl Default for KantsParams {
    fn default() -> Self {
        KantsParams {
            // β,δ defaults come from the shipped sweep (see README): selected
            // for the best mean hold-out accuracy across ten master seeds of
            // the ten-run iris protocol.
            beta: 8.0,
            delta: 2.0,
            q0: 0.9,
            alpha: 1.0,
            rho: 0.1,
            nr0: 1,
            cr: 3,
            iterations: 100,
            grid_x: 0,
            grid_y: 0,
            k: 1,
            seed: 1,
            sigma_source: SigmaSource::AntVector,
        }
    }
}

/// Default square grid side for `n` training samples: max(10, ⌈2·√n⌉),
/// about four cells per ant.
pub fn default_grid_dim(n: usize) -> usize {
    10usize.max((2.0 * (n as f64).sqrt()).ceil() as usize)
}

impl KantsParams {
    /// Fill in the default grid dimensions for a training set of `n` samples
    /// wherever they are still unset (zero).
    pub fn with_grid_for(mut self, n: usize) -> Self {
        if self.grid_x == 0 {
            self.grid_x = default_grid_dim(n);
        }
        if self.grid_y == 0 {
            self.grid_y = default_grid_dim(n);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(KantsError::invalid(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if self.delta < 0.0 || !self.delta.is_finite() {
            return Err(KantsError::invalid(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return Err(KantsError::invalid(format!(
                "q0 must be in [0,1], got {}",
                self.q0
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(KantsError::invalid(format!(
                "alpha must be in (0,1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(KantsError::invalid(format!(
                "rho must be in [0,1], got {}",
                self.rho
            )));
        }
        if self.grid_x < 3 || self.grid_y < 3 {
            return Err(KantsError::invalid(format!(
                "grid must be at least 3x3, got {}x{}",
                self.grid_x, self.grid_y
            )));
        }
        let min_dim = self.grid_x.min(self.grid_y);
        if self.nr0 < 1 {
            return Err(KantsError::invalid("nr0 must be >= 1"));
        }
        if 2 * self.nr0 + 1 > min_dim {
            return Err(KantsError::invalid(format!(
                "nr0 {} too large for a {}x{} grid",
                self.nr0, self.grid_x, self.grid_y
            )));
        }
        if 2 * self.cr + 1 > min_dim {
            return Err(KantsError::invalid(format!(
                "cr {} too large for a {}x{} grid",
                self.cr, self.grid_x, self.grid_y
            )));
        }
        if self.k < 1 {
            return Err(KantsError::invalid("k must be >= 1"));
        }
        Ok(())
    }
}

/// A training sample embodied as a mobile agent. The label rides along for
/// later cell labeling but is never consulted during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Ant {
    pub vector: Vec<f64>,
    pub label: String,
    pub position: CellCoord,
}

/// One recorded snapshot of every ant's position.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFrame {
    pub iteration: usize,
    pub positions: Vec<CellCoord>,
}

/// Everything a finished training run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub grid: Grid,
    pub ants: Vec<Ant>,
    pub params: KantsParams,
    /// Ant positions right after random placement (iteration 0).
    pub initial_positions: Vec<CellCoord>,
    /// Optional per-interval snapshots (always includes iteration 0 when
    /// recording is on).
    pub history: Vec<HistoryFrame>,
}

/// Deterministic per-purpose sub-seed: the (stream+1)-th output of the
/// splitmix64 generator seeded with `master`. Streams 0..2 feed grid
/// initialization, ant placement, and the training loop; callers running
/// multi-run protocols use higher streams per run.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut state = master;
    let mut out = 0;
    for _ in 0..=stream {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        out = z ^ (z >> 31);
    }
    out
}

/// The pheromone weighting function W(σ) = (1 + δ/(1 + σ·δ))^β.
/// Strictly positive; non-increasing in σ; identically 1 when δ=0.
pub fn weight(sigma: f64, beta: f64, delta: f64) -> f64 {
    (1.0 + delta / (1.0 + sigma * delta)).powf(beta)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Movement radius at iteration `t` of `total`: linear decay from nr0,
/// rounded (half away from zero), floored at 1.
pub fn radius_schedule(nr0: usize, t: usize, total: usize) -> usize {
    if total == 0 {
        return nr0.max(1);
    }
    let raw = nr0 as f64 * (1.0 - t as f64 / total as f64);
    (raw.round() as usize).max(1)
}

/// Pick the next cell for an ant. For every candidate j in the radius-nr
/// neighborhood (current cell excluded), σ_j is the Euclidean distance from
/// the reference vector to the candidate zone's centroid and W(σ_j) its
/// weight. One uniform draw q decides the branch: q ≤ q0 exploits (argmax W,
/// ties to the lowest (y,x) coordinate), anything else explores (roulette
/// wheel proportional to W). Exactly one extra draw happens in the explore
/// branch, which keeps replays bit-reproducible.
pub fn decide_where_to_go(
    ant: &Ant,
    grid: &Grid,
    params: &KantsParams,
    nr: usize,
    rng: &mut impl Rng,
) -> Result<CellCoord> {
    let reference: &[f64] = match params.sigma_source {
        SigmaSource::AntVector => &ant.vector,
        SigmaSource::CellVector => grid.cell(ant.position),
    };
    let candidates = grid.neighborhood_cells(ant.position, nr)?;
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            let ctr = grid.centroid(c, params.cr)?;
            Ok(weight(
                euclidean(reference, &ctr),
                params.beta,
                params.delta,
            ))
        })
        .collect::<Result<_>>()?;
    let q: f64 = rng.gen();
    if q <= params.q0 {
        // Exploit: argmax W with deterministic (y,x) tie-breaking.
        let mut best = 0;
        for i in 1..candidates.len() {
            let better = weights[i] > weights[best]
                || (weights[i] == weights[best]
                    && (candidates[i].y, candidates[i].x)
                        < (candidates[best].y, candidates[best].x));
            if better {
                best = i;
            }
        }
        Ok(candidates[best])
    } else {
        // Explore: roulette wheel over W. W > 0 always, so the mass is
        // positive; if floating-point slack leaves the draw unspent, the
        // last candidate takes it.
        let total: f64 = weights.iter().sum();
        let mut draw = rng.gen::<f64>() * total;
        for (c, w) in candidates.iter().zip(&weights) {
            draw -= w;
            if draw <= 0.0 {
                return Ok(*c);
            }
        }
        Ok(*candidates.last().expect("neighborhood is never empty"))
    }
}

/// Exact selection probabilities of the explore branch (the roulette wheel)
/// for a set of weights. Exposed for tests and diagnostics.
pub fn roulette_probabilities(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Train on an already-normalized dataset. See [`train_with_history`] for
/// the snapshot-recording variant.
pub fn train(train_set: &Dataset, params: &KantsParams) -> Result<TrainedModel> {
    train_with_history(train_set, params, 0)
}

/// Train, recording ant positions every `snapshot_every` iterations
/// (0 disables recording; iteration 0 is always included when enabled).
///
/// One iteration is two-phase: first every ant (in a fresh shuffled order)
/// picks a destination — the grid is not touched during this phase, so all
/// decisions see the same start-of-iteration state — and moves; then, in the
/// same order, each ant updates the cell it landed on; then the whole grid
/// evaporates once and the movement radius advances.
pub fn train_with_history(
    train_set: &Dataset,
    params: &KantsParams,
    snapshot_every: usize,
) -> Result<TrainedModel> {
    params.validate()?;
    if train_set.samples.is_empty() {
        return Err(KantsError::data("training set is empty"));
    }
    for (i, s) in train_set.samples.iter().enumerate() {
        if s.features.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(KantsError::data(format!(
                "training sample {} is not normalized to [0,1]",
                i
            )));
        }
    }

    let grid_seed = derive_seed(params.seed, 0);
    let place_seed = derive_seed(params.seed, 1);
    let loop_seed = derive_seed(params.seed, 2);

    let mut grid = Grid::init_random(params.grid_x, params.grid_y, train_set.nvars, grid_seed)?;

    let mut place_rng = ChaCha8Rng::seed_from_u64(place_seed);
    let mut ants: Vec<Ant> = train_set
        .samples
        .iter()
        .map(|s| {
            let x = place_rng.gen_range(0..params.grid_x);
            let y = place_rng.gen_range(0..params.grid_y);
            Ant {
                vector: s.features.clone(),
                label: s.label.clone(),
                position: CellCoord::new(x, y),
            }
        })
        .collect();

    let initial_positions: Vec<CellCoord> = ants.iter().map(|a| a.position).collect();
    let mut history = Vec::new();
    if snapshot_every > 0 {
        history.push(HistoryFrame {
            iteration: 0,
            positions: initial_positions.clone(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(loop_seed);
    let mut order: Vec<usize> = (0..ants.len()).collect();
    for t in 0..params.iterations {
        let nr = radius_schedule(params.nr0, t, params.iterations);
        order.shuffle(&mut rng);
        // Phase 1: all ants decide on the frozen start-of-iteration grid.
        for &i in &order {
            let dest = decide_where_to_go(&ants[i], &grid, params, nr, &mut rng)?;
            ants[i].position = dest;
        }
        // Phase 2: each ant reinforces the cell it now occupies.
        for &i in &order {
            grid.update_cell(ants[i].position, &ants[i].vector, params.alpha, params.cr)?;
        }
        grid.evaporate(params.rho)?;
        if snapshot_every > 0 && (t + 1) % snapshot_every == 0 {
            history.push(HistoryFrame {
                iteration: t + 1,
                positions: ants.iter().map(|a| a.position).collect(),
            });
        }
    }

    Ok(TrainedModel {
        grid,
        ants,
        params: params.clone(),
        initial_positions,
        history,
    })
}
