//! Parameter resolution: command-line flags override the optional
//! `key=value` config file, which overrides built-in defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use kants::engine::{KantsParams, SigmaSource};
use kants::error::{KantsError, Result};

/// The parameter flags shared by the training-flavored commands. Every
/// field is optional; [`resolve`] layers them over the config file and the
/// defaults.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Grid dimensions as X,Y (default: sized to the training set)
    #[arg(long, value_name = "X,Y")]
    pub grid_size: Option<String>,
    /// Weighting exponent β
    #[arg(long)]
    pub beta: Option<f64>,
    /// Weighting offset δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Exploitation probability q0 (0 = always roulette)
    #[arg(long)]
    pub q0: Option<f64>,
    /// Reinforcement rate α
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Evaporation rate ρ
    #[arg(long)]
    pub rho: Option<f64>,
    /// Initial movement neighborhood radius
    #[arg(long)]
    pub nr0: Option<usize>,
    /// Centroid radius
    #[arg(long)]
    pub cr: Option<usize>,
    /// Training iterations
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Neighbors consulted when classifying
    #[arg(long)]
    pub k: Option<usize>,
    /// Master random seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// What σ compares the centroid against: "ant" or "cell"
    #[arg(long, value_name = "SOURCE")]
    pub sigma_source: Option<String>,
}

/// One parsed config file: flag names (without the leading dashes) mapped
/// to raw values.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "grid-size",
    "beta",
    "delta",
    "q0",
    "alpha",
    "rho",
    "nr0",
    "cr",
    "iterations",
    "k",
    "seed",
    "sigma-source",
    "runs",
    "snapshot-every",
    "out",
];

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| KantsError::io(path, e))?;
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(KantsError::invalid(format!(
                    "{}:{}: expected key=value, got `{}`",
                    path.display(),
                    i + 1,
                    line
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(KantsError::invalid(format!(
                    "{}:{}: unknown config key `{}`",
                    path.display(),
                    i + 1,
                    key
                )));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                KantsError::invalid(format!("config key `{}`: bad value `{}`", key, raw))
            }),
        }
    }
}

/// Everything the commands need after flag/config/default layering.
#[derive(Debug, Clone)]
pub struct Settings {
    pub params: KantsParams,
    pub runs: usize,
    pub snapshot_every: usize,
    pub out: PathBuf,
}

fn parse_grid_size(raw: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(KantsError::invalid(format!(
            "--grid-size wants X,Y, got `{}`",
            raw
        )));
    }
    let x = parts[0]
        .trim()
        .parse()
        .map_err(|_| KantsError::invalid(format!("bad grid width `{}`", parts[0])))?;
    let y = parts[1]
        .trim()
        .parse()
        .map_err(|_| KantsError::invalid(format!("bad grid height `{}`", parts[1])))?;
    Ok((x, y))
}

/// Layer CLI flags over the config file over the defaults. `default_runs`
/// differs per command (1 for sweep points, 10 for protocols). The grid
/// stays (0,0) unless given: commands size it to their training set.
pub fn resolve(
    args: &ParamArgs,
    config: &ConfigFile,
    cli_runs: Option<usize>,
    cli_snapshot_every: Option<usize>,
    cli_out: Option<&Path>,
    default_runs: usize,
) -> Result<Settings> {
    let defaults = KantsParams::default();
    let grid_raw = match &args.grid_size {
        Some(s) => Some(s.clone()),
        None => config.get::<String>("grid-size")?,
    };
    let (grid_x, grid_y) = match grid_raw {
        Some(s) => parse_grid_size(&s)?,
        None => (0, 0),
    };
    let sigma_raw = match &args.sigma_source {
        Some(s) => Some(s.clone()),
        None => config.get::<String>("sigma-source")?,
    };
    let params = KantsParams {
        beta: args.beta.or(config.get("beta")?).unwrap_or(defaults.beta),
        delta: args
            .delta
            .or(config.get("delta")?)
            .unwrap_or(defaults.delta),
        q0: args.q0.or(config.get("q0")?).unwrap_or(defaults.q0),
        alpha: args
            .alpha
            .or(config.get("alpha")?)
            .unwrap_or(defaults.alpha),
        rho: args.rho.or(config.get("rho")?).unwrap_or(defaults.rho),
        nr0: args.nr0.or(config.get("nr0")?).unwrap_or(defaults.nr0),
        cr: args.cr.or(config.get("cr")?).unwrap_or(defaults.cr),
        iterations: args
            .iterations
            .or(config.get("iterations")?)
            .unwrap_or(defaults.iterations),
        grid_x,
        grid_y,
        k: args.k.or(config.get("k")?).unwrap_or(defaults.k),
        seed: args.seed.or(config.get("seed")?).unwrap_or(defaults.seed),
        sigma_source: match sigma_raw {
            Some(s) => SigmaSource::parse(&s)?,
            None => defaults.sigma_source,
        },
    };
    Ok(Settings {
        params,
        runs: cli_runs.or(config.get("runs")?).unwrap_or(default_runs),
        snapshot_every: cli_snapshot_every
            .or(config.get("snapshot-every")?)
            .unwrap_or(0),
        out: cli_out
            .map(Path::to_path_buf)
            .or(config.get::<PathBuf>("out")?)
            .unwrap_or_else(|| PathBuf::from("kants-out")),
    })
}
