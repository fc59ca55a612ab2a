//! Persistence: the sectioned model file, history CSVs, prediction CSVs,
//! and split metadata sidecars.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classifier::LabeledGrid;
use crate::dataset::Dataset;
use crate::engine::{Ant, HistoryFrame, KantsParams, SigmaSource, TrainedModel};
use crate::error::{KantsError, Result};
use crate::grid::{CellCoord, Grid};

const MODEL_MAGIC: &str = "kants-model,1";

/// Everything needed to classify with a previously trained grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub params: KantsParams,
    /// Training feature ranges; queries must be normalized with these.
    pub ranges: Vec<(f64, f64)>,
    pub labeled: LabeledGrid,
    /// Final ants (for the by-ants classification mode).
    pub ants: Vec<Ant>,
}

/// Serialize a trained model plus its labeling and training ranges into one
/// self-contained text file. The grid block inside is byte-for-byte the
/// standalone grid CSV format.
pub fn save_model(
    model: &TrainedModel,
    labeled: &LabeledGrid,
    ranges: &[(f64, f64)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');

    out.push_str("# params\n");
    let p = &model.params;
    let _ = writeln!(out, "alpha={}", p.alpha);
    let _ = writeln!(out, "beta={}", p.beta);
    let _ = writeln!(out, "cr={}", p.cr);
    let _ = writeln!(out, "delta={}", p.delta);
    let _ = writeln!(out, "grid-size={},{}", p.grid_x, p.grid_y);
    let _ = writeln!(out, "iterations={}", p.iterations);
    let _ = writeln!(out, "k={}", p.k);
    let _ = writeln!(out, "nr0={}", p.nr0);
    let _ = writeln!(out, "q0={}", p.q0);
    let _ = writeln!(out, "rho={}", p.rho);
    let _ = writeln!(out, "seed={}", p.seed);
    let _ = writeln!(out, "sigma-source={}", p.sigma_source.as_str());

    out.push_str("# ranges\n");
    for (v, (lo, hi)) in ranges.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", v, lo, hi);
    }

    out.push_str("# labels\n");
    for l in &labeled.labels {
        out.push_str(l);
        out.push('\n');
    }

    out.push_str("# grid\n");
    out.push_str(&model.grid.to_csv());

    out.push_str("# cells\n");
    for (c, l) in labeled.labeled_cells() {
        let _ = writeln!(out, "{},{},{}", c.x, c.y, l);
    }

    out.push_str("# ants\n");
    for (i, a) in model.ants.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i, a.label, a.position.x, a.position.y);
    }

    fs::write(path, out).map_err(|e| KantsError::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| KantsError::io(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().copied() != Some(MODEL_MAGIC) {
        return Err(KantsError::parse(
            path,
            1,
            format!("expected `{}` header", MODEL_MAGIC),
        ));
    }

    // Cut the file into named sections, remembering where each starts.
    let mut sections: Vec<(&str, usize, Vec<&str>)> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if let Some(name) = line.strip_prefix("# ") {
            sections.push((name, i + 1, Vec::new()));
        } else if let Some(last) = sections.last_mut() {
            if !line.trim().is_empty() {
                last.2.push(line);
            }
        } else {
            return Err(KantsError::parse(
                path,
                i + 1,
                "content before first section",
            ));
        }
    }
    let section = |name: &str| -> Result<(usize, &Vec<&str>)> {
        sections
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, base, lines)| (*base, lines))
            .ok_or_else(|| KantsError::parse(path, 1, format!("missing `# {}` section", name)))
    };

    // params
    let (pbase, plines) = section("params")?;
    let mut params = KantsParams::default();
    for (i, line) in plines.iter().enumerate() {
        let lineno = pbase + i + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| KantsError::parse(path, lineno, "expected key=value"))?;
        let bad = |what: &str| KantsError::parse(path, lineno, format!("bad {} value", what));
        match key {
            "alpha" => params.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "beta" => params.beta = value.parse().map_err(|_| bad("beta"))?,
            "cr" => params.cr = value.parse().map_err(|_| bad("cr"))?,
            "delta" => params.delta = value.parse().map_err(|_| bad("delta"))?,
            "grid-size" => {
                let (x, y) = value.split_once(',').ok_or_else(|| bad("grid-size"))?;
                params.grid_x = x.parse().map_err(|_| bad("grid-size"))?;
                params.grid_y = y.parse().map_err(|_| bad("grid-size"))?;
            }
            "iterations" => params.iterations = value.parse().map_err(|_| bad("iterations"))?,
            "k" => params.k = value.parse().map_err(|_| bad("k"))?,
            "nr0" => params.nr0 = value.parse().map_err(|_| bad("nr0"))?,
            "q0" => params.q0 = value.parse().map_err(|_| bad("q0"))?,
            "rho" => params.rho = value.parse().map_err(|_| bad("rho"))?,
            "seed" => params.seed = value.parse().map_err(|_| bad("seed"))?,
            "sigma-source" => params.sigma_source = SigmaSource::parse(value)?,
            other => {
                return Err(KantsError::parse(
                    path,
                    lineno,
                    format!("unknown parameter {:?}", other),
                ))
            }
        }
    }

    // ranges
    let (rbase, rlines) = section("ranges")?;
    let mut ranges = Vec::with_capacity(rlines.len());
    for (i, line) in rlines.iter().enumerate() {
        let lineno = rbase + i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(KantsError::parse(path, lineno, "expected index,min,max"));
        }
        let idx: usize = fields[0]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad range index"))?;
        if idx != ranges.len() {
            return Err(KantsError::parse(path, lineno, "range rows out of order"));
        }
        let lo: f64 = fields[1]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad range min"))?;
        let hi: f64 = fields[2]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad range max"))?;
        ranges.push((lo, hi));
    }

    // labels
    let (_, llines) = section("labels")?;
    let labels: Vec<String> = llines.iter().map(|l| l.to_string()).collect();
    if labels.is_empty() {
        return Err(KantsError::parse(path, 1, "model has no labels"));
    }

    // grid
    let (gbase, glines) = section("grid")?;
    let grid = Grid::from_csv_lines(glines, path, gbase)?;

    // cells
    let (cbase, clines) = section("cells")?;
    let mut cell_labels = vec![None; grid.width() * grid.height()];
    for (i, line) in clines.iter().enumerate() {
        let lineno = cbase + i + 1;
        let fields: Vec<&str> = line.splitn(3, ',').collect();
        if fields.len() != 3 {
            return Err(KantsError::parse(path, lineno, "expected x,y,label"));
        }
        let x: usize = fields[0]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad cell x"))?;
        let y: usize = fields[1]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad cell y"))?;
        if x >= grid.width() || y >= grid.height() {
            return Err(KantsError::parse(path, lineno, "cell out of range"));
        }
        cell_labels[y * grid.width() + x] = Some(fields[2].to_string());
    }
    if cell_labels.iter().all(|l| l.is_none()) {
        return Err(KantsError::parse(path, cbase + 1, "no labeled cells"));
    }

    // ants
    let (abase, alines) = section("ants")?;
    let mut ants = Vec::with_capacity(alines.len());
    for (i, line) in alines.iter().enumerate() {
        let lineno = abase + i + 1;
        let fields: Vec<&str> = line.splitn(4, ',').collect();
        if fields.len() != 4 {
            return Err(KantsError::parse(path, lineno, "expected ant_id,label,x,y"));
        }
        let x: usize = fields[2]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad ant x"))?;
        let y: usize = fields[3]
            .parse()
            .map_err(|_| KantsError::parse(path, lineno, "bad ant y"))?;
        if x >= grid.width() || y >= grid.height() {
            return Err(KantsError::parse(path, lineno, "ant out of range"));
        }
        ants.push(Ant {
            vector: Vec::new(), // sample vectors are not persisted
            label: fields[1].to_string(),
            position: CellCoord::new(x, y),
        });
    }

    Ok(SavedModel {
        params,
        ranges,
        labeled: LabeledGrid {
            grid,
            cell_labels,
            labels,
        },
        ants,
    })
}

/// Write position history as CSV. The leading comment line carries the grid
/// dimensions so a renderer does not have to guess them.
pub fn write_history(
    frames: &[HistoryFrame],
    ants: &[Ant],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let _ = writeln!(out, "# kants-history,{},{}", width, height);
    out.push_str("iteration,ant_id,label,x,y\n");
    for f in frames {
        for (i, pos) in f.positions.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                f.iteration, i, ants[i].label, pos.x, pos.y
            );
        }
    }
    fs::write(path, out).map_err(|e| KantsError::io(path, e))
}

/// One ant's row in a history frame: (ant_id, label, x, y).
pub type HistoryRow = (usize, String, usize, usize);

/// Parsed history file: grid dims (if declared) plus per-iteration frames.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub frames: Vec<(usize, Vec<HistoryRow>)>,
}

pub fn read_history(path: impl AsRef<Path>) -> Result<History> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| KantsError::io(path, e))?;
    let mut width = None;
    let mut height = None;
    let mut frames: Vec<(usize, Vec<HistoryRow>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(dims) = rest.strip_prefix("kants-history,") {
                let (w, h) = dims
                    .split_once(',')
                    .ok_or_else(|| KantsError::parse(path, lineno, "bad history header"))?;
                width = Some(
                    w.parse()
                        .map_err(|_| KantsError::parse(path, lineno, "bad history width"))?,
                );
                height = Some(
                    h.parse()
                        .map_err(|_| KantsError::parse(path, lineno, "bad history height"))?,
                );
            }
            continue;
        }
        if line == "iteration,ant_id,label,x,y" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(KantsError::parse(path, lineno, "expected 5 columns"));
        }
        let parse = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| KantsError::parse(path, lineno, format!("bad {}", what)))
        };
        let iter = parse(fields[0], "iteration")?;
        let row = (
            parse(fields[1], "ant id")?,
            fields[2].to_string(),
            parse(fields[3], "x")?,
            parse(fields[4], "y")?,
        );
        match frames.last_mut() {
            Some((it, rows)) if *it == iter => rows.push(row),
            _ => frames.push((iter, vec![row])),
        }
    }
    Ok(History {
        width,
        height,
        frames,
    })
}

/// Predictions CSV: `sample_index,true_label,predicted_label,correct`.
pub fn write_predictions(
    records: &[(usize, String, String, bool)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("sample_index,true_label,predicted_label,correct\n");
    for (i, truth, pred, ok) in records {
        let _ = writeln!(out, "{},{},{},{}", i, truth, pred, ok);
    }
    fs::write(path, out).map_err(|e| KantsError::io(path, e))
}

/// key=value sidecar describing one emitted split pair.
pub fn write_split_meta(
    dataset_name: &str,
    fraction: f64,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let _ = writeln!(out, "dataset={}", dataset_name);
    let _ = writeln!(out, "fraction={}", fraction);
    let _ = writeln!(out, "seed={}", seed);
    for (l, n) in train.class_counts() {
        let _ = writeln!(out, "train.{}={}", l, n);
    }
    for (l, n) in test.class_counts() {
        let _ = writeln!(out, "test.{}={}", l, n);
    }
    fs::write(path, out).map_err(|e| KantsError::io(path, e))
}
