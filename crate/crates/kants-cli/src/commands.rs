//! The six subcommands. Each returns a library error on failure; the exit
//! code mapping lives in main.

use std::path::Path;
use std::time::Instant;

use kants::classifier::{evaluate, label_cells};
use kants::dataset::{Dataset, SplitSpec};
use kants::engine::{derive_seed, train_with_history};
use kants::error::{KantsError, Result};
use kants::experiment::{reproduce, sweep, sweep_csv};
use kants::metrics::compactness;
use kants::model::{
    load_model, read_history, save_model, write_history, write_predictions, write_split_meta,
};
use kants::ppm::write_frame;

use crate::settings::Settings;

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| KantsError::io(dir, e))
}

fn load_data(
    path: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
) -> Result<Dataset> {
    Dataset::load_csv(path, label_column, ignore_columns)
}

/// Percentage halves of a fraction, for file names: 0.9 → (90, 10).
fn fraction_percents(fraction: f64) -> (usize, usize) {
    let p = (fraction * 100.0).round() as usize;
    (p, 100 - p)
}

pub fn make_splits(
    dataset: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
    fraction: f64,
    sets: usize,
    name: Option<&str>,
    settings: &Settings,
) -> Result<()> {
    if sets == 0 {
        return Err(KantsError::invalid("--sets must be >= 1"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(KantsError::invalid(format!(
            "--fraction must be in (0,1), got {}",
            fraction
        )));
    }
    let raw = load_data(dataset, label_column, ignore_columns)?;
    let stem = match name {
        Some(n) => n.to_string(),
        None => dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".to_string()),
    };
    ensure_out(&settings.out)?;
    let (p, q) = fraction_percents(fraction);
    for set in 1..=sets {
        let seed = derive_seed(settings.params.seed, (set - 1) as u64);
        let (train, test) = raw.stratified_split(&SplitSpec {
            train_fraction: fraction,
            seed,
        })?;
        let base = format!("{stem}-{p}tra-{q}tst-set{set}");
        let train_path = settings.out.join(format!("{base}-train.csv"));
        let test_path = settings.out.join(format!("{base}-test.csv"));
        let meta_path = settings.out.join(format!("{base}.meta"));
        train.write_csv(&train_path)?;
        test.write_csv(&test_path)?;
        write_split_meta(&stem, fraction, seed, &train, &test, &meta_path)?;
        println!(
            "{base}: {} train / {} test rows -> {}",
            train.samples.len(),
            test.samples.len(),
            settings.out.display()
        );
    }
    Ok(())
}

pub fn train(
    train_csv: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
    settings: &Settings,
) -> Result<()> {
    let raw = load_data(train_csv, label_column, ignore_columns)?;
    let normalized = raw.normalize(None)?;
    let ranges = normalized
        .feature_ranges
        .clone()
        .expect("normalize sets ranges");
    let params = settings
        .params
        .clone()
        .with_grid_for(normalized.samples.len());

    let started = Instant::now();
    let model = train_with_history(&normalized, &params, settings.snapshot_every)?;
    let elapsed = started.elapsed();
    let labeled = label_cells(&model)?;

    ensure_out(&settings.out)?;
    let model_path = settings.out.join("model.kants");
    save_model(&model, &labeled, &ranges, &model_path)?;
    let grid_path = settings.out.join("grid.csv");
    model.grid.export_csv(&grid_path)?;
    let mut written = vec![model_path.clone(), grid_path];
    if !model.history.is_empty() {
        let history_path = settings.out.join("history.csv");
        write_history(
            &model.history,
            &model.ants,
            params.grid_x,
            params.grid_y,
            &history_path,
        )?;
        written.push(history_path);
    }

    println!(
        "trained {} ants on a {}x{} grid in {} iterations ({:.2} s), {} labeled cells",
        model.ants.len(),
        params.grid_x,
        params.grid_y,
        params.iterations,
        elapsed.as_secs_f64(),
        labeled.labeled_count(),
    );
    if model.ants.len() >= 2 {
        let labels: Vec<String> = model.ants.iter().map(|a| a.label.clone()).collect();
        let positions: Vec<_> = model.ants.iter().map(|a| a.position).collect();
        let start = compactness(
            &model.initial_positions,
            &labels,
            params.grid_x,
            params.grid_y,
        )?;
        let end = compactness(&positions, &labels, params.grid_x, params.grid_y)?;
        let show = |r: Option<f64>| r.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into());
        println!(
            "compactness ratio: {} at start -> {} after training",
            show(start.ratio),
            show(end.ratio)
        );
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn classify(
    model_path: &Path,
    test_csv: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
    k: Option<usize>,
    settings: &Settings,
) -> Result<()> {
    let saved = load_model(model_path)?;
    let raw = load_data(test_csv, label_column, ignore_columns)?;
    let normalized = raw.normalize(Some(&saved.ranges))?;
    let k = k.unwrap_or(saved.params.k);
    let ev = evaluate(&saved.labeled, &normalized, k)?;

    ensure_out(&settings.out)?;
    let pred_path = settings.out.join("predictions.csv");
    write_predictions(&ev.records, &pred_path)?;
    println!("wrote {}", pred_path.display());
    println!("accuracy: {:.2}", ev.accuracy);
    Ok(())
}

pub fn run_sweep(
    dataset: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
    betas: &[f64],
    deltas: &[f64],
    settings: &Settings,
) -> Result<()> {
    let raw = load_data(dataset, label_column, ignore_columns)?;
    let started = Instant::now();
    let rows = sweep(
        &raw,
        betas,
        deltas,
        settings.runs,
        settings.params.seed,
        &settings.params,
    )?;
    let elapsed = started.elapsed();

    ensure_out(&settings.out)?;
    let csv_path = settings.out.join("sweep.csv");
    std::fs::write(&csv_path, sweep_csv(&rows)).map_err(|e| KantsError::io(&csv_path, e))?;
    let mut images = 0usize;
    for chunk in rows.chunks(settings.runs) {
        for (run_idx, row) in chunk.iter().enumerate() {
            let image = settings.out.join(format!(
                "sweep-b{}-d{}-r{}.ppm",
                row.beta,
                row.delta,
                run_idx + 1
            ));
            write_frame(
                &row.positions,
                row.grid_x,
                row.grid_y,
                row.n_classes,
                &image,
            )?;
            images += 1;
        }
    }

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.final_ratio).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "swept {} points x {} runs in {:.1} s; compactness ratio range [{:.3}, {:.3}]",
        betas.len() * deltas.len(),
        settings.runs,
        elapsed.as_secs_f64(),
        lo,
        hi
    );
    println!(
        "wrote {} and {} images to {}",
        csv_path.display(),
        images,
        settings.out.display()
    );
    Ok(())
}

pub fn snapshot(history_path: &Path, settings: &Settings) -> Result<()> {
    let history = read_history(history_path)?;
    if history.frames.is_empty() {
        log::warn!(
            "{}: history has no frames; nothing to render",
            history_path.display()
        );
        return Ok(());
    }
    let (Some(width), Some(height)) = (history.width, history.height) else {
        return Err(KantsError::data(format!(
            "{}: history lacks the grid-size header needed for rendering",
            history_path.display()
        )));
    };

    // Class order is the sorted distinct label set over the whole file, so
    // colors stay stable from frame to frame.
    let mut labels: Vec<&str> = history
        .frames
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|(_, l, _, _)| l.as_str()))
        .collect();
    labels.sort();
    labels.dedup();

    ensure_out(&settings.out)?;
    for (iteration, rows) in &history.frames {
        let spots: Vec<_> = rows
            .iter()
            .map(|(_, label, x, y)| {
                let class = labels.binary_search(&label.as_str()).expect("label seen");
                (kants::grid::CellCoord::new(*x, *y), class)
            })
            .collect();
        let path = settings.out.join(format!("snapshot-iter{iteration}.ppm"));
        write_frame(&spots, width, height, labels.len(), &path)?;
        println!("wrote {}", path.display());
    }
    println!("rendered {} frames", history.frames.len());
    Ok(())
}

pub fn run_reproduce(
    dataset: &Path,
    label_column: Option<usize>,
    ignore_columns: &[usize],
    sets: usize,
    name: Option<&str>,
    settings: &Settings,
) -> Result<()> {
    let raw = load_data(dataset, label_column, ignore_columns)?;
    let stem = match name {
        Some(n) => n.to_string(),
        None => dataset
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".to_string()),
    };
    let started = Instant::now();
    let rows = reproduce(
        &raw,
        &stem,
        sets,
        settings.runs,
        settings.params.seed,
        &settings.params,
    )?;
    let elapsed = started.elapsed();

    println!("{:<28} {:>8} {:>16} {:>8}", "split", "best", "kants", "knn");
    for row in &rows {
        println!(
            "{:<28} {:>8.2} {:>16} {:>8.2}",
            row.name,
            row.stats.best,
            row.stats.mean_std(),
            row.knn_accuracy
        );
    }
    println!(
        "{} splits x {} runs in {:.1} s",
        rows.len(),
        settings.runs,
        elapsed.as_secs_f64()
    );

    ensure_out(&settings.out)?;
    let csv_path = settings.out.join("reproduce.csv");
    let mut csv = String::from("split,best,mean,stddev,knn\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.name, row.stats.best, row.stats.mean, row.stats.stddev, row.knn_accuracy
        ));
    }
    std::fs::write(&csv_path, csv).map_err(|e| KantsError::io(&csv_path, e))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}
