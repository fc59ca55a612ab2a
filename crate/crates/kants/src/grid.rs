//! The toroidal lattice of vectors: geometry, neighborhoods, centroids,
//! the SOM-like cell update, and evaporation.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KantsError, Result};

/// A cell position on the torus. Always in range: all arithmetic wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub fn new(x: usize, y: usize) -> Self {
        CellCoord { x, y }
    }
}

/// Toroidal X×Y grid. Every cell holds a current vector (mutated during
/// training) and a frozen copy of its initial value (the evaporation target).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    nvars: usize,
    cells: Vec<f64>,
    initial: Vec<f64>,
}

const EXPORT_VERSION: u32 = 1;

impl Grid {
    /// Fresh grid with every component drawn uniformly from [0,1).
    pub fn init_random(width: usize, height: usize, nvars: usize, seed: u64) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(KantsError::invalid(format!(
                "grid must be at least 3x3, got {}x{}",
                width, height
            )));
        }
        if nvars == 0 {
            return Err(KantsError::invalid("grid needs at least one variable"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<f64> = (0..width * height * nvars).map(|_| rng.gen()).collect();
        Ok(Grid {
            width,
            height,
            nvars,
            initial: cells.clone(),
            cells,
        })
    }

    /// Build a grid from explicit vectors (used by import and by tests).
    pub fn from_cells(
        width: usize,
        height: usize,
        nvars: usize,
        cells: Vec<f64>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        if cells.len() != width * height * nvars || initial.len() != cells.len() {
            return Err(KantsError::data("cell buffer sizes do not match grid dims"));
        }
        Ok(Grid {
            width,
            height,
            nvars,
            cells,
            initial,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn offset(&self, c: CellCoord) -> usize {
        (c.y * self.width + c.x) * self.nvars
    }

    /// Current vector of a cell.
    pub fn cell(&self, c: CellCoord) -> &[f64] {
        let o = self.offset(c);
        &self.cells[o..o + self.nvars]
    }

    /// Frozen initial vector of a cell.
    pub fn initial_cell(&self, c: CellCoord) -> &[f64] {
        let o = self.offset(c);
        &self.initial[o..o + self.nvars]
    }

    /// Wrap signed offsets from a coordinate onto the torus.
    pub fn wrap(&self, x: i64, y: i64) -> CellCoord {
        CellCoord {
            x: x.rem_euclid(self.width as i64) as usize,
            y: y.rem_euclid(self.height as i64) as usize,
        }
    }

    /// All coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| CellCoord { x, y }))
    }

    fn check_radius(&self, r: usize, what: &str) -> Result<()> {
        if 2 * r + 1 > self.width.min(self.height) {
            return Err(KantsError::invalid(format!(
                "{} {} too large for a {}x{} grid",
                what, r, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Cells at Chebyshev distance ≤ radius from `center` on the torus,
    /// excluding the center itself: (2r+1)²−1 distinct cells, enumerated
    /// row by row (dy outer, dx inner).
    pub fn neighborhood_cells(&self, center: CellCoord, radius: usize) -> Result<Vec<CellCoord>> {
        if radius == 0 {
            return Err(KantsError::invalid("neighborhood radius must be >= 1"));
        }
        self.check_radius(radius, "neighborhood radius")?;
        let r = radius as i64;
        let mut out = Vec::with_capacity((2 * radius + 1).pow(2) - 1);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx == 0 && dy == 0 {
                    continue;
                }
                out.push(self.wrap(center.x as i64 + dx, center.y as i64 + dy));
            }
        }
        Ok(out)
    }

    /// Component-wise mean of the (2cr+1)² current vectors within Chebyshev
    /// distance cr of `center`, the center cell included. cr=0 returns the
    /// cell's own vector.
    pub fn centroid(&self, center: CellCoord, cr: usize) -> Result<Vec<f64>> {
        self.check_radius(cr, "centroid radius")?;
        let r = cr as i64;
        let mut sum = vec![0.0; self.nvars];
        for dy in -r..=r {
            for dx in -r..=r {
                let c = self.wrap(center.x as i64 + dx, center.y as i64 + dy);
                for (s, v) in sum.iter_mut().zip(self.cell(c)) {
                    *s += v;
                }
            }
        }
        let count = ((2 * cr + 1) * (2 * cr + 1)) as f64;
        for s in &mut sum {
            *s /= count;
        }
        Ok(sum)
    }

    /// Pull the cell's vector toward the ant's vector. The reinforcement is
    /// R = α·(1−D̄), where D̄ is the mean absolute component difference
    /// between the ant's vector and the centroid of the radius-cr zone
    /// around the cell; for normalized data D̄ ∈ [0,1], so R ∈ [0,α].
    pub fn update_cell(
        &mut self,
        cell: CellCoord,
        ant_vector: &[f64],
        alpha: f64,
        cr: usize,
    ) -> Result<()> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(KantsError::invalid(format!(
                "alpha must be in (0,1], got {}",
                alpha
            )));
        }
        if ant_vector.len() != self.nvars {
            return Err(KantsError::data(format!(
                "ant vector has {} components, grid has {}",
                ant_vector.len(),
                self.nvars
            )));
        }
        let ctr = self.centroid(cell, cr)?;
        let dbar = ant_vector
            .iter()
            .zip(&ctr)
            .map(|(a, c)| (a - c).abs())
            .sum::<f64>()
            / self.nvars as f64;
        let reinforce = alpha * (1.0 - dbar);
        let o = self.offset(cell);
        for (v, a) in self.cells[o..o + self.nvars].iter_mut().zip(ant_vector) {
            *v += reinforce * (a - *v);
        }
        Ok(())
    }

    /// Relax every cell toward its frozen initial vector:
    /// V ← (1−ρ)·V + ρ·V₀, computed in the anchored form
    /// V₀ + (1−ρ)·(V−V₀) so that a cell already at V₀ stays bit-identical
    /// and ρ=1 reverts exactly.
    pub fn evaporate(&mut self, rho: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(KantsError::invalid(format!(
                "rho must be in [0,1], got {}",
                rho
            )));
        }
        let keep = 1.0 - rho;
        for (v, v0) in self.cells.iter_mut().zip(&self.initial) {
            *v = *v0 + keep * (*v - *v0);
        }
        Ok(())
    }

    /// Serialize to the documented CSV layout: a `kants-grid` header line
    /// followed by one row per cell holding the current and the initial
    /// vector. Floats use shortest round-trip formatting, so importing the
    /// output reproduces this grid bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "kants-grid,{},{},{},{}",
            self.width, self.height, self.nvars, EXPORT_VERSION
        );
        for c in self.coords() {
            let _ = write!(out, "{},{}", c.x, c.y);
            for v in self.cell(c) {
                let _ = write!(out, ",{}", v);
            }
            for v in self.initial_cell(c) {
                let _ = write!(out, ",{}", v);
            }
            out.push('\n');
        }
        out
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| KantsError::io(path, e))
    }

    /// Parse the export format. `path` is used only for error messages;
    /// `line_base` offsets reported line numbers when the text is embedded
    /// in a larger file.
    pub fn from_csv_lines(lines: &[&str], path: &Path, line_base: usize) -> Result<Self> {
        let header = lines
            .first()
            .ok_or_else(|| KantsError::parse(path, line_base + 1, "missing grid header"))?;
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 5 || parts[0] != "kants-grid" {
            return Err(KantsError::parse(
                path,
                line_base + 1,
                "expected `kants-grid,X,Y,nvars,version` header",
            ));
        }
        let dim = |i: usize, what: &str| -> Result<usize> {
            parts[i]
                .parse::<usize>()
                .map_err(|_| KantsError::parse(path, line_base + 1, format!("bad {}", what)))
        };
        let width = dim(1, "width")?;
        let height = dim(2, "height")?;
        let nvars = dim(3, "nvars")?;
        let version = dim(4, "version")?;
        if version != EXPORT_VERSION as usize {
            return Err(KantsError::parse(
                path,
                line_base + 1,
                format!("unsupported grid format version {}", version),
            ));
        }
        if width < 3 || height < 3 || nvars == 0 {
            return Err(KantsError::parse(
                path,
                line_base + 1,
                "degenerate grid dims",
            ));
        }
        let mut cells = vec![0.0; width * height * nvars];
        let mut initial = vec![0.0; width * height * nvars];
        let mut seen = vec![false; width * height];
        for (i, line) in lines[1..].iter().enumerate() {
            let lineno = line_base + i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 + 2 * nvars {
                return Err(KantsError::parse(
                    path,
                    lineno,
                    format!("expected {} fields, found {}", 2 + 2 * nvars, fields.len()),
                ));
            }
            let x: usize = fields[0]
                .parse()
                .map_err(|_| KantsError::parse(path, lineno, "bad x coordinate"))?;
            let y: usize = fields[1]
                .parse()
                .map_err(|_| KantsError::parse(path, lineno, "bad y coordinate"))?;
            if x >= width || y >= height {
                return Err(KantsError::parse(
                    path,
                    lineno,
                    "cell coordinate out of range",
                ));
            }
            if std::mem::replace(&mut seen[y * width + x], true) {
                return Err(KantsError::parse(
                    path,
                    lineno,
                    format!("duplicate cell ({},{})", x, y),
                ));
            }
            let o = (y * width + x) * nvars;
            for v in 0..nvars {
                cells[o + v] = fields[2 + v]
                    .parse()
                    .map_err(|_| KantsError::parse(path, lineno, "bad cell value"))?;
                initial[o + v] = fields[2 + nvars + v]
                    .parse()
                    .map_err(|_| KantsError::parse(path, lineno, "bad initial value"))?;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(KantsError::parse(
                path,
                line_base + lines.len() + 1,
                format!("missing cell ({},{})", missing % width, missing / width),
            ));
        }
        Grid::from_cells(width, height, nvars, cells, initial)
    }

    pub fn import_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| KantsError::io(path, e))?;
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        Self::from_csv_lines(&lines, path, 0)
    }
}
