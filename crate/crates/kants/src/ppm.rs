//! Plain-text PPM (P3) rendering of ant positions — dependency-free and
//! byte-exact, so golden tests can compare whole files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{KantsError, Result};
use crate::grid::CellCoord;

/// Pixels per grid cell in rendered images.
pub const CELL_PIXELS: usize = 8;

/// Fixed palette, indexed by class order; wraps around past ten classes.
const PALETTE: [(u8, u8, u8); 10] = [
    (220, 50, 47),   // red
    (38, 139, 210),  // blue
    (133, 153, 0),   // green
    (181, 137, 0),   // yellow
    (211, 54, 130),  // magenta
    (42, 161, 152),  // cyan
    (203, 75, 22),   // orange
    (108, 113, 196), // violet
    (88, 110, 117),  // slate
    (0, 0, 0),       // black
];

const BACKGROUND: (u8, u8, u8) = (255, 255, 255);

/// Render one frame of ant positions. Each grid cell becomes an 8×8 pixel
/// block: white when empty, otherwise the color of the majority class among
/// its occupants (ties to the lowest class index).
pub fn render_frame(
    positions: &[(CellCoord, usize)],
    width: usize,
    height: usize,
    n_classes: usize,
) -> Result<String> {
    if width == 0 || height == 0 {
        return Err(KantsError::invalid("cannot render an empty grid"));
    }
    for &(c, class) in positions {
        if c.x >= width || c.y >= height {
            return Err(KantsError::data(format!(
                "ant at ({},{}) is outside the {}x{} grid",
                c.x, c.y, width, height
            )));
        }
        if class >= n_classes {
            return Err(KantsError::data(format!(
                "class index {} out of range ({} classes)",
                class, n_classes
            )));
        }
    }

    // Majority class per occupied cell.
    let mut counts: HashMap<CellCoord, Vec<usize>> = HashMap::new();
    for &(c, class) in positions {
        let v = counts.entry(c).or_insert_with(|| vec![0; n_classes]);
        v[class] += 1;
    }
    let mut cell_color: HashMap<CellCoord, (u8, u8, u8)> = HashMap::new();
    for (c, votes) in counts {
        let top = *votes.iter().max().expect("votes nonempty");
        let class = votes
            .iter()
            .position(|&n| n == top)
            .expect("max vote exists");
        cell_color.insert(c, PALETTE[class % PALETTE.len()]);
    }

    let px_w = width * CELL_PIXELS;
    let px_h = height * CELL_PIXELS;
    let mut out = String::with_capacity(px_w * px_h * 12);
    let _ = writeln!(out, "P3");
    let _ = writeln!(out, "{} {}", px_w, px_h);
    let _ = writeln!(out, "255");
    for py in 0..px_h {
        let y = py / CELL_PIXELS;
        let mut first = true;
        for px in 0..px_w {
            let x = px / CELL_PIXELS;
            let (r, g, b) = cell_color
                .get(&CellCoord::new(x, y))
                .copied()
                .unwrap_or(BACKGROUND);
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{} {} {}", r, g, b);
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_frame(
    positions: &[(CellCoord, usize)],
    width: usize,
    height: usize,
    n_classes: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_frame(positions, width, height, n_classes)?;
    std::fs::write(path, text).map_err(|e| KantsError::io(path, e))
}
