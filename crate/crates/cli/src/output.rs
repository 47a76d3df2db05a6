//! File emitters shared by the commands.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use orthoplan::grid::Grid;
use orthoplan::svg::{contour_levels, SvgCanvas};
use orthoplan::SurfaceModel;
use serde::Serialize;

pub const CONTOUR_LEVELS: usize = 12;
pub const SVG_WIDTH: f64 = 800.0;

pub fn write_text(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, text)
}

/// Elevation sampled on a `res × res` lattice spanning the surface bounds.
pub fn elevation_grid(model: &SurfaceModel, res: usize) -> Result<Grid> {
    let b = model.bounds();
    let data = b
        .lattice(res, res)
        .into_iter()
        .map(|[x, y]| model.elevation_extended(x, y))
        .collect();
    Ok(Grid::over_bounds(&b, res, res, data)?)
}

/// A canvas over the surface bounds with elevation contours drawn.
pub fn contour_canvas(model: &SurfaceModel, res: usize) -> Result<SvgCanvas> {
    let grid = elevation_grid(model, res)?;
    let mut canvas = SvgCanvas::new(model.bounds(), SVG_WIDTH);
    canvas.contours(&grid, &contour_levels(&grid, CONTOUR_LEVELS), "#888888");
    Ok(canvas)
}
