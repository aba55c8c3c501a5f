//! Lossless PNG heatmaps of grid fields and learning snapshots.
//!
//! Color mapping (fixed): field values ramp white -> green; the optimistic
//! set tints cells light blue and the cautious set dark blue; sample dots
//! are drawn red and failures as red crosses. The state axis runs left to
//! right, the action axis bottom to top.

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use serde::Deserialize;
use viability::grid::FieldCsv;
use viability::learner::SampleRecord;

use crate::AppError;

const CELL_PX: u32 = 16;
const VALUE_COLOR: Rgb<u8> = Rgb([40, 140, 70]);
const OPT_COLOR: Rgb<u8> = Rgb([150, 200, 235]);
const CAUT_COLOR: Rgb<u8> = Rgb([40, 80, 170]);
const SAMPLE_COLOR: Rgb<u8> = Rgb([210, 40, 40]);

/// Uniform axes reconstructed from a field CSV.
struct InferredGrid {
    state_centers: Vec<f64>,
    action_centers: Vec<f64>,
}

impl InferredGrid {
    fn from_csv(raw: &FieldCsv, path: &Path) -> Result<Self, AppError> {
        let axes = raw
            .infer_axes()
            .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
        if axes.len() != 2 || raw.state_dims() != 1 {
            return Err(AppError::Runtime(format!(
                "{}: rendering supports 1-D state x 1-D action fields, found {} axes",
                path.display(),
                axes.len()
            )));
        }
        let mut axes = axes.into_iter();
        let grid = Self {
            state_centers: axes.next().unwrap(),
            action_centers: axes.next().unwrap(),
        };
        if grid.state_centers.len() < 2 || grid.action_centers.len() < 2 {
            return Err(AppError::Runtime(format!(
                "{}: cannot infer cell widths from a single-cell axis",
                path.display()
            )));
        }
        Ok(grid)
    }

    fn ns(&self) -> usize {
        self.state_centers.len()
    }

    fn na(&self) -> usize {
        self.action_centers.len()
    }

    fn state_bounds(&self) -> (f64, f64) {
        let w = self.state_centers[1] - self.state_centers[0];
        (self.state_centers[0] - w / 2.0, self.state_centers[self.ns() - 1] + w / 2.0)
    }

    fn action_bounds(&self) -> (f64, f64) {
        let w = self.action_centers[1] - self.action_centers[0];
        (self.action_centers[0] - w / 2.0, self.action_centers[self.na() - 1] + w / 2.0)
    }

    /// Pixel position of a continuous (state, action) point, clamped into
    /// the image.
    fn pixel_of(&self, state: f64, action: f64) -> (u32, u32) {
        let (s_lo, s_hi) = self.state_bounds();
        let (a_lo, a_hi) = self.action_bounds();
        let width = self.ns() as u32 * CELL_PX;
        let height = self.na() as u32 * CELL_PX;
        let x = ((state - s_lo) / (s_hi - s_lo) * width as f64).clamp(0.0, width as f64 - 1.0);
        // action axis points up; image rows point down
        let y = ((a_hi - action) / (a_hi - a_lo) * height as f64)
            .clamp(0.0, height as f64 - 1.0);
        (x as u32, y as u32)
    }
}

fn blend(base: Rgb<u8>, over: Rgb<u8>, alpha: f64) -> Rgb<u8> {
    let mix = |b: u8, o: u8| ((b as f64) * (1.0 - alpha) + (o as f64) * alpha).round() as u8;
    Rgb([mix(base[0], over[0]), mix(base[1], over[1]), mix(base[2], over[2])])
}

fn value_color(value: f64, max: f64) -> Rgb<u8> {
    if max <= 0.0 {
        return Rgb([255, 255, 255]);
    }
    blend(Rgb([255, 255, 255]), VALUE_COLOR, (value / max).clamp(0.0, 1.0))
}

fn fill_cell(img: &mut RgbImage, s: usize, a: usize, na: usize, color: Rgb<u8>) {
    let x0 = s as u32 * CELL_PX;
    let y0 = (na - 1 - a) as u32 * CELL_PX;
    for dy in 0..CELL_PX {
        for dx in 0..CELL_PX {
            img.put_pixel(x0 + dx, y0 + dy, color);
        }
    }
}

fn tint_cell(img: &mut RgbImage, s: usize, a: usize, na: usize, color: Rgb<u8>, alpha: f64) {
    let x0 = s as u32 * CELL_PX;
    let y0 = (na - 1 - a) as u32 * CELL_PX;
    for dy in 0..CELL_PX {
        for dx in 0..CELL_PX {
            let base = *img.get_pixel(x0 + dx, y0 + dy);
            img.put_pixel(x0 + dx, y0 + dy, blend(base, color, alpha));
        }
    }
}

fn draw_dot(img: &mut RgbImage, x: u32, y: u32) {
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let px = x as i64 + dx;
            let py = y as i64 + dy;
            if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                img.put_pixel(px as u32, py as u32, SAMPLE_COLOR);
            }
        }
    }
}

fn draw_cross(img: &mut RgbImage, x: u32, y: u32) {
    for d in -3i64..=3 {
        for (px, py) in [(x as i64 + d, y as i64 + d), (x as i64 + d, y as i64 - d)] {
            if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                img.put_pixel(px as u32, py as u32, SAMPLE_COLOR);
            }
        }
    }
}

fn read_csv(path: &Path) -> Result<FieldCsv, AppError> {
    let file = std::fs::File::open(path)
        .map_err(|e| AppError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    FieldCsv::read(file).map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))
}

fn save(img: &RgbImage, path: &Path) -> Result<(), AppError> {
    img.save(path)
        .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Render a single field CSV as a white-to-green heatmap.
pub fn render_field(csv_path: &Path, out_path: &Path) -> Result<(), AppError> {
    let raw = read_csv(csv_path)?;
    let grid = InferredGrid::from_csv(&raw, csv_path)?;
    let max = raw.values.iter().copied().fold(0.0, f64::max);
    let (ns, na) = (grid.ns(), grid.na());
    let mut img = RgbImage::new(ns as u32 * CELL_PX, na as u32 * CELL_PX);
    for s in 0..ns {
        for a in 0..na {
            fill_cell(&mut img, s, a, na, value_color(raw.values[s * na + a], max));
        }
    }
    save(&img, out_path)
}

/// One rendered snapshot image.
#[derive(Debug, Clone)]
pub struct RenderedImage {
    pub path: PathBuf,
    pub samples_drawn: usize,
    pub failures_drawn: usize,
}

fn read_trace(path: &Path) -> Result<Vec<SampleRecord>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut de = serde_json::Deserializer::from_str(line);
        let record = SampleRecord::deserialize(&mut de).map_err(|e| {
            AppError::Runtime(format!("{} line {}: {e}", path.display(), lineno + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Render every snapshot in a learning-run directory: posterior mean as the
/// background heatmap, set estimates as tints, samples so far as dots, and
/// failures as crosses.
pub fn render_run(run_dir: &Path, out_dir: &Path) -> Result<Vec<RenderedImage>, AppError> {
    let trace = read_trace(&run_dir.join("trace.jsonl"))?;
    let mut stems: Vec<String> = std::fs::read_dir(run_dir)
        .map_err(|e| AppError::Runtime(format!("cannot list {}: {e}", run_dir.display())))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().into_string().ok()?;
            name.strip_suffix("-mean.csv").map(str::to_owned)
        })
        .collect();
    stems.sort();
    if stems.is_empty() {
        return Err(AppError::Runtime(format!(
            "no snapshot CSVs found in {}",
            run_dir.display()
        )));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut rendered = Vec::new();
    for stem in stems {
        let after: usize = stem
            .strip_prefix("snap-")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| AppError::Runtime(format!("unexpected snapshot name `{stem}`")))?;
        let mean = read_csv(&run_dir.join(format!("{stem}-mean.csv")))?;
        let opt = read_csv(&run_dir.join(format!("{stem}-q_opt.csv")))?;
        let caut = read_csv(&run_dir.join(format!("{stem}-q_caut.csv")))?;
        let grid = InferredGrid::from_csv(&mean, run_dir)?;
        let (ns, na) = (grid.ns(), grid.na());
        if opt.values.len() != ns * na || caut.values.len() != ns * na {
            return Err(AppError::Runtime(format!(
                "snapshot `{stem}`: set fields do not match the mean field resolution"
            )));
        }
        let max = mean.values.iter().copied().fold(0.0, f64::max);
        let mut img = RgbImage::new(ns as u32 * CELL_PX, na as u32 * CELL_PX);
        for s in 0..ns {
            for a in 0..na {
                let idx = s * na + a;
                fill_cell(&mut img, s, a, na, value_color(mean.values[idx], max));
                if opt.values[idx] != 0.0 {
                    tint_cell(&mut img, s, a, na, OPT_COLOR, 0.35);
                }
                if caut.values[idx] != 0.0 {
                    tint_cell(&mut img, s, a, na, CAUT_COLOR, 0.45);
                }
            }
        }
        let mut samples_drawn = 0;
        let mut failures_drawn = 0;
        for record in trace.iter().filter(|r| r.iteration < after) {
            let (x, y) = grid.pixel_of(record.state[0], record.action[0]);
            if record.failed {
                draw_cross(&mut img, x, y);
                failures_drawn += 1;
            } else {
                draw_dot(&mut img, x, y);
            }
            samples_drawn += 1;
        }
        let path = out_dir.join(format!("{stem}.png"));
        save(&img, &path)?;
        rendered.push(RenderedImage { path, samples_drawn, failures_drawn });
    }
    Ok(rendered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use viability::grid::{AxisGrid, Domain, ProductGrid, ScalarField};

    #[test]
    fn empty_field_renders_uniform_white() {
        let grid = Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.0, 1.0, 4).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 3).unwrap()],
            )
            .unwrap(),
        );
        let field = ScalarField::new_zero(grid, Domain::StateActions);
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("f.csv");
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        std::fs::write(&csv, buf).unwrap();
        let out = dir.path().join("f.png");
        render_field(&csv, &out).unwrap();
        let img = image::open(&out).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (4 * CELL_PX, 3 * CELL_PX));
        assert!(img.pixels().all(|p| *p == Rgb([255, 255, 255])));
    }

    #[test]
    fn value_heatmap_spans_white_to_green() {
        let grid = Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.0, 1.0, 2).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 2).unwrap()],
            )
            .unwrap(),
        );
        let mut field = ScalarField::new_zero(grid, Domain::StateActions);
        field.set(3, 2.0);
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("f.csv");
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        std::fs::write(&csv, buf).unwrap();
        let out = dir.path().join("f.png");
        render_field(&csv, &out).unwrap();
        let img = image::open(&out).unwrap().to_rgb8();
        // cell (s=0, a=0) bottom-left is white; (s=1, a=1) top-right green
        assert_eq!(*img.get_pixel(2, img.height() - 2), Rgb([255, 255, 255]));
        assert_eq!(*img.get_pixel(img.width() - 2, 2), VALUE_COLOR);
    }
}
