//! Reading grid fields back from their CSV files.

use std::path::Path;
use std::sync::Arc;

use viability::grid::{Domain, FieldCsv, IndicatorField, ProductGrid, ScalarField};

use crate::AppError;

fn read_raw(path: &Path, grid: &Arc<ProductGrid>, domain: Domain) -> Result<FieldCsv, AppError> {
    let file = std::fs::File::open(path)
        .map_err(|e| AppError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    let raw = FieldCsv::read(file)
        .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
    let expected = match domain {
        Domain::States => grid.num_state_cells(),
        Domain::StateActions => grid.num_q_cells(),
    };
    if raw.values.len() != expected {
        return Err(AppError::Runtime(format!(
            "{}: {} rows but the configured grid has {expected} cells; \
             was it written at a different resolution?",
            path.display(),
            raw.values.len()
        )));
    }
    // spot-check that the coordinates are this grid's cell centers
    for probe in [0, expected / 2, expected - 1] {
        let center = match domain {
            Domain::States => grid.state_center(probe),
            Domain::StateActions => grid.q_center(probe),
        };
        let row = &raw.coords[probe];
        if row.len() != center.len()
            || row.iter().zip(&center).any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Err(AppError::Runtime(format!(
                "{}: row {probe} coordinates {row:?} do not match the configured grid ({center:?})",
                path.display()
            )));
        }
    }
    Ok(raw)
}

pub fn read_scalar(
    path: &Path,
    grid: &Arc<ProductGrid>,
    domain: Domain,
) -> Result<ScalarField, AppError> {
    let raw = read_raw(path, grid, domain)?;
    ScalarField::from_values(Arc::clone(grid), domain, raw.values)
        .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))
}

pub fn read_indicator(
    path: &Path,
    grid: &Arc<ProductGrid>,
    domain: Domain,
) -> Result<IndicatorField, AppError> {
    let raw = read_raw(path, grid, domain)?;
    let values = raw
        .values
        .iter()
        .map(|&v| match v {
            v if v == 0.0 => Ok(false),
            v if v == 1.0 => Ok(true),
            v => Err(AppError::Runtime(format!(
                "{}: indicator value {v} is neither 0 nor 1",
                path.display()
            ))),
        })
        .collect::<Result<Vec<bool>, _>>()?;
    IndicatorField::from_values(Arc::clone(grid), domain, values)
        .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use viability::grid::AxisGrid;

    fn grid() -> Arc<ProductGrid> {
        Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.0, 1.0, 3).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 2).unwrap()],
            )
            .unwrap(),
        )
    }

    #[test]
    fn round_trip_indicator() {
        let g = grid();
        let mut f = IndicatorField::new_false(Arc::clone(&g), Domain::StateActions);
        f.set(3, true);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        std::fs::write(&path, buf).unwrap();
        let back = read_indicator(&path, &g, Domain::StateActions).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn wrong_resolution_is_detected() {
        let g = grid();
        let f = ScalarField::new_zero(Arc::clone(&g), Domain::StateActions);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        std::fs::write(&path, buf).unwrap();
        let other = Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.0, 1.0, 4).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 2).unwrap()],
            )
            .unwrap(),
        );
        assert!(read_scalar(&path, &other, Domain::StateActions).is_err());
        // same cell count, shifted coordinates
        let shifted = Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.5, 1.5, 3).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 2).unwrap()],
            )
            .unwrap(),
        );
        assert!(read_scalar(&path, &shifted, Domain::StateActions).is_err());
    }
}
