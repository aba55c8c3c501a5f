//! Uniform discretizations of state and state-action spaces, plus the
//! boolean/real fields (sets and measures) that live on them.
//!
//! Cell semantics are cell-centered: a cell represents its center point, and
//! a continuous coordinate snaps to the cell containing it. Coordinates
//! outside the grid clamp to the boundary cell and are flagged.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// One uniformly discretized axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    lower: f64,
    upper: f64,
    num_cells: usize,
}

impl AxisGrid {
    pub fn new(lower: f64, upper: f64, num_cells: usize) -> Result<Self, GridError> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(GridError::InvalidAxis(format!(
                "axis bounds must be finite with lower < upper, got [{lower}, {upper}]"
            )));
        }
        if num_cells == 0 {
            return Err(GridError::InvalidAxis("num_cells must be >= 1".into()));
        }
        Ok(Self { lower, upper, num_cells })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn cell_width(&self) -> f64 {
        (self.upper - self.lower) / self.num_cells as f64
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        debug_assert!(i < self.num_cells);
        self.lower + (i as f64 + 0.5) * self.cell_width()
    }

    /// Cell containing `x`, clamped to the boundary cells; the flag reports
    /// whether `x` fell outside `[lower, upper]`.
    pub fn locate(&self, x: f64) -> (usize, bool) {
        if x < self.lower {
            return (0, true);
        }
        if x > self.upper {
            return (self.num_cells - 1, true);
        }
        let i = ((x - self.lower) / self.cell_width()) as usize;
        (i.min(self.num_cells - 1), false)
    }
}

/// Which part of a [`ProductGrid`] a field is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// One value per state cell.
    States,
    /// One value per state-action cell.
    StateActions,
}

/// Snap result for a continuous point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapped {
    pub cell: usize,
    /// True when any coordinate was outside the grid bounds.
    pub clamped: bool,
}

/// Discretized product space Q = S x A. Linear cell indices are row-major
/// over all axes in declaration order (state axes outermost), so the Q index
/// of `(s, a)` is `s * num_action_cells + a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGrid {
    state_axes: Vec<AxisGrid>,
    action_axes: Vec<AxisGrid>,
    discrete: bool,
}

impl ProductGrid {
    /// Grid over a continuous system; measures are Lebesgue
    /// (cell-volume-weighted counts).
    pub fn new(state_axes: Vec<AxisGrid>, action_axes: Vec<AxisGrid>) -> Result<Self, GridError> {
        Self::build(state_axes, action_axes, false)
    }

    /// Grid over a declared-discrete system; measures are counting measures
    /// (every cell has volume 1).
    pub fn new_discrete(
        state_axes: Vec<AxisGrid>,
        action_axes: Vec<AxisGrid>,
    ) -> Result<Self, GridError> {
        Self::build(state_axes, action_axes, true)
    }

    fn build(
        state_axes: Vec<AxisGrid>,
        action_axes: Vec<AxisGrid>,
        discrete: bool,
    ) -> Result<Self, GridError> {
        if state_axes.is_empty() || action_axes.is_empty() {
            return Err(GridError::InvalidAxis(
                "a product grid needs at least one state and one action axis".into(),
            ));
        }
        Ok(Self { state_axes, action_axes, discrete })
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn state_axes(&self) -> &[AxisGrid] {
        &self.state_axes
    }

    pub fn action_axes(&self) -> &[AxisGrid] {
        &self.action_axes
    }

    pub fn state_dim(&self) -> usize {
        self.state_axes.len()
    }

    pub fn action_dim(&self) -> usize {
        self.action_axes.len()
    }

    pub fn q_dim(&self) -> usize {
        self.state_dim() + self.action_dim()
    }

    pub fn num_state_cells(&self) -> usize {
        self.state_axes.iter().map(AxisGrid::num_cells).product()
    }

    pub fn num_action_cells(&self) -> usize {
        self.action_axes.iter().map(AxisGrid::num_cells).product()
    }

    pub fn num_q_cells(&self) -> usize {
        self.num_state_cells() * self.num_action_cells()
    }

    /// Volume of one action cell: product of action cell widths, or 1 for
    /// discrete grids (counting measure).
    pub fn action_cell_volume(&self) -> f64 {
        if self.discrete {
            1.0
        } else {
            self.action_axes.iter().map(AxisGrid::cell_width).product()
        }
    }

    /// Cell counts per Q axis in declaration order (state axes first).
    pub fn q_axis_cells(&self) -> Vec<usize> {
        self.state_axes
            .iter()
            .chain(&self.action_axes)
            .map(AxisGrid::num_cells)
            .collect()
    }

    /// Cell widths per Q axis in declaration order (state axes first).
    pub fn q_axis_widths(&self) -> Vec<f64> {
        self.state_axes
            .iter()
            .chain(&self.action_axes)
            .map(AxisGrid::cell_width)
            .collect()
    }

    pub fn q_index(&self, state_cell: usize, action_cell: usize) -> usize {
        debug_assert!(state_cell < self.num_state_cells());
        debug_assert!(action_cell < self.num_action_cells());
        state_cell * self.num_action_cells() + action_cell
    }

    pub fn split_q_index(&self, q_cell: usize) -> (usize, usize) {
        debug_assert!(q_cell < self.num_q_cells());
        let na = self.num_action_cells();
        (q_cell / na, q_cell % na)
    }

    pub fn state_center(&self, state_cell: usize) -> Vec<f64> {
        Self::multi_center(&self.state_axes, state_cell)
    }

    pub fn action_center(&self, action_cell: usize) -> Vec<f64> {
        Self::multi_center(&self.action_axes, action_cell)
    }

    /// Concatenated state and action coordinates of a Q cell center.
    pub fn q_center(&self, q_cell: usize) -> Vec<f64> {
        let (s, a) = self.split_q_index(q_cell);
        let mut c = self.state_center(s);
        c.extend(self.action_center(a));
        c
    }

    fn multi_center(axes: &[AxisGrid], cell: usize) -> Vec<f64> {
        let mut rem = cell;
        let mut idx = vec![0usize; axes.len()];
        for (k, ax) in axes.iter().enumerate().rev() {
            idx[k] = rem % ax.num_cells();
            rem /= ax.num_cells();
        }
        axes.iter().zip(&idx).map(|(ax, &i)| ax.center(i)).collect()
    }

    fn multi_locate(axes: &[AxisGrid], x: &[f64]) -> Result<Snapped, GridError> {
        if x.len() != axes.len() {
            return Err(GridError::DimensionMismatch {
                expected: axes.len(),
                found: x.len(),
            });
        }
        let mut cell = 0usize;
        let mut clamped = false;
        for (ax, &xi) in axes.iter().zip(x) {
            if !xi.is_finite() {
                return Err(GridError::NonFiniteCoordinate);
            }
            let (i, c) = ax.locate(xi);
            cell = cell * ax.num_cells() + i;
            clamped |= c;
        }
        Ok(Snapped { cell, clamped })
    }

    /// Snap a continuous state to its containing cell.
    pub fn locate_state(&self, x: &[f64]) -> Result<Snapped, GridError> {
        Self::multi_locate(&self.state_axes, x)
    }

    /// Snap a continuous action to its containing cell.
    pub fn locate_action(&self, a: &[f64]) -> Result<Snapped, GridError> {
        Self::multi_locate(&self.action_axes, a)
    }

    fn domain_len(&self, domain: Domain) -> usize {
        match domain {
            Domain::States => self.num_state_cells(),
            Domain::StateActions => self.num_q_cells(),
        }
    }

    fn csv_header(&self, domain: Domain) -> String {
        let mut h = String::new();
        for k in 0..self.state_dim() {
            let _ = write!(h, "s{k},");
        }
        if domain == Domain::StateActions {
            for k in 0..self.action_dim() {
                let _ = write!(h, "a{k},");
            }
        }
        h.push_str("value");
        h
    }

    fn csv_coords(&self, domain: Domain, cell: usize) -> Vec<f64> {
        match domain {
            Domain::States => self.state_center(cell),
            Domain::StateActions => self.q_center(cell),
        }
    }
}

macro_rules! field_common {
    ($name:ident, $value:ty) => {
        impl $name {
            pub fn grid(&self) -> &Arc<ProductGrid> {
                &self.grid
            }

            pub fn domain(&self) -> Domain {
                self.domain
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn values(&self) -> &[$value] {
                &self.values
            }

            pub fn get(&self, cell: usize) -> $value {
                self.values[cell]
            }

            pub fn set(&mut self, cell: usize, value: $value) {
                self.values[cell] = value;
            }

            /// Errors unless `other` is structurally the same grid and domain.
            pub fn check_compatible(&self, other: &$name) -> Result<(), GridError> {
                if self.domain != other.domain {
                    return Err(GridError::DomainMismatch);
                }
                if *self.grid != *other.grid {
                    return Err(GridError::GridMismatch);
                }
                Ok(())
            }
        }
    };
}

/// A boolean value per grid cell; represents a subset of S or Q.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    grid: Arc<ProductGrid>,
    domain: Domain,
    values: Vec<bool>,
}

field_common!(IndicatorField, bool);

impl IndicatorField {
    pub fn new_false(grid: Arc<ProductGrid>, domain: Domain) -> Self {
        let n = grid.domain_len(domain);
        Self { grid, domain, values: vec![false; n] }
    }

    pub fn from_values(
        grid: Arc<ProductGrid>,
        domain: Domain,
        values: Vec<bool>,
    ) -> Result<Self, GridError> {
        if values.len() != grid.domain_len(domain) {
            return Err(GridError::ValueCountMismatch {
                expected: grid.domain_len(domain),
                found: values.len(),
            });
        }
        Ok(Self { grid, domain, values })
    }

    pub fn count_true(&self) -> usize {
        self.values.iter().filter(|v| **v).count()
    }

    /// Project a Q set onto state space: a state cell is in the projection
    /// iff at least one action cell in its slice is set.
    pub fn project_to_states(&self) -> Result<IndicatorField, GridError> {
        if self.domain != Domain::StateActions {
            return Err(GridError::DomainMismatch);
        }
        let na = self.grid.num_action_cells();
        let values = self
            .values
            .chunks_exact(na)
            .map(|slice| slice.iter().any(|v| *v))
            .collect();
        IndicatorField::from_values(Arc::clone(&self.grid), Domain::States, values)
    }

    /// Measure of the action slice at `state_cell`: true-cell count weighted
    /// by the action cell volume (counting measure on discrete grids).
    pub fn slice_measure(&self, state_cell: usize) -> f64 {
        assert_eq!(self.domain, Domain::StateActions, "slice_measure needs a Q field");
        let na = self.grid.num_action_cells();
        let start = state_cell * na;
        let count = self.values[start..start + na].iter().filter(|v| **v).count();
        count as f64 * self.grid.action_cell_volume()
    }

    /// Total measure of the set: sum of slice measures over all states.
    pub fn total_measure(&self) -> f64 {
        self.count_true() as f64 * self.grid.action_cell_volume()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.grid.csv_header(self.domain))?;
        for (cell, v) in self.values.iter().enumerate() {
            for c in self.grid.csv_coords(self.domain, cell) {
                write!(w, "{c},")?;
            }
            writeln!(w, "{}", u8::from(*v))?;
        }
        Ok(())
    }
}

/// A non-negative real value per grid cell; represents a measure over S or Q.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<ProductGrid>,
    domain: Domain,
    values: Vec<f64>,
}

field_common!(ScalarField, f64);

impl ScalarField {
    pub fn new_zero(grid: Arc<ProductGrid>, domain: Domain) -> Self {
        let n = grid.domain_len(domain);
        Self { grid, domain, values: vec![0.0; n] }
    }

    pub fn from_values(
        grid: Arc<ProductGrid>,
        domain: Domain,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        if values.len() != grid.domain_len(domain) {
            return Err(GridError::ValueCountMismatch {
                expected: grid.domain_len(domain),
                found: values.len(),
            });
        }
        Ok(Self { grid, domain, values })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Cells whose value strictly exceeds `lambda`.
    pub fn level_set(&self, lambda: f64) -> Result<IndicatorField, GridError> {
        if !(lambda >= 0.0) {
            return Err(GridError::NegativeLevel(lambda));
        }
        let values = self.values.iter().map(|&v| v > lambda).collect();
        IndicatorField::from_values(Arc::clone(&self.grid), self.domain, values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.grid.csv_header(self.domain))?;
        for (cell, v) in self.values.iter().enumerate() {
            for c in self.grid.csv_coords(self.domain, cell) {
                write!(w, "{c},")?;
            }
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// Raw contents of a field CSV: header names, one coordinate row per cell,
/// and the value column. Keeps no grid; see [`FieldCsv::infer_axes`].
#[derive(Debug, Clone)]
pub struct FieldCsv {
    pub columns: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl FieldCsv {
    pub fn read<R: Read>(r: R) -> Result<Self, GridError> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| GridError::Csv("empty file".into()))?
            .map_err(|e| GridError::Csv(e.to_string()))?;
        let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
        if columns.last().map(String::as_str) != Some("value") || columns.len() < 2 {
            return Err(GridError::Csv(format!("unexpected header `{header}`")));
        }
        let ncoord = columns.len() - 1;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| GridError::Csv(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(GridError::Csv(format!(
                    "row {}: expected {} fields, found {}",
                    lineno + 2,
                    columns.len(),
                    fields.len()
                )));
            }
            let row: Result<Vec<f64>, _> = fields[..ncoord].iter().map(|f| f.parse()).collect();
            let row = row.map_err(|e| GridError::Csv(format!("row {}: {e}", lineno + 2)))?;
            let value = fields[ncoord]
                .parse()
                .map_err(|e| GridError::Csv(format!("row {}: {e}", lineno + 2)))?;
            coords.push(row);
            values.push(value);
        }
        Ok(Self { columns, coords, values })
    }

    /// Number of coordinate columns whose names start with `s`.
    pub fn state_dims(&self) -> usize {
        self.columns.iter().filter(|c| c.starts_with('s')).count()
    }

    /// Reconstruct the uniform axis behind each coordinate column, assuming
    /// row-major cell-center layout. Returns the sorted distinct centers per
    /// column.
    pub fn infer_axes(&self) -> Result<Vec<Vec<f64>>, GridError> {
        let ncoord = self.columns.len() - 1;
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); ncoord];
        for row in &self.coords {
            for (k, &c) in row.iter().enumerate() {
                if !axes[k].iter().any(|&v| v == c) {
                    axes[k].push(c);
                }
            }
        }
        for ax in &mut axes {
            ax.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
        }
        let cells: usize = axes.iter().map(Vec::len).product();
        if cells != self.values.len() {
            return Err(GridError::Csv(format!(
                "rows do not form a full grid: {} rows vs {} inferred cells",
                self.values.len(),
                cells
            )));
        }
        Ok(axes)
    }
}
