//! Turning a pattern arrangement of marked cells into a concrete appearance.

use crate::error::{Error, Result};
use crate::grid::{Cell, GridDecomposition};
use crate::pattern::Pattern;
use crate::search::{find_pattern, PointSet};
use crate::sequence::Point;

/// Finds `k` marked cells with strictly increasing stripes whose layers follow `pattern`.
pub fn find_cell_arrangement(cells: &[Cell], pattern: &Pattern) -> Option<Vec<Cell>> {
    let points: Vec<Point> = cells.iter().map(|c| Point::new(c.stripe, c.layer as f64)).collect();
    let found = find_pattern(&PointSet::new(points), pattern)?;
    Some(found.iter().map(|p| Cell::new(p.index, p.value as usize)).collect())
}

/// Finds a `pattern` arrangement among the marked cells of `grid` and returns the stored
/// sample point of each of its cells, which together form an appearance of `pattern`.
pub fn extract_pi_witness(grid: &GridDecomposition, pattern: &Pattern) -> Result<Vec<Point>> {
    let marked = grid.marked_cells();
    let cells = find_cell_arrangement(&marked, pattern).ok_or(Error::NoPlacement { k: pattern.len() })?;
    cells
        .iter()
        .map(|&c| {
            grid.sample(c)
                .ok_or_else(|| Error::Internal(format!("marked cell {c:?} has no stored sample")))
        })
        .collect()
}
