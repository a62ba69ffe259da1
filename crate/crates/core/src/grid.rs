//! Grid decompositions of a box into stripes and layers, and connected components of cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::region::{BoxRegion, IndexSet, ValueSet};
use crate::sequence::Point;

/// Tag of a grid cell after gridding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellTag {
    Unmarked,
    Marked,
    Dense,
}

impl CellTag {
    pub fn is_marked(self) -> bool {
        self != CellTag::Unmarked
    }
}

/// A cell of a grid: stripe (index slab) and layer (value slab), both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub stripe: usize,
    pub layer: usize,
}

impl Cell {
    pub fn new(stripe: usize, layer: usize) -> Self {
        Self { stripe, layer }
    }
}

/// One layer of a layering: a value set with its sampled weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub values: ValueSet,
    /// Whether the layer came from a single heavy sampled value.
    pub single_valued: bool,
    /// Number of in-region samples that fell in this layer.
    pub weight: usize,
    /// Estimated density `weight / u`.
    pub est_density: f64,
}

/// An `m' x m'` grid of cells over a box, with marked/dense tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDecomposition {
    pub region: BoxRegion,
    pub stripes: Vec<IndexSet>,
    pub layers: Vec<Layer>,
    /// Row-major by stripe: `tags[stripe * m' + layer]`.
    pub tags: Vec<CellTag>,
    /// Fraction of the stripe's samples that fell in each cell.
    pub est_density: Vec<f64>,
    /// One sampled point per marked cell.
    pub cell_sample: Vec<Option<Point>>,
    /// Every nonerased point queried while building the grid, sorted by index.
    pub sample_points: Vec<Point>,
    /// Number of sampled draws per stripe.
    pub stripe_draws: Vec<usize>,
}

impl GridDecomposition {
    /// Number of stripes (equal to the number of layers).
    pub fn m_prime(&self) -> usize {
        self.stripes.len()
    }

    fn offset(&self, cell: Cell) -> usize {
        cell.stripe * self.layers.len() + cell.layer
    }

    pub fn tag(&self, cell: Cell) -> CellTag {
        self.tags[self.offset(cell)]
    }

    pub fn set_tag(&mut self, cell: Cell, tag: CellTag) {
        let o = self.offset(cell);
        self.tags[o] = tag;
    }

    pub fn density(&self, cell: Cell) -> f64 {
        self.est_density[self.offset(cell)]
    }

    pub fn sample(&self, cell: Cell) -> Option<Point> {
        self.cell_sample[self.offset(cell)]
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let l = self.layers.len();
        (0..self.stripes.len()).flat_map(move |s| (0..l).map(move |j| Cell::new(s, j)))
    }

    pub fn cells_with(&self, pred: impl Fn(CellTag) -> bool) -> Vec<Cell> {
        self.cells().filter(|&c| pred(self.tag(c))).collect()
    }

    pub fn marked_cells(&self) -> Vec<Cell> {
        self.cells_with(CellTag::is_marked)
    }

    pub fn dense_cells(&self) -> Vec<Cell> {
        self.cells_with(|t| t == CellTag::Dense)
    }

    pub fn count_marked(&self) -> usize {
        self.tags.iter().filter(|t| t.is_marked()).count()
    }

    /// The box of a cell: its stripe times its layer.
    pub fn cell_box(&self, cell: Cell) -> BoxRegion {
        BoxRegion::new(self.stripes[cell.stripe].clone(), self.layers[cell.layer].values.clone())
    }

    /// The stripe containing `index`, if any.
    pub fn stripe_of(&self, index: usize) -> Option<usize> {
        let s = self
            .stripes
            .partition_point(|st| st.max().is_some_and(|hi| hi < index));
        (s < self.stripes.len() && self.stripes[s].contains(index)).then_some(s)
    }

    /// The layer containing `value`, if any.
    pub fn layer_of(&self, value: f64) -> Option<usize> {
        let j = self
            .layers
            .partition_point(|l| l.values.sup().is_some_and(|hi| hi < value));
        (j < self.layers.len() && self.layers[j].values.contains(value)).then_some(j)
    }

    pub fn cell_of(&self, p: &Point) -> Option<Cell> {
        Some(Cell::new(self.stripe_of(p.index)?, self.layer_of(p.value)?))
    }
}

/// A maximal set of cells connected through shared stripes or shared layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    /// Cells in increasing (stripe, layer) order.
    pub cells: Vec<Cell>,
}

/// Partitions `cells` into maximal connected components.
///
/// Two cells are directly connected when they share a stripe or a layer. The result is sorted
/// (cells within a component, and components by first cell), so it does not depend on the
/// order of the input.
pub fn detect_components(cells: &[Cell]) -> Vec<Component> {
    let mut cells: Vec<Cell> = cells.to_vec();
    cells.sort_unstable();
    cells.dedup();
    let n = cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut by_stripe: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_layer: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        for first in [*by_stripe.entry(c.stripe).or_insert(i), *by_layer.entry(c.layer).or_insert(i)]
        {
            let (a, b) = (find(&mut parent, first), find(&mut parent, i));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Cell>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(*c);
    }
    let mut out: Vec<Component> = groups.into_values().map(|cells| Component { cells }).collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[(usize, usize)]) -> Vec<Cell> {
        v.iter().map(|&(s, l)| Cell::new(s, l)).collect()
    }

    #[test]
    fn four_component_arrangement() {
        let comps = detect_components(&cells(&[(1, 3), (2, 2), (3, 1), (4, 4)]));
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|c| c.cells.len() == 1));
    }

    #[test]
    fn shared_layer_connects() {
        let comps = detect_components(&cells(&[(1, 2), (3, 2)]));
        assert_eq!(comps, vec![Component { cells: cells(&[(1, 2), (3, 2)]) }]);
    }

    #[test]
    fn transitive_closure() {
        let comps = detect_components(&cells(&[(1, 1), (1, 2), (2, 3)]));
        assert_eq!(
            comps,
            vec![
                Component { cells: cells(&[(1, 1), (1, 2)]) },
                Component { cells: cells(&[(2, 3)]) }
            ]
        );
        let chain = detect_components(&cells(&[(0, 0), (0, 5), (3, 5), (3, 9), (7, 1)]));
        assert_eq!(chain.len(), 2);
        assert_eq!(chain[0].cells.len(), 4);
    }

    #[test]
    fn cell_lookup() {
        let grid = GridDecomposition {
            region: BoxRegion::full(6),
            stripes: IndexSet::range(0, 6).split_equal(2),
            layers: vec![
                Layer {
                    values: ValueSet::interval(f64::NEG_INFINITY, 2.0),
                    single_valued: false,
                    weight: 3,
                    est_density: 0.5,
                },
                Layer {
                    values: ValueSet::interval(2.0, 5.0),
                    single_valued: false,
                    weight: 3,
                    est_density: 0.5,
                },
            ],
            tags: vec![CellTag::Unmarked; 4],
            est_density: vec![0.0; 4],
            cell_sample: vec![None; 4],
            sample_points: vec![],
            stripe_draws: vec![0, 0],
        };
        assert_eq!(grid.cell_of(&Point::new(4, 2.5)), Some(Cell::new(1, 1)));
        assert_eq!(grid.cell_of(&Point::new(0, 2.0)), Some(Cell::new(0, 0)));
        assert_eq!(grid.cell_of(&Point::new(0, 9.0)), None);
        assert_eq!(grid.cell_box(Cell::new(1, 0)).index_set, IndexSet::range(3, 6));
    }
}
