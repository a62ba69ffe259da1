//! Configurations: relative arrangements of grid cells that can host the legs of an appearance,
//! and their copies among the retained cells of a sparsified grid.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{detect_components, Cell, CellTag, GridDecomposition};
use crate::pattern::Pattern;
use crate::region::BoxRegion;

/// An abstract placement of the legs of a `nu`-appearance into cells of a relative grid.
///
/// Leg `i` sits in the cell with relative stripe `leg_pos[i].0` and relative layer
/// `leg_pos[i].1`. Stripes are nondecreasing in leg order and layers are nondecreasing in
/// value order, so every configuration can host an appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration {
    pub leg_pos: Vec<(usize, usize)>,
    /// Distinct cells `(x, y)`, sorted.
    pub cells: Vec<(usize, usize)>,
    /// Leg to index in `cells`.
    pub leg_cell: Vec<usize>,
    pub components: Vec<ConfigComponent>,
}

/// One connected component of a configuration, with its share of the pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ConfigComponent {
    /// Indices into the configuration's `cells`, increasing.
    pub cells: Vec<usize>,
    /// Legs of the parent pattern placed in this component, increasing.
    pub legs: Vec<usize>,
    /// The sub-pattern formed by those legs.
    pub nu: Pattern,
    /// For each local leg, the position of its cell within `cells`.
    pub leg_cell: Vec<usize>,
}

impl Configuration {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// All `4^(r-1)` configurations of a length-`r` pattern.
///
/// A configuration is fixed by which consecutive legs (in index order) change stripe and which
/// consecutive values change layer.
pub fn abstract_configurations(nu: &Pattern) -> Vec<Configuration> {
    let r = nu.len();
    let by_value = nu.legs_by_value();
    let choices = 1usize << (r - 1);
    let mut out = Vec::with_capacity(choices * choices);
    for xbits in 0..choices {
        for ybits in 0..choices {
            let mut leg_pos = vec![(0usize, 0usize); r];
            for leg in 1..r {
                leg_pos[leg].0 = leg_pos[leg - 1].0 + (xbits >> (leg - 1) & 1);
            }
            for v in 1..r {
                let prev = leg_pos[by_value[v - 1]].1;
                leg_pos[by_value[v]].1 = prev + (ybits >> (v - 1) & 1);
            }
            out.push(build_configuration(nu, leg_pos));
        }
    }
    out
}

fn build_configuration(nu: &Pattern, leg_pos: Vec<(usize, usize)>) -> Configuration {
    let mut cells = leg_pos.clone();
    cells.sort_unstable();
    cells.dedup();
    let leg_cell: Vec<usize> =
        leg_pos.iter().map(|p| cells.binary_search(p).expect("cell present")).collect();
    let as_cells: Vec<Cell> = cells.iter().map(|&(x, y)| Cell::new(x, y)).collect();
    let components = detect_components(&as_cells)
        .into_iter()
        .map(|comp| {
            let idx: Vec<usize> = comp
                .cells
                .iter()
                .map(|c| cells.binary_search(&(c.stripe, c.layer)).expect("cell present"))
                .collect();
            let legs: Vec<usize> =
                (0..nu.len()).filter(|&l| idx.contains(&leg_cell[l])).collect();
            let local: Vec<usize> = legs
                .iter()
                .map(|&l| idx.iter().position(|&c| c == leg_cell[l]).expect("leg cell in component"))
                .collect();
            ConfigComponent { cells: idx, nu: nu.sub_pattern(&legs), legs, leg_cell: local }
        })
        .collect();
    Configuration { leg_pos, cells, leg_cell, components }
}

/// A configuration together with its copies in a grid.
#[derive(Debug, Clone)]
pub struct ConfigurationCopies {
    pub config: Configuration,
    /// `copies[i]` lists the copies of component `i`; each copy maps the component's local
    /// cells (in the order of `ConfigComponent::cells`) to grid cells.
    pub copies: Vec<Arc<Vec<Vec<Cell>>>>,
}

/// Cells of `grid` that survived sparsification, indexed by line.
struct Retained {
    by_stripe: Vec<Vec<usize>>,
    by_layer: Vec<Vec<usize>>,
    all: Vec<Cell>,
}

/// Enumerates the configurations of `nu` consistent with the leg mapping `phi` into `boxes`,
/// and the copies of each of their components among the dense cells of `grid`.
///
/// A copy maps the component's relative stripes and layers to grid stripes and layers by
/// strictly increasing maps, uses only dense cells, places every leg in a cell contained in its
/// box `boxes[phi[leg]]`, and uses at most one cell from any single-valued layer. Enumerating
/// more than `copy_cap` copies of one component is an error.
pub fn enumerate_configurations(
    nu: &Pattern,
    boxes: &[BoxRegion],
    phi: &[usize],
    grid: &GridDecomposition,
    copy_cap: f64,
) -> Result<Vec<ConfigurationCopies>> {
    let r = nu.len();
    let m = grid.m_prime();
    let stripe_in: Vec<Vec<bool>> = (0..m)
        .map(|s| boxes.iter().map(|b| grid.stripes[s].is_subset(&b.index_set)).collect())
        .collect();
    let layer_in: Vec<Vec<bool>> = (0..grid.layers.len())
        .map(|l| boxes.iter().map(|b| grid.layers[l].values.is_subset(&b.value_set)).collect())
        .collect();
    let mut retained = Retained {
        by_stripe: vec![Vec::new(); m],
        by_layer: vec![Vec::new(); grid.layers.len()],
        all: Vec::new(),
    };
    for c in grid.cells_with(|t| t == CellTag::Dense) {
        retained.by_stripe[c.stripe].push(c.layer);
        retained.by_layer[c.layer].push(c.stripe);
        retained.all.push(c);
    }

    let mut memo: HashMap<ShapeKey, Arc<Vec<Vec<Cell>>>> = HashMap::new();
    let mut out = Vec::new();
    for config in abstract_configurations(nu) {
        if !consistent_with_boxes(&config, boxes, phi) {
            continue;
        }
        let mut copies = Vec::with_capacity(config.components.len());
        for comp in &config.components {
            let key = shape_key(&config, comp, phi, r);
            let entry = match memo.get(&key) {
                Some(c) => c.clone(),
                None => {
                    let found = Arc::new(copies_of_shape(
                        &key, grid, &retained, &stripe_in, &layer_in, copy_cap,
                    )?);
                    memo.insert(key, found.clone());
                    found
                }
            };
            copies.push(entry);
        }
        out.push(ConfigurationCopies { config, copies });
    }
    Ok(out)
}

/// Legs mapped to boxes on different stripes (layers) cannot share a relative stripe (layer).
fn consistent_with_boxes(config: &Configuration, boxes: &[BoxRegion], phi: &[usize]) -> bool {
    let r = phi.len();
    for i in 0..r {
        for j in i + 1..r {
            let (bi, bj) = (&boxes[phi[i]], &boxes[phi[j]]);
            let (pi, pj) = (config.leg_pos[i], config.leg_pos[j]);
            if pi.0 == pj.0 && bi.index_set != bj.index_set {
                return false;
            }
            if pi.1 == pj.1 && bi.value_set != bj.value_set {
                return false;
            }
        }
    }
    true
}

/// A component shape: its cells in relative coordinates (compressed to ranks), plus the set of
/// boxes each cell must lie in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ShapeKey {
    cells: Vec<(usize, usize)>,
    required: Vec<u64>,
}

fn shape_key(config: &Configuration, comp: &ConfigComponent, phi: &[usize], r: usize) -> ShapeKey {
    let raw: Vec<(usize, usize)> = comp.cells.iter().map(|&c| config.cells[c]).collect();
    let mut xs: Vec<usize> = raw.iter().map(|c| c.0).collect();
    let mut ys: Vec<usize> = raw.iter().map(|c| c.1).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let cells = raw
        .iter()
        .map(|&(x, y)| (xs.binary_search(&x).unwrap(), ys.binary_search(&y).unwrap()))
        .collect();
    let mut required = vec![0u64; comp.cells.len()];
    for (leg_cell, &b) in config.leg_cell.iter().zip(phi).take(r) {
        if let Some(pos) = comp.cells.iter().position(|c| c == leg_cell) {
            required[pos] |= 1u64 << b;
        }
    }
    ShapeKey { cells, required }
}

fn copies_of_shape(
    key: &ShapeKey,
    grid: &GridDecomposition,
    retained: &Retained,
    stripe_in: &[Vec<bool>],
    layer_in: &[Vec<bool>],
    cap: f64,
) -> Result<Vec<Vec<Cell>>> {
    let t = key.cells.len();
    // Visit cells so that each one after the first shares a stripe or a layer with an earlier one.
    let mut order = vec![0usize];
    let mut anchor = vec![usize::MAX; t];
    while order.len() < t {
        let next = (0..t)
            .filter(|c| !order.contains(c))
            .find_map(|c| {
                order
                    .iter()
                    .find(|&&o| key.cells[o].0 == key.cells[c].0 || key.cells[o].1 == key.cells[c].1)
                    .map(|&o| (c, o))
            })
            .expect("component cells are connected");
        anchor[next.0] = next.1;
        order.push(next.0);
    }

    let fits = |c: Cell, required: u64| {
        (0..64).filter(|b| required >> b & 1 == 1).all(|b| stripe_in[c.stripe][b] && layer_in[c.layer][b])
    };

    struct Walk<'a> {
        key: &'a ShapeKey,
        grid: &'a GridDecomposition,
        order: &'a [usize],
        anchor: &'a [usize],
        assigned: Vec<Option<Cell>>,
        out: Vec<Vec<Cell>>,
        cap: f64,
    }

    impl Walk<'_> {
        fn compatible(&self, local: usize, c: Cell) -> bool {
            let (x, y) = self.key.cells[local];
            for (other, a) in self.assigned.iter().enumerate() {
                let Some(a) = a else { continue };
                let (ox, oy) = self.key.cells[other];
                if x.cmp(&ox) != c.stripe.cmp(&a.stripe) || y.cmp(&oy) != c.layer.cmp(&a.layer) {
                    return false;
                }
                if y == oy && self.grid.layers[c.layer].single_valued {
                    return false;
                }
            }
            true
        }
    }

    let mut walk = Walk { key, grid, order: &order, anchor: &anchor, assigned: vec![None; t], out: Vec::new(), cap };

    fn rec(
        walk: &mut Walk<'_>,
        depth: usize,
        retained: &Retained,
        fits: &dyn Fn(Cell, u64) -> bool,
    ) -> Result<()> {
        if depth == walk.order.len() {
            walk.out.push(walk.assigned.iter().map(|c| c.expect("assigned")).collect());
            if walk.out.len() as f64 > walk.cap {
                return Err(Error::Internal(format!(
                    "configuration copies exceed the cap of {}",
                    walk.cap
                )));
            }
            return Ok(());
        }
        let local = walk.order[depth];
        let candidates: Vec<Cell> = if depth == 0 {
            retained.all.clone()
        } else {
            let a = walk.assigned[walk.anchor[local]].expect("anchor assigned");
            let (ax, _) = walk.key.cells[walk.anchor[local]];
            if walk.key.cells[local].0 == ax {
                retained.by_stripe[a.stripe].iter().map(|&l| Cell::new(a.stripe, l)).collect()
            } else {
                retained.by_layer[a.layer].iter().map(|&s| Cell::new(s, a.layer)).collect()
            }
        };
        for c in candidates {
            if fits(c, walk.key.required[local]) && walk.compatible(local, c) {
                walk.assigned[local] = Some(c);
                rec(walk, depth + 1, retained, fits)?;
                walk.assigned[local] = None;
            }
        }
        Ok(())
    }

    rec(&mut walk, 0, retained, &fits)?;
    Ok(walk.out)
}
