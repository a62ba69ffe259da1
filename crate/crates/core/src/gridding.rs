//! Randomized coarse approximation of a box: layering, gridding and sparsification.
//!
//! Logarithms are base 2 and always taken of the global sequence length `n`. Sample counts that
//! reach the size of the set being sampled are replaced by querying every member of the set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, CellTag, GridDecomposition, Layer};
use crate::region::{BoxRegion, ValueSet};
use crate::sequence::{Point, QueryAccess};

/// `log2(n)`, floored at 1 so that sample counts stay positive for tiny inputs.
pub fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// A layering of a box into at most `2m` value layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NicePartition {
    pub layers: Vec<Layer>,
    /// Number of in-region sampled points.
    pub u: usize,
    /// Number of index draws made (with replacement), or `|S|` when every index was queried.
    pub draws: usize,
    /// Whether every index of the region was queried.
    pub exhaustive: bool,
    /// Layers removed because they straddled a gap of the region's value set.
    pub dropped: usize,
    /// Every nonerased point queried, sorted by index, without duplicates.
    pub sample_points: Vec<Point>,
}

/// Sample target `ceil(m log^2 n)` and draw budget `floor(m log^4 n)` of [`layering`].
pub fn layering_sample_sizes(n: usize, m: usize) -> (usize, usize) {
    let l = log2n(n);
    let target = (m as f64 * l * l).ceil() as usize;
    let budget = (m as f64 * l.powi(4)).floor() as usize;
    (target, budget.max(target))
}

/// Layers the box `region` into value slabs of roughly equal sampled weight.
///
/// Draws random indices of the region until `ceil(m log^2 n)` of them land inside the box or
/// `m log^4 n` draws were made; if the target already reaches `|S|`, queries all of `S` instead.
/// The sorted sampled values are chunked greedily (see [`chunk_layers`]).
pub fn layering<A: QueryAccess, R: Rng>(
    access: &mut A,
    region: &BoxRegion,
    m: usize,
    rng: &mut R,
) -> Result<NicePartition> {
    let s = &region.index_set;
    let size = s.len();
    if size == 0 {
        return Err(Error::EmptyRegion);
    }
    let (target, budget) = layering_sample_sizes(access.len(), m);
    let mut queried: Vec<Point> = Vec::new();
    let mut in_region: Vec<f64> = Vec::new();
    let exhaustive = target >= size;
    let draws = if exhaustive {
        for idx in s.iter() {
            if let Some(v) = access.query(idx)? {
                queried.push(Point::new(idx, v));
                if region.value_set.contains(v) {
                    in_region.push(v);
                }
            }
        }
        size
    } else {
        let mut draws = 0;
        while in_region.len() < target && draws < budget {
            let idx = s.nth(rng.random_range(0..size)).expect("rank within set");
            draws += 1;
            if let Some(v) = access.query(idx)? {
                queried.push(Point::new(idx, v));
                if region.value_set.contains(v) {
                    in_region.push(v);
                }
            }
        }
        draws
    };
    if in_region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut partition = chunk_layers(&mut in_region, &region.value_set, m);
    partition.draws = draws;
    partition.exhaustive = exhaustive;
    partition.sample_points = dedup_points(queried);
    if partition.layers.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(partition)
}

/// Deterministic part of layering: chunks sampled in-region values into layers.
///
/// Distinct sampled values `v_1 < ... < v_q` carry weights equal to their multiplicities. Each
/// chunk is either a single value of weight `> u/m` (single-valued) or a maximal run whose total
/// weight stays `< 2u/m`. Chunk `j` with maximum `b_j` yields the layer `(b_{j-1}, b_j] ∩ I`
/// with `b_0 = inf I`; layers that fall into two separate pieces of `I` are dropped.
pub fn chunk_layers(values: &mut [f64], region_values: &ValueSet, m: usize) -> NicePartition {
    values.sort_by(f64::total_cmp);
    let u = values.len();
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in values.iter() {
        match distinct.last_mut() {
            Some((last, w)) if *last == v => *w += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let m = m.max(1);
    let heavy = |w: usize| w * m > u;
    let mut layers = Vec::new();
    let mut dropped = 0;
    let mut lower = region_values.inf().unwrap_or(f64::NEG_INFINITY);
    let mut i = 0;
    while i < distinct.len() {
        let (single, end, weight) = if heavy(distinct[i].1) {
            (true, i + 1, distinct[i].1)
        } else {
            let mut sum = distinct[i].1;
            let mut j = i + 1;
            while j < distinct.len() && (sum + distinct[j].1) * m < 2 * u {
                sum += distinct[j].1;
                j += 1;
            }
            (false, j, sum)
        };
        let upper = distinct[end - 1].0;
        let values = ValueSet::interval(lower, upper).intersect(region_values);
        if values.intervals().len() > 1 {
            dropped += 1;
        } else {
            layers.push(Layer {
                values,
                single_valued: single,
                weight,
                est_density: weight as f64 / u as f64,
            });
        }
        lower = upper;
        i = end;
    }
    NicePartition { layers, u, draws: u, exhaustive: false, dropped, sample_points: Vec::new() }
}

/// Per-stripe sample count `ceil(log^4 n / (50 beta^2))`, as a float since it can be enormous.
pub fn stripe_sample_size(n: usize, beta: f64) -> f64 {
    (log2n(n).powi(4) / (50.0 * beta * beta)).ceil()
}

/// Layers the region, splits it into as many equal stripes, and tags the resulting cells.
pub fn gridding<A: QueryAccess, R: Rng>(
    access: &mut A,
    region: &BoxRegion,
    m: usize,
    beta: f64,
    rng: &mut R,
) -> Result<GridDecomposition> {
    let partition = layering(access, region, m, rng)?;
    gridding_with_layers(access, region, partition, beta, rng)
}

/// The stripe-sampling half of [`gridding`], given a layering of `region`.
///
/// Each stripe receives `ceil(log^4 n / (50 beta^2))` uniform draws, or is queried in full when
/// that reaches its length. A cell hit by any draw is marked; a cell receiving at least a
/// `3 beta / 4` fraction of its stripe's draws is dense.
pub fn gridding_with_layers<A: QueryAccess, R: Rng>(
    access: &mut A,
    region: &BoxRegion,
    partition: NicePartition,
    beta: f64,
    rng: &mut R,
) -> Result<GridDecomposition> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta {beta} not in (0,1)")));
    }
    let m_prime = partition.layers.len();
    let stripes = region.index_set.split_equal(m_prime);
    let q = stripe_sample_size(access.len(), beta);
    let mut grid = GridDecomposition {
        region: region.clone(),
        stripes,
        layers: partition.layers,
        tags: vec![CellTag::Unmarked; m_prime * m_prime],
        est_density: vec![0.0; m_prime * m_prime],
        cell_sample: vec![None; m_prime * m_prime],
        sample_points: Vec::new(),
        stripe_draws: vec![0; m_prime],
    };
    let mut queried = partition.sample_points;
    let mut counts = vec![0usize; m_prime];
    for s in 0..m_prime {
        let stripe = grid.stripes[s].clone();
        let len = stripe.len();
        counts.iter_mut().for_each(|c| *c = 0);
        let mut record = |grid: &mut GridDecomposition, idx: usize, v: Option<f64>| {
            let Some(v) = v else { return };
            let p = Point::new(idx, v);
            queried.push(p);
            if let Some(j) = grid.layer_of(v) {
                counts[j] += 1;
                let cell = Cell::new(s, j);
                if grid.sample(cell).is_none() {
                    let o = s * m_prime + j;
                    grid.cell_sample[o] = Some(p);
                }
            }
        };
        let draws = if q >= len as f64 {
            for idx in stripe.iter() {
                let v = access.query(idx)?;
                record(&mut grid, idx, v);
            }
            len
        } else {
            let q = q as usize;
            for _ in 0..q {
                let idx = stripe.nth(rng.random_range(0..len)).expect("rank within stripe");
                let v = access.query(idx)?;
                record(&mut grid, idx, v);
            }
            q
        };
        grid.stripe_draws[s] = draws;
        for (j, &count) in counts.iter().enumerate() {
            let o = s * m_prime + j;
            let frac = if draws == 0 { 0.0 } else { count as f64 / draws as f64 };
            grid.est_density[o] = frac;
            grid.tags[o] = if count == 0 {
                CellTag::Unmarked
            } else if frac >= 0.75 * beta {
                CellTag::Dense
            } else {
                CellTag::Marked
            };
        }
    }
    grid.sample_points = dedup_points(queried);
    Ok(grid)
}

/// Removes heavily marked lines, then unmarks every cell that is not dense.
///
/// A stripe with more than `d` marked cells is cleared, as is a multi-valued layer with more
/// than `d` marked cells. Single-valued layers are never cleared. Every remaining cell that
/// is not dense is unmarked, so the retained cells are exactly the surviving dense ones.
pub fn sparsify(grid: &GridDecomposition, d: f64) -> GridDecomposition {
    let m_prime = grid.m_prime();
    let mut per_stripe = vec![0usize; m_prime];
    let mut per_layer = vec![0usize; grid.layers.len()];
    for c in grid.marked_cells() {
        per_stripe[c.stripe] += 1;
        per_layer[c.layer] += 1;
    }
    let mut out = grid.clone();
    for c in grid.cells() {
        let heavy_stripe = per_stripe[c.stripe] as f64 > d;
        let heavy_layer = !grid.layers[c.layer].single_valued && per_layer[c.layer] as f64 > d;
        if heavy_stripe || heavy_layer || grid.tag(c) != CellTag::Dense {
            out.set_tag(c, CellTag::Unmarked);
        }
    }
    out
}

fn dedup_points(mut points: Vec<Point>) -> Vec<Point> {
    points.sort_by_key(|p| p.index);
    points.dedup_by_key(|p| p.index);
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::IndexSet;
    use crate::sequence::SequenceOracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bounds(layer: &Layer) -> (f64, f64) {
        (layer.values.inf().unwrap(), layer.values.sup().unwrap())
    }

    #[test]
    fn chunking_four_values() {
        let p = chunk_layers(&mut [10.0, 20.0, 30.0, 40.0], &ValueSet::all(), 2);
        assert_eq!(p.layers.len(), 2);
        assert_eq!(bounds(&p.layers[0]), (f64::NEG_INFINITY, 30.0));
        assert_eq!(bounds(&p.layers[1]), (30.0, 40.0));
        assert_eq!((p.layers[0].weight, p.layers[1].weight), (3, 1));
        assert!(p.layers.iter().all(|l| !l.single_valued));
    }

    #[test]
    fn chunking_heavy_value() {
        let p = chunk_layers(&mut [5.0, 5.0, 5.0, 9.0], &ValueSet::all(), 4);
        assert_eq!(p.layers.len(), 2);
        assert!(p.layers[0].single_valued);
        assert_eq!(p.layers[0].weight, 3);
        assert_eq!(bounds(&p.layers[0]).1, 5.0);
        assert!(!p.layers[1].single_valued);
        assert_eq!(bounds(&p.layers[1]), (5.0, 9.0));
    }

    #[test]
    fn chunking_drops_layers_straddling_gaps() {
        let region = ValueSet::new(vec![(0.0, 10.0), (20.0, 30.0)]);
        let p = chunk_layers(&mut [1.0, 2.0, 25.0, 26.0], &region, 2);
        assert_eq!(p.dropped, 1);
        assert_eq!(p.layers.len(), 1);
    }

    #[test]
    fn layering_single_point_region() {
        let mut oracle = SequenceOracle::new(vec![4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = layering(&mut oracle, &BoxRegion::full(1), 3, &mut rng).unwrap();
        assert_eq!(p.layers.len(), 1);
        assert!(p.layers[0].values.contains(4.0));
        assert!(p.exhaustive);
    }

    #[test]
    fn layering_reports_empty_region() {
        let mut oracle = SequenceOracle::new(vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let region = BoxRegion::new(IndexSet::range(0, 2), ValueSet::interval(5.0, 6.0));
        assert_eq!(layering(&mut oracle, &region, 2, &mut rng), Err(Error::EmptyRegion));
    }

    #[test]
    fn layering_respects_query_budget() {
        let n = 1 << 16;
        let values: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
        let mut oracle = SequenceOracle::new(values).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 4;
        let region = BoxRegion::new(IndexSet::range(0, n), ValueSet::interval(-1.0, 100.0));
        let p = layering(&mut oracle, &region, m, &mut rng).unwrap();
        let (_, budget) = layering_sample_sizes(n, m);
        assert!(!p.exhaustive);
        assert_eq!(p.draws, budget);
        assert!(oracle.query_count() <= budget as u64);
    }

    #[test]
    fn concentrated_points_share_one_dense_cell() {
        let mut oracle = SequenceOracle::new(vec![7.0; 32]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = gridding(&mut oracle, &BoxRegion::full(32), 4, 0.1, &mut rng).unwrap();
        assert_eq!(grid.m_prime(), 1);
        assert_eq!(grid.dense_cells(), vec![Cell::new(0, 0)]);
    }

    #[test]
    fn identity_diagonal_cells_are_dense() {
        let mut oracle = SequenceOracle::new((0..64).map(f64::from).collect()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = gridding(&mut oracle, &BoxRegion::full(64), 4, 0.01, &mut rng).unwrap();
        let m = grid.m_prime();
        assert!(m <= 8);
        let dense = grid.dense_cells();
        for c in &dense {
            assert!(grid.tag(*c) == CellTag::Dense);
        }
        // Every stripe holds 64/m' consecutive values, all landing in at most two layers.
        for s in 0..m {
            assert!(dense.iter().any(|c| c.stripe == s));
        }
        assert_eq!(grid.sample_points.len(), 64);
        for p in &grid.sample_points {
            let cell = grid.cell_of(p).unwrap();
            assert!(grid.tag(cell).is_marked());
        }
    }

    fn tagged_grid(m: usize, single_valued: &[usize], tags: &[(usize, usize, CellTag)]) -> GridDecomposition {
        let layers = (0..m)
            .map(|j| Layer {
                values: ValueSet::interval(j as f64, j as f64 + 1.0),
                single_valued: single_valued.contains(&j),
                weight: 1,
                est_density: 1.0 / m as f64,
            })
            .collect();
        let mut grid = GridDecomposition {
            region: BoxRegion::full(m * 4),
            stripes: IndexSet::range(0, m * 4).split_equal(m),
            layers,
            tags: vec![CellTag::Unmarked; m * m],
            est_density: vec![0.0; m * m],
            cell_sample: vec![None; m * m],
            sample_points: vec![],
            stripe_draws: vec![4; m],
        };
        for &(s, l, t) in tags {
            grid.set_tag(Cell::new(s, l), t);
        }
        grid
    }

    #[test]
    fn sparsify_clears_heavy_stripe() {
        let d = 3.0;
        let tags: Vec<_> = (0..4).map(|l| (0, l, CellTag::Dense)).chain([(1, 1, CellTag::Dense)]).collect();
        let grid = tagged_grid(6, &[], &tags);
        let out = sparsify(&grid, d);
        assert_eq!(out.dense_cells(), vec![Cell::new(1, 1)]);
    }

    #[test]
    fn sparsify_keeps_single_valued_layers() {
        let tags: Vec<_> = (0..8).map(|s| (s, 2, CellTag::Dense)).collect();
        let grid = tagged_grid(8, &[2], &tags);
        let out = sparsify(&grid, 3.0);
        assert_eq!(out.dense_cells().len(), 8);
        let grid = tagged_grid(8, &[], &tags);
        assert!(sparsify(&grid, 3.0).dense_cells().is_empty());
    }

    #[test]
    fn sparsify_unmarks_non_dense_and_is_idle_otherwise() {
        let grid = tagged_grid(4, &[], &[(0, 0, CellTag::Dense), (1, 1, CellTag::Marked), (2, 3, CellTag::Dense)]);
        let out = sparsify(&grid, 5.0);
        assert_eq!(out.marked_cells(), vec![Cell::new(0, 0), Cell::new(2, 3)]);
        let clean = tagged_grid(4, &[], &[(0, 0, CellTag::Dense), (2, 3, CellTag::Dense)]);
        assert_eq!(sparsify(&clean, 5.0), clean);
    }
}
