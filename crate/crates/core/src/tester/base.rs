//! Base cases for sub-patterns of length one and two.

use rand::Rng;

use super::{Found, RestrictedInstance, Tester};
use crate::error::Result;
use crate::gridding::log2n;
use crate::region::BoxRegion;
use crate::search::{find_legged, find_pattern, PointSet};
use crate::sequence::{Point, QueryAccess};

impl Tester<'_, '_> {
    /// Restricted appearances of patterns of length at most two.
    ///
    /// One leg: any point of its box. Two legs in different boxes: sample points from both boxes
    /// and search the samples. Two legs in one box: binary searches along random pivots, with
    /// points outside the box treated as erased.
    pub(super) fn base_case_two(&mut self, inst: &RestrictedInstance) -> Result<Found> {
        let per_box = (4.0 * log2n(self.n) / inst.epsilon).ceil();
        match inst.nu.len() {
            1 => {
                let b = inst.leg_box(0).clone();
                let pts = self.sample_box_points(&b, per_box, true)?;
                Ok(pts.first().map_or(Found::Nothing, |&p| Found::Nu(vec![p])))
            }
            _ if inst.phi[0] != inst.phi[1] => {
                let a = inst.leg_box(0).clone();
                let b = inst.leg_box(1).clone();
                let pa = PointSet::new(self.sample_box_points(&a, per_box, false)?);
                let pb = PointSet::new(self.sample_box_points(&b, per_box, false)?);
                Ok(find_legged(&[&pa, &pb], &inst.nu).map_or(Found::Nothing, Found::Nu))
            }
            _ => self.pair_in_one_box(inst),
        }
    }

    /// Known points of `b` plus up to `count` random draws from its stripe, or all of the
    /// stripe when `count` reaches its length.
    fn sample_box_points(&mut self, b: &BoxRegion, count: f64, first_only: bool) -> Result<Vec<Point>> {
        let mut pts = self.session.known_points_in(b);
        if first_only && !pts.is_empty() {
            return Ok(pts);
        }
        let st = &b.index_set;
        let len = st.len();
        if count >= len as f64 {
            for idx in st.iter() {
                if let Some(v) = self.session.query(idx)? {
                    if b.value_set.contains(v) {
                        pts.push(Point::new(idx, v));
                        if first_only {
                            return Ok(pts);
                        }
                    }
                }
            }
        } else {
            for _ in 0..count as usize {
                let idx = st.nth(self.session.rng.random_range(0..len)).expect("rank within stripe");
                if let Some(v) = self.session.query(idx)? {
                    if b.value_set.contains(v) {
                        pts.push(Point::new(idx, v));
                        if first_only {
                            return Ok(pts);
                        }
                    }
                }
            }
        }
        pts.sort_by_key(|p| p.index);
        pts.dedup_by_key(|p| p.index);
        Ok(pts)
    }

    /// Draws a random in-box point whose stripe rank lies in `[lo, hi]`.
    fn draw_in_box(
        &mut self,
        b: &BoxRegion,
        lo: usize,
        hi: usize,
        attempts: usize,
    ) -> Result<Option<(usize, Point)>> {
        for _ in 0..attempts {
            let rank = self.session.rng.random_range(lo..=hi);
            let idx = b.index_set.nth(rank).expect("rank within stripe");
            if let Some(v) = self.session.query(idx)? {
                if b.value_set.contains(v) {
                    return Ok(Some((rank, Point::new(idx, v))));
                }
            }
        }
        Ok(None)
    }

    /// Monotonicity-style search for a two-leg appearance inside one box.
    ///
    /// Each round picks a random in-box point `x` and binary-searches for it along random in-box
    /// pivots; a pivot out of order with `x` is a witness. When the rounds would cost about as
    /// much as reading the stripe, the stripe is read in full and searched exactly.
    fn pair_in_one_box(&mut self, inst: &RestrictedInstance) -> Result<Found> {
        let b = inst.leg_box(0).clone();
        let len = b.index_set.len();
        let l = log2n(self.n);
        let rounds = (4.0 / inst.epsilon).ceil();
        if rounds * l >= len as f64 {
            self.session.query_all(&b.index_set)?;
            let set = PointSet::new(self.session.known_points_in(&b));
            return Ok(find_pattern(&set, &inst.nu).map_or(Found::Nothing, Found::Nu));
        }
        let attempts = (4.0 * l).ceil() as usize;
        let descending = inst.nu.value(0) > inst.nu.value(1);
        let out_of_order = |a: &Point, b: &Point| if descending { a.value > b.value } else { a.value < b.value };
        for _ in 0..rounds as usize {
            let Some((xr, x)) = self.draw_in_box(&b, 0, len - 1, attempts)? else { continue };
            let (mut lo, mut hi) = (0usize, len - 1);
            while lo <= hi {
                let Some((pr, p)) = self.draw_in_box(&b, lo, hi, attempts)? else { break };
                if pr == xr {
                    break;
                }
                if pr < xr {
                    if out_of_order(&p, &x) {
                        return Ok(Found::Nu(vec![p, x]));
                    }
                    lo = pr + 1;
                } else {
                    if out_of_order(&x, &p) {
                        return Ok(Found::Nu(vec![x, p]));
                    }
                    if pr == 0 {
                        break;
                    }
                    hi = pr - 1;
                }
            }
        }
        Ok(Found::Nothing)
    }
}
