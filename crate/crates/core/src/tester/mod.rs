//! The recursive tester.
//!
//! A call receives a sub-pattern `nu` of the forbidden pattern `pi`, a connected set of boxes,
//! and a leg mapping `phi` that assigns each leg of `nu` to one of the boxes. It looks for a
//! `phi`-legged `nu`-appearance (leg `i` inside box `phi(i)`) or for any `pi`-appearance. The
//! top-level call uses `nu = pi` and the whole grid as its only box.
//!
//! Steps of a call:
//! 1. Regions small enough, or already fully queried, are searched exactly; patterns of length
//!    at most two go to dedicated base cases; points queried earlier are searched first.
//! 2. The region is layered and gridded with density threshold `beta = eps / (200 k kappa)`.
//! 3. If more than `kappa * m'` cells are marked, a `pi` arrangement among marked cells is
//!    turned into a concrete appearance.
//! 4. Stripes and layers with more than `d = 100 k kappa / eps` marked cells are cleared.
//! 5. For every configuration with several components, each component copy is tested
//!    recursively on its share of `nu`, and found parts are combined across components.
//! 6. Copies of one-component configurations are sampled and tested recursively with `nu`.
//!
//! Every reported appearance is checked against the queried values before it is returned.

mod base;
pub mod configuration;
pub mod extract;
mod session;

use std::collections::{BTreeMap, HashMap};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridDecomposition};
use crate::gridding::{gridding_with_layers, layering, log2n, sparsify};
use crate::outcome::{OutcomeKind, TestOutcome};
use crate::pattern::{Pattern, Semantics};
use crate::region::{BoxRegion, IndexSet, ValueSet};
use crate::search::{find_legged, PointSet};
use crate::sequence::{Point, SequenceOracle};

pub use configuration::{abstract_configurations, enumerate_configurations, Configuration};
pub use extract::{extract_pi_witness, find_cell_arrangement};
pub use session::Session;

/// The published Marcus–Tardos constant `2 k^4 C(k^2, k)`.
pub fn marcus_tardos_kappa(k: usize) -> u64 {
    let k = k as u64;
    let mut binom: u64 = 1;
    for i in 0..k {
        binom = binom * (k * k - i) / (i + 1);
    }
    2 * k.pow(4) * binom
}

/// How the grid parameter `m` is chosen for a sequence of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSize {
    Fixed(usize),
    /// `m = ceil(n^eta)`.
    Exponent(f64),
}

/// Parameters of a test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub pattern: Pattern,
    pub grid: GridSize,
    pub epsilon: f64,
    pub kappa: u64,
    /// Repetitions of each recursive call; `None` means `ceil(log^2 n)`.
    pub amplification: Option<usize>,
    pub query_budget: Option<u64>,
    pub seed: u64,
    /// Derived distance parameters below this value trigger a warning.
    pub epsilon_floor: f64,
    /// Added to `r` in the exponent of the one-component loop count `log^3 n / eps^r`.
    pub loop_exponent_offset: i32,
    /// Search the layering samples for `pi` before stripe sampling starts.
    pub check_layering_samples: bool,
}

impl TesterConfig {
    /// Defaults: `m = ceil(n^(1/3))`, the published `kappa`, no budget, seed 0.
    pub fn new(pattern: Pattern, epsilon: f64) -> Self {
        let kappa = marcus_tardos_kappa(pattern.len());
        Self {
            pattern,
            grid: GridSize::Exponent(1.0 / 3.0),
            epsilon,
            kappa,
            amplification: None,
            query_budget: None,
            seed: 0,
            epsilon_floor: 2f64.powi(-20),
            loop_exponent_offset: 0,
            check_layering_samples: true,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.grid = GridSize::Fixed(m);
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.grid = GridSize::Exponent(eta);
        self
    }

    pub fn with_kappa(mut self, kappa: u64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.query_budget = budget;
        self
    }

    pub fn with_amplification(mut self, reps: usize) -> Self {
        self.amplification = Some(reps);
        self
    }

    pub fn kappa_is_published(&self) -> bool {
        self.kappa == marcus_tardos_kappa(self.pattern.len())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {} not in (0,1)", self.epsilon)));
        }
        if self.kappa < 1 {
            return Err(Error::InvalidArgument("kappa must be at least 1".into()));
        }
        match self.grid {
            GridSize::Fixed(0) => Err(Error::InvalidArgument("m must be at least 1".into())),
            GridSize::Exponent(eta) if !(eta > 0.0 && eta <= 1.0) => {
                Err(Error::InvalidArgument(format!("eta {eta} not in (0,1]")))
            }
            _ => Ok(()),
        }
    }

    /// Grid parameter for a sequence of length `n`, clamped to `[1, n]`.
    pub fn m_for(&self, n: usize) -> usize {
        let m = match self.grid {
            GridSize::Fixed(m) => m,
            GridSize::Exponent(eta) => ((n as f64).powf(eta) - 1e-9).ceil() as usize,
        };
        m.clamp(1, n.max(1))
    }

    /// Repetitions of each recursive call for a sequence of length `n`.
    pub fn amplification_for(&self, n: usize) -> usize {
        self.amplification.unwrap_or_else(|| log2n(n).powi(2).ceil() as usize).max(1)
    }
}

/// One call of the recursive tester: a sub-pattern, its boxes, and the leg mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedInstance {
    pub nu: Pattern,
    pub boxes: Vec<BoxRegion>,
    /// Leg `i` of `nu` must lie in `boxes[phi[i]]`.
    pub phi: Vec<usize>,
    pub epsilon: f64,
    pub depth: usize,
}

impl RestrictedInstance {
    /// Validates that `phi` maps every leg onto `boxes` surjectively and that the boxes are
    /// connected through shared stripes or layers.
    pub fn new(
        nu: Pattern,
        boxes: Vec<BoxRegion>,
        phi: Vec<usize>,
        epsilon: f64,
        depth: usize,
    ) -> Result<Self> {
        if phi.len() != nu.len() {
            return Err(Error::LengthMismatch { expected: nu.len(), actual: phi.len() });
        }
        if phi.iter().any(|&b| b >= boxes.len()) || (0..boxes.len()).any(|b| !phi.contains(&b)) {
            return Err(Error::InvalidArgument("leg mapping is not onto the boxes".into()));
        }
        let t = boxes.len();
        let mut reached = vec![false; t];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..t {
                let linked = boxes[a].index_set == boxes[b].index_set
                    || boxes[a].value_set == boxes[b].value_set;
                if !reached[b] && linked {
                    reached[b] = true;
                    stack.push(b);
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return Err(Error::InvalidArgument("boxes are not connected".into()));
        }
        Ok(Self { nu, boxes, phi, epsilon, depth })
    }

    /// The top-level call: `nu = pi` with every leg in the whole grid.
    pub fn full(n: usize, pattern: Pattern, epsilon: f64) -> Self {
        let k = pattern.len();
        Self { nu: pattern, boxes: vec![BoxRegion::full(n)], phi: vec![0; k], epsilon, depth: 0 }
    }

    pub fn leg_box(&self, leg: usize) -> &BoxRegion {
        &self.boxes[self.phi[leg]]
    }

    /// `S`: the union of the boxes' index sets.
    pub fn index_set(&self) -> IndexSet {
        self.boxes.iter().fold(IndexSet::default(), |acc, b| acc.union(&b.index_set))
    }

    /// `I`: the union of the boxes' value sets.
    pub fn value_set(&self) -> ValueSet {
        self.boxes.iter().fold(ValueSet::default(), |acc, b| acc.union(&b.value_set))
    }

    /// Whether `w` is a `phi`-legged `nu`-appearance.
    pub fn is_legged_appearance(&self, w: &[Point]) -> bool {
        w.len() == self.nu.len()
            && w.windows(2).all(|p| p[0].index < p[1].index)
            && w.iter().enumerate().all(|(leg, p)| self.leg_box(leg).contains(p))
            && self.nu.matches(&w.iter().map(|p| p.value).collect::<Vec<_>>(), Semantics::Strict)
    }
}

/// Internal result of a call.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Found {
    Pi(Vec<Point>),
    Nu(Vec<Point>),
    Nothing,
}

pub(crate) struct Tester<'s, 'o> {
    session: &'s mut Session<'o>,
    cfg: &'s TesterConfig,
    n: usize,
    m: usize,
    k: usize,
    amplification: usize,
    depth_max: usize,
    warned_floor: bool,
}

/// Tests whether the sequence behind `oracle` is free of `cfg.pattern`.
///
/// Never reports an appearance that is not one: `FoundPi` always carries a checked witness.
pub fn test_freeness(oracle: &mut SequenceOracle, cfg: &TesterConfig) -> Result<TestOutcome> {
    let inst = RestrictedInstance::full(oracle.len(), cfg.pattern.clone(), cfg.epsilon);
    let mut outcome = algtest(oracle, &inst, cfg)?;
    if outcome.kind == OutcomeKind::FoundRestrictedNu {
        outcome.kind = OutcomeKind::FoundPi;
    }
    Ok(outcome)
}

/// Runs the recursive tester on one instance with a fresh query session.
pub fn algtest(
    oracle: &mut SequenceOracle,
    inst: &RestrictedInstance,
    cfg: &TesterConfig,
) -> Result<TestOutcome> {
    with_tester(oracle, cfg, |t| t.run(inst))
}

/// Runs only the base case for a sub-pattern of length one or two.
pub fn base_case_two(
    oracle: &mut SequenceOracle,
    inst: &RestrictedInstance,
    cfg: &TesterConfig,
) -> Result<TestOutcome> {
    if inst.nu.len() > 2 {
        return Err(Error::InvalidArgument("base case needs a pattern of length at most 2".into()));
    }
    with_tester(oracle, cfg, |t| {
        let found = t.base_case_two(inst)?;
        t.checked(inst, found)
    })
}

fn with_tester(
    oracle: &mut SequenceOracle,
    cfg: &TesterConfig,
    f: impl FnOnce(&mut Tester<'_, '_>) -> Result<Found>,
) -> Result<TestOutcome> {
    cfg.validate()?;
    let n = oracle.len();
    if n == 0 {
        return Ok(TestOutcome {
            kind: OutcomeKind::NotFound,
            witness: vec![],
            queries_used: 0,
            depth_max: 0,
        });
    }
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut session = Session::new(oracle, cfg.pattern.clone(), cfg.query_budget, rng);
    let mut tester = Tester {
        n,
        m: cfg.m_for(n),
        k: cfg.pattern.len(),
        amplification: cfg.amplification_for(n),
        cfg,
        session: &mut session,
        depth_max: 0,
        warned_floor: false,
    };
    let result = f(&mut tester);
    let depth_max = tester.depth_max;
    let queries_used = session.queries_used();
    let (kind, witness) = match result {
        Ok(Found::Pi(w)) => (OutcomeKind::FoundPi, w),
        Ok(Found::Nu(w)) => (OutcomeKind::FoundRestrictedNu, w),
        Ok(Found::Nothing) => (OutcomeKind::NotFound, vec![]),
        Err(Error::BudgetExceeded { .. }) => (OutcomeKind::BudgetExceeded, vec![]),
        Err(e) => return Err(e),
    };
    Ok(TestOutcome { kind, witness, queries_used, depth_max })
}

impl Tester<'_, '_> {
    fn kappa(&self) -> f64 {
        self.cfg.kappa as f64
    }

    /// Confirms a reported appearance against the definition before passing it on.
    fn checked(&self, inst: &RestrictedInstance, found: Found) -> Result<Found> {
        match &found {
            Found::Pi(w) => {
                let ok = w.len() == self.k
                    && w.windows(2).all(|p| p[0].index < p[1].index)
                    && w.iter().all(|p| self.session.peek(p.index) == Some(Some(p.value)))
                    && self.cfg.pattern.matches(
                        &w.iter().map(|p| p.value).collect::<Vec<_>>(),
                        Semantics::Strict,
                    );
                if !ok {
                    return Err(Error::Internal(format!("invalid appearance of pi: {w:?}")));
                }
            }
            Found::Nu(w) => {
                let ok = inst.is_legged_appearance(w)
                    && w.iter().all(|p| self.session.peek(p.index) == Some(Some(p.value)));
                if !ok {
                    return Err(Error::Internal(format!("invalid legged appearance: {w:?}")));
                }
            }
            Found::Nothing => {}
        }
        Ok(found)
    }

    /// Exact answer from the points known so far.
    fn exact(&mut self, inst: &RestrictedInstance) -> Found {
        if let Some(w) = self.session.find_pi_among_known() {
            return Found::Pi(w);
        }
        let mut sets: HashMap<usize, PointSet> = HashMap::new();
        for &b in &inst.phi {
            sets.entry(b)
                .or_insert_with(|| PointSet::new(self.session.known_points_in(&inst.boxes[b])));
        }
        let legs: Vec<&PointSet> = inst.phi.iter().map(|b| &sets[b]).collect();
        find_legged(&legs, &inst.nu).map_or(Found::Nothing, Found::Nu)
    }

    fn run(&mut self, inst: &RestrictedInstance) -> Result<Found> {
        let found = self.run_steps(inst)?;
        self.checked(inst, found)
    }

    fn run_steps(&mut self, inst: &RestrictedInstance) -> Result<Found> {
        self.depth_max = self.depth_max.max(inst.depth);
        let r = inst.nu.len();
        let s = inst.index_set();
        let region = BoxRegion::new(s.clone(), inst.value_set());

        if s.len() <= self.m || self.session.fully_known(&s) {
            self.session.query_all(&s)?;
            return Ok(self.exact(inst));
        }
        if r <= 2 {
            return self.base_case_two(inst);
        }
        if let found @ (Found::Pi(_) | Found::Nu(_)) = self.exact(inst) {
            return Ok(found);
        }

        let k = self.k as f64;
        let eps = inst.epsilon;
        let beta = eps / (200.0 * k * self.kappa());
        let mut rng = self.session_rng();
        let partition = match layering(self.session, &region, self.m, &mut rng) {
            Ok(p) => p,
            Err(Error::EmptyRegion) => return Ok(Found::Nothing),
            Err(e) => return Err(e),
        };
        if self.cfg.check_layering_samples {
            if let Some(w) = self.session.find_pi_among_known() {
                return Ok(Found::Pi(w));
            }
        }
        if partition.exhaustive {
            // Layering read the whole region, so the remaining steps cannot learn anything new.
            return Ok(self.exact(inst));
        }
        let grid = gridding_with_layers(self.session, &region, partition, beta, &mut rng)?;
        let m_prime = grid.m_prime() as f64;

        if grid.count_marked() as f64 > self.kappa() * m_prime {
            match extract_pi_witness(&grid, &self.cfg.pattern) {
                Ok(w) => return Ok(Found::Pi(w)),
                Err(Error::NoPlacement { .. }) if !self.cfg.kappa_is_published() => {}
                Err(Error::NoPlacement { k }) => {
                    return Err(Error::Internal(format!(
                        "more than kappa * m' marked cells but no {k}-cell arrangement"
                    )))
                }
                Err(e) => return Err(e),
            }
        }

        let d = 100.0 * k * self.kappa() / eps;
        let sparse = sparsify(&grid, d);

        if let Some(w) = self.session.find_pi_among_known() {
            return Ok(Found::Pi(w));
        }
        let rf = r as f64;
        let copy_cap = d * m_prime * factorial(r - 1) * (2.0 * d).powi(r as i32 - 1);
        let configs = enumerate_configurations(&inst.nu, &inst.boxes, &inst.phi, &sparse, copy_cap)?;
        let c = configs.len() as f64;
        let eps_multi = 9.0 * eps / (10.0 * k * c * rf * rf * factorial(r) * (2.0 * d).powi(r as i32));
        let found = self.multi_component(inst, &sparse, &configs, eps_multi)?;
        if !matches!(found, Found::Nothing) {
            return Ok(found);
        }
        let eps_one = 9.0 * eps
            / (20.0 * k * (2.0 * d).powi(r as i32) * factorial(r - 1) * rf.powi(r as i32));
        self.one_component(inst, &sparse, &configs, eps_one)
    }

    /// A generator derived from the session's, so that the gridding helpers can borrow the
    /// session and a generator at the same time.
    fn session_rng(&mut self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.session.rng.random())
    }

    fn note_epsilon(&mut self, eps: f64) {
        if eps < self.cfg.epsilon_floor && !self.warned_floor {
            self.warned_floor = true;
            warn!(
                "derived distance parameter {eps:e} is below the floor {:e}; recursive calls \
                 will query their regions in full",
                self.cfg.epsilon_floor
            );
        }
    }

    fn sub_instance(
        &self,
        nu: &Pattern,
        leg_cells: &[Cell],
        grid: &GridDecomposition,
        eps: f64,
        depth: usize,
    ) -> RestrictedInstance {
        let mut cells: Vec<Cell> = leg_cells.to_vec();
        cells.sort_unstable();
        cells.dedup();
        let phi = leg_cells.iter().map(|c| cells.binary_search(c).expect("cell present")).collect();
        let boxes = cells.iter().map(|&c| grid.cell_box(c)).collect();
        RestrictedInstance { nu: nu.clone(), boxes, phi, epsilon: eps, depth }
    }

    /// Repeats a recursive call until it finds something, at most `amplification` times.
    /// A call on a fully queried region is exact, so it is not repeated.
    fn amplified(&mut self, inst: &RestrictedInstance) -> Result<Found> {
        let s = inst.index_set();
        for _ in 0..self.amplification {
            let found = self.run(inst)?;
            if !matches!(found, Found::Nothing) || self.session.fully_known(&s) {
                return Ok(found);
            }
        }
        Ok(Found::Nothing)
    }

    fn multi_component(
        &mut self,
        inst: &RestrictedInstance,
        grid: &GridDecomposition,
        configs: &[configuration::ConfigurationCopies],
        eps: f64,
    ) -> Result<Found> {
        self.note_epsilon(eps);
        let mut memo: HashMap<(Pattern, Vec<Cell>), Option<Vec<Point>>> = HashMap::new();
        for cc in configs.iter().filter(|c| c.config.component_count() > 1) {
            let mut parts: Vec<Vec<(&[Cell], Vec<Point>)>> = Vec::new();
            for (ci, comp) in cc.config.components.iter().enumerate() {
                let mut found = Vec::new();
                for copy in cc.copies[ci].iter() {
                    let leg_cells: Vec<Cell> = comp.leg_cell.iter().map(|&lc| copy[lc]).collect();
                    let key = (comp.nu.clone(), leg_cells);
                    let result = match memo.get(&key) {
                        Some(r) => r.clone(),
                        None => {
                            let sub = self.sub_instance(&comp.nu, &key.1, grid, eps, inst.depth + 1);
                            let r = match self.amplified(&sub)? {
                                Found::Pi(w) => return Ok(Found::Pi(w)),
                                Found::Nu(w) => Some(w),
                                Found::Nothing => None,
                            };
                            memo.insert(key, r.clone());
                            r
                        }
                    };
                    if let Some(w) = result {
                        found.push((copy.as_slice(), w));
                    }
                }
                if found.is_empty() {
                    break;
                }
                parts.push(found);
            }
            if parts.len() < cc.config.component_count() {
                continue;
            }
            if let Some(w) = combine(&cc.config, &parts, inst.nu.len()) {
                return Ok(Found::Nu(w));
            }
        }
        Ok(Found::Nothing)
    }

    fn one_component(
        &mut self,
        inst: &RestrictedInstance,
        grid: &GridDecomposition,
        configs: &[configuration::ConfigurationCopies],
        eps: f64,
    ) -> Result<Found> {
        self.note_epsilon(eps);
        let mut members: BTreeMap<Vec<Cell>, Vec<Vec<Cell>>> = BTreeMap::new();
        for cc in configs.iter().filter(|c| c.config.component_count() == 1) {
            let comp = &cc.config.components[0];
            for copy in cc.copies[0].iter() {
                let leg_cells: Vec<Cell> = comp.leg_cell.iter().map(|&lc| copy[lc]).collect();
                let mut cells = copy.clone();
                cells.sort_unstable();
                members.entry(cells).or_default().push(leg_cells);
            }
        }
        if members.is_empty() {
            return Ok(Found::Nothing);
        }
        let members: Vec<Vec<Vec<Cell>>> = members.into_values().collect();
        let exponent = inst.nu.len() as i32 + self.cfg.loop_exponent_offset;
        let loops = log2n(self.n).powi(3) / inst.epsilon.powi(exponent);
        let chosen: Vec<usize> = if loops.ceil() >= members.len() as f64 {
            (0..members.len()).collect()
        } else {
            (0..loops.ceil() as usize)
                .map(|_| self.session.rng.random_range(0..members.len()))
                .collect()
        };
        let mut memo: HashMap<Vec<Cell>, bool> = HashMap::new();
        for i in chosen {
            for leg_cells in &members[i] {
                if memo.contains_key(leg_cells) {
                    continue;
                }
                let sub = self.sub_instance(&inst.nu, leg_cells, grid, eps, inst.depth + 1);
                match self.amplified(&sub)? {
                    Found::Nothing => {
                        memo.insert(leg_cells.clone(), false);
                    }
                    found => return Ok(found),
                }
            }
        }
        Ok(Found::Nothing)
    }
}

/// Picks one found copy per component so that the copies together form a copy of the whole
/// configuration, and merges their appearances into one `nu`-appearance.
fn combine(
    config: &Configuration,
    parts: &[Vec<(&[Cell], Vec<Point>)>],
    r: usize,
) -> Option<Vec<Point>> {
    fn agrees(config: &Configuration, ci: usize, a: &[Cell], cj: usize, b: &[Cell]) -> bool {
        let (ca, cb) = (&config.components[ci], &config.components[cj]);
        ca.cells.iter().zip(a).all(|(&ia, cell_a)| {
            cb.cells.iter().zip(b).all(|(&ib, cell_b)| {
                let (xa, ya) = config.cells[ia];
                let (xb, yb) = config.cells[ib];
                xa.cmp(&xb) == cell_a.stripe.cmp(&cell_b.stripe)
                    && ya.cmp(&yb) == cell_a.layer.cmp(&cell_b.layer)
            })
        })
    }

    fn rec(
        config: &Configuration,
        parts: &[Vec<(&[Cell], Vec<Point>)>],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let i = chosen.len();
        if i == parts.len() {
            return true;
        }
        for (choice, (copy, _)) in parts[i].iter().enumerate() {
            let ok = chosen
                .iter()
                .enumerate()
                .all(|(j, &cj)| agrees(config, i, copy, j, parts[j][cj].0));
            if ok {
                chosen.push(choice);
                if rec(config, parts, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::with_capacity(parts.len());
    if !rec(config, parts, &mut chosen) {
        return None;
    }
    let mut witness = vec![Point::new(0, 0.0); r];
    for (ci, &choice) in chosen.iter().enumerate() {
        let w = &parts[ci][choice].1;
        for (local, &leg) in config.components[ci].legs.iter().enumerate() {
            witness[leg] = w[local];
        }
    }
    Some(witness)
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|i| i as f64).product()
}
