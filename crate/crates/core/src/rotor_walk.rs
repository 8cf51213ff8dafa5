//! Rotor-router walks, chained escape counts and multi-particle legal sequences.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::gw_tree::{NodeId, TreeArena, ROOT, SINK};
use crate::sink_set::SinkSet;

/// Hard cap on the length of a single walk. Walks on finite truncations
/// always halt, so reaching it means something is broken.
pub const STEP_BUDGET: u64 = 10_000_000_000;

/// One rotor-router move: advance the rotor at `pos`, then follow it.
#[inline]
pub fn step(arena: &mut TreeArena, pos: NodeId) -> Result<NodeId> {
    if pos == SINK {
        return Err(Error::StepFromSink);
    }
    let r = arena.advance_rotor(pos)?;
    Ok(arena.neighbour(pos, r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    /// The particle stepped onto the sink `s`.
    Returned,
    /// The particle stepped onto a vertex of the stopping set.
    ReachedBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkOutcome {
    pub kind: OutcomeKind,
    pub steps: u64,
    pub max_depth: u32,
    /// Vertex the walk stopped on (`SINK` when it returned).
    pub stopped_at: NodeId,
}

impl WalkOutcome {
    pub fn escaped(&self) -> bool {
        self.kind == OutcomeKind::ReachedBoundary
    }
}

/// Runs one particle from the root until it returns to `s` or reaches depth `h`.
///
/// The rotors it turns stay turned for the next walk.
pub fn run_walk(arena: &mut TreeArena, h: u32) -> Result<WalkOutcome> {
    if h == 0 {
        return Err(Error::InvalidArgument("truncation depth must be at least 1".into()));
    }
    run_walk_until(arena, &SinkSet::level(h), STEP_BUDGET)
}

/// Runs one particle from the root until it hits `s` or a vertex of `stop`.
pub fn run_walk_until(arena: &mut TreeArena, stop: &SinkSet, budget: u64) -> Result<WalkOutcome> {
    if stop.stops(arena, ROOT) {
        return Err(Error::InvalidSink("the root itself is in the stopping set".into()));
    }
    let mut pos = ROOT;
    let mut steps = 0u64;
    let mut max_depth = 0u32;
    loop {
        pos = step(arena, pos)?;
        steps += 1;
        if pos == SINK {
            return Ok(WalkOutcome { kind: OutcomeKind::Returned, steps, max_depth, stopped_at: SINK });
        }
        max_depth = max_depth.max(arena.depth(pos));
        if stop.stops(arena, pos) {
            return Ok(WalkOutcome { kind: OutcomeKind::ReachedBoundary, steps, max_depth, stopped_at: pos });
        }
        if steps >= budget {
            return Err(Error::StepBudget(budget));
        }
    }
}

/// Outcomes of `n` chained walks on one tree at one truncation depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeStats {
    pub n: u64,
    /// `E_n`, the number of walks that reached the truncation depth.
    pub escapes: u64,
    /// `e_k` for `k = 1..=n`.
    pub outcomes: Vec<bool>,
    pub depth: u32,
    pub total_steps: u64,
}

impl EscapeStats {
    pub fn ratio(&self) -> f64 {
        self.escapes as f64 / self.n as f64
    }

    /// Running counts `E_k` for `k = 1..=n`.
    pub fn running(&self) -> Vec<u64> {
        self.outcomes
            .iter()
            .scan(0u64, |acc, &e| {
                *acc += u64::from(e);
                Some(*acc)
            })
            .collect()
    }

    /// `seed,n,H,E_n,ratio`.
    pub fn csv_row(&self, seed: u64) -> String {
        format!("{seed},{},{},{},{:.10}", self.n, self.depth, self.escapes, self.ratio())
    }

    /// Run-length encoding of `e_1 ... e_n`, e.g. `0x3 1x2 0x1`.
    pub fn outcomes_rle(&self) -> String {
        let mut out = String::new();
        let mut iter = self.outcomes.iter().peekable();
        while let Some(&bit) = iter.next() {
            let mut run = 1;
            while iter.next_if(|&&b| b == bit).is_some() {
                run += 1;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            write!(out, "{}x{run}", u8::from(bit)).expect("write to string");
        }
        out
    }
}

pub const ESCAPE_CSV_HEADER: &str = "seed,n,H,E_n,ratio";

/// Runs `n` chained walks, each starting from the configuration the previous one left.
pub fn escape_count(arena: &mut TreeArena, n: u64, h: u32) -> Result<EscapeStats> {
    if n == 0 {
        return Err(Error::InvalidArgument("walk count must be at least 1".into()));
    }
    if h == 0 {
        return Err(Error::InvalidArgument("truncation depth must be at least 1".into()));
    }
    let stop = SinkSet::level(h);
    let mut outcomes = Vec::with_capacity(n as usize);
    let mut escapes = 0;
    let mut total_steps = 0;
    for _ in 0..n {
        let walk = run_walk_until(arena, &stop, STEP_BUDGET)?;
        total_steps += walk.steps;
        escapes += u64::from(walk.escaped());
        outcomes.push(walk.escaped());
    }
    Ok(EscapeStats { n, escapes, outcomes, depth: h, total_steps })
}

/// Doubling schedule for the truncation depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveDepth {
    pub start: u32,
    /// Stop once `|E_n(2H) - E_n(H)| <= rel_tol * E_n(H)`.
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveDepth {
    fn default() -> Self {
        Self { start: 8, rel_tol: 1e-3, max_depth: 1024 }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveEscape {
    /// Statistics at the final depth.
    pub stats: EscapeStats,
    /// `(H, E_n)` for every depth tried.
    pub history: Vec<(u32, u64)>,
    pub converged: bool,
}

/// Escape counts with the truncation depth doubled until `E_n` stabilises.
///
/// `make_arena` must return the same initial tree and configuration on every
/// call; each depth runs on a fresh copy.
pub fn escape_count_adaptive<F>(mut make_arena: F, n: u64, policy: AdaptiveDepth) -> Result<AdaptiveEscape>
where
    F: FnMut() -> Result<TreeArena>,
{
    if policy.start == 0 || policy.max_depth < policy.start {
        return Err(Error::InvalidArgument(format!("bad adaptive depth policy {policy:?}")));
    }
    let mut h = policy.start;
    let mut stats = escape_count(&mut make_arena()?, n, h)?;
    let mut history = vec![(h, stats.escapes)];
    while h.saturating_mul(2) <= policy.max_depth {
        h *= 2;
        let next = escape_count(&mut make_arena()?, n, h)?;
        history.push((h, next.escapes));
        let change = stats.escapes.abs_diff(next.escapes) as f64;
        let settled = change <= policy.rel_tol * stats.escapes as f64;
        stats = next;
        if settled {
            return Ok(AdaptiveEscape { stats, history, converged: true });
        }
    }
    Ok(AdaptiveEscape { stats, history, converged: false })
}

/// Particles waiting at interior vertices, in arrival order.
#[derive(Clone, Debug, Default)]
pub struct ParticlePile {
    entries: VecDeque<NodeId>,
    counts: HashMap<NodeId, u64>,
}

impl ParticlePile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Particles currently at `id`.
    pub fn count(&self, id: NodeId) -> u64 {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Positions of waiting particles, oldest first (one entry per particle).
    pub fn entries(&self) -> &VecDeque<NodeId> {
        &self.entries
    }

    fn push(&mut self, id: NodeId) {
        self.entries.push_back(id);
        *self.counts.entry(id).or_default() += 1;
    }

    fn take(&mut self, id: NodeId) -> bool {
        let Some(c) = self.counts.get_mut(&id).filter(|c| **c > 0) else {
            return false;
        };
        *c -= 1;
        if self.entries.back() == Some(&id) {
            self.entries.pop_back();
        } else if self.entries.front() == Some(&id) {
            self.entries.pop_front();
        } else {
            let i = self.entries.iter().position(|&x| x == id).expect("count and entries agree");
            self.entries.remove(i);
        }
        true
    }
}

/// Chooses which occupied vertex moves next.
pub trait Scheduler {
    fn choose(&mut self, pile: &ParticlePile) -> NodeId;
}

/// Oldest waiting particle first.
#[derive(Clone, Copy, Debug, Default)]
pub struct Fifo;

/// Most recently arrived particle first.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lifo;

/// Uniformly random waiting particle.
#[derive(Clone, Debug)]
pub struct RandomScheduler(Xoshiro256PlusPlus);

impl RandomScheduler {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }
}

impl Scheduler for Fifo {
    fn choose(&mut self, pile: &ParticlePile) -> NodeId {
        pile.entries[0]
    }
}

impl Scheduler for Lifo {
    fn choose(&mut self, pile: &ParticlePile) -> NodeId {
        pile.entries[pile.len() - 1]
    }
}

impl Scheduler for RandomScheduler {
    fn choose(&mut self, pile: &ParticlePile) -> NodeId {
        pile.entries[self.0.random_range(0..pile.len())]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalOutcome {
    /// Particles resting on each vertex of `S` (vertices with none are omitted).
    pub absorbed: BTreeMap<NodeId, u64>,
    /// Particles absorbed at `s`.
    pub at_sink: u64,
    pub moves: u64,
}

impl LegalOutcome {
    pub fn absorbed_total(&self) -> u64 {
        self.absorbed.values().sum()
    }
}

/// Performs legal moves chosen by `scheduler` until every particle rests in `S` or at `s`.
///
/// `placement` lists initial particle counts; particles placed on `S` or `s`
/// count as absorbed straight away. The final rotors stay in the arena.
pub fn run_legal_sequence<S: Scheduler + ?Sized>(
    arena: &mut TreeArena,
    sink: &SinkSet,
    placement: &[(NodeId, u64)],
    scheduler: &mut S,
) -> Result<LegalOutcome> {
    if sink.is_empty() {
        return Err(Error::InvalidSink("the stopping set S is empty".into()));
    }
    let mut out = LegalOutcome { absorbed: BTreeMap::new(), at_sink: 0, moves: 0 };
    let mut pile = ParticlePile::default();
    for &(id, count) in placement {
        if id == SINK {
            out.at_sink += count;
            continue;
        }
        if !arena.contains(id) {
            return Err(Error::UnknownNode(id));
        }
        if sink.stops(arena, id) {
            *out.absorbed.entry(id).or_default() += count;
        } else {
            for _ in 0..count {
                pile.push(id);
            }
        }
    }
    while !pile.is_empty() {
        let v = scheduler.choose(&pile);
        if !pile.take(v) {
            return Err(Error::IllegalMove(v));
        }
        let w = step(arena, v)?;
        out.moves += 1;
        if out.moves >= STEP_BUDGET {
            return Err(Error::StepBudget(STEP_BUDGET));
        }
        if w == SINK {
            out.at_sink += 1;
        } else if sink.stops(arena, w) {
            *out.absorbed.entry(w).or_default() += 1;
        } else {
            pile.push(w);
        }
    }
    Ok(out)
}
