//! The frontier process: particles park one per vertex, collisions re-split.
//!
//! A particle injected at the root walks by the rotor rule until it
//! (a) reaches `s`, (b) reaches a never-visited vertex, which joins the
//! frontier, or (c) reaches a frontier vertex, which leaves the frontier and
//! sends both of its particles on. Cascades from (c) are worked off a stack.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gw_tree::{NodeId, TreeArena, ROOT, SINK};
use crate::rotor_walk::step;
use crate::sink_set::SinkSet;

#[derive(Clone, Debug, Default)]
pub struct FrontierState {
    member: Vec<bool>,
    size: usize,
    /// Particles injected so far.
    pub n: u64,
    /// Largest depth any member has had during this run.
    pub realized_height: u32,
    /// Particles absorbed at `s`.
    pub sink_count: u64,
}

impl FrontierState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_member(&self, id: NodeId) -> bool {
        self.member.get(id as usize).copied().unwrap_or(false)
    }

    /// Frontier vertices in increasing id order.
    pub fn members(&self) -> Vec<NodeId> {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i as NodeId).collect()
    }

    fn set_member(&mut self, id: NodeId, value: bool) {
        let i = id as usize;
        if i >= self.member.len() {
            self.member.resize(i + 1, false);
        }
        if self.member[i] != value {
            self.member[i] = value;
            if value {
                self.size += 1;
            } else {
                self.size -= 1;
            }
        }
    }

    /// `n,frontier_size,sink_count,realized_height`.
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.n, self.size, self.sink_count, self.realized_height)
    }
}

pub const FRONTIER_CSV_HEADER: &str = "n,frontier_size,sink_count,realized_height";

/// Injects one particle at the root and runs it, and every particle it
/// releases, to rest.
pub fn frontier_step(arena: &mut TreeArena, state: &mut FrontierState) -> Result<()> {
    let mut departures: Vec<NodeId> = Vec::new();
    arrive(arena, state, ROOT, &mut departures);
    while let Some(x) = departures.pop() {
        let y = step(arena, x)?;
        arrive(arena, state, y, &mut departures);
    }
    state.n += 1;
    debug_assert_eq!(state.size as u64 + state.sink_count, state.n);
    Ok(())
}

fn arrive(arena: &mut TreeArena, state: &mut FrontierState, y: NodeId, departures: &mut Vec<NodeId>) {
    if y == SINK {
        state.sink_count += 1;
    } else if !arena.is_visited(y) {
        arena.mark_visited(y);
        state.set_member(y, true);
        state.realized_height = state.realized_height.max(arena.depth(y));
    } else if state.is_member(y) {
        state.set_member(y, false);
        departures.push(y);
        departures.push(y);
    } else {
        departures.push(y);
    }
}

/// Runs `n` injections from an empty frontier.
pub fn build_frontier(arena: &mut TreeArena, n: u64) -> Result<FrontierState> {
    if n == 0 {
        return Err(Error::InvalidArgument("frontier needs at least one particle".into()));
    }
    let mut state = FrontierState::new();
    for _ in 0..n {
        frontier_step(arena, &mut state)?;
    }
    Ok(state)
}

/// The sink `S = F(n) ∪ ℓ(n)`, with `ℓ(n)` given implicitly as the level
/// `realized_height` below the unblocked part of the tree.
pub fn complete_sink(state: &FrontierState) -> SinkSet {
    SinkSet::with_level(state.members(), state.realized_height)
}

/// Lists `ℓ(n)` explicitly: depth-`realized_height` vertices whose root path
/// avoids the frontier. Fails once more than `limit` vertices would be listed
/// or expanded.
pub fn fill_holes(arena: &mut TreeArena, state: &FrontierState, limit: usize) -> Result<Vec<NodeId>> {
    let level = state.realized_height;
    let mut holes = Vec::new();
    let mut stack = vec![ROOT];
    let mut touched = 0usize;
    while let Some(x) = stack.pop() {
        if state.is_member(x) {
            continue;
        }
        if arena.depth(x) == level {
            holes.push(x);
        } else {
            arena.ensure_expanded(x)?;
            stack.extend(arena.children(x).rev());
        }
        touched += 1;
        if touched > limit {
            return Err(Error::InvalidArgument(format!("hole filling exceeds {limit} vertices")));
        }
    }
    Ok(holes)
}

/// Unvisited, non-member vertices whose parent lies inside the truncation:
/// the roots of the subtrees `ℓ(n)` is drawn from, with their depth.
pub fn hole_roots(arena: &TreeArena, state: &FrontierState) -> Vec<NodeId> {
    let level = state.realized_height;
    let mut roots = Vec::new();
    let mut stack = vec![ROOT];
    while let Some(x) = stack.pop() {
        if state.is_member(x) || arena.depth(x) >= level {
            continue;
        }
        if !arena.is_visited(x) {
            roots.push(x);
            continue;
        }
        stack.extend(arena.children(x));
    }
    roots.sort_unstable();
    roots
}

/// Boundary-to-volume ratio `|∂p| / |p|` of a root path `p`, from
/// `|∂p| + |p| = 1 + Σ d_x` over the path's vertices.
pub fn path_boundary_ratio(arena: &TreeArena, path: &[NodeId]) -> Result<f64> {
    let (&first, _) = path.split_first().ok_or_else(|| Error::InvalidPath("empty path".into()))?;
    if first != ROOT {
        return Err(Error::InvalidPath(format!("path starts at {first}, not the root")));
    }
    let mut degree_sum = 0u64;
    for (i, &x) in path.iter().enumerate() {
        if !arena.contains(x) {
            return Err(Error::UnknownNode(x));
        }
        if i > 0 && arena.parent(x) != path[i - 1] {
            return Err(Error::InvalidPath(format!("{x} is not a child of {}", path[i - 1])));
        }
        degree_sum += u64::from(arena.child_count(x).ok_or(Error::NotExpanded(x))?);
    }
    let len = path.len() as f64;
    Ok((1.0 + degree_sum as f64 - len) / len)
}

/// Root path to the deepest current member, if any.
pub fn deepest_member_path(arena: &TreeArena, state: &FrontierState) -> Option<Vec<NodeId>> {
    let deepest = state.members().into_iter().max_by_key(|&x| (arena.depth(x), std::cmp::Reverse(x)))?;
    let mut path = vec![deepest];
    let mut x = deepest;
    while arena.parent(x) != SINK {
        x = arena.parent(x);
        path.push(x);
    }
    path.reverse();
    Some(path)
}

/// Renders a frontier trajectory row set as CSV with a header line.
pub fn frontier_csv(rows: &[FrontierState]) -> String {
    let mut out = String::from(FRONTIER_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_row()).expect("write to string");
    }
    out
}
