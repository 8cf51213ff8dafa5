//! Simple-random-walk quantities on trees: hitting probabilities of the sink
//! before a stopping set, the discrepancy constant `K`, escape-probability
//! bounds, and the law of the escape probability over random trees.

mod cdf;

pub use cdf::{apply_cdf_operator, cdf_fixed_point, CdfOperator, DiscretizedCDF, FixedPoint, FixedPointOptions};

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gw_tree::{
    child_key, offspring_for_key, root_key_for_seed, NodeId, OffspringDistribution, TreeArena, ROOT, SINK,
};
use crate::sink_set::SinkSet;

/// Default cap on the size of a truncation handed to [`solve_hitting`].
pub const DEFAULT_NODE_BUDGET: usize = 50_000_000;

/// `h(x) = P_x[hit s before S]` on the finite truncation `T^S`.
#[derive(Clone, Debug)]
pub struct HittingSolution {
    /// Interior vertices of `T^S` in preorder.
    nodes: Vec<NodeId>,
    /// Position of each vertex's parent in `nodes` (`u32::MAX` for the root).
    parents: Vec<u32>,
    h: Vec<f64>,
    index: HashMap<NodeId, u32>,
    /// Vertices of `S` adjacent to `T^S`.
    boundary: Vec<NodeId>,
    sink: SinkSet,
}

impl HittingSolution {
    /// `h(o)`.
    pub fn root_value(&self) -> f64 {
        self.h.first().copied().unwrap_or(0.0)
    }

    /// `h(x)`: 1 at `s`, 0 on `S` and outside `T^S`.
    pub fn h(&self, id: NodeId) -> f64 {
        if id == SINK {
            return 1.0;
        }
        self.index.get(&id).map_or(0.0, |&i| self.h[i as usize])
    }

    pub fn interior(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn boundary(&self) -> &[NodeId] {
        &self.boundary
    }

    pub fn sink(&self) -> &SinkSet {
        &self.sink
    }

    pub fn values(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.nodes.iter().copied().zip(self.h.iter().copied())
    }

    /// Largest violation of `h(x) = (h(parent) + Σ h(children)) / (d_x + 1)`.
    pub fn max_residual(&self, arena: &TreeArena) -> f64 {
        self.nodes
            .iter()
            .zip(&self.h)
            .map(|(&x, &hx)| {
                let d = arena.child_count(x).expect("interior vertices are expanded");
                let around = self.h(arena.parent(x)) + arena.children(x).map(|c| self.h(c)).sum::<f64>();
                (hx - around / f64::from(d + 1)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Whether `h(parent) >= h(child)` along every interior edge.
    pub fn is_monotone(&self) -> bool {
        self.parents
            .iter()
            .zip(&self.h)
            .all(|(&p, &hx)| if p == u32::MAX { hx <= 1.0 } else { self.h[p as usize] >= hx })
    }

    /// `id,h` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,h\n");
        for (x, hx) in self.values() {
            writeln!(out, "{x},{hx:.17e}").expect("write to string");
        }
        out
    }
}

/// Solves the harmonic system on `T^S` exactly by tree elimination.
pub fn solve_hitting(arena: &mut TreeArena, sink: &SinkSet) -> Result<HittingSolution> {
    solve_hitting_with_budget(arena, sink, DEFAULT_NODE_BUDGET)
}

/// As [`solve_hitting`], failing when `T^S` has more than `budget` vertices,
/// which is also how a non-separating `S` shows up.
pub fn solve_hitting_with_budget(arena: &mut TreeArena, sink: &SinkSet, budget: usize) -> Result<HittingSolution> {
    if sink.is_empty() {
        return Err(Error::InvalidSink("the stopping set S is empty".into()));
    }
    let mut nodes = Vec::new();
    let mut parents = Vec::new();
    let mut boundary = Vec::new();
    if sink.stops(arena, ROOT) {
        boundary.push(ROOT);
    } else {
        let mut stack = vec![(ROOT, u32::MAX)];
        while let Some((x, parent)) = stack.pop() {
            let here = nodes.len() as u32;
            nodes.push(x);
            parents.push(parent);
            if nodes.len() > budget {
                return Err(Error::InvalidSink(format!(
                    "truncation exceeds {budget} vertices; S may not separate the root from infinity"
                )));
            }
            arena.ensure_expanded(x)?;
            for c in arena.children(x).rev() {
                if sink.stops(arena, c) {
                    boundary.push(c);
                } else {
                    stack.push((c, here));
                }
            }
        }
    }
    // h(x) = beta_x h(parent), beta_x = 1 / (d_x + 1 - Σ beta over interior children)
    let mut beta_sum = vec![0.0f64; nodes.len()];
    let mut beta = vec![0.0f64; nodes.len()];
    for i in (0..nodes.len()).rev() {
        let d = arena.child_count(nodes[i]).expect("expanded above");
        beta[i] = 1.0 / (f64::from(d) + 1.0 - beta_sum[i]);
        if parents[i] != u32::MAX {
            beta_sum[parents[i] as usize] += beta[i];
        }
    }
    let mut h = vec![0.0f64; nodes.len()];
    for i in 0..nodes.len() {
        let above = if parents[i] == u32::MAX { 1.0 } else { h[parents[i] as usize] };
        h[i] = beta[i] * above;
    }
    let index = nodes.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    boundary.sort_unstable();
    Ok(HittingSolution { nodes, parents, h, index, boundary, sink: sink.clone() })
}

/// `K = 1 + Σ |h(x) - h(y)|` over the edges of `T^S ∪ S ∪ {s}`.
pub fn k_constant(arena: &TreeArena, solution: &HittingSolution) -> f64 {
    let mut total = 1.0 + (1.0 - solution.root_value()).abs();
    for (x, hx) in solution.values() {
        for c in arena.children(x) {
            total += (hx - solution.h(c)).abs();
        }
    }
    total
}

/// `1 + (M + 1)(1 - h(o))`, the value of `K` when all of `S` sits at depth `M`.
pub fn k_closed_form(level: u32, root_value: f64) -> f64 {
    1.0 + (f64::from(level) + 1.0) * (1.0 - root_value)
}

/// `K` through the unit current from `s`: each sink vertex `z` receives
/// `h(parent z)` and the current reaching it crosses `|z| + 1` edges.
pub fn k_from_currents(arena: &TreeArena, solution: &HittingSolution) -> f64 {
    1.0 + solution
        .boundary()
        .iter()
        .map(|&z| {
            let inflow = if z == ROOT { 1.0 } else { solution.h(arena.parent(z)) };
            inflow * (f64::from(arena.depth(z)) + 1.0)
        })
        .sum::<f64>()
}

/// Bounds on the escape probability `γ(T)` from the recursion
/// `γ(x) = 1 - 1 / (1 + Σ γ(children))`, cut at depth `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaBounds {
    /// Vertices at depth `H` valued at the smallest escape probability any
    /// subtree can have, `(k_min - 1) / k_min`.
    pub lower: f64,
    /// Vertices at depth `H` valued 1; equals `1 - h(o)` for `S = S^H`.
    pub upper: f64,
    pub depth: u32,
}

#[inline]
fn gamma_step(children_sum: f64) -> f64 {
    1.0 - 1.0 / (1.0 + children_sum)
}

/// Escape probability of the `k`-ary tree, a lower bound for every tree
/// whose vertices all have at least `k` children.
pub fn min_escape(dist: &OffspringDistribution) -> f64 {
    let k = f64::from(dist.k_min());
    (k - 1.0) / k
}

/// Runs the recursion on the arena's tree down to depth `h`, with every
/// depth-`h` vertex valued `boundary`.
pub fn gamma_recursion(arena: &mut TreeArena, h: u32, boundary: f64) -> Result<f64> {
    if h == 0 {
        return Ok(boundary);
    }
    let (interior, _) = arena.truncate_view(h)?;
    let mut value = vec![0.0f64; arena.len()];
    for &x in interior.iter().rev() {
        let sum: f64 = arena.children(x).map(|c| if arena.depth(c) == h { boundary } else { value[c as usize] }).sum();
        value[x as usize] = gamma_step(sum);
    }
    Ok(value[ROOT as usize])
}

pub fn gamma_bounds(arena: &mut TreeArena, h: u32) -> Result<GammaBounds> {
    let floor = min_escape(arena.distribution());
    Ok(GammaBounds { lower: gamma_recursion(arena, h, floor)?, upper: gamma_recursion(arena, h, 1.0)?, depth: h })
}

/// [`gamma_bounds`] on a freshly sampled tree, generated depth-first without
/// storing it; memory is `O(H)`.
pub fn sample_gamma_bounds<R: Rng + ?Sized>(dist: &OffspringDistribution, rng: &mut R, h: u32) -> GammaBounds {
    streamed_bounds(dist, h, &mut |_| dist.sample(rng), 0)
}

/// [`gamma_bounds`] of the tree an arena seeded with `seed` would build,
/// computed depth-first over vertex keys in `O(h)` memory.
pub fn keyed_gamma_bounds(dist: &OffspringDistribution, seed: u64, h: u32) -> GammaBounds {
    streamed_bounds(dist, h, &mut |key| offspring_for_key(dist, key), root_key_for_seed(seed))
}

fn streamed_bounds(
    dist: &OffspringDistribution,
    h: u32,
    offspring: &mut dyn FnMut(u64) -> u32,
    root: u64,
) -> GammaBounds {
    fn visit(offspring: &mut dyn FnMut(u64) -> u32, key: u64, remaining: u32, floor: f64) -> (f64, f64) {
        let d = offspring(key);
        if remaining == 1 {
            return (gamma_step(f64::from(d) * floor), gamma_step(f64::from(d)));
        }
        let (mut sl, mut su) = (0.0, 0.0);
        for j in 0..d {
            let (l, u) = visit(offspring, child_key(key, j), remaining - 1, floor);
            sl += l;
            su += u;
        }
        (gamma_step(sl), gamma_step(su))
    }
    let floor = min_escape(dist);
    if h == 0 {
        return GammaBounds { lower: floor, upper: 1.0, depth: 0 };
    }
    let (lower, upper) = visit(offspring, root, h, floor);
    GammaBounds { lower, upper, depth: h }
}
