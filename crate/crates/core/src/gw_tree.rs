//! Lazily grown Galton-Watson family trees with an absorbing sink above the root.
//!
//! Every node carries a 64-bit key derived from its parent's key and its
//! planar child index. Offspring counts and initial rotors are drawn from
//! generators seeded by that key, so the sampled tree is a pure function of
//! the arena seed: expansion order only changes node ids, never the tree.

use std::fmt::Write as _;
use std::io;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::fraction::{is_probability, parse_fraction, to_f64};
use crate::rotor_config::{sample_rotor, RotorMatrix};

/// Index of a node inside a [`TreeArena`].
pub type NodeId = u32;

/// Reserved id of the sink `s`, the absorbing parent of the root.
pub const SINK: NodeId = NodeId::MAX;

/// The root is always the first node of an arena.
pub const ROOT: NodeId = 0;

const NO_ROTOR: u32 = u32::MAX;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_OFFSPRING: u64 = 1;
const STREAM_ROTOR: u64 = 2;

/// Offspring law `(p_1, ..., p_kmax)`; `p_0 = 0` is implicit.
#[derive(Clone, Debug)]
pub struct OffspringDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl OffspringDistribution {
    /// Builds the law from `probs[k - 1] = p_k`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if probs.is_empty() {
            return bad("no offspring probabilities given".into());
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return bad(format!("p_{} = {p} is not a probability", i + 1));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("probabilities sum to {total}, not 1"));
        }
        let mut probs = probs;
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Guard the inverse-CDF lookup against a sum of 1 - 1e-16.
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(Self { probs, cumulative, exact: None })
    }

    /// Builds the law from exact rationals; classification then runs in exact arithmetic.
    pub fn from_fractions(probs: Vec<BigRational>) -> Result<Self> {
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !is_probability(p)) {
            return Err(Error::InvalidDistribution(format!("p_{} = {p} is not a probability", i + 1)));
        }
        let total: BigRational = probs.iter().cloned().fold(BigRational::zero(), |a, b| a + b);
        let mut dist = Self::new(probs.iter().map(to_f64).collect())?;
        if total.is_one() {
            let mut exact = probs;
            exact.truncate(dist.probs.len());
            dist.exact = Some(exact);
        }
        Ok(dist)
    }

    /// Point mass at `d` children.
    pub fn deterministic(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDistribution("p_0 > 0 is not supported".into()));
        }
        let mut probs = vec![BigRational::zero(); d as usize];
        probs[d as usize - 1] = BigRational::one();
        Self::from_fractions(probs)
    }

    /// Parses `p2=1` or `p1=1/2,p3=1/2` (decimals accepted).
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, BigRational)> = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| Error::Parse(format!("expected `pK=prob`, got `{item}`")))?;
            let k: usize = key
                .trim()
                .strip_prefix('p')
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad offspring key `{key}`")))?;
            if k == 0 {
                return Err(Error::InvalidDistribution("p_0 > 0 is not supported".into()));
            }
            if entries.iter().any(|(j, _)| *j == k) {
                return Err(Error::Parse(format!("p{k} given twice")));
            }
            entries.push((k, parse_fraction(value)?));
        }
        let k_max =
            entries.iter().map(|(k, _)| *k).max().ok_or_else(|| Error::Parse("empty offspring distribution".into()))?;
        let mut probs = vec![BigRational::zero(); k_max];
        for (k, p) in entries {
            probs[k - 1] = p;
        }
        Self::from_fractions(probs)
    }

    /// Largest offspring count with positive probability.
    pub fn k_max(&self) -> u32 {
        self.probs.len() as u32
    }

    /// Smallest offspring count with positive probability.
    pub fn k_min(&self) -> u32 {
        self.probs.iter().position(|&p| p > 0.0).expect("probabilities sum to 1") as u32 + 1
    }

    /// `p_k`, zero outside `1..=k_max`.
    pub fn p(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.probs.get(k as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    /// Inverse-CDF lookup of a uniform `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> u32 {
        self.cumulative.partition_point(|&c| c <= u).min(self.probs.len() - 1) as u32 + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.quantile(rng.random::<f64>())
    }

    /// Compact `p1=1/2,p3=1/2` form used in output headers.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.probs.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            if !out.is_empty() {
                out.push(',');
            }
            match &self.exact {
                Some(exact) => write!(out, "p{}={}", i + 1, exact[i]),
                None => write!(out, "p{}={}", i + 1, p),
            }
            .expect("write to string");
        }
        out
    }
}

/// Where a node's rotor comes from the first time it is needed.
#[derive(Clone, Debug)]
pub enum RotorSource {
    /// `Q`-distributed: `rho(x) = d_x - l` with `l ~ Q_{d_x}`, independently per node.
    Matrix(Arc<RotorMatrix>),
    /// Every rotor starts at `min(value, d_x)`.
    Constant(u32),
    /// Rotors must be assigned with [`TreeArena::set_rotor`] before use.
    Explicit,
}

#[derive(Clone, Debug)]
struct NodeRecord {
    key: u64,
    parent: NodeId,
    first_child: NodeId,
    child_count: u32,
    depth: u32,
    rotor: u32,
    visited: bool,
}

/// Read-only view of one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub parent: NodeId,
    /// `None` while the offspring count has not been drawn.
    pub child_count: Option<u32>,
    pub depth: u32,
    pub rotor: Option<u32>,
    pub visited: bool,
    pub key: u64,
}

/// Arena-allocated, lazily expanded Galton-Watson tree.
#[derive(Clone, Debug)]
pub struct TreeArena {
    nodes: Vec<NodeRecord>,
    dist: OffspringDistribution,
    seed: u64,
    rotors: RotorSource,
}

impl TreeArena {
    /// A tree holding only the root, whose children are not yet sampled.
    pub fn new(dist: OffspringDistribution, seed: u64) -> Self {
        Self::with_rotors(dist, seed, RotorSource::Explicit)
    }

    pub fn with_rotors(dist: OffspringDistribution, seed: u64, rotors: RotorSource) -> Self {
        let root = NodeRecord {
            key: root_key(seed),
            parent: SINK,
            first_child: 0,
            child_count: 0,
            depth: 0,
            rotor: NO_ROTOR,
            visited: false,
        };
        Self { nodes: vec![root], dist, seed, rotors }
    }

    /// A `Q`-distributed configuration on a fresh tree.
    pub fn with_matrix(dist: OffspringDistribution, q: Arc<RotorMatrix>, seed: u64) -> Result<Self> {
        if q.k_max() < dist.k_max() {
            return Err(Error::InvalidMatrix(format!(
                "matrix covers offspring counts up to {} but the law reaches {}",
                q.k_max(),
                dist.k_max()
            )));
        }
        Ok(Self::with_rotors(dist, seed, RotorSource::Matrix(q)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> &OffspringDistribution {
        &self.dist
    }

    pub fn rotor_source(&self) -> &RotorSource {
        &self.rotors
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        (id as usize) < self.nodes.len()
    }

    fn record(&self, id: NodeId) -> Result<&NodeRecord> {
        self.nodes.get(id as usize).ok_or(Error::UnknownNode(id))
    }

    pub fn node(&self, id: NodeId) -> Result<Node> {
        let r = self.record(id)?;
        Ok(Node {
            id,
            parent: r.parent,
            child_count: (r.child_count > 0).then_some(r.child_count),
            depth: r.depth,
            rotor: (r.rotor != NO_ROTOR).then_some(r.rotor),
            visited: r.visited,
            key: r.key,
        })
    }

    /// Draws the offspring count of `id` and creates its children.
    pub fn expand(&mut self, id: NodeId) -> Result<u32> {
        let r = self.record(id)?;
        if r.child_count > 0 {
            return Err(Error::AlreadyExpanded(id));
        }
        let (key, depth) = (r.key, r.depth);
        let count = self.dist.quantile(node_rng(key, STREAM_OFFSPRING).random::<f64>());
        let first = self.nodes.len();
        if first + count as usize >= SINK as usize {
            return Err(Error::InvalidArgument("arena exceeds the node id space".into()));
        }
        self.nodes.extend((0..count).map(|j| NodeRecord {
            key: child_key(key, j),
            parent: id,
            first_child: 0,
            child_count: 0,
            depth: depth + 1,
            rotor: NO_ROTOR,
            visited: false,
        }));
        let r = &mut self.nodes[id as usize];
        r.first_child = first as NodeId;
        r.child_count = count;
        Ok(count)
    }

    /// Offspring count of `id`, expanding it first if needed.
    #[inline]
    pub fn ensure_expanded(&mut self, id: NodeId) -> Result<u32> {
        match self.nodes.get(id as usize) {
            None => Err(Error::UnknownNode(id)),
            Some(r) if r.child_count > 0 => Ok(r.child_count),
            Some(_) => self.expand(id),
        }
    }

    pub fn is_expanded(&self, id: NodeId) -> bool {
        self.nodes.get(id as usize).is_some_and(|r| r.child_count > 0)
    }

    #[inline]
    pub fn parent(&self, id: NodeId) -> NodeId {
        self.nodes[id as usize].parent
    }

    #[inline]
    pub fn depth(&self, id: NodeId) -> u32 {
        self.nodes[id as usize].depth
    }

    #[inline]
    pub fn key(&self, id: NodeId) -> u64 {
        self.nodes[id as usize].key
    }

    /// Number of children, `None` if unsampled.
    #[inline]
    pub fn child_count(&self, id: NodeId) -> Option<u32> {
        let c = self.nodes[id as usize].child_count;
        (c > 0).then_some(c)
    }

    /// Child `x^(k)` for `k` in `1..=d_x`.
    #[inline]
    pub fn child(&self, id: NodeId, k: u32) -> NodeId {
        let r = &self.nodes[id as usize];
        debug_assert!(k >= 1 && k <= r.child_count);
        r.first_child + k - 1
    }

    /// Children in planar order; empty if unsampled.
    pub fn children(&self, id: NodeId) -> std::ops::Range<NodeId> {
        let r = &self.nodes[id as usize];
        r.first_child..r.first_child + r.child_count
    }

    /// Neighbour `x^(k)`: the parent for `k = 0`, otherwise the `k`-th child.
    #[inline]
    pub fn neighbour(&self, id: NodeId, k: u32) -> NodeId {
        if k == 0 {
            self.parent(id)
        } else {
            self.child(id, k)
        }
    }

    #[inline]
    pub fn rotor(&self, id: NodeId) -> Option<u32> {
        let r = self.nodes[id as usize].rotor;
        (r != NO_ROTOR).then_some(r)
    }

    /// Overwrites the rotor at `id`; the node must be expanded and `value <= d_x`.
    pub fn set_rotor(&mut self, id: NodeId, value: u32) -> Result<()> {
        let d = self.record(id)?.child_count;
        if d == 0 {
            return Err(Error::NotExpanded(id));
        }
        if value > d {
            return Err(Error::InvalidArgument(format!("rotor {value} exceeds d_x = {d} at node {id}")));
        }
        self.nodes[id as usize].rotor = value;
        Ok(())
    }

    /// Rotor at `id`, drawing its initial value from the rotor source on first use.
    #[inline]
    pub fn ensure_rotor(&mut self, id: NodeId) -> Result<u32> {
        let d = self.ensure_expanded(id)?;
        let r = &self.nodes[id as usize];
        if r.rotor != NO_ROTOR {
            return Ok(r.rotor);
        }
        let value = self.initial_rotor(id, d)?;
        self.nodes[id as usize].rotor = value;
        Ok(value)
    }

    /// Forgets every rotor and visit mark while keeping the sampled structure,
    /// so node ids stay valid. Matrix and constant sources then hand back the
    /// initial configuration; explicitly set rotors are lost.
    pub fn reset_rotors(&mut self) {
        for r in &mut self.nodes {
            r.rotor = NO_ROTOR;
            r.visited = false;
        }
    }

    /// The value the rotor at `id` starts from, independent of walk history.
    pub fn initial_rotor(&self, id: NodeId, d: u32) -> Result<u32> {
        match &self.rotors {
            RotorSource::Matrix(q) => sample_rotor(d, q, &mut node_rng(self.key(id), STREAM_ROTOR)),
            RotorSource::Constant(c) => Ok((*c).min(d)),
            RotorSource::Explicit => Err(Error::RotorUnset(id)),
        }
    }

    /// Advances the rotor at `id` by one position and returns its new value.
    #[inline]
    pub(crate) fn advance_rotor(&mut self, id: NodeId) -> Result<u32> {
        let current = self.ensure_rotor(id)?;
        let r = &mut self.nodes[id as usize];
        let next = if current == r.child_count { 0 } else { current + 1 };
        r.rotor = next;
        r.visited = true;
        Ok(next)
    }

    #[inline]
    pub fn is_visited(&self, id: NodeId) -> bool {
        self.nodes[id as usize].visited
    }

    #[inline]
    pub(crate) fn mark_visited(&mut self, id: NodeId) {
        self.nodes[id as usize].visited = true;
    }

    /// Forces expansion down to depth `h` and splits the nodes at depth `<= h`
    /// into the interior (depth `< h`) and the boundary level `S^h`.
    pub fn truncate_view(&mut self, h: u32) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
        let mut interior = Vec::new();
        let mut level = vec![ROOT];
        for _ in 0..h {
            let mut next = Vec::new();
            for &x in &level {
                self.ensure_expanded(x)?;
                next.extend(self.children(x));
            }
            interior.append(&mut level);
            level = next;
        }
        Ok((interior, level))
    }

    /// Generation sizes `Z_0, ..., Z_h`, expanding as needed.
    pub fn generation_sizes(&mut self, h: u32) -> Result<Vec<usize>> {
        let mut sizes = vec![1];
        let mut level = vec![ROOT];
        for _ in 0..h {
            let mut next = Vec::new();
            for &x in &level {
                self.ensure_expanded(x)?;
                next.extend(self.children(x));
            }
            sizes.push(next.len());
            level = next;
        }
        Ok(sizes)
    }

    /// Current rotor of every node that has one, keyed by node key.
    ///
    /// Keys identify a vertex by its position in the tree, so snapshots from
    /// arenas grown in different orders compare directly.
    pub fn rotor_snapshot(&self) -> std::collections::BTreeMap<u64, u32> {
        self.nodes.iter().filter(|r| r.rotor != NO_ROTOR).map(|r| (r.key, r.rotor)).collect()
    }

    /// Writes one line per node: `id parent depth child_count rotor`.
    ///
    /// The root's parent is written as `s`; unsampled counts and unset rotors as `-`.
    pub fn write_snapshot<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        for (id, r) in self.nodes.iter().enumerate() {
            let parent = if r.parent == SINK { "s".to_string() } else { r.parent.to_string() };
            let count = if r.child_count > 0 { r.child_count.to_string() } else { "-".into() };
            let rotor = if r.rotor != NO_ROTOR { r.rotor.to_string() } else { "-".into() };
            writeln!(out, "{id} {parent} {} {count} {rotor}", r.depth)?;
        }
        Ok(())
    }
}

fn root_key(seed: u64) -> u64 {
    SplitMix64::seed_from_u64(seed).next_u64()
}

/// Key of child `j` (0-based) of the node with key `parent`.
pub fn child_key(parent: u64, j: u32) -> u64 {
    SplitMix64::seed_from_u64(parent.wrapping_add((u64::from(j) + 1).wrapping_mul(GOLDEN))).next_u64()
}

fn node_rng(key: u64, stream: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(key ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Offspring count of the vertex with the given key, as an arena would draw it.
pub fn offspring_for_key(dist: &OffspringDistribution, key: u64) -> u32 {
    dist.quantile(node_rng(key, STREAM_OFFSPRING).random::<f64>())
}

/// Key of the root of an arena built with `seed`.
pub fn root_key_for_seed(seed: u64) -> u64 {
    root_key(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(text: &str) -> OffspringDistribution {
        OffspringDistribution::parse(text).unwrap()
    }

    #[test]
    fn new_tree_holds_unsampled_root() {
        let arena = TreeArena::new(dist("p3=1"), 42);
        assert_eq!(arena.len(), 1);
        let root = arena.node(ROOT).unwrap();
        assert_eq!(root.depth, 0);
        assert_eq!(root.parent, SINK);
        assert_eq!(root.child_count, None);
        assert_eq!(root.rotor, None);
    }

    #[test]
    fn rejects_invalid_distributions() {
        assert!(matches!(OffspringDistribution::new(vec![0.5, 0.4]), Err(Error::InvalidDistribution(_))));
        assert!(OffspringDistribution::new(vec![]).is_err());
        assert!(OffspringDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(OffspringDistribution::parse("p0=1").is_err());
        assert!(OffspringDistribution::parse("p1=1/2,p2=1/3").is_err());
        assert!(OffspringDistribution::parse("p1=1/2,p1=1/2").is_err());
        assert!(OffspringDistribution::parse("q2=1").is_err());
    }

    #[test]
    fn parse_keeps_exact_values() {
        let d = dist("p1=1/2, p3=0.5");
        assert_eq!(d.k_max(), 3);
        assert_eq!(d.p(2), 0.0);
        assert!(d.exact().is_some());
        assert_eq!(d.mean(), 2.0);
        assert_eq!(d.describe(), "p1=1/2,p3=1/2");
    }

    #[test]
    fn deterministic_offspring_always_returns_d() {
        let mut arena = TreeArena::new(dist("p3=1"), 7);
        for id in 0..50 {
            assert_eq!(arena.expand(id).unwrap(), 3);
        }
    }

    #[test]
    fn expanding_twice_is_an_error() {
        let mut arena = TreeArena::new(dist("p2=1"), 1);
        arena.expand(ROOT).unwrap();
        assert_eq!(arena.expand(ROOT), Err(Error::AlreadyExpanded(ROOT)));
        assert_eq!(arena.expand(99), Err(Error::UnknownNode(99)));
    }

    #[test]
    fn children_record_parent_and_depth() {
        let mut arena = TreeArena::new(dist("p1=1/2,p2=1/2"), 3);
        arena.truncate_view(6).unwrap();
        for id in 1..arena.len() as NodeId {
            let node = arena.node(id).unwrap();
            assert_eq!(arena.depth(node.parent) + 1, node.depth);
            assert!(arena.children(node.parent).contains(&id));
        }
    }

    #[test]
    fn binary_tree_generations_double() {
        let mut arena = TreeArena::new(dist("p2=1"), 9);
        let sizes = arena.generation_sizes(10).unwrap();
        let expected: Vec<usize> = (0..=10).map(|h| 1 << h).collect();
        assert_eq!(sizes, expected);
    }

    #[test]
    fn truncate_view_partitions_levels() {
        let mut arena = TreeArena::new(dist("p2=1"), 0);
        let (_, boundary) = arena.truncate_view(3).unwrap();
        assert_eq!(boundary.len(), 8);

        let (interior, boundary) = arena.truncate_view(0).unwrap();
        assert!(interior.is_empty());
        assert_eq!(boundary, vec![ROOT]);

        let mut arena = TreeArena::new(dist("p3=1"), 0);
        let (interior, boundary) = arena.truncate_view(2).unwrap();
        assert_eq!((interior.len(), boundary.len()), (4, 9));
    }

    #[test]
    fn deterministic_d_ary_truncation_size() {
        for d in 2..=4u32 {
            for h in 0..=5u32 {
                let mut arena = TreeArena::new(OffspringDistribution::deterministic(d).unwrap(), 5);
                let (interior, boundary) = arena.truncate_view(h).unwrap();
                let expected = (d.pow(h + 1) - 1) / (d - 1);
                assert_eq!((interior.len() + boundary.len()) as u32, expected);
            }
        }
    }

    #[test]
    fn same_seed_same_arena() {
        let d = dist("p1=1/4,p2=1/4,p3=1/2");
        let mut a = TreeArena::new(d.clone(), 77);
        let mut b = TreeArena::new(d, 77);
        a.truncate_view(7).unwrap();
        b.truncate_view(7).unwrap();
        let (mut sa, mut sb) = (Vec::new(), Vec::new());
        a.write_snapshot(&mut sa).unwrap();
        b.write_snapshot(&mut sb).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn expansion_order_does_not_change_the_tree() {
        let d = dist("p1=1/3,p2=1/3,p4=1/3");
        let mut bfs = TreeArena::new(d.clone(), 11);
        bfs.truncate_view(5).unwrap();
        // depth-first growth along the last child first
        let mut dfs = TreeArena::new(d, 11);
        let mut stack = vec![ROOT];
        while let Some(x) = stack.pop() {
            if dfs.depth(x) < 5 {
                dfs.expand(x).unwrap();
                stack.extend(dfs.children(x));
            }
        }
        let shape = |a: &TreeArena| {
            let mut v: Vec<(u64, Option<u32>, u32)> =
                (0..a.len() as NodeId).map(|i| (a.key(i), a.child_count(i), a.depth(i))).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(shape(&bfs), shape(&dfs));
    }

    #[test]
    fn snapshot_format() {
        let mut arena = TreeArena::with_rotors(dist("p2=1"), 0, RotorSource::Constant(1));
        arena.expand(ROOT).unwrap();
        arena.ensure_rotor(ROOT).unwrap();
        let mut out = Vec::new();
        arena.write_snapshot(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0 s 0 2 1\n1 0 1 - -\n2 0 1 - -\n");
    }

    #[test]
    fn set_rotor_checks_range() {
        let mut arena = TreeArena::new(dist("p2=1"), 0);
        assert_eq!(arena.set_rotor(ROOT, 1), Err(Error::NotExpanded(ROOT)));
        arena.expand(ROOT).unwrap();
        assert!(arena.set_rotor(ROOT, 3).is_err());
        arena.set_rotor(ROOT, 2).unwrap();
        assert_eq!(arena.rotor(ROOT), Some(2));
        assert_eq!(arena.ensure_rotor(1), Err(Error::RotorUnset(1)));
    }

    #[test]
    fn quantile_is_inverse_cdf() {
        let d = dist("p1=1/4,p2=1/2,p3=1/4");
        assert_eq!(d.quantile(0.0), 1);
        assert_eq!(d.quantile(0.2499), 1);
        assert_eq!(d.quantile(0.25), 2);
        assert_eq!(d.quantile(0.7499), 2);
        assert_eq!(d.quantile(0.75), 3);
        assert_eq!(d.quantile(0.999_999), 3);
    }
}
