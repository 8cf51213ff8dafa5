use std::collections::HashSet;

use crate::gw_tree::{NodeId, TreeArena, SINK};

/// A set `S` of absorbing vertices, given explicitly and/or as a whole level.
///
/// A vertex stops a particle if it is listed or sits at depth `>= level`.
/// The sink `s` is never a member; it absorbs on its own.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SinkSet {
    nodes: HashSet<NodeId>,
    level: Option<u32>,
}

impl SinkSet {
    /// The level set `S^h = {x : |x| = h}`.
    pub fn level(h: u32) -> Self {
        Self { nodes: HashSet::new(), level: Some(h) }
    }

    pub fn from_nodes<I: IntoIterator<Item = NodeId>>(nodes: I) -> Self {
        Self { nodes: nodes.into_iter().filter(|&x| x != SINK).collect(), level: None }
    }

    /// Explicit vertices plus every vertex at depth `h` not below one of them.
    pub fn with_level<I: IntoIterator<Item = NodeId>>(nodes: I, h: u32) -> Self {
        Self { level: Some(h), ..Self::from_nodes(nodes) }
    }

    #[inline]
    pub fn stops(&self, arena: &TreeArena, id: NodeId) -> bool {
        id != SINK && (self.level.is_some_and(|h| arena.depth(id) >= h) || self.nodes.contains(&id))
    }

    pub fn explicit_nodes(&self) -> &HashSet<NodeId> {
        &self.nodes
    }

    pub fn level_depth(&self) -> Option<u32> {
        self.level
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.level.is_none()
    }
}
