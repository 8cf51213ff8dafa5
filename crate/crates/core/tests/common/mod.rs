#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rotorgw::{NodeId, OffspringDistribution, RotorMatrix, RotorSource, TreeArena};

pub fn xi(text: &str) -> OffspringDistribution {
    OffspringDistribution::parse(text).unwrap()
}

pub fn uniform_arena(law: &str, seed: u64) -> TreeArena {
    let dist = xi(law);
    let q = Arc::new(RotorMatrix::uniform(dist.k_max()));
    TreeArena::with_matrix(dist, q, seed).unwrap()
}

/// A random law on `1..=4`, truncated at a random depth so that at most
/// `max_nodes` vertices sit at depth `<= H`, with uniformly random rotors
/// on every interior vertex. Returns the arena and `H`.
pub fn random_finite_tree<R: Rng>(rng: &mut R, max_nodes: usize) -> (TreeArena, u32) {
    loop {
        let k_max = rng.random_range(1..=4u32);
        let mut probs: Vec<f64> = (0..k_max).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let dist = OffspringDistribution::new(probs).unwrap();
        let depth = rng.random_range(1..=8u32);
        let mut arena = TreeArena::with_rotors(dist, rng.random(), RotorSource::Explicit);
        // grow level by level so oversized draws are abandoned early
        let mut level: Vec<NodeId> = vec![0];
        let mut fits = true;
        for _ in 0..depth {
            let mut next = Vec::new();
            for &x in &level {
                arena.ensure_expanded(x).unwrap();
                next.extend(arena.children(x));
            }
            if arena.len() > max_nodes {
                fits = false;
                break;
            }
            level = next;
        }
        if !fits {
            continue;
        }
        for x in 0..arena.len() as NodeId {
            if arena.depth(x) < depth {
                let d = arena.child_count(x).unwrap();
                arena.set_rotor(x, rng.random_range(0..=d)).unwrap();
            }
        }
        return (arena, depth);
    }
}
