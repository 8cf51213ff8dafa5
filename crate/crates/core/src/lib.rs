//! Rotor-router walks on Galton-Watson trees with random initial rotors.
//!
//! The crate grows trees lazily ([`gw_tree`]), draws `Q`-distributed rotor
//! configurations and classifies them ([`rotor_config`]), runs chained
//! rotor walks and legal multi-particle sequences ([`rotor_walk`]), builds the
//! frontier process ([`frontier`]) and computes the simple-random-walk side:
//! hitting probabilities, escape-probability bounds and the fixed point of
//! the CDF operator ([`srw_gamma`]).

pub mod error;
pub mod fraction;
pub mod frontier;
pub mod gw_tree;
pub mod rotor_config;
pub mod rotor_walk;
pub mod sink_set;
pub mod srw_gamma;

pub use error::{Error, Result};
pub use frontier::{build_frontier, complete_sink, frontier_step, FrontierState};
pub use gw_tree::{Node, NodeId, OffspringDistribution, RotorSource, TreeArena, ROOT, SINK};
pub use rotor_config::{
    classify, good_children, good_children_law, Classification, GoodChildrenLaw, Recurrence, RotorMatrix,
};
pub use rotor_walk::{
    escape_count, escape_count_adaptive, run_legal_sequence, run_walk, step, AdaptiveDepth, AdaptiveEscape,
    EscapeStats, Fifo, LegalOutcome, Lifo, OutcomeKind, RandomScheduler, Scheduler, WalkOutcome,
};
pub use sink_set::SinkSet;
pub use srw_gamma::{
    cdf_fixed_point, gamma_bounds, k_constant, keyed_gamma_bounds, sample_gamma_bounds, solve_hitting, DiscretizedCDF,
    FixedPoint, FixedPointOptions, GammaBounds, HittingSolution,
};
