//! Non-uniformly stable matchings in bipartite graphs with ties.
//!
//! Each edge of the instance carries tied preference ranks at both endpoints
//! and one of two stability kinds: a `super` edge must not weakly block a
//! matching, a `strong` edge must not strongly block it. A matching avoiding
//! both kinds of violation is non-uniformly stable; with all edges `super`
//! this is classical super-stability, with all edges `strong` it is strong
//! stability.
//!
//! The crate decides existence of such a matching in polynomial time and
//! constructs one ([`solver`]), enumerates all of them at desk scale
//! ([`oracle`]), verifies the exact linear-inequality description of their
//! convex hull ([`polytope`]), and builds the distributive lattice their
//! indifference classes form ([`lattice`]). Instances, matchings and all
//! command payloads use stable JSON formats ([`instance`], [`stability`],
//! [`cli`]).

pub mod instance;
pub mod oracle;
pub mod solver;
pub mod stability;

pub use instance::{
    generate_random, Edge, EdgeId, EdgeKind, EdgeSpec, Instance, InstanceError, Preference, Side,
    VertexId,
};
pub use oracle::{enumerate_matchings, enumerate_stable, BudgetError, EnumerationBudget};
pub use solver::{solve, ChoiceTrace, EdgeSet, SolveOutcome, SolveResult};
pub use stability::{
    block_set, is_non_uniformly_stable, strongly_blocks, weakly_blocks, BlockMode, BlockReport,
    Matching, MatchingError,
};
