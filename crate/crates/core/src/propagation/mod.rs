//! Multilayer PageRank, personalized by an influence matrix, plus the
//! flattened single-layer baseline.

mod influence;
mod rank;

pub use influence::{build_influence_matrix, InfluenceMatrix, InfluenceSpec, RestartMode, Scenario};
pub use rank::{
    aggregate_layers, flat_personalized_pagerank, multilayer_pagerank, personalized_pagerank,
    restart_vector, write_node_scores, write_state_scores, RankConfig, RankResult,
    DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
