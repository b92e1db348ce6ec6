//! Bipartite multilayer networks built from tabular records, personalized
//! multilayer PageRank with defaulters as influence sources, and the network
//! feature set extracted over rolling time windows for credit-risk models.

pub mod error;
pub mod features;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod propagation;
pub mod synth;

pub use error::{Error, Result};
