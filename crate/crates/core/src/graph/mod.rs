//! Multilayer network representation and supra matrices.

pub mod edgelist;
mod network;
mod supra;

pub use network::{
    build_network, Edge, EdgeSpec, Layer, LayerSpec, MultilayerNetwork, NodeKind, NodeRef,
};
pub use supra::{supra_adjacency, supra_transition, MatrixForm, SupraMatrix};

#[cfg(test)]
pub(crate) use network::tests::toy;
