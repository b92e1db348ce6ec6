//! Bipartite multilayer networks.
//!
//! Every layer is a bipartite graph between the common nodes (present in all
//! layers) and that layer's own specific nodes. Common nodes are linked to
//! themselves across layers with weight equal to the stickiness.
//!
//! Nodes are kept in a canonical order: common nodes first in order of first
//! appearance, then the specific nodes of each layer grouped by layer in
//! declaration order. State `(i, layer)` of the supra matrices is
//! `layer * N + i` under that order.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Common,
    /// Specific node with its layer of origin.
    Specific(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRef {
    pub id: String,
    pub kind: NodeKind,
}

impl NodeRef {
    pub fn layer_of_origin(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Common => None,
            NodeKind::Specific(layer) => Some(layer),
        }
    }

    pub fn is_common(&self) -> bool {
        self.kind == NodeKind::Common
    }
}

/// Input description of one layer: declared specific nodes plus weighted
/// `(common, specific)` edges.
#[derive(Debug, Clone, Default)]
pub struct LayerSpec {
    pub name: String,
    pub specific_nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub common: String,
    pub specific: String,
    pub weight: f64,
    /// Edge colour. Set by aggregation to the name of the originating layer.
    pub tag: Option<String>,
}

impl EdgeSpec {
    pub fn new(common: impl Into<String>, specific: impl Into<String>, weight: f64) -> Self {
        EdgeSpec {
            common: common.into(),
            specific: specific.into(),
            weight,
            tag: None,
        }
    }
}

impl LayerSpec {
    pub fn new(name: impl Into<String>) -> Self {
        LayerSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Adds an edge, declaring the specific endpoint on first use.
    pub fn edge(mut self, common: &str, specific: &str, weight: f64) -> Self {
        self.push_edge(common, specific, weight);
        self
    }

    pub fn push_edge(&mut self, common: &str, specific: &str, weight: f64) {
        if !self.specific_nodes.iter().any(|s| s == specific) {
            self.specific_nodes.push(specific.to_string());
        }
        self.edges.push(EdgeSpec::new(common, specific, weight));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Node index of the common endpoint.
    pub common: usize,
    /// Node index of the specific endpoint.
    pub specific: usize,
    pub weight: f64,
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    /// Node indices of this layer's specific nodes, in declaration order.
    pub specific_nodes: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl Layer {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerNetwork {
    nodes: Vec<NodeRef>,
    index: HashMap<String, usize>,
    n_common: usize,
    layers: Vec<Layer>,
    stickiness: f64,
}

impl MultilayerNetwork {
    /// Validates and assembles a network. Duplicate `(common, specific)` edges
    /// within a layer are merged by summing their weights.
    pub fn build(layers: Vec<LayerSpec>, stickiness: f64) -> Result<Self> {
        if stickiness < 0.0 || !stickiness.is_finite() {
            return Err(Error::NegativeStickiness(stickiness));
        }

        // specific pools first, so a clash with a common id is caught below
        let mut specific_owner: HashMap<&str, usize> = HashMap::new();
        for (l, layer) in layers.iter().enumerate() {
            for s in &layer.specific_nodes {
                if specific_owner.insert(s.as_str(), l).is_some() {
                    return Err(Error::DuplicateNodeId(s.clone()));
                }
            }
        }

        let mut common_ids: Vec<&str> = Vec::new();
        let mut common_seen: HashMap<&str, usize> = HashMap::new();
        for layer in &layers {
            for e in &layer.edges {
                if e.weight <= 0.0 || !e.weight.is_finite() {
                    return Err(Error::NonPositiveWeight {
                        layer: layer.name.clone(),
                        common: e.common.clone(),
                        specific: e.specific.clone(),
                        weight: e.weight,
                    });
                }
                if specific_owner.contains_key(e.common.as_str()) {
                    return Err(Error::DuplicateNodeId(e.common.clone()));
                }
                if !common_seen.contains_key(e.common.as_str()) {
                    common_seen.insert(e.common.as_str(), common_ids.len());
                    common_ids.push(e.common.as_str());
                }
            }
        }

        let mut nodes: Vec<NodeRef> = common_ids
            .iter()
            .map(|id| NodeRef {
                id: id.to_string(),
                kind: NodeKind::Common,
            })
            .collect();
        let n_common = nodes.len();
        for (l, layer) in layers.iter().enumerate() {
            for s in &layer.specific_nodes {
                nodes.push(NodeRef {
                    id: s.clone(),
                    kind: NodeKind::Specific(l),
                });
            }
        }
        let index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();

        let mut built = Vec::with_capacity(layers.len());
        for (l, layer) in layers.into_iter().enumerate() {
            let mut merged: Vec<Edge> = Vec::new();
            let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
            for e in layer.edges {
                let common = index[&e.common];
                let specific = match index.get(&e.specific) {
                    Some(&s) if nodes[s].kind == NodeKind::Specific(l) => s,
                    _ => {
                        return Err(Error::EdgeEndpointMissing {
                            layer: layer.name.clone(),
                            node: e.specific,
                        })
                    }
                };
                match slot.get(&(common, specific)) {
                    Some(&k) => merged[k].weight += e.weight,
                    None => {
                        slot.insert((common, specific), merged.len());
                        merged.push(Edge {
                            common,
                            specific,
                            weight: e.weight,
                            tag: e.tag,
                        });
                    }
                }
            }
            let specific_nodes = layer.specific_nodes.iter().map(|s| index[s]).collect();
            built.push(Layer {
                name: layer.name,
                specific_nodes,
                edges: merged,
            });
        }

        Ok(MultilayerNetwork {
            nodes,
            index,
            n_common,
            layers: built,
            stickiness,
        })
    }

    /// Number of distinct nodes N.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn common_count(&self) -> usize {
        self.n_common
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Size of the supra state space, N·L.
    pub fn state_count(&self) -> usize {
        self.nodes.len() * self.layers.len()
    }

    pub fn stickiness(&self) -> f64 {
        self.stickiness
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeRef {
        &self.nodes[i]
    }

    pub fn common_nodes(&self) -> &[NodeRef] {
        &self.nodes[..self.n_common]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn state(&self, node: usize, layer: usize) -> usize {
        layer * self.nodes.len() + node
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(|l| l.edges.len()).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.layers.iter().map(Layer::total_weight).sum()
    }

    /// Specific neighbours of every common node across all layers, indexed
    /// by common node.
    pub fn specific_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_common];
        for layer in &self.layers {
            for e in &layer.edges {
                out[e.common].push(e.specific);
            }
        }
        out
    }

    /// Collapses all layers into one edge-coloured layer (the infinite
    /// stickiness limit). Each edge keeps the name of its original layer as
    /// its tag. A single-layer network is returned unchanged.
    pub fn aggregate(&self) -> MultilayerNetwork {
        if self.layers.len() <= 1 {
            return self.clone();
        }
        let name = self
            .layers
            .iter()
            .map(|l| l.name.as_str())
            .collect::<Vec<_>>()
            .join("+");
        let mut spec = LayerSpec::new(name);
        for layer in &self.layers {
            spec.specific_nodes
                .extend(layer.specific_nodes.iter().map(|&s| self.nodes[s].id.clone()));
            for e in &layer.edges {
                spec.edges.push(EdgeSpec {
                    common: self.nodes[e.common].id.clone(),
                    specific: self.nodes[e.specific].id.clone(),
                    weight: e.weight,
                    tag: Some(e.tag.clone().unwrap_or_else(|| layer.name.clone())),
                });
            }
        }
        // node order is preserved: common nodes appear in the same first-seen
        // order and specific nodes keep their layer grouping
        MultilayerNetwork::build(vec![spec], self.stickiness)
            .expect("aggregating a valid network cannot fail")
    }

    /// Fraction of distinct nodes in the largest connected component of the
    /// union of all layers. Inter-layer edges only join a node to itself, so
    /// this is also the node-level connectivity of the supra graph for S > 0.
    pub fn largest_component_fraction(&self) -> Result<f64> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        let mut uf = UnionFind::<usize>::new(n);
        for layer in &self.layers {
            for e in &layer.edges {
                uf.union(e.common, e.specific);
            }
        }
        let mut sizes = vec![0usize; n];
        for i in 0..n {
            sizes[uf.find(i)] += 1;
        }
        let largest = sizes.into_iter().max().unwrap_or(0);
        Ok(largest as f64 / n as f64)
    }
}

/// Convenience wrapper over [`MultilayerNetwork::build`].
pub fn build_network(layers: Vec<LayerSpec>, stickiness: f64) -> Result<MultilayerNetwork> {
    MultilayerNetwork::build(layers, stickiness)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Product layer b1-p1, b2-p1; geography layer b2-a1, b3-a1.
    pub(crate) fn toy(stickiness: f64) -> MultilayerNetwork {
        build_network(
            vec![
                LayerSpec::new("product").edge("b1", "p1", 1.0).edge("b2", "p1", 1.0),
                LayerSpec::new("geo").edge("b2", "a1", 1.0).edge("b3", "a1", 1.0),
            ],
            stickiness,
        )
        .unwrap()
    }

    #[test]
    fn toy_network_shape() {
        let net = toy(1.0);
        assert_eq!(net.node_count(), 5);
        assert_eq!(net.layer_count(), 2);
        let common: Vec<_> = net.common_nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(common, ["b1", "b2", "b3"]);
        assert_eq!(net.node(3).id, "p1");
        assert_eq!(net.node(3).layer_of_origin(), Some(0));
        assert_eq!(net.node(4).layer_of_origin(), Some(1));
        assert_eq!(net.state(4, 1), 9);
    }

    #[test]
    fn duplicate_edges_merge() {
        let net = build_network(
            vec![LayerSpec::new("product").edge("b1", "p1", 1.0).edge("b1", "p1", 1.0)],
            1.0,
        )
        .unwrap();
        assert_eq!(net.layers()[0].edges.len(), 1);
        assert_eq!(net.layers()[0].edges[0].weight, 2.0);
    }

    #[test]
    fn validation_errors() {
        let err = build_network(vec![LayerSpec::new("a").edge("b1", "p1", 0.0)], 1.0);
        assert!(matches!(err, Err(Error::NonPositiveWeight { .. })));

        let err = build_network(vec![LayerSpec::new("a").edge("b1", "p1", 1.0)], -0.5);
        assert!(matches!(err, Err(Error::NegativeStickiness(_))));

        let mut layer = LayerSpec::new("a");
        layer.edges.push(EdgeSpec::new("b1", "ghost", 1.0));
        let err = build_network(vec![layer], 1.0);
        assert!(matches!(err, Err(Error::EdgeEndpointMissing { .. })));

        // same specific id in two layers
        let err = build_network(
            vec![
                LayerSpec::new("a").edge("b1", "x", 1.0),
                LayerSpec::new("b").edge("b1", "x", 1.0),
            ],
            1.0,
        );
        assert!(matches!(err, Err(Error::DuplicateNodeId(id)) if id == "x"));

        // a common id reused as a specific id
        let err = build_network(
            vec![
                LayerSpec::new("a").edge("b1", "p1", 1.0),
                LayerSpec::new("b").edge("p1", "q1", 1.0),
            ],
            1.0,
        );
        assert!(matches!(err, Err(Error::DuplicateNodeId(_))));

        // an edge pointing at another layer's specific node
        let mut layer_b = LayerSpec::new("b");
        layer_b.specific_nodes.push("q1".into());
        layer_b.edges.push(EdgeSpec::new("b1", "p1", 1.0));
        let err = build_network(vec![LayerSpec::new("a").edge("b1", "p1", 1.0), layer_b], 1.0);
        assert!(matches!(err, Err(Error::EdgeEndpointMissing { .. })));
    }

    #[test]
    fn aggregation() {
        let net = toy(1.0);
        let agg = net.aggregate();
        assert_eq!(agg.layer_count(), 1);
        assert_eq!(agg.node_count(), 5);
        assert_eq!(agg.edge_count(), 4);
        let tags: Vec<_> = agg.layers()[0]
            .edges
            .iter()
            .map(|e| e.tag.as_deref().unwrap())
            .collect();
        assert_eq!(tags, ["product", "product", "geo", "geo"]);
        assert_eq!(agg.total_weight(), net.total_weight());
        // fixpoint
        assert_eq!(agg.aggregate(), agg);
    }

    #[test]
    fn component_fraction() {
        assert_eq!(toy(1.0).largest_component_fraction().unwrap(), 1.0);
        let two = build_network(
            vec![
                LayerSpec::new("product")
                    .edge("b1", "p1", 1.0)
                    .edge("b2", "p1", 1.0)
                    .edge("c1", "q1", 1.0)
                    .edge("c2", "q1", 1.0),
                LayerSpec::new("geo")
                    .edge("b2", "a1", 1.0)
                    .edge("b3", "a1", 1.0)
                    .edge("c2", "z1", 1.0)
                    .edge("c3", "z1", 1.0),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(two.largest_component_fraction().unwrap(), 0.5);
        let empty = build_network(vec![LayerSpec::new("a")], 1.0).unwrap();
        assert!(matches!(
            empty.largest_component_fraction(),
            Err(Error::EmptyNetwork)
        ));
    }
}
