//! Influence (teleport) matrices for personalized multilayer PageRank.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{MatrixForm, MultilayerNetwork, SupraMatrix};

/// Where the random walk may teleport to, relative to the source nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    /// Ones at the source nodes on the diagonal of the intra-layer blocks.
    Intra,
    /// Ones at the source nodes on the diagonal of the inter-layer blocks.
    Inter,
    /// Union of intra and inter.
    Combined,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Intra, Scenario::Inter, Scenario::Combined];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Intra => "intra",
            Scenario::Inter => "inter",
            Scenario::Combined => "combined",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intra" => Ok(Scenario::Intra),
            "inter" => Ok(Scenario::Inter),
            "combined" | "both" => Ok(Scenario::Combined),
            other => Err(Error::InvalidConfig(format!("unknown scenario `{other}`"))),
        }
    }
}

/// How the influence matrix enters the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestartMode {
    /// `R = r T + (1 - r) û` with the columns of `u` normalized; scores are
    /// the leading eigenvector of R.
    #[default]
    FaithfulMatrix,
    /// Restart vector proportional to the row sums of `u`; scores solve
    /// `Π = r T Π + (1 - r) v`.
    CollapsedVector,
}

impl fmt::Display for RestartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestartMode::FaithfulMatrix => "faithful",
            RestartMode::CollapsedVector => "collapsed",
        })
    }
}

impl FromStr for RestartMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "faithful" | "faithful_matrix" | "matrix" => Ok(RestartMode::FaithfulMatrix),
            "collapsed" | "collapsed_vector" | "vector" => Ok(RestartMode::CollapsedVector),
            other => Err(Error::InvalidConfig(format!("unknown restart mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceSpec {
    pub sources: Vec<String>,
    pub scenario: Scenario,
    pub restart_mode: RestartMode,
}

#[derive(Debug, Clone, PartialEq)]
enum Teleport {
    /// The matrix of ones: plain multilayer PageRank.
    AllOnes,
    Sparse(SupraMatrix),
}

/// The `u` matrix of the walk. The all-ones case is kept implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    nodes: usize,
    layers: usize,
    teleport: Teleport,
}

impl InfluenceMatrix {
    pub fn all_ones(nodes: usize, layers: usize) -> Self {
        InfluenceMatrix {
            nodes,
            layers,
            teleport: Teleport::AllOnes,
        }
    }

    /// Influence matrix for arbitrary node indices (no common-node check).
    pub fn for_nodes(nodes: usize, layers: usize, sources: &[usize], scenario: Scenario) -> Self {
        let mut triplets = Vec::new();
        for &i in sources {
            for a in 0..layers {
                for b in 0..layers {
                    let keep = match scenario {
                        Scenario::Intra => a == b,
                        Scenario::Inter => a != b,
                        Scenario::Combined => true,
                    };
                    if keep {
                        triplets.push((a * nodes + i, b * nodes + i, 1.0));
                    }
                }
            }
        }
        InfluenceMatrix::from_matrix(SupraMatrix::from_triplets(
            nodes,
            layers,
            MatrixForm::Influence,
            triplets,
        ))
    }

    pub fn from_matrix(u: SupraMatrix) -> Self {
        InfluenceMatrix {
            nodes: u.nodes(),
            layers: u.layers(),
            teleport: Teleport::Sparse(u),
        }
    }

    pub fn is_all_ones(&self) -> bool {
        matches!(self.teleport, Teleport::AllOnes)
    }

    pub fn dim(&self) -> usize {
        self.nodes * self.layers
    }

    pub fn as_sparse(&self) -> Option<&SupraMatrix> {
        match &self.teleport {
            Teleport::Sparse(u) => Some(u),
            Teleport::AllOnes => None,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match &self.teleport {
            Teleport::AllOnes => 1.0,
            Teleport::Sparse(u) => u.get(r, c),
        }
    }

    /// Sum of all elements.
    pub fn total(&self) -> f64 {
        match &self.teleport {
            Teleport::AllOnes => (self.dim() * self.dim()) as f64,
            Teleport::Sparse(u) => u.total(),
        }
    }

    pub fn nonzeros(&self) -> usize {
        match &self.teleport {
            Teleport::AllOnes => self.dim() * self.dim(),
            Teleport::Sparse(u) => u.nnz(),
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        match &self.teleport {
            Teleport::AllOnes => vec![self.dim() as f64; self.dim()],
            Teleport::Sparse(u) => u.column_sums(),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match &self.teleport {
            Teleport::AllOnes => vec![self.dim() as f64; self.dim()],
            Teleport::Sparse(u) => u.row_sums(),
        }
    }

    /// `y = u x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        match &self.teleport {
            Teleport::AllOnes => {
                let s: f64 = x.iter().sum();
                y.iter_mut().for_each(|v| *v = s);
            }
            Teleport::Sparse(u) => u.mul_vec_into(x, y),
        }
    }
}

/// Builds `u` for a source set of common nodes under one scenario.
pub fn build_influence_matrix(
    net: &MultilayerNetwork,
    spec: &InfluenceSpec,
) -> Result<InfluenceMatrix> {
    if spec.sources.is_empty() {
        return Err(Error::EmptySourceSet);
    }
    let mut idx = Vec::with_capacity(spec.sources.len());
    for s in &spec.sources {
        match net.index_of(s) {
            Some(i) if net.node(i).is_common() => idx.push(i),
            _ => return Err(Error::SourceNotCommonNode(s.clone())),
        }
    }
    idx.sort_unstable();
    idx.dedup();
    Ok(InfluenceMatrix::for_nodes(
        net.node_count(),
        net.layer_count(),
        &idx,
        spec.scenario,
    ))
}
