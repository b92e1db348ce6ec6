//! Multilayer PageRank and its personalized variants.

use std::collections::BTreeSet;
use std::io::Write;

use super::influence::{InfluenceMatrix, RestartMode};
use crate::error::{Error, Result};
use crate::graph::{supra_adjacency, supra_transition, MultilayerNetwork, SupraMatrix};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    /// Probability `r` of following an edge rather than teleporting.
    pub damping: f64,
    /// Stop once the L1 change between iterates is at most this.
    pub tolerance: f64,
    pub max_iter: usize,
    pub restart_mode: RestartMode,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            restart_mode: RestartMode::FaithfulMatrix,
        }
    }
}

impl RankConfig {
    pub fn with_damping(mut self, r: f64) -> Self {
        self.damping = r;
        self
    }

    pub fn with_mode(mut self, mode: RestartMode) -> Self {
        self.restart_mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in [0, 1], got {}",
                self.damping
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidConfig("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    /// Π over the N·L supra states; sums to 1.
    pub per_state: Vec<f64>,
    /// ω over the N nodes: Π summed over layers.
    pub per_node: Vec<f64>,
    pub iterations: usize,
    /// L1 change at the last iteration.
    pub residual: f64,
    pub converged: bool,
}

impl RankResult {
    fn new(per_state: Vec<f64>, nodes: usize, iterations: usize, residual: f64, tol: f64) -> Self {
        let per_node = aggregate_layers(&per_state, nodes);
        RankResult {
            per_state,
            per_node,
            iterations,
            residual,
            converged: residual <= tol,
        }
    }

    /// Turns a non-converged run into [`Error::NoConvergence`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// ω_i = Σ_α Π_{iα}.
pub fn aggregate_layers(per_state: &[f64], nodes: usize) -> Vec<f64> {
    let mut omega = vec![0.0; nodes];
    if nodes == 0 {
        return omega;
    }
    for layer in per_state.chunks(nodes) {
        for (o, p) in omega.iter_mut().zip(layer) {
            *o += p;
        }
    }
    omega
}

fn check_stochastic(t: &SupraMatrix) -> Result<()> {
    for (column, sum) in t.column_sums().into_iter().enumerate() {
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { column, sum });
        }
    }
    Ok(())
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Iterates `Π ← r T Π + (1 - r) v` from the uniform vector. The map is an
/// `r`-contraction in L1 and preserves total mass when `v` sums to 1.
fn restart_iteration(t: &SupraMatrix, restart: &[f64], cfg: &RankConfig) -> RankResult {
    let dim = t.dim();
    let r = cfg.damping;
    let mut x = vec![1.0 / dim as f64; dim];
    let mut y = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        t.mul_vec_into(&x, &mut y);
        for (yi, vi) in y.iter_mut().zip(restart) {
            *yi = r * *yi + (1.0 - r) * vi;
        }
        residual = l1_distance(&x, &y);
        std::mem::swap(&mut x, &mut y);
        if residual <= cfg.tolerance {
            break;
        }
    }
    RankResult::new(x, t.nodes(), iterations, residual, cfg.tolerance)
}

/// Leading eigenvector of `R = r T + (1 - r) û`, where `û` is `u` with each
/// non-empty column scaled to sum 1 (for the all-ones `u` this is the uniform
/// `1 / (N·L)` teleport). Power iteration with L1 renormalization; each step
/// averages the renormalized product with the current iterate, i.e. iterates
/// on `R/ρ + I`, which has the same eigenvectors but does not oscillate on
/// the bipartite supra graph.
fn eigen_iteration(t: &SupraMatrix, u: &InfluenceMatrix, cfg: &RankConfig) -> RankResult {
    let dim = t.dim();
    let r = cfg.damping;
    let weights: Vec<f64> = u
        .column_sums()
        .into_iter()
        .map(|s| if s > 0.0 { (1.0 - r) / s } else { 0.0 })
        .collect();
    let mut x = vec![1.0 / dim as f64; dim];
    let mut xw = vec![0.0; dim];
    let mut tx = vec![0.0; dim];
    let mut ux = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        t.mul_vec_into(&x, &mut tx);
        for ((a, xi), wi) in xw.iter_mut().zip(&x).zip(&weights) {
            *a = xi * wi;
        }
        u.apply_into(&xw, &mut ux);
        for (a, b) in tx.iter_mut().zip(&ux) {
            *a = r * *a + b;
        }
        let norm: f64 = tx.iter().sum();
        residual = 0.0;
        for (xi, yi) in x.iter_mut().zip(&tx) {
            let next = 0.5 * (*xi + yi / norm);
            residual += (next - *xi).abs();
            *xi = next;
        }
        if residual <= cfg.tolerance {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    RankResult::new(x, t.nodes(), iterations, residual, cfg.tolerance)
}

/// Restart vector of the collapsed mode: row sums of `u`, normalized.
pub fn restart_vector(u: &InfluenceMatrix) -> Vec<f64> {
    let sums = u.row_sums();
    let total: f64 = sums.iter().sum();
    sums.into_iter().map(|s| s / total).collect()
}

/// Personalized multilayer PageRank over a column-stochastic supra transition
/// matrix `t` and influence matrix `u`.
///
/// A run that hits `max_iter` is still returned, with `converged == false`.
pub fn personalized_pagerank(
    t: &SupraMatrix,
    u: &InfluenceMatrix,
    cfg: &RankConfig,
) -> Result<RankResult> {
    cfg.validate()?;
    if t.dim() == 0 {
        return Err(Error::EmptyNetwork);
    }
    if u.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            got: u.dim(),
        });
    }
    if u.total() <= 0.0 {
        return Err(Error::EmptySourceSet);
    }
    check_stochastic(t)?;
    // with u all ones R is column-stochastic and both modes solve the same
    // linear system
    if u.is_all_ones() {
        let v = vec![1.0 / t.dim() as f64; t.dim()];
        return Ok(restart_iteration(t, &v, cfg));
    }
    Ok(match cfg.restart_mode {
        RestartMode::FaithfulMatrix => eigen_iteration(t, u, cfg),
        RestartMode::CollapsedVector => restart_iteration(t, &restart_vector(u), cfg),
    })
}

/// Standard multilayer PageRank: uniform teleport over all N·L states.
pub fn multilayer_pagerank(t: &SupraMatrix, cfg: &RankConfig) -> Result<RankResult> {
    personalized_pagerank(t, &InfluenceMatrix::all_ones(t.nodes(), t.layers()), cfg)
}

/// Ordinary personalized PageRank on the edge-coloured aggregate of `net`
/// (the infinite-stickiness limit), restarting uniformly on `sources`.
/// Multilayer inputs are aggregated first.
pub fn flat_personalized_pagerank<S: AsRef<str>>(
    net: &MultilayerNetwork,
    sources: &[S],
    cfg: &RankConfig,
) -> Result<RankResult> {
    cfg.validate()?;
    if sources.is_empty() {
        return Err(Error::EmptySourceSet);
    }
    let flat;
    let net = if net.layer_count() > 1 {
        flat = net.aggregate();
        &flat
    } else {
        net
    };
    if net.node_count() == 0 {
        return Err(Error::EmptyNetwork);
    }
    let mut idx = BTreeSet::new();
    for s in sources {
        match net.index_of(s.as_ref()) {
            Some(i) if net.node(i).is_common() => {
                idx.insert(i);
            }
            _ => return Err(Error::SourceNotCommonNode(s.as_ref().to_string())),
        }
    }
    let t = supra_transition(&supra_adjacency(net));
    let mut v = vec![0.0; t.dim()];
    let w = 1.0 / idx.len() as f64;
    for i in idx {
        v[i] = w;
    }
    Ok(restart_iteration(&t, &v, cfg))
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `node_id,score` rows.
pub fn write_node_scores<W: Write>(
    net: &MultilayerNetwork,
    result: &RankResult,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node_id", "score"])?;
    for (node, score) in net.nodes().iter().zip(&result.per_node) {
        w.write_record([node.id.as_str(), &sci(*score)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `node_id,layer,score` rows, layer-major.
pub fn write_state_scores<W: Write>(
    net: &MultilayerNetwork,
    result: &RankResult,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node_id", "layer", "score"])?;
    let n = net.node_count();
    for (a, layer) in net.layers().iter().enumerate() {
        for (i, node) in net.nodes().iter().enumerate() {
            w.write_record([
                node.id.as_str(),
                layer.name.as_str(),
                &sci(result.per_state[a * n + i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
