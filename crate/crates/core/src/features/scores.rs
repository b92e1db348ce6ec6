use crate::error::{Error, Result};
use crate::graph::MultilayerNetwork;
use crate::ingest::Connector;
use crate::propagation::{RankResult, Scenario};

/// Specific neighbours of each common node, split by connector and sorted
/// by node id.
#[derive(Debug, Clone)]
pub struct ScoreIndex<'a> {
    net: &'a MultilayerNetwork,
    neighbors: Vec<[Vec<usize>; 3]>,
}

impl<'a> ScoreIndex<'a> {
    pub fn new(net: &'a MultilayerNetwork) -> Self {
        let neighbors = net
            .specific_neighbors()
            .into_iter()
            .map(|list| {
                let mut split: [Vec<usize>; 3] = Default::default();
                for s in list {
                    let c = Connector::of(&net.node(s).id)
                        .expect("window networks only hold prefixed product, district and area nodes");
                    split[c as usize].push(s);
                }
                for v in &mut split {
                    v.sort_by(|&a, &b| net.node(a).id.cmp(&net.node(b).id));
                    v.dedup();
                }
                split
            })
            .collect();
        ScoreIndex { net, neighbors }
    }

    /// `[ω(borrower), max ω over its products, districts, areas]` for one run.
    pub fn scores(&self, result: &RankResult, borrower: &str) -> Result<[f64; 4]> {
        let b = match self.net.index_of(borrower) {
            Some(b) if self.net.node(b).is_common() => b,
            _ => return Err(Error::MissingScenarioRun(format!("borrower `{borrower}` is not in the window network"))),
        };
        let omega = &result.per_node;
        let mut out = [omega[b], 0.0, 0.0, 0.0];
        for (c, nodes) in self.neighbors[b].iter().enumerate() {
            // ids ascending, strict comparison: the first maximal node wins
            let mut best: Option<f64> = None;
            for &s in nodes {
                if best.is_none_or(|v| omega[s] > v) {
                    best = Some(omega[s]);
                }
            }
            out[c + 1] = best.expect("every borrower has a product, a district and an area");
        }
        Ok(out)
    }
}

/// The twelve `Bipart_*` values of one borrower, in [`super::SCORE_NAMES`]
/// order. `runs` must hold one result per scenario.
pub fn score_features(net: &MultilayerNetwork, runs: &[(Scenario, RankResult)], borrower: &str) -> Result<[f64; 12]> {
    let index = ScoreIndex::new(net);
    let mut out = [0.0; 12];
    for (k, scenario) in Scenario::ALL.into_iter().enumerate() {
        let (_, result) = runs
            .iter()
            .find(|(s, _)| *s == scenario)
            .ok_or_else(|| Error::MissingScenarioRun(format!("no {scenario} run")))?;
        let s = index.scores(result, borrower)?;
        for (slot, v) in s.into_iter().enumerate() {
            out[slot * 3 + k] = v;
        }
    }
    Ok(out)
}
