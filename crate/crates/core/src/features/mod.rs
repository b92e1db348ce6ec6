//! The network variables of one borrower in one window: twenty neighbourhood
//! counts, twelve personalized PageRank scores and the optional flat score.

mod degree;
mod scores;
mod select;

use std::io::Write;

pub use degree::{degree_features, DegreeCounts, DegreeEntity, WindowIndex};
pub use scores::{score_features, ScoreIndex};
pub use select::{correlation_prune, univariate_auc, PruneEvent, PruneOutcome, DEFAULT_PRUNE_CUTOFF};

use crate::error::Result;
use crate::ingest::Month;

pub const DEGREE_NAMES: [&str; 20] = [
    "ProdDegree1",
    "ProdDegree1_DF",
    "ProdDegree5",
    "ProdDegree5_DF",
    "DistDegree1",
    "DistDegree1_DF",
    "DistDegree5",
    "DistDegree5_DF",
    "AreaDegree1",
    "AreaDegree1_DF",
    "AreaDegree5",
    "AreaDegree5_DF",
    "ProdDistDegree1",
    "ProdDistDegree1_DF",
    "ProdDistDegree5",
    "ProdDistDegree5_DF",
    "ProdAreaDegree1",
    "ProdAreaDegree1_DF",
    "ProdAreaDegree5",
    "ProdAreaDegree5_DF",
];

pub const SCORE_NAMES: [&str; 12] = [
    "Bipart_intra",
    "Bipart_inter",
    "Bipart_combined",
    "Bipart_product_intra_max",
    "Bipart_product_inter_max",
    "Bipart_product_combined_max",
    "Bipart_district_intra_max",
    "Bipart_district_inter_max",
    "Bipart_district_combined_max",
    "Bipart_area_intra_max",
    "Bipart_area_inter_max",
    "Bipart_area_combined_max",
];

pub const AGGREGATE_NAME: &str = "Aggregate";

/// Feature column names in output order, without identifiers and label.
pub fn feature_names(with_aggregate: bool) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = DEGREE_NAMES.iter().chain(&SCORE_NAMES).copied().collect();
    if with_aggregate {
        names.push(AGGREGATE_NAME);
    }
    names
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub window_start: Month,
    pub borrower_id: String,
    pub degrees: DegreeCounts,
    /// In [`SCORE_NAMES`] order; `None` when the window has no defaulters or
    /// the scenario was not run.
    pub scores: [Option<f64>; 12],
    pub aggregate: Option<f64>,
    pub label: bool,
}

impl FeatureRow {
    /// Feature values in [`feature_names`] order.
    pub fn values(&self, with_aggregate: bool) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = self.degrees.as_array().iter().map(|&c| Some(c as f64)).collect();
        out.extend(self.scores);
        if with_aggregate {
            out.push(self.aggregate);
        }
        out
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Writes `window_start,borrower_id,<features>,label`; missing scores are
/// empty cells.
pub fn write_feature_table<W: Write>(rows: &[FeatureRow], with_aggregate: bool, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["window_start", "borrower_id"];
    header.extend(feature_names(with_aggregate));
    header.push("label");
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.window_start.to_string(), row.borrower_id.clone()];
        rec.extend(row.degrees.as_array().iter().map(u32::to_string));
        rec.extend(row.scores.iter().map(|&s| cell(s)));
        if with_aggregate {
            rec.push(cell(row.aggregate));
        }
        rec.push(if row.label { "1" } else { "0" }.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
