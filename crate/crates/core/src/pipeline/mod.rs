//! Rolling windows shifted one month at a time: per window, build the
//! network, rank it from the window's defaulters and emit one feature row
//! per scoring-tail borrower.

mod config;

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

pub use config::PipelineConfig;

use crate::error::{Error, Result};
use crate::features::{univariate_auc, FeatureRow, ScoreIndex, WindowIndex, AGGREGATE_NAME, SCORE_NAMES};
use crate::graph::{supra_adjacency, supra_transition};
use crate::ingest::{build_window_network, defaulter_set, origination_span, LoanRecord, Month, WindowSpec};
use crate::propagation::{
    build_influence_matrix, flat_personalized_pagerank, personalized_pagerank, InfluenceSpec, Scenario,
};

/// Windows whose largest component holds less than this share of the nodes
/// are logged.
pub const COMPONENT_WARN_FRACTION: f64 = 0.995;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummary {
    pub start: Month,
    pub borrowers: usize,
    pub defaulters: usize,
    pub rows: usize,
    pub component_fraction: f64,
    /// Iterations of each personalized run, in scenario order.
    pub iterations: Vec<(Scenario, usize)>,
    pub converged: bool,
    /// Wall-clock seconds spent in the personalized runs.
    pub rank_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingOutput {
    /// Ordered by window, then borrower id.
    pub rows: Vec<FeatureRow>,
    pub windows: Vec<WindowSummary>,
}

/// Window starts from the first origination month while the window fits in
/// the data.
pub fn window_starts(records: &[LoanRecord], window_months: u32) -> Result<Vec<Month>> {
    let (first, last) = origination_span(records).ok_or(Error::SpanTooShort {
        span: 0,
        window: window_months,
    })?;
    let span = last.since(first) + 1;
    if span < window_months as i32 {
        return Err(Error::SpanTooShort {
            span: span as u32,
            window: window_months,
        });
    }
    Ok((0..=span - window_months as i32).map(|k| first + k).collect())
}

fn run_window(
    records: &[LoanRecord],
    first_seen: &HashMap<&str, Month>,
    eligible_from: Month,
    window: WindowSpec,
    cfg: &PipelineConfig,
) -> Result<(Vec<FeatureRow>, WindowSummary)> {
    let index = WindowIndex::build(records, &window);
    let tail: Vec<&str> = index
        .tail_borrowers()
        .filter(|b| first_seen[b] >= eligible_from)
        .collect();
    let net = build_window_network(records, &window, cfg.stickiness)?;
    let fraction = net.largest_component_fraction()?;
    if fraction < COMPONENT_WARN_FRACTION {
        warn!("window {}: largest component holds {:.4} of the nodes", window.start, fraction);
    }

    let sources: Vec<String> = defaulter_set(records, &window).into_iter().collect();
    let mut summary = WindowSummary {
        start: window.start,
        borrowers: index.borrower_count(),
        defaulters: sources.len(),
        rows: tail.len(),
        component_fraction: fraction,
        iterations: Vec::new(),
        converged: true,
        rank_seconds: 0.0,
    };

    let mut scores: Vec<[Option<f64>; 12]> = vec![[None; 12]; tail.len()];
    let mut aggregate: Vec<Option<f64>> = vec![None; tail.len()];
    if sources.is_empty() {
        info!("window {}: no defaulters, score features left empty", window.start);
    } else if !tail.is_empty() {
        let rank_cfg = cfg.rank_config();
        let t = supra_transition(&supra_adjacency(&net));
        let lookup = ScoreIndex::new(&net);
        let clock = Instant::now();
        for &scenario in &cfg.scenarios {
            let spec = InfluenceSpec {
                sources: sources.clone(),
                scenario,
                restart_mode: cfg.restart_mode,
            };
            let u = build_influence_matrix(&net, &spec)?;
            let result = personalized_pagerank(&t, &u, &rank_cfg)?;
            if !result.converged {
                warn!(
                    "window {}: {scenario} run stopped at {} iterations, residual {:e}",
                    window.start, result.iterations, result.residual
                );
                summary.converged = false;
            }
            summary.iterations.push((scenario, result.iterations));
            let k = Scenario::ALL.iter().position(|s| *s == scenario).expect("known scenario");
            for (row, b) in scores.iter_mut().zip(&tail) {
                let s = lookup.scores(&result, b)?;
                for (slot, v) in s.into_iter().enumerate() {
                    row[slot * 3 + k] = Some(v);
                }
            }
        }
        summary.rank_seconds = clock.elapsed().as_secs_f64();
        if cfg.flat_baseline {
            let flat = flat_personalized_pagerank(&net, &sources, &rank_cfg)?;
            if !flat.converged {
                warn!("window {}: flat run did not converge", window.start);
                summary.converged = false;
            }
            // aggregation keeps the node order
            for (a, b) in aggregate.iter_mut().zip(&tail) {
                *a = net.index_of(b).map(|i| flat.per_node[i]);
            }
        }
    }

    let mut rows = Vec::with_capacity(tail.len());
    for (k, b) in tail.iter().enumerate() {
        rows.push(FeatureRow {
            window_start: window.start,
            borrower_id: b.to_string(),
            degrees: index.degrees(b)?,
            scores: scores[k],
            aggregate: aggregate[k],
            label: index.label(b)?,
        });
    }
    info!(
        "window {}: {} borrowers, {} defaulters, {} rows",
        window.start, summary.borrowers, summary.defaulters, summary.rows
    );
    Ok((rows, summary))
}

/// Earliest origination per borrower, and the first month from which a
/// borrower may be scored.
fn eligibility<'a>(records: &'a [LoanRecord], first: Month, cfg: &PipelineConfig) -> (HashMap<&'a str, Month>, Month) {
    let mut first_seen: HashMap<&str, Month> = HashMap::new();
    for r in records {
        first_seen
            .entry(r.borrower_id.as_str())
            .and_modify(|m| *m = (*m).min(r.origination))
            .or_insert(r.origination);
    }
    (first_seen, first + (cfg.window_months - cfg.tail_months) as i32)
}

/// Builds and scores every window. Borrowers whose first loan in the data
/// falls before the first scoring tail are never emitted.
pub fn run_rolling(records: &[LoanRecord], cfg: &PipelineConfig) -> Result<RollingOutput> {
    cfg.validate()?;
    let starts = window_starts(records, cfg.window_months)?;
    let (first_seen, eligible_from) = eligibility(records, starts[0], cfg);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let per_window: Vec<(Vec<FeatureRow>, WindowSummary)> = pool.install(|| {
        starts
            .par_iter()
            .map(|&start| {
                let window = WindowSpec::new(start, cfg.window_months, cfg.tail_months)?;
                run_window(records, &first_seen, eligible_from, window, cfg)
            })
            .collect::<Result<_>>()
    })?;

    let mut out = RollingOutput {
        rows: Vec::new(),
        windows: Vec::with_capacity(per_window.len()),
    };
    for (rows, summary) in per_window {
        out.rows.extend(rows);
        out.windows.push(summary);
    }
    Ok(out)
}

/// One window of [`run_rolling`], with the same eligibility rule.
pub fn run_single_window(records: &[LoanRecord], start: Month, cfg: &PipelineConfig) -> Result<(Vec<FeatureRow>, WindowSummary)> {
    cfg.validate()?;
    let starts = window_starts(records, cfg.window_months)?;
    if !starts.contains(&start) {
        return Err(Error::InvalidConfig(format!(
            "window start {start} outside {}..={}",
            starts[0],
            starts[starts.len() - 1]
        )));
    }
    let (first_seen, eligible_from) = eligibility(records, starts[0], cfg);
    let window = WindowSpec::new(start, cfg.window_months, cfg.tail_months)?;
    run_window(records, &first_seen, eligible_from, window, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub stickiness: f64,
    pub feature: String,
    /// `None` when the feature has no values or the labels are one-sided.
    pub auc: Option<f64>,
    /// Rows with a value for this feature.
    pub n_rows: usize,
}

/// Univariate AUCs of the score features (and `Aggregate` when the flat
/// baseline is on) for every `(r, S)` pair, `r` varying slowest.
pub fn tune_sweep(records: &[LoanRecord], r_grid: &[f64], s_grid: &[f64], cfg: &PipelineConfig) -> Result<Vec<SweepRow>> {
    if r_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must be nonempty".into()));
    }
    let mut report = Vec::new();
    for &r in r_grid {
        for &s in s_grid {
            let run_cfg = PipelineConfig {
                r,
                stickiness: s,
                ..cfg.clone()
            };
            let out = run_rolling(records, &run_cfg)?;
            // `None` selects the flat score
            let mut columns: Vec<(&str, Option<usize>)> = SCORE_NAMES.iter().enumerate().map(|(k, &n)| (n, Some(k))).collect();
            if cfg.flat_baseline {
                columns.push((AGGREGATE_NAME, None));
            }
            for (name, slot) in columns {
                let (values, labels): (Vec<f64>, Vec<bool>) = out
                    .rows
                    .iter()
                    .filter_map(|row| slot.map_or(row.aggregate, |k| row.scores[k]).map(|v| (v, row.label)))
                    .unzip();
                let auc = match univariate_auc(&values, &labels) {
                    Ok(a) => Some(a),
                    Err(Error::DegenerateLabels) => None,
                    Err(e) => return Err(e),
                };
                info!("sweep r={r} S={s} {name}: auc {auc:?} over {} rows", values.len());
                report.push(SweepRow {
                    r,
                    stickiness: s,
                    feature: name.to_string(),
                    auc,
                    n_rows: values.len(),
                });
            }
        }
    }
    Ok(report)
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r", "stickiness", "feature", "auc", "n_rows"])?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            row.stickiness.to_string(),
            row.feature.clone(),
            row.auc.map(|a| format!("{a:.6}")).unwrap_or_default(),
            row.n_rows.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one line per window: `window_start,borrowers,defaulters,rows,
/// component_fraction,iterations,converged,rank_seconds`, with iterations as
/// `scenario:count` pairs joined by `;`.
pub fn write_window_summaries<W: Write>(windows: &[WindowSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "window_start",
        "borrowers",
        "defaulters",
        "rows",
        "component_fraction",
        "iterations",
        "converged",
        "rank_seconds",
    ])?;
    for s in windows {
        let iterations: Vec<String> = s.iterations.iter().map(|(sc, n)| format!("{sc}:{n}")).collect();
        w.write_record([
            s.start.to_string(),
            s.borrowers.to_string(),
            s.defaulters.to_string(),
            s.rows.to_string(),
            s.component_fraction.to_string(),
            iterations.join(";"),
            s.converged.to_string(),
            format!("{:.3}", s.rank_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}
