//! `multirank` command-line driver.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use multirank::features::{correlation_prune, feature_names, write_feature_table, PruneEvent};
use multirank::graph::{build_network, edgelist, MultilayerNetwork};
use multirank::ingest::{build_window_network, defaulter_set, parse_loans, write_loans, LoanRecord, Month, WindowSpec};
use multirank::pipeline::{run_rolling, run_single_window, tune_sweep, write_sweep, write_window_summaries, PipelineConfig};
use multirank::propagation::{
    build_influence_matrix, multilayer_pagerank, personalized_pagerank, write_node_scores, write_state_scores,
    InfluenceSpec, RankConfig, RestartMode, Scenario, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use multirank::synth::{generate, SynthConfig};

/// Environment variable capping the worker pool.
const THREADS_ENV: &str = "MULTIRANK_THREADS";

#[derive(Parser)]
#[command(name = "multirank", version, about = "Multilayer network features for credit scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic loan file with planted area and product shocks.
    Generate(GenerateArgs),
    /// Build one window's network and write its layer edge lists and defaulters.
    Build(BuildArgs),
    /// Rank a network read from layer edge lists.
    Rank(RankArgs),
    /// Feature table of a single window.
    Features(FeaturesArgs),
    /// Feature table over all rolling windows.
    Pipeline(PipelineArgs),
    /// Univariate AUC of the score features over an r and stickiness grid.
    Sweep(SweepArgs),
    /// Print the size and connectivity of a network.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output loan file.
    #[arg(long)]
    out: PathBuf,
    /// Number of borrowers.
    #[arg(long, default_value_t = 1000)]
    borrowers: usize,
    /// Number of products.
    #[arg(long, default_value_t = 8)]
    products: usize,
    /// Number of districts.
    #[arg(long, default_value_t = 10)]
    districts: usize,
    /// Areas in each district.
    #[arg(long, default_value_t = 5)]
    areas_per_district: usize,
    /// Months of originations.
    #[arg(long, default_value_t = 80)]
    months: u32,
    /// First month, YYYY-MM.
    #[arg(long, default_value = "2000-01")]
    start: Month,
    /// Monthly default hazard outside shocks.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.005)]
    base_rate: f64,
    /// Hazard multiplier minus one in shocked areas.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    area_shock: f64,
    /// Hazard multiplier minus one for borrowers of a shocked product.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    product_shock: f64,
    /// Monthly probability that an area or product enters a shock.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.02)]
    shock_probability: f64,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WindowArgs {
    /// Loan file.
    #[arg(long)]
    loans: PathBuf,
    /// First month of the window, YYYY-MM.
    #[arg(long)]
    window_start: Month,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Window length in months.
    #[arg(long, default_value_t = WindowSpec::DEFAULT_LENGTH)]
    window_months: u32,
    /// Scoring tail in months.
    #[arg(long, default_value_t = WindowSpec::DEFAULT_TAIL)]
    tail_months: u32,
    /// Directory for product.csv, geography.csv and sources.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct NetworkArgs {
    /// Layer as NAME=PATH to a common_id,specific_id,weight file; repeat per layer.
    #[arg(long = "layer", value_name = "NAME=PATH", required = true)]
    layers: Vec<String>,
    /// Inter-layer coupling S.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    stickiness: f64,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// File with one source (defaulter) id per line; omit for the standard ranking.
    #[arg(long)]
    sources: Option<PathBuf>,
    /// Influence scenario: intra, inter or combined.
    #[arg(long, default_value = "combined")]
    scenario: Scenario,
    /// Damping factor.
    #[arg(long, allow_negative_numbers = true, default_value_t = DEFAULT_DAMPING)]
    r: f64,
    /// Restart mode: faithful or collapsed.
    #[arg(long, default_value = "faithful")]
    restart_mode: RestartMode,
    /// L1 convergence tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Per-node scores (node_id,score).
    #[arg(long)]
    out_nodes: PathBuf,
    /// Per-state scores (node_id,layer,score).
    #[arg(long)]
    out_states: PathBuf,
}

/// Pipeline settings; flags override the config file.
#[derive(Args)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Window length in months.
    #[arg(long)]
    window_months: Option<u32>,
    /// Scoring tail in months.
    #[arg(long)]
    tail_months: Option<u32>,
    /// Damping factor.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Inter-layer coupling S.
    #[arg(long, allow_negative_numbers = true)]
    stickiness: Option<f64>,
    /// Comma-separated scenarios to run.
    #[arg(long)]
    scenarios: Option<String>,
    /// Restart mode: faithful or collapsed.
    #[arg(long)]
    restart_mode: Option<RestartMode>,
    /// Whether to add the flat-network Aggregate score (true or false).
    #[arg(long)]
    flat_baseline: Option<bool>,
    /// L1 convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Iteration cap per run.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Worker threads; MULTIRANK_THREADS caps this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output feature table.
    #[arg(long)]
    out: PathBuf,
    /// Print the columns kept by correlation pruning at this cutoff.
    #[arg(long, value_name = "CUTOFF", num_args = 0..=1, default_missing_value = "0.7")]
    prune: Option<f64>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Loan file.
    #[arg(long)]
    loans: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output feature table; defaults to `output` from the config file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one line per window with sizes, iterations and timings.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Loan file.
    #[arg(long)]
    loans: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated damping values.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_value = "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.85,0.95")]
    r_grid: Vec<f64>,
    /// Comma-separated stickiness values.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_value = "1")]
    s_grid: Vec<f64>,
    /// Output report (r,stickiness,feature,auc,n_rows).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    network: NetworkArgs,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn read_loans(path: &Path) -> Result<Vec<LoanRecord>> {
    let records = parse_loans(open(path)?).with_context(|| format!("{}", path.display()))?;
    info!("{}: {} loans", path.display(), records.len());
    Ok(records)
}

fn read_network(args: &NetworkArgs) -> Result<MultilayerNetwork> {
    let mut layers = Vec::new();
    for spec in &args.layers {
        let Some((name, path)) = spec.split_once('=') else {
            bail!(multirank::Error::InvalidConfig(format!("--layer expects NAME=PATH, got `{spec}`")));
        };
        let path = Path::new(path);
        layers.push(edgelist::read_layer(name, open(path)?).with_context(|| format!("{}", path.display()))?);
    }
    Ok(build_network(layers, args.stickiness)?)
}

fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!(multirank::Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            cfg.apply_text(&text).with_context(|| format!("{}", path.display()))?;
        }
        macro_rules! over {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        over!(window_months, tail_months, r, stickiness, restart_mode, flat_baseline, tolerance, max_iter);
        if let Some(s) = &self.scenarios {
            cfg.set("scenarios", s)?;
        }
        if let Some(n) = self.threads {
            cfg.threads = Some(n);
        }
        if let Some(cap) = env_threads()? {
            cfg.threads = Some(cfg.threads.map_or(cap, |n| n.min(cap)));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let cfg = SynthConfig {
        n_borrowers: a.borrowers,
        n_products: a.products,
        n_districts: a.districts,
        areas_per_district: a.areas_per_district,
        months: a.months,
        start: a.start,
        base_default_rate: a.base_rate,
        area_shock_strength: a.area_shock,
        product_shock_strength: a.product_shock,
        shock_probability: a.shock_probability,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let book = generate(&cfg)?;
    let mut w = create(&a.out)?;
    write_loans(&book.records, &mut w)?;
    w.flush()?;
    let defaults = book.records.iter().filter(|r| r.defaulted).count();
    println!("{} loans, {} defaulted, written to {}", book.records.len(), defaults, a.out.display());
    Ok(())
}

fn cmd_build(a: &BuildArgs) -> Result<()> {
    let records = read_loans(&a.window.loans)?;
    let window = WindowSpec::new(a.window.window_start, a.window_months, a.tail_months)?;
    let net = build_window_network(&records, &window, 1.0)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    for (k, layer) in net.layers().iter().enumerate() {
        let mut w = create(&a.out_dir.join(format!("{}.csv", layer.name)))?;
        edgelist::write_layer(&net, k, &mut w)?;
        w.flush()?;
    }
    let mut w = create(&a.out_dir.join("sources.txt"))?;
    let sources = defaulter_set(&records, &window);
    for s in &sources {
        writeln!(w, "{s}")?;
    }
    w.flush()?;
    println!(
        "window {}: {} nodes, {} edges, {} defaulters, written to {}",
        window.start,
        net.node_count(),
        net.edge_count(),
        sources.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_rank(a: &RankArgs) -> Result<()> {
    let net = read_network(&a.network)?;
    let t = multirank::graph::supra_transition(&multirank::graph::supra_adjacency(&net));
    let cfg = RankConfig {
        damping: a.r,
        tolerance: a.tolerance,
        max_iter: a.max_iter,
        restart_mode: a.restart_mode,
    };
    let result = match &a.sources {
        None => multilayer_pagerank(&t, &cfg)?,
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let spec = InfluenceSpec {
                sources: text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
                scenario: a.scenario,
                restart_mode: a.restart_mode,
            };
            let u = build_influence_matrix(&net, &spec).with_context(|| format!("{}", path.display()))?;
            personalized_pagerank(&t, &u, &cfg)?
        }
    };
    let result = result.into_converged()?;
    let mut w = create(&a.out_nodes)?;
    write_node_scores(&net, &result, &mut w)?;
    w.flush()?;
    let mut w = create(&a.out_states)?;
    write_state_scores(&net, &result, &mut w)?;
    w.flush()?;
    println!("converged after {} iterations", result.iterations);
    Ok(())
}

fn cmd_features(a: &FeaturesArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let records = read_loans(&a.window.loans)?;
    let (rows, summary) = run_single_window(&records, a.window.window_start, &cfg)?;
    let mut w = create(&a.out)?;
    write_feature_table(&rows, cfg.flat_baseline, &mut w)?;
    w.flush()?;
    println!(
        "window {}: {} rows, {} defaulters, written to {}",
        summary.start,
        rows.len(),
        summary.defaulters,
        a.out.display()
    );
    if let Some(cutoff) = a.prune {
        let mut table: Vec<(String, Vec<f64>)> = Vec::new();
        let values: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.values(cfg.flat_baseline)).collect();
        for (k, name) in feature_names(cfg.flat_baseline).into_iter().enumerate() {
            // columns with missing values cannot be correlated
            if let Some(col) = values.iter().map(|v| v[k]).collect::<Option<Vec<f64>>>() {
                table.push((name.to_string(), col));
            }
        }
        table.push(("label".into(), rows.iter().map(|r| r.label as u8 as f64).collect()));
        let outcome = correlation_prune(&table, "label", cutoff)?;
        for event in &outcome.log {
            match event {
                PruneEvent::Constant { column } => println!("dropped {column}: constant"),
                PruneEvent::Correlated { dropped, kept, correlation } => {
                    println!("dropped {dropped}: |corr| {correlation:.3} with {kept}")
                }
            }
        }
        let kept: Vec<&str> = outcome.retained.iter().map(String::as_str).filter(|c| *c != "label").collect();
        println!("retained: {}", kept.join(","));
    }
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let Some(out_path) = a.out.clone().or_else(|| cfg.output.clone()) else {
        bail!(multirank::Error::InvalidConfig("no output file: pass --out or set `output`".into()));
    };
    let records = read_loans(&a.loans)?;
    let out = run_rolling(&records, &cfg)?;
    let mut w = create(&out_path)?;
    write_feature_table(&out.rows, cfg.flat_baseline, &mut w)?;
    w.flush()?;
    if let Some(path) = &a.summary {
        let mut w = create(path)?;
        write_window_summaries(&out.windows, &mut w)?;
        w.flush()?;
    }
    let unconverged = out.windows.iter().filter(|s| !s.converged).count();
    println!(
        "{} windows, {} rows written to {}{}",
        out.windows.len(),
        out.rows.len(),
        out_path.display(),
        if unconverged > 0 { format!(", {unconverged} windows not converged") } else { String::new() }
    );
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let records = read_loans(&a.loans)?;
    let report = tune_sweep(&records, &a.r_grid, &a.s_grid, &cfg)?;
    let mut w = create(&a.out)?;
    write_sweep(&report, &mut w)?;
    w.flush()?;
    println!("{} sweep rows written to {}", report.len(), a.out.display());
    Ok(())
}

fn cmd_inspect(a: &InspectArgs) -> Result<()> {
    let net = read_network(&a.network)?;
    println!("N={}", net.node_count());
    println!("L={}", net.layer_count());
    println!("common={}", net.common_count());
    for layer in net.layers() {
        println!("edges[{}]={}", layer.name, layer.edges.len());
    }
    println!("largest_component_fraction={}", net.largest_component_fraction()?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Build(a) => cmd_build(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Features(a) => cmd_features(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

/// 2 for failed reads and writes, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<multirank::Error>() {
            return if e.is_io() { 2 } else { 1 };
        }
        if cause.is::<io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
