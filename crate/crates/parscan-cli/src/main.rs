//! Command-line frontend: build-index, query, sweep, quality, oracle-check.
//!
//! Reports are JSON on stdout (or stderr when the primary payload itself goes
//! to stdout); failures print `{"error": …, "category": …}` on stderr and
//! exit 1. Usage errors exit 2 via clap.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use parscan::error::{Result, ScanError};
use parscan::graph::{load_edge_list_file, Graph, LoadStats};
use parscan::index::{deserialize_index, serialize_index, CoreOrder, NeighborOrder, ScanIndex};
use parscan::oracle::naive_scan;
use parscan::par;
use parscan::quality::{
    adjusted_rand_index, default_epsilon_grid, default_mu_grid, modularity, sweep, QualityMetric,
};
use parscan::query::{
    cluster_with_stats, label_hubs_outliers, parse_clustering, write_clustering, Clustering,
    QueryParams,
};
use parscan::similarity::approx::{compute_similarities_hybrid_with_stats, ApproxConfig, SketchScheme};
use parscan::similarity::exact::compute_similarities;
use parscan::similarity::Measure;

#[derive(Parser)]
#[command(name = "parscan", version, about = "Structural graph clustering over a reusable similarity index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the similarity index for an edge-list graph
    BuildIndex(BuildArgs),
    /// Cluster an indexed graph at one (mu, epsilon) setting
    Query(QueryArgs),
    /// Score clusterings across a (mu, epsilon) grid
    Sweep(SweepArgs),
    /// Score an existing clustering file
    Quality(QualityArgs),
    /// Cross-check the indexed pipeline against brute force on a small graph
    OracleCheck(OracleArgs),
}

fn parse_exact_measure(s: &str) -> std::result::Result<Measure, String> {
    match Measure::from_str_tag(s) {
        Some(m) if m.is_exact() => Ok(m),
        _ => Err(format!("expected cosine, jaccard, or weighted-cosine, got {s:?}")),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ApproxFlag {
    None,
    Scheme(SketchScheme),
}

fn parse_approx(s: &str) -> std::result::Result<ApproxFlag, String> {
    Ok(match s {
        "none" => ApproxFlag::None,
        "simhash" => ApproxFlag::Scheme(SketchScheme::SimHash),
        "minhash-standard" => ApproxFlag::Scheme(SketchScheme::MinHashStandard),
        "minhash-kpartition" => ApproxFlag::Scheme(SketchScheme::MinHashKPartition),
        _ => {
            return Err(format!(
                "expected none, simhash, minhash-standard, or minhash-kpartition, got {s:?}"
            ))
        }
    })
}

fn parse_metric(s: &str) -> std::result::Result<QualityMetric, String> {
    QualityMetric::from_str_tag(s).ok_or_else(|| format!("expected modularity or ari, got {s:?}"))
}

#[derive(Args)]
struct BuildArgs {
    /// Edge-list file: one "u v" (or "u v w" with --weighted) per line
    #[arg(long)]
    input: PathBuf,
    /// Parse a third column as positive edge weights
    #[arg(long)]
    weighted: bool,
    /// Similarity measure
    #[arg(long, value_parser = parse_exact_measure)]
    similarity: Measure,
    /// Sketch scheme for high-degree edges
    #[arg(long, value_parser = parse_approx, default_value = "none")]
    approx: ApproxFlag,
    /// Sketch samples per vertex (requires --approx)
    #[arg(long)]
    samples: Option<usize>,
    /// Sketch seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Index file to write
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file from build-index
    #[arg(long)]
    index: PathBuf,
    /// Minimum epsilon-neighborhood size for a core (>= 2)
    #[arg(long)]
    mu: usize,
    /// Similarity threshold in [0, 1]
    #[arg(long)]
    epsilon: f64,
    /// Resolve border-vertex ties deterministically (highest similarity,
    /// then lowest core id) instead of first-writer-wins
    #[arg(long)]
    deterministic_borders: bool,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Clustering file to write (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Index file from build-index
    #[arg(long)]
    index: PathBuf,
    /// The graph the index was built from (for modularity weights)
    #[arg(long)]
    input: PathBuf,
    /// Parse a third column as positive edge weights
    #[arg(long)]
    weighted: bool,
    /// Comma-separated mu values (default: powers of two up to 2^18)
    #[arg(long, value_delimiter = ',')]
    mu_list: Option<Vec<usize>>,
    /// Comma-separated epsilon values (default: 0.01..0.99 step 0.01)
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_metric, default_value = "modularity")]
    metric: QualityMetric,
    /// Reference clustering file (required for --metric ari)
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// CSV file to write (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct QualityArgs {
    /// The clustered graph
    #[arg(long)]
    input: PathBuf,
    /// Parse a third column as positive edge weights
    #[arg(long)]
    weighted: bool,
    /// Clustering file produced by query
    #[arg(long)]
    clustering: PathBuf,
    #[arg(long, value_parser = parse_metric, default_value = "modularity")]
    metric: QualityMetric,
    /// Reference clustering file (required for --metric ari)
    #[arg(long)]
    ground_truth: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Edge-list file (small graphs only; the brute-force side is quadratic)
    #[arg(long)]
    input: PathBuf,
    /// Parse a third column as positive edge weights
    #[arg(long)]
    weighted: bool,
    /// Exact similarity measure to cross-check
    #[arg(long, value_parser = parse_exact_measure)]
    similarity: Measure,
    /// Comma-separated mu values (default: 2,3,4,5)
    #[arg(long, value_delimiter = ',')]
    mu_list: Option<Vec<usize>>,
    /// Comma-separated epsilon values (default: 0.1..0.9 step 0.1)
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct LoadReport {
    self_loops_dropped: usize,
    duplicate_edges_dropped: usize,
}

impl From<&LoadStats> for LoadReport {
    fn from(s: &LoadStats) -> Self {
        LoadReport {
            self_loops_dropped: s.self_loops,
            duplicate_edges_dropped: s.duplicate_edges,
        }
    }
}

fn emit<T: Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(report).expect("reports always serialize")
}

#[derive(Serialize)]
struct ApproxReport {
    scheme: &'static str,
    samples: usize,
    seed: u64,
    threshold: usize,
    sketched_vertices: usize,
    approx_edges: usize,
    exact_edges: usize,
}

#[derive(Serialize)]
struct BuildTimings {
    load: f64,
    similarity: f64,
    neighbor_order: f64,
    core_order: f64,
}

#[derive(Serialize)]
struct BuildReport {
    command: &'static str,
    input: String,
    output: String,
    n: usize,
    m: usize,
    weighted: bool,
    measure: &'static str,
    approx: Option<ApproxReport>,
    load: LoadReport,
    timings_ms: BuildTimings,
    index_bytes: usize,
}

fn ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

fn cmd_build_index(args: &BuildArgs) -> Result<()> {
    match (args.approx, args.samples) {
        (ApproxFlag::None, Some(_)) => {
            return Err(ScanError::Config("--samples requires an --approx scheme".into()))
        }
        (ApproxFlag::Scheme(_), None) => {
            return Err(ScanError::Config("--approx requires --samples".into()))
        }
        _ => {}
    }

    let t = Instant::now();
    let (g, stats) = load_edge_list_file(&args.input, args.weighted)?;
    let load_ms = ms(t);

    let t = Instant::now();
    let (table, approx_report, note) = match args.approx {
        ApproxFlag::None => {
            let table = compute_similarities(&g, args.similarity)?;
            (table, None, Vec::new())
        }
        ApproxFlag::Scheme(scheme) => {
            let cfg = ApproxConfig::new(scheme, args.samples.unwrap(), args.seed)?;
            let (table, hybrid) = compute_similarities_hybrid_with_stats(&g, &cfg, args.similarity)?;
            let report = ApproxReport {
                scheme: scheme.as_str(),
                samples: cfg.samples,
                seed: cfg.seed,
                threshold: cfg.threshold,
                sketched_vertices: hybrid.sketched_vertices,
                approx_edges: hybrid.approx_edges,
                exact_edges: hybrid.exact_edges,
            };
            let note = format!(
                "scheme={} samples={} seed={} threshold={}",
                scheme.as_str(),
                cfg.samples,
                cfg.seed,
                cfg.threshold
            )
            .into_bytes();
            (table, Some(report), note)
        }
    };
    let similarity_ms = ms(t);

    let t = Instant::now();
    let no = NeighborOrder::build(&g, &table)?;
    let neighbor_order_ms = ms(t);
    let t = Instant::now();
    let co = CoreOrder::build(&g, &no);
    let core_order_ms = ms(t);

    let measure = table.measure();
    let index = ScanIndex::assemble(&g, table, no, co, &note);
    let bytes = serialize_index(&index);
    fs::write(&args.output, &bytes)?;

    let report = BuildReport {
        command: "build-index",
        input: args.input.display().to_string(),
        output: args.output.display().to_string(),
        n: g.n(),
        m: g.m(),
        weighted: args.weighted,
        measure: measure.as_str(),
        approx: approx_report,
        load: LoadReport::from(&stats),
        timings_ms: BuildTimings {
            load: load_ms,
            similarity: similarity_ms,
            neighbor_order: neighbor_order_ms,
            core_order: core_order_ms,
        },
        index_bytes: bytes.len(),
    };
    println!("{}", emit(&report));
    Ok(())
}

#[derive(Serialize)]
struct QueryTimings {
    load_index: f64,
    query: f64,
    label: f64,
}

#[derive(Serialize)]
struct QueryReport {
    command: &'static str,
    index: String,
    mu: usize,
    epsilon: f64,
    deterministic_borders: bool,
    clusters: u32,
    cores: usize,
    clustered: usize,
    hubs: usize,
    outliers: usize,
    similar_edges: usize,
    visits: usize,
    timings_ms: QueryTimings,
    output: Option<String>,
}

fn read_index(path: &Path) -> Result<ScanIndex> {
    deserialize_index(&fs::read(path)?)
}

fn cmd_query(args: &QueryArgs) -> Result<()> {
    let t = Instant::now();
    let index = read_index(&args.index)?;
    let load_ms = ms(t);

    let params = QueryParams::new(args.mu, args.epsilon)?
        .with_deterministic_borders(args.deterministic_borders);
    let t = Instant::now();
    let (clustering, stats) = cluster_with_stats(&index, &params);
    let query_ms = ms(t);

    let t = Instant::now();
    let topology = index.rebuild_graph_topology();
    let labels = label_hubs_outliers(&topology, &clustering);
    let label_ms = ms(t);

    let text = write_clustering(&clustering, &labels);
    let clustered = clustering.assignment().iter().flatten().count();
    let report = QueryReport {
        command: "query",
        index: args.index.display().to_string(),
        mu: args.mu,
        epsilon: args.epsilon,
        deterministic_borders: args.deterministic_borders,
        clusters: clustering.num_clusters(),
        cores: stats.cores,
        clustered,
        hubs: labels.hubs().len(),
        outliers: labels.outliers().len(),
        similar_edges: stats.similar_edges,
        visits: stats.visits,
        timings_ms: QueryTimings { load_index: load_ms, query: query_ms, label: label_ms },
        output: args.output.as_ref().map(|p| p.display().to_string()),
    };
    match &args.output {
        Some(path) => {
            fs::write(path, text)?;
            println!("{}", emit(&report));
        }
        None => {
            print!("{text}");
            eprintln!("{}", emit(&report));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BestRow {
    mu: usize,
    epsilon: f64,
    score: f64,
}

#[derive(Serialize)]
struct SweepReport {
    command: &'static str,
    metric: &'static str,
    rows: usize,
    best: BestRow,
    total_ms: f64,
    output: Option<String>,
}

fn load_ground_truth(path: &Path) -> Result<Clustering> {
    let file = fs::File::open(path)?;
    let (clustering, _) = parse_clustering(std::io::BufReader::new(file))?;
    Ok(clustering)
}

/// The graph a sweep or quality run scores must structurally match what the
/// index or clustering was computed from.
fn ensure_matching(index: &ScanIndex, g: &Graph) -> Result<()> {
    index.validate_against(g).map_err(|e| {
        ScanError::Config(format!("--input does not match the index: {e}"))
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let t = Instant::now();
    let index = read_index(&args.index)?;
    let (g, _) = load_edge_list_file(&args.input, args.weighted)?;
    ensure_matching(&index, &g)?;

    let mus = args.mu_list.clone().unwrap_or_else(default_mu_grid);
    let epsilons = args.eps_list.clone().unwrap_or_else(default_epsilon_grid);
    let truth = match &args.ground_truth {
        Some(p) => Some(load_ground_truth(p)?),
        None => None,
    };
    let result = sweep(&g, &index, &mus, &epsilons, args.metric, truth.as_ref())?;

    let mut csv = result.to_csv();
    csv.push_str(&format!(
        "# best mu={} epsilon={} score={}\n",
        result.best.mu, result.best.epsilon, result.best.score
    ));
    let report = SweepReport {
        command: "sweep",
        metric: args.metric.as_str(),
        rows: result.rows.len(),
        best: BestRow {
            mu: result.best.mu,
            epsilon: result.best.epsilon,
            score: result.best.score,
        },
        total_ms: ms(t),
        output: args.output.as_ref().map(|p| p.display().to_string()),
    };
    match &args.output {
        Some(path) => {
            fs::write(path, csv)?;
            println!("{}", emit(&report));
        }
        None => {
            print!("{csv}");
            eprintln!("{}", emit(&report));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct QualityReport {
    command: &'static str,
    metric: &'static str,
    score: f64,
    clustering: String,
}

fn cmd_quality(args: &QualityArgs) -> Result<()> {
    let (g, _) = load_edge_list_file(&args.input, args.weighted)?;
    let file = fs::File::open(&args.clustering)?;
    let (clustering, _) = parse_clustering(std::io::BufReader::new(file))?;
    if clustering.n() > g.n() {
        return Err(ScanError::Config(format!(
            "clustering names {} vertices, graph has {}",
            clustering.n(),
            g.n()
        )));
    }
    let clustering = pad_clustering(clustering, g.n());
    let score = match args.metric {
        QualityMetric::Modularity => modularity(&g, &clustering)?,
        QualityMetric::AdjustedRand => {
            let path = args.ground_truth.as_ref().ok_or_else(|| {
                ScanError::Config("--metric ari requires --ground-truth".into())
            })?;
            let truth = pad_clustering(load_ground_truth(path)?, g.n());
            adjusted_rand_index(&clustering, &truth)?
        }
    };
    let report = QualityReport {
        command: "quality",
        metric: args.metric.as_str(),
        score,
        clustering: args.clustering.display().to_string(),
    };
    println!("{}", emit(&report));
    Ok(())
}

/// A clustering file only names vertices up to the largest it mentions;
/// trailing isolated vertices of the graph are unclustered.
fn pad_clustering(c: Clustering, n: usize) -> Clustering {
    c.padded_to(n)
}

#[derive(Serialize)]
struct OracleReport {
    command: &'static str,
    points: usize,
    result: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<OracleMismatch>,
}

#[derive(Serialize)]
struct OracleMismatch {
    mu: usize,
    epsilon: f64,
    detail: String,
}

fn cmd_oracle_check(args: &OracleArgs) -> Result<()> {
    let (g, _) = load_edge_list_file(&args.input, args.weighted)?;
    let table = compute_similarities(&g, args.similarity)?;
    let index = parscan::build_index(&g, table)?;
    index
        .validate_against(&g)
        .map_err(|e| ScanError::Config(format!("index invariant violated: {e}")))?;

    let mus = args.mu_list.clone().unwrap_or_else(|| vec![2, 3, 4, 5]);
    let epsilons = args
        .eps_list
        .clone()
        .unwrap_or_else(|| (1..=9).map(|i| i as f64 / 10.0).collect());

    let mut points = 0;
    for &mu in &mus {
        for &eps in &epsilons {
            let params = QueryParams::new(mu, eps)?;
            let (fast, fast_stats) = cluster_with_stats(&index, &params);
            let fast_labels = label_hubs_outliers(&g, &fast);
            let (slow, slow_labels) = naive_scan(&g, args.similarity, &params)?;
            points += 1;
            let detail = if fast != slow {
                Some("clusterings differ".to_string())
            } else if fast_labels != slow_labels {
                Some("hub/outlier labels differ".to_string())
            } else if fast_stats.visits > 32 * (fast_stats.cores + fast_stats.similar_edges + 1) {
                Some(format!(
                    "visit count {} exceeds the output-sensitive budget",
                    fast_stats.visits
                ))
            } else {
                None
            };
            if let Some(detail) = detail {
                let report = OracleReport {
                    command: "oracle-check",
                    points,
                    result: "mismatch",
                    mismatch: Some(OracleMismatch { mu, epsilon: eps, detail }),
                };
                println!("{}", emit(&report));
                std::process::exit(1);
            }
        }
    }
    let report =
        OracleReport { command: "oracle-check", points, result: "pass", mismatch: None };
    println!("{}", emit(&report));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::BuildIndex(a) => par::with_thread_count(a.threads, || cmd_build_index(a)),
        Command::Query(a) => par::with_thread_count(a.threads, || cmd_query(a)),
        Command::Sweep(a) => par::with_thread_count(a.threads, || cmd_sweep(a)),
        Command::Quality(a) => cmd_quality(a),
        Command::OracleCheck(a) => par::with_thread_count(a.threads, || cmd_oracle_check(a)),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        let payload = serde_json::json!({
            "error": e.to_string(),
            "category": e.category(),
        });
        let _ = writeln!(std::io::stderr(), "{payload}");
        std::process::exit(1);
    }
}
