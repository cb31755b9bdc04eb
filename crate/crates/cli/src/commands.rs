use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use hyperbayes::channel::{run_channel, ChannelConfig, ChannelStats, Snr};
use hyperbayes::experiments::{self, BenchPoint, OracleCheckConfig};
use hyperbayes::format::{parse_hypergraph, parse_pairwise};
use hyperbayes::ingest::{ingest_texts, subsample, DatasetFormat, IngestReport};
use hyperbayes::metrics::{
    convergence_curve, entropy_distribution, linear_fit, recovery_score, size_histogram, spearman, EntropyHistogram,
    RecoveryScore, SizeHistogram,
};
use hyperbayes::oracle::EnumerationBounds;
use hyperbayes::sampler::{run, run_timed, SamplerConfig};
use hyperbayes::{Hypergraph, PairwiseGraph};
use serde::Serialize;

use crate::output::{InputDigest, Run};
use crate::{
    threads, BenchArgs, CliError, GraphFormat, IngestArgs, OracleCheckArgs, PlantArgs, ReconstructArgs,
    SweepLengthArgs, SweepSnrArgs,
};

const SNR_REFERENCE: &str = "per symbol, unit-energy BPSK, snr_db = 10 log10(1 / sigma^2)";

fn read_input(path: &Path) -> Result<(String, InputDigest), CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("input file not found: {}", path.display())));
    }
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let digest = InputDigest::of(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{} is not UTF-8", path.display())))?;
    Ok((text, digest))
}

fn graph_format(path: &Path, explicit: Option<GraphFormat>) -> Result<GraphFormat, CliError> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("hg") => Ok(GraphFormat::Hg),
        Some("pg") => Ok(GraphFormat::Pg),
        _ => Err(CliError::Usage(format!(
            "cannot infer the format of {}; pass --format hg or --format pg",
            path.display()
        ))),
    }
}

/// Reads a ground-truth hypergraph, optionally subsampled.
fn load_truth(path: &Path, subsample_edges: Option<usize>, seed: u64) -> Result<(Hypergraph, InputDigest), CliError> {
    let (text, digest) = read_input(path)?;
    let mut h = parse_hypergraph(&text)?;
    if h.is_empty() {
        return Err(CliError::Data(format!("{} contains no hyperedges", path.display())));
    }
    if let Some(k) = subsample_edges {
        h = subsample(&h, k, seed)?.0;
    }
    Ok((h, digest))
}

fn histogram_csv(prefix: &str, hist: &EntropyHistogram, out: &mut String) {
    let width = 1.0 / hist.counts.len() as f64;
    for (lo, count) in hist.bin_edges.iter().zip(&hist.counts) {
        let _ = writeln!(out, "{prefix}{lo},{},{count}", lo + width);
    }
}

#[derive(Serialize)]
struct IngestParams {
    format: String,
    subsample_edges: Option<usize>,
    subsample_seed: u64,
}

pub fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    let mut texts = Vec::new();
    let mut digests = Vec::new();
    for p in &args.inputs {
        let (text, digest) = read_input(p)?;
        texts.push(text);
        digests.push(digest);
    }
    let format = DatasetFormat::from(args.format);
    let files = args.inputs.iter().map(|p| p.display().to_string()).collect();
    let (mut h, dict, report) = ingest_texts(&texts, format, files)?;
    let mut names: Vec<&str> = dict.names().iter().map(String::as_str).collect();
    if let Some(k) = args.subsample_edges {
        let (sample, old_ids) = subsample(&h, k, args.seed)?;
        names = old_ids.iter().map(|&v| names[v as usize]).collect();
        h = sample;
    }

    let params = IngestParams {
        format: format.to_string(),
        subsample_edges: args.subsample_edges,
        subsample_seed: args.seed,
    };
    let threads = threads()?;
    let mut run = Run::new(&args.out, "ingest", &params, digests, threads)?;
    run.hypergraph("hypergraph.hg", &h)?;
    let mut entities = String::from("id\tentity\n");
    for (id, name) in names.iter().enumerate() {
        let _ = writeln!(entities, "{id}\t{name}");
    }
    run.csv("entities.tsv", &entities)?;

    #[derive(Serialize)]
    struct Body<'a> {
        report: &'a IngestReport,
        output_vertices: usize,
        output_hyperedges: u64,
        output_sizes: SizeHistogram,
    }
    run.json(
        "ingest_report.json",
        &Body {
            report: &report,
            output_vertices: h.num_vertices(),
            output_hyperedges: h.total_edges(),
            output_sizes: size_histogram(&h),
        },
    )?;
    println!(
        "ingested {} facts ({} skipped) into {} hyperedges over {} vertices -> {}",
        report.facts_read,
        report.facts_skipped,
        h.total_edges(),
        h.num_vertices(),
        args.out.display()
    );
    run.finish()
}

#[derive(Serialize)]
struct PlantParams {
    vertices: usize,
    edges: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
}

pub fn plant(args: &PlantArgs) -> Result<(), CliError> {
    let params = PlantParams {
        vertices: args.vertices,
        edges: args.edges,
        min_size: args.min_size,
        max_size: args.max_size,
        seed: args.seed,
    };
    let h = experiments::planted_hypergraph(args.vertices, args.edges, args.min_size, args.max_size, args.seed)?;
    let mut run = Run::new(&args.out, "plant", &params, Vec::new(), threads()?)?;
    run.hypergraph("planted.hg", &h)?;
    println!(
        "planted {} hyperedges over {} vertices -> {}",
        h.total_edges(),
        h.num_vertices(),
        args.out.join("planted.hg").display()
    );
    run.finish()
}

#[derive(Serialize)]
struct ReconstructParams<'a> {
    input_format: &'static str,
    sampler: &'a SamplerConfig,
    channel: Option<ChannelConfig>,
    snr_reference: &'static str,
    subsample_edges: Option<usize>,
    trace_stride: u64,
}

#[derive(Serialize)]
struct SamplerSummary {
    iterations: u64,
    burn_in: u64,
    accepted_moves: u64,
    null_moves: u64,
    projection_rejections: u64,
    projection_violations: u64,
    initial_log_posterior: f64,
    map_log_posterior: f64,
    map_iteration: u64,
    map_distinct_hyperedges: usize,
    map_total_hyperedges: u64,
}

#[derive(Serialize)]
struct ReconstructMetrics {
    observed_vertices: usize,
    observed_edges: usize,
    channel: Option<ChannelStats>,
    sampler: SamplerSummary,
    recovery: Option<RecoveryScore>,
    truth_sizes: Option<SizeHistogram>,
    recovered_sizes: SizeHistogram,
    /// Binary entropy of the acceptance probability over all iterations.
    entropy: EntropyHistogram,
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<(), CliError> {
    let format = graph_format(&args.input, args.format)?;
    let params = args.model.params()?;
    let mut cfg = args.sampler.config(params)?;
    cfg.verify_projection = args.verify_projection;
    if args.trace_stride == 0 {
        return Err(CliError::Usage("--trace-stride must be positive".into()));
    }
    let (truth, clean, digest): (Option<Hypergraph>, PairwiseGraph, InputDigest) = match format {
        GraphFormat::Hg => {
            let (h, digest) = load_truth(&args.input, args.subsample_edges, cfg.seed)?;
            let g = h.project();
            (Some(h), g, digest)
        }
        GraphFormat::Pg => {
            if args.subsample_edges.is_some() {
                return Err(CliError::Usage("--subsample-edges needs a .hg input".into()));
            }
            let (text, digest) = read_input(&args.input)?;
            (None, parse_pairwise(&text)?, digest)
        }
    };
    let channel = args.snr_db.map(|snr| ChannelConfig {
        snr,
        seed: args.channel_seed,
    });
    let (observed, channel_stats) = match &channel {
        Some(c) => {
            let (g, stats) = run_channel(&clean, c)?;
            (g, Some(stats))
        }
        None => (clean, None),
    };

    let (trace, times) = if args.timing {
        run_timed(&observed, &cfg)?
    } else {
        (run(&observed, &cfg)?, Vec::new())
    };

    let manifest_params = ReconstructParams {
        input_format: match format {
            GraphFormat::Hg => "hg",
            GraphFormat::Pg => "pg",
        },
        sampler: &cfg,
        channel,
        snr_reference: SNR_REFERENCE,
        subsample_edges: args.subsample_edges,
        trace_stride: args.trace_stride,
    };
    let mut out = Run::new(&args.out, "reconstruct", &manifest_params, vec![digest], threads()?)?;
    out.hypergraph("map.hg", &trace.map)?;
    out.csv("trace.csv", &trace.to_csv(args.trace_stride))?;

    let entropy = entropy_distribution(&trace);
    let mut entropy_csv = String::from("bin_lo,bin_hi,count\n");
    histogram_csv("", &entropy, &mut entropy_csv);
    out.csv("entropy.csv", &entropy_csv)?;

    let recovered_sizes = size_histogram(&trace.map);
    let truth_sizes = truth.as_ref().map(size_histogram);
    if let Some(ts) = &truth_sizes {
        let mut sizes = String::from("size,truth,recovered\n");
        let keys: std::collections::BTreeSet<usize> = ts
            .distinct
            .keys()
            .chain(recovered_sizes.distinct.keys())
            .copied()
            .collect();
        for k in keys {
            let _ = writeln!(
                sizes,
                "{k},{},{}",
                ts.distinct.get(&k).unwrap_or(&0),
                recovered_sizes.distinct.get(&k).unwrap_or(&0)
            );
        }
        out.csv("sizes.csv", &sizes)?;
    }

    let metrics = ReconstructMetrics {
        observed_vertices: observed.num_vertices(),
        observed_edges: observed.num_edges(),
        channel: channel_stats,
        sampler: SamplerSummary {
            iterations: trace.iterations,
            burn_in: trace.burn_in,
            accepted_moves: trace.accepted_moves,
            null_moves: trace.null_moves,
            projection_rejections: trace.projection_rejections,
            projection_violations: trace.projection_violations,
            initial_log_posterior: trace.initial_log_posterior,
            map_log_posterior: trace.map_log_posterior,
            map_iteration: trace.map_iteration,
            map_distinct_hyperedges: trace.map.num_distinct(),
            map_total_hyperedges: trace.map.total_edges(),
        },
        recovery: truth.as_ref().map(|t| recovery_score(t, &trace.map)),
        truth_sizes,
        recovered_sizes,
        entropy,
    };
    out.json("metrics.json", &metrics)?;

    if args.timing {
        let mut curve = String::from("t,time_ms,num_hyperedges\n");
        for p in convergence_curve(&times, 1000) {
            let _ = writeln!(curve, "{},{},{}", p.t, p.time_ms, p.num_hyperedges);
        }
        out.timing_csv("convergence.csv", &curve)?;
    }
    let violations = trace.projection_violations;
    let feasible = trace.map_log_posterior.is_finite();
    println!(
        "MAP: {} hyperedges, log-posterior {} -> {}",
        trace.map.total_edges(),
        trace.map_log_posterior,
        args.out.display()
    );
    if let Some(r) = &metrics.recovery {
        println!("recovery: f1 {:.4}, jaccard {:.4}", r.f1, r.jaccard_mean);
    }
    out.finish()?;
    if violations > 0 {
        return Err(CliError::Invariant(format!(
            "{violations} accepted states broke the projection constraint"
        )));
    }
    if !feasible {
        return Err(CliError::Invariant("MAP state has zero posterior probability".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSnrParams<'a> {
    sampler: &'a SamplerConfig,
    snr_db: Vec<String>,
    seeds: u64,
    channel_seed: u64,
    snr_reference: &'static str,
    subsample_edges: Option<usize>,
}

#[derive(Serialize)]
struct SnrPoint {
    snr_db: String,
    mean_f1: f64,
    mean_jaccard: f64,
    mean_edge_flip_rate: f64,
}

fn snr_value(s: Snr) -> f64 {
    match s {
        Snr::Noiseless => f64::INFINITY,
        Snr::Db(db) => db,
    }
}

pub fn sweep_snr(args: &SweepSnrArgs) -> Result<(), CliError> {
    if args.snr_db.is_empty() || args.seeds == 0 {
        return Err(CliError::Usage("need at least one SNR point and one seed".into()));
    }
    let cfg = args.sampler.config(args.model.params()?)?;
    let (truth, digest) = load_truth(&args.input, args.subsample_edges, cfg.seed)?;
    let threads = threads()?;
    let sweep = experiments::sweep_snr(&truth, &args.snr_db, args.seeds, args.channel_seed, &cfg, threads)?;

    let params = SweepSnrParams {
        sampler: &cfg,
        snr_db: args.snr_db.iter().map(Snr::to_string).collect(),
        seeds: args.seeds,
        channel_seed: args.channel_seed,
        snr_reference: SNR_REFERENCE,
        subsample_edges: args.subsample_edges,
    };
    let mut out = Run::new(&args.out, "sweep-snr", &params, vec![digest], threads)?;

    let mut rows = String::from("snr_db,seed,f1,jaccard,edge_flip_rate\n");
    for r in &sweep.rows {
        let _ = writeln!(rows, "{},{},{},{},{}", r.snr, r.seed, r.f1, r.jaccard, r.edge_flip_rate);
    }
    out.csv("snr_sweep.csv", &rows)?;

    let mut entropy = String::from("snr_db,bin_lo,bin_hi,count\n");
    for (snr, hist) in &sweep.entropy {
        histogram_csv(&format!("{snr},"), hist, &mut entropy);
    }
    out.csv("entropy.csv", &entropy)?;

    let truth_sizes = size_histogram(&truth).distinct;
    let mut sizes = String::from("snr_db,size,truth,recovered_mean\n");
    for (snr, hist) in &sweep.recovered_sizes {
        let keys: std::collections::BTreeSet<usize> = truth_sizes.keys().chain(hist.keys()).copied().collect();
        for k in keys {
            let _ = writeln!(
                sizes,
                "{snr},{k},{},{}",
                truth_sizes.get(&k).unwrap_or(&0),
                *hist.get(&k).unwrap_or(&0) as f64 / args.seeds as f64
            );
        }
    }
    out.csv("sizes.csv", &sizes)?;

    let mut sums: BTreeMap<usize, (f64, f64, f64)> = BTreeMap::new();
    for r in &sweep.rows {
        let idx = args
            .snr_db
            .iter()
            .position(|s| *s == r.snr)
            .expect("row snr comes from the list");
        let e = sums.entry(idx).or_default();
        e.0 += r.f1;
        e.1 += r.jaccard;
        e.2 += r.edge_flip_rate;
    }
    let n = args.seeds as f64;
    let points: Vec<SnrPoint> = sums
        .iter()
        .map(|(&i, &(f, j, r))| SnrPoint {
            snr_db: args.snr_db[i].to_string(),
            mean_f1: f / n,
            mean_jaccard: j / n,
            mean_edge_flip_rate: r / n,
        })
        .collect();
    let xs: Vec<f64> = args.snr_db.iter().map(|&s| snr_value(s)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_f1).collect();

    #[derive(Serialize)]
    struct Summary {
        points: Vec<SnrPoint>,
        spearman_snr_vs_mean_f1: f64,
    }
    let summary = Summary {
        spearman_snr_vs_mean_f1: spearman(&xs, &ys),
        points,
    };
    out.json("summary.json", &summary)?;
    for p in &summary.points {
        println!(
            "snr {:>5}: mean f1 {:.4}, mean jaccard {:.4}",
            p.snr_db, p.mean_f1, p.mean_jaccard
        );
    }
    println!("spearman(snr, mean f1) = {:.4}", summary.spearman_snr_vs_mean_f1);
    out.finish()
}

#[derive(Serialize)]
struct SweepLengthParams<'a> {
    sampler: &'a SamplerConfig,
    lengths: &'a [usize],
    subsample_edges: Option<usize>,
}

pub fn sweep_length(args: &SweepLengthArgs) -> Result<(), CliError> {
    if args.lengths.is_empty() {
        return Err(CliError::Usage("--lengths must not be empty".into()));
    }
    let mut cfg = args.sampler.config(args.model.params()?)?;
    for &l in &args.lengths {
        cfg.params.max_edge_size = l;
        cfg.validate()?;
    }
    let (truth, digest) = load_truth(&args.input, args.subsample_edges, cfg.seed)?;
    let threads = threads()?;
    let rows = experiments::sweep_length(&truth, &args.lengths, &cfg, threads)?;
    let params = SweepLengthParams {
        sampler: &cfg,
        lengths: &args.lengths,
        subsample_edges: args.subsample_edges,
    };
    let mut out = Run::new(&args.out, "sweep-length", &params, vec![digest], threads)?;
    let mut csv = String::from("L,compression_rate,f1\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r.max_edge_size, r.compression_rate, r.f1);
        println!(
            "L={:<3} compression rate {:.4}, f1 {:.4}",
            r.max_edge_size, r.compression_rate, r.f1
        );
    }
    out.csv("length_sweep.csv", &csv)?;
    out.finish()
}

pub fn oracle_check(args: &OracleCheckArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    if args.min_vertices < 1 || args.min_vertices > args.max_vertices {
        return Err(CliError::Usage("need 1 <= --min-vertices <= --max-vertices".into()));
    }
    if !(0.0..=1.0).contains(&args.edge_prob) {
        return Err(CliError::Usage("--edge-prob must lie in [0, 1]".into()));
    }
    if args.iterations == 0 {
        return Err(CliError::Usage("--iterations must be positive".into()));
    }
    let mut cfg = OracleCheckConfig::new(args.instances, args.seed, params);
    cfg.iterations = args.iterations;
    cfg.min_vertices = args.min_vertices;
    cfg.max_vertices = args.max_vertices;
    cfg.edge_prob = args.edge_prob;
    cfg.bounds = EnumerationBounds {
        max_vertices: args.max_vertices,
        max_multiplicity: args.max_multiplicity,
        ..EnumerationBounds::new(args.model.max_edge_size)
    };
    let threads = threads()?;
    let (report, cases) = experiments::oracle_check(&cfg, threads)?;
    let mut out = Run::new(&args.out, "oracle-check", &cfg, Vec::new(), threads)?;
    out.json("oracle_report.json", &report)?;
    let mut csv = String::from("index,vertices,edges,sampler_log_posterior,oracle_log_posterior,matched\n");
    for c in &cases {
        let g = parse_pairwise(&c.graph)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            c.index,
            g.num_vertices(),
            g.num_edges(),
            c.sampler_log_posterior,
            c.oracle_log_posterior,
            c.matched
        );
    }
    out.csv("oracle_cases.csv", &csv)?;
    println!(
        "oracle check: {}/{} instances matched (rate {:.3})",
        report.matches, report.instances, report.match_rate
    );
    out.finish()
}

fn parse_size(s: &str) -> Result<BenchPoint, CliError> {
    let bad = || CliError::Usage(format!("bench size '{s}' is not of the form VxE"));
    let (v, e) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    Ok(BenchPoint {
        num_vertices: v.parse().map_err(|_| bad())?,
        num_edges: e.parse().map_err(|_| bad())?,
    })
}

#[derive(Serialize)]
struct BenchParams<'a> {
    sizes: &'a [BenchPoint],
    params: hyperbayes::ModelParams,
    iterations: Option<u64>,
    iterations_per_edge: u64,
    repeats: usize,
    seed: u64,
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    let sizes = args
        .sizes
        .iter()
        .map(|s| parse_size(s))
        .collect::<Result<Vec<_>, _>>()?;
    let iterations: Vec<u64> = sizes
        .iter()
        .map(|p| args.iterations.unwrap_or(args.iterations_per_edge * p.num_edges as u64))
        .collect();
    if iterations.contains(&0) {
        return Err(CliError::Usage("iteration count must be positive".into()));
    }
    // timings run one at a time so instances do not compete for cores
    let rows = experiments::bench(&sizes, &iterations, &params, args.seed, args.repeats)?;
    for row in &rows {
        println!(
            "|V|={:<6} |E|={:<6} L={} {:>8.1} ns/iteration, {:.2} ms total",
            row.num_vertices, row.num_edges, row.max_edge_size, row.ns_per_iteration, row.total_ms
        );
    }
    let manifest_params = BenchParams {
        sizes: &sizes,
        params: params.clone(),
        iterations: args.iterations,
        iterations_per_edge: args.iterations_per_edge,
        repeats: args.repeats,
        seed: args.seed,
    };
    let mut out = Run::new(&args.out, "bench", &manifest_params, Vec::new(), threads()?)?;
    let mut csv = String::from("num_vertices,num_edges,L,ns_per_iteration,total_ms\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.num_vertices, r.num_edges, r.max_edge_size, r.ns_per_iteration, r.total_ms
        );
    }
    out.timing_csv("bench.csv", &csv)?;
    // The fit is undefined unless |E| varies.
    if rows.iter().any(|r| r.num_edges != rows[0].num_edges) {
        let xs: Vec<f64> = rows.iter().map(|r| r.num_edges as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.total_ms).collect();
        println!(
            "linear fit of total time on |E|: R^2 = {:.4}",
            linear_fit(&xs, &ys).r_squared
        );
    }
    out.finish()
}
