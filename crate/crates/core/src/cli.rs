//! Command-line front end: `cluster`, `gen` and `bench`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench_sweep, effective_threads, BenchSpec, RunReport, Sweep};
use crate::datagen::{generate, GenKind, GenSpec, DEFAULT_CLUSTERS, DEFAULT_EXTENT};
use crate::error::{DpcError, Result};
use crate::geometry::DpcParams;
use crate::io::{dedup, read_points, write_decision_graph, write_labels, write_points, write_points_binary};
use crate::pipeline::{run_dpc_timed, with_threads, Strategy};

#[derive(Debug, Parser)]
#[command(name = "dpc", version, about = "Parallel exact density peaks clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a point file.
    Cluster(ClusterArgs),
    /// Generate a synthetic point set.
    Gen(GenArgs),
    /// Run a scaling sweep on generated data.
    Bench(BenchArgs),
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: DpcError| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<GenKind, String> {
    s.parse().map_err(|e: DpcError| e.to_string())
}

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    s.parse().map_err(|e: DpcError| e.to_string())
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// CSV (or binary cache) point file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "dcut", allow_negative_numbers = true)]
    d_cut: f64,
    #[arg(long = "rho-min", allow_negative_numbers = true)]
    rho_min: f64,
    #[arg(long = "delta-min", allow_negative_numbers = true)]
    delta_min: f64,
    #[arg(long, value_parser = parse_strategy, default_value = "priority")]
    algo: Strategy,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long = "labels-out")]
    labels_out: PathBuf,
    #[arg(long = "decision-graph")]
    decision_graph: Option<PathBuf>,
    #[arg(long = "report-json")]
    report_json: Option<PathBuf>,
    /// Drop exact duplicate points before clustering.
    #[arg(long)]
    dedup: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GenKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CLUSTERS)]
    clusters: usize,
    #[arg(long, default_value_t = DEFAULT_EXTENT, allow_negative_numbers = true)]
    extent: f64,
    #[arg(long)]
    out: PathBuf,
    /// Write the packed binary format instead of CSV.
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_sweep)]
    sweep: Sweep,
    #[arg(long, value_parser = parse_kind, default_value = "simden")]
    kind: GenKind,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Strategies to run (comma separated).
    #[arg(long, value_parser = parse_strategy, value_delimiter = ',', default_value = "priority")]
    algo: Vec<Strategy>,
    /// Dataset sizes; thread and dcut sweeps use the first one.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Worker counts for the thread sweep (default 1, 2, 4, ... up to all cores).
    #[arg(long = "thread-grid", value_delimiter = ',')]
    thread_grid: Option<Vec<usize>>,
    /// Radii for the dcut sweep.
    #[arg(long, value_delimiter = ',')]
    dcuts: Vec<f64>,
    #[arg(long = "dcut", allow_negative_numbers = true)]
    d_cut: Option<f64>,
    #[arg(long = "rho-min", allow_negative_numbers = true)]
    rho_min: Option<f64>,
    #[arg(long = "delta-min", allow_negative_numbers = true)]
    delta_min: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
}

/// Runs the CLI and returns the process exit code: 0 on success, 2 on
/// usage errors, 1 on any other failure.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Gen(args) => gen(args),
        Command::Bench(args) => bench(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e @ (DpcError::InvalidParams(_) | DpcError::UnknownStrategy(_))) => {
            eprintln!("dpc: {e}");
            2
        }
        Err(e) => {
            eprintln!("dpc: {e}");
            1
        }
    }
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let params = DpcParams::new(args.d_cut, args.rho_min, args.delta_min)?;
    let mut points = read_points(&args.input)?;
    if args.dedup {
        points = dedup(&points);
    }
    let threads = effective_threads(args.threads);
    let (result, times) = with_threads(threads, || run_dpc_timed(&points, &params, args.algo))??;
    write_labels(&args.labels_out, &result)?;
    if let Some(path) = &args.decision_graph {
        write_decision_graph(path, &result)?;
    }
    if let Some(path) = &args.report_json {
        let report = RunReport::new(&result, &points, times, threads);
        write_json(path, &report)?;
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = GenSpec {
        kind: args.kind,
        n: args.n,
        d: args.d,
        seed: args.seed,
        clusters: args.clusters,
        extent: args.extent,
    };
    let points = generate(&spec)?;
    if args.binary {
        write_points_binary(&args.out, &points)
    } else {
        write_points(&args.out, &points)
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut spec = BenchSpec::new(args.sweep, args.kind, args.d);
    spec.seed = args.seed;
    spec.algos = args.algo;
    if let Some(sizes) = args.sizes {
        spec.sizes = sizes;
    }
    if let Some(grid) = args.thread_grid {
        spec.threads = grid;
    }
    spec.d_cuts = args.dcuts;
    if let Some(v) = args.d_cut {
        spec.params.d_cut = v;
    }
    if let Some(v) = args.rho_min {
        spec.params.rho_min = v;
    }
    if let Some(v) = args.delta_min {
        spec.params.delta_min = v;
    }
    spec.params.validate()?;

    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| DpcError::io(path, e))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let out_name = args.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let io = |e| DpcError::io(&out_name, e);
    match args.format {
        ReportFormat::Csv => {
            writeln!(sink, "{}", RunReport::CSV_HEADER).map_err(io)?;
            bench_sweep(&spec, |rec| {
                let _ = writeln!(sink, "{}", rec.report.csv_row());
                let _ = sink.flush();
            })?;
        }
        ReportFormat::Json => {
            let rows = bench_sweep(&spec, |_| {})?;
            let reports: Vec<&RunReport> = rows.iter().map(|r| &r.report).collect();
            serde_json::to_writer_pretty(&mut sink, &reports).map_err(|e| io(e.into()))?;
            writeln!(sink).map_err(io)?;
        }
    }
    sink.flush().map_err(io)
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let io = |e| DpcError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io(e.into()))?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}
