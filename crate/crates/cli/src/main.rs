mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use hybrid_bc::engine::select_sources;
use hybrid_bc::oracle::brandes_bc;
use hybrid_bc::{
    estimate_memory, import_partition, run_bc, Error, Graph, Mode, RatioChoice, RunConfig,
    RunResult, SourceSelection,
};

use report::{top_k_of, write_csv, ReportFile};

/// Relative tolerance used by `compare` against the sequential oracle.
const COMPARE_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "hybrid-bc", version, about = "Two-worker hybrid betweenness centrality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute BC from sampled sources and write a JSON report.
    Compute(ComputeArgs),
    /// Run both modes and the sequential oracle on the same sources.
    Compare(CompareArgs),
    /// Print memory estimates for the unpartitioned and hybrid layouts.
    EstimateMem(EstimateArgs),
    /// Print graph statistics as JSON.
    Stats(GraphArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edgelist,
    Dimacs,
}

#[derive(clap::Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: Format,
    /// Read a third weight column from edge lists.
    #[arg(long)]
    weighted: bool,
}

#[derive(clap::Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[arg(long, default_value = "hybir", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 10)]
    sources: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fraction of vertices on worker 0, or `auto` to calibrate.
    #[arg(long, default_value = "0.5", value_parser = parse_ratio)]
    ratio: RatioChoice,
    #[arg(long)]
    partition_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-source communication table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long)]
    bm_cache: Option<PathBuf>,
    /// Overlap the next source's first step with the current source.
    #[arg(long)]
    pipeline: bool,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[arg(long, default_value_t = 10)]
    sources: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "0.5", value_parser = parse_ratio)]
    ratio: RatioChoice,
    #[arg(long)]
    partition_file: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EstimateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    b: u64,
    #[arg(long, default_value_t = 4)]
    elem_bytes: u64,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ratio(s: &str) -> Result<RatioChoice, String> {
    if s == "auto" {
        return Ok(RatioChoice::Auto);
    }
    match s.parse::<f64>() {
        Ok(r) if r > 0.0 && r < 1.0 => Ok(RatioChoice::Fixed(r)),
        _ => Err(format!("expected a ratio in (0, 1) or `auto`, got {s:?}")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Compare(a) => compare(a),
        Command::EstimateMem(a) => estimate_mem(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => match e.downcast_ref::<Error>() {
            Some(err) => {
                eprintln!("error: {err}");
                ExitCode::from(if err.is_input_error() { 2 } else { 1 })
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}

fn load_graph(a: &GraphArgs) -> Result<Graph, Error> {
    info!("loading {}", a.graph.display());
    match a.format {
        Format::Edgelist => Graph::load_edge_list(&a.graph, a.weighted),
        Format::Dimacs => Graph::load_dimacs_gr(&a.graph),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_out<F>(path: &Path, body: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(())
}

fn config(
    g: &Graph,
    mode: Mode,
    sources: usize,
    seed: u64,
    ratio: RatioChoice,
    partition_file: Option<&Path>,
) -> Result<RunConfig, Error> {
    let partition = partition_file.map(|p| import_partition(p, g)).transpose()?;
    Ok(RunConfig {
        sources: SourceSelection::Random {
            count: sources,
            seed,
        },
        ratio,
        mode,
        partition,
        ..Default::default()
    })
}

fn compute(a: ComputeArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&a.input)?;
    let mut cfg = config(
        &g,
        a.mode,
        a.sources,
        a.seed,
        a.ratio,
        a.partition_file.as_deref(),
    )?;
    cfg.bm_cache = a.bm_cache.clone();
    cfg.pipeline = a.pipeline;
    let r = run_bc(&g, &cfg)?;

    let name = a.input.graph.display().to_string();
    if let Some(path) = &a.out {
        let report = ReportFile::new(&name, &r, a.top_k);
        write_out(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)
        })?;
    }
    if let Some(path) = &a.csv {
        write_out(path, |w| write_csv(&r, w))?;
    }

    print_summary(&r);
    for t in top_k_of(&r.bc, a.top_k) {
        println!("{:>10} {:.6}", t.vertex, t.bc);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(r: &RunResult) {
    let t = r.comm_totals();
    println!(
        "mode={} n={} m={} sources={} mteps={:.3} comm_events={} (forward {}, backward {}) comm_elems={} time={:.3}s",
        r.mode,
        r.graph_stats.n,
        r.graph_stats.m,
        r.sources.len(),
        r.timing.mteps,
        t.events(),
        t.forward_events,
        t.backward_events,
        t.elems(),
        r.timing.total_seconds
    );
    if r.sigma_overflow {
        println!("warning: path counts saturated; BC values are approximate");
    }
}

fn compare(a: CompareArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&a.input)?;
    if g.num_vertices() == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()).into());
    }
    let sources = select_sources(
        g.num_vertices(),
        &SourceSelection::Random {
            count: a.sources,
            seed: a.seed,
        },
    )?;
    let oracle = brandes_bc(&g, &sources);

    let mut ok = true;
    for mode in [Mode::Hybir, Mode::Bsp] {
        let mut cfg = config(&g, mode, a.sources, a.seed, a.ratio, a.partition_file.as_deref())?;
        cfg.sources = SourceSelection::Listed(sources.clone());
        let r = run_bc(&g, &cfg)?;
        let t = r.comm_totals();
        let k = r.per_source.len().max(1) as f64;
        let iterations: usize = r.per_source.iter().map(|s| s.forward.iterations).sum();
        let supersteps: usize = r.per_source.iter().filter_map(|s| s.forward.supersteps).sum();
        let err = r
            .bc
            .iter()
            .zip(&oracle.bc)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let scale = oracle.bc.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let pass = err <= COMPARE_TOL * scale;
        ok &= pass;
        println!(
            "{mode:<5} forward_events={} ({:.1}/source) backward_events={} ({:.1}/source) iterations={} supersteps={} max_bc_error={:e} {}",
            t.forward_events,
            t.forward_events as f64 / k,
            t.backward_events,
            t.backward_events as f64 / k,
            iterations,
            supersteps,
            err,
            if pass { "ok" } else { "MISMATCH" }
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn estimate_mem(a: EstimateArgs) -> anyhow::Result<ExitCode> {
    let e = estimate_memory(a.n, a.m, a.b);
    let un = e.unpartitioned_bytes(a.elem_bytes);
    let hy = e.hybrid_bytes(a.elem_bytes);
    println!(
        "unpartitioned: {} elems, {} bytes ({:.2} GB)",
        e.unpartitioned_elems,
        un,
        un as f64 / 1e9
    );
    println!(
        "hybrid: {} elems, {} bytes ({:.2} GB) per device",
        e.hybrid_elems_per_device,
        hy,
        hy as f64 / 1e9
    );
    Ok(ExitCode::SUCCESS)
}

fn stats(a: GraphArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&a)?;
    println!("{}", serde_json::to_string_pretty(&g.stats())?);
    Ok(ExitCode::SUCCESS)
}
