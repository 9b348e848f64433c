//! Multi-source orchestration of the two workers.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backward::{
    accumulate_bc, backward_phase, dag_cut_arcs, BackwardOptions, BackwardReport, Strategy,
    WorkerPools, DEFAULT_PARALLEL_THRESHOLD, DEFAULT_STRATEGIES,
};
use crate::border_matrix::{self, BorderMatrices, CacheKey};
use crate::bsp::run_bsp_baseline_source;
use crate::error::{Error, Result};
use crate::forward::{finish_forward, gather, source_side, step1, ForwardReport, SourceState};
use crate::graph::{Dist, Graph, GraphStats, PathCount, VertexId, INF};
use crate::ledger::{CommEvent, CommLedger, CommTotals};
use crate::partition::{
    calibrate_ratio, greedy_bipartition, identify_borders, BorderSet, Calibration, Partition,
    PartitionStats, SIDES,
};
use crate::worker::WorkerGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hybir,
    Bsp,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hybir" | "hybrid" => Ok(Mode::Hybir),
            "bsp" | "bsp-baseline" => Ok(Mode::Bsp),
            _ => Err(Error::InvalidArgument(format!("unknown mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Hybir => "hybir",
            Mode::Bsp => "bsp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSelection {
    /// `count` distinct vertices drawn with a seeded generator; every vertex
    /// when `count >= n`.
    Random { count: usize, seed: u64 },
    Listed(Vec<VertexId>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioChoice {
    Fixed(f64),
    Auto,
}

pub const DEFAULT_CALIBRATION_SOURCES: usize = 10;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sources: SourceSelection,
    pub ratio: RatioChoice,
    pub mode: Mode,
    pub strategies: [Strategy; SIDES],
    /// Overlap Step 1 of consecutive sources on different workers.
    pub pipeline: bool,
    /// Use this partition instead of building one.
    pub partition: Option<Partition>,
    pub bm_cache: Option<PathBuf>,
    /// Threads per worker pool; `HYBIR_THREADS` or half the cores if unset.
    pub threads_per_worker: Option<usize>,
    pub calibration_sources: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sources: SourceSelection::Random { count: 10, seed: 1 },
            ratio: RatioChoice::Fixed(0.5),
            mode: Mode::Hybir,
            strategies: DEFAULT_STRATEGIES,
            pipeline: false,
            partition: None,
            bm_cache: None,
            threads_per_worker: None,
            calibration_sources: DEFAULT_CALIBRATION_SOURCES,
        }
    }
}

pub fn select_sources(n: usize, sel: &SourceSelection) -> Result<Vec<VertexId>> {
    match sel {
        SourceSelection::Random { count, seed } => {
            if *count == 0 {
                return Err(Error::InvalidArgument("number of sources must be at least 1".into()));
            }
            if *count >= n {
                return Ok((0..n).collect());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(rand::seq::index::sample(&mut rng, n, *count).into_vec())
        }
        SourceSelection::Listed(list) => {
            if list.is_empty() {
                return Err(Error::InvalidArgument("source list is empty".into()));
            }
            if let Some(&s) = list.iter().find(|&&s| s >= n) {
                return Err(Error::InvalidArgument(format!(
                    "source {s} is out of range for {n} vertices"
                )));
            }
            Ok(list.clone())
        }
    }
}

/// Everything computed once per (graph, partition) and shared by all sources.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub partition: Partition,
    pub borders: BorderSet,
    pub workers: [WorkerGraph; SIDES],
    /// Absent in BSP mode, which does not use them.
    pub matrices: Option<BorderMatrices>,
    pub partition_stats: PartitionStats,
    pub calibration: Option<Calibration>,
    pub partition_seconds: f64,
    pub border_matrix_seconds: f64,
    pub bm_cache_hit: bool,
}

impl Prepared {
    /// Partitions `g` and, in hybrid mode, builds the border matrices.
    pub fn new(g: &Graph, cfg: &RunConfig, sources: &[VertexId]) -> Result<Self> {
        let n = g.num_vertices();
        let t0 = Instant::now();
        let mut calibration = None;
        let partition = match &cfg.partition {
            Some(p) => {
                if p.num_vertices() != n {
                    return Err(Error::Format(format!(
                        "partition covers {} vertices, graph has {n}",
                        p.num_vertices()
                    )));
                }
                p.clone()
            }
            None if n < 2 => Partition::from_assignment(vec![0; n], 1.0)?,
            None => {
                let ratio = match cfg.ratio {
                    RatioChoice::Fixed(r) => r,
                    RatioChoice::Auto => {
                        let k = cfg.calibration_sources.max(1).min(sources.len());
                        let c = calibrate_ratio(g, &sources[..k])?;
                        calibration = Some(c);
                        c.ratio
                    }
                };
                greedy_bipartition(g, ratio)?
            }
        };
        if partition.is_degenerate() {
            log::warn!("partition leaves one worker without vertices");
        }
        let borders = identify_borders(g, &partition);
        let workers = WorkerGraph::build_pair(g, &partition, &borders);
        let partition_stats = PartitionStats::new(g, &partition, &borders);
        let partition_seconds = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let mut bm_cache_hit = false;
        let matrices = match cfg.mode {
            Mode::Bsp => None,
            Mode::Hybir => {
                let key = CacheKey::new(g, &partition);
                let cached = match &cfg.bm_cache {
                    Some(path) => border_matrix::load_cache(path, key)?,
                    None => None,
                };
                Some(match cached {
                    Some(bm) => {
                        bm_cache_hit = true;
                        bm
                    }
                    None => {
                        let bm = border_matrix::border_matrices_for(&workers);
                        if let Some(path) = &cfg.bm_cache {
                            border_matrix::save_cache(path, key, &bm)?;
                        }
                        bm
                    }
                })
            }
        };
        if matrices.as_ref().is_some_and(|m| m.sigma_overflow) {
            log::warn!("border path counts saturated");
        }

        Ok(Prepared {
            partition,
            borders,
            workers,
            matrices,
            partition_stats,
            calibration,
            partition_seconds,
            border_matrix_seconds: t1.elapsed().as_secs_f64(),
            bm_cache_hit,
        })
    }

    fn matrices(&self) -> Result<&BorderMatrices> {
        self.matrices
            .as_ref()
            .ok_or_else(|| Error::Contract("border matrices were not prepared".into()))
    }
}

/// Complete per-source output in global vertex order.
#[derive(Debug, Clone)]
pub struct SourceRun {
    pub source: VertexId,
    pub dist: Vec<Dist>,
    pub sigma: Vec<PathCount>,
    pub delta: Vec<f64>,
    pub forward: ForwardReport,
    pub backward: BackwardReport,
    pub events: Vec<CommEvent>,
    pub dag_cut_arcs: usize,
    /// Source-side border distances after each refinement iteration.
    pub border_history: Vec<Vec<Dist>>,
    pub sigma_overflow: bool,
}

fn global_state(workers: &[WorkerGraph; SIDES], st: &[SourceState; SIDES]) -> (Vec<Dist>, Vec<PathCount>) {
    (
        gather(workers, [&st[0].dist, &st[1].dist], INF),
        gather(workers, [&st[0].sigma, &st[1].sigma], 0),
    )
}

fn finish_hybrid(
    prep: &Prepared,
    s: VertexId,
    side: usize,
    st: SourceState,
    opts: &BackwardOptions<'_>,
) -> Result<SourceRun> {
    let w = &prep.workers;
    let mut fwd = finish_forward(w, prep.matrices()?, s, side, st)?;
    let bwd = backward_phase(w, &mut fwd.states, &fwd.frontier, s, opts)?;
    let (dist, sigma) = global_state(w, &fwd.states);
    let mut events = fwd.events;
    events.extend(bwd.events);
    Ok(SourceRun {
        source: s,
        dist,
        sigma,
        delta: bwd.delta,
        dag_cut_arcs: dag_cut_arcs(&fwd.states),
        sigma_overflow: fwd.states.iter().any(|x| x.sigma_overflow),
        forward: fwd.report,
        backward: bwd.report,
        events,
        border_history: fwd.history,
    })
}

/// One source through the hybrid forward and backward phases.
pub fn hybrid_source(prep: &Prepared, s: VertexId, opts: &BackwardOptions<'_>) -> Result<SourceRun> {
    let (side, st) = step1(&prep.workers, s)?;
    finish_hybrid(prep, s, side, st, opts)
}

/// One source through the level-synchronous baseline.
pub fn bsp_source(prep: &Prepared, s: VertexId) -> Result<SourceRun> {
    let out = run_bsp_baseline_source(&prep.workers, s)?;
    let (dist, sigma) = global_state(&prep.workers, &out.states);
    Ok(SourceRun {
        source: s,
        dist,
        sigma,
        delta: out.delta,
        dag_cut_arcs: dag_cut_arcs(&out.states),
        sigma_overflow: out.states.iter().any(|x| x.sigma_overflow),
        forward: out.forward,
        backward: out.backward,
        events: out.events,
        border_history: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceReport {
    pub source: VertexId,
    pub partition: usize,
    pub forward: ForwardReport,
    pub backward: BackwardReport,
    pub dag_cut_arcs: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timing {
    pub partition_seconds: f64,
    pub border_matrix_seconds: f64,
    pub sources_seconds: f64,
    pub total_seconds: f64,
    pub mteps: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub mode: Mode,
    pub sources: Vec<VertexId>,
    pub bc: Vec<f64>,
    pub per_source: Vec<SourceReport>,
    pub ledger: CommLedger,
    pub graph_stats: GraphStats,
    pub partition_stats: PartitionStats,
    pub calibration: Option<Calibration>,
    pub bm_cache_hit: bool,
    /// Step-1 computations that ran concurrently with the previous source's.
    pub pipelined_overlaps: usize,
    pub sigma_overflow: bool,
    pub timing: Timing,
}

impl RunResult {
    pub fn comm_totals(&self) -> CommTotals {
        self.ledger.totals()
    }
}

/// `m * k / t` in millions of traversed edges per second.
pub fn mteps(m: usize, k: usize, seconds: f64) -> f64 {
    if seconds > 0.0 {
        m as f64 * k as f64 / seconds / 1e6
    } else {
        0.0
    }
}

pub fn run_bc(g: &Graph, cfg: &RunConfig) -> Result<RunResult> {
    let start = Instant::now();
    if g.num_vertices() == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    if cfg.pipeline && cfg.mode != Mode::Hybir {
        return Err(Error::InvalidArgument("pipelining requires hybir mode".into()));
    }
    let sources = select_sources(g.num_vertices(), &cfg.sources)?;
    let pools = match cfg.threads_per_worker {
        Some(t) => WorkerPools::new(t)?,
        None => WorkerPools::from_env()?,
    };
    let prep = Prepared::new(g, cfg, &sources)?;
    let opts = BackwardOptions {
        strategies: cfg.strategies,
        pools: Some(&pools),
        parallel_threshold: DEFAULT_PARALLEL_THRESHOLD,
    };

    let t_sources = Instant::now();
    let mut bc = vec![0.0; g.num_vertices()];
    let mut per_source = Vec::with_capacity(sources.len());
    let mut ledger = CommLedger::new();
    let mut overlaps = 0;
    let mut sigma_overflow = false;
    let mut lookahead: Option<(VertexId, usize, SourceState)> = None;

    for (k, &s) in sources.iter().enumerate() {
        let run = match cfg.mode {
            Mode::Bsp => bsp_source(&prep, s)?,
            Mode::Hybir if !cfg.pipeline => hybrid_source(&prep, s, &opts)?,
            Mode::Hybir => {
                let (side, st) = match lookahead.take() {
                    Some((ls, side, st)) if ls == s => (side, st),
                    _ => {
                        let side = source_side(&prep.workers, s)?;
                        match sources.get(k + 1) {
                            Some(&t) if source_side(&prep.workers, t)? != side => {
                                let w = &prep.workers;
                                let (a, b) = std::thread::scope(|scope| {
                                    let h = scope.spawn(|| step1(w, t));
                                    let a = step1(w, s);
                                    (a, h.join())
                                });
                                let (tside, tst) = b.map_err(|_| {
                                    Error::Worker("look-ahead worker panicked".into())
                                })??;
                                lookahead = Some((t, tside, tst));
                                overlaps += 1;
                                a?
                            }
                            _ => step1(&prep.workers, s)?,
                        }
                    }
                };
                finish_hybrid(&prep, s, side, st, &opts)?
            }
        };
        accumulate_bc(&mut bc, &run.delta, s);
        sigma_overflow |= run.sigma_overflow;
        ledger.extend(run.events);
        per_source.push(SourceReport {
            source: s,
            partition: prep.partition.side(s),
            forward: run.forward,
            backward: run.backward,
            dag_cut_arcs: run.dag_cut_arcs,
        });
    }
    if sigma_overflow {
        log::warn!("path counts saturated; dependencies may be inexact");
    }

    let total = start.elapsed().as_secs_f64();
    let timing = Timing {
        partition_seconds: prep.partition_seconds,
        border_matrix_seconds: prep.border_matrix_seconds,
        sources_seconds: t_sources.elapsed().as_secs_f64(),
        total_seconds: total,
        mteps: mteps(g.num_edges(), sources.len(), total),
    };
    Ok(RunResult {
        mode: cfg.mode,
        sources,
        bc,
        per_source,
        ledger,
        graph_stats: g.stats(),
        partition_stats: prep.partition_stats,
        calibration: prep.calibration,
        bm_cache_hit: prep.bm_cache_hit,
        pipelined_overlaps: overlaps,
        sigma_overflow,
        timing,
    })
}

/// [`run_bc`] with look-ahead of Step 1 across consecutive sources.
pub fn pipeline_sources(g: &Graph, cfg: &RunConfig) -> Result<RunResult> {
    let cfg = RunConfig {
        pipeline: true,
        ..cfg.clone()
    };
    run_bc(g, &cfg)
}
