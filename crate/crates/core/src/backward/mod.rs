//! Asynchronous dependency accumulation over descending distance levels.
//!
//! Each worker walks its own level keys from the top. A cut arc in the
//! shortest-path DAG makes the predecessor's worker wait until the
//! successor's worker has finished the successor's level, then consume a
//! batch of border (sigma, delta) values for that level.

mod sync;

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sync::LevelWatermarks;
use sync::FinishGuard;

use crate::error::{Error, Result};
use crate::forward::{gather, BorderFrontier, SourceState};
use crate::graph::{dist_add, Dist, PathCount, VertexId, INF};
use crate::ledger::{merge_worker_events, CommEvent, Phase, StepTag};
use crate::partition::{other, SIDES};
use crate::worker::WorkerGraph;

/// Wire size of one border handoff: border index, path count, dependency.
pub const HANDOFF_ENTRY_BYTES: usize = 4 + 16 + 8;

/// Levels with fewer vertices than this are processed on the calling
/// thread even when a pool is available.
pub const DEFAULT_PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Each vertex sums over its DAG successors; writes are disjoint.
    VertexPull,
    /// Each DAG arc adds into its tail with an atomic update.
    EdgePush,
}

pub const DEFAULT_STRATEGIES: [Strategy; SIDES] = [Strategy::VertexPull, Strategy::EdgePush];

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex-pull" | "pull" => Ok(Strategy::VertexPull),
            "edge-push" | "push" => Ok(Strategy::EdgePush),
            _ => Err(Error::InvalidArgument(format!("unknown backward strategy '{s}'"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::VertexPull => "vertex-pull",
            Strategy::EdgePush => "edge-push",
        })
    }
}

/// One thread pool per worker.
pub struct WorkerPools {
    pools: [rayon::ThreadPool; SIDES],
    threads: usize,
}

impl WorkerPools {
    pub fn new(threads_per_worker: usize) -> Result<Self> {
        let threads = threads_per_worker.max(1);
        let build = |side: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .thread_name(move |i| format!("worker{side}-{i}"))
                .build()
                .map_err(|e| Error::Worker(e.to_string()))
        };
        Ok(WorkerPools {
            pools: [build(0)?, build(1)?],
            threads,
        })
    }

    /// Sized by `HYBIR_THREADS` when set, otherwise half the available cores.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var("HYBIR_THREADS") {
            Ok(v) => v.trim().parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| {
                Error::InvalidArgument(format!("HYBIR_THREADS must be a positive integer, got '{v}'"))
            })?,
            Err(_) => std::thread::available_parallelism()
                .map(|n| (n.get() / 2).max(1))
                .unwrap_or(1),
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn get(&self, side: usize) -> &rayon::ThreadPool {
        &self.pools[side]
    }
}

impl std::fmt::Debug for WorkerPools {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPools").field("threads", &self.threads).finish()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BackwardOptions<'a> {
    pub strategies: [Strategy; SIDES],
    pub pools: Option<&'a WorkerPools>,
    pub parallel_threshold: usize,
}

impl Default for BackwardOptions<'_> {
    fn default() -> Self {
        BackwardOptions {
            strategies: DEFAULT_STRATEGIES,
            pools: None,
            parallel_threshold: DEFAULT_PARALLEL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BackwardReport {
    pub sync_events: usize,
    pub comm_events: usize,
    pub comm_bytes: usize,
    pub levels: [usize; SIDES],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supersteps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BackwardOutput {
    /// Dependencies in global vertex order.
    pub delta: Vec<f64>,
    pub report: BackwardReport,
    pub events: Vec<CommEvent>,
}

/// Cross-worker structure of one worker's levels, indexed like its
/// [`Levels`](crate::forward::Levels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderDependency {
    /// Smallest remote successor level of any vertex in the level: the
    /// worker must wait until the peer has finished it.
    pub wait_for: Vec<Option<Dist>>,
    /// Whether the level holds a vertex with a remote DAG predecessor, so
    /// its values must be handed to the peer.
    pub handoff: Vec<bool>,
}

impl BorderDependency {
    pub fn new(wg: &WorkerGraph, st: &SourceState, frontier: &BorderFrontier) -> Self {
        let o = other(wg.side());
        let lv = &st.levels;
        let mut wait_for = vec![None; lv.len()];
        let mut handoff = vec![false; lv.len()];
        for li in 0..lv.len() {
            let (key, members) = lv.level(li);
            for &u in members {
                for c in wg.cut_range(u) {
                    let cut = wg.cuts()[c];
                    let rd = frontier.dist[o][cut.remote_border as usize];
                    if rd != INF && dist_add(key, cut.weight) == rd {
                        wait_for[li] = Some(wait_for[li].map_or(rd, |w: Dist| w.min(rd)));
                    }
                    if st.cut_sigma[c] != 0 {
                        handoff[li] = true;
                    }
                }
            }
        }
        BorderDependency { wait_for, handoff }
    }

    pub fn wait_points(&self) -> usize {
        self.wait_for.iter().filter(|w| w.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Handoff {
    pub border: u32,
    pub sigma: PathCount,
    pub delta: f64,
}

#[derive(Debug)]
pub(crate) struct Batch {
    pub level: Dist,
    pub entries: Vec<Handoff>,
}

#[inline]
pub(crate) fn load(a: &AtomicU64) -> f64 {
    f64::from_bits(a.load(Ordering::Relaxed))
}

#[inline]
fn store(a: &AtomicU64, x: f64) {
    a.store(x.to_bits(), Ordering::Relaxed);
}

#[inline]
fn atomic_add(a: &AtomicU64, x: f64) {
    let mut cur = a.load(Ordering::Relaxed);
    loop {
        let next = (f64::from_bits(cur) + x).to_bits();
        match a.compare_exchange_weak(cur, next, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(seen) => cur = seen,
        }
    }
}

#[inline]
fn dependency(sigma_pred: PathCount, sigma_succ: PathCount, delta_succ: f64) -> f64 {
    sigma_pred as f64 / sigma_succ as f64 * (1.0 + delta_succ)
}

/// Sum over `u`'s local DAG successors.
pub(crate) fn pull_local(wg: &WorkerGraph, st: &SourceState, delta: &[AtomicU64], u: u32) -> f64 {
    let su = st.sigma[u as usize];
    let mut acc = 0.0;
    for a in wg.arc_range(u) {
        if st.edge_sigma[a] != 0 {
            let v = wg.target(a) as usize;
            acc += dependency(su, st.sigma[v], load(&delta[v]));
        }
    }
    acc
}

fn push_local(wg: &WorkerGraph, st: &SourceState, delta: &[AtomicU64], v: u32) {
    let sv = st.sigma[v as usize];
    let dv = load(&delta[v as usize]);
    for a in wg.arc_range(v) {
        if st.edge_sigma[wg.reverse(a)] != 0 {
            let u = wg.target(a) as usize;
            atomic_add(&delta[u], dependency(st.sigma[u], sv, dv));
        }
    }
}

/// Border handoff entries for the vertices of one level that have a remote
/// DAG predecessor.
pub(crate) fn handoff_entries(
    wg: &WorkerGraph,
    st: &SourceState,
    delta: &[AtomicU64],
    members: &[u32],
) -> Vec<Handoff> {
    members
        .iter()
        .filter_map(|&v| {
            let r = wg.cut_range(v);
            let c = r.clone().find(|&c| st.cut_sigma[c] != 0)?;
            Some(Handoff {
                border: wg.cuts()[c].local_border,
                sigma: st.sigma[v as usize],
                delta: load(&delta[v as usize]),
            })
        })
        .collect()
}

/// Remote cuts grouped by the peer's border index.
pub(crate) fn cuts_by_remote_border(wg: &WorkerGraph, peer_borders: usize) -> Vec<Vec<usize>> {
    let mut by = vec![Vec::new(); peer_borders];
    for (c, cut) in wg.cuts().iter().enumerate() {
        by[cut.remote_border as usize].push(c);
    }
    by
}

/// Adds the contributions carried by a batch to the pending remote sums of
/// local predecessors.
pub(crate) fn apply_batch(
    wg: &WorkerGraph,
    st: &SourceState,
    by_remote: &[Vec<usize>],
    batch: &Batch,
    pending: &mut [f64],
) {
    for e in &batch.entries {
        for &c in &by_remote[e.border as usize] {
            let cut = wg.cuts()[c];
            let r = cut.local as usize;
            if st.dist[r] != INF && dist_add(st.dist[r], cut.weight) == batch.level {
                pending[r] += dependency(st.sigma[r], e.sigma, e.delta);
            }
        }
    }
}

struct WorkerOutcome {
    delta: Vec<f64>,
    sync_events: usize,
    bytes: usize,
    events: Vec<CommEvent>,
}

#[allow(clippy::too_many_arguments)]
fn run_worker(
    wg: &WorkerGraph,
    st: &SourceState,
    dep: &BorderDependency,
    peer_borders: usize,
    strategy: Strategy,
    parallel: bool,
    threshold: usize,
    marks: &LevelWatermarks,
    tx: Sender<Batch>,
    rx: Receiver<Batch>,
    source: VertexId,
) -> Result<WorkerOutcome> {
    let side = wg.side();
    let _guard = FinishGuard { marks, side };
    let n = wg.num_vertices();
    let delta: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    let mut pending = vec![0.0; n];
    let by_remote = cuts_by_remote_border(wg, peer_borders);
    let mut out = WorkerOutcome {
        delta: Vec::new(),
        sync_events: 0,
        bytes: 0,
        events: Vec::new(),
    };

    for li in (0..st.levels.len()).rev() {
        let (key, members) = st.levels.level(li);
        if let Some(need) = dep.wait_for[li] {
            out.sync_events += 1;
            marks.wait_for(side, need)?;
            while let Ok(batch) = rx.try_recv() {
                apply_batch(wg, st, &by_remote, &batch, &mut pending);
            }
        }

        let par = parallel && members.len() >= threshold;
        match strategy {
            Strategy::VertexPull => {
                let f = |&u: &u32| {
                    let d = pull_local(wg, st, &delta, u) + pending[u as usize];
                    store(&delta[u as usize], d);
                };
                if par {
                    members.par_iter().for_each(f);
                } else {
                    members.iter().for_each(f);
                }
            }
            Strategy::EdgePush => {
                for &u in members {
                    if pending[u as usize] != 0.0 {
                        atomic_add(&delta[u as usize], pending[u as usize]);
                    }
                }
                let f = |&v: &u32| push_local(wg, st, &delta, v);
                if par {
                    members.par_iter().for_each(f);
                } else {
                    members.iter().for_each(f);
                }
            }
        }

        if dep.handoff[li] {
            let entries = handoff_entries(wg, st, &delta, members);
            out.bytes += entries.len() * HANDOFF_ENTRY_BYTES;
            out.events.push(CommEvent {
                source,
                phase: Phase::Backward,
                step: StepTag::LevelHandoff,
                from: side,
                to: other(side),
                round: 0,
                level: Some(key),
                payload_elems: entries.len(),
            });
            // The peer may already have finished; a closed channel is fine.
            let _ = tx.send(Batch { level: key, entries });
        }
        marks.publish(side, key);
    }

    out.delta = delta.iter().map(load).collect();
    Ok(out)
}

pub fn backward_phase(
    workers: &[WorkerGraph; SIDES],
    states: &mut [SourceState; SIDES],
    frontier: &BorderFrontier,
    source: VertexId,
    opts: &BackwardOptions<'_>,
) -> Result<BackwardOutput> {
    let deps = [
        BorderDependency::new(&workers[0], &states[0], frontier),
        BorderDependency::new(&workers[1], &states[1], frontier),
    ];
    let marks = LevelWatermarks::new();
    let (tx01, rx01) = mpsc::channel();
    let (tx10, rx10) = mpsc::channel();
    let peer_borders = [workers[1].num_borders(), workers[0].num_borders()];

    let run = |side: usize, tx: Sender<Batch>, rx: Receiver<Batch>| {
        let body = || {
            run_worker(
                &workers[side],
                &states[side],
                &deps[side],
                peer_borders[side],
                opts.strategies[side],
                opts.pools.is_some(),
                opts.parallel_threshold,
                &marks,
                tx,
                rx,
                source,
            )
        };
        match opts.pools {
            Some(p) => p.get(side).install(body),
            None => body(),
        }
    };
    let (r0, r1) = std::thread::scope(|scope| {
        let h = scope.spawn(|| run(1, tx10, rx01));
        let r0 = run(0, tx01, rx10);
        let r1 = h
            .join()
            .unwrap_or_else(|_| Err(Error::Worker("backward worker panicked".into())));
        (r0, r1)
    });
    let (o0, o1) = match (r0, r1) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e @ Error::Deadlock(_)), _) | (_, Err(e @ Error::Deadlock(_))) => return Err(e),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };

    let delta = gather(workers, [&o0.delta, &o1.delta], 0.0);
    let events = merge_worker_events(o0.events, o1.events);
    let report = BackwardReport {
        sync_events: o0.sync_events + o1.sync_events,
        comm_events: events.len(),
        comm_bytes: o0.bytes + o1.bytes,
        levels: [states[0].levels.len(), states[1].levels.len()],
        supersteps: None,
    };
    states[0].delta = o0.delta;
    states[1].delta = o1.delta;
    Ok(BackwardOutput {
        delta,
        report,
        events,
    })
}

/// `bc[v] += delta[v]` for every `v` other than the source.
pub fn accumulate_bc(bc: &mut [f64], delta: &[f64], s: VertexId) {
    for (v, (b, &d)) in bc.iter_mut().zip(delta).enumerate() {
        if v != s {
            *b += d;
        }
    }
}

/// Number of cut arcs in the shortest-path DAG of a completed forward phase.
pub fn dag_cut_arcs(states: &[SourceState; SIDES]) -> usize {
    states
        .iter()
        .map(|st| st.cut_sigma.iter().filter(|&&c| c != 0).count())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::border_matrix::compute_border_matrices;
    use crate::forward::forward_phase;
    use crate::generators;
    use crate::graph::Graph;
    use crate::partition::{identify_borders, parse_partition};

    fn run(g: &Graph, part: &str, s: VertexId, strategies: [Strategy; 2]) -> BackwardOutput {
        let p = parse_partition(part, g.num_vertices()).unwrap();
        let bs = identify_borders(g, &p);
        let w = WorkerGraph::build_pair(g, &p, &bs);
        let bm = compute_border_matrices(g, &p, &bs);
        let mut fwd = forward_phase(&w, &bm, s).unwrap();
        let opts = BackwardOptions {
            strategies,
            ..Default::default()
        };
        backward_phase(&w, &mut fwd.states, &fwd.frontier, s, &opts).unwrap()
    }

    #[test]
    fn p4_waits_across_the_cut() {
        let out = run(&generators::path(4), "0\n0\n1\n1\n", 0, DEFAULT_STRATEGIES);
        assert_eq!(&out.delta[1..], &[2.0, 1.0, 0.0]);
        assert_eq!(out.report.sync_events, 1);
        assert_eq!(out.report.comm_events, 1);
        assert_eq!(out.report.comm_bytes, HANDOFF_ENTRY_BYTES);
    }

    #[test]
    fn diamond_splits_dependency() {
        for strategies in [[Strategy::VertexPull; 2], [Strategy::EdgePush; 2], DEFAULT_STRATEGIES] {
            let out = run(&generators::diamond(), "0\n0\n1\n1\n", 0, strategies);
            assert_eq!(out.delta[1], 0.5);
            assert_eq!(out.delta[2], 0.5);
            assert_eq!(out.delta[3], 0.0);
        }
    }

    #[test]
    fn star_from_hub_has_no_dependencies() {
        let out = run(&generators::star(3), "0\n0\n1\n1\n", 0, DEFAULT_STRATEGIES);
        assert!(out.delta[1..].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn accumulate_skips_source() {
        let mut bc = vec![0.0; 3];
        accumulate_bc(&mut bc, &[5.0, 1.0, 2.0], 0);
        assert_eq!(bc, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn strategy_names() {
        assert_eq!("edge-push".parse::<Strategy>().unwrap(), Strategy::EdgePush);
        assert_eq!("vertex-pull".parse::<Strategy>().unwrap(), Strategy::VertexPull);
        assert!("sideways".parse::<Strategy>().is_err());
    }
}
