//! Per-source forward phase across the two workers.

mod refine;
mod relax;
mod state;

use serde::Serialize;

pub use refine::{refine_border_distances, BorderFrontier, Labels, Refinement, Transfer};
pub use relax::{initial_relax, RelaxStats};
pub use state::{Active, Levels, SourceState};

use crate::border_matrix::BorderMatrices;
use crate::error::{Error, Result};
use crate::graph::{dist_add, Dist, VertexId, INF};
use crate::ledger::{CommEvent, Phase};
use crate::partition::{other, SIDES};
use crate::worker::WorkerGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForwardReport {
    pub source: VertexId,
    pub iterations: usize,
    pub comm_events: usize,
    pub max_level: [Option<Dist>; SIDES],
    /// Set only by the level-synchronous baseline.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supersteps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub states: [SourceState; SIDES],
    pub frontier: BorderFrontier,
    pub report: ForwardReport,
    pub events: Vec<CommEvent>,
    pub history: Vec<Vec<Dist>>,
}

impl ForwardOutput {
    pub fn sigma_overflow(&self) -> bool {
        self.states.iter().any(|s| s.sigma_overflow)
    }
}

/// Side owning `s`, after a range check.
pub fn source_side(workers: &[WorkerGraph; SIDES], s: VertexId) -> Result<usize> {
    (0..SIDES)
        .find(|&side| workers[side].local(s).is_some())
        .ok_or_else(|| Error::InvalidArgument(format!("source {s} is out of range")))
}

/// SSSP from `s` restricted to its own side.
pub fn step1(workers: &[WorkerGraph; SIDES], s: VertexId) -> Result<(usize, SourceState)> {
    let side = source_side(workers, s)?;
    let wg = &workers[side];
    let mut st = SourceState::new(wg);
    initial_relax(wg, &mut st, &[Active { vertex: s, dist: 0, sigma: 1 }])?;
    Ok((side, st))
}

/// Runs refinement and the final relaxation on top of a Step-1 state.
pub fn finish_forward(
    workers: &[WorkerGraph; SIDES],
    bm: &BorderMatrices,
    s: VertexId,
    side: usize,
    step1_state: SourceState,
) -> Result<ForwardOutput> {
    let mut seed = BorderFrontier::unreached(workers);
    for (i, &l) in workers[side].border_locals().iter().enumerate() {
        seed.dist[side][i] = step1_state.dist[l as usize];
        seed.sigma[side][i] = step1_state.sigma[l as usize];
    }
    let refinement = refine_border_distances(workers, bm, side, &seed)?;
    let frontier = refinement.frontier;

    let mut states: [Option<SourceState>; SIDES] = [None, None];
    states[side] = Some(step1_state);
    let [a, b] = states;
    let relax_side = |w: usize, st: Option<SourceState>| -> Result<SourceState> {
        let wg = &workers[w];
        let mut st = st.unwrap_or_else(|| SourceState::new(wg));
        let actives: Vec<Active> = wg
            .border_locals()
            .iter()
            .enumerate()
            .map(|(i, &l)| Active {
                vertex: wg.global(l),
                dist: frontier.dist[w][i],
                sigma: frontier.sigma[w][i],
            })
            .collect();
        initial_relax(wg, &mut st, &actives)?;
        record_cut_sigma(wg, &mut st, &frontier);
        st.rebuild_levels();
        Ok(st)
    };
    let (s0, s1) = std::thread::scope(|scope| {
        let h = scope.spawn(|| relax_side(1, b));
        let s0 = relax_side(0, a);
        (s0, h.join().map_err(|_| Error::Worker("final relaxation panicked".into())))
    });
    let mut states = [s0?, s1??];
    if refinement.sigma_overflow {
        states[side].sigma_overflow = true;
    }

    let events = refinement
        .transfers
        .iter()
        .map(|t| CommEvent {
            source: s,
            phase: Phase::Forward,
            step: t.step,
            from: t.from,
            to: t.to,
            round: t.round,
            level: None,
            payload_elems: t.elems,
        })
        .collect();
    let report = ForwardReport {
        source: s,
        iterations: refinement.iterations,
        comm_events: refinement.comm_events,
        max_level: [states[0].levels.max_key(), states[1].levels.max_key()],
        supersteps: None,
    };
    Ok(ForwardOutput {
        states,
        frontier,
        report,
        events,
        history: refinement.history,
    })
}

pub fn forward_phase(
    workers: &[WorkerGraph; SIDES],
    bm: &BorderMatrices,
    s: VertexId,
) -> Result<ForwardOutput> {
    let (side, st) = step1(workers, s)?;
    finish_forward(workers, bm, s, side, st)
}

/// Contribution of each incoming cut arc, from the other side's final
/// border labels.
fn record_cut_sigma(wg: &WorkerGraph, st: &mut SourceState, frontier: &BorderFrontier) {
    let o = other(wg.side());
    for (c, cut) in wg.cuts().iter().enumerate() {
        let rd = frontier.dist[o][cut.remote_border as usize];
        let ld = st.dist[cut.local as usize];
        st.cut_sigma[c] = if rd != INF && dist_add(rd, cut.weight) == ld {
            frontier.sigma[o][cut.remote_border as usize]
        } else {
            0
        };
    }
}

/// Copies per-worker values back into global vertex order.
pub fn gather<T: Copy>(workers: &[WorkerGraph; SIDES], per_side: [&[T]; SIDES], fill: T) -> Vec<T> {
    let n = workers[0].num_vertices() + workers[1].num_vertices();
    let mut out = vec![fill; n];
    for side in 0..SIDES {
        for (l, &v) in workers[side].globals().iter().enumerate() {
            out[v] = per_side[side][l];
        }
    }
    out
}
