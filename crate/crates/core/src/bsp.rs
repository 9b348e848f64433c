//! Level-synchronous two-worker baseline.
//!
//! Both workers settle exactly one global distance level per superstep and
//! exchange cut-edge proposals after every superstep; the backward phase
//! likewise walks the global level keys in lockstep. Only the final results
//! are shared with the hybrid engine; no border matrices are used.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::atomic::AtomicU64;
use std::sync::mpsc::{self, Receiver, Sender};

use crate::backward::{
    apply_batch, cuts_by_remote_border, handoff_entries, load, pull_local, BackwardReport, Batch,
    HANDOFF_ENTRY_BYTES,
};
use crate::error::{Error, Result};
use crate::forward::{gather, source_side, ForwardReport, SourceState};
use crate::graph::{dist_add, Dist, PathCount, VertexId, INF};
use crate::ledger::{merge_worker_events, CommEvent, Phase, StepTag};
use crate::partition::{other, SIDES};
use crate::worker::WorkerGraph;

#[derive(Debug, Clone, Copy)]
struct Proposal {
    /// Border index of the target on the receiving side.
    to_border: u32,
    /// Border index of the tail on the sending side.
    from_border: u32,
    dist: Dist,
    sigma: PathCount,
}

#[derive(Debug)]
enum ForwardMsg {
    Proposals(Vec<Proposal>),
    /// Sender's smallest unsettled key after applying the peer's proposals;
    /// the barrier that closes a superstep.
    Vote(Dist),
}

#[derive(Debug, Clone)]
pub struct BspOutput {
    pub states: [SourceState; SIDES],
    pub delta: Vec<f64>,
    pub forward: ForwardReport,
    pub backward: BackwardReport,
    pub events: Vec<CommEvent>,
}

struct WorkerOutcome {
    state: SourceState,
    supersteps: usize,
    backward_supersteps: usize,
    bytes: usize,
    events: Vec<CommEvent>,
}

struct Channels<F, B> {
    tx: Sender<F>,
    rx: Receiver<F>,
    btx: Sender<B>,
    brx: Receiver<B>,
}

fn disconnected() -> Error {
    Error::Worker("peer worker hung up".into())
}

fn heap_min(heap: &mut BinaryHeap<Reverse<(Dist, u32)>>, st: &SourceState, settled: &[bool]) -> Dist {
    while let Some(&Reverse((d, v))) = heap.peek() {
        if settled[v as usize] || st.dist[v as usize] != d {
            heap.pop();
        } else {
            return d;
        }
    }
    INF
}

fn offer(
    st: &mut SourceState,
    heap: &mut BinaryHeap<Reverse<(Dist, u32)>>,
    v: u32,
    d: Dist,
    s: PathCount,
) {
    let vi = v as usize;
    if d < st.dist[vi] {
        st.dist[vi] = d;
        st.sigma[vi] = s;
        heap.push(Reverse((d, v)));
    } else if d == st.dist[vi] {
        st.sigma[vi] = match st.sigma[vi].checked_add(s) {
            Some(x) => x,
            None => {
                st.sigma_overflow = true;
                PathCount::MAX
            }
        };
    }
}

fn run_worker(
    wg: &WorkerGraph,
    source: VertexId,
    ch: Channels<ForwardMsg, Batch>,
    peer_borders: usize,
) -> Result<WorkerOutcome> {
    let side = wg.side();
    let n = wg.num_vertices();
    let mut st = SourceState::new(wg);
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut received: Vec<Proposal> = Vec::new();
    let mut events = Vec::new();
    if let Some(l) = wg.local(source) {
        st.dist[l as usize] = 0;
        st.sigma[l as usize] = 1;
        heap.push(Reverse((0, l)));
    }

    // Forward: one global level per superstep.
    let mut keys = Vec::new();
    let mut level = 0;
    let mut supersteps = 0;
    loop {
        keys.push(level);
        let mut frontier = Vec::new();
        while heap_min(&mut heap, &st, &settled) == level {
            let Reverse((_, v)) = heap.pop().expect("peeked");
            settled[v as usize] = true;
            frontier.push(v);
        }
        let mut proposals = Vec::new();
        for &u in &frontier {
            let su = st.sigma[u as usize];
            for a in wg.arc_range(u) {
                let v = wg.target(a);
                if !settled[v as usize] {
                    offer(&mut st, &mut heap, v, dist_add(level, wg.weight(a)), su);
                }
            }
            for c in wg.cut_range(u) {
                let cut = wg.cuts()[c];
                proposals.push(Proposal {
                    to_border: cut.remote_border,
                    from_border: cut.local_border,
                    dist: dist_add(level, cut.weight),
                    sigma: su,
                });
            }
        }

        let elems = proposals.len();
        ch.tx
            .send(ForwardMsg::Proposals(proposals))
            .map_err(|_| disconnected())?;
        let ForwardMsg::Proposals(incoming) = ch.rx.recv().map_err(|_| disconnected())? else {
            return Err(Error::Worker("expected proposals from peer".into()));
        };
        for p in &incoming {
            let v = wg.border_locals()[p.to_border as usize];
            if !settled[v as usize] {
                offer(&mut st, &mut heap, v, p.dist, p.sigma);
            }
        }
        received.extend(incoming);

        let local_min = heap_min(&mut heap, &st, &settled);
        ch.tx.send(ForwardMsg::Vote(local_min)).map_err(|_| disconnected())?;
        let ForwardMsg::Vote(peer_min) = ch.rx.recv().map_err(|_| disconnected())? else {
            return Err(Error::Worker("expected a vote from peer".into()));
        };
        let next = local_min.min(peer_min);
        if next == INF {
            break;
        }
        events.push(CommEvent {
            source,
            phase: Phase::Forward,
            step: StepTag::Superstep,
            from: side,
            to: other(side),
            round: supersteps,
            level: Some(level),
            payload_elems: elems,
        });
        supersteps += 1;
        level = next;
    }

    for u in 0..n as u32 {
        let du = st.dist[u as usize];
        if du == INF {
            continue;
        }
        for a in wg.arc_range(u) {
            if dist_add(du, wg.weight(a)) == st.dist[wg.target(a) as usize] {
                st.edge_sigma[a] = st.sigma[u as usize];
            }
        }
    }
    for p in &received {
        let v = wg.border_locals()[p.to_border as usize];
        if p.dist == st.dist[v as usize] {
            if let Some(c) = wg
                .cut_range(v)
                .find(|&c| wg.cuts()[c].remote_border == p.from_border)
            {
                st.cut_sigma[c] = p.sigma;
            }
        }
    }
    st.rebuild_levels();

    // Backward: one global level per superstep, descending.
    let delta: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    let mut pending = vec![0.0; n];
    let by_remote = cuts_by_remote_border(wg, peer_borders);
    let mut li = st.levels.len();
    let mut bytes = 0;
    let mut backward_supersteps = 0;
    for (round, &key) in keys.iter().enumerate().rev() {
        let members: &[u32] = if li > 0 && st.levels.level(li - 1).0 == key {
            li -= 1;
            st.levels.level(li).1
        } else {
            &[]
        };
        for &u in members {
            let d = pull_local(wg, &st, &delta, u) + pending[u as usize];
            delta[u as usize].store(d.to_bits(), std::sync::atomic::Ordering::Relaxed);
        }
        if round == 0 {
            break;
        }
        let entries = handoff_entries(wg, &st, &delta, members);
        bytes += entries.len() * HANDOFF_ENTRY_BYTES;
        events.push(CommEvent {
            source,
            phase: Phase::Backward,
            step: StepTag::Superstep,
            from: side,
            to: other(side),
            round: backward_supersteps,
            level: Some(key),
            payload_elems: entries.len(),
        });
        backward_supersteps += 1;
        ch.btx
            .send(Batch { level: key, entries })
            .map_err(|_| disconnected())?;
        let batch = ch.brx.recv().map_err(|_| disconnected())?;
        apply_batch(wg, &st, &by_remote, &batch, &mut pending);
    }
    st.delta = delta.iter().map(load).collect();

    Ok(WorkerOutcome {
        state: st,
        supersteps,
        backward_supersteps,
        bytes,
        events,
    })
}

/// Forward and backward phase for one source in the level-synchronous
/// baseline.
pub fn run_bsp_baseline_source(workers: &[WorkerGraph; SIDES], s: VertexId) -> Result<BspOutput> {
    source_side(workers, s)?;
    let (f01, f01r) = mpsc::channel();
    let (f10, f10r) = mpsc::channel();
    let (b01, b01r) = mpsc::channel();
    let (b10, b10r) = mpsc::channel();
    let ch0 = Channels {
        tx: f01,
        rx: f10r,
        btx: b01,
        brx: b10r,
    };
    let ch1 = Channels {
        tx: f10,
        rx: f01r,
        btx: b10,
        brx: b01r,
    };
    let (r0, r1) = std::thread::scope(|scope| {
        let h = scope.spawn(|| run_worker(&workers[1], s, ch1, workers[0].num_borders()));
        let r0 = run_worker(&workers[0], s, ch0, workers[1].num_borders());
        let r1 = h
            .join()
            .unwrap_or_else(|_| Err(Error::Worker("baseline worker panicked".into())));
        (r0, r1)
    });
    let (o0, o1) = (r0?, r1?);
    debug_assert_eq!(o0.supersteps, o1.supersteps);

    let delta = gather(workers, [&o0.state.delta, &o1.state.delta], 0.0);
    let events = merge_worker_events(o0.events, o1.events);
    let forward_events = events.iter().filter(|e| e.phase == Phase::Forward).count();
    let forward = ForwardReport {
        source: s,
        iterations: 0,
        comm_events: forward_events,
        max_level: [o0.state.levels.max_key(), o1.state.levels.max_key()],
        supersteps: Some(o0.supersteps),
    };
    let backward = BackwardReport {
        sync_events: o0.backward_supersteps,
        comm_events: events.len() - forward_events,
        comm_bytes: o0.bytes + o1.bytes,
        levels: [o0.state.levels.len(), o1.state.levels.len()],
        supersteps: Some(o0.backward_supersteps),
    };
    Ok(BspOutput {
        states: [o0.state, o1.state],
        delta,
        forward,
        backward,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::Graph;
    use crate::partition::{identify_borders, parse_partition, Partition};

    fn workers(g: &Graph, p: &Partition) -> [WorkerGraph; 2] {
        WorkerGraph::build_pair(g, p, &identify_borders(g, p))
    }

    #[test]
    fn p4_three_supersteps() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let out = run_bsp_baseline_source(&workers(&g, &p), 0).unwrap();
        assert_eq!(out.forward.supersteps, Some(3));
        assert_eq!(out.forward.comm_events, 6);
        assert_eq!(out.backward.supersteps, Some(3));
        assert_eq!(&out.delta[1..], &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn p64_halves() {
        let g = generators::path(64);
        let a: Vec<u8> = (0..64).map(|v| (v >= 32) as u8).collect();
        let p = Partition::from_assignment(a, 0.5).unwrap();
        let out = run_bsp_baseline_source(&workers(&g, &p), 0).unwrap();
        assert_eq!(out.forward.supersteps, Some(63));
    }

    #[test]
    fn diamond_dependencies() {
        let g = generators::diamond();
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let out = run_bsp_baseline_source(&workers(&g, &p), 0).unwrap();
        assert_eq!(out.delta, vec![3.0, 0.5, 0.5, 0.0]);
        let st = &out.states;
        assert_eq!(gather(&workers(&g, &p), [&st[0].sigma, &st[1].sigma], 0), vec![1, 1, 1, 2]);
    }

    #[test]
    fn isolated_source_has_no_supersteps() {
        let g = Graph::from_edges(3, [(1, 2, 1)]).unwrap();
        let p = parse_partition("0\n0\n1\n", 3).unwrap();
        let out = run_bsp_baseline_source(&workers(&g, &p), 0).unwrap();
        assert_eq!(out.forward.supersteps, Some(0));
        assert!(out.events.is_empty());
    }
}
