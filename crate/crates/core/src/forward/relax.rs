//! The shared initial/relax kernel.
//!
//! Both the initial SSSP from the source and the final relaxation from the
//! border nodes run the same bucketed label-correcting loop. Vertices are
//! settled in ascending distance order; a vertex re-enters the queue whenever
//! its distance or path count changes. Each arc remembers the path count it
//! last contributed (`edge_sigma`), so a later change replaces that
//! contribution instead of adding to it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::forward::state::{Active, SourceState};
use crate::graph::{dist_add, Dist, PathCount, INF};
use crate::worker::WorkerGraph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelaxStats {
    /// Vertices popped and expanded.
    pub settled: usize,
    /// Arcs examined.
    pub arcs_scanned: usize,
}

/// Runs relaxation over `wg` seeded by `actives`, updating `state` in place.
///
/// Actives are treated as final: their distance and path count are never
/// changed here, but arcs into them still get their DAG contribution
/// recorded. Actives with an infinite distance are ignored.
pub fn initial_relax(
    wg: &WorkerGraph,
    state: &mut SourceState,
    actives: &[Active],
) -> Result<RelaxStats> {
    let n = wg.num_vertices();
    let mut fixed = vec![false; n];
    let mut queued_at = vec![INF; n];
    let mut heap: BinaryHeap<Reverse<(Dist, u32)>> = BinaryHeap::new();

    for a in actives {
        let v = wg.local(a.vertex).ok_or_else(|| {
            Error::Contract(format!(
                "active vertex {} is not in partition {}",
                a.vertex,
                wg.side()
            ))
        })?;
        if a.dist == INF {
            continue;
        }
        let vi = v as usize;
        if a.dist < state.dist[vi] {
            clear_in_arcs(wg, state, v);
        }
        state.dist[vi] = a.dist;
        state.sigma[vi] = a.sigma;
        fixed[vi] = true;
        if queued_at[vi] != a.dist {
            queued_at[vi] = a.dist;
            heap.push(Reverse((a.dist, v)));
        }
    }

    let mut stats = RelaxStats::default();
    while let Some(Reverse((d, v))) = heap.pop() {
        let vi = v as usize;
        if state.dist[vi] != d || queued_at[vi] != d {
            continue;
        }
        queued_at[vi] = INF;
        stats.settled += 1;
        let sv = state.sigma[vi];

        for arc in wg.arc_range(v) {
            stats.arcs_scanned += 1;
            let u = wg.target(arc);
            let ui = u as usize;
            let nd = dist_add(d, wg.weight(arc));

            if fixed[ui] {
                state.edge_sigma[arc] = if state.dist[ui] == nd { sv } else { 0 };
                continue;
            }

            let changed = if nd < state.dist[ui] {
                clear_in_arcs(wg, state, u);
                state.dist[ui] = nd;
                state.sigma[ui] = sv;
                state.edge_sigma[arc] = sv;
                true
            } else if nd == state.dist[ui] {
                let old = state.edge_sigma[arc];
                if old != sv {
                    replace_contribution(state, ui, old, sv);
                    state.edge_sigma[arc] = sv;
                    true
                } else {
                    false
                }
            } else {
                let old = state.edge_sigma[arc];
                if old != 0 {
                    replace_contribution(state, ui, old, 0);
                    state.edge_sigma[arc] = 0;
                    true
                } else {
                    false
                }
            };

            if changed && queued_at[ui] != state.dist[ui] {
                queued_at[ui] = state.dist[ui];
                heap.push(Reverse((state.dist[ui], u)));
            }
        }
    }
    Ok(stats)
}

/// Forgets every recorded contribution into `v` (its distance is about to
/// drop, so none of them lie on a shortest path any more).
fn clear_in_arcs(wg: &WorkerGraph, state: &mut SourceState, v: u32) {
    for arc in wg.arc_range(v) {
        state.edge_sigma[wg.reverse(arc)] = 0;
    }
    for c in wg.cut_range(v) {
        state.cut_sigma[c] = 0;
    }
}

fn replace_contribution(state: &mut SourceState, v: usize, old: PathCount, new: PathCount) {
    let base = match state.sigma[v].checked_sub(old) {
        Some(b) => b,
        None => {
            state.sigma_overflow = true;
            0
        }
    };
    state.sigma[v] = match base.checked_add(new) {
        Some(s) => s,
        None => {
            state.sigma_overflow = true;
            PathCount::MAX
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::Graph;
    use crate::partition::{identify_borders, parse_partition, Partition};

    fn workers(g: &Graph, p: &Partition) -> [WorkerGraph; 2] {
        let bs = identify_borders(g, p);
        WorkerGraph::build_pair(g, p, &bs)
    }

    #[test]
    fn step1_on_p4_left_half() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let [w0, _] = workers(&g, &p);
        let mut st = SourceState::new(&w0);
        initial_relax(&w0, &mut st, &[Active { vertex: 0, dist: 0, sigma: 1 }]).unwrap();
        assert_eq!(st.dist, vec![0, 1]);
        assert_eq!(st.sigma, vec![1, 1]);
        let arc01 = w0.arc_range(0).start;
        assert_eq!(st.edge_sigma[arc01], 1);
        assert_eq!(st.edge_sigma[w0.reverse(arc01)], 0);
    }

    #[test]
    fn step6_on_p4_right_half() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let [_, w1] = workers(&g, &p);
        let mut st = SourceState::new(&w1);
        initial_relax(&w1, &mut st, &[Active { vertex: 2, dist: 2, sigma: 1 }]).unwrap();
        assert_eq!(st.dist, vec![2, 3]);
        assert_eq!(st.sigma, vec![1, 1]);
    }

    #[test]
    fn active_outside_partition_is_rejected() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let [w0, _] = workers(&g, &p);
        let mut st = SourceState::new(&w0);
        let err = initial_relax(&w0, &mut st, &[Active { vertex: 3, dist: 0, sigma: 1 }]);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    /// Side 0 holds the path 0-1-2-3-4; side 1 holds vertex 5 with edges
    /// 0-5 and 5-4. Step 1 reaches 4 at distance 4; the true distance is 2
    /// through vertex 5, which also adds a second shortest path to 3.
    #[test]
    fn reactivation_replaces_stale_contributions() {
        let g = Graph::from_edges(
            6,
            [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (0, 5, 1), (5, 4, 1)],
        )
        .unwrap();
        let p = parse_partition("0\n0\n0\n0\n0\n1\n", 6).unwrap();
        let [w0, _] = workers(&g, &p);
        let mut st = SourceState::new(&w0);
        initial_relax(&w0, &mut st, &[Active { vertex: 0, dist: 0, sigma: 1 }]).unwrap();
        assert_eq!(st.dist, vec![0, 1, 2, 3, 4]);
        assert_eq!(st.sigma, vec![1, 1, 1, 1, 1]);
        let a34 = w0.arc_range(3).find(|&a| w0.target(a) == 4).unwrap();
        assert_eq!(st.edge_sigma[a34], 1);

        initial_relax(&w0, &mut st, &[Active { vertex: 4, dist: 2, sigma: 1 }]).unwrap();
        assert_eq!(st.edge_sigma[a34], 0);

        let (dist, sigma) = crate::oracle::brute_force_paths(&g, 0).unwrap();
        for v in 0..5 {
            assert_eq!(st.dist[v], dist[v], "dist of {v}");
            assert_eq!(st.sigma[v], sigma[v], "sigma of {v}");
        }
        assert_eq!(st.sigma[3], 2);
    }
}
