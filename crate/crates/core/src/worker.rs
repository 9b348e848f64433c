//! Per-worker view of one side of the partition.
//!
//! A worker only holds the vertices and intra-partition arcs of its own side,
//! relabelled to dense local ids, plus the cut arcs that touch its side. This
//! mirrors a device that never sees the other half of the graph.

use std::sync::Arc;

use crate::graph::{Dist, Graph, VertexId};
use crate::partition::{BorderSet, Partition, SIDES};

/// One cut edge as seen from a worker: `local` is on this side, `remote` on
/// the other. The arc exists in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalCut {
    pub local: u32,
    pub remote: VertexId,
    pub local_border: u32,
    pub remote_border: u32,
    pub weight: Dist,
}

#[derive(Debug, Clone)]
pub struct WorkerGraph {
    side: usize,
    globals: Vec<VertexId>,
    local_of: Arc<Vec<u32>>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<Dist>,
    reverse: Vec<usize>,
    border_locals: Vec<u32>,
    cuts: Vec<LocalCut>,
    cut_offsets: Vec<usize>,
}

impl WorkerGraph {
    pub fn build_pair(g: &Graph, p: &Partition, bs: &BorderSet) -> [WorkerGraph; SIDES] {
        let n = g.num_vertices();
        let mut local_of = vec![u32::MAX; n];
        let mut globals: [Vec<VertexId>; SIDES] = [Vec::new(), Vec::new()];
        for v in 0..n {
            let side = p.side(v);
            local_of[v] = globals[side].len() as u32;
            globals[side].push(v);
        }
        let local_of = Arc::new(local_of);
        let [g0, g1] = globals;
        [
            Self::build_side(g, p, bs, 0, g0, Arc::clone(&local_of)),
            Self::build_side(g, p, bs, 1, g1, local_of),
        ]
    }

    fn build_side(
        g: &Graph,
        p: &Partition,
        bs: &BorderSet,
        side: usize,
        globals: Vec<VertexId>,
        local_of: Arc<Vec<u32>>,
    ) -> WorkerGraph {
        let nl = globals.len();
        let mut offsets = Vec::with_capacity(nl + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut cuts = Vec::new();
        let mut cut_offsets = Vec::with_capacity(nl + 1);
        offsets.push(0);
        cut_offsets.push(0);

        for (li, &v) in globals.iter().enumerate() {
            for a in g.arc_range(v) {
                let u = g.arc_dst()[a];
                let w = g.arc_weight()[a];
                if p.side(u) == side {
                    targets.push(local_of[u]);
                    weights.push(w);
                } else {
                    cuts.push(LocalCut {
                        local: li as u32,
                        remote: u,
                        local_border: bs.border_index(v).expect("cut endpoint is a border") as u32,
                        remote_border: bs.border_index(u).expect("cut endpoint is a border")
                            as u32,
                        weight: w,
                    });
                }
            }
            offsets.push(targets.len());
            cut_offsets.push(cuts.len());
        }

        // Reverse arcs: local adjacency is sorted by local id because global
        // adjacency is sorted by global id and the relabelling is monotone.
        let tails: Vec<u32> = (0..nl)
            .flat_map(|u| std::iter::repeat_n(u as u32, offsets[u + 1] - offsets[u]))
            .collect();
        let reverse = (0..targets.len())
            .map(|a| {
                let tail = tails[a];
                let head = targets[a] as usize;
                let range = offsets[head]..offsets[head + 1];
                let pos = targets[range.clone()]
                    .binary_search(&tail)
                    .expect("symmetric local arc");
                range.start + pos
            })
            .collect();

        let border_locals = bs
            .borders(side)
            .iter()
            .map(|&b| local_of[b])
            .collect();

        WorkerGraph {
            side,
            globals,
            local_of,
            offsets,
            targets,
            weights,
            reverse,
            border_locals,
            cuts,
            cut_offsets,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn num_vertices(&self) -> usize {
        self.globals.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn global(&self, local: u32) -> VertexId {
        self.globals[local as usize]
    }

    pub fn globals(&self) -> &[VertexId] {
        &self.globals
    }

    /// Local id of `v` if it belongs to this worker's side.
    pub fn local(&self, v: VertexId) -> Option<u32> {
        let l = *self.local_of.get(v)?;
        (l != u32::MAX && self.globals.get(l as usize) == Some(&v)).then_some(l)
    }

    #[inline]
    pub fn arc_range(&self, u: u32) -> std::ops::Range<usize> {
        self.offsets[u as usize]..self.offsets[u as usize + 1]
    }

    #[inline]
    pub fn target(&self, arc: usize) -> u32 {
        self.targets[arc]
    }

    #[inline]
    pub fn weight(&self, arc: usize) -> Dist {
        self.weights[arc]
    }

    #[inline]
    pub fn reverse(&self, arc: usize) -> usize {
        self.reverse[arc]
    }

    /// Local ids of this side's borders in canonical (ascending global) order.
    pub fn border_locals(&self) -> &[u32] {
        &self.border_locals
    }

    pub fn num_borders(&self) -> usize {
        self.border_locals.len()
    }

    /// All cut arcs touching this side, grouped by local endpoint.
    pub fn cuts(&self) -> &[LocalCut] {
        &self.cuts
    }

    /// Indices into [`cuts`](Self::cuts) for local vertex `u`.
    pub fn cut_range(&self, u: u32) -> std::ops::Range<usize> {
        self.cut_offsets[u as usize]..self.cut_offsets[u as usize + 1]
    }
}
