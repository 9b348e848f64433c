use serde::Serialize;

use crate::graph::{Dist, PathCount, VertexId, INF};
use crate::worker::WorkerGraph;

/// A vertex entering relaxation with an already-final distance and path count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Active {
    pub vertex: VertexId,
    pub dist: Dist,
    pub sigma: PathCount,
}

/// Local vertices bucketed by exact distance, ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Levels {
    keys: Vec<Dist>,
    members: Vec<Vec<u32>>,
}

impl Levels {
    pub fn from_dist(dist: &[Dist]) -> Self {
        let mut order: Vec<u32> = (0..dist.len() as u32)
            .filter(|&v| dist[v as usize] != INF)
            .collect();
        order.sort_by_key(|&v| (dist[v as usize], v));
        let mut levels = Levels::default();
        for v in order {
            let d = dist[v as usize];
            if levels.keys.last() != Some(&d) {
                levels.keys.push(d);
                levels.members.push(Vec::new());
            }
            levels.members.last_mut().unwrap().push(v);
        }
        levels
    }

    pub fn keys(&self) -> &[Dist] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn level(&self, i: usize) -> (Dist, &[u32]) {
        (self.keys[i], &self.members[i])
    }

    pub fn max_key(&self) -> Option<Dist> {
        self.keys.last().copied()
    }

    pub fn min_key(&self) -> Option<Dist> {
        self.keys.first().copied()
    }
}

/// Per-source state held by one worker, indexed by local vertex / arc ids.
#[derive(Debug, Clone)]
pub struct SourceState {
    pub side: usize,
    pub dist: Vec<Dist>,
    pub sigma: Vec<PathCount>,
    /// Contribution of each intra-partition arc `(u, v)` to `sigma[v]`;
    /// non-zero exactly on shortest-path DAG arcs.
    pub edge_sigma: Vec<PathCount>,
    /// Contribution of each cut arc `(remote -> local)` to the local
    /// endpoint's sigma, indexed like [`WorkerGraph::cuts`].
    pub cut_sigma: Vec<PathCount>,
    pub delta: Vec<f64>,
    pub levels: Levels,
    pub sigma_overflow: bool,
}

impl SourceState {
    pub fn new(wg: &WorkerGraph) -> Self {
        SourceState {
            side: wg.side(),
            dist: vec![INF; wg.num_vertices()],
            sigma: vec![0; wg.num_vertices()],
            edge_sigma: vec![0; wg.num_arcs()],
            cut_sigma: vec![0; wg.cuts().len()],
            delta: vec![0.0; wg.num_vertices()],
            levels: Levels::default(),
            sigma_overflow: false,
        }
    }

    pub fn rebuild_levels(&mut self) {
        self.levels = Levels::from_dist(&self.dist);
    }

    pub fn dist_of(&self, wg: &WorkerGraph, v: VertexId) -> Option<Dist> {
        wg.local(v).map(|l| self.dist[l as usize])
    }

    pub fn sigma_of(&self, wg: &WorkerGraph, v: VertexId) -> Option<PathCount> {
        wg.local(v).map(|l| self.sigma[l as usize])
    }
}
