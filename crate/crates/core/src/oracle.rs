//! Ground truth for validation: sequential Brandes and exhaustive simple-path
//! enumeration. Both are single-threaded and share no code with the hybrid
//! engine.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Dist, Graph, PathCount, VertexId, INF};

/// Largest graph the exhaustive enumerators accept.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceResult {
    pub source: VertexId,
    pub dist: Vec<Dist>,
    pub sigma: Vec<PathCount>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub per_source: Vec<SourceResult>,
    pub bc: Vec<f64>,
}

/// Brandes' algorithm with Dijkstra-ordered settling (exact for any
/// positive integer weights). Sums dependencies over ordered pairs, so an
/// undirected path `a-b-c` gives `bc[b] = 2`.
pub fn brandes_bc(g: &Graph, sources: &[VertexId]) -> OracleResult {
    let n = g.num_vertices();
    let mut bc = vec![0.0; n];
    let mut per_source = Vec::with_capacity(sources.len());
    for &s in sources {
        let r = brandes_source(g, s);
        for v in 0..n {
            if v != s {
                bc[v] += r.delta[v];
            }
        }
        per_source.push(r);
    }
    OracleResult { per_source, bc }
}

pub fn brandes_source(g: &Graph, s: VertexId) -> SourceResult {
    let n = g.num_vertices();
    let mut dist = vec![INF; n];
    let mut sigma: Vec<PathCount> = vec![0; n];
    let mut preds: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut settled_order = Vec::with_capacity(n);
    let mut done = vec![false; n];

    dist[s] = 0;
    sigma[s] = 1;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0, s)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] || d != dist[v] {
            continue;
        }
        done[v] = true;
        settled_order.push(v);
        for (w, wt) in g.neighbors(v) {
            let nd = d + wt;
            if nd < dist[w] {
                dist[w] = nd;
                sigma[w] = 0;
                preds[w].clear();
                heap.push(Reverse((nd, w)));
            }
            if nd == dist[w] {
                sigma[w] = sigma[w].saturating_add(sigma[v]);
                preds[w].push(v);
            }
        }
    }

    let mut delta = vec![0.0; n];
    for &w in settled_order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] as f64 / sigma[w] as f64 * (1.0 + delta[w]);
        }
    }
    SourceResult {
        source: s,
        dist,
        sigma,
        delta,
    }
}

/// Shortest distance and path count from `s` to every vertex by
/// enumerating simple paths. A prefix is abandoned once it is strictly
/// longer than the best prefix seen so far at its endpoint, which never
/// discards a shortest path.
pub fn brute_force_paths(g: &Graph, s: VertexId) -> Result<(Vec<Dist>, Vec<PathCount>)> {
    let n = g.num_vertices();
    check_size(n)?;
    let mut best = vec![INF; n];
    let mut count: Vec<PathCount> = vec![0; n];
    let mut on_path = vec![false; n];
    let mut stack = vec![s];
    on_path[s] = true;
    enumerate(g, s, 0, &mut best, &mut count, &mut on_path, &mut stack, &mut |_, _, _, _| {});
    Ok((best, count))
}

/// Direct evaluation of BC as a sum over ordered pairs of the fraction of
/// shortest paths through each intermediate vertex.
pub fn brute_force_bc(g: &Graph) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    check_size(n)?;
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for (v, dep) in brute_force_dependencies(g, s)?.into_iter().enumerate() {
            bc[v] += dep;
        }
    }
    Ok(bc)
}

/// `sum_t sigma_st(v) / sigma_st` for a fixed source, by enumeration.
pub fn brute_force_dependencies(g: &Graph, s: VertexId) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    check_size(n)?;
    // through[t][v]: number of shortest s-t paths with v as an interior vertex.
    let mut through: Vec<Vec<PathCount>> = vec![vec![0; n]; n];
    let mut best = vec![INF; n];
    let mut count: Vec<PathCount> = vec![0; n];
    let mut on_path = vec![false; n];
    let mut stack = vec![s];
    on_path[s] = true;

    let mut visit = |path: &[VertexId], len: Dist, best: &[Dist], reset: bool| {
        let t = *path.last().unwrap();
        if reset {
            through[t].iter_mut().for_each(|c| *c = 0);
        }
        if len == best[t] {
            for &v in path.iter().take(path.len().saturating_sub(1)).skip(1) {
                through[t][v] += 1;
            }
        }
    };
    enumerate(g, s, 0, &mut best, &mut count, &mut on_path, &mut stack, &mut visit);

    let mut dep = vec![0.0; n];
    for t in 0..n {
        if t == s || count[t] == 0 {
            continue;
        }
        for v in 0..n {
            dep[v] += through[t][v] as f64 / count[t] as f64;
        }
    }
    Ok(dep)
}

fn check_size(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration refuses graphs with {n} > {BRUTE_FORCE_MAX_VERTICES} vertices"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    g: &Graph,
    v: VertexId,
    len: Dist,
    best: &mut [Dist],
    count: &mut [PathCount],
    on_path: &mut [bool],
    stack: &mut Vec<VertexId>,
    visit: &mut impl FnMut(&[VertexId], Dist, &[Dist], bool),
) {
    if len > best[v] {
        return;
    }
    let reset = len < best[v];
    if reset {
        best[v] = len;
        count[v] = 0;
    }
    count[v] += 1;
    visit(stack, len, best, reset);

    for (w, wt) in g.neighbors(v) {
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        stack.push(w);
        enumerate(g, w, len + wt, best, count, on_path, stack, visit);
        stack.pop();
        on_path[w] = false;
    }
}
