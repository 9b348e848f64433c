//! Two-way vertex partitions and their border structure.
//!
//! Side 0 is the "C" worker, side 1 the "G" worker. Border lists are kept in
//! ascending vertex order; that order indexes the border matrices and every
//! border message exchanged between workers.

mod calibrate;

use std::collections::BinaryHeap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dist, Graph, VertexId};

pub use calibrate::{calibrate_ratio, calibrate_ratio_with, Calibration, CalibrationOptions};

pub const SIDES: usize = 2;

/// The other side of a two-way partition.
#[inline]
pub fn other(side: usize) -> usize {
    1 - side
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<u8>,
    ratio: f64,
    degenerate: bool,
}

impl Partition {
    pub fn from_assignment(assignment: Vec<u8>, ratio: f64) -> Result<Self> {
        if let Some(v) = assignment.iter().position(|&p| p > 1) {
            return Err(Error::Format(format!(
                "vertex {v} assigned to partition {}",
                assignment[v]
            )));
        }
        let ones = assignment.iter().filter(|&&p| p == 1).count();
        let degenerate = ones == 0 || ones == assignment.len();
        Ok(Partition {
            assignment,
            ratio,
            degenerate,
        })
    }

    /// Partition whose ratio is the observed fraction of side 0.
    pub fn from_assignment_observed(assignment: Vec<u8>) -> Result<Self> {
        let n = assignment.len();
        let zeros = assignment.iter().filter(|&&p| p == 0).count();
        let ratio = if n == 0 { 0.0 } else { zeros as f64 / n as f64 };
        Self::from_assignment(assignment, ratio)
    }

    pub fn num_vertices(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn side(&self, v: VertexId) -> usize {
        self.assignment[v] as usize
    }

    pub fn assignment(&self) -> &[u8] {
        &self.assignment
    }

    /// Target (or, for imported partitions, observed) fraction of side 0.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// One side is empty.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn sizes(&self) -> [usize; SIDES] {
        let ones = self.assignment.iter().filter(|&&p| p == 1).count();
        [self.assignment.len() - ones, ones]
    }

    pub fn fraction0(&self) -> f64 {
        let n = self.assignment.len();
        if n == 0 {
            0.0
        } else {
            self.sizes()[0] as f64 / n as f64
        }
    }

    pub fn vertices(&self, side: usize) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.assignment.len()).filter(move |&v| self.side(v) == side)
    }

    pub fn cut_weight(&self, g: &Graph) -> Dist {
        g.edges()
            .filter(|&(u, v, _)| self.side(u) != self.side(v))
            .map(|(_, _, w)| w)
            .sum()
    }

    pub fn write(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        for &p in &self.assignment {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }
}

/// Reads a METIS-style partition file: line `i` holds the side of vertex `i`.
pub fn import_partition(path: impl AsRef<Path>, g: &Graph) -> Result<Partition> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_partition(&text, g.num_vertices())
}

pub fn parse_partition(text: &str, num_vertices: usize) -> Result<Partition> {
    let mut assignment = Vec::with_capacity(num_vertices);
    for (idx, line) in text.lines().enumerate() {
        let tok = line.trim();
        if tok.is_empty() {
            continue;
        }
        let p: u8 = match tok {
            "0" => 0,
            "1" => 1,
            _ => {
                return Err(Error::Format(format!(
                    "line {}: partition id {tok:?} not in {{0,1}}",
                    idx + 1
                )))
            }
        };
        assignment.push(p);
    }
    if assignment.len() != num_vertices {
        return Err(Error::Format(format!(
            "partition file has {} entries, graph has {num_vertices} vertices",
            assignment.len()
        )));
    }
    let part = Partition::from_assignment_observed(assignment)?;
    if part.is_degenerate() {
        log::warn!("imported partition is degenerate: one side is empty");
    }
    Ok(part)
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    pub seed: u64,
    pub restarts: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            seed: 0x5eed_b15e,
            restarts: 8,
        }
    }
}

/// Balanced-ish bipartition by greedy graph growing.
///
/// Side 0 is grown from a random seed vertex, always absorbing the frontier
/// vertex with the best gain (edge weight into the region minus edge weight
/// out of it), until it holds `round(ratio * n)` vertices. The best of
/// several seeded restarts by cut weight wins.
pub fn greedy_bipartition(g: &Graph, ratio: f64) -> Result<Partition> {
    greedy_bipartition_with(g, ratio, GreedyOptions::default())
}

pub fn greedy_bipartition_with(g: &Graph, ratio: f64, opts: GreedyOptions) -> Result<Partition> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot bipartition a graph with {n} vertices"
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} must lie strictly between 0 and 1"
        )));
    }
    let target = ((ratio * n as f64).round() as usize).clamp(1, n - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Dist, Vec<u8>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let start = rng.gen_range(0..n);
        let assignment = grow_region(g, start, target, &mut rng);
        let part = Partition::from_assignment(assignment, ratio)?;
        let cut = part.cut_weight(g);
        if best.as_ref().is_none_or(|(c, _)| cut < *c) {
            best = Some((cut, part.assignment));
        }
    }
    let (_, assignment) = best.expect("at least one restart");
    Partition::from_assignment(assignment, ratio)
}

fn grow_region(g: &Graph, start: VertexId, target: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = g.num_vertices();
    let mut assignment = vec![1u8; n];
    let mut inside = vec![0i128; n];
    let total: Vec<i128> = (0..n)
        .map(|v| g.neighbors(v).map(|(_, w)| w as i128).sum())
        .collect();

    // Max-heap on (gain, Reverse(id)); stale entries are skipped on pop.
    let mut heap: BinaryHeap<(i128, std::cmp::Reverse<VertexId>)> = BinaryHeap::new();
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(rng);
    let mut restart_cursor = 0;

    let mut size = 0;
    let mut next = Some(start);
    while size < target {
        let v = match next.take() {
            Some(v) => v,
            None => loop {
                match heap.pop() {
                    Some((gain, std::cmp::Reverse(v))) => {
                        if assignment[v] == 1 && gain == 2 * inside[v] - total[v] {
                            break v;
                        }
                    }
                    None => {
                        // Region's component is exhausted; jump to a fresh vertex.
                        while assignment[order[restart_cursor]] == 0 {
                            restart_cursor += 1;
                        }
                        break order[restart_cursor];
                    }
                }
            },
        };
        assignment[v] = 0;
        size += 1;
        for (u, w) in g.neighbors(v) {
            if assignment[u] == 1 {
                inside[u] += w as i128;
                heap.push((2 * inside[u] - total[u], std::cmp::Reverse(u)));
            }
        }
    }
    assignment
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CutEdge {
    pub from: VertexId,
    pub to: VertexId,
    pub weight: Dist,
}

const NO_BORDER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct BorderSet {
    borders: [Vec<VertexId>; SIDES],
    /// Both orientations of every cut edge, sorted by `(from, to)`.
    cut_edges: Vec<CutEdge>,
    border_index: Vec<u32>,
}

impl BorderSet {
    pub fn borders(&self, side: usize) -> &[VertexId] {
        &self.borders[side]
    }

    pub fn cut_edges(&self) -> &[CutEdge] {
        &self.cut_edges
    }

    /// Cut arcs whose tail lies on `side`.
    pub fn cut_edges_from<'a>(&'a self, side: usize, p: &'a Partition) -> impl Iterator<Item = &'a CutEdge> + 'a {
        self.cut_edges
            .iter()
            .filter(move |c| p.side(c.from) == side)
    }

    /// Position of `v` in its side's border list.
    pub fn border_index(&self, v: VertexId) -> Option<usize> {
        match self.border_index[v] {
            NO_BORDER => None,
            i => Some(i as usize),
        }
    }

    pub fn is_border(&self, v: VertexId) -> bool {
        self.border_index[v] != NO_BORDER
    }

    pub fn num_undirected_cut_edges(&self) -> usize {
        self.cut_edges.len() / 2
    }
}

pub fn identify_borders(g: &Graph, p: &Partition) -> BorderSet {
    let n = g.num_vertices();
    let mut is_border = vec![false; n];
    let mut cut_edges = Vec::new();
    for a in 0..g.num_arcs() {
        let (u, v) = (g.arc_src()[a], g.arc_dst()[a]);
        if p.side(u) != p.side(v) {
            is_border[u] = true;
            cut_edges.push(CutEdge {
                from: u,
                to: v,
                weight: g.arc_weight()[a],
            });
        }
    }
    // Arcs are already sorted by (src, dst).
    let mut borders: [Vec<VertexId>; SIDES] = [Vec::new(), Vec::new()];
    let mut border_index = vec![NO_BORDER; n];
    for v in 0..n {
        if is_border[v] {
            let side = p.side(v);
            border_index[v] = borders[side].len() as u32;
            borders[side].push(v);
        }
    }
    BorderSet {
        borders,
        cut_edges,
        border_index,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionStats {
    pub ratio: f64,
    pub sizes: [usize; SIDES],
    pub borders: [usize; SIDES],
    pub cut_edges: usize,
    pub cut_weight: Dist,
    pub degenerate: bool,
}

impl PartitionStats {
    pub fn new(g: &Graph, p: &Partition, bs: &BorderSet) -> Self {
        PartitionStats {
            ratio: p.ratio(),
            sizes: p.sizes(),
            borders: [bs.borders(0).len(), bs.borders(1).len()],
            cut_edges: bs.num_undirected_cut_edges(),
            cut_weight: p.cut_weight(g),
            degenerate: p.is_degenerate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    /// Minimum cut weight over all splits with `k` vertices on side 0.
    fn exhaustive_min_cut(g: &Graph, k: usize) -> Dist {
        let n = g.num_vertices();
        (0u32..1 << n)
            .filter(|mask| n - mask.count_ones() as usize == k)
            .map(|mask| {
                let a = (0..n).map(|v| ((mask >> v) & 1) as u8).collect();
                Partition::from_assignment(a, 0.5).unwrap().cut_weight(g)
            })
            .min()
            .unwrap()
    }

    #[test]
    fn p4_halves() {
        let g = generators::path(4);
        let p = greedy_bipartition(&g, 0.5).unwrap();
        assert_eq!(p.sizes(), [2, 2]);
        assert_eq!(p.cut_weight(&g), 1);
        assert_eq!(exhaustive_min_cut(&g, 2), 1);
        assert!(p.side(0) == p.side(1) && p.side(2) == p.side(3));
    }

    #[test]
    fn diamond_any_balanced_split_cuts_two() {
        let g = generators::diamond();
        assert_eq!(exhaustive_min_cut(&g, 2), 2);
        let p = greedy_bipartition(&g, 0.5).unwrap();
        assert_eq!(p.cut_weight(&g), 2);
    }

    #[test]
    fn star_hub_side() {
        let g = generators::star(3);
        let p = greedy_bipartition(&g, 0.5).unwrap();
        assert!(p.cut_weight(&g) >= 1);
        assert_eq!(p.cut_weight(&g), exhaustive_min_cut(&g, 2));
        let hub = p.side(0);
        assert!(p.vertices(hub).count() >= 1);
    }

    #[test]
    fn ratio_hit_within_one_vertex() {
        let g = generators::grid(7, 9);
        for ratio in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let p = greedy_bipartition(&g, ratio).unwrap();
            let diff = (p.sizes()[0] as f64 - ratio * 63.0).abs();
            assert!(diff <= 1.0, "ratio {ratio}: sizes {:?}", p.sizes());
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(greedy_bipartition(&generators::path(1), 0.5).is_err());
        assert!(greedy_bipartition(&generators::path(4), 0.0).is_err());
        assert!(greedy_bipartition(&generators::path(4), 1.0).is_err());
    }

    #[test]
    fn import_files() {
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
        assert_eq!(p.ratio(), 0.5);
        assert!(!p.is_degenerate());

        let p = parse_partition("0\n0\n0\n0\n", 4).unwrap();
        assert!(p.is_degenerate());

        assert!(matches!(parse_partition("0\n2\n1\n1\n", 4), Err(Error::Format(_))));
        assert!(matches!(parse_partition("0\n1\n", 4), Err(Error::Format(_))));
    }

    #[test]
    fn borders_of_p4() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let bs = identify_borders(&g, &p);
        assert_eq!(bs.borders(0), &[1]);
        assert_eq!(bs.borders(1), &[2]);
        assert_eq!(bs.num_undirected_cut_edges(), 1);
        assert!(bs.cut_edges().contains(&CutEdge { from: 1, to: 2, weight: 1 }));
        assert!(bs.cut_edges().contains(&CutEdge { from: 2, to: 1, weight: 1 }));
    }

    #[test]
    fn borders_of_empty_side() {
        let g = generators::path(4);
        let p = parse_partition("0\n0\n0\n0\n", 4).unwrap();
        let bs = identify_borders(&g, &p);
        assert!(bs.borders(0).is_empty() && bs.borders(1).is_empty());
        assert!(bs.cut_edges().is_empty());
    }

    #[test]
    fn borders_of_diamond() {
        let g = generators::diamond();
        let p = parse_partition("0\n0\n1\n1\n", 4).unwrap();
        let bs = identify_borders(&g, &p);
        assert_eq!(bs.borders(0), &[0, 1]);
        assert_eq!(bs.borders(1), &[2, 3]);
        let undirected: Vec<(usize, usize)> = bs
            .cut_edges()
            .iter()
            .filter(|c| c.from < c.to)
            .map(|c| (c.from, c.to))
            .collect();
        assert_eq!(undirected, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn greedy_beats_random_balanced_splits() {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut greedy_total = 0;
        let mut random_total = 0;
        for _ in 0..20 {
            let g = generators::random_connected(&mut rng, 60, 40, 5);
            greedy_total += greedy_bipartition(&g, 0.5).unwrap().cut_weight(&g);
            let mut a: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
            a.shuffle(&mut rng);
            random_total += Partition::from_assignment(a, 0.5).unwrap().cut_weight(&g);
        }
        assert!(greedy_total <= random_total, "{greedy_total} > {random_total}");
    }
}
