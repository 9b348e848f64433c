#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hybrid_bc::generators;
use hybrid_bc::{greedy_bipartition, Graph, Partition, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Balanced,
    SeventyThirty,
    RandomBalanced,
}

pub struct Fixture {
    pub name: String,
    pub graph: Graph,
    pub partition: Partition,
    pub sources: Vec<VertexId>,
}

pub fn split(g: &Graph, kind: Split, rng: &mut ChaCha8Rng) -> Partition {
    match kind {
        Split::Balanced => greedy_bipartition(g, 0.5).unwrap(),
        Split::SeventyThirty => greedy_bipartition(g, 0.7).unwrap(),
        Split::RandomBalanced => {
            let n = g.num_vertices();
            let mut a: Vec<u8> = (0..n).map(|v| (v >= n / 2) as u8).collect();
            a.shuffle(rng);
            Partition::from_assignment(a, 0.5).unwrap()
        }
    }
}

/// Seeded random connected graphs: the first `small` have at most 12
/// vertices, the rest up to `max_n`. Weights alternate between unit and
/// `1..=10`; partitions cycle through the three split kinds.
pub fn corpus(count: usize, small: usize, max_n: usize, seed: u64) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [Split::Balanced, Split::SeventyThirty, Split::RandomBalanced];
    (0..count)
        .map(|i| {
            let n = if i < small {
                rng.gen_range(6..=12)
            } else {
                rng.gen_range(6..=max_n)
            };
            let extra = rng.gen_range(0..=n);
            let max_w = if i % 2 == 0 { 1 } else { 10 };
            let graph = generators::random_connected(&mut rng, n, extra, max_w);
            let kind = kinds[i % kinds.len()];
            let partition = split(&graph, kind, &mut rng);
            let sources = rand::seq::index::sample(&mut rng, n, 5.min(n)).into_vec();
            Fixture {
                name: format!("#{i} n={n} m={} w<={max_w} {kind:?}", graph.num_edges()),
                graph,
                partition,
                sources,
            }
        })
        .collect()
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn halves(n: usize) -> Partition {
    Partition::from_assignment((0..n).map(|v| (v >= n / 2) as u8).collect(), 0.5).unwrap()
}

/// Grid split between row `rows / 2 - 1` and row `rows / 2`.
pub fn grid_rows_split(rows: usize, cols: usize) -> Partition {
    Partition::from_assignment(
        (0..rows * cols).map(|v| (v / cols >= rows / 2) as u8).collect(),
        0.5,
    )
    .unwrap()
}
