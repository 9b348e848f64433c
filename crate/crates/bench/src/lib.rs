//! Shared fixtures for the benchmarks.

use hybrid_bc::engine::Prepared;
use hybrid_bc::generators;
use hybrid_bc::{Graph, Mode, Partition, RunConfig, SourceSelection};

/// Square grid split into top and bottom halves.
pub fn split_grid(side: usize) -> (Graph, Partition) {
    let g = generators::grid(side, side);
    let a = (0..side * side).map(|v| (v / side >= side / 2) as u8).collect();
    let p = Partition::from_assignment(a, 0.5).expect("two sides");
    (g, p)
}

/// Path split into two halves.
pub fn split_path(n: usize) -> (Graph, Partition) {
    let g = generators::path(n);
    let a = (0..n).map(|v| (v >= n / 2) as u8).collect();
    let p = Partition::from_assignment(a, 0.5).expect("two sides");
    (g, p)
}

pub fn config(mode: Mode, p: &Partition, sources: Vec<usize>) -> RunConfig {
    RunConfig {
        sources: SourceSelection::Listed(sources),
        mode,
        partition: Some(p.clone()),
        threads_per_worker: Some(1),
        ..Default::default()
    }
}

pub fn prepare(g: &Graph, p: &Partition, mode: Mode) -> Prepared {
    Prepared::new(g, &config(mode, p, vec![0]), &[0]).expect("valid fixture")
}
