//! Hybrid two-worker betweenness centrality.
//!
//! A graph is split into two partitions, each owned by one worker. The
//! forward phase runs SSSP inside the source's partition, reconciles border
//! distances and path counts across the cut with precomputed border
//! matrices, and finishes with a relaxation on both workers. The backward
//! phase accumulates dependencies level by level, synchronizing only where
//! the shortest-path DAG crosses the cut. A level-synchronous baseline and
//! sequential oracles are included for comparison and validation.

pub mod backward;
pub mod border_matrix;
pub mod bsp;
pub mod engine;
pub mod error;
pub mod forward;
pub mod generators;
pub mod graph;
pub mod ledger;
pub mod oracle;
pub mod partition;
pub mod worker;

pub use backward::{accumulate_bc, backward_phase, BackwardReport, Strategy};
pub use border_matrix::{compute_border_matrices, estimate_memory, BorderMatrices, MemoryEstimate};
pub use bsp::run_bsp_baseline_source;
pub use engine::{
    pipeline_sources, run_bc, Mode, Prepared, RatioChoice, RunConfig, RunResult, SourceReport,
    SourceSelection,
};
pub use error::{Error, Result};
pub use forward::{forward_phase, ForwardReport};
pub use graph::{Dist, Graph, GraphStats, PathCount, VertexId, INF};
pub use ledger::{CommEvent, CommLedger, CommTotals};
pub use partition::{
    greedy_bipartition, identify_borders, import_partition, BorderSet, Partition, PartitionStats,
};
pub use worker::WorkerGraph;
