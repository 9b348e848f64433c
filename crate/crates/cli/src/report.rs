use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use hybrid_bc::engine::Timing;
use hybrid_bc::partition::Calibration;
use hybrid_bc::{CommTotals, GraphStats, Mode, PartitionStats, RunResult, SourceReport, VertexId};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Ranked {
    pub vertex: VertexId,
    pub bc: f64,
}

/// Everything except `generated_at` and `timing` is a pure function of the
/// flags, so two runs with the same seed differ only in those two fields.
#[derive(Debug, Serialize)]
pub struct ReportFile<'a> {
    pub schema_version: u32,
    pub generated_at: u64,
    pub graph: &'a str,
    pub mode: Mode,
    pub sources: &'a [VertexId],
    pub graph_stats: &'a GraphStats,
    pub partition_stats: &'a PartitionStats,
    pub calibration: Option<Calibration>,
    pub bm_cache_hit: bool,
    pub pipelined_overlaps: usize,
    pub sigma_overflow: bool,
    pub comm_totals: CommTotals,
    pub per_source: &'a [SourceReport],
    pub bc_top_k: Vec<Ranked>,
    pub bc: &'a [f64],
    pub timing: Timing,
}

impl<'a> ReportFile<'a> {
    pub fn new(graph: &'a str, r: &'a RunResult, top_k: usize) -> Self {
        ReportFile {
            schema_version: SCHEMA_VERSION,
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            graph,
            mode: r.mode,
            sources: &r.sources,
            graph_stats: &r.graph_stats,
            partition_stats: &r.partition_stats,
            calibration: r.calibration,
            bm_cache_hit: r.bm_cache_hit,
            pipelined_overlaps: r.pipelined_overlaps,
            sigma_overflow: r.sigma_overflow,
            comm_totals: r.comm_totals(),
            per_source: &r.per_source,
            bc_top_k: top_k_of(&r.bc, top_k),
            bc: &r.bc,
            timing: r.timing,
        }
    }
}

/// Highest scores first; ties go to the smaller vertex id.
pub fn top_k_of(bc: &[f64], k: usize) -> Vec<Ranked> {
    let mut order: Vec<VertexId> = (0..bc.len()).collect();
    order.sort_by(|&a, &b| bc[b].total_cmp(&bc[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|v| Ranked { vertex: v, bc: bc[v] })
        .collect()
}

/// One row per source with the forward/backward split of the ledger.
pub fn write_csv(r: &RunResult, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "source,partition,iterations,supersteps,forward_events,forward_elems,\
         backward_events,backward_elems,sync_events,comm_bytes,dag_cut_arcs"
    )?;
    for s in &r.per_source {
        let t = r.ledger.totals_for(s.source);
        let supersteps = s.forward.supersteps.map_or(String::new(), |x| x.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.source,
            s.partition,
            s.forward.iterations,
            supersteps,
            t.forward_events,
            t.forward_elems,
            t.backward_events,
            t.backward_elems,
            s.backward.sync_events,
            s.backward.comm_bytes,
            s.dag_cut_arcs
        )?;
    }
    let t = r.comm_totals();
    writeln!(
        out,
        "total,,,,{},{},{},{},,,",
        t.forward_events, t.forward_elems, t.backward_events, t.backward_elems
    )
}
