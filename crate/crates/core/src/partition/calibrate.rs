//! Split-ratio calibration from per-worker SSSP timings.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{initial_relax, Active, SourceState};
use crate::graph::{Graph, VertexId};
use crate::partition::{greedy_bipartition, identify_borders, SIDES};
use crate::worker::WorkerGraph;

pub const RATIO_MIN: f64 = 0.1;
pub const RATIO_MAX: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Timed runs per (source, worker); the minimum is kept.
    pub repetitions: usize,
    /// Test hook: worker `i` repeats its SSSP `slowdown[i]` times per run.
    pub slowdown: [u32; SIDES],
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            repetitions: 3,
            slowdown: [1, 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub ratio: f64,
    /// Mean seconds per source on each worker.
    pub seconds: [f64; SIDES],
    /// True when a zero timing forced the 0.5 fallback.
    pub fallback: bool,
    pub clamped: bool,
}

pub fn calibrate_ratio(g: &Graph, sources: &[VertexId]) -> Result<Calibration> {
    calibrate_ratio_with(g, sources, CalibrationOptions::default())
}

/// Times a half-graph SSSP on each worker of an even split and returns the
/// fraction of vertices worker 0 should own, proportional to its speed.
pub fn calibrate_ratio_with(
    g: &Graph,
    sources: &[VertexId],
    opts: CalibrationOptions,
) -> Result<Calibration> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one source".into()));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= g.num_vertices()) {
        return Err(Error::InvalidArgument(format!("source {s} is out of range")));
    }
    let p = greedy_bipartition(g, 0.5)?;
    let bs = identify_borders(g, &p);
    let workers = WorkerGraph::build_pair(g, &p, &bs);

    let mut seconds = [0.0; SIDES];
    for &s in sources {
        for side in 0..SIDES {
            let wg = &workers[side];
            let local = match wg.local(s) {
                Some(_) => s,
                None => wg.global((s % wg.num_vertices()) as u32),
            };
            let best = (0..opts.repetitions.max(1))
                .map(|_| time_sssp(wg, local, opts.slowdown[side].max(1)))
                .fold(f64::INFINITY, f64::min);
            seconds[side] += best;
        }
    }
    for t in &mut seconds {
        *t /= sources.len() as f64;
    }

    if seconds.iter().any(|&t| t <= 0.0) {
        log::warn!("calibration timing below timer resolution; using ratio 0.5");
        return Ok(Calibration {
            ratio: 0.5,
            seconds,
            fallback: true,
            clamped: false,
        });
    }
    let (r0, r1) = (1.0 / seconds[0], 1.0 / seconds[1]);
    let raw = r0 / (r0 + r1);
    let ratio = raw.clamp(RATIO_MIN, RATIO_MAX);
    Ok(Calibration {
        ratio,
        seconds,
        fallback: false,
        clamped: ratio != raw,
    })
}

fn time_sssp(wg: &WorkerGraph, s: VertexId, repeat: u32) -> f64 {
    let start = Instant::now();
    for _ in 0..repeat {
        let mut st = SourceState::new(wg);
        initial_relax(wg, &mut st, &[Active { vertex: s, dist: 0, sigma: 1 }])
            .expect("calibration source lies in this worker");
        std::hint::black_box(&st);
    }
    start.elapsed().as_secs_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn sources() -> Vec<VertexId> {
        (0..10).map(|i| i * 97).collect()
    }

    #[test]
    fn symmetric_workers_split_evenly() {
        let g = generators::grid(40, 40);
        let c = calibrate_ratio(&g, &sources()).unwrap();
        assert!((c.ratio - 0.5).abs() <= 0.1, "ratio {}", c.ratio);
    }

    #[test]
    fn slowed_worker_gets_less_work() {
        let g = generators::grid(40, 40);
        let opts = CalibrationOptions {
            repetitions: 5,
            slowdown: [1, 3],
        };
        let c = calibrate_ratio_with(&g, &sources(), opts).unwrap();
        assert!((c.ratio - 0.75).abs() <= 0.1, "ratio {}", c.ratio);
    }

    #[test]
    fn extreme_speed_is_clamped() {
        let g = generators::grid(20, 20);
        let opts = CalibrationOptions {
            repetitions: 3,
            slowdown: [1, 200],
        };
        let c = calibrate_ratio_with(&g, &[0], opts).unwrap();
        assert_eq!(c.ratio, RATIO_MAX);
        assert!(c.clamped);
    }

    #[test]
    fn bad_sources() {
        let g = generators::path(4);
        assert!(calibrate_ratio(&g, &[]).is_err());
        assert!(calibrate_ratio(&g, &[9]).is_err());
    }
}
