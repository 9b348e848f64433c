//! Iterative refinement of border labels across the cut.
//!
//! Two labels are kept per border. The arrival label counts shortest paths
//! whose last hop is a cut edge; the full label counts all shortest paths.
//! A full label is the initial (intra-partition) label combined with every
//! arrival label pushed through the border matrix, so each path is counted
//! once, at the last border where it crossed into the side. Labels are
//! rebuilt from scratch each iteration, which keeps ties exact without
//! per-pair bookkeeping.

use serde::Serialize;

use crate::border_matrix::BorderMatrices;
use crate::error::{Error, Result};
use crate::graph::{dist_add, Dist, PathCount, INF};
use crate::ledger::StepTag;
use crate::partition::{other, SIDES};
use crate::worker::WorkerGraph;

/// Current best distance and path count from the source for every border,
/// in canonical border order, one vector per side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BorderFrontier {
    pub dist: [Vec<Dist>; SIDES],
    pub sigma: [Vec<PathCount>; SIDES],
}

impl BorderFrontier {
    pub fn unreached(workers: &[WorkerGraph; SIDES]) -> Self {
        BorderFrontier {
            dist: [vec![INF; workers[0].num_borders()], vec![INF; workers[1].num_borders()]],
            sigma: [vec![0; workers[0].num_borders()], vec![0; workers[1].num_borders()]],
        }
    }

    pub fn label(&self, side: usize) -> Labels {
        Labels {
            dist: self.dist[side].clone(),
            sigma: self.sigma[side].clone(),
        }
    }

    fn set(&mut self, side: usize, l: Labels) {
        self.dist[side] = l.dist;
        self.sigma[side] = l.sigma;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub dist: Vec<Dist>,
    pub sigma: Vec<PathCount>,
}

impl Labels {
    fn unreached(b: usize) -> Self {
        Labels {
            dist: vec![INF; b],
            sigma: vec![0; b],
        }
    }

    fn finite(&self) -> usize {
        self.dist.iter().filter(|&&d| d != INF).count()
    }

    #[inline]
    fn offer(&mut self, j: usize, d: Dist, s: PathCount) {
        if d == INF || s == 0 {
            return;
        }
        if d < self.dist[j] {
            self.dist[j] = d;
            self.sigma[j] = s;
        } else if d == self.dist[j] {
            self.sigma[j] = self.sigma[j].saturating_add(s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Transfer {
    pub step: StepTag,
    pub from: usize,
    pub to: usize,
    pub round: usize,
    pub elems: usize,
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub frontier: BorderFrontier,
    pub iterations: usize,
    pub comm_events: usize,
    pub transfers: Vec<Transfer>,
    /// Source-side border distances after each iteration.
    pub history: Vec<Vec<Dist>>,
    pub sigma_overflow: bool,
}

/// Arrival labels on `receiver`'s borders from the sender's full labels.
fn cut_relax(receiver: &WorkerGraph, sender: &Labels) -> Labels {
    let mut a = Labels::unreached(receiver.num_borders());
    for c in receiver.cuts() {
        let i = c.remote_border as usize;
        a.offer(
            c.local_border as usize,
            dist_add(sender.dist[i], c.weight),
            sender.sigma[i],
        );
    }
    a
}

/// `init ⊕ (arrival ⊗ matrices)`: min over distance, counts multiplied
/// along a border-matrix hop and summed over equal minima.
fn closure(init: Option<&Labels>, arrival: &Labels, bm: &BorderMatrices, side: usize) -> Labels {
    let b = bm.num_borders(side);
    let mut f = init.cloned().unwrap_or_else(|| Labels::unreached(b));
    let (md, ms) = (&bm.dist[side], &bm.sigma[side]);
    for i in 0..b {
        let (ad, asg) = (arrival.dist[i], arrival.sigma[i]);
        if ad == INF {
            continue;
        }
        let (drow, srow) = (md.row(i), ms.row(i));
        for j in 0..b {
            let d = dist_add(ad, drow[j]);
            if d <= f.dist[j] {
                f.offer(j, d, asg.saturating_mul(srow[j]));
            }
        }
    }
    f
}

/// Refines border labels starting from the source side's Step-1 labels in
/// `seed`. Stops when an iteration leaves the source-side full labels
/// unchanged, then performs one last transfer to the other side.
pub fn refine_border_distances(
    workers: &[WorkerGraph; SIDES],
    bm: &BorderMatrices,
    source_side: usize,
    seed: &BorderFrontier,
) -> Result<Refinement> {
    let s = source_side;
    let t = other(s);
    let init = seed.label(s);
    let mut out = Refinement {
        frontier: BorderFrontier::unreached(workers),
        iterations: 0,
        comm_events: 0,
        transfers: Vec::new(),
        history: Vec::new(),
        sigma_overflow: false,
    };
    out.frontier.set(s, init.clone());
    if init.finite() == 0 {
        return Ok(out);
    }

    let limit = workers[s].num_borders().max(workers[t].num_borders()) + 1;
    let mut full_s = init.clone();
    loop {
        out.iterations += 1;
        if out.iterations > limit {
            return Err(Error::Contract(format!(
                "border refinement did not converge within {limit} iterations"
            )));
        }
        let round = out.iterations;

        out.transfers.push(Transfer {
            step: StepTag::PeerRelax,
            from: s,
            to: t,
            round,
            elems: full_s.finite(),
        });
        let arrival_t = cut_relax(&workers[t], &full_s);
        let full_t = closure(None, &arrival_t, bm, t);

        out.transfers.push(Transfer {
            step: StepTag::SourceRelax,
            from: t,
            to: s,
            round,
            elems: full_t.finite(),
        });
        let arrival_s = cut_relax(&workers[s], &full_t);
        let next_s = closure(Some(&init), &arrival_s, bm, s);
        out.history.push(next_s.dist.clone());

        let stable = next_s == full_s;
        full_s = next_s;
        if stable {
            break;
        }
    }

    out.transfers.push(Transfer {
        step: StepTag::FinalPeerRelax,
        from: s,
        to: t,
        round: out.iterations,
        elems: full_s.finite(),
    });
    let arrival_t = cut_relax(&workers[t], &full_s);
    let full_t = closure(None, &arrival_t, bm, t);

    out.sigma_overflow = full_s.sigma.iter().chain(&full_t.sigma).any(|&x| x == PathCount::MAX);
    out.frontier.set(s, full_s);
    out.frontier.set(t, full_t);
    out.comm_events = out.transfers.len();
    Ok(out)
}
