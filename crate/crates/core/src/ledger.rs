//! Instrumented record of every cross-worker transfer.

use serde::Serialize;

use crate::graph::{Dist, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepTag {
    /// Source-side border labels relaxed across the cut into the other side.
    PeerRelax,
    /// Other-side border labels relaxed back into the source side.
    SourceRelax,
    /// The single transfer after refinement has converged.
    FinalPeerRelax,
    /// Border (sigma, delta) batch for one backward level.
    LevelHandoff,
    /// One level-synchronous exchange of the BSP baseline.
    Superstep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommEvent {
    pub source: VertexId,
    pub phase: Phase,
    pub step: StepTag,
    pub from: usize,
    pub to: usize,
    /// Iteration (forward refinement) or superstep index; 0 when unused.
    pub round: usize,
    /// Distance level the transfer belongs to, for level-driven transfers.
    pub level: Option<Dist>,
    pub payload_elems: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CommTotals {
    pub forward_events: usize,
    pub forward_elems: usize,
    pub backward_events: usize,
    pub backward_elems: usize,
}

impl CommTotals {
    pub fn events(&self) -> usize {
        self.forward_events + self.backward_events
    }

    pub fn elems(&self) -> usize {
        self.forward_elems + self.backward_elems
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CommLedger {
    events: Vec<CommEvent>,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: CommEvent) {
        self.events.push(e);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = CommEvent>) {
        self.events.extend(events);
    }

    pub fn events(&self) -> &[CommEvent] {
        &self.events
    }

    pub fn totals(&self) -> CommTotals {
        totals_of(self.events.iter())
    }

    pub fn totals_for(&self, source: VertexId) -> CommTotals {
        totals_of(self.events.iter().filter(|e| e.source == source))
    }
}

fn totals_of<'a>(events: impl Iterator<Item = &'a CommEvent>) -> CommTotals {
    let mut t = CommTotals::default();
    for e in events {
        match e.phase {
            Phase::Forward => {
                t.forward_events += 1;
                t.forward_elems += e.payload_elems;
            }
            Phase::Backward => {
                t.backward_events += 1;
                t.backward_elems += e.payload_elems;
            }
        }
    }
    t
}

/// Merges the event logs of two concurrently running workers into one
/// order that does not depend on thread scheduling.
pub fn merge_worker_events(mut a: Vec<CommEvent>, b: Vec<CommEvent>) -> Vec<CommEvent> {
    a.extend(b);
    a.sort_by_key(|e| {
        (
            e.phase,
            e.round,
            std::cmp::Reverse(e.level.unwrap_or(0)),
            e.from,
        )
    });
    a
}
