use serde::{Deserialize, Serialize};

use super::InstanceReconstruction;
use crate::tracing_sim::InstanceTag;

/// Time base for instance intervals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalClock {
    /// Position in the off-load stream, the only clock an external observer has.
    #[default]
    OffloadOrder,
    /// Cycle the monitor detected the event.
    EmissionCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    /// `first` starts before `second` starts and ends after it ends.
    Contains,
    /// Start and end orders agree and the intervals intersect.
    Overlaps,
    /// `first` ends strictly before `second` starts.
    Precedes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaving {
    pub first: InstanceTag,
    pub second: InstanceTag,
    pub relation: Relation,
}

/// Classifies two closed intervals, `a` being the one that starts first.
/// Shared endpoints count as overlapping.
pub(crate) fn classify(a: (u64, u64), b: (u64, u64)) -> Relation {
    if a.1 < b.0 {
        Relation::Precedes
    } else if a.0 < b.0 && a.1 > b.1 {
        Relation::Contains
    } else {
        Relation::Overlaps
    }
}

fn interval(r: &InstanceReconstruction, clock: IntervalClock) -> (u64, u64) {
    let times: Vec<u64> = match clock {
        IntervalClock::OffloadOrder => r.offload_positions.iter().map(|&p| p as u64).collect(),
        IntervalClock::EmissionCycle => r.observed_events.iter().map(|e| e.cycle).collect(),
    };
    let lo = times.iter().min().copied().unwrap_or(0);
    let hi = times.iter().max().copied().unwrap_or(0);
    (lo, hi)
}

/// Relation of every pair of completed instances, each pair reported once
/// with the earlier-starting instance first (ties broken by end, then tag).
pub fn interleavings(recons: &[InstanceReconstruction], clock: IntervalClock) -> Vec<Interleaving> {
    let mut done: Vec<(&InstanceTag, (u64, u64))> = recons
        .iter()
        .filter(|r| r.completed)
        .map(|r| (&r.tag, interval(r, clock)))
        .collect();
    done.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(y.0)));
    let mut out = Vec::new();
    for (i, (ta, a)) in done.iter().enumerate() {
        for (tb, b) in &done[i + 1..] {
            out.push(Interleaving {
                first: (*ta).clone(),
                second: (*tb).clone(),
                relation: classify(*a, *b),
            });
        }
    }
    out
}
