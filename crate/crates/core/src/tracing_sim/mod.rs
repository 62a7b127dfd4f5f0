//! Workload execution and communication tracing.
//!
//! [`run_simulation`] executes a seeded random workload over a
//! [`SystemSpec`], records every emitted event (the ground truth), and models
//! the tracing module: one monitor and bounded FIFO per enabled link, and an
//! output controller that off-loads up to `port_bandwidth` queued events per
//! cycle by round-robin scan over the queues.
//!
//! Each cycle runs four steps in order:
//!
//! 1. initiators whose delay expired start a new flow instance;
//! 2. due instances fire one transition each, emitting its event on the
//!    event's link (a link carries at most one event per cycle, later
//!    emitters retry next cycle);
//! 3. monitors of enabled links enqueue emitted selected events, dropping the
//!    arriving event when the queue is full;
//! 4. the controller dequeues up to `port_bandwidth` events.
//!
//! All randomness comes from a ChaCha8 generator (`rand_chacha::ChaCha8Rng`)
//! seeded with `seed_from_u64(workload.seed)`. Draws happen in a fixed order,
//! so a `(spec, workload, observability)` triple always produces the same
//! result.

mod engine;
mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{ComponentId, Event, FlowError, FlowId, TransitionId};
use crate::ids::LinkId;
use crate::spec_io::SystemSpec;

pub use engine::run_simulation;
pub use export::{write_ground_truth_csv, write_observed_csv, SimulationSummary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("livelock: instance {tag} still running after {budget} cycles")]
    Livelock { tag: InstanceTag, budget: u64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Identifies one flow instance: the `seq`-th instance started by `initiator`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceTag {
    pub initiator: ComponentId,
    pub seq: u32,
    pub flow: FlowId,
}

impl fmt::Display for InstanceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}:{}", self.initiator, self.seq, self.flow)
    }
}

/// One emitted (ground truth) or off-loaded (observed) event.
///
/// `cycle` is the cycle the event was emitted and detected. Observed records
/// keep it as the monitor timestamp; their off-load order is their position
/// in [`SimulationResult::observed`]. `transition` is only known for ground
/// truth records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub cycle: u64,
    pub event: Event,
    pub link: LinkId,
    pub tag: InstanceTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<TransitionId>,
}

/// Inclusive range of cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRange {
    pub min: u64,
    pub max: u64,
}

impl CycleRange {
    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    fn check(&self, name: &str) -> Result<(), SimError> {
        if self.min < 1 || self.min > self.max {
            return Err(SimError::Config(format!(
                "{name} range [{}, {}] needs 1 <= min <= max",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub instances_per_initiator: u32,
    /// Delay before an initiator starts its next instance.
    pub initiation_delay: CycleRange,
    /// Delay between consecutive firings inside one instance.
    pub transition_latency: CycleRange,
    /// Instances an initiator may have in flight at once. Unlimited by
    /// default: initiators start instances on their own schedule, whether or
    /// not earlier ones finished. With a limit, an initiator at the limit
    /// draws its next delay when one of its instances completes.
    pub max_outstanding: Option<u32>,
    /// Cycles an instance may stay active before the run is aborted.
    pub cycle_budget: u64,
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            instances_per_initiator: 100,
            initiation_delay: CycleRange::new(1, 10),
            transition_latency: CycleRange::new(1, 5),
            max_outstanding: None,
            cycle_budget: 1_000_000,
            seed: 0,
        }
    }
}

impl WorkloadConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), SimError> {
        if self.instances_per_initiator == 0 {
            return Err(SimError::Config(
                "instances_per_initiator must be positive".into(),
            ));
        }
        if self.max_outstanding == Some(0) {
            return Err(SimError::Config("max_outstanding must be positive".into()));
        }
        self.initiation_delay.check("initiation_delay")?;
        self.transition_latency.check("transition_latency")
    }
}

/// Which events are traced and how the tracing module is provisioned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservabilityConfig {
    pub selected_events: BTreeSet<Event>,
    pub enabled_links: BTreeSet<LinkId>,
    pub queue_capacity: BTreeMap<LinkId, u32>,
    /// Events the trace port can off-load per cycle.
    pub port_bandwidth: u32,
    /// Keep off-loading after the workload ends until every queue is empty.
    pub drain: bool,
}

pub const DEFAULT_PORT_BANDWIDTH: u32 = 1;

impl ObservabilityConfig {
    /// Selects `events`, enabling exactly their links, each with `capacity`.
    pub fn uniform(
        spec: &SystemSpec,
        events: BTreeSet<Event>,
        capacity: u32,
    ) -> Result<Self, SimError> {
        let enabled = links_of(spec, &events)?;
        let queue_capacity = enabled.iter().map(|l| (l.clone(), capacity)).collect();
        Ok(Self {
            selected_events: events,
            enabled_links: enabled,
            queue_capacity,
            port_bandwidth: DEFAULT_PORT_BANDWIDTH,
            drain: true,
        })
    }

    /// Selects `events` with explicit capacities; entries for links that end
    /// up disabled are discarded.
    pub fn with_capacities(
        spec: &SystemSpec,
        events: BTreeSet<Event>,
        capacities: &BTreeMap<LinkId, u32>,
    ) -> Result<Self, SimError> {
        let enabled = links_of(spec, &events)?;
        let mut queue_capacity = BTreeMap::new();
        for l in &enabled {
            let cap = capacities.get(l).ok_or_else(|| {
                SimError::Config(format!("no queue capacity for enabled link {l}"))
            })?;
            queue_capacity.insert(l.clone(), *cap);
        }
        Ok(Self {
            selected_events: events,
            enabled_links: enabled,
            queue_capacity,
            port_bandwidth: DEFAULT_PORT_BANDWIDTH,
            drain: true,
        })
    }

    /// Every event of every flow, `capacity` per link.
    pub fn full(spec: &SystemSpec, capacity: u32) -> Self {
        Self::uniform(spec, spec.events(), capacity).expect("spec events are mapped")
    }

    pub fn check(&self, spec: &SystemSpec) -> Result<(), SimError> {
        let all = spec.events();
        if let Some(e) = self.selected_events.iter().find(|e| !all.contains(*e)) {
            return Err(SimError::Config(format!(
                "selected event {e} belongs to no flow"
            )));
        }
        let derived = links_of(spec, &self.selected_events)?;
        if derived != self.enabled_links {
            return Err(SimError::Config(
                "enabled links must be exactly the links of the selected events".into(),
            ));
        }
        for l in &self.enabled_links {
            match self.queue_capacity.get(l) {
                Some(c) if *c > 0 => {}
                _ => {
                    return Err(SimError::Config(format!(
                        "link {l} needs a positive queue capacity"
                    )))
                }
            }
        }
        if let Some(l) = self
            .queue_capacity
            .keys()
            .find(|l| !self.enabled_links.contains(*l))
        {
            return Err(SimError::Config(format!(
                "queue capacity given for disabled link {l}"
            )));
        }
        if self.port_bandwidth == 0 {
            return Err(SimError::Config("port_bandwidth must be positive".into()));
        }
        Ok(())
    }
}

fn links_of(spec: &SystemSpec, events: &BTreeSet<Event>) -> Result<BTreeSet<LinkId>, SimError> {
    events
        .iter()
        .map(|e| {
            spec.link_of(e)
                .cloned()
                .ok_or_else(|| SimError::Config(format!("event {e} has no link")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Every emitted event, in emission order.
    pub ground_truth: Vec<EventRecord>,
    /// Off-loaded events in off-load order.
    pub observed: Vec<EventRecord>,
    /// Per enabled link: events the monitor detected.
    pub detected: BTreeMap<LinkId, u64>,
    /// Per enabled link: detected events discarded because the queue was full.
    pub drops: BTreeMap<LinkId, u64>,
    /// Per enabled link: events still queued when the run stopped (always
    /// zero when draining).
    pub residual: BTreeMap<LinkId, u64>,
    pub max_occupancy: BTreeMap<LinkId, u64>,
    pub selected_events: BTreeSet<Event>,
    /// Distinct instance tags that ran, in tag order.
    pub instances: Vec<InstanceTag>,
    /// First cycle after the run, including the drain.
    pub end_cycle: u64,
}

impl SimulationResult {
    pub fn total_drops(&self) -> u64 {
        self.drops.values().sum()
    }

    /// Links whose monitor lost at least one event, to drops or truncation.
    pub fn lossy_links(&self) -> BTreeSet<LinkId> {
        self.drops
            .iter()
            .chain(self.residual.iter())
            .filter(|(_, n)| **n > 0)
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// Enabled links that lost nothing.
    pub fn lossless_links(&self) -> BTreeSet<LinkId> {
        let lossy = self.lossy_links();
        self.detected
            .keys()
            .filter(|l| !lossy.contains(*l))
            .cloned()
            .collect()
    }
}

/// Per-cycle histogram of monitor detections: for every cycle with at least
/// one detection, the `(link, event)` pairs detected in it.
pub fn event_generation_trace(result: &SimulationResult) -> BTreeMap<u64, Vec<(LinkId, Event)>> {
    let mut out: BTreeMap<u64, Vec<(LinkId, Event)>> = BTreeMap::new();
    for r in result
        .ground_truth
        .iter()
        .filter(|r| result.selected_events.contains(&r.event))
    {
        out.entry(r.cycle)
            .or_default()
            .push((r.link.clone(), r.event.clone()));
    }
    out
}
