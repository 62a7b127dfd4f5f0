use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    CycleRange, EventRecord, InstanceTag, ObservabilityConfig, SimError, SimulationResult,
    WorkloadConfig,
};
use crate::flow_model::{Flow, Marking};
use crate::ids::LinkId;
use crate::spec_io::SystemSpec;

struct Initiator<'a> {
    component: &'a crate::flow_model::ComponentId,
    flows: Vec<&'a Flow>,
    remaining: u32,
    started: u32,
    in_flight: u32,
    next_start: Option<u64>,
}

struct Instance<'a> {
    tag: InstanceTag,
    owner: usize,
    flow: &'a Flow,
    marking: Marking,
    started_at: u64,
    next_fire: u64,
    /// Transition chosen but not yet fired (its link was busy).
    pending: Option<usize>,
}

struct Queue {
    link: LinkId,
    capacity: usize,
    items: VecDeque<EventRecord>,
    detected: u64,
    dropped: u64,
    max_occupancy: u64,
}

/// Round-robin output controller over the enabled links' queues.
struct Controller {
    queues: Vec<Queue>,
    index: BTreeMap<LinkId, usize>,
    cursor: usize,
    queued: usize,
    bandwidth: u32,
}

impl Controller {
    fn new(obs: &ObservabilityConfig) -> Self {
        let queues: Vec<Queue> = obs
            .enabled_links
            .iter()
            .map(|l| Queue {
                link: l.clone(),
                capacity: obs.queue_capacity[l] as usize,
                items: VecDeque::new(),
                detected: 0,
                dropped: 0,
                max_occupancy: 0,
            })
            .collect();
        let index = queues
            .iter()
            .enumerate()
            .map(|(i, q)| (q.link.clone(), i))
            .collect();
        Self {
            queues,
            index,
            cursor: 0,
            queued: 0,
            bandwidth: obs.port_bandwidth,
        }
    }

    fn detect(&mut self, record: &EventRecord) {
        let Some(&i) = self.index.get(&record.link) else {
            return;
        };
        let q = &mut self.queues[i];
        q.detected += 1;
        if q.items.len() < q.capacity {
            let mut observed = record.clone();
            observed.transition = None;
            q.items.push_back(observed);
            q.max_occupancy = q.max_occupancy.max(q.items.len() as u64);
            self.queued += 1;
        } else {
            q.dropped += 1;
        }
    }

    fn offload(&mut self, out: &mut Vec<EventRecord>) {
        let n = self.queues.len();
        let mut served = 0;
        let mut scan = self.cursor;
        while served < self.bandwidth && self.queued > 0 {
            let i = scan % n;
            scan = i + 1;
            if let Some(r) = self.queues[i].items.pop_front() {
                out.push(r);
                served += 1;
                self.queued -= 1;
                self.cursor = (i + 1) % n;
            }
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, range: CycleRange) -> u64 {
    rng.gen_range(range.min..=range.max)
}

/// Runs the workload and the tracing module; see the module docs for the
/// per-cycle pipeline.
pub fn run_simulation(
    spec: &SystemSpec,
    workload: &WorkloadConfig,
    obs: &ObservabilityConfig,
) -> Result<SimulationResult, SimError> {
    workload.check()?;
    obs.check(spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(workload.seed);
    let mut initiators: Vec<Initiator> = spec
        .initiators()
        .iter()
        .map(|i| Initiator {
            component: &i.component,
            flows: i.flows.iter().filter_map(|f| spec.flow(f)).collect(),
            remaining: workload.instances_per_initiator,
            started: 0,
            in_flight: 0,
            next_start: None,
        })
        .collect();
    for init in &mut initiators {
        init.next_start = Some(sample(&mut rng, workload.initiation_delay));
    }

    let mut controller = Controller::new(obs);
    let mut ground_truth = Vec::new();
    let mut observed = Vec::new();
    let mut active: Vec<Instance> = Vec::new();
    let mut tags = Vec::new();
    let mut cycle: u64 = 0;

    loop {
        let pending_starts = initiators.iter().any(|i| i.remaining > 0);
        if active.is_empty() && !pending_starts {
            break;
        }

        for (idx, init) in initiators.iter_mut().enumerate() {
            if init.next_start != Some(cycle) {
                continue;
            }
            let flow = *init.flows.choose(&mut rng).expect("initiator has flows");
            let tag = InstanceTag {
                initiator: init.component.clone(),
                seq: init.started,
                flow: flow.id().clone(),
            };
            tags.push(tag.clone());
            active.push(Instance {
                tag,
                owner: idx,
                flow,
                marking: flow.initial_marking().clone(),
                started_at: cycle,
                next_fire: cycle,
                pending: None,
            });
            init.started += 1;
            init.remaining -= 1;
            init.in_flight += 1;
            init.next_start = (init.remaining > 0
                && workload.max_outstanding.is_none_or(|m| init.in_flight < m))
            .then(|| cycle + sample(&mut rng, workload.initiation_delay));
        }

        let mut busy: BTreeSet<&LinkId> = BTreeSet::new();
        let emitted_from = ground_truth.len();
        let mut finished = Vec::new();
        for (slot, inst) in active.iter_mut().enumerate() {
            if inst.next_fire > cycle {
                continue;
            }
            let choice = match inst.pending {
                Some(c) => c,
                None => {
                    let enabled: Vec<usize> = inst
                        .flow
                        .transitions()
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.is_enabled(&inst.marking))
                        .map(|(i, _)| i)
                        .collect();
                    let c = *enabled.choose(&mut rng).ok_or_else(|| {
                        SimError::Config(format!("instance {} has no enabled transition", inst.tag))
                    })?;
                    inst.pending = Some(c);
                    c
                }
            };
            let t = &inst.flow.transitions()[choice];
            let link = spec
                .link_of(&t.event)
                .expect("validated spec maps every event");
            if !busy.insert(link) {
                inst.next_fire = cycle + 1;
                continue;
            }
            inst.marking = inst.flow.fire(&inst.marking, &t.id)?;
            inst.pending = None;
            ground_truth.push(EventRecord {
                cycle,
                event: t.event.clone(),
                link: link.clone(),
                tag: inst.tag.clone(),
                transition: Some(t.id.clone()),
            });
            if inst.flow.enabled_transitions(&inst.marking).is_empty() {
                finished.push(slot);
            } else {
                inst.next_fire = cycle + sample(&mut rng, workload.transition_latency);
            }
        }
        for slot in finished.into_iter().rev() {
            let done = active.remove(slot);
            let init = &mut initiators[done.owner];
            init.in_flight -= 1;
            if init.remaining > 0 && init.next_start.is_none() {
                init.next_start = Some(cycle + sample(&mut rng, workload.initiation_delay));
            }
        }

        for record in &ground_truth[emitted_from..] {
            if obs.selected_events.contains(&record.event) {
                controller.detect(record);
            }
        }
        controller.offload(&mut observed);
        cycle += 1;

        if let Some(stuck) = active
            .iter()
            .find(|i| cycle - i.started_at > workload.cycle_budget)
        {
            return Err(SimError::Livelock {
                tag: stuck.tag.clone(),
                budget: workload.cycle_budget,
            });
        }
    }

    if obs.drain {
        while controller.queued > 0 {
            controller.offload(&mut observed);
            cycle += 1;
        }
    }

    tags.sort();
    let mut result = SimulationResult {
        ground_truth,
        observed,
        detected: BTreeMap::new(),
        drops: BTreeMap::new(),
        residual: BTreeMap::new(),
        max_occupancy: BTreeMap::new(),
        selected_events: obs.selected_events.clone(),
        instances: tags,
        end_cycle: cycle,
    };
    for q in controller.queues {
        result.detected.insert(q.link.clone(), q.detected);
        result.drops.insert(q.link.clone(), q.dropped);
        result.residual.insert(q.link.clone(), q.items.len() as u64);
        result.max_occupancy.insert(q.link, q.max_occupancy);
    }
    Ok(result)
}
