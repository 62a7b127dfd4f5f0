//! Random well-formed flows for property tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use flowscope_core::flow_model::{
    ComponentId, Event, Flow, FlowId, Marking, PlaceId, Transition, TransitionId,
};
use flowscope_core::ids::LinkId;
use flowscope_core::spec_io::{Initiator, Link, SystemSpec, Topology};
use proptest::prelude::*;

pub const EVENTS: [&str; 12] = [
    "A:B:req", "B:A:resp", "B:C:req", "C:B:resp", "A:C:ping", "C:A:pong", "C:D:fwd", "D:C:ack",
    "D:A:irq", "A:D:clr", "B:D:snp", "D:B:data",
];

pub fn event(i: usize) -> Event {
    EVENTS[i % EVENTS.len()].parse().unwrap()
}

/// Series-parallel structure of a flow body.
#[derive(Debug, Clone)]
pub enum Block {
    Step(usize),
    Seq(Vec<Block>),
    Choice(Vec<Block>),
    Par(Box<Block>, Box<Block>, usize, usize),
}

pub fn block() -> impl Strategy<Value = Block> {
    let leaf = (0..EVENTS.len()).prop_map(Block::Step);
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Block::Seq),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Block::Choice),
            (inner.clone(), inner, 0..EVENTS.len(), 0..EVENTS.len())
                .prop_map(|(a, b, f, j)| Block::Par(Box::new(a), Box::new(b), f, j)),
        ]
    })
}

struct Builder {
    places: Vec<PlaceId>,
    transitions: Vec<Transition>,
}

impl Builder {
    fn place(&mut self) -> PlaceId {
        let p = PlaceId::new(format!("p{}", self.places.len())).unwrap();
        self.places.push(p.clone());
        p
    }

    fn transition(&mut self, pre: Vec<PlaceId>, post: Vec<PlaceId>, ev: usize) {
        let id = TransitionId::new(format!("t{}", self.transitions.len() + 1)).unwrap();
        self.transitions
            .push(Transition::new(id, pre, post, event(ev)));
    }

    fn build(&mut self, b: &Block, from: &PlaceId, to: &PlaceId) {
        match b {
            Block::Step(e) => self.transition(vec![from.clone()], vec![to.clone()], *e),
            Block::Seq(parts) => {
                let mut cur = from.clone();
                for (i, part) in parts.iter().enumerate() {
                    let next = if i + 1 == parts.len() {
                        to.clone()
                    } else {
                        self.place()
                    };
                    self.build(part, &cur, &next);
                    cur = next;
                }
            }
            Block::Choice(parts) => {
                for part in parts {
                    self.build(part, from, to);
                }
            }
            Block::Par(a, b, fork, join) => {
                let (pa, pb, qa, qb) = (self.place(), self.place(), self.place(), self.place());
                self.transition(vec![from.clone()], vec![pa.clone(), pb.clone()], *fork);
                self.build(a, &pa, &qa);
                self.build(b, &pb, &qb);
                self.transition(vec![qa, qb], vec![to.clone()], *join);
            }
        }
    }
}

pub fn count_transitions(b: &Block) -> usize {
    match b {
        Block::Step(_) => 1,
        Block::Seq(p) | Block::Choice(p) => p.iter().map(count_transitions).sum(),
        Block::Par(a, b, _, _) => 2 + count_transitions(a) + count_transitions(b),
    }
}

pub fn build_flow(id: &str, b: &Block) -> Flow {
    let mut builder = Builder {
        places: Vec::new(),
        transitions: Vec::new(),
    };
    let start = builder.place();
    let end = builder.place();
    builder.build(b, &start, &end);
    Flow::new(
        FlowId::new(id).unwrap(),
        builder.places,
        builder.transitions,
        Marking::new([start]),
        Marking::new([end]),
    )
    .unwrap()
}

/// A flow with at most `max` transitions.
pub fn flow(max: usize) -> impl Strategy<Value = Flow> {
    block()
        .prop_filter("too many transitions", move |b| count_transitions(b) <= max)
        .prop_map(|b| build_flow("f", &b))
}

/// A spec over components A..D with one link per (src, dest) pair, each
/// flow started by the source of its first start event.
pub fn spec_from_flows(flows: Vec<Flow>) -> SystemSpec {
    let components: BTreeSet<ComponentId> = ["A", "B", "C", "D"]
        .iter()
        .map(|c| ComponentId::new(*c).unwrap())
        .collect();
    let mut links = BTreeMap::new();
    let mut event_links = Vec::new();
    for f in &flows {
        for e in f.events() {
            let id = LinkId::new(format!("L_{}_{}", e.src(), e.dest())).unwrap();
            links.entry(id.clone()).or_insert_with(|| Link {
                id: id.clone(),
                src: e.src().clone(),
                dest: e.dest().clone(),
                channel: 0,
            });
            event_links.push((e, id));
        }
    }
    let topology = Topology::new(components, links.into_values(), event_links).unwrap();
    let mut initiators: BTreeMap<ComponentId, BTreeSet<FlowId>> = BTreeMap::new();
    for f in &flows {
        let src = f.start_events().into_iter().next().unwrap().src().clone();
        initiators.entry(src).or_default().insert(f.id().clone());
    }
    let initiators = initiators
        .into_iter()
        .map(|(component, flows)| Initiator { component, flows });
    SystemSpec::new("generated", topology, flows, initiators).unwrap()
}

/// One to three flows named f0, f1, ...
pub fn spec(max_transitions: usize) -> impl Strategy<Value = SystemSpec> {
    prop::collection::vec(
        block().prop_filter("too many transitions", move |b| {
            count_transitions(b) <= max_transitions
        }),
        1..4,
    )
    .prop_map(|blocks| {
        let flows = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| build_flow(&format!("f{i}"), b))
            .collect();
        spec_from_flows(flows)
    })
}
