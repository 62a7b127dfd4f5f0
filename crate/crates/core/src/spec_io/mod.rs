//! System specifications: topology, flows and initiators.
//!
//! The on-disk form is a line-oriented text format:
//!
//! ```text
//! system <name>
//! component <id> ...
//! link <link-id> <src> -> <dest> [channel <n>]
//! flow <flow-id>
//!   place <p-id> [initial|end] ...
//!   transition <t-id> pre {<p-id>,...} post {<p-id>,...} event <src>:<dest>:<cmd> on <link-id>
//! initiator <component-id> flows {<flow-id>,...}
//! ```
//!
//! `#` starts a comment. Declarations may appear in any order; `place` and
//! `transition` lines belong to the closest preceding `flow`. The `on` clause
//! of each transition builds the event-to-link map and must agree across
//! every use of the same event.

mod parser;
mod prototype;
mod writer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::flow_model::{ComponentId, Event, Flow, FlowId, ValidationReport};
use crate::ids::LinkId;

pub use parser::{parse_document, parse_system};
pub use prototype::{cpu_write_document, load_prototype, prototype_document};
pub use writer::serialize_system;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Semantic {
        line: Option<usize>,
        entity: String,
        message: String,
    },
    #[error("{}", reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid { reports: Vec<ValidationReport> },
}

impl SpecError {
    pub(crate) fn semantic(
        line: Option<usize>,
        entity: impl fmt::Display,
        message: impl Into<String>,
    ) -> Self {
        SpecError::Semantic {
            line,
            entity: entity.to_string(),
            message: message.into(),
        }
    }
}

/// A monitored point-to-point link. `channel` tells apart several links
/// joining the same pair of components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub src: ComponentId,
    pub dest: ComponentId,
    pub channel: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topology {
    components: BTreeSet<ComponentId>,
    links: BTreeMap<LinkId, Link>,
    event_links: BTreeMap<Event, LinkId>,
}

impl Topology {
    pub fn new(
        components: impl IntoIterator<Item = ComponentId>,
        links: impl IntoIterator<Item = Link>,
        event_links: impl IntoIterator<Item = (Event, LinkId)>,
    ) -> Result<Self, SpecError> {
        let components: BTreeSet<ComponentId> = components.into_iter().collect();
        let mut by_id = BTreeMap::new();
        let mut endpoints = BTreeSet::new();
        for link in links {
            for end in [&link.src, &link.dest] {
                if !components.contains(end) {
                    return Err(SpecError::semantic(
                        None,
                        end,
                        format!("link {} uses undeclared component {end}", link.id),
                    ));
                }
            }
            if !endpoints.insert((link.src.clone(), link.dest.clone(), link.channel)) {
                return Err(SpecError::semantic(
                    None,
                    &link.id,
                    format!(
                        "link {} duplicates {} -> {} channel {}",
                        link.id, link.src, link.dest, link.channel
                    ),
                ));
            }
            if by_id.contains_key(&link.id) {
                return Err(SpecError::semantic(
                    None,
                    &link.id,
                    format!("duplicate link {}", link.id),
                ));
            }
            by_id.insert(link.id.clone(), link);
        }
        let mut map = BTreeMap::new();
        for (event, link_id) in event_links {
            check_event_link(&components, &by_id, &event, &link_id, None)?;
            if let Some(prev) = map.get(&event) {
                if prev != &link_id {
                    return Err(SpecError::semantic(
                        None,
                        &event,
                        format!("event {event} mapped to both {prev} and {link_id}"),
                    ));
                }
            }
            map.insert(event, link_id);
        }
        Ok(Self {
            components,
            links: by_id,
            event_links: map,
        })
    }

    pub fn components(&self) -> &BTreeSet<ComponentId> {
        &self.components
    }

    /// Links in id order.
    pub fn links(&self) -> impl ExactSizeIterator<Item = &Link> {
        self.links.values()
    }

    pub fn link(&self, id: &LinkId) -> Option<&Link> {
        self.links.get(id)
    }

    pub fn link_ids(&self) -> BTreeSet<LinkId> {
        self.links.keys().cloned().collect()
    }

    pub fn event_link_map(&self) -> &BTreeMap<Event, LinkId> {
        &self.event_links
    }

    pub fn link_of(&self, event: &Event) -> Option<&LinkId> {
        self.event_links.get(event)
    }
}

pub(crate) fn check_event_link(
    components: &BTreeSet<ComponentId>,
    links: &BTreeMap<LinkId, Link>,
    event: &Event,
    link_id: &LinkId,
    line: Option<usize>,
) -> Result<(), SpecError> {
    for c in [event.src(), event.dest()] {
        if !components.contains(c) {
            return Err(SpecError::semantic(
                line,
                c,
                format!("event {event} uses undeclared component {c}"),
            ));
        }
    }
    let link = links
        .get(link_id)
        .ok_or_else(|| SpecError::semantic(line, link_id, format!("unknown link {link_id}")))?;
    if &link.src != event.src() || &link.dest != event.dest() {
        return Err(SpecError::semantic(
            line,
            event,
            format!(
                "event {event} cannot travel on link {link_id} ({} -> {})",
                link.src, link.dest
            ),
        ));
    }
    Ok(())
}

/// A component that starts flow instances, with the flows it may start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Initiator {
    pub component: ComponentId,
    pub flows: BTreeSet<FlowId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    name: String,
    topology: Topology,
    flows: Vec<Flow>,
    initiators: Vec<Initiator>,
}

impl SystemSpec {
    /// Assembles a spec and checks cross-references. Flow well-formedness is
    /// not checked here; see [`SystemSpec::validate_flows`].
    pub fn new(
        name: impl Into<String>,
        topology: Topology,
        flows: impl IntoIterator<Item = Flow>,
        initiators: impl IntoIterator<Item = Initiator>,
    ) -> Result<Self, SpecError> {
        let name = name.into();
        crate::ids::check_ident(&name).map_err(|reason| {
            SpecError::semantic(
                None,
                &name,
                format!("invalid system name {name:?}: {reason}"),
            )
        })?;

        let mut flows: Vec<Flow> = flows.into_iter().collect();
        flows.sort_by(|a, b| a.id().cmp(b.id()));
        for pair in flows.windows(2) {
            if pair[0].id() == pair[1].id() {
                return Err(SpecError::semantic(
                    None,
                    pair[0].id(),
                    format!("duplicate flow {}", pair[0].id()),
                ));
            }
        }
        for flow in &flows {
            for t in flow.transitions() {
                if topology.link_of(&t.event).is_none() {
                    return Err(SpecError::semantic(
                        None,
                        &t.event,
                        format!("event {} of flow {} has no link", t.event, flow.id()),
                    ));
                }
            }
        }

        let mut initiators: Vec<Initiator> = initiators.into_iter().collect();
        initiators.sort_by(|a, b| a.component.cmp(&b.component));
        for pair in initiators.windows(2) {
            if pair[0].component == pair[1].component {
                return Err(SpecError::semantic(
                    None,
                    &pair[0].component,
                    format!("duplicate initiator {}", pair[0].component),
                ));
            }
        }
        for init in &initiators {
            if !topology.components().contains(&init.component) {
                return Err(SpecError::semantic(
                    None,
                    &init.component,
                    format!("initiator {} is not a declared component", init.component),
                ));
            }
            if init.flows.is_empty() {
                return Err(SpecError::semantic(
                    None,
                    &init.component,
                    format!("initiator {} starts no flows", init.component),
                ));
            }
            for fid in &init.flows {
                let flow = flows
                    .binary_search_by(|f| f.id().cmp(fid))
                    .map(|i| &flows[i])
                    .map_err(|_| {
                        SpecError::semantic(
                            None,
                            fid,
                            format!("initiator {} names unknown flow {fid}", init.component),
                        )
                    })?;
                if !flow
                    .start_events()
                    .iter()
                    .any(|e| e.src() == &init.component)
                {
                    return Err(SpecError::semantic(
                        None,
                        fid,
                        format!(
                            "flow {fid} has no start event sent by initiator {}",
                            init.component
                        ),
                    ));
                }
            }
        }

        Ok(Self {
            name,
            topology,
            flows,
            initiators,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Flows in id order.
    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn flow(&self, id: &FlowId) -> Option<&Flow> {
        self.flows
            .binary_search_by(|f| f.id().cmp(id))
            .ok()
            .map(|i| &self.flows[i])
    }

    /// Initiators in component order.
    pub fn initiators(&self) -> &[Initiator] {
        &self.initiators
    }

    pub fn initiator(&self, component: &ComponentId) -> Option<&Initiator> {
        self.initiators.iter().find(|i| &i.component == component)
    }

    pub fn link_of(&self, event: &Event) -> Option<&LinkId> {
        self.topology.link_of(event)
    }

    /// Every event used by any flow.
    pub fn events(&self) -> BTreeSet<Event> {
        self.flows.iter().flat_map(|f| f.events()).collect()
    }

    /// Flows that any of `initiators` may start, in id order.
    pub fn flows_started_by<'a>(&'a self, initiators: &BTreeSet<ComponentId>) -> Vec<&'a Flow> {
        let ids: BTreeSet<&FlowId> = self
            .initiators
            .iter()
            .filter(|i| initiators.contains(&i.component))
            .flat_map(|i| i.flows.iter())
            .collect();
        self.flows.iter().filter(|f| ids.contains(f.id())).collect()
    }

    /// Runs [`Flow::validate`] on every flow, returning only unclean reports.
    pub fn validate_flows(&self) -> Vec<ValidationReport> {
        self.flows
            .iter()
            .map(Flow::validate)
            .filter(|r| !r.is_clean())
            .collect()
    }
}
