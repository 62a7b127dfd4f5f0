//! Choosing which events to monitor.
//!
//! A flow instance counts as observed once any of its selected events gets
//! through, so the FIC selector looks for links that every execution path
//! of every in-scope flow must use: a set of links covers a flow when each
//! of the flow's paths carries an event on one of them. The CEC selector
//! takes every start and end event, then adds events until the paths of
//! each flow project to distinct sequences.

mod cover;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{ComponentId, Event, Flow, FlowError, FlowId, FlowPath};
use crate::ids::LinkId;
use crate::spec_io::SystemSpec;
use crate::tracing_sim::{ObservabilityConfig, DEFAULT_PORT_BANDWIDTH};
use cover::{greedy_cover, optimal_covers, Bits};

pub use oracle::{
    minimal_link_cover_oracle, minimal_link_cover_oracle_bounded, DEFAULT_ORACLE_BOUND,
};

/// Above this many candidate links, FIC selection falls back to greedy.
pub const EXACT_LINK_BOUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("event {event} of flow {flow} is not mapped to a link")]
    Unmapped { flow: FlowId, event: Event },
    #[error("flow {0} has no events")]
    EmptyFlow(FlowId),
    #[error("no flows to select for")]
    EmptyScope,
    #[error("k = {k} is outside 1..={available}")]
    BadK { k: usize, available: usize },
    #[error("flow {0} cannot be covered by any set of links")]
    Uncoverable(FlowId),
    #[error("{links} candidate links exceed the oracle bound of {bound}")]
    TooLarge { links: usize, bound: usize },
    #[error("queue reallocation needs a nonempty subset of the links, {0}")]
    BadReallocation(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Flows to observe, where their events travel, and the queue budget.
#[derive(Debug, Clone)]
pub struct SelectionProblem {
    flows: Vec<Flow>,
    event_link_map: BTreeMap<Event, LinkId>,
    all_links: BTreeSet<LinkId>,
    base_capacity: u32,
}

impl SelectionProblem {
    /// `all_links` is every monitored link; their queues share a budget of
    /// `base_capacity` entries each.
    pub fn new(
        flows: Vec<Flow>,
        event_link_map: BTreeMap<Event, LinkId>,
        all_links: BTreeSet<LinkId>,
        base_capacity: u32,
    ) -> Result<Self, SelectionError> {
        if flows.is_empty() {
            return Err(SelectionError::EmptyScope);
        }
        if base_capacity == 0 {
            return Err(SelectionError::BadReallocation(
                "base capacity must be positive".into(),
            ));
        }
        for f in &flows {
            if f.transitions().is_empty() {
                return Err(SelectionError::EmptyFlow(f.id().clone()));
            }
            for e in f.events() {
                match event_link_map.get(&e) {
                    Some(l) if all_links.contains(l) => {}
                    _ => {
                        return Err(SelectionError::Unmapped {
                            flow: f.id().clone(),
                            event: e,
                        })
                    }
                }
            }
        }
        let mut flows = flows;
        flows.sort_by(|a, b| a.id().cmp(b.id()));
        Ok(Self {
            flows,
            event_link_map,
            all_links,
            base_capacity,
        })
    }

    /// The flows started by `scope` (every flow when `None`) over the spec's
    /// topology.
    pub fn from_spec(
        spec: &SystemSpec,
        scope: Option<&BTreeSet<ComponentId>>,
        base_capacity: u32,
    ) -> Result<Self, SelectionError> {
        let flows: Vec<Flow> = match scope {
            None => spec.flows().to_vec(),
            Some(s) => spec.flows_started_by(s).into_iter().cloned().collect(),
        };
        Self::new(
            flows,
            spec.topology().event_link_map().clone(),
            spec.topology().link_ids(),
            base_capacity,
        )
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn event_link_map(&self) -> &BTreeMap<Event, LinkId> {
        &self.event_link_map
    }

    pub fn all_links(&self) -> &BTreeSet<LinkId> {
        &self.all_links
    }

    pub fn base_capacity(&self) -> u32 {
        self.base_capacity
    }

    /// Sum of all queue capacities: `base_capacity` per link.
    pub fn total_queue_budget(&self) -> u64 {
        self.base_capacity as u64 * self.all_links.len() as u64
    }

    pub fn link_of(&self, event: &Event) -> &LinkId {
        &self.event_link_map[event]
    }

    /// Every event of every in-scope flow.
    pub fn events(&self) -> BTreeSet<Event> {
        self.flows.iter().flat_map(|f| f.events()).collect()
    }

    /// Number of in-scope flows containing `event`.
    pub fn frequency(&self, event: &Event) -> usize {
        self.flows
            .iter()
            .filter(|f| f.events().contains(event))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    FlowCover,
    Start,
    End,
    PathDisambig,
    FcRank,
    /// Every event of the in-scope flows, no selection applied.
    Scope,
}

/// Two paths of one flow with identical label sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undistinguishable {
    pub flow: FlowId,
    pub first: FlowPath,
    pub second: FlowPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub rationale: BTreeMap<Event, Reason>,
    pub links: BTreeSet<LinkId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undistinguishable: Vec<Undistinguishable>,
}

impl Selection {
    fn from_rationale(problem: &SelectionProblem, rationale: BTreeMap<Event, Reason>) -> Self {
        let links = rationale
            .keys()
            .map(|e| problem.link_of(e).clone())
            .collect();
        Self {
            rationale,
            links,
            undistinguishable: Vec::new(),
        }
    }

    pub fn events(&self) -> BTreeSet<Event> {
        self.rationale.keys().cloned().collect()
    }

    /// Observability for this selection with `capacity` per enabled link.
    pub fn uniform_config(&self, capacity: u32) -> ObservabilityConfig {
        ObservabilityConfig {
            selected_events: self.events(),
            enabled_links: self.links.clone(),
            queue_capacity: self.links.iter().map(|l| (l.clone(), capacity)).collect(),
            port_bandwidth: DEFAULT_PORT_BANDWIDTH,
            drain: true,
        }
    }

    /// Observability for this selection with the whole queue budget of the
    /// problem spread over the enabled links.
    pub fn reallocated_config(
        &self,
        problem: &SelectionProblem,
    ) -> Result<ObservabilityConfig, SelectionError> {
        let capacities = reallocate_queues(problem.base_capacity, &problem.all_links, &self.links)?;
        Ok(ObservabilityConfig {
            selected_events: self.events(),
            enabled_links: self.links.clone(),
            queue_capacity: capacities,
            port_bandwidth: DEFAULT_PORT_BANDWIDTH,
            drain: true,
        })
    }
}

/// Selection plus the observability it induces, as written to JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionDocument {
    pub method: String,
    pub selection: Selection,
    pub observability: ObservabilityConfig,
}

/// One execution path of a scope flow, with the events along it.
struct PathElement {
    labels: Vec<Event>,
}

fn path_elements(problem: &SelectionProblem) -> Result<Vec<(usize, PathElement)>, SelectionError> {
    let mut out = Vec::new();
    for (fi, f) in problem.flows.iter().enumerate() {
        for p in f.enumerate_paths()? {
            let labels = f.path_labels(&p).into_iter().cloned().collect();
            out.push((fi, PathElement { labels }));
        }
    }
    Ok(out)
}

/// Every event of the scope flows.
pub fn select_all(problem: &SelectionProblem) -> Selection {
    let rationale = problem
        .events()
        .into_iter()
        .map(|e| (e, Reason::Scope))
        .collect();
    Selection::from_rationale(problem, rationale)
}

/// Minimum set of links such that every execution path of every scope flow
/// carries an event on one of them, then the fewest events on those links
/// doing the same.
///
/// Links that cover nothing, or strictly less than another link, are not
/// candidates; links covering exactly the same paths keep the lowest id.
/// Up to [`EXACT_LINK_BOUND`] candidates the search is exact and ties among
/// minimum link sets go to fewer events, then the lexicographically smaller
/// link list. Beyond it a greedy link cover is used.
pub fn select_fic(problem: &SelectionProblem) -> Result<Selection, SelectionError> {
    let elements = path_elements(problem)?;
    let n = elements.len();
    let universe = Bits::full(n);

    let mut link_masks: BTreeMap<&LinkId, Bits> = BTreeMap::new();
    let mut event_masks: BTreeMap<&Event, Bits> = BTreeMap::new();
    for (i, (_, el)) in elements.iter().enumerate() {
        for e in &el.labels {
            link_masks
                .entry(problem.link_of(e))
                .or_insert_with(|| Bits::empty(n))
                .insert(i);
            event_masks
                .entry(e)
                .or_insert_with(|| Bits::empty(n))
                .insert(i);
        }
    }
    let all: Vec<(&LinkId, &Bits)> = link_masks.iter().map(|(l, b)| (*l, b)).collect();
    let candidates: Vec<(&LinkId, &Bits)> = all
        .iter()
        .enumerate()
        .filter(|(i, (_, m))| {
            !all.iter()
                .enumerate()
                .any(|(j, (_, o))| j != *i && m.is_subset(o) && (**m != **o || j < *i))
        })
        .map(|(_, x)| *x)
        .collect();
    let masks: Vec<Bits> = candidates.iter().map(|(_, b)| (*b).clone()).collect();

    let uncoverable = |problem: &SelectionProblem| {
        let mut reach = Bits::empty(n);
        for m in &masks {
            reach.union_with(m);
        }
        let i = universe.minus(&reach).first().expect("something uncovered");
        SelectionError::Uncoverable(problem.flows[elements[i].0].id().clone())
    };

    let link_sets: Vec<Vec<usize>> = if candidates.len() <= EXACT_LINK_BOUND {
        optimal_covers(&universe, &masks).ok_or_else(|| uncoverable(problem))?
    } else {
        vec![greedy_cover(&universe, &masks).ok_or_else(|| uncoverable(problem))?]
    };

    let mut best: Option<(usize, Vec<&LinkId>, Vec<&Event>)> = None;
    for set in link_sets {
        let links: Vec<&LinkId> = set.iter().map(|&i| candidates[i].0).collect();
        let events: Vec<&Event> = event_masks
            .keys()
            .copied()
            .filter(|e| links.contains(&problem.link_of(e)))
            .collect();
        let emasks: Vec<Bits> = events.iter().map(|e| event_masks[*e].clone()).collect();
        let chosen = if events.len() <= 2 * EXACT_LINK_BOUND {
            optimal_covers(&universe, &emasks).and_then(|c| c.into_iter().next())
        } else {
            greedy_cover(&universe, &emasks)
        }
        .expect("link cover implies event cover");
        let chosen: Vec<&Event> = chosen.into_iter().map(|i| events[i]).collect();
        let key = (chosen.len(), links.clone());
        if best.as_ref().is_none_or(|(k, l, _)| key < (*k, l.clone())) {
            best = Some((key.0, key.1, chosen));
        }
    }
    let (_, _, events) = best.expect("at least one cover");
    let rationale = events
        .into_iter()
        .map(|e| (e.clone(), Reason::FlowCover))
        .collect();
    Ok(Selection::from_rationale(problem, rationale))
}

fn project<'a>(labels: &'a [Event], selected: &BTreeSet<Event>) -> Vec<&'a Event> {
    labels.iter().filter(|e| selected.contains(*e)).collect()
}

/// Start and end events of every scope flow, plus greedily chosen events
/// until each flow's paths project to pairwise distinct label sequences.
///
/// Each round adds the event separating the most still-confusable path
/// pairs, preferring events on already enabled links, then the smallest
/// event. Pairs of paths with identical label sequences cannot be separated;
/// they are reported in [`Selection::undistinguishable`].
pub fn select_cec(problem: &SelectionProblem) -> Result<Selection, SelectionError> {
    let mut rationale: BTreeMap<Event, Reason> = BTreeMap::new();
    for f in &problem.flows {
        for e in f.start_events() {
            rationale.insert(e, Reason::Start);
        }
        for e in f.end_events() {
            rationale.entry(e).or_insert(Reason::End);
        }
    }

    let mut paths: Vec<(usize, FlowPath, Vec<Event>)> = Vec::new();
    for (fi, f) in problem.flows.iter().enumerate() {
        for p in f.enumerate_paths()? {
            let labels = f.path_labels(&p).into_iter().cloned().collect();
            paths.push((fi, p, labels));
        }
    }
    let mut undistinguishable = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            if paths[i].0 != paths[j].0 {
                continue;
            }
            if paths[i].2 == paths[j].2 {
                undistinguishable.push(Undistinguishable {
                    flow: problem.flows[paths[i].0].id().clone(),
                    first: paths[i].1.clone(),
                    second: paths[j].1.clone(),
                });
            } else {
                pairs.push((i, j));
            }
        }
    }

    let candidates = problem.events();
    loop {
        let selected: BTreeSet<Event> = rationale.keys().cloned().collect();
        pairs.retain(|&(i, j)| project(&paths[i].2, &selected) == project(&paths[j].2, &selected));
        if pairs.is_empty() {
            break;
        }
        let links: BTreeSet<&LinkId> = selected.iter().map(|e| problem.link_of(e)).collect();
        let mut best: Option<(usize, bool, &Event)> = None;
        for e in candidates.iter().filter(|e| !selected.contains(*e)) {
            let mut with = selected.clone();
            with.insert(e.clone());
            let split = pairs
                .iter()
                .filter(|&&(i, j)| project(&paths[i].2, &with) != project(&paths[j].2, &with))
                .count();
            let on_link = links.contains(problem.link_of(e));
            let better = match best {
                None => true,
                Some((s, l, _)) => (split, on_link) > (s, l),
            };
            if better {
                best = Some((split, on_link, e));
            }
        }
        match best {
            Some((split, _, e)) if split > 0 => {
                rationale.insert(e.clone(), Reason::PathDisambig);
            }
            _ => {
                // No single event separates any remaining pair (their labels
                // only differ in order); take both paths' events outright.
                let (i, j) = pairs[0];
                for e in paths[i].2.iter().chain(&paths[j].2) {
                    rationale.entry(e.clone()).or_insert(Reason::PathDisambig);
                }
            }
        }
    }

    let mut sel = Selection::from_rationale(problem, rationale);
    sel.undistinguishable = undistinguishable;
    Ok(sel)
}

/// The `k` events shared by the most scope flows, ties broken by event order.
pub fn select_fc_baseline(
    problem: &SelectionProblem,
    k: usize,
) -> Result<Selection, SelectionError> {
    let events = problem.events();
    if k == 0 || k > events.len() {
        return Err(SelectionError::BadK {
            k,
            available: events.len(),
        });
    }
    let mut ranked: Vec<(usize, Event)> = events
        .into_iter()
        .map(|e| (problem.frequency(&e), e))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let rationale = ranked
        .into_iter()
        .take(k)
        .map(|(_, e)| (e, Reason::FcRank))
        .collect();
    Ok(Selection::from_rationale(problem, rationale))
}

/// Spreads `base_capacity × |all_links|` queue entries over `enabled`:
/// each gets the floor share and the first links in id order one extra
/// entry each until the remainder is used up.
pub fn reallocate_queues(
    base_capacity: u32,
    all_links: &BTreeSet<LinkId>,
    enabled: &BTreeSet<LinkId>,
) -> Result<BTreeMap<LinkId, u32>, SelectionError> {
    if enabled.is_empty() {
        return Err(SelectionError::BadReallocation("no link is enabled".into()));
    }
    if base_capacity == 0 {
        return Err(SelectionError::BadReallocation(
            "base capacity must be positive".into(),
        ));
    }
    if let Some(l) = enabled.iter().find(|l| !all_links.contains(*l)) {
        return Err(SelectionError::BadReallocation(format!(
            "enabled link {l} is unknown"
        )));
    }
    let total = base_capacity as u64 * all_links.len() as u64;
    let n = enabled.len() as u64;
    let (share, extra) = (total / n, total % n);
    Ok(enabled
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), (share + u64::from((i as u64) < extra)) as u32))
        .collect())
}

#[cfg(test)]
mod tests;
