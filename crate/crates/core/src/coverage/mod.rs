//! Reconstruction of flow instances from an observed trace, and the coverage
//! metrics computed over them.
//!
//! FIC is the share of executed instances with at least one observed event;
//! CEC is the share with both a start and an end event observed.

mod interleave;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow_model::{Event, Flow, FlowError, FlowId, FlowPath};
use crate::ids::LinkId;
use crate::spec_io::SystemSpec;
use crate::tracing_sim::{EventRecord, InstanceTag, SimulationResult};

pub use interleave::{interleavings, Interleaving, IntervalClock, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("observed record of {tag} names unknown flow {flow}")]
    UnknownFlow { tag: InstanceTag, flow: FlowId },
    #[error("observations of {tag} match no execution path of flow {flow}")]
    InconsistentTrace { tag: InstanceTag, flow: FlowId },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// What the observer knows about the trace besides the records themselves.
///
/// Paths are projected onto `selected_events` before matching. A projected
/// event on a link in `lossless_links` must be present in the observations;
/// events on any other link may have been lost. With no lossless links the
/// rule is plain order-preserving subsequence matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationContext {
    pub selected_events: BTreeSet<Event>,
    pub lossless_links: BTreeSet<LinkId>,
}

impl ObservationContext {
    /// Context assuming every event may have been lost.
    pub fn lossy(selected_events: BTreeSet<Event>) -> Self {
        Self {
            selected_events,
            lossless_links: BTreeSet::new(),
        }
    }

    /// Selected events from the run, with every enabled link that dropped
    /// nothing and finished with an empty queue marked lossless.
    pub fn from_result(result: &SimulationResult) -> Self {
        Self {
            selected_events: result.selected_events.clone(),
            lossless_links: result.lossless_links(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceReconstruction {
    pub tag: InstanceTag,
    /// The instance's observed records, in detection order.
    pub observed_events: Vec<EventRecord>,
    /// Position of each of `observed_events` in the off-load stream.
    pub offload_positions: Vec<usize>,
    pub started: bool,
    pub completed: bool,
    pub candidate_paths: Vec<FlowPath>,
}

struct FlowPaths<'a> {
    flow: &'a Flow,
    start: BTreeSet<Event>,
    end: BTreeSet<Event>,
    paths: Vec<(FlowPath, Vec<&'a Event>)>,
}

/// Reconstructs instances with plain subsequence matching; see
/// [`reconstruct_with`].
pub fn reconstruct(
    observed: &[EventRecord],
    spec: &SystemSpec,
) -> Result<Vec<InstanceReconstruction>, CoverageError> {
    let selected = observed.iter().map(|r| r.event.clone()).collect();
    reconstruct_with(observed, spec, &ObservationContext::lossy(selected))
}

/// Groups `observed` by tag (in tag order) and finds each instance's
/// candidate paths.
///
/// Records of one instance are ordered by detection cycle, ties kept in
/// off-load order.
pub fn reconstruct_with(
    observed: &[EventRecord],
    spec: &SystemSpec,
    ctx: &ObservationContext,
) -> Result<Vec<InstanceReconstruction>, CoverageError> {
    let mut by_tag: BTreeMap<&InstanceTag, Vec<usize>> = BTreeMap::new();
    for (i, r) in observed.iter().enumerate() {
        by_tag.entry(&r.tag).or_default().push(i);
    }

    let mut cache: BTreeMap<&FlowId, FlowPaths> = BTreeMap::new();
    let mut out = Vec::with_capacity(by_tag.len());
    for (tag, mut idx) in by_tag {
        idx.sort_by_key(|&i| (observed[i].cycle, i));
        let fp = match cache.get(&tag.flow) {
            Some(fp) => fp,
            None => {
                let flow = spec
                    .flow(&tag.flow)
                    .ok_or_else(|| CoverageError::UnknownFlow {
                        tag: tag.clone(),
                        flow: tag.flow.clone(),
                    })?;
                let paths = flow
                    .enumerate_paths()?
                    .into_iter()
                    .map(|p| {
                        let labels = flow.path_labels(&p);
                        (p, labels)
                    })
                    .collect();
                cache.entry(&tag.flow).or_insert(FlowPaths {
                    flow,
                    start: flow.start_events(),
                    end: flow.end_events(),
                    paths,
                })
            }
        };

        let events: Vec<&Event> = idx.iter().map(|&i| &observed[i].event).collect();
        let candidate_paths: Vec<FlowPath> = fp
            .paths
            .iter()
            .filter(|(_, labels)| matches_path(labels, &events, spec, ctx))
            .map(|(p, _)| p.clone())
            .collect();
        if candidate_paths.is_empty() {
            return Err(CoverageError::InconsistentTrace {
                tag: tag.clone(),
                flow: fp.flow.id().clone(),
            });
        }
        let started = events.iter().any(|e| fp.start.contains(*e));
        let completed = started && events.iter().any(|e| fp.end.contains(*e));
        out.push(InstanceReconstruction {
            tag: tag.clone(),
            observed_events: idx.iter().map(|&i| observed[i].clone()).collect(),
            offload_positions: idx,
            started,
            completed,
            candidate_paths,
        });
    }
    Ok(out)
}

/// Whether `observed` can be what remains of `labels` projected onto the
/// selected events, given which links are lossless.
///
/// Greedy left-to-right matching is exact here: matching the earliest
/// equal projected event never rules out a match that skipping it allowed.
fn matches_path(
    labels: &[&Event],
    observed: &[&Event],
    spec: &SystemSpec,
    ctx: &ObservationContext,
) -> bool {
    let mut j = 0;
    for &e in labels {
        if !ctx.selected_events.contains(e) {
            continue;
        }
        if j < observed.len() && observed[j] == e {
            j += 1;
            continue;
        }
        let lossless = spec
            .link_of(e)
            .is_some_and(|l| ctx.lossless_links.contains(l));
        if lossless {
            return false;
        }
    }
    j == observed.len()
}

/// Observed, complete and executed instance counts of one flow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCounts {
    pub observed: u64,
    pub complete: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub fic: f64,
    pub cec: f64,
    pub observed_instances: u64,
    pub complete_instances: u64,
    pub total_instances: u64,
    /// Complete instances whose observations leave exactly one path.
    pub resolved_instances: u64,
    pub path_resolved: f64,
    pub per_flow: BTreeMap<FlowId, FlowCounts>,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Folds reconstructions into coverage counts against `total` executed
/// instances (`per_flow_total` split by flow).
pub fn score(
    recons: &[InstanceReconstruction],
    total: u64,
    per_flow_total: &BTreeMap<FlowId, u64>,
) -> CoverageReport {
    let mut per_flow: BTreeMap<FlowId, FlowCounts> = per_flow_total
        .iter()
        .map(|(f, n)| {
            (
                f.clone(),
                FlowCounts {
                    total: *n,
                    ..FlowCounts::default()
                },
            )
        })
        .collect();
    let (mut i, mut c, mut resolved) = (0, 0, 0);
    for r in recons {
        let counts = per_flow.entry(r.tag.flow.clone()).or_default();
        if !r.observed_events.is_empty() {
            i += 1;
            counts.observed += 1;
        }
        if r.completed {
            c += 1;
            counts.complete += 1;
            if r.candidate_paths.len() == 1 {
                resolved += 1;
            }
        }
    }
    CoverageReport {
        fic: ratio(i, total),
        cec: ratio(c, total),
        observed_instances: i,
        complete_instances: c,
        total_instances: total,
        resolved_instances: resolved,
        path_resolved: ratio(resolved, c),
        per_flow,
    }
}

/// Executed instance counts of a run, optionally restricted to the instances
/// started by `scope`.
pub fn executed_counts(
    result: &SimulationResult,
    scope: Option<&BTreeSet<crate::flow_model::ComponentId>>,
) -> (u64, BTreeMap<FlowId, u64>) {
    let mut per_flow: BTreeMap<FlowId, u64> = BTreeMap::new();
    let mut total = 0;
    for tag in &result.instances {
        if scope.is_some_and(|s| !s.contains(&tag.initiator)) {
            continue;
        }
        total += 1;
        *per_flow.entry(tag.flow.clone()).or_default() += 1;
    }
    (total, per_flow)
}

/// Reconstructs and scores one run, counting only instances whose initiator
/// is in `scope` (all instances when `None`).
pub fn evaluate(
    result: &SimulationResult,
    spec: &SystemSpec,
    scope: Option<&BTreeSet<crate::flow_model::ComponentId>>,
) -> Result<CoverageReport, CoverageError> {
    let recons = reconstruct_with(
        &result.observed,
        spec,
        &ObservationContext::from_result(result),
    )?;
    let recons: Vec<_> = recons
        .into_iter()
        .filter(|r| scope.is_none_or(|s| s.contains(&r.tag.initiator)))
        .collect();
    let (total, per_flow) = executed_counts(result, scope);
    Ok(score(&recons, total, &per_flow))
}

/// A count over a total, shown as `A/B (r)` with `r` rounded to three
/// decimals and trailing zeros dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCell {
    pub count: f64,
    pub total: f64,
}

impl RatioCell {
    pub fn new(count: impl Into<f64>, total: impl Into<f64>) -> Self {
        Self {
            count: count.into(),
            total: total.into(),
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.count / self.total
        }
    }
}

pub fn format_number(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

impl fmt::Display for RatioCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} ({})",
            format_number(self.count),
            format_number(self.total),
            format_number(self.ratio())
        )
    }
}

impl CoverageReport {
    pub fn fic_cell(&self) -> RatioCell {
        RatioCell::new(self.observed_instances as f64, self.total_instances as f64)
    }

    pub fn cec_cell(&self) -> RatioCell {
        RatioCell::new(self.complete_instances as f64, self.total_instances as f64)
    }

    /// Human-readable table: one row per flow and a total row.
    pub fn to_table(&self) -> String {
        let mut rows = vec![vec!["flow".to_string(), "FIC".into(), "CEC".into()]];
        for (flow, c) in &self.per_flow {
            rows.push(vec![
                flow.to_string(),
                RatioCell::new(c.observed as f64, c.total as f64).to_string(),
                RatioCell::new(c.complete as f64, c.total as f64).to_string(),
            ]);
        }
        rows.push(vec![
            "total".into(),
            self.fic_cell().to_string(),
            self.cec_cell().to_string(),
        ]);
        let mut out = render_rows(&rows);
        out.push_str(&format!(
            "path resolved: {}\n",
            RatioCell::new(
                self.resolved_instances as f64,
                self.complete_instances as f64
            )
        ));
        out
    }
}

/// Left-aligned columns separated by two spaces.
pub fn render_rows(rows: &[Vec<String>]) -> String {
    let mut widths = vec![0usize; rows.iter().map(Vec::len).max().unwrap_or(0)];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
