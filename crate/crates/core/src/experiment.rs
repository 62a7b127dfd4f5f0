//! Seed and capacity sweeps over selection methods.
//!
//! An [`ExperimentPlan`] names a spec, an observation scope, selection
//! methods, base queue capacities and seeds. Every (method, capacity, seed)
//! cell runs selection, queue reallocation, simulation, reconstruction and
//! scoring, and yields a [`CellReport`]. Cells are independent and run in
//! parallel; [`aggregate`] reduces them to medians over seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::coverage::{
    evaluate, format_number, render_rows, CoverageError, CoverageReport, RatioCell,
};
use crate::flow_model::ComponentId;
use crate::selection::{
    select_all, select_cec, select_fc_baseline, select_fic, Selection, SelectionError,
    SelectionProblem,
};
use crate::spec_io::{load_prototype, parse_system, SpecError, SystemSpec};
use crate::tracing_sim::{
    run_simulation, CycleRange, ObservabilityConfig, SimError, SimulationSummary, WorkloadConfig,
    DEFAULT_PORT_BANDWIDTH,
};

/// Overrides the default seed list, e.g. `0,1,2` or `0..10`.
pub const SEEDS_ENV: &str = "FLOWSCOPE_SEEDS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("spec {path}: {source}")]
    Spec {
        path: String,
        #[source]
        source: SpecError,
    },
    #[error("selection {method} at capacity {capacity}: {source}")]
    Selection {
        method: Method,
        capacity: u32,
        #[source]
        source: SelectionError,
    },
    #[error("cell {cell}: {source}")]
    Simulation {
        cell: String,
        #[source]
        source: SimError,
    },
    #[error("cell {cell}: {source}")]
    Coverage {
        cell: String,
        #[source]
        source: CoverageError,
    },
}

impl ExperimentError {
    fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.into(),
            source,
        }
    }
}

/// How events are chosen for a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Every event of the scope flows.
    None,
    Fic,
    Cec,
    /// Frequency-coverage baseline with `k` events.
    Fc(usize),
}

impl Method {
    /// File-name friendly form: `none`, `fic`, `cec`, `fc16`.
    pub fn slug(&self) -> String {
        match self {
            Method::None => "none".into(),
            Method::Fic => "fic".into(),
            Method::Cec => "cec".into(),
            Method::Fc(k) => format!("fc{k}"),
        }
    }

    pub fn select(&self, problem: &SelectionProblem) -> Result<Selection, SelectionError> {
        match self {
            Method::None => Ok(select_all(problem)),
            Method::Fic => select_fic(problem),
            Method::Cec => select_cec(problem),
            Method::Fc(k) => select_fc_baseline(problem, *k),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::None => f.write_str("NONE"),
            Method::Fic => f.write_str("FIC"),
            Method::Cec => f.write_str("CEC"),
            Method::Fc(k) => write!(f, "FC({k})"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "NONE" => return Ok(Method::None),
            "FIC" => return Ok(Method::Fic),
            "CEC" => return Ok(Method::Cec),
            _ => {}
        }
        let k = upper
            .strip_prefix("FC(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| upper.strip_prefix("FC"))
            .ok_or_else(|| format!("unknown method {s:?}, expected NONE, FIC, CEC or FC(k)"))?;
        let k: usize = k.parse().map_err(|_| format!("bad k in method {s:?}"))?;
        if k == 0 {
            return Err(format!("method {s:?} needs k >= 1"));
        }
        Ok(Method::Fc(k))
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which initiators' flows are observed and counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    All,
    Initiators(BTreeSet<ComponentId>),
}

impl Scope {
    pub fn as_filter(&self) -> Option<&BTreeSet<ComponentId>> {
        match self {
            Scope::All => None,
            Scope::Initiators(s) => Some(s),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::All => f.write_str("ALL"),
            Scope::Initiators(s) => {
                let names: Vec<&str> = s.iter().map(|c| c.as_str()).collect();
                write!(f, "{}", names.join("+"))
            }
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scope::All => s.serialize_str("ALL"),
            Scope::Initiators(set) => set.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Word(String),
            List(BTreeSet<ComponentId>),
        }
        match Repr::deserialize(d)? {
            Repr::Word(w) if w.eq_ignore_ascii_case("all") => Ok(Scope::All),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "scope must be \"ALL\" or a list of initiators, got {w:?}"
            ))),
            Repr::List(set) => Ok(Scope::Initiators(set)),
        }
    }
}

/// Workload fields a plan may override; the seed always comes from the cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances_per_initiator: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initiation_delay: Option<CycleRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_latency: Option<CycleRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_outstanding: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_budget: Option<u64>,
}

impl WorkloadOverrides {
    pub fn apply(&self, seed: u64) -> WorkloadConfig {
        let d = WorkloadConfig::with_seed(seed);
        WorkloadConfig {
            instances_per_initiator: self
                .instances_per_initiator
                .unwrap_or(d.instances_per_initiator),
            initiation_delay: self.initiation_delay.unwrap_or(d.initiation_delay),
            transition_latency: self.transition_latency.unwrap_or(d.transition_latency),
            max_outstanding: self.max_outstanding.or(d.max_outstanding),
            cycle_budget: self.cycle_budget.unwrap_or(d.cycle_budget),
            seed,
        }
    }
}

fn default_spec() -> String {
    "prototype".into()
}

fn default_methods() -> Vec<Method> {
    vec![Method::None]
}

fn default_capacities() -> Vec<u32> {
    vec![8]
}

fn default_true() -> bool {
    true
}

fn default_bandwidth() -> u32 {
    DEFAULT_PORT_BANDWIDTH
}

/// Seeds used when a plan lists none: `0..10`, unless [`SEEDS_ENV`] is set.
pub fn default_seeds() -> Vec<u64> {
    match std::env::var(SEEDS_ENV) {
        Ok(v) => parse_seed_list(&v).unwrap_or_else(|e| panic!("{SEEDS_ENV}: {e}")),
        Err(_) => (0..10).collect(),
    }
}

/// Parses `a,b,c` or `lo..hi` (exclusive), or a mix separated by commas.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range {part:?}"))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range {part:?}"))?;
            out.extend(lo..hi);
        } else {
            out.push(part.parse().map_err(|_| format!("bad seed {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty seed list".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// `"prototype"` or a spec file path, relative to the plan file.
    #[serde(default = "default_spec")]
    pub spec: String,
    #[serde(default = "scope_all")]
    pub scope: Scope,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_capacities")]
    pub capacities: Vec<u32>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub workload: WorkloadOverrides,
    /// Spread the whole queue budget over the enabled links.
    #[serde(default = "default_true")]
    pub reallocate: bool,
    #[serde(default = "default_true")]
    pub drain: bool,
    #[serde(default = "default_bandwidth")]
    pub port_bandwidth: u32,
    /// Directory for cell files and tables, relative to the plan file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn scope_all() -> Scope {
    Scope::All
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            spec: default_spec(),
            scope: Scope::All,
            methods: default_methods(),
            capacities: default_capacities(),
            seeds: (0..10).collect(),
            workload: WorkloadOverrides::default(),
            reallocate: true,
            drain: true,
            port_bandwidth: DEFAULT_PORT_BANDWIDTH,
            out_dir: None,
        }
    }
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Plan(e.to_string()))
    }

    /// Reads a plan; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let plan = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((plan, base))
    }

    /// Checks the plan on its own and against `spec`.
    pub fn check(&self, spec: &SystemSpec) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Plan(m));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.capacities.is_empty() {
            return bad("capacities must not be empty".into());
        }
        if self.capacities.contains(&0) {
            return bad("capacities must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.port_bandwidth == 0 {
            return bad("port_bandwidth must be positive".into());
        }
        if let Scope::Initiators(set) = &self.scope {
            if set.is_empty() {
                return bad("scope names no initiators".into());
            }
            if let Some(c) = set.iter().find(|c| spec.initiator(c).is_none()) {
                return bad(format!("scope names {c}, which is not an initiator"));
            }
        }
        self.workload
            .apply(0)
            .check()
            .map_err(|e| ExperimentError::Plan(e.to_string()))
    }

    /// Loads the spec the plan names.
    pub fn load_spec(&self, base: &Path) -> Result<SystemSpec, ExperimentError> {
        if self.spec == "prototype" {
            return Ok(load_prototype());
        }
        let path = base.join(&self.spec);
        let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::io(&path, e))?;
        parse_system(&text).map_err(|source| ExperimentError::Spec {
            path: path.display().to_string(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub method: Method,
    pub capacity: u32,
    pub seed: u64,
    pub scope: Scope,
    pub selection: Selection,
    pub observability: ObservabilityConfig,
    pub coverage: CoverageReport,
    pub simulation: SimulationSummary,
}

impl CellReport {
    /// `<method>_<cap>_<seed>.json`
    pub fn file_name(&self) -> String {
        cell_name(self.method, self.capacity, self.seed) + ".json"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cell serializes") + "\n"
    }
}

fn cell_name(method: Method, capacity: u32, seed: u64) -> String {
    format!("{}_{}_{}", method.slug(), capacity, seed)
}

/// Runs every cell of `plan`, in (method, capacity, seed) plan order.
pub fn run_plan(
    plan: &ExperimentPlan,
    spec: &SystemSpec,
) -> Result<Vec<CellReport>, ExperimentError> {
    plan.check(spec)?;
    let scope = plan.scope.as_filter();

    let mut configs = Vec::new();
    for &method in &plan.methods {
        for &capacity in &plan.capacities {
            let wrap = |source| ExperimentError::Selection {
                method,
                capacity,
                source,
            };
            let problem = SelectionProblem::from_spec(spec, scope, capacity).map_err(wrap)?;
            let selection = method.select(&problem).map_err(wrap)?;
            let mut obs = if plan.reallocate {
                selection.reallocated_config(&problem).map_err(wrap)?
            } else {
                selection.uniform_config(capacity)
            };
            obs.drain = plan.drain;
            obs.port_bandwidth = plan.port_bandwidth;
            for &seed in &plan.seeds {
                configs.push((method, capacity, seed, selection.clone(), obs.clone()));
            }
        }
    }

    configs
        .into_par_iter()
        .map(|(method, capacity, seed, selection, obs)| {
            let cell = cell_name(method, capacity, seed);
            let workload = plan.workload.apply(seed);
            let result = run_simulation(spec, &workload, &obs).map_err(|source| {
                ExperimentError::Simulation {
                    cell: cell.clone(),
                    source,
                }
            })?;
            let coverage = evaluate(&result, spec, scope)
                .map_err(|source| ExperimentError::Coverage { cell, source })?;
            Ok(CellReport {
                method,
                capacity,
                seed,
                scope: plan.scope.clone(),
                selection,
                observability: obs,
                coverage,
                simulation: SimulationSummary::from(&result),
            })
        })
        .collect()
}

/// Writes each cell as `<method>_<cap>_<seed>.json` under `dir`.
pub fn write_cells(cells: &[CellReport], dir: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    for c in cells {
        let path = dir.join(c.file_name());
        std::fs::write(&path, c.to_json()).map_err(|e| ExperimentError::io(&path, e))?;
    }
    Ok(())
}

/// Reads every `*.json` cell file in `dir`, in file-name order.
pub fn read_cells(dir: &Path) -> Result<Vec<CellReport>, ExperimentError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ExperimentError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| ExperimentError::io(p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| ExperimentError::Plan(format!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Medians over the seeds of one (method, capacity) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub capacity: u32,
    pub links: usize,
    pub events: usize,
    pub seeds: usize,
    pub observed: f64,
    pub complete: f64,
    pub total: f64,
    pub fic: f64,
    pub cec: f64,
    pub path_resolved: f64,
    pub drops: f64,
}

impl AggregateRow {
    pub fn fic_cell(&self) -> RatioCell {
        RatioCell::new(self.observed, self.total)
    }

    pub fn cec_cell(&self) -> RatioCell {
        RatioCell::new(self.complete, self.total)
    }
}

/// Groups cells by (method, capacity), keeping first-appearance order.
pub fn aggregate(cells: &[CellReport]) -> Vec<AggregateRow> {
    let mut order: Vec<(Method, u32)> = Vec::new();
    let mut groups: BTreeMap<(Method, u32), Vec<&CellReport>> = BTreeMap::new();
    for c in cells {
        let key = (c.method, c.capacity);
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(c);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let med = |f: &dyn Fn(&CellReport) -> f64| {
                median(&mut g.iter().map(|c| f(c)).collect::<Vec<_>>())
            };
            AggregateRow {
                method: key.0,
                capacity: key.1,
                links: g[0].selection.links.len(),
                events: g[0].selection.rationale.len(),
                seeds: g.len(),
                observed: med(&|c| c.coverage.observed_instances as f64),
                complete: med(&|c| c.coverage.complete_instances as f64),
                total: med(&|c| c.coverage.total_instances as f64),
                fic: med(&|c| c.coverage.fic),
                cec: med(&|c| c.coverage.cec),
                path_resolved: med(&|c| c.coverage.path_resolved),
                drops: med(&|c| c.simulation.total_drops as f64),
            }
        })
        .collect()
}

/// ASCII table of aggregate rows.
pub fn render_table(rows: &[AggregateRow]) -> String {
    let mut table = vec![vec![
        "method".to_string(),
        "capacity".into(),
        "links".into(),
        "FIC".into(),
        "CEC".into(),
        "path resolved".into(),
        "drops".into(),
    ]];
    for r in rows {
        table.push(vec![
            r.method.to_string(),
            r.capacity.to_string(),
            r.links.to_string(),
            r.fic_cell().to_string(),
            r.cec_cell().to_string(),
            format_number(r.path_resolved),
            format_number(r.drops),
        ]);
    }
    render_rows(&table)
}

/// Method comparison: method, link count, FIC, CEC.
pub fn render_compare(rows: &[AggregateRow]) -> String {
    let capacities: BTreeSet<u32> = rows.iter().map(|r| r.capacity).collect();
    let mut header = vec!["method".to_string()];
    if capacities.len() > 1 {
        header.push("capacity".into());
    }
    header.extend(["links".into(), "FIC".into(), "CEC".into()]);
    let mut lines: Vec<Vec<String>> = vec![header];
    for r in rows {
        let mut line = vec![r.method.to_string()];
        if capacities.len() > 1 {
            line.push(r.capacity.to_string());
        }
        line.extend([
            r.links.to_string(),
            r.fic_cell().to_string(),
            r.cec_cell().to_string(),
        ]);
        lines.push(line);
    }
    render_rows(&lines)
}

/// CSV of aggregate rows.
pub fn render_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "method,capacity,links,events,seeds,observed,complete,total,fic,cec,path_resolved,drops\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.capacity,
            r.links,
            r.events,
            r.seeds,
            r.observed,
            r.complete,
            r.total,
            r.fic,
            r.cec,
            r.path_resolved,
            r.drops
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_round_trip() {
        for (text, m) in [
            ("NONE", Method::None),
            ("fic", Method::Fic),
            ("CEC", Method::Cec),
            ("FC(16)", Method::Fc(16)),
            ("fc4", Method::Fc(4)),
        ] {
            assert_eq!(text.parse::<Method>().unwrap(), m);
        }
        assert_eq!(Method::Fc(16).to_string(), "FC(16)");
        assert_eq!(Method::Fc(16).slug(), "fc16");
        assert!("FC(0)".parse::<Method>().is_err());
        assert!("FIC2".parse::<Method>().is_err());
    }

    #[test]
    fn plan_parsing() {
        let plan = ExperimentPlan::from_json(
            r#"{"scope": ["CPU0"], "methods": ["NONE", "FC(16)"], "capacities": [8, 16], "seeds": [1, 2],
                "workload": {"instances_per_initiator": 3}, "drain": false}"#,
        )
        .unwrap();
        assert_eq!(
            plan.scope,
            Scope::Initiators([ComponentId::new("CPU0").unwrap()].into())
        );
        assert_eq!(plan.methods, vec![Method::None, Method::Fc(16)]);
        assert!(!plan.drain && plan.reallocate);
        assert_eq!(plan.workload.apply(5).instances_per_initiator, 3);
        assert_eq!(plan.workload.apply(5).seed, 5);

        let all = ExperimentPlan::from_json(r#"{"scope": "ALL", "seeds": [0]}"#).unwrap();
        assert_eq!(all.scope, Scope::All);
        assert!(ExperimentPlan::from_json(r#"{"scope": "SOME"}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn plan_checks() {
        let spec = load_prototype();
        let empty_scope = ExperimentPlan {
            scope: Scope::Initiators(BTreeSet::new()),
            ..ExperimentPlan::default()
        };
        assert!(matches!(
            run_plan(&empty_scope, &spec),
            Err(ExperimentError::Plan(_))
        ));
        let no_seeds = ExperimentPlan {
            seeds: vec![],
            ..ExperimentPlan::default()
        };
        assert!(no_seeds.check(&spec).is_err());
        let stranger = ExperimentPlan {
            scope: Scope::Initiators([ComponentId::new("Mem").unwrap()].into()),
            ..ExperimentPlan::default()
        };
        assert!(stranger.check(&spec).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seed_list("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seed_list("5, 7,0..2").unwrap(), vec![5, 7, 0, 1]);
        assert!(parse_seed_list("").is_err());
        assert!(parse_seed_list("x").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut []), 0.0);
    }

    #[test]
    fn small_plan_runs() {
        let spec = load_prototype();
        let plan = ExperimentPlan {
            scope: Scope::Initiators([ComponentId::new("CPU0").unwrap()].into()),
            seeds: vec![3],
            ..ExperimentPlan::default()
        };
        let cells = run_plan(&plan, &spec).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].file_name(), "none_8_3.json");
        assert_eq!(cells[0].coverage.total_instances, 100);
        let rows = aggregate(&cells);
        assert_eq!(rows.len(), 1);
        let table = render_table(&rows);
        assert!(table.starts_with("method"));
        assert_eq!(table.lines().count(), 2);
        let back: CellReport = serde_json::from_str(&cells[0].to_json()).unwrap();
        assert_eq!(back.to_json(), cells[0].to_json());
    }
}
