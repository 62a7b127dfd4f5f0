//! Command-line front end for flow observability experiments.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use flowscope_core::coverage::{
    evaluate, interleavings, reconstruct_with, IntervalClock, ObservationContext, Relation,
};
use flowscope_core::experiment::{
    aggregate, render_compare, render_csv, render_table, run_plan, write_cells, ExperimentPlan,
    Method,
};
use flowscope_core::flow_model::{ComponentId, FlowId};
use flowscope_core::selection::{
    select_cec, select_fc_baseline, select_fic, Selection, SelectionDocument, SelectionProblem,
};
use flowscope_core::spec_io::{load_prototype, parse_document, SpecError, SystemSpec};
use flowscope_core::tracing_sim::{
    run_simulation, write_ground_truth_csv, write_observed_csv, SimulationSummary, WorkloadConfig,
};

/// Exit status for validation or selection findings.
const FINDINGS: u8 = 1;
/// Exit status for I/O, usage and configuration errors.
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "flowscope",
    version,
    about = "Flow-level observability: selection, tracing simulation, coverage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a spec and check every flow for well-formedness.
    Validate {
        /// Spec file, or `prototype` for the built-in system.
        spec: String,
    },
    /// List the execution paths of one flow.
    Paths {
        spec: String,
        flow: String,
        /// Print JSON instead of one path per line.
        #[arg(long)]
        json: bool,
    },
    /// Choose events to observe and print the selection as JSON.
    Select {
        spec: String,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Number of events for the `fc` metric.
        #[arg(long, default_value_t = 16)]
        k: usize,
        /// Base queue capacity per link before reallocation.
        #[arg(long, default_value_t = 8)]
        capacity: u32,
        /// Initiators whose flows are observed, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
        /// Write the selection here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one seed with a selection and report coverage.
    Simulate {
        spec: String,
        /// Selection JSON written by `select`.
        #[arg(long)]
        selection: PathBuf,
        /// Base queue capacity per link.
        #[arg(long, default_value_t = 8)]
        capacity: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stop at the end of the workload instead of draining the queues.
        #[arg(long)]
        no_drain: bool,
        /// Give every enabled link `capacity` instead of spreading the budget.
        #[arg(long)]
        no_reallocate: bool,
        /// Events the trace port off-loads per cycle.
        #[arg(long, default_value_t = 1)]
        port_bandwidth: u32,
        /// Initiators counted in the report, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
        /// Write traces (CSV), summary and coverage (JSON) into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run an experiment plan and print median coverage per cell group.
    Run { plan: PathBuf },
    /// Run NONE, FIC, CEC and FC(k) on the plan's seeds and budget.
    Compare {
        plan: PathBuf,
        #[arg(long, default_value_t = 16)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Fic,
    Cec,
    Fc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { spec } => cmd_validate(&spec),
        Command::Paths { spec, flow, json } => cmd_paths(&spec, &flow, json),
        Command::Select {
            spec,
            metric,
            k,
            capacity,
            scope,
            out,
        } => cmd_select(&spec, metric, k, capacity, &scope, out.as_deref()),
        Command::Simulate {
            spec,
            selection,
            capacity,
            seed,
            no_drain,
            no_reallocate,
            port_bandwidth,
            scope,
            out_dir,
        } => cmd_simulate(SimulateArgs {
            spec,
            selection,
            capacity,
            seed,
            drain: !no_drain,
            reallocate: !no_reallocate,
            port_bandwidth,
            scope,
            out_dir,
        }),
        Command::Run { plan } => cmd_run(&plan, None),
        Command::Compare { plan, k } => cmd_run(&plan, Some(k)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}

fn read_spec_text(source: &str) -> Result<Option<String>> {
    if source == "prototype" {
        return Ok(None);
    }
    let text = fs::read_to_string(source).with_context(|| format!("cannot read {source}"))?;
    Ok(Some(text))
}

/// Loads a spec for commands other than `validate`; any problem is fatal.
fn load_spec(source: &str) -> Result<SystemSpec> {
    match read_spec_text(source)? {
        None => Ok(load_prototype()),
        Some(text) => {
            let spec = parse_document(&text).map_err(|e| anyhow::anyhow!("{source}:{e}"))?;
            let reports = spec.validate_flows();
            if !reports.is_empty() {
                let e = SpecError::Invalid { reports };
                bail!("{source}: invalid flows\n{e}");
            }
            Ok(spec)
        }
    }
}

fn cmd_validate(source: &str) -> Result<ExitCode> {
    let spec = match read_spec_text(source)? {
        None => load_prototype(),
        Some(text) => match parse_document(&text) {
            Ok(spec) => spec,
            Err(e) => {
                eprintln!("{source}:{e}");
                return Ok(ExitCode::from(FINDINGS));
            }
        },
    };
    let reports = spec.validate_flows();
    for r in &reports {
        println!("{r}");
    }
    if !reports.is_empty() {
        return Ok(ExitCode::from(FINDINGS));
    }
    println!(
        "{}: ok ({} flows, {} links, {} initiators)",
        spec.name(),
        spec.flows().len(),
        spec.topology().links().len(),
        spec.initiators().len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_paths(source: &str, flow: &str, json: bool) -> Result<ExitCode> {
    let spec = load_spec(source)?;
    let id = FlowId::new(flow)?;
    let Some(f) = spec.flow(&id) else {
        bail!("no flow {flow} in {}", spec.name());
    };
    let paths = f.enumerate_paths()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&paths)?);
    } else {
        for p in &paths {
            let ids: Vec<&str> = p.transitions.iter().map(|t| t.as_str()).collect();
            let labels: Vec<String> = f.path_labels(p).iter().map(|e| e.to_string()).collect();
            println!("{}    {}", ids.join(" "), labels.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_scope(names: &[String], spec: &SystemSpec) -> Result<Option<BTreeSet<ComponentId>>> {
    if names.is_empty() || (names.len() == 1 && names[0].eq_ignore_ascii_case("all")) {
        return Ok(None);
    }
    let mut set = BTreeSet::new();
    for n in names {
        let c = ComponentId::new(n.as_str())?;
        if spec.initiator(&c).is_none() {
            bail!("{n} is not an initiator of {}", spec.name());
        }
        set.insert(c);
    }
    Ok(Some(set))
}

fn cmd_select(
    source: &str,
    metric: Metric,
    k: usize,
    capacity: u32,
    scope: &[String],
    out: Option<&Path>,
) -> Result<ExitCode> {
    let spec = load_spec(source)?;
    let scope = parse_scope(scope, &spec)?;
    let problem = SelectionProblem::from_spec(&spec, scope.as_ref(), capacity)?;
    let (method, selection) = match metric {
        Metric::Fic => (Method::Fic, select_fic(&problem)?),
        Metric::Cec => (Method::Cec, select_cec(&problem)?),
        Metric::Fc => (Method::Fc(k), select_fc_baseline(&problem, k)?),
    };
    let doc = SelectionDocument {
        method: method.to_string(),
        observability: selection.reallocated_config(&problem)?,
        selection,
    };
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    eprintln!(
        "{}: {} events on {} links",
        doc.method,
        doc.selection.rationale.len(),
        doc.selection.links.len()
    );
    for u in &doc.selection.undistinguishable {
        eprintln!(
            "flow {}: paths {:?} and {:?} have identical labels",
            u.flow, u.first.transitions, u.second.transitions
        );
    }
    if doc.selection.undistinguishable.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(FINDINGS))
    }
}

struct SimulateArgs {
    spec: String,
    selection: PathBuf,
    capacity: u32,
    seed: u64,
    drain: bool,
    reallocate: bool,
    port_bandwidth: u32,
    scope: Vec<String>,
    out_dir: Option<PathBuf>,
}

fn read_selection(path: &Path) -> Result<Selection> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if let Ok(doc) = serde_json::from_str::<SelectionDocument>(&text) {
        return Ok(doc.selection);
    }
    serde_json::from_str(&text).with_context(|| format!("{} is not a selection", path.display()))
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let spec = load_spec(&args.spec)?;
    let scope = parse_scope(&args.scope, &spec)?;
    let selection = read_selection(&args.selection)?;
    let mut obs = if args.reallocate {
        let problem = SelectionProblem::from_spec(&spec, None, args.capacity)?;
        selection.reallocated_config(&problem)?
    } else {
        selection.uniform_config(args.capacity)
    };
    obs.drain = args.drain;
    obs.port_bandwidth = args.port_bandwidth;

    let result = run_simulation(&spec, &WorkloadConfig::with_seed(args.seed), &obs)?;
    let report = evaluate(&result, &spec, scope.as_ref())?;
    print!("{}", report.to_table());

    let recons = reconstruct_with(
        &result.observed,
        &spec,
        &ObservationContext::from_result(&result),
    )?;
    let pairs = interleavings(&recons, IntervalClock::OffloadOrder);
    let count = |r: Relation| pairs.iter().filter(|p| p.relation == r).count();
    println!(
        "interleavings: {} contains, {} overlaps, {} precedes",
        count(Relation::Contains),
        count(Relation::Overlaps),
        count(Relation::Precedes)
    );
    println!("drops: {}", result.total_drops());

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let open = |name: &str| {
            let path = dir.join(name);
            fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))
        };
        write_ground_truth_csv(&result, std::io::BufWriter::new(open("ground_truth.csv")?))?;
        write_observed_csv(&result, std::io::BufWriter::new(open("observed.csv")?))?;
        let summary = serde_json::to_string_pretty(&SimulationSummary::from(&result))? + "\n";
        fs::write(dir.join("summary.json"), summary)?;
        fs::write(
            dir.join("coverage.json"),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs a plan; with `compare_k` the methods become NONE, FIC, CEC, FC(k).
fn cmd_run(plan_path: &Path, compare_k: Option<usize>) -> Result<ExitCode> {
    let (mut plan, base) = ExperimentPlan::load(plan_path)?;
    if let Some(k) = compare_k {
        plan.methods = vec![Method::None, Method::Fic, Method::Cec, Method::Fc(k)];
    }
    let spec = plan.load_spec(&base)?;
    let cells = run_plan(&plan, &spec)?;
    let rows = aggregate(&cells);

    let out_dir = base.join(plan.out_dir.as_deref().unwrap_or("results"));
    write_cells(&cells, &out_dir)?;
    let table = if compare_k.is_some() {
        render_compare(&rows)
    } else {
        render_table(&rows)
    };
    let name = if compare_k.is_some() {
        "compare"
    } else {
        "aggregate"
    };
    fs::write(out_dir.join(format!("{name}.txt")), &table)?;
    fs::write(out_dir.join(format!("{name}.csv")), render_csv(&rows))?;
    print!("{table}");
    eprintln!("{} cells written to {}", cells.len(), out_dir.display());
    Ok(ExitCode::SUCCESS)
}
