use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::flow_model::fixtures::*;
use crate::spec_io::load_prototype;

fn lid(s: &str) -> LinkId {
    LinkId::new(s).unwrap()
}

/// One link per (src, dest) pair.
fn problem(flows: Vec<Flow>) -> SelectionProblem {
    let mut map = BTreeMap::new();
    for f in &flows {
        for e in f.events() {
            let l = lid(&format!("L_{}_{}", e.src(), e.dest()));
            map.insert(e, l);
        }
    }
    let links = map.values().cloned().collect();
    SelectionProblem::new(flows, map, links, 8).unwrap()
}

fn linear(id: &str, events: &[&str]) -> Flow {
    let places: Vec<String> = (0..=events.len()).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = places.iter().map(String::as_str).collect();
    let ts = events
        .iter()
        .enumerate()
        .map(|(i, e)| tr(&format!("t{}", i + 1), &[refs[i]], &[refs[i + 1]], e))
        .collect();
    flow(id, &refs, ts, &[refs[0]], &[refs[events.len()]])
}

fn distinguishing(problem: &SelectionProblem, sel: &Selection) -> bool {
    let events = sel.events();
    problem.flows().iter().all(|f| {
        let projections: Vec<Vec<&Event>> = f
            .enumerate_paths()
            .unwrap()
            .iter()
            .map(|p| {
                f.path_labels(p)
                    .into_iter()
                    .filter(|e| events.contains(*e))
                    .collect()
            })
            .collect();
        let distinct: BTreeSet<_> = projections.iter().collect();
        distinct.len() == projections.len()
    })
}

#[test]
fn reallocation_examples() {
    let all: BTreeSet<LinkId> = (0..32).map(|i| lid(&format!("L{i:02}"))).collect();
    let first = |n: usize| all.iter().take(n).cloned().collect::<BTreeSet<_>>();

    let caps = reallocate_queues(8, &all, &all).unwrap();
    assert!(caps.values().all(|c| *c == 8));
    let caps = reallocate_queues(8, &all, &first(16)).unwrap();
    assert_eq!(caps.len(), 16);
    assert!(caps.values().all(|c| *c == 16));
    let caps = reallocate_queues(8, &all, &first(12)).unwrap();
    let values: Vec<u32> = caps.values().copied().collect();
    assert_eq!(values, [22, 22, 22, 22, 21, 21, 21, 21, 21, 21, 21, 21]);
    assert_eq!(values.iter().sum::<u32>(), 256);

    assert!(reallocate_queues(8, &all, &BTreeSet::new()).is_err());
    assert!(reallocate_queues(8, &all, &BTreeSet::from([lid("X")])).is_err());
}

#[test]
fn fic_single_flow_uses_one_link() {
    let p = problem(vec![cpu_write()]);
    let sel = select_fic(&p).unwrap();
    assert_eq!(sel.links.len(), 1);
    assert_eq!(sel.rationale.len(), 1);
    // Only the request and the response occur on every path.
    assert_eq!(sel.events(), BTreeSet::from([ev("CPU_X:Cache_X:wr_req")]));
    assert_eq!(minimal_link_cover_oracle(&p).unwrap(), 1);
}

#[test]
fn fic_prefers_shared_event() {
    let p = problem(vec![
        linear("f1", &["A:B:x", "B:C:s"]),
        linear("f2", &["D:E:y", "B:C:s"]),
    ]);
    let sel = select_fic(&p).unwrap();
    assert_eq!(sel.events(), BTreeSet::from([ev("B:C:s")]));
    assert_eq!(sel.rationale[&ev("B:C:s")], Reason::FlowCover);
}

#[test]
fn oracle_on_disjoint_flows() {
    let p = problem(vec![linear("f1", &["A:B:x"]), linear("f2", &["C:D:y"])]);
    assert_eq!(minimal_link_cover_oracle(&p).unwrap(), 2);
    assert_eq!(select_fic(&p).unwrap().links.len(), 2);
}

#[test]
fn fic_covers_branches_with_several_links() {
    // No link is on both paths, so each branch needs its own.
    let f = flow(
        "split",
        &["a", "b", "c"],
        vec![
            tr("t1", &["a"], &["b"], "A:B:x"),
            tr("t2", &["a"], &["c"], "A:C:y"),
        ],
        &["a"],
        &["b", "c"],
    );
    let p = problem(vec![f]);
    let sel = select_fic(&p).unwrap();
    assert_eq!(sel.links.len(), 2);
    assert_eq!(minimal_link_cover_oracle(&p).unwrap(), 2);
}

#[test]
fn cec_on_cpu_write() {
    let p = problem(vec![cpu_write()]);
    let sel = select_cec(&p).unwrap();
    let events = sel.events();
    assert_eq!(sel.rationale[&ev("CPU_X:Cache_X:wr_req")], Reason::Start);
    assert_eq!(sel.rationale[&ev("Cache_X:CPU_X:wr_resp")], Reason::End);
    let f = cpu_write();
    let label = |t: &str| f.label(&tid(t)).unwrap().clone();
    let left: Vec<Event> = ["t2", "t3"].map(label).into();
    let middle: Vec<Event> = ["t4", "t5", "t6", "t7"].map(label).into();
    assert_eq!(left.iter().filter(|e| events.contains(*e)).count(), 1);
    assert_eq!(middle.iter().filter(|e| events.contains(*e)).count(), 1);
    assert_eq!(events.len(), 4);
    assert!(distinguishing(&p, &sel));
    assert!(sel.undistinguishable.is_empty());
}

#[test]
fn cec_on_linear_flow_needs_no_extras() {
    let p = problem(vec![linear("f", &["A:B:x", "B:C:y", "C:A:z"])]);
    let sel = select_cec(&p).unwrap();
    assert_eq!(sel.events(), BTreeSet::from([ev("A:B:x"), ev("C:A:z")]));
}

#[test]
fn cec_reports_identical_label_paths() {
    let f = flow(
        "twins",
        &["a", "b", "c"],
        vec![
            tr("t1", &["a"], &["b"], "A:B:x"),
            tr("t2", &["a"], &["b"], "A:B:x"),
            tr("t3", &["b"], &["c"], "B:A:y"),
        ],
        &["a"],
        &["c"],
    );
    let sel = select_cec(&problem(vec![f])).unwrap();
    assert_eq!(sel.undistinguishable.len(), 1);
    assert_eq!(sel.events().len(), 2);
}

#[test]
fn cec_separates_reordered_paths() {
    // Same events in opposite orders: no single extra event tells them apart.
    let f = flow(
        "order",
        &["a", "b", "c", "d", "e"],
        vec![
            tr("t1", &["a"], &["b"], "S:A:go"),
            tr("t2", &["b"], &["c"], "A:B:x"),
            tr("t3", &["c"], &["e"], "B:C:y"),
            tr("t4", &["b"], &["d"], "B:C:y"),
            tr("t5", &["d"], &["e"], "A:B:x"),
        ],
        &["a"],
        &["e"],
    );
    let p = problem(vec![f]);
    let sel = select_cec(&p).unwrap();
    assert!(distinguishing(&p, &sel));
}

#[test]
fn fc_baseline_ranks_shared_events() {
    let p = problem(vec![
        linear("f1", &["A:B:x", "B:C:s"]),
        linear("f2", &["D:E:y", "B:C:s"]),
    ]);
    let sel = select_fc_baseline(&p, 1).unwrap();
    assert_eq!(sel.events(), BTreeSet::from([ev("B:C:s")]));
    assert_eq!(sel.rationale[&ev("B:C:s")], Reason::FcRank);
    assert_eq!(select_fc_baseline(&p, 3).unwrap().events(), p.events());
    assert!(matches!(
        select_fc_baseline(&p, 0),
        Err(SelectionError::BadK { .. })
    ));
    assert!(matches!(
        select_fc_baseline(&p, 4),
        Err(SelectionError::BadK { .. })
    ));
}

#[test]
fn selectors_are_deterministic() {
    let spec = load_prototype();
    let p = SelectionProblem::from_spec(&spec, None, 8).unwrap();
    assert_eq!(select_fic(&p).unwrap(), select_fic(&p).unwrap());
    assert_eq!(select_cec(&p).unwrap(), select_cec(&p).unwrap());
    assert_eq!(
        select_fc_baseline(&p, 16).unwrap(),
        select_fc_baseline(&p, 16).unwrap()
    );
}

#[test]
fn prototype_fic_selection() {
    let spec = load_prototype();
    let p = SelectionProblem::from_spec(&spec, None, 8).unwrap();
    let sel = select_fic(&p).unwrap();
    let events = sel.events();
    for f in p.flows() {
        for path in f.enumerate_paths().unwrap() {
            assert!(
                f.path_labels(&path).iter().any(|e| events.contains(*e)),
                "{}",
                f.id()
            );
        }
    }
    assert!(matches!(
        minimal_link_cover_oracle(&p),
        Err(SelectionError::TooLarge {
            links: 32,
            bound: 24
        })
    ));
    assert_eq!(sel.links.len(), 7);
    // No selected event ends any flow.
    let ends: BTreeSet<Event> = p.flows().iter().flat_map(|f| f.end_events()).collect();
    assert!(events.is_disjoint(&ends));
}

#[test]
fn prototype_scoped_oracle() {
    let spec = load_prototype();
    let scope: BTreeSet<ComponentId> = ["GFX", "Audio"]
        .map(|c| ComponentId::new(c).unwrap())
        .into();
    let p = SelectionProblem::from_spec(&spec, Some(&scope), 8).unwrap();
    let oracle = minimal_link_cover_oracle(&p).unwrap();
    assert_eq!(select_fic(&p).unwrap().links.len(), oracle);
    assert_eq!(oracle, 2);
}

#[test]
fn prototype_cec_and_fc() {
    let spec = load_prototype();
    let p = SelectionProblem::from_spec(&spec, None, 8).unwrap();
    let cec = select_cec(&p).unwrap();
    let mandatory = cec
        .rationale
        .values()
        .filter(|r| matches!(r, Reason::Start | Reason::End))
        .count();
    assert_eq!(mandatory, 32);
    assert!(distinguishing(&p, &cec));

    let fc = select_fc_baseline(&p, 16).unwrap();
    assert_eq!(fc.links.len(), 16);
    let boundary: BTreeSet<Event> = p
        .flows()
        .iter()
        .flat_map(|f| f.start_events().into_iter().chain(f.end_events()))
        .collect();
    assert_eq!(boundary.len(), 32);
    assert!(fc.events().is_disjoint(&boundary));
}

#[test]
fn configs_follow_selection() {
    let spec = load_prototype();
    let p = SelectionProblem::from_spec(&spec, None, 8).unwrap();
    let sel = select_fic(&p).unwrap();
    let obs = sel.reallocated_config(&p).unwrap();
    obs.check(&spec).unwrap();
    assert_eq!(
        obs.queue_capacity.values().map(|c| *c as u64).sum::<u64>(),
        p.total_queue_budget()
    );
    let obs = sel.uniform_config(8);
    obs.check(&spec).unwrap();
    let all = select_all(&p);
    assert_eq!(all.links.len(), 32);
}
