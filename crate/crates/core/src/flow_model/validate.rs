use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{Flow, FlowId, Marking, PlaceId, TransitionId};

/// Upper bound on explored markings during behavioral checks.
const MAX_REACHABLE_MARKINGS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    EmptyInitialMarking,
    EmptyEndMarking,
    InitialEndOverlap {
        places: Vec<PlaceId>,
    },
    PrePostOverlap {
        transition: TransitionId,
        places: Vec<PlaceId>,
    },
    EndPlaceConsumed {
        place: PlaceId,
        transition: TransitionId,
    },
    CyclicStructure {
        cycle: Vec<String>,
    },
    DeadTransition {
        transition: TransitionId,
    },
    UnreachablePlace {
        place: PlaceId,
    },
    ImproperTermination {
        marking: String,
    },
    UnsafeFiring {
        transition: TransitionId,
        place: PlaceId,
    },
    StateSpaceTooLarge {
        bound: usize,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::EmptyInitialMarking => write!(f, "initial marking is empty"),
            Finding::EmptyEndMarking => write!(f, "end marking is empty"),
            Finding::InitialEndOverlap { places } => {
                write!(f, "places {} are both initial and end", join(places))
            }
            Finding::PrePostOverlap { transition, places } => write!(
                f,
                "transition {transition} has places {} in both preset and postset",
                join(places)
            ),
            Finding::EndPlaceConsumed { place, transition } => {
                write!(f, "end place {place} is consumed by transition {transition}")
            }
            Finding::CyclicStructure { cycle } => {
                write!(f, "cyclic structure: {}", cycle.join(" -> "))
            }
            Finding::DeadTransition { transition } => {
                write!(f, "dead transition {transition}: never enabled from the initial marking")
            }
            Finding::UnreachablePlace { place } => write!(f, "unreachable place {place}"),
            Finding::ImproperTermination { marking } => write!(
                f,
                "improper termination: execution halts in {marking}, which is not within the end marking"
            ),
            Finding::UnsafeFiring { transition, place } => write!(
                f,
                "unsafe firing: transition {transition} puts a second token on {place}"
            ),
            Finding::StateSpaceTooLarge { bound } => {
                write!(f, "state space exceeds {bound} markings, behavioral checks skipped")
            }
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub flow: FlowId,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return write!(f, "flow {}: ok", self.flow);
        }
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "flow {}: {finding}", self.flow)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Place(usize),
    Transition(usize),
}

/// Returns one cycle of the place/transition graph, if any.
pub(super) fn find_cycle(flow: &Flow) -> Option<Vec<String>> {
    let places: Vec<&PlaceId> = flow.places.iter().collect();
    let place_idx = |p: &PlaceId| places.binary_search(&p).expect("place declared");
    let n_places = places.len();
    let n = n_places + flow.transitions.len();

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in flow.transitions.iter().enumerate() {
        for p in &t.preset {
            succ[place_idx(p)].push(n_places + ti);
        }
        for p in &t.postset {
            succ[n_places + ti].push(place_idx(p));
        }
    }
    let name = |i: usize| match node(i, n_places) {
        Node::Place(p) => places[p].to_string(),
        Node::Transition(t) => flow.transitions[t].id.to_string(),
    };

    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        stack.push(root);
        while let Some(top) = work.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push(w);
                        work.push((w, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|&x| x == w).expect("on stack");
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|&x| name(x)).collect();
                        cycle.push(name(w));
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
                work.pop();
            }
        }
    }
    None
}

fn node(i: usize, n_places: usize) -> Node {
    if i < n_places {
        Node::Place(i)
    } else {
        Node::Transition(i - n_places)
    }
}

impl Flow {
    /// Checks structural and behavioral well-formedness.
    ///
    /// Behavioral checks (dead transitions, unreachable places, termination
    /// inside the end marking, safeness) explore the reachable markings and
    /// only run on acyclic flows.
    pub fn validate(&self) -> ValidationReport {
        let mut findings = Vec::new();

        if self.initial.is_empty() {
            findings.push(Finding::EmptyInitialMarking);
        }
        if self.end.is_empty() {
            findings.push(Finding::EmptyEndMarking);
        }
        let overlap: Vec<PlaceId> = self
            .initial
            .places()
            .intersection(self.end.places())
            .cloned()
            .collect();
        if !overlap.is_empty() {
            findings.push(Finding::InitialEndOverlap { places: overlap });
        }
        for t in &self.transitions {
            let both: Vec<PlaceId> = t.preset.intersection(&t.postset).cloned().collect();
            if !both.is_empty() {
                findings.push(Finding::PrePostOverlap {
                    transition: t.id.clone(),
                    places: both,
                });
            }
            for p in t.preset.iter().filter(|p| self.end.contains(p)) {
                findings.push(Finding::EndPlaceConsumed {
                    place: p.clone(),
                    transition: t.id.clone(),
                });
            }
        }

        if let Some(cycle) = find_cycle(self) {
            findings.push(Finding::CyclicStructure { cycle });
        } else if !self.initial.is_empty() {
            self.behavioral_findings(&mut findings);
        }

        ValidationReport {
            flow: self.id.clone(),
            findings,
        }
    }

    fn behavioral_findings(&self, findings: &mut Vec<Finding>) {
        let mut seen: BTreeSet<Marking> = BTreeSet::new();
        let mut queue = VecDeque::new();
        let mut fired: BTreeSet<&TransitionId> = BTreeSet::new();
        let mut marked: BTreeSet<&PlaceId> = BTreeSet::new();
        let mut bad_terminals: BTreeSet<Marking> = BTreeSet::new();
        let mut unsafe_arcs: BTreeSet<(TransitionId, PlaceId)> = BTreeSet::new();

        seen.insert(self.initial.clone());
        queue.push_back(self.initial.clone());
        while let Some(m) = queue.pop_front() {
            for p in m.iter() {
                marked.insert(self.places.get(p).expect("declared"));
            }
            let enabled = self.enabled_transitions(&m);
            if enabled.is_empty() {
                if m.is_empty() || !m.is_subset(&self.end) {
                    bad_terminals.insert(m);
                }
                continue;
            }
            for t in enabled {
                fired.insert(&t.id);
                for p in t.postset.iter() {
                    if m.contains(p) && !t.preset.contains(p) {
                        unsafe_arcs.insert((t.id.clone(), p.clone()));
                    }
                }
                let next = self.fire(&m, &t.id).expect("enabled");
                if seen.insert(next.clone()) {
                    if seen.len() > MAX_REACHABLE_MARKINGS {
                        findings.push(Finding::StateSpaceTooLarge {
                            bound: MAX_REACHABLE_MARKINGS,
                        });
                        return;
                    }
                    queue.push_back(next);
                }
            }
        }

        for t in &self.transitions {
            if !fired.contains(&t.id) {
                findings.push(Finding::DeadTransition {
                    transition: t.id.clone(),
                });
            }
        }
        for p in &self.places {
            if !marked.contains(p) {
                findings.push(Finding::UnreachablePlace { place: p.clone() });
            }
        }
        for m in bad_terminals {
            findings.push(Finding::ImproperTermination {
                marking: m.to_string(),
            });
        }
        for (transition, place) in unsafe_arcs {
            findings.push(Finding::UnsafeFiring { transition, place });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn cpu_write_is_clean() {
        let report = cpu_write().validate();
        assert!(report.is_clean(), "{report}");
    }

    #[test]
    fn dead_transition_is_reported() {
        // t2 needs `x`, which nothing ever marks.
        let f = flow(
            "dead",
            &["a", "b", "x", "y"],
            vec![
                tr("t1", &["a"], &["b"], "X:Y:a"),
                tr("t2", &["x"], &["y"], "Y:X:b"),
            ],
            &["a"],
            &["b", "y"],
        );
        let report = f.validate();
        let text = report.to_string();
        assert!(text.contains("dead transition t2"), "{text}");
        assert!(text.contains("unreachable place x"), "{text}");
    }

    #[test]
    fn cycle_is_reported() {
        let f = flow(
            "cyc",
            &["p", "q", "z"],
            vec![
                tr("t", &["p"], &["q"], "X:Y:a"),
                tr("u", &["q"], &["p"], "Y:X:b"),
                tr("v", &["q"], &["z"], "Y:X:c"),
            ],
            &["p"],
            &["z"],
        );
        let report = f.validate();
        assert!(report
            .findings
            .iter()
            .any(|x| matches!(x, Finding::CyclicStructure { .. })));
        assert!(report.to_string().contains("cyclic structure"));
    }

    #[test]
    fn termination_outside_end_is_reported() {
        let f = flow(
            "stuck",
            &["a", "b", "c"],
            vec![
                tr("t1", &["a"], &["b"], "X:Y:a"),
                tr("t2", &["a"], &["c"], "X:Y:b"),
            ],
            &["a"],
            &["c"],
        );
        let report = f.validate();
        assert!(report.findings.contains(&Finding::ImproperTermination {
            marking: "{b}".into()
        }));
    }

    #[test]
    fn marking_and_arc_defects() {
        let f = flow(
            "bad",
            &["a", "b"],
            vec![tr("t1", &["a"], &["a", "b"], "X:Y:a")],
            &["a"],
            &["a"],
        );
        let report = f.validate();
        assert!(report.findings.contains(&Finding::InitialEndOverlap {
            places: vec![pid("a")]
        }));
        assert!(report.findings.contains(&Finding::PrePostOverlap {
            transition: tid("t1"),
            places: vec![pid("a")]
        }));
        assert!(report.findings.contains(&Finding::EndPlaceConsumed {
            place: pid("a"),
            transition: tid("t1")
        }));
    }

    #[test]
    fn unsafe_firing_is_reported() {
        // Two tokens converge on `c`.
        let f = flow(
            "join",
            &["a", "b", "c"],
            vec![
                tr("t1", &["a"], &["c"], "X:Y:a"),
                tr("t2", &["b"], &["c"], "X:Y:b"),
            ],
            &["a", "b"],
            &["c"],
        );
        let report = f.validate();
        assert!(report
            .findings
            .iter()
            .any(|x| matches!(x, Finding::UnsafeFiring { .. })));
    }
}
