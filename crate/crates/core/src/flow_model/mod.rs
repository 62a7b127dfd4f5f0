//! System flows as labeled Petri nets.
//!
//! A [`Flow`] is a safe, acyclic place/transition net where every transition
//! carries the communication [`Event`] it emits when fired. Markings are sets
//! of places, so a place holds at most one token. Choices between enabled
//! transitions are not resolved here; callers pick which enabled transition
//! to [`Flow::fire`].

mod paths;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use crate::ids::{ComponentId, FlowId, IdentError, PlaceId, TransitionId};
pub use paths::{FlowPath, DEFAULT_PATH_BOUND};
pub use validate::{Finding, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Ident(#[from] IdentError),
    #[error("event {0} has identical source and destination")]
    SelfEvent(String),
    #[error("malformed event {0:?}: expected <src>:<dest>:<cmd>")]
    MalformedEvent(String),
    #[error("flow {flow}: transition {transition} references unknown place {place}")]
    UnknownPlace {
        flow: FlowId,
        transition: TransitionId,
        place: PlaceId,
    },
    #[error("flow {flow}: marking references unknown place {place}")]
    UnknownMarkedPlace { flow: FlowId, place: PlaceId },
    #[error("flow {flow}: duplicate transition {transition}")]
    DuplicateTransition {
        flow: FlowId,
        transition: TransitionId,
    },
    #[error("flow {flow}: transition {transition} has an empty {side}")]
    EmptyArcSet {
        flow: FlowId,
        transition: TransitionId,
        side: &'static str,
    },
    #[error("flow {flow}: unknown transition {transition}")]
    UnknownTransition {
        flow: FlowId,
        transition: TransitionId,
    },
    #[error("flow {flow}: transition {transition} is not enabled")]
    NotEnabled {
        flow: FlowId,
        transition: TransitionId,
    },
    #[error("flow {flow}: more than {bound} execution paths")]
    PathExplosion { flow: FlowId, bound: usize },
    #[error("flow {flow}: cyclic structure, paths are unbounded")]
    Cyclic { flow: FlowId },
}

/// A message `cmd` sent from `src` to `dest`. Identity is structural.
///
/// Serialized as the string `src:dest:cmd`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    src: ComponentId,
    dest: ComponentId,
    cmd: String,
}

impl Event {
    pub fn new(
        src: ComponentId,
        dest: ComponentId,
        cmd: impl Into<String>,
    ) -> Result<Self, FlowError> {
        let cmd = cmd.into();
        crate::ids::check_ident(&cmd).map_err(|reason| IdentError {
            kind: "command",
            value: cmd.clone(),
            reason,
        })?;
        if src == dest {
            return Err(FlowError::SelfEvent(format!("{src}:{dest}:{cmd}")));
        }
        Ok(Self { src, dest, cmd })
    }

    pub fn src(&self) -> &ComponentId {
        &self.src
    }

    pub fn dest(&self) -> &ComponentId {
        &self.dest
    }

    pub fn cmd(&self) -> &str {
        &self.cmd
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.src, self.dest, self.cmd)
    }
}

impl FromStr for Event {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [src, dest, cmd] = parts.as_slice() else {
            return Err(FlowError::MalformedEvent(s.to_string()));
        };
        Event::new(ComponentId::new(*src)?, ComponentId::new(*dest)?, *cmd)
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of marked places.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(BTreeSet<PlaceId>);

impl Marking {
    pub fn new(places: impl IntoIterator<Item = PlaceId>) -> Self {
        Self(places.into_iter().collect())
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.0
    }

    pub fn contains(&self, place: &PlaceId) -> bool {
        self.0.contains(place)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_subset(&self, other: &Marking) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PlaceId> {
        self.0.iter()
    }
}

impl FromIterator<PlaceId> for Marking {
    fn from_iter<I: IntoIterator<Item = PlaceId>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: TransitionId,
    pub preset: BTreeSet<PlaceId>,
    pub postset: BTreeSet<PlaceId>,
    /// The label: the event emitted when this transition fires.
    pub event: Event,
}

impl Transition {
    pub fn new(
        id: TransitionId,
        preset: impl IntoIterator<Item = PlaceId>,
        postset: impl IntoIterator<Item = PlaceId>,
        event: Event,
    ) -> Self {
        Self {
            id,
            preset: preset.into_iter().collect(),
            postset: postset.into_iter().collect(),
            event,
        }
    }

    pub fn is_enabled(&self, marking: &Marking) -> bool {
        self.preset.is_subset(&marking.0)
    }
}

/// A labeled Petri net describing one system flow.
///
/// Construction only checks referential integrity (places exist, transition
/// ids are unique, arc sets are nonempty). Behavioral well-formedness is
/// checked by [`Flow::validate`], so that defective flows can still be built
/// and reported on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    id: FlowId,
    places: BTreeSet<PlaceId>,
    transitions: Vec<Transition>,
    index: BTreeMap<TransitionId, usize>,
    initial: Marking,
    end: Marking,
}

impl Flow {
    pub fn new(
        id: FlowId,
        places: impl IntoIterator<Item = PlaceId>,
        transitions: impl IntoIterator<Item = Transition>,
        initial: Marking,
        end: Marking,
    ) -> Result<Self, FlowError> {
        let places: BTreeSet<PlaceId> = places.into_iter().collect();
        let mut transitions: Vec<Transition> = transitions.into_iter().collect();
        transitions.sort_by(|a, b| a.id.cmp(&b.id));

        let mut index = BTreeMap::new();
        for (i, t) in transitions.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(FlowError::DuplicateTransition {
                    flow: id,
                    transition: t.id.clone(),
                });
            }
            for (side, set) in [("preset", &t.preset), ("postset", &t.postset)] {
                if set.is_empty() {
                    return Err(FlowError::EmptyArcSet {
                        flow: id,
                        transition: t.id.clone(),
                        side,
                    });
                }
                if let Some(place) = set.iter().find(|p| !places.contains(*p)) {
                    return Err(FlowError::UnknownPlace {
                        flow: id,
                        transition: t.id.clone(),
                        place: place.clone(),
                    });
                }
            }
        }
        if let Some(place) = initial
            .iter()
            .chain(end.iter())
            .find(|p| !places.contains(*p))
        {
            return Err(FlowError::UnknownMarkedPlace {
                flow: id,
                place: place.clone(),
            });
        }

        Ok(Self {
            id,
            places,
            transitions,
            index,
            initial,
            end,
        })
    }

    pub fn id(&self) -> &FlowId {
        &self.id
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    /// Transitions in id order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: &TransitionId) -> Option<&Transition> {
        self.index.get(id).map(|&i| &self.transitions[i])
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn end_marking(&self) -> &Marking {
        &self.end
    }

    pub fn label(&self, id: &TransitionId) -> Option<&Event> {
        self.transition(id).map(|t| &t.event)
    }

    /// Every distinct label used by this flow.
    pub fn events(&self) -> BTreeSet<Event> {
        self.transitions.iter().map(|t| t.event.clone()).collect()
    }

    /// Transitions whose preset is contained in `marking`, in id order.
    pub fn enabled_transitions(&self, marking: &Marking) -> Vec<&Transition> {
        self.transitions
            .iter()
            .filter(|t| t.is_enabled(marking))
            .collect()
    }

    /// Fires `transition` from `marking`: `(marking - preset) ∪ postset`.
    pub fn fire(&self, marking: &Marking, transition: &TransitionId) -> Result<Marking, FlowError> {
        let t = self
            .transition(transition)
            .ok_or_else(|| FlowError::UnknownTransition {
                flow: self.id.clone(),
                transition: transition.clone(),
            })?;
        if !t.is_enabled(marking) {
            return Err(FlowError::NotEnabled {
                flow: self.id.clone(),
                transition: transition.clone(),
            });
        }
        let mut next: BTreeSet<PlaceId> = marking.0.difference(&t.preset).cloned().collect();
        next.extend(t.postset.iter().cloned());
        Ok(Marking(next))
    }

    /// Labels of transitions enabled by the initial marking.
    pub fn start_events(&self) -> BTreeSet<Event> {
        self.transitions
            .iter()
            .filter(|t| t.preset.is_subset(&self.initial.0))
            .map(|t| t.event.clone())
            .collect()
    }

    /// Labels of transitions that only produce end-marking places.
    pub fn end_events(&self) -> BTreeSet<Event> {
        self.transitions
            .iter()
            .filter(|t| t.postset.is_subset(&self.end.0))
            .map(|t| t.event.clone())
            .collect()
    }

    /// Labels of a path in firing order.
    pub fn path_labels<'a>(&'a self, path: &FlowPath) -> Vec<&'a Event> {
        path.transitions
            .iter()
            .filter_map(|t| self.label(t))
            .collect()
    }

    /// Structural acyclicity of the place/transition graph.
    pub fn is_acyclic(&self) -> bool {
        validate::find_cycle(self).is_none()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn ids(ts: Vec<&Transition>) -> Vec<&str> {
        ts.into_iter().map(|t| t.id.as_str()).collect()
    }

    #[test]
    fn enabled_in_initial_and_choice_states() {
        let f = cpu_write();
        assert_eq!(ids(f.enabled_transitions(&marking(&["p1"]))), ["t1"]);
        assert_eq!(ids(f.enabled_transitions(&marking(&["p2"]))), ["t10", "t2"]);
        assert!(f.enabled_transitions(&Marking::default()).is_empty());
    }

    #[test]
    fn fire_follows_firing_rule() {
        let f = cpu_write();
        assert_eq!(
            f.fire(&marking(&["p1"]), &tid("t1")).unwrap(),
            marking(&["p2"])
        );
        assert_eq!(
            f.fire(&marking(&["p2"]), &tid("t10")).unwrap(),
            marking(&["p9"])
        );
        assert!(matches!(
            f.fire(&marking(&["p2"]), &tid("t3")),
            Err(FlowError::NotEnabled { .. })
        ));
        assert!(matches!(
            f.fire(&marking(&["p2"]), &tid("t99")),
            Err(FlowError::UnknownTransition { .. })
        ));
    }

    #[test]
    fn start_and_end_events() {
        let f = cpu_write();
        assert_eq!(
            f.start_events(),
            BTreeSet::from([ev("CPU_X:Cache_X:wr_req")])
        );
        assert_eq!(
            f.end_events(),
            BTreeSet::from([ev("Cache_X:CPU_X:wr_resp")])
        );
    }

    #[test]
    fn two_start_transitions_give_two_start_events() {
        let f = flow(
            "fork",
            &["a", "b", "c"],
            vec![
                tr("t1", &["a"], &["b"], "X:Y:go"),
                tr("t2", &["a"], &["c"], "X:Z:go"),
            ],
            &["a"],
            &["b", "c"],
        );
        assert_eq!(
            f.start_events(),
            BTreeSet::from([ev("X:Y:go"), ev("X:Z:go")])
        );
    }

    #[test]
    fn single_transition_is_start_and_end() {
        let f = flow(
            "one",
            &["a", "b"],
            vec![tr("t1", &["a"], &["b"], "X:Y:ping")],
            &["a"],
            &["b"],
        );
        assert_eq!(f.start_events(), f.end_events());
        assert_eq!(f.start_events().len(), 1);
    }

    #[test]
    fn event_parsing_and_identity() {
        let e = ev("CPU0:Cache0:wr_req");
        assert_eq!(e.src().as_str(), "CPU0");
        assert_eq!(e.cmd(), "wr_req");
        assert_eq!(e.to_string(), "CPU0:Cache0:wr_req");
        assert!("A:A:x".parse::<Event>().is_err());
        assert!("A:B".parse::<Event>().is_err());
        assert!("A:B:c:d".parse::<Event>().is_err());
        assert_eq!(ev("A:B:c"), ev("A:B:c"));
    }

    #[test]
    fn construction_rejects_dangling_places() {
        let res = Flow::new(
            FlowId::new("f").unwrap(),
            [pid("a")],
            [tr("t1", &["a"], &["zz"], "X:Y:m")],
            marking(&["a"]),
            marking(&["a"]),
        );
        assert!(matches!(res, Err(FlowError::UnknownPlace { .. })));
    }

    #[test]
    fn construction_rejects_duplicate_transitions() {
        let res = Flow::new(
            FlowId::new("f").unwrap(),
            [pid("a"), pid("b")],
            [
                tr("t1", &["a"], &["b"], "X:Y:m"),
                tr("t1", &["a"], &["b"], "X:Y:n"),
            ],
            marking(&["a"]),
            marking(&["b"]),
        );
        assert!(matches!(res, Err(FlowError::DuplicateTransition { .. })));
    }
}
