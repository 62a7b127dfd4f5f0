use serde::{Deserialize, Serialize};

use super::{Flow, FlowError, Marking, TransitionId};

/// Maximum number of paths returned by [`Flow::enumerate_paths`].
pub const DEFAULT_PATH_BOUND: usize = 4096;

/// A maximal firing sequence from the initial marking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowPath {
    pub transitions: Vec<TransitionId>,
}

impl FlowPath {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

impl Flow {
    /// All maximal firing sequences, sorted lexicographically by transition id.
    pub fn enumerate_paths(&self) -> Result<Vec<FlowPath>, FlowError> {
        self.enumerate_paths_bounded(DEFAULT_PATH_BOUND)
    }

    pub fn enumerate_paths_bounded(&self, bound: usize) -> Result<Vec<FlowPath>, FlowError> {
        if !self.is_acyclic() {
            return Err(FlowError::Cyclic {
                flow: self.id.clone(),
            });
        }
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.extend_paths(self.initial_marking().clone(), &mut prefix, &mut out, bound)?;
        out.sort();
        Ok(out)
    }

    fn extend_paths(
        &self,
        marking: Marking,
        prefix: &mut Vec<TransitionId>,
        out: &mut Vec<FlowPath>,
        bound: usize,
    ) -> Result<(), FlowError> {
        let enabled = self.enabled_transitions(&marking);
        if enabled.is_empty() {
            if out.len() == bound {
                return Err(FlowError::PathExplosion {
                    flow: self.id.clone(),
                    bound,
                });
            }
            out.push(FlowPath {
                transitions: prefix.clone(),
            });
            return Ok(());
        }
        for t in enabled {
            let next = self.fire(&marking, &t.id)?;
            prefix.push(t.id.clone());
            self.extend_paths(next, prefix, out, bound)?;
            prefix.pop();
        }
        Ok(())
    }
}
