use std::collections::BTreeSet;

use super::{SelectionError, SelectionProblem};
use crate::ids::LinkId;

pub const DEFAULT_ORACLE_BOUND: usize = 24;

/// Exact minimum number of links covering every execution path of every
/// scope flow, by trying all link subsets in increasing size.
///
/// Fails with [`SelectionError::TooLarge`] when the scope uses more than
/// [`DEFAULT_ORACLE_BOUND`] links.
pub fn minimal_link_cover_oracle(problem: &SelectionProblem) -> Result<usize, SelectionError> {
    minimal_link_cover_oracle_bounded(problem, DEFAULT_ORACLE_BOUND)
}

/// [`minimal_link_cover_oracle`] with a custom bound (at most 64).
pub fn minimal_link_cover_oracle_bounded(
    problem: &SelectionProblem,
    bound: usize,
) -> Result<usize, SelectionError> {
    let links: Vec<&LinkId> = problem
        .events()
        .iter()
        .map(|e| problem.link_of(e))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let bound = bound.min(64);
    if links.len() > bound {
        return Err(SelectionError::TooLarge {
            links: links.len(),
            bound,
        });
    }

    let mut paths: Vec<u64> = Vec::new();
    for f in problem.flows() {
        for p in f.enumerate_paths()? {
            let mut mask = 0u64;
            for e in f.path_labels(&p) {
                let i = links
                    .binary_search(&problem.link_of(e))
                    .expect("scope link");
                mask |= 1 << i;
            }
            if mask == 0 {
                return Err(SelectionError::Uncoverable(f.id().clone()));
            }
            paths.push(mask);
        }
    }

    let n = links.len() as u32;
    for k in 0..=n {
        if k == 0 {
            if paths.is_empty() {
                return Ok(0);
            }
            continue;
        }
        // Walk all n-bit masks with k bits set (Gosper's hack).
        let mut subset: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let limit: u128 = 1u128 << n;
        while (subset as u128) < limit {
            if paths.iter().all(|p| p & subset != 0) {
                return Ok(k as usize);
            }
            let c = subset & subset.wrapping_neg();
            let r = subset.wrapping_add(c);
            if r == 0 {
                break;
            }
            subset = (((r ^ subset) >> 2) / c) | r;
        }
    }
    unreachable!("the set of all links covers every path")
}
