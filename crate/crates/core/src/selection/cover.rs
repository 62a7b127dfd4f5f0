//! Small set-cover toolkit over fixed-size bitsets.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn minus(&self, other: &Bits) -> Bits {
        Bits {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn intersection_count(&self, other: &Bits) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| i * 64 + b)
        })
    }
}

/// Upper bound on optimal covers collected by [`optimal_covers`].
const MAX_OPTIMAL_COVERS: usize = 4096;

/// Every minimum-cardinality cover of `universe` by `sets` (as sorted index
/// lists, in ascending order), up to an internal cap. `None` when some
/// element is in no set.
pub(crate) fn optimal_covers(universe: &Bits, sets: &[Bits]) -> Option<Vec<Vec<usize>>> {
    let mut reach = Bits::empty(universe.words.len() * 64);
    for s in sets {
        reach.union_with(s);
    }
    if !universe.is_subset(&reach) {
        return None;
    }
    let largest = sets
        .iter()
        .map(|s| s.intersection_count(universe))
        .max()
        .unwrap_or(0);
    let mut k = if largest == 0 {
        0
    } else {
        universe.count().div_ceil(largest) as usize
    };
    loop {
        let mut found = BTreeSet::new();
        let mut chosen = Vec::new();
        search(universe.clone(), sets, k, &mut chosen, &mut found);
        if !found.is_empty() {
            return Some(found.into_iter().collect());
        }
        k += 1;
    }
}

fn search(
    uncovered: Bits,
    sets: &[Bits],
    budget: usize,
    chosen: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<usize>>,
) {
    if found.len() >= MAX_OPTIMAL_COVERS {
        return;
    }
    if uncovered.is_empty() {
        let mut c = chosen.clone();
        c.sort_unstable();
        found.insert(c);
        return;
    }
    if budget == 0 {
        return;
    }
    let best = sets
        .iter()
        .map(|s| s.intersection_count(&uncovered))
        .max()
        .unwrap_or(0);
    if best == 0 || (uncovered.count()).div_ceil(best) as usize > budget {
        return;
    }
    // Branch on the uncovered element with the fewest covering sets.
    let pivot = uncovered
        .iter()
        .min_by_key(|&e| sets.iter().filter(|s| s.contains(e)).count())
        .expect("nonempty");
    for (i, s) in sets.iter().enumerate() {
        if s.contains(pivot) && !chosen.contains(&i) {
            chosen.push(i);
            search(uncovered.minus(s), sets, budget - 1, chosen, found);
            chosen.pop();
        }
    }
}

/// Greedy cover: repeatedly take the set covering the most uncovered
/// elements, lowest index on ties. `None` when some element is in no set.
pub(crate) fn greedy_cover(universe: &Bits, sets: &[Bits]) -> Option<Vec<usize>> {
    let mut uncovered = universe.clone();
    let mut out = Vec::new();
    while !uncovered.is_empty() {
        let (i, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.intersection_count(&uncovered)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))?;
        if gain == 0 {
            return None;
        }
        uncovered = uncovered.minus(&sets[i]);
        out.push(i);
    }
    out.sort_unstable();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(len: usize, items: &[usize]) -> Bits {
        let mut b = Bits::empty(len);
        for &i in items {
            b.insert(i);
        }
        b
    }

    #[test]
    fn bitset_basics() {
        let a = bits(130, &[0, 64, 129]);
        assert_eq!(a.count(), 3);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(a.first(), Some(0));
        assert!(bits(130, &[64]).is_subset(&a));
        assert_eq!(a.minus(&bits(130, &[0])).first(), Some(64));
        assert_eq!(Bits::full(70).count(), 70);
    }

    #[test]
    fn covers() {
        let u = Bits::full(6);
        let sets = vec![
            bits(6, &[0, 1, 2]),
            bits(6, &[3, 4, 5]),
            bits(6, &[0, 3]),
            bits(6, &[1, 2, 4, 5]),
        ];
        assert_eq!(
            optimal_covers(&u, &sets).unwrap(),
            vec![vec![0, 1], vec![2, 3]]
        );
        assert_eq!(greedy_cover(&u, &sets).unwrap(), vec![2, 3]);
        assert!(optimal_covers(&Bits::full(7), &sets).is_none());
        assert_eq!(
            optimal_covers(&Bits::empty(6), &sets).unwrap(),
            vec![Vec::<usize>::new()]
        );
    }
}
