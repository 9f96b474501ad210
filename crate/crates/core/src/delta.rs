//! Ordered Δ-systems over families of finite index sets, and the cleaning
//! step that picks `t` isomorphic conditions over such a system and
//! amalgamates them.

use crate::condition::{Condition, Part};
use crate::error::{invalid, Error, Result};
use crate::index::{IndexSet, OrderMap};
use crate::order::iso_map;
use crate::term::BoolTerm;

/// Largest family searched by exhaustive backtracking in [`find_delta_system`].
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// A sub-family whose members pairwise meet in `heart` and whose blocks
/// (member minus heart) are nonempty and lie strictly above the heart and
/// strictly above one another, in member order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSystem {
    pub heart: IndexSet,
    /// Positions in the input family, in increasing block order.
    pub members: Vec<usize>,
    pub blocks: Vec<IndexSet>,
}

impl DeltaSystem {
    /// Re-checks every invariant against the family it was extracted from.
    pub fn validate(&self, family: &[IndexSet]) -> bool {
        if self.members.len() != self.blocks.len() || self.members.is_empty() {
            return false;
        }
        let sets: Vec<&IndexSet> = match self
            .members
            .iter()
            .map(|&m| family.get(m))
            .collect::<Option<Vec<_>>>()
        {
            Some(s) => s,
            None => return false,
        };
        for (k, s) in sets.iter().enumerate() {
            if s.difference(&self.heart) != self.blocks[k] || self.blocks[k].is_empty() {
                return false;
            }
            if !self.heart.is_subset(s) {
                return false;
            }
            if let Some(h) = self.heart.last() {
                if h >= self.blocks[k].first().unwrap() {
                    return false;
                }
            }
            if k + 1 < sets.len() && self.blocks[k].last() >= self.blocks[k + 1].first() {
                return false;
            }
            for other in &sets[k + 1..] {
                if s.intersection(other) != self.heart {
                    return false;
                }
            }
        }
        true
    }
}

/// Finds an ordered Δ-system of size `k` in `family`: exhaustively for
/// families of at most [`EXHAUSTIVE_LIMIT`] sets, by heart-wise interval
/// scheduling otherwise.
pub fn find_delta_system(family: &[IndexSet], k: usize) -> Result<Option<DeltaSystem>> {
    if k < 2 {
        return Err(invalid("a Δ-system needs at least two members"));
    }
    Ok(if family.len() <= EXHAUSTIVE_LIMIT {
        find_exhaustive(family, k)
    } else {
        find_greedy(family, k)
    })
}

/// Backtracking over sub-families in input order.
pub fn find_exhaustive(family: &[IndexSet], k: usize) -> Option<DeltaSystem> {
    let mut chosen = Vec::with_capacity(k);
    if backtrack(family, k, 0, &mut chosen, None) {
        Some(assemble(family, &chosen))
    } else {
        None
    }
}

fn backtrack(
    family: &[IndexSet],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    heart: Option<&IndexSet>,
) -> bool {
    if chosen.len() == k {
        return true;
    }
    if family.len() - start < k - chosen.len() {
        return false;
    }
    for c in start..family.len() {
        let cand = &family[c];
        let new_heart;
        let heart_ref = match (heart, chosen.first()) {
            (Some(h), _) => h,
            (None, Some(&first)) => {
                new_heart = family[first].intersection(cand);
                &new_heart
            }
            (None, None) => {
                chosen.push(c);
                if backtrack(family, k, c + 1, chosen, None) {
                    return true;
                }
                chosen.pop();
                continue;
            }
        };
        if !compatible(family, chosen, cand, heart_ref) {
            continue;
        }
        chosen.push(c);
        if backtrack(family, k, c + 1, chosen, Some(heart_ref)) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn compatible(family: &[IndexSet], chosen: &[usize], cand: &IndexSet, heart: &IndexSet) -> bool {
    let Some((lo, hi)) = block_span(cand, heart) else {
        return false;
    };
    chosen.iter().all(|&m| {
        let other = &family[m];
        if other.intersection(cand) != *heart {
            return false;
        }
        match block_span(other, heart) {
            Some((olo, ohi)) => ohi < lo || hi < olo,
            None => false,
        }
    })
}

/// `(min, max)` of `set ∖ heart` when `heart ⊆ set`, the block is nonempty
/// and lies above the heart.
fn block_span(set: &IndexSet, heart: &IndexSet) -> Option<(u32, u32)> {
    if !heart.is_subset(set) {
        return None;
    }
    let block = set.difference(heart);
    let (lo, hi) = (block.first()?, block.last()?);
    if heart.last().is_some_and(|h| h >= lo) {
        return None;
    }
    Some((lo.0, hi.0))
}

/// For each candidate heart (every pairwise intersection, in order of
/// first occurrence), selects members by earliest block end.
pub fn find_greedy(family: &[IndexSet], k: usize) -> Option<DeltaSystem> {
    let mut hearts: Vec<IndexSet> = Vec::new();
    for a in 0..family.len() {
        for b in a + 1..family.len() {
            let h = family[a].intersection(&family[b]);
            if !hearts.contains(&h) {
                hearts.push(h);
            }
        }
    }
    for heart in hearts {
        let mut spans: Vec<(u32, u32, usize)> = family
            .iter()
            .enumerate()
            .filter_map(|(i, s)| block_span(s, &heart).map(|(lo, hi)| (hi, lo, i)))
            .collect();
        spans.sort_unstable();
        let mut chosen = Vec::new();
        let mut last_end: Option<u32> = None;
        for (hi, lo, i) in spans {
            if last_end.is_none_or(|e| e < lo) {
                chosen.push(i);
                last_end = Some(hi);
                if chosen.len() == k {
                    return Some(assemble(family, &chosen));
                }
            }
        }
    }
    None
}

fn assemble(family: &[IndexSet], chosen: &[usize]) -> DeltaSystem {
    let heart = family[chosen[0]].intersection(&family[chosen[1]]);
    let mut members = chosen.to_vec();
    members.sort_by_key(|&m| family[m].difference(&heart).first());
    let blocks = members
        .iter()
        .map(|&m| family[m].difference(&heart))
        .collect();
    DeltaSystem {
        heart,
        members,
        blocks,
    }
}

/// How the `v`-set of the first selected condition is chosen; the other
/// parts receive its image under the isomorphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VSelector {
    Empty,
    /// The least `n*` elements of the first block.
    BlockPrefix,
    /// Explicit positions within the support.
    Positions(Vec<usize>),
}

/// Selects `t` pairwise isomorphic conditions whose supports form an
/// ordered Δ-system and amalgamates them with `ζ* = 0`.
pub fn clean_and_amalgamate(
    conds: &[Condition],
    tau_star: BoolTerm,
    selector: &VSelector,
) -> Result<Condition> {
    let Some(first) = conds.first() else {
        return Err(Error::SearchFailure("no conditions given".into()));
    };
    let width = first.width();
    if conds.iter().any(|c| c.width() != width) {
        return Err(invalid("conditions of different widths"));
    }
    let t = width.get();
    if conds.len() < t {
        return Err(Error::SearchFailure(format!(
            "{} conditions available, {t} needed",
            conds.len()
        )));
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, c) in conds.iter().enumerate() {
        let mut placed = false;
        for class in classes.iter_mut() {
            if iso_map(&conds[class[0]], c)?.is_some() {
                class.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![i]);
        }
    }

    for class in classes.iter().filter(|c| c.len() >= t) {
        let family: Vec<IndexSet> = class.iter().map(|&i| conds[i].support().clone()).collect();
        let Some(ds) = find_delta_system(&family, t)? else {
            continue;
        };
        let chosen: Vec<&Condition> = ds.members.iter().map(|&m| &conds[class[m]]).collect();
        let base = chosen[0];
        let v0 = select_v(base, &ds.blocks[0], tau_star.arity(), selector)?;
        let mut parts = Vec::with_capacity(t);
        for c in chosen {
            let h: OrderMap = iso_map(base, c)?.expect("same isomorphism class");
            parts.push(Part::new(c.clone(), h.image(&v0)?));
        }
        return Condition::amalgamate(0, tau_star, ds.heart, parts);
    }
    Err(Error::SearchFailure(format!(
        "no {t} isomorphic conditions with supports forming an ordered Δ-system"
    )))
}

fn select_v(
    base: &Condition,
    block: &IndexSet,
    n: usize,
    selector: &VSelector,
) -> Result<IndexSet> {
    let v: IndexSet = match selector {
        VSelector::Empty => IndexSet::new(),
        VSelector::BlockPrefix => block.iter().take(n).collect(),
        VSelector::Positions(pos) => pos
            .iter()
            .map(|&k| {
                base.support()
                    .get(k)
                    .ok_or_else(|| invalid(format!("position {k} outside the support")))
            })
            .collect::<Result<IndexSet>>()?,
    };
    if v.len() != n {
        return Err(invalid(format!(
            "selected v has {} elements but the term has arity {n}",
            v.len()
        )));
    }
    Ok(v)
}
