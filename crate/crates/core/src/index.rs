//! Generator indices, sorted index sets and order isomorphisms between them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Index of a generator `x_i`. Stands in for an ordinal below the successor
/// cardinal; at desk scale it is just a natural number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenIndex(pub u32);

impl fmt::Display for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for GenIndex {
    fn from(v: u32) -> Self {
        GenIndex(v)
    }
}

/// A strictly increasing finite sequence of generator indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<GenIndex>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    /// Builds a set from arbitrary indices, sorting and deduplicating.
    pub fn from_unsorted<I: IntoIterator<Item = GenIndex>>(items: I) -> Self {
        let mut v: Vec<GenIndex> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// Builds a set from a sequence that must already be strictly increasing.
    pub fn from_sorted(items: Vec<GenIndex>) -> Result<Self> {
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "index list {items:?} is not strictly increasing"
            )));
        }
        Ok(IndexSet(items))
    }

    pub fn singleton(i: GenIndex) -> Self {
        IndexSet(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[GenIndex] {
        &self.0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = GenIndex> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn get(&self, pos: usize) -> Option<GenIndex> {
        self.0.get(pos).copied()
    }

    pub fn first(&self) -> Option<GenIndex> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<GenIndex> {
        self.0.last().copied()
    }

    pub fn contains(&self, i: GenIndex) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position of `i` in the increasing enumeration.
    pub fn position(&self, i: GenIndex) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::from_unsorted(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    /// Elements strictly below `bound`.
    pub fn below(&self, bound: GenIndex) -> IndexSet {
        IndexSet(self.iter().filter(|&i| i < bound).collect())
    }

    pub fn into_vec(self) -> Vec<GenIndex> {
        self.0
    }
}

impl FromIterator<GenIndex> for IndexSet {
    fn from_iter<I: IntoIterator<Item = GenIndex>>(iter: I) -> Self {
        IndexSet::from_unsorted(iter)
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        IndexSet::from_unsorted(iter.into_iter().map(GenIndex))
    }
}

impl<const N: usize> From<[u32; N]> for IndexSet {
    fn from(arr: [u32; N]) -> Self {
        arr.into_iter().collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// The order isomorphism between two index sets of equal size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderMap {
    from: IndexSet,
    to: IndexSet,
}

impl OrderMap {
    pub fn new(from: IndexSet, to: IndexSet) -> Result<Self> {
        if from.len() != to.len() {
            return Err(invalid(format!(
                "order types differ: {} vs {} elements",
                from.len(),
                to.len()
            )));
        }
        Ok(OrderMap { from, to })
    }

    pub fn identity(on: IndexSet) -> Self {
        OrderMap {
            from: on.clone(),
            to: on,
        }
    }

    pub fn domain(&self) -> &IndexSet {
        &self.from
    }

    pub fn codomain(&self) -> &IndexSet {
        &self.to
    }

    pub fn len(&self) -> usize {
        self.from.len()
    }

    pub fn is_empty(&self) -> bool {
        self.from.is_empty()
    }

    pub fn apply(&self, i: GenIndex) -> Option<GenIndex> {
        self.from.position(i).map(|p| self.to.0[p])
    }

    pub fn apply_inverse(&self, j: GenIndex) -> Option<GenIndex> {
        self.to.position(j).map(|p| self.from.0[p])
    }

    /// Image of a subset of the domain.
    pub fn image(&self, set: &IndexSet) -> Result<IndexSet> {
        set.iter()
            .map(|i| {
                self.apply(i)
                    .ok_or_else(|| invalid(format!("{i} outside map domain {}", self.from)))
            })
            .collect::<Result<Vec<_>>>()
            .map(IndexSet)
    }

    pub fn inverse(&self) -> OrderMap {
        OrderMap {
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }

    pub fn restrict(&self, sub: &IndexSet) -> Result<OrderMap> {
        let to = self.image(sub)?;
        Ok(OrderMap {
            from: sub.clone(),
            to,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.from == self.to
    }

    pub fn pairs(&self) -> impl Iterator<Item = (GenIndex, GenIndex)> + '_ {
        self.from.iter().zip(self.to.iter())
    }
}

impl fmt::Display for OrderMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (a, b)) in self.pairs().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let a = IndexSet::from([5, 1, 3, 3]);
        assert_eq!(a.as_slice(), &[GenIndex(1), GenIndex(3), GenIndex(5)]);
        let b = IndexSet::from([3, 4]);
        assert_eq!(a.union(&b), IndexSet::from([1, 3, 4, 5]));
        assert_eq!(a.intersection(&b), IndexSet::from([3]));
        assert_eq!(a.difference(&b), IndexSet::from([1, 5]));
        assert_eq!(a.below(GenIndex(4)), IndexSet::from([1, 3]));
        assert!(IndexSet::from([1, 5]).is_subset(&a));
        assert_eq!(a.position(GenIndex(5)), Some(2));
    }

    #[test]
    fn from_sorted_rejects_unsorted() {
        assert!(IndexSet::from_sorted(vec![GenIndex(2), GenIndex(1)]).is_err());
        assert!(IndexSet::from_sorted(vec![GenIndex(2), GenIndex(2)]).is_err());
        assert!(IndexSet::from_sorted(vec![GenIndex(1), GenIndex(2)]).is_ok());
    }

    #[test]
    fn order_map_by_position() {
        let h = OrderMap::new(IndexSet::from([1, 4, 9]), IndexSet::from([2, 3, 20])).unwrap();
        assert_eq!(h.apply(GenIndex(4)), Some(GenIndex(3)));
        assert_eq!(h.apply_inverse(GenIndex(20)), Some(GenIndex(9)));
        assert_eq!(h.apply(GenIndex(5)), None);
        assert_eq!(
            h.image(&IndexSet::from([1, 9])).unwrap(),
            IndexSet::from([2, 20])
        );
        assert!(!h.is_identity());
        assert!(OrderMap::new(IndexSet::from([1]), IndexSet::new()).is_err());
    }
}
