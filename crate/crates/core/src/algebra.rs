//! Finitely presented Boolean algebras `B_(w,F)` represented by their
//! valuation tables.
//!
//! For a finite domain `w` the algebra is determined by `F ⊆ 2^w`: an
//! element is nonzero exactly when some row of `F` sends it to 1, so two
//! elements are equal when they agree on every row. All order questions
//! therefore reduce to comparing *extensions*, the set of rows on which an
//! element evaluates to 1.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::index::{GenIndex, IndexSet};
use crate::term::TermInstance;

/// Domains are stored as bit positions of a `u64`.
pub const MAX_DOMAIN: usize = 64;

/// Largest row count for which the whole algebra (all `2^rows` elements)
/// is enumerated.
pub const MAX_FULL_ALGEBRA_ROWS: usize = 12;

/// A total function from a sorted domain to `{0,1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    domain: IndexSet,
    bits: u64,
}

impl Assignment {
    pub fn new(domain: IndexSet, bits: u64) -> Result<Self> {
        check_domain(&domain)?;
        if domain.len() < 64 && bits >> domain.len() != 0 {
            return Err(invalid("assignment has bits outside its domain"));
        }
        Ok(Assignment { domain, bits })
    }

    /// Builds an assignment from `(index, bit)` pairs.
    pub fn from_pairs(pairs: &[(u32, bool)]) -> Result<Self> {
        let domain: IndexSet = pairs.iter().map(|&(i, _)| i).collect();
        if domain.len() != pairs.len() {
            return Err(invalid("duplicate index in assignment"));
        }
        let mut bits = 0u64;
        for &(i, b) in pairs {
            if b {
                bits |= 1 << domain.position(GenIndex(i)).expect("present");
            }
        }
        Assignment::new(domain, bits)
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    /// Bit `k` holds the value of the `k`-th smallest domain element.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: GenIndex) -> Option<bool> {
        self.domain.position(i).map(|p| self.bits >> p & 1 == 1)
    }

    /// Restriction to a subdomain.
    pub fn restrict(&self, sub: &IndexSet) -> Result<Assignment> {
        let mut bits = 0u64;
        for (k, i) in sub.iter().enumerate() {
            let p = self
                .domain
                .position(i)
                .ok_or_else(|| invalid(format!("{i} not in assignment domain")))?;
            bits |= (self.bits >> p & 1) << k;
        }
        Ok(Assignment {
            domain: sub.clone(),
            bits,
        })
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.domain.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{}", self.bits >> k & 1)?;
        }
        f.write_str("}")
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.domain.len()))?;
        for (k, i) in self.domain.iter().enumerate() {
            m.serialize_entry(&i.0.to_string(), &(self.bits >> k & 1))?;
        }
        m.end()
    }
}

fn check_domain(domain: &IndexSet) -> Result<()> {
    if domain.len() > MAX_DOMAIN {
        return Err(Error::Resource(format!(
            "domain of {} generators exceeds {MAX_DOMAIN}",
            domain.len()
        )));
    }
    Ok(())
}

/// A set of row numbers of some table, as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowSet(Vec<u64>);

impl RowSet {
    pub fn empty(rows: usize) -> Self {
        RowSet(vec![0; rows.div_ceil(64)])
    }

    pub fn insert(&mut self, r: usize) {
        self.0[r / 64] |= 1 << (r % 64);
    }

    pub fn contains(&self, r: usize) -> bool {
        self.0[r / 64] >> (r % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &RowSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn is_proper_subset(&self, other: &RowSet) -> bool {
        self.is_subset(other) && self != other
    }
}

/// Result of a longest-chain computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    /// Number of elements in the chain.
    pub length: usize,
    /// Positions (into the input list) of the chain, strictly increasing.
    pub witness: Vec<usize>,
}

/// Longest strictly increasing chain under proper inclusion of extensions,
/// as a longest path in the strict-order DAG.
pub fn longest_strict_chain(sets: &[RowSet]) -> Chain {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| sets[i].count());
    let mut best = vec![1usize; sets.len()];
    let mut prev = vec![usize::MAX; sets.len()];
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[..oi] {
            if best[j] + 1 > best[i] && sets[j].is_proper_subset(&sets[i]) {
                best[i] = best[j] + 1;
                prev[i] = j;
            }
        }
    }
    let Some(end) = (0..sets.len()).max_by_key(|&i| (best[i], std::cmp::Reverse(i))) else {
        return Chain {
            length: 0,
            witness: Vec::new(),
        };
    };
    let mut witness = vec![end];
    while prev[*witness.last().unwrap()] != usize::MAX {
        witness.push(prev[*witness.last().unwrap()]);
    }
    witness.reverse();
    Chain {
        length: witness.len(),
        witness,
    }
}

/// `F ⊆ 2^w` over a finite sorted domain; rows are kept sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValuationTable {
    domain: IndexSet,
    rows: Vec<u64>,
}

impl ValuationTable {
    pub fn new(domain: IndexSet, mut rows: Vec<u64>) -> Result<Self> {
        check_domain(&domain)?;
        if rows.is_empty() {
            return Err(invalid("valuation table must have at least one row"));
        }
        if domain.len() < 64 && rows.iter().any(|&r| r >> domain.len() != 0) {
            return Err(invalid("row has bits outside the domain"));
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(ValuationTable { domain, rows })
    }

    /// Table of all `2^|w|` assignments: the free algebra on `w`.
    pub fn free(domain: IndexSet) -> Result<Self> {
        check_domain(&domain)?;
        if domain.len() > 24 {
            return Err(Error::Resource(format!(
                "free table on {} generators is too large",
                domain.len()
            )));
        }
        let rows = (0..1u64 << domain.len()).collect();
        ValuationTable::new(domain, rows)
    }

    pub fn from_assignments(domain: IndexSet, rows: &[Assignment]) -> Result<Self> {
        let masks = rows
            .iter()
            .map(|a| {
                if a.domain() == &domain {
                    Ok(a.bits())
                } else {
                    Err(invalid("assignment domain differs from table domain"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ValuationTable::new(domain, masks)
    }

    pub(crate) fn from_sorted_unchecked(domain: IndexSet, rows: Vec<u64>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        ValuationTable { domain, rows }
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    /// Row masks; bit `k` is the value of the `k`-th smallest domain element.
    pub fn masks(&self) -> &[u64] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, k: usize) -> Assignment {
        Assignment {
            domain: self.domain.clone(),
            bits: self.rows[k],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.rows.len()).map(|k| self.row(k))
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        self.rows.binary_search(&mask).is_ok()
    }

    pub fn contains(&self, f: &Assignment) -> bool {
        f.domain() == &self.domain && self.contains_mask(f.bits())
    }

    /// `cl(F)`. A finite domain is its own finite subset, so the closure
    /// of a table is the table itself.
    pub fn closure(&self) -> ValuationTable {
        self.clone()
    }

    /// `{f↾sub : f ∈ F}`.
    pub fn restrict(&self, sub: &IndexSet) -> Result<ValuationTable> {
        let positions = self.positions(sub)?;
        let rows = self
            .rows
            .iter()
            .map(|&r| gather(r, &positions))
            .collect::<Vec<_>>();
        ValuationTable::new(sub.clone(), rows)
    }

    fn positions(&self, set: &IndexSet) -> Result<Vec<usize>> {
        set.iter()
            .map(|i| {
                self.domain
                    .position(i)
                    .ok_or_else(|| invalid(format!("generator {i} outside domain {}", self.domain)))
            })
            .collect()
    }

    /// Bit positions binding the instance's slots.
    fn bind(&self, inst: &TermInstance) -> Result<Vec<usize>> {
        self.positions(inst.args())
    }

    /// Value of `inst` on the row with mask `mask`.
    pub fn value_on_mask(&self, mask: u64, inst: &TermInstance) -> Result<bool> {
        let pos = self.bind(inst)?;
        Ok(eval_bound(mask, inst, &pos))
    }

    /// The rows on which `inst` evaluates to 1.
    pub fn extension(&self, inst: &TermInstance) -> Result<RowSet> {
        let pos = self.bind(inst)?;
        let mut set = RowSet::empty(self.rows.len());
        for (k, &r) in self.rows.iter().enumerate() {
            if eval_bound(r, inst, &pos) {
                set.insert(k);
            }
        }
        Ok(set)
    }

    pub fn elem_nonzero(&self, inst: &TermInstance) -> Result<bool> {
        let pos = self.bind(inst)?;
        Ok(self.rows.iter().any(|&r| eval_bound(r, inst, &pos)))
    }

    /// `a ≤ b` iff no row gives `(a, b) = (1, 0)`.
    pub fn elem_le(&self, a: &TermInstance, b: &TermInstance) -> Result<bool> {
        let (pa, pb) = (self.bind(a)?, self.bind(b)?);
        Ok(!self
            .rows
            .iter()
            .any(|&r| eval_bound(r, a, &pa) && !eval_bound(r, b, &pb)))
    }

    /// `a < b` iff `a ≤ b` and some row gives `(a, b) = (0, 1)`.
    pub fn elem_lt(&self, a: &TermInstance, b: &TermInstance) -> Result<bool> {
        let (pa, pb) = (self.bind(a)?, self.bind(b)?);
        let mut witness = false;
        for &r in &self.rows {
            match (eval_bound(r, a, &pa), eval_bound(r, b, &pb)) {
                (true, false) => return Ok(false),
                (false, true) => witness = true,
                _ => {}
            }
        }
        Ok(witness)
    }

    /// Whether `x_j` lies in the subalgebra generated by `{x_i : i ∈ v}`:
    /// column `j` must be constant on every class of rows that agree on `v`.
    pub fn in_generated(&self, j: GenIndex, v: &IndexSet) -> Result<bool> {
        self.instance_in_generated(&TermInstance::generator(j), v)
    }

    /// As [`ValuationTable::in_generated`] for an arbitrary element.
    pub fn instance_in_generated(&self, inst: &TermInstance, v: &IndexSet) -> Result<bool> {
        let pos = self.bind(inst)?;
        let vmask = self.positions(v)?.into_iter().fold(0u64, |m, p| m | 1 << p);
        let mut seen: std::collections::HashMap<u64, bool> = std::collections::HashMap::new();
        for &r in &self.rows {
            let val = eval_bound(r, inst, &pos);
            if *seen.entry(r & vmask).or_insert(val) != val {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Longest strictly increasing chain among `elements`.
    pub fn longest_chain(&self, elements: &[TermInstance]) -> Result<Chain> {
        let sets = elements
            .iter()
            .map(|e| self.extension(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(longest_strict_chain(&sets))
    }

    /// Longest strict chain in the whole algebra, whose elements are all
    /// `2^rows` sets of rows. Only offered for small tables.
    pub fn full_algebra_depth(&self) -> Result<Chain> {
        let r = self.rows.len();
        if r > MAX_FULL_ALGEBRA_ROWS {
            return Err(Error::Resource(format!(
                "full algebra on {r} rows exceeds {MAX_FULL_ALGEBRA_ROWS}"
            )));
        }
        let sets: Vec<RowSet> = (0..1u64 << r)
            .map(|s| {
                let mut set = RowSet::empty(r);
                (0..r)
                    .filter(|k| s >> k & 1 == 1)
                    .for_each(|k| set.insert(k));
                set
            })
            .collect();
        Ok(longest_strict_chain(&sets))
    }
}

/// `B_(inner)` embeds in `B_(outer)`: every inner row extends to an outer
/// row, and every outer row restricts into `cl(inner)`.
pub fn is_subalgebra_embedding(inner: &ValuationTable, outer: &ValuationTable) -> Result<bool> {
    if !inner.domain().is_subset(outer.domain()) {
        return Err(invalid(format!(
            "inner domain {} is not contained in outer domain {}",
            inner.domain(),
            outer.domain()
        )));
    }
    let restricted = outer.restrict(inner.domain())?;
    let closed = inner.closure();
    let extends = inner.masks().iter().all(|&m| restricted.contains_mask(m));
    let restricts = restricted.masks().iter().all(|&m| closed.contains_mask(m));
    Ok(extends && restricts)
}

/// Value of `inst` under assignment `f`.
pub fn instance_value(f: &Assignment, inst: &TermInstance) -> Result<bool> {
    let pos = inst
        .args()
        .iter()
        .map(|i| {
            f.domain()
                .position(i)
                .ok_or_else(|| invalid(format!("generator {i} is not bound by the assignment")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eval_bound(f.bits(), inst, &pos))
}

#[inline]
fn eval_bound(mask: u64, inst: &TermInstance, pos: &[usize]) -> bool {
    inst.term().eval_with(&|k| mask >> pos[k] & 1 == 1)
}

/// Collects bits at `positions` into the low bits of the result.
#[inline]
pub(crate) fn gather(mask: u64, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .fold(0u64, |acc, (k, &p)| acc | (mask >> p & 1) << k)
}
