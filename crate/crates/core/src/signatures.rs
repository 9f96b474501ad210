//! Structural analysis of a condition: α-components, p-closed level sets,
//! the generator sets `U[p,Z]`, the signatures `Υ_p(Z)`, the order
//! isomorphism between two `U`-sets with equal signatures, and the flip map
//! built from it.

use std::fmt;

use serde_json::{json, Value};

use crate::algebra::Assignment;
use crate::condition::{Condition, HistoryValue, Width};
use crate::error::{invalid, Error, Result};
use crate::index::{GenIndex, IndexSet, OrderMap};
use crate::term::BoolTerm;

/// The α-components of `p`, without repetitions, in construction order.
pub fn components(p: &Condition, alpha: usize) -> Result<Vec<Condition>> {
    if alpha > p.height() {
        return Err(invalid(format!(
            "level {alpha} exceeds height {}",
            p.height()
        )));
    }
    let mut out: Vec<Condition> = Vec::new();
    collect_components(p, alpha, &mut out);
    Ok(out)
}

fn collect_components(p: &Condition, alpha: usize, out: &mut Vec<Condition>) {
    if p.height() == alpha {
        if !out.contains(p) {
            out.push(p.clone());
        }
        return;
    }
    for part in p.parts() {
        collect_components(&part.child, alpha, out);
    }
}

/// The α-component reached by following ζ* down from `p`.
pub fn pr_component(p: &Condition, alpha: usize) -> Result<Condition> {
    if alpha > p.height() {
        return Err(invalid(format!(
            "level {alpha} exceeds height {}",
            p.height()
        )));
    }
    let mut cur = p.clone();
    while cur.height() > alpha {
        let next = cur
            .as_amalgam()
            .expect("positive height")
            .spine()
            .child
            .clone();
        cur = next;
    }
    Ok(cur)
}

/// Levels below the top level of `p` that closedness demands once the top
/// level is in a closed set: those where some element of `v_{ζ*}`, or the
/// least element of the ζ*-block, has an index value.
pub fn spine_demand(p: &Condition) -> Vec<usize> {
    let Some(a) = p.as_amalgam() else {
        return Vec::new();
    };
    let s = &a.spine().child;
    let i0 = a.block(a.zeta_star()).first().expect("blocks are nonempty");
    let witnesses: Vec<GenIndex> = a.spine().v.iter().chain(std::iter::once(i0)).collect();
    (0..s.height())
        .filter(|&b| {
            witnesses
                .iter()
                .any(|&j| s.h(j, b).expect("in support").is_index())
        })
        .collect()
}

fn normalize_levels(p: &Condition, levels: &[usize]) -> Result<Vec<usize>> {
    let mut z = levels.to_vec();
    z.sort_unstable();
    z.dedup();
    if let Some(&top) = z.last() {
        if top >= p.height() {
            return Err(invalid(format!(
                "level {top} is not below height {}",
                p.height()
            )));
        }
    }
    Ok(z)
}

/// Whether the level set `z` is p-closed.
pub fn is_p_closed(p: &Condition, z: &[usize]) -> Result<bool> {
    let z = normalize_levels(p, z)?;
    let mut cur = p.clone();
    while let Some(a) = cur.as_amalgam() {
        let top = cur.height() - 1;
        if z.binary_search(&top).is_ok()
            && !spine_demand(&cur)
                .iter()
                .all(|b| z.binary_search(b).is_ok())
        {
            return Ok(false);
        }
        let next = a.spine().child.clone();
        cur = next;
    }
    Ok(true)
}

/// A finite set of levels known to be closed for the condition it was
/// built against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedSet(Vec<usize>);

impl ClosedSet {
    pub fn new(p: &Condition, levels: &[usize]) -> Result<Self> {
        let z = normalize_levels(p, levels)?;
        if !is_p_closed(p, &z)? {
            return Err(invalid(format!(
                "levels {z:?} are not closed for this condition"
            )));
        }
        Ok(ClosedSet(z))
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, level: usize) -> bool {
        self.0.binary_search(&level).is_ok()
    }

    fn verify(&self, p: &Condition) -> Result<()> {
        if is_p_closed(p, &self.0)? {
            Ok(())
        } else {
            Err(invalid(format!(
                "levels {:?} are not closed for this condition",
                self.0
            )))
        }
    }
}

impl fmt::Display for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// The least p-closed superset of `w`.
pub fn close(p: &Condition, w: &[usize]) -> Result<ClosedSet> {
    let mut z = normalize_levels(p, w)?;
    let mut cur = p.clone();
    while let Some(a) = cur.as_amalgam() {
        let top = cur.height() - 1;
        if z.binary_search(&top).is_ok() {
            z.extend(spine_demand(&cur));
            z.sort_unstable();
            z.dedup();
        }
        let next = a.spine().child.clone();
        cur = next;
    }
    Ok(ClosedSet(z))
}

/// Every p-closed subset of `[0, ht(p))`, ordered by bitmask.
pub fn closed_sets(p: &Condition) -> Vec<ClosedSet> {
    let ht = p.height();
    (0u32..1 << ht)
        .map(|m| (0..ht).filter(|&b| m >> b & 1 == 1).collect::<Vec<_>>())
        .filter(|z| is_p_closed(p, z).expect("levels in range"))
        .map(ClosedSet)
        .collect()
}

/// `U[p,Z]`: generators all of whose index-valued levels lie in `Z`.
pub fn u_set(p: &Condition, z: &ClosedSet) -> Result<IndexSet> {
    z.verify(p)?;
    Ok(u_set_unchecked(p, z.levels()))
}

fn u_set_unchecked(p: &Condition, z: &[usize]) -> IndexSet {
    p.support()
        .iter()
        .filter(|&j| {
            p.history_of(j)
                .expect("in support")
                .iter()
                .enumerate()
                .all(|(b, v)| !v.is_index() || z.binary_search(&b).is_ok())
        })
        .collect()
}

/// One entry `⟨ζ_ℓ, τ_ℓ, n_ℓ, ⟨g_ℓ, h^ℓ_0, …⟩⟩` of a signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpsilonEntry {
    pub zeta: usize,
    pub tau: BoolTerm,
    pub n: usize,
    /// History of the least ζ*-block element at the earlier levels of `Z`.
    pub g: Vec<HistoryValue>,
    /// Histories of the `v`-elements at the earlier levels of `Z`.
    pub h: Vec<Vec<HistoryValue>>,
}

/// `Υ_p(Z)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct UpsilonSignature {
    pub entries: Vec<UpsilonEntry>,
}

impl UpsilonSignature {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON rendering with history values as their integer codes.
    pub fn to_json(&self, width: Width) -> Value {
        let codes = |v: &[HistoryValue]| v.iter().map(|x| x.encode(width)).collect::<Vec<_>>();
        Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    json!({
                        "zeta": e.zeta,
                        "tau": e.tau,
                        "n": e.n,
                        "g": codes(&e.g),
                        "h": e.h.iter().map(|v| codes(v)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

fn upsilon_entry(q: &Condition, xi: usize, earlier: &[usize]) -> UpsilonEntry {
    let a = q
        .as_amalgam()
        .expect("component above a level is an amalgam");
    let read = |j: GenIndex| -> Vec<HistoryValue> {
        earlier
            .iter()
            .map(|&b| q.h(j, b).expect("level in range"))
            .collect()
    };
    let i0 = a.block(xi).first().expect("blocks are nonempty");
    UpsilonEntry {
        zeta: a.zeta_star(),
        tau: a.tau_star().clone(),
        n: a.n_star(),
        g: read(i0),
        h: a.part(xi).v.iter().map(read).collect(),
    }
}

/// `Υ_p(Z)`, read off the pure components and cross-checked against every
/// other component and every part.
pub fn upsilon(p: &Condition, z: &ClosedSet) -> Result<UpsilonSignature> {
    z.verify(p)?;
    let levels = z.levels();
    let mut entries = Vec::with_capacity(levels.len());
    for (l, &alpha) in levels.iter().enumerate() {
        let earlier = &levels[..l];
        let primary = pr_component(p, alpha + 1)?;
        let zeta = primary.as_amalgam().expect("amalgam").zeta_star();
        let entry = upsilon_entry(&primary, zeta, earlier);
        for (k, c) in components(p, alpha + 1)?.iter().enumerate() {
            for xi in 0..p.width().get() {
                let other = upsilon_entry(c, xi, earlier);
                if other != entry {
                    return Err(Error::Consistency(format!(
                        "signature entry at level {alpha} differs between the pure component \
                         and component {k}, part {xi}"
                    )));
                }
            }
        }
        entries.push(entry);
    }
    Ok(UpsilonSignature { entries })
}

/// Whether the order isomorphism `Z0 → Z1` is the identity on `Z0 ∩ Z1`.
pub fn level_map_fixes_overlap(z0: &ClosedSet, z1: &ClosedSet) -> bool {
    z0.len() == z1.len()
        && z0
            .levels()
            .iter()
            .zip(z1.levels())
            .all(|(a, b)| a == b || !z1.contains(*a))
}

/// The order isomorphism `π : U[p,Z0] → U[p,Z1]` for closed sets with equal
/// signatures, verified to carry histories at the levels of `Z0` to the
/// corresponding levels of `Z1`.
pub fn u_iso(p: &Condition, z0: &ClosedSet, z1: &ClosedSet) -> Result<OrderMap> {
    if z0.len() != z1.len() {
        return Err(invalid(format!("level sets {z0} and {z1} differ in size")));
    }
    if upsilon(p, z0)? != upsilon(p, z1)? {
        return Err(invalid(format!("signatures of {z0} and {z1} differ")));
    }
    let u0 = u_set_unchecked(p, z0.levels());
    let u1 = u_set_unchecked(p, z1.levels());
    if u0.len() != u1.len() {
        return Err(Error::Consistency(format!(
            "equal signatures but |U| = {} and {} for {z0}, {z1}",
            u0.len(),
            u1.len()
        )));
    }
    let pi = OrderMap::new(u0, u1)?;
    for (i, j) in pi.pairs() {
        for (&a0, &a1) in z0.levels().iter().zip(z1.levels()) {
            if p.h(i, a0)? != p.h(j, a1)? {
                return Err(Error::Consistency(format!(
                    "π maps {i} to {j} but their histories differ at levels {a0}/{a1}"
                )));
            }
        }
    }
    Ok(pi)
}

/// `G(f)` as a position map on the support of `p`: each position either
/// copies the value at a source position or is forced to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipMap {
    domain: IndexSet,
    source: Vec<Option<usize>>,
}

impl FlipMap {
    /// Builds the map from an order map `π` between two subsets of `u^p`.
    pub fn from_order_map(p: &Condition, pi: &OrderMap) -> Result<Self> {
        let u = p.support();
        if !pi.domain().is_subset(u) || !pi.codomain().is_subset(u) {
            return Err(invalid("flip map must act inside the support"));
        }
        let pos = |j: GenIndex| u.position(j).expect("inside support");
        let source = u
            .iter()
            .map(|j| {
                if let Some(img) = pi.apply(j) {
                    Some(pos(img))
                } else {
                    pi.apply_inverse(j).map(pos)
                }
            })
            .collect();
        Ok(FlipMap {
            domain: u.clone(),
            source,
        })
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn apply_mask(&self, mask: u64) -> u64 {
        self.source
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, s)| match s {
                Some(src) => acc | ((mask >> src & 1) << k),
                None => acc,
            })
    }

    pub fn apply(&self, f: &Assignment) -> Result<Assignment> {
        if f.domain() != &self.domain {
            return Err(invalid("assignment domain differs from the support"));
        }
        Assignment::new(self.domain.clone(), self.apply_mask(f.bits()))
    }
}

/// The flip map for two closed sets with equal signatures.
pub fn flip_map(p: &Condition, z0: &ClosedSet, z1: &ClosedSet) -> Result<FlipMap> {
    FlipMap::from_order_map(p, &u_iso(p, z0, z1)?)
}

/// `G(f)` for a row `f` of `F^p`.
pub fn flip(p: &Condition, z0: &ClosedSet, z1: &ClosedSet, f: &Assignment) -> Result<Assignment> {
    if f.domain() != p.support() || !p.table().contains_mask(f.bits()) {
        return Err(invalid(format!(
            "{f} is not a row of the condition's table"
        )));
    }
    flip_map(p, z0, z1)?.apply(f)
}
