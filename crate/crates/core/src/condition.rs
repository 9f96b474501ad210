//! Forcing conditions at finite scale.
//!
//! A condition is either atomic (a single generator) or the amalgam of `t`
//! pairwise isomorphic conditions of equal height whose supports form an
//! ordered Δ-system. Every condition carries its derived data: the support
//! `u`, the valuation table `F`, the height, and the history tables `h`
//! and `g` over `u × ht`. Derived data is computed once, at construction,
//! and the constructor refuses tuples that violate any amalgamation clause.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::algebra::{gather, ValuationTable, MAX_DOMAIN};
use crate::error::{clause, invalid, Clause, Error, Result};
use crate::index::{GenIndex, IndexSet, OrderMap};
use crate::term::BoolTerm;

/// Largest supported condition height.
pub const MAX_HEIGHT: usize = 4;

/// Largest number of candidate rows enumerated while building `F`.
pub const MAX_ROWS: usize = 1 << 20;

/// The number of parts `t` in every amalgam; the finite stand-in for `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Width(usize);

impl Width {
    pub fn new(t: usize) -> Result<Self> {
        if !(2..=MAX_DOMAIN).contains(&t) {
            return Err(invalid(format!("width {t} outside 2..={MAX_DOMAIN}")));
        }
        Ok(Width(t))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of majority triples `(3ξ, 3ξ+1, 3ξ+2)` that fit below `t`.
    pub fn triples(self) -> usize {
        self.0 / 3
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Value of `h^p(j, β)`: a part index below `t`, or one of the two tokens
/// standing for `θ` and `θ+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HistoryValue {
    Index(u32),
    Theta,
    ThetaPlusOne,
}

impl HistoryValue {
    /// True for values below `θ`.
    pub fn is_index(self) -> bool {
        matches!(self, HistoryValue::Index(_))
    }

    /// Integer code: `0..t` for indices, `t` for `θ`, `t+1` for `θ+1`.
    pub fn encode(self, width: Width) -> u32 {
        match self {
            HistoryValue::Index(x) => x,
            HistoryValue::Theta => width.get() as u32,
            HistoryValue::ThetaPlusOne => width.get() as u32 + 1,
        }
    }

    pub fn decode(code: u32, width: Width) -> Result<Self> {
        let t = width.get() as u32;
        match code {
            c if c < t => Ok(HistoryValue::Index(c)),
            c if c == t => Ok(HistoryValue::Theta),
            c if c == t + 1 => Ok(HistoryValue::ThetaPlusOne),
            c => Err(invalid(format!(
                "history code {c} out of range for width {t}"
            ))),
        }
    }
}

impl fmt::Display for HistoryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryValue::Index(x) => write!(f, "{x}"),
            HistoryValue::Theta => f.write_str("θ"),
            HistoryValue::ThetaPlusOne => f.write_str("θ+1"),
        }
    }
}

/// Value of `g^p(j, β)`: whether `j` was among the term arguments at that
/// level, and the term used there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GTag {
    pub bit: bool,
    pub term: BoolTerm,
}

/// One of the `t` constituents of an amalgam.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Part {
    pub child: Condition,
    pub v: IndexSet,
}

impl Part {
    pub fn new(child: Condition, v: IndexSet) -> Self {
        Part { child, v }
    }
}

/// The successor-stage tuple `⟨ζ*, τ*, n*, u*, ⟨p_ξ, v_ξ : ξ < t⟩⟩`.
/// `n*` is always the arity of `τ*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Amalgam {
    zeta_star: usize,
    tau_star: BoolTerm,
    heart: IndexSet,
    parts: Vec<Part>,
}

impl Amalgam {
    pub fn zeta_star(&self) -> usize {
        self.zeta_star
    }

    pub fn tau_star(&self) -> &BoolTerm {
        &self.tau_star
    }

    pub fn n_star(&self) -> usize {
        self.tau_star.arity()
    }

    pub fn heart(&self) -> &IndexSet {
        &self.heart
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn part(&self, xi: usize) -> &Part {
        &self.parts[xi]
    }

    /// The part on the pure-extension spine.
    pub fn spine(&self) -> &Part {
        &self.parts[self.zeta_star]
    }

    /// `u^{p_ξ} ∖ u*`.
    pub fn block(&self, xi: usize) -> IndexSet {
        self.parts[xi].child.support().difference(&self.heart)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Atomic(GenIndex),
    Amalgam(Amalgam),
}

struct Node {
    width: Width,
    shape: Shape,
    support: IndexSet,
    table: ValuationTable,
    height: usize,
    // Dense `u × ht` tables, row-major by support position.
    history: Vec<HistoryValue>,
    tags: Vec<GTag>,
}

/// A condition with its derived fields. Cheap to clone; immutable.
#[derive(Clone)]
pub struct Condition(Arc<Node>);

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.width == other.0.width && self.0.shape == other.0.shape)
    }
}

impl Eq for Condition {}

impl Hash for Condition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.width.hash(state);
        self.0.shape.hash(state);
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.shape {
            Shape::Atomic(i) => write!(f, "⟨{i}⟩"),
            Shape::Amalgam(a) => {
                write!(
                    f,
                    "⟨ζ*={}, τ*={}, u*={}, [",
                    a.zeta_star, a.tau_star, a.heart
                )?;
                for (k, p) in a.parts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{:?}/v={}", p.child, p.v)?;
                }
                f.write_str("]⟩")
            }
        }
    }
}

impl Condition {
    /// The stage-0 condition `⟨i⟩`: support `{i}`, both assignments, height 0.
    pub fn atomic(width: Width, index: GenIndex) -> Condition {
        let support = IndexSet::singleton(index);
        let table = ValuationTable::from_sorted_unchecked(support.clone(), vec![0, 1]);
        Condition(Arc::new(Node {
            width,
            shape: Shape::Atomic(index),
            support,
            table,
            height: 0,
            history: Vec::new(),
            tags: Vec::new(),
        }))
    }

    /// Builds the successor-stage condition from its tuple, validating
    /// clauses (α)–(δ) and deriving `u`, `F`, `h` and `g`.
    pub fn amalgamate(
        zeta_star: usize,
        tau_star: BoolTerm,
        heart: IndexSet,
        parts: Vec<Part>,
    ) -> Result<Condition> {
        let t = parts.len();
        let n_star = tau_star.arity();
        let Some(first) = parts.first() else {
            return Err(clause(Clause::Beta, "no parts given"));
        };
        let width = first.child.width();
        if t != width.get() {
            return Err(clause(
                Clause::Beta,
                format!("width {width} requires {width} parts, got {t}"),
            ));
        }
        // (α)
        if zeta_star >= t {
            return Err(clause(
                Clause::Alpha,
                format!("ζ* = {zeta_star} is not below {t}"),
            ));
        }
        // (β)
        let alpha = first.child.height();
        for (xi, part) in parts.iter().enumerate() {
            if part.child.width() != width {
                return Err(clause(
                    Clause::Beta,
                    format!("part {xi} has a different width"),
                ));
            }
            if part.child.height() != alpha {
                return Err(clause(
                    Clause::Beta,
                    format!(
                        "part {xi} has height {} but part 0 has height {alpha}",
                        part.child.height()
                    ),
                ));
            }
            if !part.v.is_subset(part.child.support()) {
                return Err(clause(
                    Clause::Beta,
                    format!("v_{xi} = {} is not inside u^(p_{xi})", part.v),
                ));
            }
            if part.v.len() != n_star {
                return Err(clause(
                    Clause::Beta,
                    format!("|v_{xi}| = {} but n* = {n_star}", part.v.len()),
                ));
            }
        }
        if alpha + 1 > MAX_HEIGHT {
            return Err(Error::Resource(format!(
                "height {} exceeds {MAX_HEIGHT}",
                alpha + 1
            )));
        }
        // (γ)
        let blocks: Vec<IndexSet> = parts
            .iter()
            .map(|p| p.child.support().difference(&heart))
            .collect();
        for (xi, part) in parts.iter().enumerate() {
            if !heart.is_subset(part.child.support()) {
                return Err(clause(
                    Clause::Gamma,
                    format!("heart {heart} is not inside u^(p_{xi})"),
                ));
            }
            if blocks[xi].is_empty() {
                return Err(clause(Clause::Gamma, format!("block {xi} is empty")));
            }
            if let Some(hmax) = heart.last() {
                if hmax >= blocks[xi].first().unwrap() {
                    return Err(clause(
                        Clause::Gamma,
                        format!("heart maximum {hmax} is not below block {xi}"),
                    ));
                }
            }
        }
        for xi in 0..t {
            for eta in xi + 1..t {
                let meet = parts[xi]
                    .child
                    .support()
                    .intersection(parts[eta].child.support());
                if meet != heart {
                    return Err(clause(
                        Clause::Gamma,
                        format!("u^(p_{xi}) ∩ u^(p_{eta}) = {meet} differs from heart {heart}"),
                    ));
                }
            }
            if xi + 1 < t && blocks[xi].last().unwrap() >= blocks[xi + 1].first().unwrap() {
                return Err(clause(
                    Clause::Gamma,
                    format!("block {xi} is not entirely below block {}", xi + 1),
                ));
            }
        }
        // (δ)
        let base = &parts[0];
        let base_v_pos = positions_in(base.child.support(), &base.v);
        for (xi, part) in parts.iter().enumerate().skip(1) {
            let c = &part.child;
            if c.support().len() != base.child.support().len() {
                return Err(clause(
                    Clause::Delta,
                    format!("part {xi} has a different order type than part 0"),
                ));
            }
            let h = OrderMap::new(base.child.support().clone(), c.support().clone())?;
            if heart.iter().any(|i| h.apply(i) != Some(i)) {
                return Err(clause(
                    Clause::Delta,
                    format!("isomorphism onto part {xi} moves the heart"),
                ));
            }
            if c.table().masks() != base.child.table().masks() {
                return Err(clause(
                    Clause::Delta,
                    format!("F of part {xi} is not the transport of F of part 0"),
                ));
            }
            if positions_in(c.support(), &part.v) != base_v_pos {
                return Err(clause(
                    Clause::Delta,
                    format!("v_{xi} is not the image of v_0"),
                ));
            }
            if c.0.history != base.child.0.history || c.0.tags != base.child.0.tags {
                return Err(clause(
                    Clause::Delta,
                    format!("histories of part {xi} and part 0 differ"),
                ));
            }
        }

        let support = blocks.iter().fold(heart.clone(), |acc, b| acc.union(b));
        if support.len() > MAX_DOMAIN {
            return Err(Error::Resource(format!(
                "support of {} generators exceeds {MAX_DOMAIN}",
                support.len()
            )));
        }
        let amalgam = Amalgam {
            zeta_star,
            tau_star,
            heart,
            parts,
        };
        let table = build_table(&amalgam, width, &support)?;
        let (history, tags) = build_histories(&amalgam, &support, alpha);
        Ok(Condition(Arc::new(Node {
            width,
            shape: Shape::Amalgam(amalgam),
            support,
            table,
            height: alpha + 1,
            history,
            tags,
        })))
    }

    pub fn width(&self) -> Width {
        self.0.width
    }

    pub fn shape(&self) -> &Shape {
        &self.0.shape
    }

    pub fn as_amalgam(&self) -> Option<&Amalgam> {
        match &self.0.shape {
            Shape::Amalgam(a) => Some(a),
            Shape::Atomic(_) => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.0.shape, Shape::Atomic(_))
    }

    /// Parts of an amalgam; empty for atomic conditions.
    pub fn parts(&self) -> &[Part] {
        self.as_amalgam().map(|a| a.parts()).unwrap_or(&[])
    }

    /// `u^p`.
    pub fn support(&self) -> &IndexSet {
        &self.0.support
    }

    /// `F^p`.
    pub fn table(&self) -> &ValuationTable {
        &self.0.table
    }

    /// `ht(p)`.
    pub fn height(&self) -> usize {
        self.0.height
    }

    fn position(&self, j: GenIndex) -> Result<usize> {
        self.0
            .support
            .position(j)
            .ok_or_else(|| invalid(format!("{j} is not in the support {}", self.0.support)))
    }

    fn level_check(&self, level: usize) -> Result<()> {
        if level >= self.0.height {
            return Err(invalid(format!(
                "level {level} is not below height {}",
                self.0.height
            )));
        }
        Ok(())
    }

    /// `h^p(j, β)`.
    pub fn h(&self, j: GenIndex, level: usize) -> Result<HistoryValue> {
        let pos = self.position(j)?;
        self.level_check(level)?;
        Ok(self.0.history[pos * self.0.height + level])
    }

    /// `g^p(j, β)`.
    pub fn g(&self, j: GenIndex, level: usize) -> Result<&GTag> {
        let pos = self.position(j)?;
        self.level_check(level)?;
        Ok(&self.0.tags[pos * self.0.height + level])
    }

    /// The whole history of `j`, indexed by level.
    pub fn history_of(&self, j: GenIndex) -> Result<&[HistoryValue]> {
        let pos = self.position(j)?;
        let ht = self.0.height;
        Ok(&self.0.history[pos * ht..(pos + 1) * ht])
    }

    pub fn tags_of(&self, j: GenIndex) -> Result<&[GTag]> {
        let pos = self.position(j)?;
        let ht = self.0.height;
        Ok(&self.0.tags[pos * ht..(pos + 1) * ht])
    }

    pub(crate) fn history_table(&self) -> &[HistoryValue] {
        &self.0.history
    }

    pub(crate) fn tag_table(&self) -> &[GTag] {
        &self.0.tags
    }

    /// Levels `β < ht(p)` at which `h^p(j, β)` is below `θ`.
    pub fn fingerprint(&self, j: GenIndex) -> Result<Vec<usize>> {
        Ok(self
            .history_of(j)?
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_index())
            .map(|(b, _)| b)
            .collect())
    }

    /// Renames generators along an order-preserving map whose domain
    /// contains the support. Derived tables carry over unchanged because
    /// they are indexed by position.
    pub fn relabel(&self, map: &OrderMap) -> Result<Condition> {
        if !self.support().is_subset(map.domain()) {
            return Err(invalid(format!(
                "map domain {} does not cover support {}",
                map.domain(),
                self.support()
            )));
        }
        Ok(self.relabel_unchecked(map))
    }

    fn relabel_unchecked(&self, map: &OrderMap) -> Condition {
        let img = |s: &IndexSet| map.image(s).expect("covered by map");
        let shape = match &self.0.shape {
            Shape::Atomic(i) => Shape::Atomic(map.apply(*i).expect("covered by map")),
            Shape::Amalgam(a) => Shape::Amalgam(Amalgam {
                zeta_star: a.zeta_star,
                tau_star: a.tau_star.clone(),
                heart: img(&a.heart),
                parts: a
                    .parts
                    .iter()
                    .map(|p| Part {
                        child: p.child.relabel_unchecked(map),
                        v: img(&p.v),
                    })
                    .collect(),
            }),
        };
        let support = img(&self.0.support);
        Condition(Arc::new(Node {
            width: self.0.width,
            shape,
            table: ValuationTable::from_sorted_unchecked(
                support.clone(),
                self.0.table.masks().to_vec(),
            ),
            support,
            height: self.0.height,
            history: self.0.history.clone(),
            tags: self.0.tags.clone(),
        }))
    }

    /// Every condition occurring in the construction tree of `self`
    /// (including `self`), without repetitions, top-down by height.
    pub fn subconditions(&self) -> Vec<Condition> {
        let mut by_level: BTreeMap<std::cmp::Reverse<usize>, Vec<Condition>> = BTreeMap::new();
        let mut frontier = vec![self.clone()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for c in frontier {
                let bucket = by_level.entry(std::cmp::Reverse(c.height())).or_default();
                if bucket.contains(&c) {
                    continue;
                }
                next.extend(c.parts().iter().map(|p| p.child.clone()));
                bucket.push(c);
            }
            frontier = next;
        }
        by_level.into_values().flatten().collect()
    }

    /// Copy of this condition with one history entry overwritten. Only
    /// meant for building deliberately broken inputs for negative controls.
    #[doc(hidden)]
    pub fn with_history_override(
        &self,
        j: GenIndex,
        level: usize,
        value: HistoryValue,
    ) -> Result<Condition> {
        let pos = self.position(j)?;
        self.level_check(level)?;
        let mut history = self.0.history.clone();
        history[pos * self.0.height + level] = value;
        Ok(Condition(Arc::new(Node {
            width: self.0.width,
            shape: self.0.shape.clone(),
            support: self.0.support.clone(),
            table: self.0.table.clone(),
            height: self.0.height,
            history,
            tags: self.0.tags.clone(),
        })))
    }

    /// Copy of this condition with its table replaced. Negative controls only.
    #[doc(hidden)]
    pub fn with_table_override(&self, table: ValuationTable) -> Result<Condition> {
        if table.domain() != self.support() {
            return Err(invalid("replacement table has a different domain"));
        }
        Ok(Condition(Arc::new(Node {
            width: self.0.width,
            shape: self.0.shape.clone(),
            support: self.0.support.clone(),
            table,
            height: self.0.height,
            history: self.0.history.clone(),
            tags: self.0.tags.clone(),
        })))
    }

    /// True when the derived fields of both conditions coincide exactly.
    pub fn same_derived(&self, other: &Condition) -> bool {
        self.0.support == other.0.support
            && self.0.height == other.0.height
            && self.0.table == other.0.table
            && self.0.history == other.0.history
            && self.0.tags == other.0.tags
    }
}

fn positions_in(set: &IndexSet, sub: &IndexSet) -> Vec<usize> {
    sub.iter()
        .map(|i| set.position(i).expect("subset"))
        .collect()
}

/// Enumerates `F^p`: assignments whose restriction to each part lies in the
/// part's table and whose majority values over consecutive triples of parts
/// never decrease.
fn build_table(a: &Amalgam, width: Width, support: &IndexSet) -> Result<ValuationTable> {
    let t = width.get();
    let k = a.heart.len();
    let child = &a.parts[0].child;
    let block_len = child.support().len() - k;
    let heart_mask = (1u64 << k) - 1;
    let v_pos = positions_in(child.support(), &a.parts[0].v);

    // Child rows grouped by their heart part; the heart is a prefix of
    // every child's support, so it occupies the low bits.
    let mut groups: BTreeMap<u64, Vec<(u64, bool)>> = BTreeMap::new();
    for &row in child.table().masks() {
        let tau = a.tau_star.eval_with(&|s| row >> v_pos[s] & 1 == 1);
        groups
            .entry(row & heart_mask)
            .or_default()
            .push((row >> k, tau));
    }

    let mut candidates: u128 = 0;
    for exts in groups.values() {
        candidates += (exts.len() as u128).pow(t as u32);
    }
    if candidates > MAX_ROWS as u128 {
        return Err(Error::Resource(format!(
            "amalgam table would enumerate {candidates} candidate rows (limit {MAX_ROWS})"
        )));
    }

    let triples = width.triples();
    let mut rows = Vec::new();
    let mut pick = vec![0usize; t];
    let mut taus = vec![false; t];
    for (&hv, exts) in &groups {
        pick.iter_mut().for_each(|p| *p = 0);
        loop {
            let mut mask = hv;
            for (xi, &e) in pick.iter().enumerate() {
                let (bits, tau) = exts[e];
                mask |= bits << (k + xi * block_len);
                taus[xi] = tau;
            }
            let monotone = (1..triples)
                .all(|z| maj(&taus[3 * (z - 1)..3 * z]) <= maj(&taus[3 * z..3 * z + 3]));
            if monotone {
                rows.push(mask);
            }
            // odometer
            let mut xi = 0;
            while xi < t {
                pick[xi] += 1;
                if pick[xi] < exts.len() {
                    break;
                }
                pick[xi] = 0;
                xi += 1;
            }
            if xi == t {
                break;
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Consistency("amalgam has an empty table".into()));
    }
    rows.sort_unstable();
    debug_assert_eq!(support.len(), k + t * block_len);
    Ok(ValuationTable::from_sorted_unchecked(support.clone(), rows))
}

fn maj(bits: &[bool]) -> bool {
    (bits[0] && bits[1]) || (bits[0] && bits[2]) || (bits[1] && bits[2])
}

fn build_histories(
    a: &Amalgam,
    support: &IndexSet,
    alpha: usize,
) -> (Vec<HistoryValue>, Vec<GTag>) {
    let ht = alpha + 1;
    let mut history = Vec::with_capacity(support.len() * ht);
    let mut tags = Vec::with_capacity(support.len() * ht);
    for j in support.iter() {
        let in_heart = a.heart.contains(j);
        let xi = if in_heart {
            0
        } else {
            a.parts
                .iter()
                .position(|p| p.child.support().contains(j))
                .expect("support is the union of parts")
        };
        let part = &a.parts[xi];
        history.extend_from_slice(part.child.history_of(j).expect("in part"));
        tags.extend_from_slice(part.child.tags_of(j).expect("in part"));
        history.push(if in_heart {
            HistoryValue::Theta
        } else if xi == a.zeta_star {
            HistoryValue::ThetaPlusOne
        } else {
            HistoryValue::Index(xi as u32)
        });
        tags.push(GTag {
            bit: part.v.contains(j),
            term: a.tau_star.clone(),
        });
    }
    (history, tags)
}

/// Row masks of a table restricted to `sub`, without building a table.
pub(crate) fn restrict_masks(table: &ValuationTable, sub: &IndexSet) -> Vec<u64> {
    let pos = positions_in(table.domain(), sub);
    let mut out: Vec<u64> = table.masks().iter().map(|&r| gather(r, &pos)).collect();
    out.sort_unstable();
    out.dedup();
    out
}
