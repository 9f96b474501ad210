//! Boolean terms over numbered slots and their instances over generators.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::index::{GenIndex, IndexSet};

/// A Boolean term `τ(y_0, …, y_{n-1})`. Equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolTerm {
    Const(bool),
    Var(usize),
    Not(Box<BoolTerm>),
    And(Box<BoolTerm>, Box<BoolTerm>),
    Or(Box<BoolTerm>, Box<BoolTerm>),
}

impl BoolTerm {
    pub fn zero() -> Self {
        BoolTerm::Const(false)
    }

    pub fn one() -> Self {
        BoolTerm::Const(true)
    }

    pub fn var(k: usize) -> Self {
        BoolTerm::Var(k)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: BoolTerm) -> Self {
        BoolTerm::Not(Box::new(t))
    }

    pub fn and(a: BoolTerm, b: BoolTerm) -> Self {
        BoolTerm::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolTerm, b: BoolTerm) -> Self {
        BoolTerm::Or(Box::new(a), Box::new(b))
    }

    /// Number of slots: one more than the largest slot referenced.
    pub fn arity(&self) -> usize {
        match self {
            BoolTerm::Const(_) => 0,
            BoolTerm::Var(k) => k + 1,
            BoolTerm::Not(a) => a.arity(),
            BoolTerm::And(a, b) | BoolTerm::Or(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Evaluates with slot values supplied by `slot`.
    pub fn eval_with(&self, slot: &impl Fn(usize) -> bool) -> bool {
        match self {
            BoolTerm::Const(c) => *c,
            BoolTerm::Var(k) => slot(*k),
            BoolTerm::Not(a) => !a.eval_with(slot),
            BoolTerm::And(a, b) => a.eval_with(slot) && b.eval_with(slot),
            BoolTerm::Or(a, b) => a.eval_with(slot) || b.eval_with(slot),
        }
    }

    /// Two-valued evaluation; `bits` must have exactly `arity` entries.
    pub fn eval(&self, bits: &[bool]) -> Result<bool> {
        if bits.len() != self.arity() {
            return Err(invalid(format!(
                "term of arity {} applied to {} bits",
                self.arity(),
                bits.len()
            )));
        }
        Ok(self.eval_with(&|k| bits[k]))
    }

    /// Replaces every slot `k` by `subst[k]`.
    pub fn substitute(&self, subst: &[BoolTerm]) -> BoolTerm {
        match self {
            BoolTerm::Const(c) => BoolTerm::Const(*c),
            BoolTerm::Var(k) => subst[*k].clone(),
            BoolTerm::Not(a) => BoolTerm::not(a.substitute(subst)),
            BoolTerm::And(a, b) => BoolTerm::and(a.substitute(subst), b.substitute(subst)),
            BoolTerm::Or(a, b) => BoolTerm::or(a.substitute(subst), b.substitute(subst)),
        }
    }

    fn collect_slots(&self, used: &mut Vec<bool>) {
        match self {
            BoolTerm::Const(_) => {}
            BoolTerm::Var(k) => used[*k] = true,
            BoolTerm::Not(a) => a.collect_slots(used),
            BoolTerm::And(a, b) | BoolTerm::Or(a, b) => {
                a.collect_slots(used);
                b.collect_slots(used);
            }
        }
    }

    /// Which of the `arity` slots actually occur in the term.
    pub fn used_slots(&self) -> Vec<bool> {
        let mut used = vec![false; self.arity()];
        self.collect_slots(&mut used);
        used
    }
}

/// The ternary majority term `(y0∧y1)∨(y0∧y2)∨(y1∧y2)`.
pub fn sigma_maj() -> BoolTerm {
    let y = BoolTerm::var;
    BoolTerm::or(
        BoolTerm::or(BoolTerm::and(y(0), y(1)), BoolTerm::and(y(0), y(2))),
        BoolTerm::and(y(1), y(2)),
    )
}

impl fmt::Display for BoolTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolTerm::Const(c) => write!(f, "{}", u8::from(*c)),
            BoolTerm::Var(k) => write!(f, "y{k}"),
            BoolTerm::Not(a) => write!(f, "¬{a}"),
            BoolTerm::And(a, b) => write!(f, "({a} ∧ {b})"),
            BoolTerm::Or(a, b) => write!(f, "({a} ∨ {b})"),
        }
    }
}

// Wire form: ["const",0|1] | ["var",k] | ["not",T] | ["and",T,T] | ["or",T,T]
impl Serialize for BoolTerm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoolTerm::Const(c) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element("const")?;
                seq.serialize_element(&u8::from(*c))?;
                seq.end()
            }
            BoolTerm::Var(k) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element("var")?;
                seq.serialize_element(k)?;
                seq.end()
            }
            BoolTerm::Not(a) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element("not")?;
                seq.serialize_element(a.as_ref())?;
                seq.end()
            }
            BoolTerm::And(a, b) | BoolTerm::Or(a, b) => {
                let tag = if matches!(self, BoolTerm::And(..)) {
                    "and"
                } else {
                    "or"
                };
                let mut seq = s.serialize_seq(Some(3))?;
                seq.serialize_element(tag)?;
                seq.serialize_element(a.as_ref())?;
                seq.serialize_element(b.as_ref())?;
                seq.end()
            }
        }
    }
}

struct TermVisitor;

impl<'de> Visitor<'de> for TermVisitor {
    type Value = BoolTerm;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a term array such as [\"and\", T, T]")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<BoolTerm, A::Error> {
        let tag: String = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let term = match tag.as_str() {
            "const" => {
                let c: u8 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                match c {
                    0 => BoolTerm::Const(false),
                    1 => BoolTerm::Const(true),
                    _ => return Err(de::Error::custom(format!("constant {c} is not 0 or 1"))),
                }
            }
            "var" => {
                let k: usize = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                BoolTerm::Var(k)
            }
            "not" => {
                let a: BoolTerm = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                BoolTerm::not(a)
            }
            "and" | "or" => {
                let a: BoolTerm = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let b: BoolTerm = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(2, &self))?;
                if tag == "and" {
                    BoolTerm::and(a, b)
                } else {
                    BoolTerm::or(a, b)
                }
            }
            other => return Err(de::Error::custom(format!("unknown term tag {other:?}"))),
        };
        if seq.next_element::<de::IgnoredAny>()?.is_some() {
            return Err(de::Error::custom(format!("trailing items in {tag:?} term")));
        }
        Ok(term)
    }
}

impl<'de> Deserialize<'de> for BoolTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_seq(TermVisitor)
    }
}

/// A term applied to generators: slot `k` binds the `k`-th smallest element
/// of `args`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TermInstance {
    term: BoolTerm,
    args: IndexSet,
}

impl TermInstance {
    pub fn new(term: BoolTerm, args: IndexSet) -> Result<Self> {
        if term.arity() != args.len() {
            return Err(invalid(format!(
                "term {term} has arity {} but {} arguments were given",
                term.arity(),
                args.len()
            )));
        }
        Ok(TermInstance { term, args })
    }

    /// The bare generator `x_i`.
    pub fn generator(i: GenIndex) -> Self {
        TermInstance {
            term: BoolTerm::Var(0),
            args: IndexSet::singleton(i),
        }
    }

    pub fn constant(c: bool) -> Self {
        TermInstance {
            term: BoolTerm::Const(c),
            args: IndexSet::new(),
        }
    }

    pub fn term(&self) -> &BoolTerm {
        &self.term
    }

    pub fn args(&self) -> &IndexSet {
        &self.args
    }

    /// Applies `outer` to the given instances, producing one instance over
    /// the union of their arguments. Arguments that end up unused are
    /// dropped so that the arity invariant holds.
    pub fn compose(outer: &BoolTerm, inner: &[TermInstance]) -> Result<TermInstance> {
        if outer.arity() > inner.len() {
            return Err(invalid(format!(
                "outer term of arity {} given {} instances",
                outer.arity(),
                inner.len()
            )));
        }
        let all = inner
            .iter()
            .fold(IndexSet::new(), |acc, t| acc.union(&t.args));
        let rebased: Vec<BoolTerm> = inner
            .iter()
            .map(|t| {
                let slots: Vec<BoolTerm> = t
                    .args
                    .iter()
                    .map(|i| BoolTerm::Var(all.position(i).expect("arg in union")))
                    .collect();
                t.term.substitute(&slots)
            })
            .collect();
        let combined = outer.substitute(&rebased);
        Ok(TermInstance::compact(combined, &all))
    }

    /// Drops arguments whose slots the term never reads.
    fn compact(term: BoolTerm, args: &IndexSet) -> TermInstance {
        let mut used = term.used_slots();
        used.resize(args.len(), false);
        let mut renumber = Vec::with_capacity(args.len());
        let mut kept = Vec::new();
        for (k, i) in args.iter().enumerate() {
            renumber.push(BoolTerm::Var(kept.len()));
            if used[k] {
                kept.push(i);
            }
        }
        let term = term.substitute(&renumber);
        TermInstance {
            term,
            args: IndexSet::from_unsorted(kept),
        }
    }
}

impl fmt::Display for TermInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.term, self.args)
    }
}
