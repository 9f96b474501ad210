//! Executable check batteries.
//!
//! Each check pairs a library computation with a brute-force recomputation
//! and returns a [`CheckReport`]. Failures carry a JSON counterexample that
//! names the offending generators, levels, rows or pairs.

mod analysis;
mod chains;
mod structure;

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::condition::Condition;
use crate::error::Result;
use crate::index::{GenIndex, OrderMap};
use crate::term::BoolTerm;
use crate::workbench::{condition_id, TermPool};

pub use analysis::{
    admissible_pairs, check_closed_sets, check_components, check_flip_closure, check_flip_pair,
    check_flip_with_map, check_upsilon,
};
pub use chains::{
    build_maj_chain, check_chain_collapse, check_collapse_battery, check_majority_chain,
    majority_gate,
};
pub use structure::{
    check_extension_properties, check_generator_independence, check_isomorphism,
    check_order_relations, check_rebuild, check_transform, pair_family,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub condition_id: String,
    pub verdict: Verdict,
    /// Replayable witness of the failure; `null` on a pass.
    pub counterexample: Option<Value>,
    /// Counts of what was examined.
    pub stats: Value,
    pub ms: f64,
    pub seed: Option<u64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Either the statistics of a passing check or a counterexample.
pub(crate) type Found = std::result::Result<Value, Value>;

pub(crate) fn run(
    name: &str,
    p: &Condition,
    seed: Option<u64>,
    body: impl FnOnce() -> Result<Found>,
) -> CheckReport {
    let start = Instant::now();
    let outcome = body();
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let (verdict, counterexample, stats) = match outcome {
        Ok(Ok(stats)) => (Verdict::Pass, None, stats),
        Ok(Err(cex)) => (Verdict::Fail, Some(cex), Value::Null),
        Err(e) => (
            Verdict::Fail,
            Some(json!({ "error": e.to_string() })),
            Value::Null,
        ),
    };
    CheckReport {
        name: name.to_string(),
        condition_id: condition_id(p),
        verdict,
        counterexample,
        stats,
        ms,
        seed,
    }
}

/// Knobs for [`run_suite`].
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Seed for the sampled tier of the flip check.
    pub seed: u64,
    /// Largest `pairs × rows` product checked exhaustively by the flip check.
    pub flip_budget: usize,
    /// Number of `(pair, row)` samples drawn when the flip check samples.
    pub flip_samples: usize,
    /// Terms tried by the chain-collapse battery.
    pub collapse_terms: Vec<BoolTerm>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            flip_budget: 1 << 22,
            flip_samples: 10_000,
            collapse_terms: TermPool::Standard.terms(),
        }
    }
}

/// Every check, in a fixed order.
pub fn run_suite(p: &Condition, config: &SuiteConfig) -> Vec<CheckReport> {
    let mut out = vec![check_rebuild(p)];
    out.extend(check_extension_properties(p));
    out.push(check_generator_independence(p));
    out.push(check_isomorphism(p));
    out.push(check_transform(p));
    out.push(check_components(p));
    out.push(check_closed_sets(p));
    out.push(check_upsilon(p));
    out.push(check_flip_closure(p, config));
    out.push(check_collapse_battery(p, &config.collapse_terms));
    out.push(check_majority_chain(p));
    out.push(check_order_relations(p));
    out
}

/// Copy of `p` with one generator's history replaced by another's, so
/// that the two can no longer be told apart. `None` when `p` has fewer
/// than two generators or height 0.
#[doc(hidden)]
pub fn corrupt_history(p: &Condition) -> Option<Condition> {
    if p.height() == 0 || p.support().len() < 2 {
        return None;
    }
    let (a, b) = (p.support().get(0)?, p.support().get(1)?);
    let mut q = p.clone();
    for level in 0..p.height() {
        q = q
            .with_history_override(b, level, p.h(a, level).ok()?)
            .ok()?;
    }
    Some(q)
}

/// Copy of `p` relabelled onto indices just above its support.
pub(crate) fn shifted(p: &Condition) -> Result<(Condition, OrderMap)> {
    let offset = p.support().last().map_or(0, |m| m.0 + 1);
    let target = p.support().iter().map(|i| GenIndex(i.0 + offset)).collect();
    let map = OrderMap::new(p.support().clone(), target)?;
    Ok((p.relabel(&map)?, map))
}

pub(crate) fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |m| (0..n).filter(|&b| m >> b & 1 == 1).collect())
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}
