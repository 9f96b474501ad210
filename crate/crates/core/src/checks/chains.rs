//! The majority chain of an amalgam and the collapse of chains between
//! elements related by a flip.

use serde_json::json;

use super::structure::cond_json;
use super::{combinations, run, CheckReport};
use crate::algebra::RowSet;
use crate::condition::Condition;
use crate::error::{invalid, CollapseItem, Error, Result};
use crate::index::IndexSet;
use crate::signatures::{
    closed_sets, is_p_closed, level_map_fixes_overlap, u_iso, u_set, upsilon, ClosedSet,
};
use crate::term::{sigma_maj, BoolTerm, TermInstance};

fn tau_instances(q: &Condition) -> Result<Vec<TermInstance>> {
    let a = q
        .as_amalgam()
        .ok_or_else(|| invalid("the majority chain needs an amalgam"))?;
    a.parts()
        .iter()
        .map(|part| TermInstance::new(a.tau_star().clone(), part.v.clone()))
        .collect()
}

/// `σ_maj(τ_{3ξ}, τ_{3ξ+1}, τ_{3ξ+2})` for every full triple of parts,
/// where `τ_η` is `τ*` applied to `v_η`.
pub fn build_maj_chain(q: &Condition) -> Result<Vec<TermInstance>> {
    let taus = tau_instances(q)?;
    taus.chunks_exact(3)
        .map(|triple| TermInstance::compose(&sigma_maj(), triple))
        .collect()
}

/// True when no `τ_ξ` lies in the subalgebra of its part generated by the
/// heart.
pub fn majority_gate(q: &Condition) -> Result<bool> {
    let taus = tau_instances(q)?;
    let a = q.as_amalgam().expect("checked above");
    for (part, tau) in a.parts().iter().zip(&taus) {
        if part.child.table().instance_in_generated(tau, a.heart())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extension of `inst` in `F^q`, by evaluating every row.
fn extension_oracle(q: &Condition, inst: &TermInstance) -> Result<RowSet> {
    let mut set = RowSet::empty(q.table().len());
    for (k, f) in q.table().rows().enumerate() {
        if crate::algebra::instance_value(&f, inst)? {
            set.insert(k);
        }
    }
    Ok(set)
}

/// On every amalgam of the tree the majority chain has `⌊t/3⌋` elements
/// and never decreases; when the gate holds it is strictly increasing and
/// no longer strict chain exists among its elements.
pub fn check_majority_chain(p: &Condition) -> CheckReport {
    run("majority_chain", p, None, || {
        let (mut amalgams, mut gated) = (0usize, 0usize);
        for q in p.subconditions().iter().filter(|q| !q.is_atomic()) {
            amalgams += 1;
            let chain = build_maj_chain(q)?;
            let exts = chain
                .iter()
                .map(|e| extension_oracle(q, e))
                .collect::<Result<Vec<_>>>()?;
            let fail = |issue: &str| Ok(Err(json!({ "issue": issue, "amalgam": cond_json(q) })));
            if chain.len() != q.width().get() / 3 {
                return fail("length");
            }
            for (k, w) in exts.windows(2).enumerate() {
                if !w[0].is_subset(&w[1]) || !q.table().elem_le(&chain[k], &chain[k + 1])? {
                    return fail("decreasing step");
                }
            }
            if majority_gate(q)? {
                gated += 1;
                for (k, w) in exts.windows(2).enumerate() {
                    if !w[0].is_proper_subset(&w[1])
                        || !q.table().elem_lt(&chain[k], &chain[k + 1])?
                    {
                        return fail("step not strict");
                    }
                }
                if !chain.is_empty() && q.table().longest_chain(&chain)?.length != chain.len() {
                    return fail("longest chain");
                }
            }
        }
        Ok(Ok(json!({ "amalgams": amalgams, "gated": gated })))
    })
}

fn precondition(item: CollapseItem, detail: impl Into<String>) -> Error {
    Error::Precondition {
        item,
        detail: detail.into(),
    }
}

fn strictly_below(q: &Condition, a: &TermInstance, b: &TermInstance) -> Result<(bool, bool)> {
    let lib = q.table().elem_lt(a, b)?;
    let oracle = extension_oracle(q, a)?.is_proper_subset(&extension_oracle(q, b)?);
    Ok((lib, oracle))
}

/// `τ(w0) < τ(w1)` must fail in `F^p` when `Z0, Z1` are closed, cover the
/// fingerprints of `w0, w1` and have equal signatures (item (i)), their
/// level map fixes the overlap (item (ii)), and the `U`-set isomorphism
/// carries `w0` onto `w1` (item (iii)). A violated item is an error.
pub fn check_chain_collapse(
    p: &Condition,
    tau: &BoolTerm,
    w0: &IndexSet,
    w1: &IndexSet,
    z0: &[usize],
    z1: &[usize],
) -> Result<CheckReport> {
    if w0.len() != tau.arity() || w1.len() != tau.arity() {
        return Err(invalid(format!(
            "term of arity {} applied to {} and {} generators",
            tau.arity(),
            w0.len(),
            w1.len()
        )));
    }
    for z in [z0, z1] {
        if !is_p_closed(p, z)? {
            return Err(precondition(
                CollapseItem::I,
                format!("levels {z:?} are not closed"),
            ));
        }
    }
    let (c0, c1) = (ClosedSet::new(p, z0)?, ClosedSet::new(p, z1)?);
    if c0.len() != c1.len() || upsilon(p, &c0)? != upsilon(p, &c1)? {
        return Err(precondition(
            CollapseItem::I,
            format!("{c0} and {c1} have different signatures"),
        ));
    }
    if !w0.is_subset(&u_set(p, &c0)?) || !w1.is_subset(&u_set(p, &c1)?) {
        return Err(precondition(
            CollapseItem::I,
            "a fingerprint is not covered",
        ));
    }
    if !level_map_fixes_overlap(&c0, &c1) {
        return Err(precondition(
            CollapseItem::II,
            format!("{c0} → {c1} moves a shared level"),
        ));
    }
    let pi = u_iso(p, &c0, &c1)?;
    if pi.image(w0)? != *w1 {
        return Err(precondition(
            CollapseItem::III,
            format!("π does not carry {w0} onto {w1}"),
        ));
    }
    let a = TermInstance::new(tau.clone(), w0.clone())?;
    let b = TermInstance::new(tau.clone(), w1.clone())?;
    Ok(run("chain_collapse", p, None, || {
        let (lib, oracle) = strictly_below(p, &a, &b)?;
        if lib || oracle {
            return Ok(Err(json!({
                "tau": tau, "w0": w0.to_string(), "w1": w1.to_string(),
                "z0": z0, "z1": z1, "library": lib, "oracle": oracle,
            })));
        }
        Ok(Ok(json!({ "rows": p.table().len() })))
    }))
}

/// Every instance of the chain-collapse check reachable from the
/// condition: each pair of closed sets meeting items (i) and (ii), each
/// term, and each `w0 ⊆ U[p,Z0]` of the term's arity with `w1 = π[w0]`.
pub fn check_collapse_battery(p: &Condition, terms: &[BoolTerm]) -> CheckReport {
    run("chain_collapse", p, None, || {
        let closed = closed_sets(p);
        let sigs = closed
            .iter()
            .map(|z| upsilon(p, z))
            .collect::<Result<Vec<_>>>()?;
        let (mut pairs, mut instances) = (0usize, 0usize);
        for (x, z0) in closed.iter().enumerate() {
            for (y, z1) in closed.iter().enumerate() {
                if z0.len() != z1.len() || sigs[x] != sigs[y] || !level_map_fixes_overlap(z0, z1) {
                    continue;
                }
                pairs += 1;
                let pi = u_iso(p, z0, z1)?;
                let u0 = pi.domain().clone();
                for tau in terms {
                    let n = tau.arity();
                    if n > u0.len() {
                        continue;
                    }
                    for pick in combinations(u0.len(), n) {
                        let w0: IndexSet = pick.iter().map(|&k| u0.get(k).unwrap()).collect();
                        let w1 = pi.image(&w0)?;
                        let a = TermInstance::new(tau.clone(), w0.clone())?;
                        let b = TermInstance::new(tau.clone(), w1.clone())?;
                        instances += 1;
                        let (lib, oracle) = strictly_below(p, &a, &b)?;
                        if lib || oracle {
                            return Ok(Err(json!({
                                "tau": tau, "w0": w0.to_string(), "w1": w1.to_string(),
                                "z0": z0.levels(), "z1": z1.levels(),
                                "library": lib, "oracle": oracle,
                            })));
                        }
                    }
                }
            }
        }
        Ok(Ok(json!({ "pairs": pairs, "instances": instances })))
    })
}
