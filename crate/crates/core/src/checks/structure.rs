//! Checks on single conditions and on the order relations between the
//! conditions of one construction tree.

use std::collections::HashMap;

use serde_json::{json, Value};

use super::{run, shifted, subsets, CheckReport, Found};
use crate::algebra::Assignment;
use crate::condition::{restrict_masks, Condition, HistoryValue, Shape, MAX_HEIGHT};
use crate::error::Result;
use crate::index::{GenIndex, IndexSet, OrderMap};
use crate::order::{iso_map, leq, leq_pr, transform, transport};
use crate::signatures::pr_component;
use crate::workbench::{decode, encode};

pub(crate) fn cond_json(c: &Condition) -> Value {
    serde_json::from_str(&encode(c)).expect("encoding is valid JSON")
}

fn pair_json(a: &Condition, b: &Condition) -> Value {
    json!({ "p": cond_json(a), "q": cond_json(b) })
}

/// The construction tree of `p` together with every transform `T_a(p)`
/// for `a` in the tree, closed under taking subconditions.
pub fn pair_family(p: &Condition) -> Result<Vec<Condition>> {
    let mut family = p.subconditions();
    for a in p.subconditions() {
        let t = transform(&a, p)?;
        for c in t.subconditions() {
            if !family.contains(&c) {
                family.push(c);
            }
        }
    }
    Ok(family)
}

/// Re-encoding, decoding and re-amalgamating every node reproduces the
/// derived fields exactly.
pub fn check_rebuild(p: &Condition) -> CheckReport {
    run("rebuild_determinism", p, None, || {
        let text = encode(p);
        let back = decode(&text)?;
        if !back.same_derived(p) || encode(&back) != text {
            return Ok(Err(
                json!({ "issue": "decode(encode(p)) differs", "p": cond_json(p) }),
            ));
        }
        let subs = p.subconditions();
        for c in &subs {
            if let Shape::Amalgam(a) = c.shape() {
                let again = Condition::amalgamate(
                    a.zeta_star(),
                    a.tau_star().clone(),
                    a.heart().clone(),
                    a.parts().to_vec(),
                )?;
                if !again.same_derived(c) {
                    return Ok(Err(
                        json!({ "issue": "rebuild differs", "node": cond_json(c) }),
                    ));
                }
            }
        }
        Ok(Ok(json!({ "nodes": subs.len(), "bytes": text.len() })))
    })
}

fn restrict_rows(q: &Condition, sub: &IndexSet) -> Result<Vec<u64>> {
    let mut out = q
        .table()
        .rows()
        .map(|f| f.restrict(sub).map(|r| r.bits()))
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The six checks on extension, histories and fingerprints, in order:
/// `extension_restriction`, `index_levels_finite`,
/// `pure_extension_histories`, `histories_separate`,
/// `fingerprints_realized`, `pure_interpolation`.
pub fn check_extension_properties(p: &Condition) -> Vec<CheckReport> {
    let family = pair_family(p);
    let fam = || family.clone();
    vec![
        run("extension_restriction", p, None, || {
            extension_restriction(&fam()?)
        }),
        run("index_levels_finite", p, None, || index_levels_finite(p)),
        run("pure_extension_histories", p, None, || {
            pure_histories(&fam()?)
        }),
        run("histories_separate", p, None, || histories_separate(p)),
        run("fingerprints_realized", p, None, || {
            fingerprints_realized(p)
        }),
        run(
            "pure_interpolation",
            p,
            None,
            || pure_interpolation(&fam()?),
        ),
    ]
}

fn extension_restriction(family: &[Condition]) -> Result<Found> {
    let mut pairs = 0usize;
    for a in family {
        for b in family {
            if !leq(a, b)? {
                continue;
            }
            pairs += 1;
            let issue = if !a.support().is_subset(b.support()) {
                Some("support not contained")
            } else if a.height() > b.height() {
                Some("height decreases")
            } else if restrict_rows(b, a.support())? != a.table().masks()
                || restrict_masks(b.table(), a.support()) != a.table().masks()
            {
                Some("restriction of the larger table differs from the smaller table")
            } else if a.height() == b.height() && !leq(b, a)? {
                Some("equal heights but the reverse extension fails")
            } else {
                None
            };
            if let Some(issue) = issue {
                let mut cex = pair_json(a, b);
                cex["issue"] = json!(issue);
                return Ok(Err(cex));
            }
        }
    }
    Ok(Ok(json!({ "pairs": pairs })))
}

fn index_levels_finite(p: &Condition) -> Result<Found> {
    for j in p.support().iter() {
        let direct: Vec<usize> = (0..p.height())
            .filter(|&b| matches!(p.h(j, b), Ok(HistoryValue::Index(_))))
            .collect();
        let fp = p.fingerprint(j)?;
        if fp != direct || fp.len() > p.height() {
            return Ok(Err(
                json!({ "j": j.0, "fingerprint": fp, "direct": direct }),
            ));
        }
    }
    Ok(Ok(json!({ "generators": p.support().len() })))
}

fn pure_histories(family: &[Condition]) -> Result<Found> {
    let mut pairs = 0usize;
    for a in family {
        for b in family {
            if !leq_pr(a, b)? {
                continue;
            }
            pairs += 1;
            for i in a.support().iter() {
                for beta in 0..b.height() {
                    let hb = b.h(i, beta)?;
                    let bad = if beta < a.height() {
                        hb != a.h(i, beta)? || b.g(i, beta)? != a.g(i, beta)?
                    } else {
                        hb.is_index()
                    };
                    if bad {
                        let mut cex = pair_json(a, b);
                        cex["j"] = json!(i.0);
                        cex["beta"] = json!(beta);
                        return Ok(Err(cex));
                    }
                }
            }
        }
    }
    Ok(Ok(json!({ "pairs": pairs })))
}

fn histories_separate(p: &Condition) -> Result<Found> {
    let u = p.support().as_slice();
    let mut pairs = 0usize;
    for (k, &i) in u.iter().enumerate() {
        for &j in &u[k + 1..] {
            pairs += 1;
            let separated = (0..p.height()).any(|b| {
                let (hi, hj) = (p.h(i, b).unwrap(), p.h(j, b).unwrap());
                hi != hj && hi != HistoryValue::Theta && hj != HistoryValue::Theta
            });
            if !separated {
                return Ok(Err(json!({
                    "i": i.0,
                    "j": j.0,
                    "h_i": p.history_of(i)?.iter().map(|v| v.encode(p.width())).collect::<Vec<_>>(),
                    "h_j": p.history_of(j)?.iter().map(|v| v.encode(p.width())).collect::<Vec<_>>(),
                })));
            }
        }
    }
    Ok(Ok(json!({ "pairs": pairs })))
}

fn fingerprints_realized(p: &Condition) -> Result<Found> {
    let mut realized: HashMap<Vec<usize>, GenIndex> = HashMap::new();
    for j in p.support().iter() {
        realized.entry(p.fingerprint(j)?).or_insert(j);
    }
    let mut count = 0usize;
    for x in subsets(p.height()) {
        count += 1;
        if !realized.contains_key(&x) {
            return Ok(Err(json!({ "levels": x })));
        }
    }
    Ok(Ok(json!({ "level_sets": count })))
}

fn pure_interpolation(family: &[Condition]) -> Result<Found> {
    let mut pairs = 0usize;
    for a in family {
        for b in family {
            if !leq_pr(a, b)? {
                continue;
            }
            pairs += 1;
            let chain = (a.height()..=b.height())
                .map(|xi| pr_component(b, xi))
                .collect::<Result<Vec<_>>>()?;
            let ok = chain.first() == Some(a)
                && chain.last() == Some(b)
                && chain.iter().zip(a.height()..).all(|(c, h)| c.height() == h)
                && chain
                    .windows(2)
                    .all(|w| leq_pr(&w[0], &w[1]).unwrap_or(false))
                && (a.height() != b.height() || a == b);
            if !ok {
                return Ok(Err(pair_json(a, b)));
            }
        }
    }
    Ok(Ok(json!({ "pairs": pairs })))
}

/// Groups rows by their values below `j`; `x_j` is generated by the
/// earlier generators exactly when every group is constant on `j`.
fn generated_by_prefix(p: &Condition, pos: usize) -> bool {
    let prefix = (1u64 << pos) - 1;
    let mut seen: HashMap<u64, u64> = HashMap::new();
    p.table().masks().iter().all(|&r| {
        let bit = r >> pos & 1;
        *seen.entry(r & prefix).or_insert(bit) == bit
    })
}

/// No generator lies in the subalgebra generated by the smaller ones.
pub fn check_generator_independence(p: &Condition) -> CheckReport {
    run("generator_independence", p, None, || {
        for (pos, j) in p.support().iter().enumerate() {
            let lib = p.table().in_generated(j, &p.support().below(j))?;
            let oracle = generated_by_prefix(p, pos);
            if lib || oracle {
                return Ok(Err(json!({ "j": j.0, "library": lib, "oracle": oracle })));
            }
        }
        Ok(Ok(
            json!({ "generators": p.support().len(), "rows": p.table().len() }),
        ))
    })
}

/// Whether `F^p = {f∘H : f ∈ F^q}`, checked row by row on assignments.
fn rows_correspond(p: &Condition, q: &Condition, h: &OrderMap) -> Result<bool> {
    let mut pulled = Vec::with_capacity(q.table().len());
    for f in q.table().rows() {
        let pairs: Vec<(u32, bool)> = p
            .support()
            .iter()
            .map(|i| (i.0, f.get(h.apply(i).expect("covers u^p")).expect("in u^q")))
            .collect();
        pulled.push(Assignment::from_pairs(&pairs)?.bits());
    }
    pulled.sort_unstable();
    pulled.dedup();
    Ok(pulled == p.table().masks())
}

/// Isomorphisms between the conditions of the tree and onto a shifted
/// copy: tables correspond along the map and transport lands on the
/// relabelled condition.
pub fn check_isomorphism(p: &Condition) -> CheckReport {
    run("isomorphism_transport", p, None, || {
        let (copy, shift) = shifted(p)?;
        match iso_map(p, &copy)? {
            Some(h) if h == shift => {}
            other => {
                return Ok(Err(json!({
                    "issue": "shifted copy not recognized",
                    "found": other.map(|h| h.to_string()),
                })))
            }
        }
        if !iso_map(p, p)?.is_some_and(|h| h.is_identity()) {
            return Ok(Err(json!({ "issue": "self map is not the identity" })));
        }
        let subs = p.subconditions();
        let mut transported = 0usize;
        for a in &subs {
            let moved = transport(&shift, a, p, &copy)?;
            let expect = a.relabel(&shift.restrict(a.support())?)?;
            if moved != expect || !rows_correspond(a, &moved, &shift.restrict(a.support())?)? {
                let mut cex = pair_json(a, p);
                cex["issue"] = json!("transport onto the shifted copy");
                return Ok(Err(cex));
            }
            transported += 1;
        }
        let mut isomorphic = 0usize;
        for a in &subs {
            for b in &subs {
                if let Some(h) = iso_map(a, b)? {
                    isomorphic += 1;
                    if !rows_correspond(a, b, &h)? {
                        let mut cex = pair_json(a, b);
                        cex["issue"] = json!("tables do not correspond");
                        return Ok(Err(cex));
                    }
                }
            }
        }
        Ok(Ok(
            json!({ "transported": transported, "isomorphic_pairs": isomorphic }),
        ))
    })
}

/// `T_a(q)` for every `a ≤ q` in the tree: support and height of `q`,
/// `a ≤_pr T ≤ q ≤ T`, fixed at equal heights, commutes with transport
/// onto a shifted copy, and is monotone along `≤_pr` in `q`.
pub fn check_transform(p: &Condition) -> CheckReport {
    run("transform_contract", p, None, || {
        let subs = p.subconditions();
        let mut pairs = 0usize;
        let mut monotone = 0usize;
        for q in &subs {
            let (copy, shift) = shifted(q)?;
            for a in q.subconditions() {
                pairs += 1;
                let t = transform(&a, q)?;
                let fail = |item: u32| {
                    let mut cex = pair_json(&a, q);
                    cex["item"] = json!(item);
                    cex["transform"] = cond_json(&t);
                    Ok(Err(cex))
                };
                if t.support() != q.support() || t.height() != q.height() {
                    return fail(1);
                }
                if !leq_pr(&a, &t)? || !leq(&t, q)? || !leq(q, &t)? {
                    return fail(2);
                }
                if a.height() == q.height() && t != a {
                    return fail(3);
                }
                let moved = transport(&shift, &a, q, &copy)?;
                let t_copy = transform(&moved, &copy)?;
                if iso_map(&t, &t_copy)?.as_ref() != Some(&shift) {
                    return fail(4);
                }
                for q2 in &subs {
                    if q2 != q && leq_pr(q, q2)? {
                        monotone += 1;
                        if !leq_pr(&t, &transform(&a, q2)?)? {
                            return fail(5);
                        }
                    }
                }
            }
        }
        Ok(Ok(json!({ "pairs": pairs, "monotone_triples": monotone })))
    })
}

/// Reflexivity and transitivity of `≤`; `≤_pr` is a partial order
/// contained in `≤`.
pub fn check_order_relations(p: &Condition) -> CheckReport {
    run("order_relations", p, None, || {
        let family = pair_family(p)?;
        let n = family.len();
        let mut le = vec![false; n * n];
        let mut pr = vec![false; n * n];
        for (x, a) in family.iter().enumerate() {
            for (y, b) in family.iter().enumerate() {
                le[x * n + y] = leq(a, b)?;
                pr[x * n + y] = leq_pr(a, b)?;
            }
        }
        let cex = |what: &str, idx: &[usize]| {
            let conds: Vec<Value> = idx.iter().map(|&i| cond_json(&family[i])).collect();
            Ok(Err(json!({ "property": what, "conditions": conds })))
        };
        for x in 0..n {
            if !le[x * n + x] || !pr[x * n + x] {
                return cex("reflexive", &[x]);
            }
            for y in 0..n {
                if pr[x * n + y] && !le[x * n + y] {
                    return cex("pure extension implies extension", &[x, y]);
                }
                if x != y && pr[x * n + y] && pr[y * n + x] {
                    return cex("pure extension antisymmetric", &[x, y]);
                }
                for z in 0..n {
                    if le[x * n + y] && le[y * n + z] && !le[x * n + z] {
                        return cex("extension transitive", &[x, y, z]);
                    }
                    if pr[x * n + y] && pr[y * n + z] && !pr[x * n + z] {
                        return cex("pure extension transitive", &[x, y, z]);
                    }
                }
            }
        }
        let comparable = le.iter().filter(|&&b| b).count();
        Ok(Ok(
            json!({ "conditions": n, "comparable_pairs": comparable }),
        ))
    })
}

const _: () = assert!(MAX_HEIGHT < 8, "level subsets are enumerated as bitmasks");
