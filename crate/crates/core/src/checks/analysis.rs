//! Checks on components, closed level sets, signatures and the flip map.

use std::collections::BTreeSet;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde_json::{json, Value};

use super::structure::cond_json;
use super::{run, shifted, subsets, CheckReport, SuiteConfig};
use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::index::{GenIndex, IndexSet, OrderMap};
use crate::order::{iso_map, leq, leq_pr};
use crate::signatures::{
    close, closed_sets, components, is_p_closed, level_map_fixes_overlap, pr_component, u_iso,
    u_set, upsilon, ClosedSet, FlipMap,
};

/// Components at every level below the height: height, extension, the
/// agreement of histories above the level, the unique component per
/// generator, isomorphism invariance and the pure component.
pub fn check_components(p: &Condition) -> CheckReport {
    run("component_structure", p, None, || {
        let (copy, shift) = shifted(p)?;
        let ht = p.height();
        let mut examined = 0usize;
        for alpha in 0..ht {
            let comps = components(p, alpha)?;
            let copy_comps = components(&copy, alpha)?;
            let fail = |issue: &str, q: &Condition| {
                Ok(Err(
                    json!({ "alpha": alpha, "issue": issue, "component": cond_json(q) }),
                ))
            };
            for q in &comps {
                examined += 1;
                if q.height() != alpha || !leq(q, p)? {
                    return fail("height or extension", q);
                }
                for j0 in q.support().iter() {
                    for j1 in q.support().iter() {
                        for beta in alpha..ht {
                            let (a, b) = (p.h(j0, beta)?, p.h(j1, beta)?);
                            let theta = crate::condition::HistoryValue::Theta;
                            if a != theta && b != theta && a != b {
                                return fail("histories above the level disagree", q);
                            }
                        }
                    }
                }
                if iso_map(&comps[0], q)?.is_none() {
                    return fail("not isomorphic to the first component", q);
                }
                let image = q.relabel(&shift.restrict(q.support())?)?;
                if !copy_comps.contains(&image) {
                    return fail("image is not a component of the shifted copy", q);
                }
            }
            for i in p.support().iter() {
                let owners = comps
                    .iter()
                    .filter(|q| q.support().contains(i) && dominated(p, q, i, alpha))
                    .count();
                if owners != 1 {
                    return Ok(Err(json!({ "alpha": alpha, "i": i.0, "owners": owners })));
                }
            }
            let pure: Vec<&Condition> = comps.iter().filter(|q| leq_pr(q, p).unwrap()).collect();
            if pure.len() != 1 || *pure[0] != pr_component(p, alpha)? {
                return Ok(Err(
                    json!({ "alpha": alpha, "issue": "pure component", "count": pure.len() }),
                ));
            }
        }
        Ok(Ok(json!({ "components": examined })))
    })
}

/// Every `j ∈ u^q` is at least `θ` wherever `i` is, on levels `[α, ht)`.
fn dominated(p: &Condition, q: &Condition, i: GenIndex, alpha: usize) -> bool {
    q.support().iter().all(|j| {
        (alpha..p.height()).all(|b| p.h(i, b).unwrap().is_index() || !p.h(j, b).unwrap().is_index())
    })
}

/// Closedness read directly off the recursive definition.
fn closed_oracle(p: &Condition, z: &BTreeSet<usize>) -> bool {
    let Some(a) = p.as_amalgam() else {
        return true;
    };
    let alpha = p.height() - 1;
    let s = &a.spine().child;
    let below: BTreeSet<usize> = z.range(..alpha).copied().collect();
    if !closed_oracle(s, &below) {
        return false;
    }
    if !z.contains(&alpha) {
        return true;
    }
    let i0 = a.block(a.zeta_star()).first().unwrap();
    let witnesses: Vec<GenIndex> = a.spine().v.iter().chain([i0]).collect();
    (0..alpha).all(|b| z.contains(&b) || witnesses.iter().all(|&j| !s.h(j, b).unwrap().is_index()))
}

/// Closedness against the recursive oracle, least closed supersets, the
/// closed family of a shifted copy, and restriction to components.
pub fn check_closed_sets(p: &Condition) -> CheckReport {
    run("closed_sets", p, None, || {
        let ht = p.height();
        let all: Vec<BTreeSet<usize>> = subsets(ht).map(|z| z.into_iter().collect()).collect();
        let oracle: Vec<&BTreeSet<usize>> = all.iter().filter(|z| closed_oracle(p, z)).collect();
        for z in &all {
            let zv: Vec<usize> = z.iter().copied().collect();
            if is_p_closed(p, &zv)? != closed_oracle(p, z) {
                return Ok(Err(json!({ "issue": "closedness", "levels": zv })));
            }
            let least = oracle
                .iter()
                .filter(|c| z.is_subset(c))
                .min_by_key(|c| c.len())
                .expect("all levels form a closed set");
            let got = close(p, &zv)?;
            if got.levels() != least.iter().copied().collect::<Vec<_>>().as_slice()
                || oracle.iter().any(|c| z.is_subset(c) && !least.is_subset(c))
            {
                return Ok(Err(
                    json!({ "issue": "least closed superset", "levels": zv, "close": got.levels() }),
                ));
            }
        }
        let lib = closed_sets(p);
        let (copy, _) = shifted(p)?;
        if lib.len() != oracle.len()
            || lib
                .iter()
                .zip(&oracle)
                .any(|(c, o)| c.levels().iter().copied().collect::<BTreeSet<_>>() != **o)
            || closed_sets(&copy)
                .iter()
                .map(ClosedSet::levels)
                .ne(lib.iter().map(ClosedSet::levels))
        {
            return Ok(Err(json!({ "issue": "closed family" })));
        }
        for z in &oracle {
            for alpha in 0..=ht {
                let below: BTreeSet<usize> = z.range(..alpha).copied().collect();
                for q in components(p, alpha)? {
                    if !closed_oracle(&q, &below) {
                        return Ok(Err(json!({
                            "issue": "restriction to a component",
                            "levels": z.iter().collect::<Vec<_>>(),
                            "alpha": alpha,
                            "component": cond_json(&q),
                        })));
                    }
                }
            }
        }
        Ok(Ok(json!({ "subsets": all.len(), "closed": oracle.len() })))
    })
}

fn u_oracle(p: &Condition, z: &ClosedSet) -> Result<IndexSet> {
    let mut out = Vec::new();
    for j in p.support().iter() {
        if p.fingerprint(j)?.iter().all(|&b| z.contains(b)) {
            out.push(j);
        }
    }
    IndexSet::from_sorted(out)
}

/// Pairs `(Z0, Z1)` of closed sets of equal size and equal signature,
/// including the diagonal.
pub fn admissible_pairs(p: &Condition) -> Result<Vec<(ClosedSet, ClosedSet)>> {
    let closed = closed_sets(p);
    let sigs = closed
        .iter()
        .map(|z| upsilon(p, z))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (a, z0) in closed.iter().enumerate() {
        for (b, z1) in closed.iter().enumerate() {
            if z0.len() == z1.len() && sigs[a] == sigs[b] {
                out.push((z0.clone(), z1.clone()));
            }
        }
    }
    Ok(out)
}

fn pair_levels(z0: &ClosedSet, z1: &ClosedSet) -> Value {
    json!({ "z0": z0.levels(), "z1": z1.levels() })
}

/// For every pair of closed sets of equal size: equal signatures give an
/// order isomorphism of the `U`-sets with matching histories, fixing the
/// overlap whenever the level map does; unequal signatures are refused.
pub fn check_upsilon(p: &Condition) -> CheckReport {
    run("upsilon_isomorphism", p, None, || {
        let closed = closed_sets(p);
        let (copy, _) = shifted(p)?;
        for z in &closed {
            let zc = ClosedSet::new(&copy, z.levels())?;
            if upsilon(p, z)? != upsilon(&copy, &zc)? {
                return Ok(Err(
                    json!({ "issue": "signature changes under shift", "levels": z.levels() }),
                ));
            }
            if u_set(p, z)? != u_oracle(p, z)? {
                return Ok(Err(json!({ "issue": "U-set", "levels": z.levels() })));
            }
        }
        let (mut equal, mut fixing) = (0usize, 0usize);
        for z0 in &closed {
            for z1 in &closed {
                if z0.len() != z1.len() {
                    continue;
                }
                if upsilon(p, z0)? != upsilon(p, z1)? {
                    if !matches!(u_iso(p, z0, z1), Err(Error::InvalidInput(_))) {
                        let mut cex = pair_levels(z0, z1);
                        cex["issue"] = json!("unequal signatures accepted");
                        return Ok(Err(cex));
                    }
                    continue;
                }
                equal += 1;
                let pi = u_iso(p, z0, z1)?;
                let (u0, u1) = (u_oracle(p, z0)?, u_oracle(p, z1)?);
                let fail = |issue: &str| {
                    let mut cex = pair_levels(z0, z1);
                    cex["issue"] = json!(issue);
                    Ok(Err(cex))
                };
                if pi.domain() != &u0 || pi.codomain() != &u1 {
                    return fail("domain or codomain");
                }
                for (k, i) in u0.iter().enumerate() {
                    let j = u1.get(k).expect("equal sizes");
                    if pi.apply(i) != Some(j) {
                        return fail("not order preserving");
                    }
                    for (&a0, &a1) in z0.levels().iter().zip(z1.levels()) {
                        if p.h(i, a0)? != p.h(j, a1)? {
                            let mut cex = pair_levels(z0, z1);
                            cex["i"] = json!(i.0);
                            cex["levels"] = json!([a0, a1]);
                            return Ok(Err(cex));
                        }
                    }
                }
                if level_map_fixes_overlap(z0, z1) {
                    fixing += 1;
                    if let Some(i) = u0
                        .intersection(&u1)
                        .iter()
                        .find(|&i| pi.apply(i) != Some(i))
                    {
                        let mut cex = pair_levels(z0, z1);
                        cex["issue"] = json!("overlap moved");
                        cex["i"] = json!(i.0);
                        return Ok(Err(cex));
                    }
                }
            }
        }
        Ok(Ok(
            json!({ "closed": closed.len(), "equal_pairs": equal, "fixing_pairs": fixing }),
        ))
    })
}

/// Recomputes `G(f)` from `π` on assignments.
fn flip_oracle(p: &Condition, pi: &OrderMap, row: u64) -> u64 {
    let u = p.support();
    let value = |j: GenIndex| row >> u.position(j).unwrap() & 1;
    u.iter().enumerate().fold(0u64, |acc, (k, j)| {
        let bit = match (pi.apply(j), pi.apply_inverse(j)) {
            (Some(src), _) => value(src),
            (None, Some(src)) => value(src),
            (None, None) => 0,
        };
        acc | bit << k
    })
}

fn row_json(p: &Condition, row: u64) -> Value {
    Value::Array(
        p.support()
            .iter()
            .enumerate()
            .map(|(k, j)| json!([j.0, row >> k & 1]))
            .collect(),
    )
}

/// Checks `G(f) ∈ F^p` for the given rows; on failure returns the witness.
fn flip_rows(
    p: &Condition,
    pi: &OrderMap,
    rows: impl Iterator<Item = usize>,
) -> Result<std::result::Result<usize, Value>> {
    let map = FlipMap::from_order_map(p, pi)?;
    let masks = p.table().masks();
    let mut n = 0usize;
    for k in rows {
        n += 1;
        let f = masks[k];
        let g = map.apply_mask(f);
        if g != flip_oracle(p, pi, f) {
            return Ok(Err(
                json!({ "issue": "flip map disagrees with oracle", "f": row_json(p, f) }),
            ));
        }
        if !p.table().contains_mask(g) {
            return Ok(Err(json!({ "f": row_json(p, f), "g": row_json(p, g) })));
        }
    }
    Ok(Ok(n))
}

/// `G(f) ∈ F^p` for admissible pairs: every pair and row when the height
/// is at most 2 and `pairs × rows` fits the budget, otherwise seeded
/// samples of `(pair, row)`.
pub fn check_flip_closure(p: &Condition, config: &SuiteConfig) -> CheckReport {
    let pairs = admissible_pairs(p);
    let rows = p.table().len();
    let exhaustive = pairs
        .as_ref()
        .map(|v| p.height() <= 2 && v.len().saturating_mul(rows) <= config.flip_budget)
        .unwrap_or(true);
    let seed = (!exhaustive).then_some(config.seed);
    run("flip_closure", p, seed, || {
        let pairs = pairs?;
        let maps = pairs
            .iter()
            .map(|(z0, z1)| u_iso(p, z0, z1))
            .collect::<Result<Vec<_>>>()?;
        let mut checked = 0usize;
        if exhaustive {
            for ((z0, z1), pi) in pairs.iter().zip(&maps) {
                match flip_rows(p, pi, 0..rows)? {
                    Ok(n) => checked += n,
                    Err(mut cex) => {
                        cex["z0"] = json!(z0.levels());
                        cex["z1"] = json!(z1.levels());
                        return Ok(Err(cex));
                    }
                }
            }
        } else {
            let mut rng = SplitMix64::from_seed(config.seed.to_le_bytes());
            for _ in 0..config.flip_samples {
                let k = (rng.next_u64() % pairs.len() as u64) as usize;
                let r = (rng.next_u64() % rows as u64) as usize;
                if let Err(mut cex) = flip_rows(p, &maps[k], std::iter::once(r))? {
                    cex["z0"] = json!(pairs[k].0.levels());
                    cex["z1"] = json!(pairs[k].1.levels());
                    return Ok(Err(cex));
                }
                checked += 1;
            }
        }
        Ok(Ok(json!({
            "pairs": pairs.len(),
            "rows": rows,
            "checked": checked,
            "mode": if exhaustive { "exhaustive" } else { "sampled" },
        })))
    })
}

/// Flip closure for one explicit pair of level sets: all rows when
/// `all_rows` is set, otherwise `config.flip_samples` seeded rows.
pub fn check_flip_pair(
    p: &Condition,
    z0: &[usize],
    z1: &[usize],
    all_rows: bool,
    config: &SuiteConfig,
) -> CheckReport {
    let sampled = !all_rows && p.table().len() > config.flip_samples;
    run("flip_closure", p, sampled.then_some(config.seed), || {
        let (z0, z1) = (ClosedSet::new(p, z0)?, ClosedSet::new(p, z1)?);
        let pi = u_iso(p, &z0, &z1)?;
        let rows = p.table().len();
        let picks: Vec<usize> = if sampled {
            let mut rng = SplitMix64::from_seed(config.seed.to_le_bytes());
            (0..config.flip_samples)
                .map(|_| (rng.next_u64() % rows as u64) as usize)
                .collect()
        } else {
            (0..rows).collect()
        };
        Ok(match flip_rows(p, &pi, picks.into_iter())? {
            Ok(n) => Ok(json!({ "checked": n, "map": pi.to_string() })),
            Err(mut cex) => {
                cex["z0"] = json!(z0.levels());
                cex["z1"] = json!(z1.levels());
                Err(cex)
            }
        })
    })
}

/// Flip closure over every row for an arbitrary order map `π` between two
/// subsets of the support. Used by negative controls.
#[doc(hidden)]
pub fn check_flip_with_map(p: &Condition, pi: &OrderMap) -> CheckReport {
    run("flip_closure", p, None, || {
        Ok(match flip_rows(p, pi, 0..p.table().len())? {
            Ok(n) => Ok(json!({ "checked": n })),
            Err(cex) => Err(cex),
        })
    })
}
