//! The extension preorder `≤`, pure extension `≤_pr`, isomorphisms between
//! conditions, transport along them, and the p-transformation `T_p(q)`.

use crate::condition::{Condition, Part};
use crate::error::{invalid, Error, Result};
use crate::index::OrderMap;

fn same_width(p: &Condition, q: &Condition) -> Result<()> {
    if p.width() != q.width() {
        return Err(invalid(format!(
            "conditions have widths {} and {}",
            p.width(),
            q.width()
        )));
    }
    Ok(())
}

/// `p ≤ q`: `q` extends `p`.
pub fn leq(p: &Condition, q: &Condition) -> Result<bool> {
    same_width(p, q)?;
    Ok(leq_unchecked(p, q))
}

pub(crate) fn leq_unchecked(p: &Condition, q: &Condition) -> bool {
    if p.height() > q.height() || !p.support().is_subset(q.support()) {
        return false;
    }
    if p == q {
        return true;
    }
    let Some(qa) = q.as_amalgam() else {
        return false;
    };
    if p.height() < q.height() {
        return qa.parts().iter().any(|part| leq_unchecked(p, &part.child));
    }
    // Parallel amalgams of equal height; ζ* may differ.
    let Some(pa) = p.as_amalgam() else {
        return false;
    };
    pa.tau_star() == qa.tau_star()
        && pa.heart() == qa.heart()
        && pa.parts().iter().zip(qa.parts()).all(|(pp, qp)| {
            pp.v == qp.v
                && pp.child.support() == qp.child.support()
                && leq_unchecked(&pp.child, &qp.child)
        })
}

/// `p ≤_pr q`: `p` lies on the ζ*-spine of `q`.
pub fn leq_pr(p: &Condition, q: &Condition) -> Result<bool> {
    same_width(p, q)?;
    Ok(leq_pr_unchecked(p, q))
}

pub(crate) fn leq_pr_unchecked(p: &Condition, q: &Condition) -> bool {
    if p == q {
        return true;
    }
    match q.as_amalgam() {
        Some(qa) if p.height() < q.height() => leq_pr_unchecked(p, &qa.spine().child),
        _ => false,
    }
}

/// The isomorphism from `p` to `q`, if the two are isomorphic: equal height
/// and order type, with `h` and `g` preserved by the order isomorphism.
///
/// When the histories match, the tables are also required to correspond
/// under the map; a mismatch there is reported as a consistency error.
pub fn iso_map(p: &Condition, q: &Condition) -> Result<Option<OrderMap>> {
    same_width(p, q)?;
    if p.height() != q.height()
        || p.support().len() != q.support().len()
        || p.history_table() != q.history_table()
        || p.tag_table() != q.tag_table()
    {
        return Ok(None);
    }
    if p.table().masks() != q.table().masks() {
        return Err(Error::Consistency(format!(
            "isomorphic histories but tables differ: {} vs {}",
            p.support(),
            q.support()
        )));
    }
    Ok(Some(OrderMap::new(
        p.support().clone(),
        q.support().clone(),
    )?))
}

/// `H(p0)`: the unique `p1 ≤ q1` such that `H↾u^{p0}` is the isomorphism
/// from `p0` to `p1`, where `H` is the isomorphism from `q0` to `q1`.
pub fn transport(
    h: &OrderMap,
    p0: &Condition,
    q0: &Condition,
    q1: &Condition,
) -> Result<Condition> {
    same_width(p0, q0)?;
    same_width(q0, q1)?;
    if !leq_unchecked(p0, q0) {
        return Err(invalid("transport requires p0 ≤ q0"));
    }
    match iso_map(q0, q1)? {
        Some(iso) if &iso == h => {}
        _ => return Err(invalid(format!("{h} is not the isomorphism from q0 to q1"))),
    }
    let p1 = p0.relabel(&h.restrict(p0.support())?)?;
    if !leq_unchecked(&p1, q1) {
        return Err(Error::Consistency(format!(
            "transported condition is not below q1 (map {h})"
        )));
    }
    Ok(p1)
}

/// `T_p(q)`, defined for `p ≤ q`. When several parts of `q` lie above `p`,
/// the ζ*-part is preferred and otherwise the least one is used.
pub fn transform(p: &Condition, q: &Condition) -> Result<Condition> {
    same_width(p, q)?;
    if !leq_unchecked(p, q) {
        return Err(invalid("transform requires p ≤ q"));
    }
    transform_unchecked(p, q)
}

fn transform_unchecked(p: &Condition, q: &Condition) -> Result<Condition> {
    let Some(qa) = q.as_amalgam() else {
        return Ok(p.clone());
    };
    if p.height() < q.height() {
        let zeta = qa.zeta_star();
        let xi_star = if leq_unchecked(p, &qa.part(zeta).child) {
            zeta
        } else {
            qa.parts()
                .iter()
                .position(|part| leq_unchecked(p, &part.child))
                .ok_or_else(|| Error::Consistency("no part of q lies above p".into()))?
        };
        let base = &qa.part(xi_star).child;
        let mut parts = Vec::with_capacity(qa.parts().len());
        for part in qa.parts() {
            let h = iso_map(base, &part.child)?.ok_or_else(|| {
                Error::Consistency("parts of an amalgam are not isomorphic".into())
            })?;
            let moved = transport(&h, p, base, &part.child)?;
            parts.push(Part::new(
                transform_unchecked(&moved, &part.child)?,
                part.v.clone(),
            ));
        }
        return rebuild(xi_star, qa.tau_star(), qa.heart(), parts);
    }
    let pa = p
        .as_amalgam()
        .ok_or_else(|| Error::Consistency("equal-height p below an amalgam is atomic".into()))?;
    let parts = pa
        .parts()
        .iter()
        .zip(qa.parts())
        .map(|(pp, qp)| {
            Ok(Part::new(
                transform_unchecked(&pp.child, &qp.child)?,
                qp.v.clone(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rebuild(pa.zeta_star(), qa.tau_star(), qa.heart(), parts)
}

fn rebuild(
    zeta: usize,
    tau: &crate::term::BoolTerm,
    heart: &crate::index::IndexSet,
    parts: Vec<Part>,
) -> Result<Condition> {
    Condition::amalgamate(zeta, tau.clone(), heart.clone(), parts).map_err(|e| match e {
        Error::Clause { clause, detail } => {
            Error::Consistency(format!("transformed parts fail clause {clause}: {detail}"))
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Width;
    use crate::index::{GenIndex, IndexSet};
    use crate::term::BoolTerm;

    fn w2() -> Width {
        Width::new(2).unwrap()
    }

    fn pair(a: u32, b: u32, zeta: usize) -> Condition {
        Condition::amalgamate(
            zeta,
            BoolTerm::one(),
            IndexSet::new(),
            vec![
                Part::new(Condition::atomic(w2(), GenIndex(a)), IndexSet::new()),
                Part::new(Condition::atomic(w2(), GenIndex(b)), IndexSet::new()),
            ],
        )
        .unwrap()
    }

    fn tower() -> Condition {
        Condition::amalgamate(
            0,
            BoolTerm::one(),
            IndexSet::new(),
            vec![
                Part::new(pair(0, 1, 0), IndexSet::new()),
                Part::new(pair(3, 4, 0), IndexSet::new()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parts_below_amalgam() {
        let q = pair(0, 1, 1);
        for part in q.parts() {
            assert!(leq(&part.child, &q).unwrap());
        }
        assert!(!leq_pr(&q.parts()[0].child, &q).unwrap());
        assert!(leq_pr(&q.parts()[1].child, &q).unwrap());
        assert!(leq(&q, &q).unwrap());
        assert!(!leq(&q, &q.parts()[0].child).unwrap());
    }

    #[test]
    fn parallel_case_ignores_zeta() {
        let a = pair(0, 1, 0);
        let b = pair(0, 1, 1);
        assert!(leq(&a, &b).unwrap());
        assert!(leq(&b, &a).unwrap());
        assert!(!leq_pr(&a, &b).unwrap());
    }

    #[test]
    fn iso_between_atomics_and_amalgams() {
        let a = Condition::atomic(w2(), GenIndex(3));
        let b = Condition::atomic(w2(), GenIndex(8));
        let h = iso_map(&a, &b).unwrap().unwrap();
        assert_eq!(h.apply(GenIndex(3)), Some(GenIndex(8)));
        assert!(iso_map(&tower(), &tower()).unwrap().unwrap().is_identity());
        assert!(iso_map(&pair(0, 1, 0), &pair(5, 6, 1)).unwrap().is_none());
    }

    #[test]
    fn transport_part() {
        let q0 = pair(0, 1, 0);
        let q1 = pair(5, 6, 0);
        let h = iso_map(&q0, &q1).unwrap().unwrap();
        let p1 = transport(&h, &q0.parts()[1].child, &q0, &q1).unwrap();
        assert_eq!(p1, q1.parts()[1].child);
        assert_eq!(transport(&h, &q0, &q0, &q1).unwrap(), q1);
    }

    #[test]
    fn transform_moves_spine() {
        let q = tower();
        let p = q.parts()[1].child.parts()[1].child.clone();
        let t = transform(&p, &q).unwrap();
        assert_eq!(t.support(), q.support());
        assert!(leq_pr(&p, &t).unwrap());
        assert!(leq(&t, &q).unwrap() && leq(&q, &t).unwrap());
        assert_eq!(t.as_amalgam().unwrap().zeta_star(), 1);
        assert_eq!(transform(&q, &q).unwrap(), q);
        let not_below = Condition::atomic(w2(), GenIndex(9));
        assert!(transform(&not_below, &q).is_err());
    }
}
