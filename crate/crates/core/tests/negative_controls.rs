//! Deliberately broken or borderline inputs that the checks must reject.

mod common;

use hforce::checks::{
    check_chain_collapse, check_extension_properties, check_flip_with_map, corrupt_history,
};
use hforce::workbench::{generate, heart_limit, GeneratorSpec};
use hforce::{
    run_suite, BoolTerm, CollapseItem, Condition, Error, GenIndex, IndexSet, OrderMap, Part,
    SuiteConfig, ValuationTable, Width,
};

fn w2() -> Width {
    Width::new(2).unwrap()
}

fn pair(a: u32, b: u32) -> Condition {
    Condition::amalgamate(
        0,
        BoolTerm::one(),
        IndexSet::new(),
        vec![
            Part::new(Condition::atomic(w2(), GenIndex(a)), IndexSet::new()),
            Part::new(Condition::atomic(w2(), GenIndex(b)), IndexSet::new()),
        ],
    )
    .unwrap()
}

/// Two copies of a two-element amalgam sharing its spine element as the
/// heart. The spine element is the only generator whose lower history is
/// `θ+1`, so once it is shared no generator has fingerprint `{1}`.
#[test]
fn shared_spine_element_leaves_a_fingerprint_unrealized() {
    let p = Condition::amalgamate(
        0,
        BoolTerm::one(),
        IndexSet::from([0]),
        vec![
            Part::new(pair(0, 2), IndexSet::new()),
            Part::new(pair(0, 4), IndexSet::new()),
        ],
    )
    .expect("the clauses hold");
    let fingerprints: Vec<Vec<usize>> = p
        .support()
        .iter()
        .map(|j| p.fingerprint(j).unwrap())
        .collect();
    assert_eq!(fingerprints, vec![vec![], vec![0], vec![0, 1]]);

    let reports = check_extension_properties(&p);
    let r = reports
        .iter()
        .find(|r| r.name == "fingerprints_realized")
        .unwrap();
    assert!(!r.passed());
    assert_eq!(
        r.counterexample.as_ref().unwrap()["levels"],
        serde_json::json!([1])
    );
    for other in reports.iter().filter(|r| r.name != "fingerprints_realized") {
        assert!(other.passed(), "{}: {:?}", other.name, other.counterexample);
    }

    // The generator never shares that element.
    assert_eq!(heart_limit(&pair(0, 2)), 0);
}

#[test]
fn copied_history_fails_separation() {
    let p = generate(&GeneratorSpec::new(11, Width::new(3).unwrap(), 2)).unwrap();
    let bad = corrupt_history(&p).unwrap();
    let failing: Vec<String> = run_suite(&bad, &SuiteConfig::default())
        .into_iter()
        .filter(|r| !r.passed())
        .map(|r| {
            assert!(r.counterexample.is_some());
            r.name
        })
        .collect();
    assert!(
        failing.iter().any(|n| n == "histories_separate"),
        "{failing:?}"
    );
}

#[test]
fn corrupted_table_fails_rebuild() {
    let p = generate(&GeneratorSpec::new(5, w2(), 2)).unwrap();
    let rows: Vec<u64> = p.table().masks().iter().skip(1).copied().collect();
    let bad = p
        .with_table_override(ValuationTable::new(p.support().clone(), rows).unwrap())
        .unwrap();
    let reports = run_suite(&bad, &SuiteConfig::default());
    let failed = |name: &str| reports.iter().any(|r| r.name == name && !r.passed());
    assert!(failed("rebuild_determinism"));
}

#[test]
fn non_matching_flip_map_is_rejected() {
    let t = Width::new(6).unwrap();
    let parts = (0..6)
        .map(|i| Part::new(Condition::atomic(t, GenIndex(i)), IndexSet::from([i])))
        .collect();
    let p = Condition::amalgamate(0, BoolTerm::var(0), IndexSet::new(), parts).unwrap();
    let pi = OrderMap::new(IndexSet::from([0, 1]), IndexSet::from([3, 4])).unwrap();
    let r = check_flip_with_map(&p, &pi);
    assert!(!r.passed());
    // Replaying gives the same witness.
    assert_eq!(
        check_flip_with_map(&p, &pi).counterexample,
        r.counterexample
    );
}

#[test]
fn collapse_precondition_items() {
    // Find a height-3 condition with two closed sets of equal signature
    // whose level map moves a shared level.
    for seed in 0..400 {
        let mut spec = GeneratorSpec::new(seed, w2(), 3);
        spec.pool = hforce::workbench::TermPool::ConstOne;
        let p = generate(&spec).unwrap();
        for z0 in common::closed_subsets(&p) {
            for z1 in common::closed_subsets(&p) {
                if z0.len() != z1.len() || z0 == z1 || common::fixes_overlap(&z0, &z1) {
                    continue;
                }
                let c0 = hforce::signatures::ClosedSet::new(&p, &z0).unwrap();
                let c1 = hforce::signatures::ClosedSet::new(&p, &z1).unwrap();
                let s0 = hforce::signatures::upsilon(&p, &c0).unwrap();
                if s0 != hforce::signatures::upsilon(&p, &c1).unwrap() {
                    continue;
                }
                let (u0, u1) = (common::u_of(&p, &z0), common::u_of(&p, &z1));
                if u0.is_empty() {
                    continue;
                }
                let (w0, w1) = (IndexSet::from([u0[0].0]), IndexSet::from([u1[0].0]));
                let err = check_chain_collapse(&p, &BoolTerm::var(0), &w0, &w1, &z0, &z1);
                assert!(
                    matches!(
                        err,
                        Err(Error::Precondition {
                            item: CollapseItem::II,
                            ..
                        })
                    ),
                    "{err:?}"
                );
                return;
            }
        }
    }
    panic!("no pair with a moved shared level among the seeds tried");
}
