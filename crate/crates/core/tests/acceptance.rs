//! Acceptance run over the standard corpus. Prints one line per criterion
//! and exits non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use common::{corpus, Entry};
use hforce::checks::{
    build_maj_chain, check_chain_collapse, check_extension_properties,
    check_generator_independence, majority_gate,
};
use hforce::signatures::{u_iso, upsilon, ClosedSet};
use hforce::workbench::{encode, generate, GeneratorSpec, TermPool, CORPUS_SIZE};
use hforce::{
    leq, leq_pr, run_suite, transform, BoolTerm, Condition, GenIndex, IndexSet, SuiteConfig,
    TermInstance, ValuationTable, Verdict,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn constructor_soundness(entries: &[Entry], gen_time: Duration) -> Outcome {
    ensure(entries.len() as u64 == CORPUS_SIZE, || "corpus size".into())?;
    let start = Instant::now();
    let rows: usize = entries
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let back = hforce::workbench::decode(&encode(p))
                .map_err(|err| format!("seed {}: {err}", e.seed))?;
            ensure(back.same_derived(p), || {
                format!("seed {}: rebuild differs", e.seed)
            })?;
            ensure(!p.table().is_empty(), || {
                format!("seed {}: empty table", e.seed)
            })?;
            let n = p.support().len();
            let brute: Vec<u64> = (0..1u64 << n).filter(|&m| common::member(p, m)).collect();
            ensure(brute == p.table().masks(), || {
                format!(
                    "seed {}: table differs from the recursive definition",
                    e.seed
                )
            })?;
            Ok(p.table().len())
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    let total = gen_time + start.elapsed();
    ensure(total < Duration::from_secs(120), || {
        format!("took {}", secs(total))
    })?;
    Ok(format!(
        "{} conditions, {rows} rows checked against the definition, {}",
        entries.len(),
        secs(total)
    ))
}

fn extension_battery(entries: &[Entry]) -> Outcome {
    let names = [
        "extension_restriction",
        "index_levels_finite",
        "histories_separate",
        "fingerprints_realized",
        "pure_interpolation",
    ];
    let count: usize = entries
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let reports = check_extension_properties(p);
            for name in names {
                let r = reports
                    .iter()
                    .find(|r| r.name == name)
                    .expect("check present");
                ensure(r.passed(), || {
                    format!("seed {} {name}: {:?}", e.seed, r.counterexample)
                })?;
            }
            // Independent recomputation of separation and realization.
            let u: Vec<GenIndex> = p.support().iter().collect();
            for (k, &i) in u.iter().enumerate() {
                for &j in &u[k + 1..] {
                    let (hi, hj) = (p.history_of(i).unwrap(), p.history_of(j).unwrap());
                    let theta = hforce::HistoryValue::Theta;
                    ensure(
                        hi.iter()
                            .zip(hj)
                            .any(|(a, b)| a != b && *a != theta && *b != theta),
                        || format!("seed {}: {i} and {j} not separated", e.seed),
                    )?;
                }
            }
            for x in common::level_subsets(p.height()) {
                ensure(
                    u.iter().any(|&j| {
                        let h = p.history_of(j).unwrap();
                        (0..p.height()).all(|b| h[b].is_index() == x.contains(&b))
                    }),
                    || format!("seed {}: level set {x:?} unrealized", e.seed),
                )?;
            }
            Ok(names.len())
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    Ok(format!("{count} check runs, zero failures"))
}

fn generator_independence(entries: &[Entry]) -> Outcome {
    let gens: usize = entries
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let r = check_generator_independence(p);
            ensure(r.passed(), || {
                format!("seed {}: {:?}", e.seed, r.counterexample)
            })?;
            let masks = p.table().masks();
            for pos in 0..p.support().len() {
                let prefix = (1u64 << pos) - 1;
                let mut keyed: Vec<(u64, u64)> =
                    masks.iter().map(|&m| (m & prefix, m >> pos & 1)).collect();
                keyed.sort_unstable();
                keyed.dedup();
                let split = keyed.windows(2).any(|w| w[0].0 == w[1].0);
                ensure(split, || {
                    format!("seed {}: generator at position {pos} is determined", e.seed)
                })?;
            }
            Ok(p.support().len())
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    Ok(format!(
        "{gens} generators independent of their predecessors"
    ))
}

fn amalgams(entries: &[Entry]) -> Vec<Condition> {
    let mut out: Vec<Condition> = Vec::new();
    for e in entries {
        for q in e.cond.subconditions() {
            if !q.is_atomic() && !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out
}

fn majority_chain(entries: &[Entry]) -> Outcome {
    let all = amalgams(entries);
    let mut gated = 0usize;
    let mut wide = 0usize;
    for q in &all {
        let t = q.width().get();
        let nonconstant = q.as_amalgam().unwrap().tau_star().arity() > 0;
        if !nonconstant || !majority_gate(q).map_err(|e| e.to_string())? {
            continue;
        }
        gated += 1;
        let chain = build_maj_chain(q).map_err(|e| e.to_string())?;
        ensure(chain.len() == t / 3, || {
            format!("chain of length {} for width {t}", chain.len())
        })?;
        let exts: Vec<Vec<bool>> = (0..t / 3)
            .map(|k| {
                q.table()
                    .masks()
                    .iter()
                    .map(|&m| common::maj_values(q, m)[k])
                    .collect()
            })
            .collect();
        for w in exts.windows(2) {
            let sub = w[0].iter().zip(&w[1]).all(|(a, b)| !a || *b);
            let proper = w[0] != w[1];
            ensure(sub && proper, || {
                format!("step not strict in {}", encode(q))
            })?;
        }
        for (inst, ext) in chain.iter().zip(&exts) {
            for (row, &want) in q.table().rows().zip(ext) {
                let got = hforce::algebra::instance_value(&row, inst).unwrap();
                ensure(got == want, || {
                    "chain element disagrees with direct evaluation".into()
                })?;
            }
        }
        if t == 6 {
            wide += 1;
            let longest = q.table().longest_chain(&chain).unwrap().length;
            ensure(longest == 2 && chain.len() == 2, || {
                format!("t=6 longest chain {longest}")
            })?;
        }
    }
    ensure(gated > 0 && wide > 0, || {
        format!("only {gated} gated amalgams, {wide} of width 6")
    })?;
    Ok(format!(
        "{gated} gated amalgams of {} ({wide} of width 6), all strictly increasing",
        all.len()
    ))
}

/// Pairs of closed level sets of equal size and equal signature.
fn equal_signature_pairs(p: &Condition) -> Vec<(Vec<usize>, Vec<usize>)> {
    let closed = common::closed_subsets(p);
    let sig = |z: &Vec<usize>| upsilon(p, &ClosedSet::new(p, z).unwrap()).unwrap();
    let sigs: Vec<_> = closed.iter().map(sig).collect();
    let mut out = Vec::new();
    for (a, z0) in closed.iter().enumerate() {
        for (b, z1) in closed.iter().enumerate() {
            if z0.len() == z1.len() && sigs[a] == sigs[b] {
                out.push((z0.clone(), z1.clone()));
            }
        }
    }
    out
}

fn upsilon_isomorphism(entries: &[Entry]) -> Outcome {
    let counts: Vec<(usize, usize)> = entries
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let pairs = equal_signature_pairs(p);
            let mut distinct = 0;
            for (z0, z1) in &pairs {
                distinct += (z0 != z1) as usize;
                let (c0, c1) = (
                    ClosedSet::new(p, z0).unwrap(),
                    ClosedSet::new(p, z1).unwrap(),
                );
                let pi = u_iso(p, &c0, &c1)
                    .map_err(|err| format!("seed {} {z0:?}/{z1:?}: {err}", e.seed))?;
                let (u0, u1) = (common::u_of(p, z0), common::u_of(p, z1));
                ensure(u0.len() == u1.len(), || {
                    format!("seed {}: |U| differs", e.seed)
                })?;
                for (&i, &j) in u0.iter().zip(&u1) {
                    ensure(pi.apply(i) == Some(j), || {
                        format!("seed {}: π({i})", e.seed)
                    })?;
                    let (hi, hj) = (p.history_of(i).unwrap(), p.history_of(j).unwrap());
                    for (&a0, &a1) in z0.iter().zip(z1) {
                        ensure(hi[a0] == hj[a1], || {
                            format!("seed {}: histories of {i},{j} at {a0}/{a1}", e.seed)
                        })?;
                    }
                }
            }
            Ok((pairs.len(), distinct))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let total: usize = counts.iter().map(|c| c.0).sum();
    let distinct: usize = counts.iter().map(|c| c.1).sum();
    Ok(format!(
        "{total} equal-signature pairs ({distinct} with Z0 ≠ Z1), matching histories throughout"
    ))
}

fn flip_closure(entries: &[Entry]) -> Outcome {
    let start = Instant::now();
    let low: Vec<&Entry> = entries.iter().filter(|e| e.cond.height() <= 2).collect();
    let exhaustive: usize = low
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let mut n = 0usize;
            for (z0, z1) in equal_signature_pairs(p) {
                let (u0, u1) = (common::u_of(p, &z0), common::u_of(p, &z1));
                for &f in p.table().masks() {
                    let g = common::flip(p, &u0, &u1, f);
                    ensure(p.table().contains_mask(g) && common::member(p, g), || {
                        format!("seed {} {z0:?}/{z1:?}: f={f:#b} g={g:#b}", e.seed)
                    })?;
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    let exhaustive_time = start.elapsed();
    ensure(exhaustive_time < Duration::from_secs(600), || {
        format!("exhaustive tier took {}", secs(exhaustive_time))
    })?;

    let high: Vec<&Entry> = entries.iter().filter(|e| e.cond.height() == 3).collect();
    let sampled: usize = high
        .par_iter()
        .map(|e| {
            let p = &e.cond;
            let pairs = equal_signature_pairs(p);
            let mut rng = SplitMix64::from_seed(e.seed.to_le_bytes());
            let rows = p.table().masks();
            for _ in 0..10_000 {
                let (z0, z1) = &pairs[(rng.next_u64() % pairs.len() as u64) as usize];
                let f = rows[(rng.next_u64() % rows.len() as u64) as usize];
                let g = common::flip(p, &common::u_of(p, z0), &common::u_of(p, z1), f);
                ensure(p.table().contains_mask(g) && common::member(p, g), || {
                    format!("seed {} {z0:?}/{z1:?}: f={f:#b}", e.seed)
                })?;
            }
            Ok(10_000)
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    ensure(!high.is_empty() && sampled >= 10_000, || {
        "no height-3 samples".into()
    })?;
    Ok(format!(
        "{exhaustive} exhaustive (pair, row) checks on {} conditions in {}, {sampled} samples on {} height-3 conditions",
        low.len(),
        secs(exhaustive_time),
        high.len()
    ))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .flat_map(|first| {
            combinations(n, k - 1)
                .into_iter()
                .filter(move |rest| rest.iter().all(|&r| r > first))
                .map(move |rest| std::iter::once(first).chain(rest).collect())
        })
        .collect()
}

fn chain_collapse(entries: &[Entry]) -> Outcome {
    let terms = TermPool::Standard.terms();
    let counts: Vec<usize> = entries
        .par_iter()
        .filter(|e| e.cond.height() <= 2)
        .map(|e| {
            let p = &e.cond;
            let mut n = 0usize;
            for (z0, z1) in equal_signature_pairs(p) {
                if !common::fixes_overlap(&z0, &z1) {
                    continue;
                }
                let (u0, u1) = (common::u_of(p, &z0), common::u_of(p, &z1));
                for tau in &terms {
                    for pick in combinations(u0.len(), tau.arity()) {
                        let w0: IndexSet = pick.iter().map(|&k| u0[k]).collect();
                        let w1: IndexSet = pick.iter().map(|&k| u1[k]).collect();
                        let r = check_chain_collapse(p, tau, &w0, &w1, &z0, &z1)
                            .map_err(|err| format!("seed {}: {err}", e.seed))?;
                        let a = TermInstance::new(tau.clone(), w0.clone()).unwrap();
                        let b = TermInstance::new(tau.clone(), w1.clone()).unwrap();
                        let eval = |inst: &TermInstance| -> Vec<bool> {
                            p.table()
                                .rows()
                                .map(|f| hforce::algebra::instance_value(&f, inst).unwrap())
                                .collect()
                        };
                        let (ea, eb) = (eval(&a), eval(&b));
                        let strict = ea.iter().zip(&eb).all(|(x, y)| !x || *y) && ea != eb;
                        ensure(r.passed() && !strict, || {
                            format!("seed {}: {tau} on {w0} < {w1} for {z0:?}/{z1:?}", e.seed)
                        })?;
                        n += 1;
                    }
                }
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let total: usize = counts.iter().sum();
    ensure(total > 0, || "no instances".into())?;
    Ok(format!(
        "{total} instances on {} conditions, no strict inequality",
        counts.len()
    ))
}

fn transform_contract(entries: &[Entry]) -> Outcome {
    let counts: Vec<usize> = entries
        .par_iter()
        .map(|e| {
            let subs = e.cond.subconditions();
            let mut n = 0usize;
            for q in &subs {
                for p in q.subconditions() {
                    ensure(leq(&p, q).unwrap(), || {
                        "tree node not below its ancestor".into()
                    })?;
                    let t = transform(&p, q).map_err(|err| format!("seed {}: {err}", e.seed))?;
                    n += 1;
                    let ctx = || {
                        format!(
                            "seed {}: p={} q={}",
                            e.seed,
                            encode(&p).trim(),
                            encode(q).trim()
                        )
                    };
                    ensure(
                        t.support() == q.support() && t.height() == q.height(),
                        || format!("(1) {}", ctx()),
                    )?;
                    ensure(common::on_spine(&p, &t), || format!("(2) pure {}", ctx()))?;
                    ensure(leq_pr(&p, &t).unwrap(), || format!("(2) {}", ctx()))?;
                    ensure(leq(&t, q).unwrap() && leq(q, &t).unwrap(), || {
                        format!("(2) {}", ctx())
                    })?;
                    ensure(p.height() != q.height() || t == p, || {
                        format!("(3) {}", ctx())
                    })?;
                    for q2 in &subs {
                        if q2 != q && common::on_spine(q, q2) {
                            let t2 = transform(&p, q2).unwrap();
                            ensure(common::on_spine(&t, &t2), || format!("(5) {}", ctx()))?;
                        }
                    }
                }
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let total: usize = counts.iter().sum();
    ensure(total >= 500, || format!("only {total} pairs"))?;
    Ok(format!("{total} (p, q) pairs"))
}

fn random_term(rng: &mut SplitMix64, arity: usize, depth: u32) -> BoolTerm {
    let pick = rng.next_u64() % if depth == 0 { 2 } else { 5 };
    match pick {
        0 => BoolTerm::Const(rng.next_u64() & 1 == 1),
        1 => BoolTerm::var((rng.next_u64() % arity.max(1) as u64) as usize),
        2 => BoolTerm::not(random_term(rng, arity, depth - 1)),
        3 => BoolTerm::and(
            random_term(rng, arity, depth - 1),
            random_term(rng, arity, depth - 1),
        ),
        _ => BoolTerm::or(
            random_term(rng, arity, depth - 1),
            random_term(rng, arity, depth - 1),
        ),
    }
}

/// Keeps only variables below `arity` and renumbers the used ones densely.
fn compact(term: &BoolTerm) -> BoolTerm {
    let used = term.used_slots();
    let mut next = 0;
    let subst: Vec<BoolTerm> = used
        .iter()
        .map(|&u| {
            let v = BoolTerm::var(next);
            next += u as usize;
            v
        })
        .collect();
    term.substitute(&subst)
}

fn quotient_oracle(entries: usize) -> Outcome {
    let mut rng = SplitMix64::from_seed(0x5eed_u64.to_le_bytes());
    let mut nonzero = 0usize;
    for case in 0..entries {
        let size = 1 + (rng.next_u64() % 4) as usize;
        let mut idx: Vec<u32> = Vec::new();
        while idx.len() < size {
            let i = (rng.next_u64() % 12) as u32;
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        idx.sort_unstable();
        let domain: IndexSet = idx.iter().copied().collect();
        let all = 1u64 << size;
        let keep = loop {
            let k = rng.next_u64() & ((1u64 << all) - 1);
            if k != 0 {
                break k;
            }
        };
        let rows: Vec<u64> = (0..all).filter(|r| keep >> r & 1 == 1).collect();
        let table = ValuationTable::new(domain.clone(), rows).unwrap();
        let term = compact(&random_term(&mut rng, size, 3));
        let n = term.arity();
        let mut args: Vec<GenIndex> = domain.iter().collect();
        while args.len() > n {
            args.remove((rng.next_u64() % args.len() as u64) as usize);
        }
        let args: IndexSet = args.into_iter().collect();
        let inst = TermInstance::new(term.clone(), args.clone()).unwrap();
        // The free algebra on the domain is the power set of all 2^|w|
        // assignments; the quotient identifies elements agreeing on F.
        let arg_pos: Vec<usize> = args.iter().map(|i| domain.position(i).unwrap()).collect();
        let truth: u64 = (0..all).fold(0, |acc, a| {
            let bits: Vec<bool> = arg_pos.iter().map(|&p| a >> p & 1 == 1).collect();
            acc | (term.eval(&bits).unwrap() as u64) << a
        });
        let expected = truth & keep != 0;
        let got = table.elem_nonzero(&inst).unwrap();
        ensure(got == expected, || {
            format!("case {case}: {term} on {args} over {keep:#b}")
        })?;
        nonzero += expected as usize;
    }
    Ok(format!("{entries} instances agree ({nonzero} nonzero)"))
}

fn verdict_line(p: &Condition, config: &SuiteConfig) -> String {
    run_suite(p, config)
        .iter()
        .map(|r| {
            let v = if r.verdict == Verdict::Pass {
                "pass"
            } else {
                "fail"
            };
            format!("{}={v}:{}", r.name, r.stats)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn determinism(entries: &[Entry]) -> Outcome {
    let config = SuiteConfig::default();
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut compared = 0usize;
    let mut fails = 0usize;
    for e in entries {
        let again = generate(&GeneratorSpec::corpus(e.seed)).map_err(|err| err.to_string())?;
        let (a, b) = (encode(&e.cond), encode(&again));
        ensure(a == b, || format!("seed {}: bytes differ", e.seed))?;
        let file = shipped.join(format!("seed-{:03}.json", e.seed));
        if let Ok(text) = std::fs::read_to_string(&file) {
            ensure(text == a, || {
                format!("{} differs from regeneration", file.display())
            })?;
            compared += 1;
        }
    }
    let lines: Vec<(String, String)> = entries
        .par_iter()
        .map(|e| {
            (
                verdict_line(&e.cond, &config),
                verdict_line(&e.cond, &config),
            )
        })
        .collect();
    for (seed, (a, b)) in lines.iter().enumerate() {
        ensure(a == b, || format!("seed {seed}: verdicts differ"))?;
        fails += a.matches("=fail").count();
    }
    ensure(fails == 0, || {
        format!("{fails} failing checks in the suite")
    })?;
    Ok(format!(
        "{} regenerations byte-identical ({compared} shipped files matched), verdict sequences stable",
        entries.len()
    ))
}

fn main() {
    let gen_start = Instant::now();
    let entries = corpus();
    let gen_time = gen_start.elapsed();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "constructor soundness",
            Box::new(|| constructor_soundness(&entries, gen_time)),
        ),
        (
            "extension and history battery",
            Box::new(|| extension_battery(&entries)),
        ),
        (
            "generator independence",
            Box::new(|| generator_independence(&entries)),
        ),
        (
            "majority chain depth",
            Box::new(|| majority_chain(&entries)),
        ),
        (
            "signature isomorphism",
            Box::new(|| upsilon_isomorphism(&entries)),
        ),
        ("flip closure", Box::new(|| flip_closure(&entries))),
        ("chain collapse", Box::new(|| chain_collapse(&entries))),
        (
            "transform contract",
            Box::new(|| transform_contract(&entries)),
        ),
        (
            "quotient oracle equivalence",
            Box::new(|| quotient_oracle(1000)),
        ),
        ("determinism", Box::new(|| determinism(&entries))),
    ];

    let mut failed = 0;
    for (k, (name, body)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|panic| {
            Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = secs(start.elapsed());
        match outcome {
            Ok(detail) => println!("[{:02}] {name}: PASS ({detail}; {took})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[{:02}] {name}: FAIL ({detail}; {took})", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
