//! Brute-force recomputations shared by the integration tests. Nothing here
//! calls the library routine it is compared against.

#![allow(dead_code)]

use hforce::workbench::{generate, GeneratorSpec, CORPUS_SIZE};
use hforce::{Condition, GenIndex};

pub struct Entry {
    pub seed: u64,
    pub spec: GeneratorSpec,
    pub cond: Condition,
}

pub fn corpus() -> Vec<Entry> {
    (0..CORPUS_SIZE)
        .map(|seed| {
            let spec = GeneratorSpec::corpus(seed);
            let cond = generate(&spec).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            Entry { seed, spec, cond }
        })
        .collect()
}

fn bit(p: &Condition, mask: u64, j: GenIndex) -> bool {
    mask >> p.support().position(j).expect("in support") & 1 == 1
}

fn maj(a: bool, b: bool, c: bool) -> bool {
    (a && b) || (a && c) || (b && c)
}

/// Values of `τ_ξ = τ*(x_i : i ∈ v_ξ)` under the assignment `mask`.
pub fn tau_values(p: &Condition, mask: u64) -> Vec<bool> {
    let a = p.as_amalgam().expect("amalgam");
    a.parts()
        .iter()
        .map(|part| {
            let args: Vec<bool> = part.v.iter().map(|j| bit(p, mask, j)).collect();
            a.tau_star().eval(&args).expect("arity matches")
        })
        .collect()
}

/// Majority of each full triple of `τ` values.
pub fn maj_values(p: &Condition, mask: u64) -> Vec<bool> {
    tau_values(p, mask)
        .chunks_exact(3)
        .map(|c| maj(c[0], c[1], c[2]))
        .collect()
}

/// Membership in the valuation table by its recursive definition: every
/// restriction to a part is a member of the part, and the triple
/// majorities never decrease across any pair of triples.
pub fn member(p: &Condition, mask: u64) -> bool {
    let Some(a) = p.as_amalgam() else {
        return mask < 2;
    };
    for part in a.parts() {
        let sub = part
            .child
            .support()
            .iter()
            .enumerate()
            .fold(0u64, |m, (k, j)| m | (bit(p, mask, j) as u64) << k);
        if !member(&part.child, sub) {
            return false;
        }
    }
    let m = maj_values(p, mask);
    (0..m.len()).all(|x| (x + 1..m.len()).all(|z| !m[x] || m[z]))
}

/// Closedness straight from the recursive definition.
pub fn closed(p: &Condition, z: &[usize]) -> bool {
    let Some(a) = p.as_amalgam() else {
        return true;
    };
    let top = p.height() - 1;
    let spine = &a.parts()[a.zeta_star()].child;
    let below: Vec<usize> = z.iter().copied().filter(|&b| b < top).collect();
    if !closed(spine, &below) {
        return false;
    }
    if !z.contains(&top) {
        return true;
    }
    let block_min = spine
        .support()
        .iter()
        .find(|j| !a.heart().contains(*j))
        .expect("nonempty block");
    let mut witnesses: Vec<GenIndex> = a.parts()[a.zeta_star()].v.iter().collect();
    witnesses.push(block_min);
    (0..top).all(|b| {
        z.contains(&b)
            || witnesses
                .iter()
                .all(|&j| !spine.history_of(j).unwrap()[b].is_index())
    })
}

pub fn level_subsets(ht: usize) -> Vec<Vec<usize>> {
    (0u32..1 << ht)
        .map(|m| (0..ht).filter(|&b| m >> b & 1 == 1).collect())
        .collect()
}

pub fn closed_subsets(p: &Condition) -> Vec<Vec<usize>> {
    level_subsets(p.height())
        .into_iter()
        .filter(|z| closed(p, z))
        .collect()
}

/// Generators all of whose index-valued levels lie in `z`.
pub fn u_of(p: &Condition, z: &[usize]) -> Vec<GenIndex> {
    p.support()
        .iter()
        .filter(|&j| {
            p.history_of(j)
                .unwrap()
                .iter()
                .enumerate()
                .all(|(b, v)| !v.is_index() || z.contains(&b))
        })
        .collect()
}

/// The order isomorphism `Z0 → Z1` fixes every level the two share.
pub fn fixes_overlap(z0: &[usize], z1: &[usize]) -> bool {
    z0.len() == z1.len() && z0.iter().zip(z1).all(|(a, b)| a == b || !z1.contains(a))
}

/// `G(f)` computed from the position-wise pairing of `u0` and `u1`.
pub fn flip(p: &Condition, u0: &[GenIndex], u1: &[GenIndex], mask: u64) -> u64 {
    let mut out = 0u64;
    for (k, j) in p.support().iter().enumerate() {
        let src = if let Some(pos) = u0.iter().position(|&i| i == j) {
            Some(u1[pos])
        } else {
            u1.iter().position(|&i| i == j).map(|pos| u0[pos])
        };
        if let Some(s) = src {
            out |= (bit(p, mask, s) as u64) << k;
        }
    }
    out
}

/// Follows the ζ*-spine of `q` down to the height of `p`.
pub fn on_spine(p: &Condition, q: &Condition) -> bool {
    let mut cur = q.clone();
    while cur.height() > p.height() {
        let a = cur.as_amalgam().expect("positive height");
        cur = a.parts()[a.zeta_star()].child.clone();
    }
    &cur == p
}
