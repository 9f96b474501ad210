//! Seeded generation of conditions.
//!
//! Randomness comes from SplitMix64 seeded with `spec.seed`; a bounded draw
//! `below(n)` is `next_u64() % n`. Draws happen in this order:
//!
//! 1. the base index of the atomic template, `below(16)`;
//! 2. for each level `1..=height`:
//!    - the heart size `k = below(kmax + 1)`, only when hearts are enabled
//!      and `kmax > 0` (otherwise `k = 0` and nothing is drawn);
//!    - `ζ* = below(t)`;
//!    - `τ*`: the pool is filtered to terms of arity at most `|u|` of the
//!      template, and one is picked with `below(len)`;
//!    - `n*` positions of the template's support, each drawn as
//!      `below(remaining)` from the list of positions not yet taken, then
//!      sorted.
//!
//! Each level lays `t` copies of the template over consecutive blocks of
//! naturals separated by `gap` unused indices. With a heart, the heart is
//! the template's first `k` indices and the first block starts `gap + 1`
//! above the heart; without one the first block starts at the template's
//! least index.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::condition::{Condition, Part, Width, MAX_HEIGHT};
use crate::error::{invalid, Result};
use crate::index::{GenIndex, IndexSet, OrderMap};
use crate::term::BoolTerm;

/// Terms available for `τ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermPool {
    /// Only the constant `1`.
    ConstOne,
    /// `1`, `y0`, `y0∧y1`, `y0∨y1`, `y0∧¬y1`, `¬y0`.
    Standard,
}

impl TermPool {
    pub fn terms(self) -> Vec<BoolTerm> {
        let (y0, y1) = (BoolTerm::var(0), BoolTerm::var(1));
        match self {
            TermPool::ConstOne => vec![BoolTerm::one()],
            TermPool::Standard => vec![
                BoolTerm::one(),
                y0.clone(),
                BoolTerm::and(y0.clone(), y1.clone()),
                BoolTerm::or(y0.clone(), y1.clone()),
                BoolTerm::and(y0.clone(), BoolTerm::not(y1)),
                BoolTerm::not(y0),
            ],
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "const1" => Ok(TermPool::ConstOne),
            "standard" => Ok(TermPool::Standard),
            other => Err(invalid(format!("unknown term pool {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub width: Width,
    pub height: usize,
    pub pool: TermPool,
    pub shared_heart: bool,
    pub gap: u32,
}

/// `(width, height)` combinations cycled through by the corpus.
pub const CORPUS_SHAPES: [(usize, usize); 9] = [
    (2, 0),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 0),
    (3, 1),
    (3, 2),
    (6, 0),
    (6, 1),
];

/// Number of seeds in the standard corpus.
pub const CORPUS_SIZE: u64 = 200;

impl GeneratorSpec {
    pub fn new(seed: u64, width: Width, height: usize) -> Self {
        GeneratorSpec {
            seed,
            width,
            height,
            pool: TermPool::Standard,
            shared_heart: false,
            gap: 1,
        }
    }

    /// The corpus entry for `seed`. Shapes cycle through [`CORPUS_SHAPES`];
    /// with `c = seed / 9` the cycle number, hearts are enabled when `c` is
    /// odd and the constant pool is used when `c / 2` is odd.
    pub fn corpus(seed: u64) -> Self {
        let n = CORPUS_SHAPES.len() as u64;
        let (t, h) = CORPUS_SHAPES[(seed % n) as usize];
        let cycle = seed / n;
        let mut spec = GeneratorSpec::new(seed, Width::new(t).expect("corpus widths are valid"), h);
        spec.shared_heart = cycle % 2 == 1;
        if (cycle / 2) % 2 == 1 {
            spec.pool = TermPool::ConstOne;
        }
        spec
    }
}

fn below(rng: &mut SplitMix64, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Largest heart size `k` such that every set of levels realized as a
/// fingerprint in `template` is still realized outside its first `k`
/// indices.
pub fn heart_limit(template: &Condition) -> usize {
    let ht = template.height();
    let mut last = vec![None; 1 << ht];
    for (pos, j) in template.support().iter().enumerate() {
        let key = template
            .fingerprint(j)
            .expect("in support")
            .iter()
            .fold(0usize, |m, &b| m | 1 << b);
        last[key] = Some(pos);
    }
    last.iter().map(|p| p.unwrap_or(0)).min().unwrap_or(0)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Condition> {
    if spec.height > MAX_HEIGHT {
        return Err(invalid(format!(
            "height {} exceeds {MAX_HEIGHT}",
            spec.height
        )));
    }
    let mut rng = SplitMix64::from_seed(spec.seed.to_le_bytes());
    let t = spec.width.get();
    let pool = spec.pool.terms();
    let base = below(&mut rng, 16) as u32;
    let mut template = Condition::atomic(spec.width, GenIndex(base));

    for _ in 0..spec.height {
        let u = template.support().clone();
        let m = u.len();
        let kmax = heart_limit(&template);
        let k = if spec.shared_heart && kmax > 0 {
            below(&mut rng, kmax + 1)
        } else {
            0
        };
        let zeta = below(&mut rng, t);
        let eligible: Vec<&BoolTerm> = pool.iter().filter(|term| term.arity() <= m).collect();
        let tau = eligible[below(&mut rng, eligible.len())].clone();
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut picks: Vec<usize> = (0..tau.arity())
            .map(|_| remaining.remove(below(&mut rng, remaining.len())))
            .collect();
        picks.sort_unstable();
        let v_template: IndexSet = picks.iter().map(|&pos| u.get(pos).unwrap()).collect();

        let heart: IndexSet = u.iter().take(k).collect();
        let block_len = (m - k) as u32;
        let mut cursor = match heart.last() {
            Some(h) => h.0 + 1 + spec.gap,
            None => u.first().unwrap().0,
        };
        let mut parts = Vec::with_capacity(t);
        for _ in 0..t {
            let target: IndexSet = heart
                .iter()
                .chain((cursor..cursor + block_len).map(GenIndex))
                .collect();
            let map = OrderMap::new(u.clone(), target)?;
            parts.push(Part::new(template.relabel(&map)?, map.image(&v_template)?));
            cursor += block_len + spec.gap;
        }
        template = Condition::amalgamate(zeta, tau, heart, parts)?;
    }
    Ok(template)
}
