//! Seeded small rationals `n/d` with `n ∈ [−9, 9]`, `d ∈ [1, 9]`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Symbol;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.gen_range(-9..=9);
    let d: i64 = rng.gen_range(1..=9);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let v = small_rational(rng);
        if v != BigRational::from_integer(BigInt::from(0)) {
            return v;
        }
    }
}

pub fn point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<BigRational> {
    (0..dim).map(|_| small_rational(rng)).collect()
}

/// Nonzero values for each symbol, drawn in symbol order.
pub fn bind_symbols(rng: &mut ChaCha8Rng, symbols: &BTreeSet<Symbol>) -> BTreeMap<Symbol, BigRational> {
    symbols.iter().map(|s| (s.clone(), nonzero_rational(rng))).collect()
}
