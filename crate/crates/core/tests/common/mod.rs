//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use moulds::bal::p4_blocks;
use moulds::mould::Mould;
use moulds::words::{Alphabet, AlphabetRef};
use moulds::ratfun::rint;
use moulds::{FamilyTag, LinForm, Poly, RatFun};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn triv() -> AlphabetRef {
    Arc::new(Alphabet::trivial())
}

pub fn z2() -> AlphabetRef {
    Arc::new(Alphabet::cyclic(2))
}

/// A random small-integer polynomial in `d` variables of degree `≤ deg`.
pub fn random_poly(d: usize, deg: u32, rng: &mut impl Rng) -> Poly {
    let mut p = Poly::zero(d);
    for _ in 0..4 {
        let mut e = vec![0u32; d];
        let mut left = rng.gen_range(0..=deg);
        while left > 0 && d > 0 {
            e[rng.gen_range(0..d)] += 1;
            left -= 1;
        }
        p.add_term(e, rint(rng.gen_range(-3..=3)));
    }
    p
}

/// A random nonzero primitive form `x_i + … + x_j` or `x_i − x_j`.
fn random_form(d: usize, rng: &mut impl Rng) -> LinForm {
    let i = rng.gen_range(0..d);
    let j = rng.gen_range(i..d);
    if i < j && rng.gen_bool(0.3) {
        LinForm::var(i, d).sub(&LinForm::var(j, d))
    } else {
        LinForm::range_sum(i, j + 1, d)
    }
}

/// A random `Rat`-valued polymould whose components carry up to two
/// linear-form denominators.
pub fn random_rat_mould(blocks: Vec<AlphabetRef>, max_length: usize, rng: &mut impl Rng) -> Mould {
    Mould::from_fn(FamilyTag::Rat, blocks, max_length, |k| {
        let d = k.len();
        let num = random_poly(d, 2, rng);
        if d == 0 {
            return Ok(RatFun::from_poly(num));
        }
        let den: Vec<(LinForm, u32)> = (0..rng.gen_range(0..=2)).map(|_| (random_form(d, rng), 1)).collect();
        Ok(RatFun::from_parts(num, &den).expect("primitive forms"))
    })
    .expect("Rat admits every component")
}

pub fn random_p4(max_length: usize, rng: &mut impl Rng) -> Mould {
    random_rat_mould(p4_blocks(), max_length, rng)
}

pub fn random_p4_poly(max_length: usize, rng: &mut impl Rng) -> Mould {
    Mould::random_poly(FamilyTag::Rat, p4_blocks(), max_length, 3, rng).expect("polynomials are admissible")
}
