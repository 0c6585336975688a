//! Moulds and flexion operators against pointwise definitions.

mod common;

use common::*;
use moulds::flexion::{ari, arit, gari, garit, invgari};
use moulds::mould::{is_alternal, is_symmetral, paj, pic, Key, Mould};
use moulds::ratfun::{rat, rint};
use moulds::{FamilyTag, RatFun, Rational};

fn pt(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rint(x)).collect()
}

#[test]
fn paj_and_pic_closed_forms() {
    let p = paj(triv(), 4);
    let q = pic(triv(), 4);
    // at (1, 2, 3, 4): 1/(1·3·6·10) and 1/(1·2·3·4)
    assert_eq!(p.get1(&[0; 4]).eval(&pt(&[1, 2, 3, 4])), Some(rat(1, 180)));
    assert_eq!(q.get1(&[0; 4]).eval(&pt(&[1, 2, 3, 4])), Some(rat(1, 24)));
    assert_eq!(p.empty_value(), rint(1));
}

#[test]
fn product_matches_deconcatenation() {
    let mut rng = rng(1);
    let a = random_rat_mould(vec![triv()], 3, &mut rng);
    let b = random_rat_mould(vec![triv()], 3, &mut rng);
    let ab = a.mul(&b).unwrap();
    let x = pt(&[2, 5, 11]);
    let at = |m: &Mould, idx: &[usize]| m.get1(&vec![0; idx.len()]).eval(&idx.iter().map(|&i| x[i].clone()).collect::<Vec<_>>());
    let mut expect = rint(0);
    for cut in 0..=3 {
        let (l, r): (Vec<usize>, Vec<usize>) = ((0..cut).collect(), (cut..3).collect());
        match (at(&a, &l), at(&b, &r)) {
            (Some(u), Some(v)) => expect += u * v,
            _ => return, // a pole at the sample point; nothing to compare
        }
    }
    assert_eq!(ab.get1(&[0, 0, 0]).eval(&x), Some(expect));
}

#[test]
fn swap_in_length_two() {
    // swap(M)(v₁, v₂) = M(v₂, v₁ − v₂) for the trivial alphabet
    let mut rng = rng(2);
    let m = random_rat_mould(vec![triv()], 2, &mut rng);
    let s = m.swap().unwrap();
    let (v1, v2) = (rint(7), rint(3));
    assert_eq!(s.get1(&[0, 0]).eval(&[v1.clone(), v2.clone()]), m.get1(&[0, 0]).eval(&[v2.clone(), v1 - v2]));
    assert_eq!(s.unswap().unwrap(), m);
}

#[test]
fn inverse_and_unit() {
    let mut rng = rng(3);
    let mut m = random_rat_mould(vec![z2()], 3, &mut rng);
    m.set(Key::one(vec![]), RatFun::one(0)).unwrap();
    let unit = Mould::unit1(FamilyTag::Rat, z2(), 3);
    assert_eq!(m.mul(&m.inv_mul().unwrap()).unwrap(), unit);
    assert_eq!(m.inv_mul().unwrap().mul(&m).unwrap(), unit);
}

#[test]
fn symmetry_negative_controls() {
    let mut p = paj(triv(), 3);
    assert!(is_symmetral(&p, 3).unwrap());
    p.set1(vec![0, 0], RatFun::one(2)).unwrap();
    assert!(!is_symmetral(&p, 3).unwrap());
    let mut a = Mould::zero1(FamilyTag::Pol, triv(), 2);
    a.set1(vec![0, 0], &RatFun::var(0, 2) - &RatFun::var(1, 2)).unwrap();
    assert!(is_alternal(&a, 2).unwrap());
    a.set1(vec![0, 0], RatFun::var(0, 2)).unwrap();
    assert!(!is_alternal(&a, 2).unwrap());
}

fn ari_element(seed: u64) -> Mould {
    let mut rng = rng(seed);
    let mut m = random_rat_mould(vec![z2()], 3, &mut rng);
    m.set(Key::one(vec![]), RatFun::zero(0)).unwrap();
    m
}

#[test]
fn arit_is_a_derivation_of_the_product() {
    let (a1, a2, b) = (ari_element(4), ari_element(5), ari_element(6));
    let lhs = arit(&b, &a1.mul(&a2).unwrap()).unwrap();
    let rhs = arit(&b, &a1).unwrap().mul(&a2).unwrap().add(&a1.mul(&arit(&b, &a2).unwrap()).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn ari_is_antisymmetric() {
    let (a, b) = (ari_element(7), ari_element(8));
    assert_eq!(ari(&a, &b).unwrap(), ari(&b, &a).unwrap().neg());
    assert!(ari(&a, &a).unwrap().is_zero());
}

#[test]
fn gari_unit_and_inverse() {
    let mut a = ari_element(9);
    a.set(Key::one(vec![]), RatFun::one(0)).unwrap();
    let unit = Mould::unit1(FamilyTag::Rat, z2(), 3);
    assert_eq!(gari(&a, &unit).unwrap(), a);
    assert_eq!(gari(&unit, &a).unwrap(), a);
    assert_eq!(gari(&a, &invgari(&a).unwrap()).unwrap(), unit);
}

#[test]
fn garit_is_multiplicative() {
    // garit(B) is an automorphism of the mould product
    let mut b = ari_element(11);
    b.set(Key::one(vec![]), RatFun::one(0)).unwrap();
    let (a1, a2) = (ari_element(12), ari_element(13));
    let lhs = garit(&b, &a1.mul(&a2).unwrap()).unwrap();
    let rhs = garit(&b, &a1).unwrap().mul(&garit(&b, &a2).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn json_round_trip() {
    let mut rng = rng(10);
    let m = random_rat_mould(vec![z2(), triv()], 3, &mut rng);
    assert_eq!(Mould::from_json(&m.to_json(), true).unwrap(), m);
}
