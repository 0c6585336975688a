//! The balance involution and its word recursions.

mod common;

use common::*;
use moulds::bal::*;
use moulds::mould::{Key, Mould};
use moulds::ratfun::rint;
use moulds::{FamilyTag, LinForm};
use proptest::prelude::*;

fn u(v: &[i64]) -> LinForm {
    LinForm(v.to_vec())
}

#[test]
fn psi_of_y_xy_by_hand() {
    // ψ(y_{u1} xy_{u2}) = y_{u1} ⊗ xy_{u2} − y_{u1+u2} ⊗ x_{u2}
    //                  + ∅ ⊗ xy_{u1+u2} x_{−u1} − ∅ ⊗ xy_{u1+u2} 0_{−u1}
    let w = generic_word(&[Lab::Y, Lab::XY]);
    let p = psi(&w).unwrap();
    let expect = [
        ((vec![(u(&[1, 0]), Lab::Y)], vec![(u(&[0, 1]), Lab::XY)]), rint(1)),
        ((vec![(u(&[1, 1]), Lab::Y)], vec![(u(&[0, 1]), Lab::X)]), rint(-1)),
        ((vec![], vec![(u(&[1, 1]), Lab::XY), (u(&[-1, 0]), Lab::X)]), rint(1)),
        ((vec![], vec![(u(&[1, 1]), Lab::XY), (u(&[-1, 0]), Lab::Zero)]), rint(-1)),
    ];
    assert_eq!(p, expect.into_iter().collect());
}

#[test]
fn recursions_reject_bad_input() {
    let w = vec![(u(&[1, 1]), Lab::Y), (u(&[2, 2]), Lab::XY)];
    assert!(matches!(psi(&w), Err(BalError::DependentForms)));
    assert!(matches!(psi(&generic_word(&[Lab::X])), Err(BalError::BadLabel(Lab::X))));
    let m = Mould::unit1(FamilyTag::Rat, triv(), 2);
    assert!(matches!(bal(&m), Err(BalError::NotP4)));
}

#[test]
fn unit_is_fixed() {
    let one = Mould::unit(FamilyTag::Rat, p4_blocks(), 3);
    assert_eq!(bal(&one).unwrap(), one);
}

#[test]
fn one_two_entry_sends_block_one_to_block_two() {
    let mut m = Mould::zero(FamilyTag::Rat, p4_blocks(), 2);
    m.set(Key::new(vec![1, 0], vec![0]), moulds::RatFun::var(0, 1)).unwrap();
    let b = bal(&m).unwrap();
    assert_eq!(b.get(&Key::new(vec![0, 1], vec![0])), moulds::RatFun::var(0, 1));
    assert!(b.get(&Key::new(vec![1, 0], vec![0])).is_zero());
}

#[test]
fn paj_identities_up_to_depth_four() {
    for d in 1..=4u32 {
        for idx in 0..1usize << d {
            let labels: Vec<Lab> = (0..d).map(|i| if idx >> i & 1 == 1 { Lab::XY } else { Lab::Y }).collect();
            assert!(paj_psi_red_defect(&generic_word(&labels), d as usize).unwrap().is_zero(), "{labels:?}");
        }
    }
    let w = generic_word(&[Lab::XY, Lab::Zero, Lab::X, Lab::Zero]);
    assert!(paj_reduction_check(&w, 4).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn involution_on_random_elements(seed in any::<u64>()) {
        let m = random_p4(2, &mut rng(seed));
        prop_assert_eq!(bal(&bal(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn polynomials_stay_polynomial(seed in any::<u64>()) {
        let m = random_p4_poly(3, &mut rng(seed));
        prop_assert!(non_polynomial_components(&bal(&m).unwrap()).is_empty());
    }
}

#[test]
fn balancing_agrees_with_the_pentagon() {
    let mut r = rng(31);
    for n in [3, 4] {
        let alg = moulds::braid::BraidAlgebra::new(4, n).unwrap();
        for _ in 0..3 {
            let h = moulds::ncseries::random_group_like(triv(), n, &mut r);
            let m = moulds::ncseries::ma(&h).unwrap();
            let balanced = matches!(solve_balancing_constant(&m).unwrap(), Balancing::Balanced(_));
            assert_eq!(balanced, moulds::braid::pentagon_braid(&h, &h, &alg).unwrap().is_zero());
        }
    }
    let h = moulds::ncseries::lyndon_bracket(triv(), 3, &[0, 0, 1]).exp().unwrap();
    let m = moulds::ncseries::ma(&h).unwrap();
    assert!(matches!(solve_balancing_constant(&m).unwrap(), Balancing::Obstructed(_)));
    assert!(!is_gari_as_bal(&m).unwrap());
    assert!(is_gari_as_bal(&moulds::mould::paj(triv(), 3).minus()).unwrap());
}
