//! The infinitesimal braid algebras against independent counts.

mod common;

use std::collections::BTreeMap;

use common::*;
use moulds::braid::*;
use moulds::linalg::rank;
use moulds::ncseries::NCSeries;
use moulds::ratfun::rint;
use moulds::Rational;

/// Complete homogeneous symmetric polynomial `h_d(1, …, n−1)`: the Hilbert
/// series of `t_n` is `∏_{k<n} 1/(1 − k t)`.
fn pbw(n: usize, d: usize) -> usize {
    fn go(k: usize, max: usize, d: usize) -> usize {
        if d == 0 {
            return 1;
        }
        (k..=max).map(|j| j * go(j, max, d - 1)).sum()
    }
    go(1, n - 1, d)
}

#[test]
fn graded_dimensions_match_pbw() {
    for n in [3, 4, 5] {
        let alg = BraidAlgebra::new(n, 3).unwrap();
        for d in 0..=3 {
            assert_eq!(alg.slice_dimension(d), pbw(n, d), "t_{n}, degree {d}");
        }
    }
}

#[test]
fn degree_two_relations_have_the_expected_rank() {
    // In the free algebra on the 6 generators of t_4, the degree-2 relations
    // span a space of dimension 36 − 25.
    let gens: Vec<(usize, usize)> = (0..4).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let idx = |a: (usize, usize)| gens.iter().position(|&g| g == (a.0.min(a.1), a.0.max(a.1))).unwrap();
    let ng = gens.len();
    let mut rows: Vec<Vec<Rational>> = vec![];
    let mut push = |terms: &[((usize, usize), (usize, usize), i64)]| {
        let mut row = vec![rint(0); ng * ng];
        for &(a, b, c) in terms {
            row[idx(a) * ng + idx(b)] += rint(c);
        }
        rows.push(row);
    };
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                if i == j || j == k || i == k {
                    continue;
                }
                // [t_ij, t_ik + t_jk]
                push(&[((i, j), (i, k), 1), ((i, k), (i, j), -1), ((i, j), (j, k), 1), ((j, k), (i, j), -1)]);
                for l in 0..4 {
                    if ![i, j, k].contains(&l) {
                        push(&[((i, j), (k, l), 1), ((k, l), (i, j), -1)]);
                    }
                }
            }
        }
    }
    assert_eq!(ng * ng - rank(&rows, ng * ng), 25);
    assert_eq!(BraidAlgebra::new(4, 2).unwrap().slice_dimension(2), 25);
}

#[test]
fn grt_dimensions() {
    // one generator in each odd degree 3, 5 and nothing in degree 4
    let alg = BraidAlgebra::new(4, 5).unwrap();
    let one = NCSeries::one(triv(), 1);
    let dims: BTreeMap<usize, usize> = (3..=5).map(|d| (d, grt_solve(d, &one, &alg).unwrap().dimension())).collect();
    assert_eq!(dims, BTreeMap::from([(3, 1), (4, 0), (5, 1)]));
}

#[test]
fn pentagon_for_the_degree_three_solution() {
    let alg4 = BraidAlgebra::new(4, 3).unwrap();
    let alg5 = BraidAlgebra::new(5, 3).unwrap();
    let sol = grt_solve(3, &NCSeries::one(triv(), 1), &alg4).unwrap();
    let phi = sol.representative(3).exp_circledast().unwrap();
    assert!(phi.is_group_like());
    assert!(pentagon_braid(&phi, &phi, &alg4).unwrap().is_zero());
    assert!(pentagon_t5(&phi, &alg5).unwrap().is_zero());
    // a random group-like series is not an associator
    let mut r = rng(3);
    let junk = moulds::ncseries::random_group_like(triv(), 3, &mut r);
    assert!(!pentagon_braid(&junk, &junk, &alg4).unwrap().is_zero());
}

#[test]
fn json_and_coproduct() {
    let alg = BraidAlgebra::new(4, 3).unwrap();
    let x = BraidElement::from_word(&alg, &[(0, 2), (1, 3)]).unwrap().add(&BraidElement::gen(&alg, 2, 3).unwrap()).unwrap();
    assert_eq!(BraidElement::from_json(&alg, &x.to_json()).unwrap(), x);
    let g = BraidElement::gen(&alg, 1, 2).unwrap();
    assert_eq!(g.coproduct().len(), 2);
}
