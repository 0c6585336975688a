//! The check registry: every suite is a list of named, pure checks.

use std::sync::Arc;

use moulds::bal::{self, Balancing, Lab};
use moulds::braid::{self, BraidAlgebra, BraidElement};
use moulds::flexion::{ari, arit, expari, gari, invgari, preari};
use moulds::mould::{paj, pic, symmetry_check, Key, Mould, Symmetry};
use moulds::ncseries::{self as ser, ma, ma_inverse, NCSeries};
use moulds::ratfun::{rat, rint};
use moulds::words::{shuffle, shuffle_positions, stuffle, Alphabet, AlphabetRef, Letter, Word};
use moulds::{FamilyTag, LinForm, Poly, RatFun, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const SUITES: [&str; 13] = [
    "ratfun", "words", "mould", "flexion", "ma", "appendix-a", "appendix-b", "appendix-c", "braid", "pentagon", "bal", "paj", "dmr",
];

/// Why a check did not pass.
#[derive(Debug)]
pub enum Verdict {
    Fail(Value),
    Skip(String),
}

impl<E: std::error::Error> From<E> for Verdict {
    fn from(e: E) -> Self {
        Verdict::Fail(json!({ "error": e.to_string() }))
    }
}

pub type Outcome = Result<(), Verdict>;

/// Per-check context: truncation bounds, the label alphabet and a private RNG.
pub struct Ctx {
    pub max_length: usize,
    pub max_degree: usize,
    pub gamma: AlphabetRef,
    pub rng: ChaCha8Rng,
}

impl Ctx {
    pub fn new(max_length: usize, max_degree: usize, gamma: AlphabetRef, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ctx { max_length, max_degree, gamma, rng }
    }

    fn triv(&self) -> AlphabetRef {
        Arc::new(Alphabet::trivial())
    }

    fn needs_trivial(&self) -> Outcome {
        if self.gamma.len() == 1 {
            Ok(())
        } else {
            Err(Verdict::Skip("needs the trivial alphabet".into()))
        }
    }
}

pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub anchor: &'static str,
    pub run: fn(&mut Ctx) -> Outcome,
}

fn ensure(ok: bool, witness: impl FnOnce() -> Value) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Verdict::Fail(witness()))
    }
}

fn same(a: &Mould, b: &Mould) -> Outcome {
    match a.first_difference(b) {
        None => Ok(()),
        Some(k) => Err(Verdict::Fail(json!({
            "shape": k.shape, "labels": k.labels,
            "lhs": a.get(&k).to_string(), "rhs": b.get(&k).to_string(),
        }))),
    }
}

fn symmetric(kind: Symmetry, m: &Mould, bound: usize) -> Outcome {
    let r = symmetry_check(kind, m, bound)?;
    ensure(r.passed(), || json!({ "symmetry": format!("{kind:?}"), "failure": r.failure }))
}

// ---------------------------------------------------------------------------
// random fixtures
// ---------------------------------------------------------------------------

fn random_poly(d: usize, deg: u32, rng: &mut impl Rng) -> Poly {
    let mut p = Poly::zero(d);
    for _ in 0..4 {
        let mut e = vec![0u32; d];
        for _ in 0..rng.gen_range(0..=deg) {
            if d > 0 {
                e[rng.gen_range(0..d)] += 1;
            }
        }
        p.add_term(e, rint(rng.gen_range(-3..=3)));
    }
    p
}

fn random_ratfun(d: usize, rng: &mut impl Rng) -> RatFun {
    let num = random_poly(d, 2, rng);
    if d == 0 {
        return RatFun::from_poly(num);
    }
    let den: Vec<(LinForm, u32)> = (0..rng.gen_range(0..=2))
        .map(|_| {
            let i = rng.gen_range(0..d);
            (LinForm::range_sum(i, rng.gen_range(i + 1..=d), d), 1)
        })
        .collect();
    RatFun::from_parts(num, &den).expect("range sums are primitive")
}

fn random_mould(blocks: Vec<AlphabetRef>, l: usize, rng: &mut impl Rng) -> Mould {
    Mould::from_fn(FamilyTag::Rat, blocks, l, |k| Ok(random_ratfun(k.len(), rng))).expect("Rat admits everything")
}

fn random_ari(g: &AlphabetRef, l: usize, rng: &mut impl Rng) -> Mould {
    let mut m = random_mould(vec![g.clone()], l, rng);
    m.set(Key::one(vec![]), RatFun::zero(0)).expect("empty key");
    m
}

fn unital(h: &NCSeries) -> Result<NCSeries, Verdict> {
    let (g, n) = (h.gamma().clone(), h.max_degree());
    let c = NCSeries::constant(g.clone(), n, h.constant_term());
    Ok(NCSeries::one(g, n).add(&h.sub(&c)?)?)
}

fn random_braid_dagger(alg: &Arc<BraidAlgebra>, rng: &mut impl Rng) -> Result<BraidElement, Verdict> {
    let factors: Vec<NCSeries> = alg.dec_alphabets().into_iter().map(|g| ser::random_dagger(g, alg.max_degree(), rng)).collect();
    Ok(braid::dec_inv_factors(&factors, alg)?)
}

/// The degree-3 pentagon solution `exp^⊛(σ)` at truncation `n`.
fn grt_phi(n: usize) -> Result<NCSeries, Verdict> {
    let alg = BraidAlgebra::new(4, 3)?;
    let sol = braid::grt_solve(3, &NCSeries::one(Arc::new(Alphabet::trivial()), 1), &alg)?;
    ensure(sol.dimension() > 0, || json!("empty degree-3 solution space"))?;
    Ok(sol.representative(n).exp_circledast()?)
}

// ---------------------------------------------------------------------------
// ratfun
// ---------------------------------------------------------------------------

fn ratfun_ring(c: &mut Ctx) -> Outcome {
    let d = c.max_length.max(1);
    for _ in 0..20 {
        let (a, b) = (random_ratfun(d, &mut c.rng), random_ratfun(d, &mut c.rng));
        let pt: Vec<Rational> = (0..d).map(|_| rat(c.rng.gen_range(-30..=30), c.rng.gen_range(1..=7))).collect();
        if let (Some(x), Some(y)) = (a.eval(&pt), b.eval(&pt)) {
            ensure((&a * &b).eval(&pt) == Some(&x * &y), || json!({"op": "mul", "a": a.to_string(), "b": b.to_string()}))?;
            ensure((&a + &b).eval(&pt) == Some(&x + &y), || json!({"op": "add", "a": a.to_string(), "b": b.to_string()}))?;
        }
    }
    Ok(())
}

fn ratfun_canonical(c: &mut Ctx) -> Outcome {
    let d = c.max_length.max(1);
    for _ in 0..20 {
        let (a, b) = (random_ratfun(d, &mut c.rng), random_ratfun(d, &mut c.rng));
        ensure(&(&a + &b) - &b == a, || json!({"a": a.to_string(), "b": b.to_string()}))?;
        ensure(RatFun::from_json(&a.to_json(), d, true)? == a, || json!({"json": a.to_json()}))?;
    }
    Ok(())
}

fn ratfun_strict(_: &mut Ctx) -> Outcome {
    let p = moulds::ratfun::parse_rational;
    ensure(p("2/4", false)? == rat(1, 2) && p("2/4", true).is_err() && p("1/0", false).is_err(), || json!("rational parsing"))
}

// ---------------------------------------------------------------------------
// words
// ---------------------------------------------------------------------------

fn generic(d: usize, r: std::ops::Range<usize>, x: bool) -> Word {
    let ls = r.map(|i| Letter::new(LinForm::var(i, d), 0)).collect();
    if x {
        Word::x(ls)
    } else {
        Word::y(ls)
    }
}

fn words_shuffle(c: &mut Ctx) -> Outcome {
    for d in 0..=c.max_length {
        for p in 0..=d {
            let s = shuffle(&generic(d, 0..p, true), &generic(d, p..d, true), d)?;
            let binom = (1..=p).fold(1usize, |acc, i| acc * (d + 1 - i) / i);
            ensure(s.len() == binom && shuffle_positions(p, d - p).len() == binom, || json!({"p": p, "q": d - p}))?;
        }
    }
    Ok(())
}

fn words_stuffle(c: &mut Ctx) -> Outcome {
    if !c.gamma.has_group() {
        return Err(Verdict::Skip("stuffle needs a group law".into()));
    }
    let l = c.max_length.min(4);
    for d in 2..=l {
        for p in 1..d {
            let labels: Vec<usize> = (0..d).map(|_| c.rng.gen_range(0..c.gamma.len())).collect();
            let w = |r: std::ops::Range<usize>| Word::y(r.map(|i| Letter::new(LinForm::var(i, d), labels[i])).collect());
            let (a, b) = (w(0..p), w(p..d));
            ensure(stuffle(&a, &b, &c.gamma, d)? == stuffle(&b, &a, &c.gamma, d)?, || json!({"p": p, "q": d - p}))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mould
// ---------------------------------------------------------------------------

fn mould_paj_symmetral(c: &mut Ctx) -> Outcome {
    symmetric(Symmetry::Symmetral, &paj(c.gamma.clone(), c.max_length), c.max_length)
}

fn mould_pic_symmetril(c: &mut Ctx) -> Outcome {
    c.needs_trivial()?;
    let l = c.max_length.min(4);
    symmetric(Symmetry::Symmetril, &pic(c.triv(), l), l)
}

fn mould_swap_paj(c: &mut Ctx) -> Outcome {
    same(&paj(c.triv(), c.max_length).swap()?, &pic(c.triv(), c.max_length))
}

fn mould_inverse(c: &mut Ctx) -> Outcome {
    let mut m = random_mould(vec![c.gamma.clone()], c.max_length, &mut c.rng);
    m.set(Key::one(vec![]), RatFun::one(0))?;
    same(&m.mul(&m.inv_mul()?)?, &Mould::unit1(FamilyTag::Rat, c.gamma.clone(), c.max_length))
}

fn mould_swap_round_trip(c: &mut Ctx) -> Outcome {
    if !c.gamma.has_group() {
        return Err(Verdict::Skip("swap needs a group law".into()));
    }
    let m = random_mould(vec![c.gamma.clone()], c.max_length, &mut c.rng);
    same(&m.swap()?.unswap()?, &m)?;
    same(&m.minus().minus(), &m)
}

// ---------------------------------------------------------------------------
// flexion
// ---------------------------------------------------------------------------

fn flexion_antisymmetry(c: &mut Ctx) -> Outcome {
    let l = c.max_length.min(4);
    let (a, b) = (random_ari(&c.gamma, l, &mut c.rng), random_ari(&c.gamma, l, &mut c.rng));
    same(&ari(&a, &b)?, &ari(&b, &a)?.neg())
}

fn flexion_jacobi(c: &mut Ctx) -> Outcome {
    let l = c.max_length.min(4);
    let [a, b, d] = [0; 3].map(|_| random_ari(&c.gamma, l, &mut c.rng));
    let j = ari(&a, &ari(&b, &d)?)?.add(&ari(&b, &ari(&d, &a)?)?)?.add(&ari(&d, &ari(&a, &b)?)?)?;
    ensure(j.is_zero(), || json!("Jacobi sum is nonzero"))
}

fn flexion_derivation(c: &mut Ctx) -> Outcome {
    let l = c.max_length.min(4);
    let [a1, a2, b] = [0; 3].map(|_| random_ari(&c.gamma, l, &mut c.rng));
    same(&arit(&b, &a1.mul(&a2)?)?, &arit(&b, &a1)?.mul(&a2)?.add(&a1.mul(&arit(&b, &a2)?)?)?)
}

fn flexion_pre_lie(c: &mut Ctx) -> Outcome {
    let l = c.max_length.min(4);
    let [a, b, d] = [0; 3].map(|_| random_ari(&c.gamma, l, &mut c.rng));
    let assoc = |x: &Mould, y: &Mould, z: &Mould| -> Result<Mould, Verdict> { Ok(preari(&preari(x, y)?, z)?.sub(&preari(x, &preari(y, z)?)?)?) };
    same(&assoc(&a, &b, &d)?, &assoc(&a, &d, &b)?)
}

fn flexion_gari_group(c: &mut Ctx) -> Outcome {
    let l = c.max_length.min(4);
    let [a, b, d] = [0; 3].map(|_| {
        let mut m = random_ari(&c.gamma, l, &mut c.rng);
        m.set(Key::one(vec![]), RatFun::one(0)).expect("empty key");
        m
    });
    same(&gari(&gari(&a, &b)?, &d)?, &gari(&a, &gari(&b, &d)?)?)?;
    let unit = Mould::unit1(FamilyTag::Rat, c.gamma.clone(), l);
    let ia = invgari(&a)?;
    same(&gari(&a, &ia)?, &unit)?;
    same(&gari(&ia, &a)?, &unit)
}

// ---------------------------------------------------------------------------
// ma
// ---------------------------------------------------------------------------

fn ma_homomorphism(c: &mut Ctx) -> Outcome {
    for _ in 0..5 {
        let h = ser::random_dagger(c.gamma.clone(), c.max_degree, &mut c.rng);
        let k = ser::random_dagger(c.gamma.clone(), c.max_degree, &mut c.rng);
        same(&ma(&h.mul(&k)?)?, &ma(&h)?.mul(&ma(&k)?)?)?;
    }
    Ok(())
}

fn ma_antipode(c: &mut Ctx) -> Outcome {
    for _ in 0..5 {
        let h = ser::random_dagger(c.gamma.clone(), c.max_degree, &mut c.rng);
        same(&ma(&h.antipode())?, &ma(&h)?.pari().anti()?)?;
    }
    Ok(())
}

fn ma_round_trip(c: &mut Ctx) -> Outcome {
    for _ in 0..5 {
        let h = ser::random_dagger(c.gamma.clone(), c.max_degree, &mut c.rng);
        ensure(ma_inverse(&ma(&h)?)? == h, || json!({"series": h.to_json()}))?;
    }
    Ok(())
}

fn ma_group_like(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(5);
    let gl = ser::random_group_like(c.gamma.clone(), n, &mut c.rng);
    symmetric(Symmetry::Symmetral, &ma(&gl)?, n)?;
    let lie = ser::random_lie(c.gamma.clone(), n, 0.5, &mut c.rng);
    symmetric(Symmetry::Alternal, &ma(&lie)?, n)?;
    let junk = gl.add(&NCSeries::word(c.gamma.clone(), n, &[1, 1]))?;
    ensure(symmetry_check(Symmetry::Symmetral, &ma(&junk)?, n)?.failure.is_some(), || json!("negative control is symmetral"))
}

// ---------------------------------------------------------------------------
// appendices
// ---------------------------------------------------------------------------

fn app_a_derivation(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(5);
    let psi = ser::random_lie(c.gamma.clone(), n, 0.5, &mut c.rng);
    let phi = ser::random_dagger(c.gamma.clone(), n, &mut c.rng);
    same(&ma(&NCSeries::d_psi(&psi, &phi)?)?, &arit(&ma(&psi)?, &ma(&phi)?)?)
}

fn app_a_ihara(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(5);
    let psi = ser::random_lie(c.gamma.clone(), n, 0.5, &mut c.rng);
    let phi = ser::random_lie(c.gamma.clone(), n, 0.5, &mut c.rng);
    same(&ma(&NCSeries::ihara(&psi, &phi)?)?, &ari(&ma(&phi)?, &ma(&psi)?)?)
}

fn app_a_exp(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(5);
    let phi = ser::random_lie(c.gamma.clone(), n, 0.5, &mut c.rng);
    same(&ma(&phi.exp_circledast()?)?, &expari(&ma(&phi)?)?)
}

fn app_b_product(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(5);
    let psi = ser::random_group_like(c.gamma.clone(), n, &mut c.rng);
    let phi = unital(&ser::random_dagger(c.gamma.clone(), n, &mut c.rng))?;
    same(&ma(&NCSeries::circledast(&psi, &phi)?)?, &gari(&ma(&phi)?, &ma(&psi)?)?)
}

fn app_b_group(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(4);
    let [a, b, d] = [0; 3].map(|_| ser::random_group_like(c.gamma.clone(), n, &mut c.rng));
    let [a, b, d] = [ma(&a)?, ma(&b)?, ma(&d)?];
    same(&gari(&gari(&a, &b)?, &d)?, &gari(&a, &gari(&b, &d)?)?)?;
    same(&gari(&a, &invgari(&a)?)?, &Mould::unit1(a.family(), c.gamma.clone(), a.max_length()))
}

fn app_c_swap(c: &mut Ctx) -> Outcome {
    c.needs_trivial()?;
    for _ in 0..5 {
        let h = ser::random_dagger(c.triv(), c.max_degree, &mut c.rng);
        same(&ma(&h)?.swap()?, &ser::mi_bar(&ser::pi_y(&h)?)?)?;
        same(&ser::mi(&h)?, &ma(&h)?.swap()?)?;
    }
    Ok(())
}

fn app_c_anti(c: &mut Ctx) -> Outcome {
    c.needs_trivial()?;
    let n = c.max_degree;
    let g = c.triv();
    let h = ser::random_dagger(g.clone(), n, &mut c.rng);
    // right factors without f0-initial words
    let x = ser::random_dagger(g.clone(), n.saturating_sub(1), &mut c.rng);
    let k = NCSeries::one(g.clone(), n).add(&NCSeries::f(g.clone(), n, 0).mul(&x)?)?;
    same(&ser::mi(&h.mul(&k)?)?, &ser::mi(&k)?.mul(&ser::mi(&h)?)?)?;
    let y2 = ser::pi_y(&ser::random_dagger(g, n, &mut c.rng))?;
    let y1 = ser::pi_y(&h)?;
    same(&ser::mi_bar(&y1.mul(&y2))?, &ser::mi_bar(&y2)?.mul(&ser::mi_bar(&y1)?)?)
}

fn app_c_mini(c: &mut Ctx) -> Outcome {
    c.needs_trivial()?;
    let h = ser::random_dagger(c.triv(), c.max_degree, &mut c.rng);
    same(&ser::mi_bar(&ser::phi_corr(&h)?)?, &ser::mini(&h)?)
}

fn harmonic_agreement(h: &NCSeries) -> Result<bool, Verdict> {
    let c1 = ser::phi_star(h)?.is_harmonic_group_like();
    let s = ser::mini(h)?.mul(&ma(h)?.swap()?)?;
    let c2 = symmetry_check(Symmetry::Symmetril, &s, h.max_degree())?.passed();
    ensure(c1 == c2, || json!({"condition_1": c1, "condition_2": c2, "series": h.to_json()}))?;
    Ok(c1)
}

fn app_c_equivalence(c: &mut Ctx) -> Outcome {
    c.needs_trivial()?;
    let n = c.max_degree.min(5);
    for _ in 0..3 {
        let w = ser::harmonic_witness(n, &mut c.rng)?;
        ensure(harmonic_agreement(&w)?, || json!("engineered member fails"))?;
        harmonic_agreement(&ser::random_dagger(c.triv(), n, &mut c.rng))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// braid and pentagon
// ---------------------------------------------------------------------------

fn braid_relations(c: &mut Ctx) -> Outcome {
    for n in [4, 5] {
        let alg = BraidAlgebra::new(n, c.max_degree.min(3))?;
        let t = |i: usize, j: usize| BraidElement::gen(&alg, i.min(j), i.max(j));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in (0..n).filter(|&k| k != i && k != j) {
                    let r = t(i, j)?.bracket(&t(i, k)?.add(&t(j, k)?)?)?;
                    ensure(r.is_zero(), || json!({"relation": [i, j, k], "n": n}))?;
                    for l in (0..n).filter(|l| ![i, j, k].contains(l)) {
                        ensure(t(i, j)?.bracket(&t(k, l)?)?.is_zero(), || json!({"relation": [i, j, k, l], "n": n}))?;
                    }
                }
                ensure(BraidElement::center(&alg).bracket(&t(i, j)?)?.is_zero(), || json!({"center": [i, j], "n": n}))?;
            }
        }
    }
    Ok(())
}

fn braid_round_trips(c: &mut Ctx) -> Outcome {
    let alg = BraidAlgebra::new(4, c.max_degree.min(4))?;
    for _ in 0..3 {
        let w = random_braid_dagger(&alg, &mut c.rng)?;
        ensure(braid::dec_inv(&braid::dec(&w)?, &alg)? == w, || json!({"dec": w.to_json()}))?;
        ensure(braid::madec_inv(&braid::madec(&w)?, &alg)? == w, || json!({"madec": w.to_json()}))?;
    }
    Ok(())
}

fn braid_involutions(c: &mut Ctx) -> Outcome {
    let alg = BraidAlgebra::new(4, c.max_degree.min(4))?;
    for _ in 0..3 {
        let w = random_braid_dagger(&alg, &mut c.rng)?;
        ensure(braid::flip(&braid::flip(&w)?)? == w, || json!({"flip": w.to_json()}))?;
        ensure(braid::rev(&braid::rev(&w)?)? == w, || json!({"rev": w.to_json()}))?;
    }
    Ok(())
}

fn braid_pullbacks(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(3);
    let (a4, a5) = (BraidAlgebra::new(4, n)?, BraidAlgebra::new(5, n)?);
    let phi = ser::random_group_like(c.triv(), n, &mut c.rng);
    let psi = ser::random_group_like(c.triv(), n, &mut c.rng);
    let d = braid::g1234_defects(&phi, &psi, &a4, &a5)?;
    ensure(d.iter().all(|x| x.is_zero()), || json!({"nonzero": d.iter().map(|x| !x.is_zero()).collect::<Vec<_>>()}))
}

fn pentagon_t4(c: &mut Ctx) -> Outcome {
    let n = c.max_degree.min(4);
    let phi = grt_phi(n)?;
    let alg = BraidAlgebra::new(4, n)?;
    ensure(braid::pentagon_braid(&phi, &phi, &alg)?.truncate(3).is_zero(), || json!({"phi": phi.to_json()}))?;
    ensure(braid::pentagon_residual(&ma(&phi.truncate(3))?, &phi.truncate(3), &BraidAlgebra::new(4, 3)?)?.is_zero(), || json!("mould pentagon"))
}

fn pentagon_t5(c: &mut Ctx) -> Outcome {
    let phi = grt_phi(3)?;
    let _ = c;
    ensure(braid::pentagon_t5(&phi, &BraidAlgebra::new(5, 3)?)?.is_zero(), || json!({"phi": phi.to_json()}))
}

fn pentagon_negative(c: &mut Ctx) -> Outcome {
    let h = ser::lyndon_bracket(c.triv(), 3, &[0, 0, 1]).exp()?;
    ensure(!braid::pentagon_braid(&h, &h, &BraidAlgebra::new(4, 3)?)?.is_zero(), || json!("non-solution passes"))
}

// ---------------------------------------------------------------------------
// bal and paj
// ---------------------------------------------------------------------------

fn p4_length(c: &Ctx) -> usize {
    c.max_length.min(3)
}

fn bal_involution(c: &mut Ctx) -> Outcome {
    let m = random_mould(bal::p4_blocks(), p4_length(c), &mut c.rng);
    same(&bal::bal(&bal::bal(&m)?)?, &m)
}

fn bal_depth_one(c: &mut Ctx) -> Outcome {
    for _ in 0..10 {
        let m = random_mould(bal::p4_blocks(), 1, &mut c.rng);
        let b = bal::bal(&m)?;
        for (src, dst) in bal::depth_one_table() {
            ensure(m.get(&src) == b.get(&dst), || json!({"from": src.shape, "to": dst.shape}))?;
        }
    }
    Ok(())
}

fn bal_polynomial(c: &mut Ctx) -> Outcome {
    let m = Mould::random_poly(FamilyTag::Rat, bal::p4_blocks(), p4_length(c), 3, &mut c.rng)?;
    let bad = bal::non_polynomial_components(&bal::bal(&m)?);
    ensure(bad.is_empty(), || json!(bad.iter().map(|k| json!({"shape": k.shape, "labels": k.labels})).collect::<Vec<_>>()))
}

fn bal_flip(c: &mut Ctx) -> Outcome {
    let alg = BraidAlgebra::new(4, c.max_degree.min(3))?;
    let m = braid::madec(&random_braid_dagger(&alg, &mut c.rng)?)?;
    let lhs = braid::on_moulds(&bal::bal_in_family(&m)?, &alg, braid::rev)?;
    let rhs = braid::on_moulds(&braid::on_moulds(&m, &alg, braid::rev)?, &alg, braid::flip)?;
    same(&lhs, &rhs)
}

fn paj_balanced(c: &mut Ctx) -> Outcome {
    let l = p4_length(c);
    match bal::solve_balancing_constant(&paj(c.triv(), l).minus())? {
        Balancing::Balanced(k) => same(&k, &Mould::unit1(FamilyTag::Rat, Arc::new(Alphabet::set(2)), l)),
        Balancing::Obstructed(k) => Err(Verdict::Fail(json!({"obstructed": {"shape": k.shape, "labels": k.labels}}))),
    }
}

fn paj_reduction(c: &mut Ctx) -> Outcome {
    for d in 1..=c.max_length.min(4) as u32 {
        for idx in 0..3usize.pow(d) {
            let labels: Vec<Lab> = (0..d).map(|i| [Lab::XY, Lab::X, Lab::Zero][idx / 3usize.pow(i) % 3]).collect();
            if labels[0] != Lab::Zero {
                ensure(bal::paj_reduction_check(&bal::generic_word(&labels), d as usize)?, || json!(format!("{labels:?}")))?;
            }
        }
    }
    Ok(())
}

fn paj_psi_red(c: &mut Ctx) -> Outcome {
    for d in 1..=c.max_length.min(4) as u32 {
        for idx in 0..1usize << d {
            let labels: Vec<Lab> = (0..d).map(|i| if idx >> i & 1 == 1 { Lab::XY } else { Lab::Y }).collect();
            ensure(bal::paj_psi_red_check(&bal::generic_word(&labels), d as usize)?, || json!(format!("{labels:?}")))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dmr: the cross-validation triangle on the degree-3 solution
// ---------------------------------------------------------------------------

fn dmr_balancing(_: &mut Ctx) -> Outcome {
    let phi = grt_phi(3)?;
    match bal::solve_balancing_constant(&ma(&phi)?)? {
        Balancing::Balanced(k) => {
            same(&k, &bal::predicted_constant(&phi)?)?;
            ensure(bal::balancing_constant_is_admissible(&k)?, || json!("constant is not admissible"))
        }
        Balancing::Obstructed(k) => Err(Verdict::Fail(json!({"obstructed": {"shape": k.shape, "labels": k.labels}}))),
    }
}

fn dmr_inclusion(_: &mut Ctx) -> Outcome {
    let phi = grt_phi(3)?;
    let s = ser::mini(&phi)?.mul(&ma(&phi)?.minus().swap()?)?;
    symmetric(Symmetry::Symmetril, &s, 3)
}

fn dmr_member(_: &mut Ctx) -> Outcome {
    let phi = grt_phi(3)?;
    let conds = ser::dmr_conditions(&phi.iota0())?;
    ensure(conds.iter().all(|c| c.1), || json!(conds.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>()))
}

pub fn registry() -> Vec<Check> {
    macro_rules! check {
        ($suite:literal, $name:literal, $anchor:literal, $f:expr) => {
            Check { suite: $suite, name: $name, anchor: $anchor, run: $f }
        };
    }
    vec![
        check!("ratfun", "ring-operations", "arithmetic agrees with evaluation at rational points", ratfun_ring),
        check!("ratfun", "canonical-form", "reduced forms are unique and survive JSON", ratfun_canonical),
        check!("ratfun", "strict-parsing", "unreduced rationals are rejected in strict mode", ratfun_strict),
        check!("words", "shuffle-counts", "shuffles of p and q letters number C(p+q, p)", words_shuffle),
        check!("words", "stuffle-commutative", "the stuffle product is commutative", words_stuffle),
        check!("mould", "paj-symmetral", "paj = 1/(x1(x1+x2)...) is symmetral", mould_paj_symmetral),
        check!("mould", "pic-symmetril", "pic = 1/(x1...xm) is symmetril", mould_pic_symmetril),
        check!("mould", "swap-paj-pic", "swap(paj) = pic", mould_swap_paj),
        check!("mould", "inverse", "M x M^-1 = 1", mould_inverse),
        check!("mould", "involutions", "unswap∘swap = id and minus∘minus = id", mould_swap_round_trip),
        check!("flexion", "ari-antisymmetric", "ari(A,B) = -ari(B,A)", flexion_antisymmetry),
        check!("flexion", "ari-jacobi", "ari satisfies the Jacobi identity", flexion_jacobi),
        check!("flexion", "arit-derivation", "arit(B) is a derivation of the mould product", flexion_derivation),
        check!("flexion", "preari-pre-lie", "the preari associator is symmetric in its last two arguments", flexion_pre_lie),
        check!("flexion", "gari-group", "gari is associative with two-sided inverses", flexion_gari_group),
        check!("ma", "homomorphism", "ma(hk) = ma(h) x ma(k)", ma_homomorphism),
        check!("ma", "antipode", "ma∘S = anti∘pari∘ma", ma_antipode),
        check!("ma", "round-trip", "ma^-1∘ma = id on dagger series", ma_round_trip),
        check!("ma", "group-like-symmetral", "group-like ↦ symmetral, Lie-like ↦ alternal", ma_group_like),
        check!("appendix-a", "derivation", "ma(D_psi phi) = arit(ma psi)(ma phi)", app_a_derivation),
        check!("appendix-a", "ihara-bracket", "ma({psi, phi}) = ari(ma phi, ma psi)", app_a_ihara),
        check!("appendix-a", "exponential", "ma(exp^⊛ phi) = expari(ma phi)", app_a_exp),
        check!("appendix-b", "product", "ma(psi ⊛ phi) = gari(ma phi, ma psi)", app_b_product),
        check!("appendix-b", "gari-group", "gari on ma-images is associative with inverses", app_b_group),
        check!("appendix-c", "swap-ma", "swap∘ma = mi-bar∘pi_Y = mi", app_c_swap),
        check!("appendix-c", "anti-homomorphism", "mi and mi-bar reverse products", app_c_anti),
        check!("appendix-c", "mini", "mi-bar(phi_corr) = Mini", app_c_mini),
        check!("appendix-c", "harmonic-criterion", "harmonic group-likeness of phi_* ⇔ symmetrility of Mini x swap(ma phi)", app_c_equivalence),
        check!("braid", "relations", "t_n relations and centrality of the total sum", braid_relations),
        check!("braid", "dec-round-trip", "dec and madec are invertible on dagger elements", braid_round_trips),
        check!("braid", "involutions", "flip and rev are involutions", braid_involutions),
        check!("braid", "pullbacks", "the four pullback identities for the pentagon", braid_pullbacks),
        check!("pentagon", "t4", "the degree-3 solution satisfies the pentagon in t4 and on moulds", pentagon_t4),
        check!("pentagon", "t5", "the degree-3 solution satisfies the t5 pentagon", pentagon_t5),
        check!("pentagon", "negative-control", "exp of a non-solution fails the pentagon", pentagon_negative),
        check!("bal", "involution", "bal∘bal = id", bal_involution),
        check!("bal", "depth-one", "the depth-one table of bal", bal_depth_one),
        check!("bal", "denominators-cancel", "bal keeps polynomial components polynomial", bal_polynomial),
        check!("bal", "flip", "rev∘bal = flip∘rev on braid images", bal_flip),
        check!("paj", "balanced", "minus(paj) is balanced with constant 1", paj_balanced),
        check!("paj", "reduction", "paj∘c0 reduction identity", paj_reduction),
        check!("paj", "psi-red", "(paj ⊗ paj)∘psi_red = paj", paj_psi_red),
        check!("dmr", "balancing-constant", "the pentagon solution balances with C = ma(psi(-f1-f2, f1))", dmr_balancing),
        check!("dmr", "inclusion", "Mini x swap(minus(ma phi)) is symmetril", dmr_inclusion),
        check!("dmr", "member", "iota0 of the pentagon solution satisfies the double shuffle conditions", dmr_member),
    ]
}

/// Cross-checks for a pentagon solution `σ` of degree `d`: pentagon,
/// balance, and the double shuffle conditions of `ι₀ exp^⊛(σ)`.
pub fn grt_cross_checks(sigma: &NCSeries, d: usize) -> Vec<(String, Outcome)> {
    let run = || -> Result<[(String, Outcome); 3], Verdict> {
        let phi = sigma.exp_circledast()?;
        let alg = BraidAlgebra::new(4, d)?;
        let pent = ensure(braid::pentagon_braid(&phi, &phi, &alg)?.is_zero(), || json!("pentagon"));
        let balanced = match bal::solve_balancing_constant(&ma(&phi)?)? {
            Balancing::Balanced(_) => Ok(()),
            Balancing::Obstructed(k) => Err(Verdict::Fail(json!({"obstructed": {"shape": k.shape, "labels": k.labels}}))),
        };
        // ⟨φ|f1f0⟩ only vanishes from degree 3 on; below, DMR without the f1f0 condition
        let conds = ser::dmr_conditions(&phi.iota0())?;
        let wanted = if d >= 3 { 5 } else { 4 };
        let dmr = ensure(conds[..wanted].iter().all(|c| c.1), || json!(conds.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>()));
        Ok([(format!("degree-{d}.pentagon"), pent), (format!("degree-{d}.balanced"), balanced), (format!("degree-{d}.dmr"), dmr)])
    };
    match run() {
        Ok(v) => v.into(),
        Err(v) => vec![(format!("degree-{d}.cross-checks"), Err(v))],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete_and_unique() {
        let r = registry();
        assert!(SUITES.iter().all(|s| r.iter().any(|c| c.suite == *s)));
        let mut names: Vec<_> = r.iter().map(|c| (c.suite, c.name)).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), r.len());
    }

}
