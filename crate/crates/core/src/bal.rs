//! The balance involution on `P_4` and its companions.
//!
//! `bal` is evaluated through the word recursions `ψ`, `c_0`, `ψ̃`, `ψ̄`:
//! for the canonical pair `η = (x_1..x_r; x..x)`, `ω = (x_{r+1}..; ε)`,
//!
//! ```text
//! minus(bal M)(η; ω) = Σ_j c_j · minus(M)(a_j; b_j)   where ψ̄(η ⊗ ω) = Σ_j c_j a_j ⊗ b_j,
//! ```
//!
//! with the label dictionary `y, x ↦ 1` and `xy ↦ 2`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::One;
use thiserror::Error;

use crate::linalg;
use crate::mould::{paj_of_forms, symmetry_check, Key, Mould, MouldError, Symmetry};
use crate::ncseries::{ma, NCSeries, SeriesError};
use crate::ratfun::{FamilyTag, LinForm, RatFun, RatFunError, Rational};
use crate::words::{shuffle_positions, Alphabet, AlphabetRef};

#[derive(Debug, Error)]
pub enum BalError {
    #[error("letter forms are linearly dependent")]
    DependentForms,
    #[error("label {0:?} is not allowed here")]
    BadLabel(Lab),
    #[error("expected a polymould over ([1], [1,2])")]
    NotP4,
    #[error(transparent)]
    Mould(#[from] MouldError),
    #[error(transparent)]
    RatFun(#[from] RatFunError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, BalError>;

/// Letter labels of the auxiliary word spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lab {
    X,
    Y,
    XY,
    Zero,
}

/// A word whose letters carry a linear form and a label.
pub type LabeledWord = Vec<(LinForm, Lab)>;

/// `Σ c · (a ⊗ b)` with rational-function coefficients.
pub type TensorWordSum = BTreeMap<(LabeledWord, LabeledWord), RatFun>;

fn add_rat<K: Ord>(m: &mut BTreeMap<K, RatFun>, k: K, v: RatFun) {
    if v.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match m.entry(k) {
        Entry::Vacant(e) => {
            e.insert(v);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += &v;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

fn add_q<K: Ord>(m: &mut BTreeMap<K, Rational>, k: K, v: Rational) {
    crate::ncseries::add_to(m, k, v)
}

/// The ambient arity of a word's forms (0 for the empty word).
fn arity(w: &LabeledWord) -> Option<usize> {
    w.first().map(|l| l.0.arity())
}

/// Checks that the forms of a word are linearly independent.
pub fn check_lindep(w: &LabeledWord) -> Result<()> {
    let Some(d) = arity(w) else { return Ok(()) };
    let rows: Vec<Vec<Rational>> = w.iter().map(|(u, _)| u.0.iter().map(|&c| Rational::from_integer(c.into())).collect()).collect();
    if linalg::rank(&rows, d) < w.len() {
        return Err(BalError::DependentForms);
    }
    Ok(())
}

fn check_labels(w: &LabeledWord, allowed: &[Lab]) -> Result<()> {
    match w.iter().find(|l| !allowed.contains(&l.1)) {
        Some(l) => Err(BalError::BadLabel(l.1)),
        None => Ok(()),
    }
}

/// Removes letter `i`, adding its form to letter `into`.
fn merge(w: &LabeledWord, i: usize, into: Option<usize>) -> LabeledWord {
    let mut v = w.clone();
    if let Some(j) = into {
        v[j].0 = v[j].0.add(&w[i].0);
    }
    v.remove(i);
    v
}

type PsiTerms = BTreeMap<(LabeledWord, LabeledWord), Rational>;

fn psi_rec(w: &LabeledWord, memo: &mut HashMap<LabeledWord, PsiTerms>) -> PsiTerms {
    if w.iter().all(|l| l.1 == Lab::Y) {
        return PsiTerms::from([((w.clone(), vec![]), Rational::one())]);
    }
    if let Some(t) = memo.get(w) {
        return t.clone();
    }
    let d = w.len();
    let mut out = PsiTerms::new();
    let one = Rational::one;
    let shift = |u: &LinForm, l: Lab| (u.neg(), l);
    // first sum: ω_i is absorbed into ω_{i+1} (or dropped at the end)
    for i in 0..d {
        let (u, e) = (&w[i].0, w[i].1);
        let next = w.get(i + 1).map(|l| l.1);
        let factor: Vec<((LinForm, Lab), Rational)> = match (e, next) {
            (Lab::XY, None) => vec![((u.clone(), Lab::XY), one())],
            (Lab::XY, Some(Lab::Y)) => vec![((u.clone(), Lab::X), one())],
            (Lab::Y, Some(Lab::XY)) => vec![(shift(u, Lab::X), one()), (shift(u, Lab::Zero), -one())],
            _ => continue,
        };
        let rec = merge(w, i, (i + 1 < d).then_some(i + 1));
        for ((a, b), c) in psi_rec(&rec, memo) {
            for (l, k) in &factor {
                let mut b2 = b.clone();
                b2.push(l.clone());
                add_q(&mut out, (a.clone(), b2), &c * k);
            }
        }
    }
    // second sum: ω_i is absorbed into ω_{i-1}
    for i in 1..d {
        let (u, e) = (&w[i].0, w[i].1);
        let factor: Vec<((LinForm, Lab), Rational)> = match (e, w[i - 1].1) {
            (Lab::XY, Lab::Y) => vec![((u.clone(), Lab::X), one())],
            (Lab::Y, Lab::XY) => vec![(shift(u, Lab::X), one()), (shift(u, Lab::Zero), -one())],
            _ => continue,
        };
        let rec = merge(w, i, Some(i - 1));
        for ((a, b), c) in psi_rec(&rec, memo) {
            for (l, k) in &factor {
                let mut b2 = b.clone();
                b2.push(l.clone());
                add_q(&mut out, (a.clone(), b2), -(&c * k));
            }
        }
    }
    memo.insert(w.clone(), out.clone());
    out
}

/// `ψ` on a word over `{xy, y}`; integer coefficients.
pub fn psi(w: &LabeledWord) -> Result<BTreeMap<(LabeledWord, LabeledWord), Rational>> {
    check_labels(w, &[Lab::XY, Lab::Y])?;
    check_lindep(w)?;
    Ok(psi_rec(w, &mut HashMap::new()))
}

fn c0_rec(w: &LabeledWord, d: usize, memo: &mut HashMap<LabeledWord, BTreeMap<LabeledWord, RatFun>>) -> Result<BTreeMap<LabeledWord, RatFun>> {
    let Some(i) = w.iter().rposition(|l| l.1 == Lab::Zero) else {
        return Ok(BTreeMap::from([(w.clone(), RatFun::one(d))]));
    };
    if let Some(t) = memo.get(w) {
        return Ok(t.clone());
    }
    let inv = RatFun::inv_linear(&w[i].0).map_err(|_| BalError::DependentForms)?;
    let mut out = BTreeMap::new();
    // (ω_i ⌉ ω_{i+1}) keeps the label of ω_{i+1}; at the end ω_i is dropped
    let first = merge(w, i, (i + 1 < w.len()).then_some(i + 1));
    for (v, c) in c0_rec(&first, d, memo)? {
        add_rat(&mut out, v, &c * &inv);
    }
    // (ω_{i-1} ⌈ ω_i) keeps the label of ω_{i-1}; absent for i = 1
    if i > 0 {
        let second = merge(w, i, Some(i - 1));
        for (v, c) in c0_rec(&second, d, memo)? {
            add_rat(&mut out, v, (&c * &inv).neg());
        }
    }
    memo.insert(w.clone(), out.clone());
    Ok(out)
}

/// `c_0` on a word over `{xy, x, 0}` with `d`-variable forms: removes the
/// `0`-labelled letters by divided differences.
pub fn c0(w: &LabeledWord, d: usize) -> Result<BTreeMap<LabeledWord, RatFun>> {
    check_labels(w, &[Lab::XY, Lab::X, Lab::Zero])?;
    c0_rec(w, d, &mut HashMap::new())
}

/// `ψ̃ = (Id ⊗ c_0)∘ψ`.
pub fn tilde_psi(w: &LabeledWord, d: usize) -> Result<TensorWordSum> {
    let mut out = TensorWordSum::new();
    let mut memo = HashMap::new();
    for ((a, b), c) in psi(w)? {
        for (v, k) in c0_rec(&b, d, &mut memo)? {
            add_rat(&mut out, (a.clone(), v), k.scale(&c));
        }
    }
    Ok(out)
}

/// `ψ̄(η ⊗ ω) = ψ̃(ω) ш (∅ ⊗ η)`: `η` (over `{x}`) is shuffled into the second factor.
pub fn bar_psi(eta: &LabeledWord, w: &LabeledWord, d: usize) -> Result<TensorWordSum> {
    check_labels(eta, &[Lab::X])?;
    let mut all = eta.clone();
    all.extend(w.iter().cloned());
    check_lindep(&all)?;
    let mut out = TensorWordSum::new();
    for ((a, b), c) in tilde_psi(w, d)? {
        let mut cat = b.clone();
        cat.extend(eta.iter().cloned());
        for perm in shuffle_positions(b.len(), eta.len()) {
            let v: LabeledWord = perm.iter().map(|&p| cat[p].clone()).collect();
            add_rat(&mut out, (a.clone(), v), c.clone());
        }
    }
    Ok(out)
}

/// `ρ`: every label becomes the single label `1`.
pub fn rho(w: &LabeledWord) -> Vec<LinForm> {
    w.iter().map(|l| l.0.clone()).collect()
}

/// `ψ_red = (Id ⊗ ρ)∘ψ`, second factor as bare forms.
pub fn psi_red(w: &LabeledWord) -> Result<BTreeMap<(LabeledWord, Vec<LinForm>), Rational>> {
    let mut out = BTreeMap::new();
    for ((a, b), c) in psi(w)? {
        add_q(&mut out, (a, rho(&b)), c);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// bal on P_4
// ---------------------------------------------------------------------------

/// One term of the expansion of a `bal` component: `coef(x) · M(key)(forms)`.
#[derive(Debug, Clone)]
struct BalTerm {
    key: Key,
    forms: Vec<LinForm>,
    coef: RatFun,
}

type BalCache = Mutex<HashMap<(usize, Vec<usize>), Arc<Vec<BalTerm>>>>;

fn bal_cache() -> &'static BalCache {
    static CACHE: OnceLock<BalCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The canonical word pair for a `P_4` key: `η` of length `r` over `{x}`,
/// `ω` over `{y ↦ 1, xy ↦ 2}`.
pub fn canonical_words(r: usize, labels2: &[usize]) -> (LabeledWord, LabeledWord) {
    let d = r + labels2.len();
    let eta = (0..r).map(|i| (LinForm::var(i, d), Lab::X)).collect();
    let omega = labels2.iter().enumerate().map(|(k, &l)| (LinForm::var(r + k, d), if l == 0 { Lab::Y } else { Lab::XY })).collect();
    (eta, omega)
}

fn expansion(r: usize, labels2: &[usize]) -> Result<Arc<Vec<BalTerm>>> {
    let key = (r, labels2.to_vec());
    if let Some(t) = bal_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let d = r + labels2.len();
    let (eta, omega) = canonical_words(r, labels2);
    let mut terms = vec![];
    for ((a, b), c) in bar_psi(&eta, &omega, d)? {
        let mut labels = vec![0; a.len()];
        labels.extend(b.iter().map(|l| if l.1 == Lab::XY { 1 } else { 0 }));
        let forms = a.iter().chain(&b).map(|l| l.0.clone()).collect();
        terms.push(BalTerm { key: Key::new(vec![a.len(), b.len()], labels), forms, coef: c.negate_vars() });
    }
    let terms = Arc::new(terms);
    bal_cache().lock().expect("cache poisoned").insert(key, terms.clone());
    Ok(terms)
}

/// The `P_4` block alphabets `([1], [1,2])`.
pub fn p4_blocks() -> Vec<AlphabetRef> {
    vec![Arc::new(Alphabet::set(1)), Arc::new(Alphabet::set(2))]
}

fn check_p4(m: &Mould) -> Result<()> {
    let b = m.blocks();
    if b.len() != 2 || b[0].len() != 1 || b[1].len() != 2 {
        return Err(BalError::NotP4);
    }
    Ok(())
}

/// `bal(M)` for a `P_4` polymould, computed in the `Rat` family up to the
/// input's total length.
pub fn bal(m: &Mould) -> Result<Mould> {
    check_p4(m)?;
    let l = m.max_length();
    let mut out = Mould::zero(FamilyTag::Rat, m.blocks().to_vec(), l);
    for key in out.keys() {
        let (r, d) = (key.shape[0], key.len());
        let mut acc = RatFun::zero(d);
        for t in expansion(r, &key.labels[r..])?.iter() {
            let v = m.at(&t.key, &t.forms, d)?;
            if !v.is_zero() {
                acc += &(&t.coef * &v);
            }
        }
        out.set(key, acc)?;
    }
    Ok(out)
}

/// `bal` followed by re-admission into the input's family (polynomial
/// components are required for `TruncSer`).
pub fn bal_in_family(m: &Mould) -> Result<Mould> {
    Ok(bal(m)?.with_family(m.family())?)
}

/// Components of `bal(M)` that keep a denominator.
pub fn non_polynomial_components(m: &Mould) -> Vec<Key> {
    m.components().filter(|(_, v)| !v.is_poly()).map(|(k, _)| k.clone()).collect()
}

/// The depth-one table of `bal` under the `1–2` label dictionary:
/// `(∅;∅) ↦ (∅;∅)`, `(u|1;∅) ↦ (∅;u|1)`, `(∅;u|1) ↦ (u|1;∅)`, `(∅;u|2) ↦ (∅;u|2)`.
pub fn depth_one_table() -> [(Key, Key); 4] {
    [
        (Key::new(vec![0, 0], vec![]), Key::new(vec![0, 0], vec![])),
        (Key::new(vec![1, 0], vec![0]), Key::new(vec![0, 1], vec![0])),
        (Key::new(vec![0, 1], vec![0]), Key::new(vec![1, 0], vec![0])),
        (Key::new(vec![0, 1], vec![1]), Key::new(vec![0, 1], vec![1])),
    ]
}

// ---------------------------------------------------------------------------
// Balanced moulds
// ---------------------------------------------------------------------------

/// `M_[1] ⊗ M_[2]` for a one-block mould over `{1}`.
pub fn split_p4(m: &Mould) -> Result<Mould> {
    let [b1, b2]: [AlphabetRef; 2] = p4_blocks().try_into().expect("two blocks");
    let m1 = m.extend_by_gamma(b1)?;
    let m2 = m.extend_by_gamma(b2)?;
    Ok(m1.tensor(&m2)?)
}

/// Result of the balancing solve.
#[derive(Debug, Clone)]
pub enum Balancing {
    /// `bal(M_[1] ⊗ M_[2]) = M_[1] ⊗ (M_[2] × C)` with this constant `C`.
    Balanced(Mould),
    /// The first component where no constant `C` can work.
    Obstructed(Key),
}

impl Balancing {
    pub fn constant(&self) -> Option<&Mould> {
        match self {
            Balancing::Balanced(c) => Some(c),
            Balancing::Obstructed(_) => None,
        }
    }
}

/// Solves `bal(M_[1] ⊗ M_[2]) = M_[1] ⊗ (M_[2] × C)` for a constant `C` over `[2]`.
/// The `r = 0` components force `C = M_[2]^{×−1} × bal(⋯)|_{r=0}`; the
/// candidate is then checked for constancy and against every component.
pub fn solve_balancing_constant(m: &Mould) -> Result<Balancing> {
    if m.empty_value() != Rational::one() {
        return Err(MouldError::Precondition("M(∅) must be 1".into()).into());
    }
    let family = m.family();
    let b = bal_in_family(&split_p4(m)?)?;
    let g2: AlphabetRef = Arc::new(Alphabet::set(2));
    let l = m.max_length();
    let mut b0 = Mould::zero(family, vec![g2.clone()], l);
    for key in b0.keys() {
        let v = b.get(&Key::new(vec![0, key.len()], key.labels.clone()));
        b0.set(key, v)?;
    }
    let m2 = m.extend_by_gamma(g2.clone())?;
    let c = m2.inv_mul()?.mul(&b0)?;
    let mut keys = c.keys();
    keys.sort_by_key(|k| k.len());
    for key in keys {
        let v = c.get(&key);
        if !v.is_constant() {
            return Ok(Balancing::Obstructed(Key::new(vec![0, key.len()], key.labels)));
        }
    }
    let rhs = m.extend_by_gamma(p4_blocks()[0].clone())?.tensor(&m2.mul(&c)?)?;
    if let Some(k) = b.first_difference(&rhs) {
        return Ok(Balancing::Obstructed(k));
    }
    Ok(Balancing::Balanced(c))
}

/// The constraints on a balancing constant: symmetral with vanishing
/// length-one components.
pub fn balancing_constant_is_admissible(c: &Mould) -> Result<bool> {
    let len1_zero = c.keys_up_to(1).iter().filter(|k| k.len() == 1).all(|k| c.get(k).is_zero());
    Ok(len1_zero && symmetry_check(Symmetry::Symmetral, c, c.max_length())?.passed())
}

/// `β_C(k, l)`: the value of `C` on the label block `(2^k, 1^l)`.
pub fn beta(c: &Mould, k: usize, l: usize) -> Rational {
    let mut labels = vec![1; k];
    labels.extend(std::iter::repeat(0).take(l));
    c.get(&Key::one(labels)).numerator().constant_term()
}

/// The predicted balancing constant `ma_[2](ψ(−f_1−f_2, f_1))`.
pub fn predicted_constant(psi_series: &NCSeries) -> Result<Mould> {
    let g2: AlphabetRef = Arc::new(Alphabet::set(2));
    let n = psi_series.max_degree();
    let f1 = NCSeries::f(g2.clone(), n, 0);
    let f2 = NCSeries::f(g2.clone(), n, 1);
    let images = [f1.add(&f2)?.neg(), f1];
    Ok(ma(&psi_series.substitute(&images)?)?)
}

/// Membership in the symmetral, balanced set at the mould's truncation.
pub fn is_gari_as_bal(m: &Mould) -> Result<bool> {
    Ok(symmetry_check(Symmetry::Symmetral, m, m.max_length())?.passed()
        && matches!(solve_balancing_constant(m)?, Balancing::Balanced(_)))
}

/// The even variant: additionally `M(x_1)` is even.
pub fn is_gari_as_bal_underline(m: &Mould) -> Result<bool> {
    let f = m.get1(&[0]);
    Ok(f == f.negate_vars() && is_gari_as_bal(m)?)
}

// ---------------------------------------------------------------------------
// paj identities
// ---------------------------------------------------------------------------

/// `paj_{xy,x}(c_0(ω)) − paj(ρ(ω))`, which must vanish.
pub fn paj_reduction_defect(w: &LabeledWord, d: usize) -> Result<RatFun> {
    check_lindep(w)?;
    let mut lhs = RatFun::zero(d);
    for (v, c) in c0(w, d)? {
        lhs += &(&c * &paj_of_forms(&rho(&v), d)?);
    }
    Ok(&lhs - &paj_of_forms(&rho(w), d)?)
}

pub fn paj_reduction_check(w: &LabeledWord, d: usize) -> Result<bool> {
    Ok(paj_reduction_defect(w, d)?.is_zero())
}

/// `(paj_y ⊗ paj)(ψ_red(ω)) − paj_{xy,y}(ω)`, which must vanish.
pub fn paj_psi_red_defect(w: &LabeledWord, d: usize) -> Result<RatFun> {
    let mut lhs = RatFun::zero(d);
    for ((a, b), c) in psi_red(w)? {
        lhs += &(&paj_of_forms(&rho(&a), d)? * &paj_of_forms(&b, d)?).scale(&c);
    }
    Ok(&lhs - &paj_of_forms(&rho(w), d)?)
}

pub fn paj_psi_red_check(w: &LabeledWord, d: usize) -> Result<bool> {
    Ok(paj_psi_red_defect(w, d)?.is_zero())
}

/// The canonical word `(x_1..x_d; labels)`.
pub fn generic_word(labels: &[Lab]) -> LabeledWord {
    let d = labels.len();
    labels.iter().enumerate().map(|(i, &l)| (LinForm::var(i, d), l)).collect()
}
