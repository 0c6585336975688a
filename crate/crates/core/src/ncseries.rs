//! Truncated noncommutative series in `f_0` and `f_σ (σ ∈ Γ)`.
//!
//! Besides the Hopf toolkit (product, shuffle coproduct, antipode) this
//! module carries the bridge to moulds (`ma`, its inverse, `dima`), the
//! Ihara-type operators (`D_ψ`, `s_φ`, `{ψ,φ}`, `exp^⊛`, `κ_ψ`, `⊛`) and the
//! harmonic side (`π_Y`, `φ_corr`, `φ_*`, `Δ_*`, `mi`, `mi-bar`, `Mini`, DMR).
//!
//! Letters are `u32`: `0` is `f_0`, `s + 1` is `f_σ` for the `s`-th label.
//! `Y`-words store the indices `k_i` of `Y_{k_1} ⋯ Y_{k_r}` directly.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mould::{Key, Mould, MouldError};
use crate::ratfun::{parse_rational, rational_to_string, rint, FamilyTag, LinForm, Poly, RatFun, RatFunError, Rational};
use crate::words::{Alphabet, AlphabetRef};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series is not annihilated by d0 (not dagger)")]
    NotDagger,
    #[error("constant term: {0}")]
    ConstantTerm(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("operation needs an abelian group law on the labels")]
    NeedsAbelianGroup,
    #[error("operation is defined for the one-letter label set only")]
    NeedsTrivialGamma,
    #[error("malformed series: {0}")]
    Malformed(String),
    #[error(transparent)]
    Mould(#[from] MouldError),
    #[error(transparent)]
    RatFun(#[from] RatFunError),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

type Terms = BTreeMap<Vec<u32>, Rational>;

/// How a word is graded: by length (letters `f`) or by weight (`Y_k` has weight `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Length,
    Weight,
}

impl Grading {
    fn of(self, w: &[u32]) -> usize {
        match self {
            Grading::Length => w.len(),
            Grading::Weight => w.iter().map(|&k| k as usize).sum(),
        }
    }
}

pub(crate) fn add_to<K: Ord>(t: &mut BTreeMap<K, Rational>, w: K, c: Rational) {
    if c.is_zero() {
        return;
    }
    match t.entry(w) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

fn unit_terms() -> Terms {
    Terms::from([(vec![], Rational::one())])
}

fn lin_comb(a: &Terms, b: &Terms, kb: &Rational) -> Terms {
    let mut t = a.clone();
    for (w, c) in b {
        add_to(&mut t, w.clone(), c * kb);
    }
    t
}

fn mul_terms(a: &Terms, b: &Terms, g: Grading, bound: usize) -> Terms {
    let mut t = Terms::new();
    for (wa, ca) in a {
        let da = g.of(wa);
        if da > bound {
            continue;
        }
        for (wb, cb) in b {
            if da + g.of(wb) > bound {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            add_to(&mut t, w, ca * cb);
        }
    }
    t
}

/// `exp(x)` for `x` without constant term; nilpotent modulo the bound.
fn exp_terms(x: &Terms, g: Grading, bound: usize) -> Terms {
    let mut total = unit_terms();
    let mut term = unit_terms();
    for k in 1..=bound {
        term = mul_terms(&term, x, g, bound);
        if term.is_empty() {
            break;
        }
        let inv_k = Rational::one() / rint(k as i64);
        term.values_mut().for_each(|c| *c *= &inv_k);
        total = lin_comb(&total, &term, &Rational::one());
    }
    total
}

/// `log(1 + y)` for a term map with constant term 1.
fn log_terms(x: &Terms, g: Grading, bound: usize) -> Terms {
    let mut y = x.clone();
    y.remove(&vec![]);
    let mut total = Terms::new();
    let mut p = unit_terms();
    for k in 1..=bound {
        p = mul_terms(&p, &y, g, bound);
        if p.is_empty() {
            break;
        }
        let sign = if k % 2 == 1 { rint(1) } else { rint(-1) };
        total = lin_comb(&total, &p, &(sign / rint(k as i64)));
    }
    total
}

fn truncate_terms(t: &Terms, g: Grading, bound: usize) -> Terms {
    t.iter().filter(|(w, _)| g.of(w) <= bound).map(|(w, c)| (w.clone(), c.clone())).collect()
}

// ---------------------------------------------------------------------------
// Tensor series
// ---------------------------------------------------------------------------

/// A truncated element of the tensor square, `Σ c (u ⊗ v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSeries {
    grading: Grading,
    bound: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Rational>,
}

impl TensorSeries {
    pub fn zero(grading: Grading, bound: usize) -> Self {
        TensorSeries { grading, bound, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, u: Vec<u32>, v: Vec<u32>, c: Rational) {
        if c.is_zero() || self.grading.of(&u) + self.grading.of(&v) > self.bound {
            return;
        }
        let key = (u, v);
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `a ⊗ b`, truncated at total grade `bound`.
    fn pure(a: &Terms, b: &Terms, grading: Grading, bound: usize) -> Self {
        let mut t = TensorSeries::zero(grading, bound);
        for (u, cu) in a {
            for (v, cv) in b {
                t.add_term(u.clone(), v.clone(), cu * cv);
            }
        }
        t
    }

    pub fn mul(&self, o: &TensorSeries) -> TensorSeries {
        let bound = self.bound.min(o.bound);
        let mut t = TensorSeries::zero(self.grading, bound);
        for ((u1, v1), c1) in &self.terms {
            for ((u2, v2), c2) in &o.terms {
                let mut u = u1.clone();
                u.extend_from_slice(u2);
                let mut v = v1.clone();
                v.extend_from_slice(v2);
                t.add_term(u, v, c1 * c2);
            }
        }
        t
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, u: &[u32], v: &[u32]) -> Rational {
        self.terms.get(&(u.to_vec(), v.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn restricted(&self, bound: usize) -> BTreeMap<(Vec<u32>, Vec<u32>), Rational> {
        self.terms
            .iter()
            .filter(|((u, v), _)| self.grading.of(u) + self.grading.of(v) <= bound)
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect()
    }

    /// Equality modulo the common truncation.
    pub fn agrees_with(&self, o: &TensorSeries) -> bool {
        let b = self.bound.min(o.bound);
        self.restricted(b) == o.restricted(b)
    }
}

// ---------------------------------------------------------------------------
// NCSeries
// ---------------------------------------------------------------------------

/// A series in `Q⟨⟨f_0, f_σ⟩⟩` truncated at total degree `max_degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCSeries {
    gamma: AlphabetRef,
    max_degree: usize,
    terms: Terms,
}

impl NCSeries {
    pub fn zero(gamma: AlphabetRef, max_degree: usize) -> Self {
        NCSeries { gamma, max_degree, terms: Terms::new() }
    }

    pub fn constant(gamma: AlphabetRef, max_degree: usize, c: Rational) -> Self {
        let mut s = NCSeries::zero(gamma, max_degree);
        s.add_term(vec![], c);
        s
    }

    pub fn one(gamma: AlphabetRef, max_degree: usize) -> Self {
        NCSeries::constant(gamma, max_degree, Rational::one())
    }

    /// A single word with coefficient 1.
    pub fn word(gamma: AlphabetRef, max_degree: usize, w: &[u32]) -> Self {
        let mut s = NCSeries::zero(gamma, max_degree);
        s.add_term(w.to_vec(), Rational::one());
        s
    }

    /// `f_0`.
    pub fn f0(gamma: AlphabetRef, max_degree: usize) -> Self {
        NCSeries::word(gamma, max_degree, &[0])
    }

    /// `f_σ` for the label index `s`.
    pub fn f(gamma: AlphabetRef, max_degree: usize, s: usize) -> Self {
        NCSeries::word(gamma, max_degree, &[s as u32 + 1])
    }

    pub fn from_terms(gamma: AlphabetRef, max_degree: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut s = NCSeries::zero(gamma, max_degree);
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s
    }

    fn with_terms(&self, terms: Terms) -> Self {
        NCSeries { gamma: self.gamma.clone(), max_degree: self.max_degree, terms }
    }

    pub fn gamma(&self) -> &AlphabetRef {
        &self.gamma
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of letters, `f_0` included.
    pub fn n_letters(&self) -> u32 {
        self.gamma.len() as u32 + 1
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `⟨h|w⟩`.
    pub fn coeff(&self, w: &[u32]) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&[])
    }

    /// Adds `c·w`; words beyond the truncation are dropped.
    pub fn add_term(&mut self, w: Vec<u32>, c: Rational) {
        debug_assert!(w.iter().all(|&l| l < self.n_letters()));
        if w.len() <= self.max_degree {
            add_to(&mut self.terms, w, c);
        }
    }

    /// Same series truncated at a lower degree.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.max_degree);
        NCSeries { gamma: self.gamma.clone(), max_degree: n, terms: truncate_terms(&self.terms, Grading::Length, n) }
    }

    /// Homogeneous part of degree `k`.
    pub fn homogeneous(&self, k: usize) -> Self {
        self.with_terms(self.terms.iter().filter(|(w, _)| w.len() == k).map(|(w, c)| (w.clone(), c.clone())).collect())
    }

    fn compat(&self, o: &NCSeries) -> Result<usize> {
        if self.gamma != o.gamma {
            return Err(SeriesError::AlphabetMismatch);
        }
        Ok(self.max_degree.min(o.max_degree))
    }

    /// Equality modulo the common truncation.
    pub fn agrees_with(&self, o: &NCSeries) -> bool {
        self.gamma == o.gamma && {
            let n = self.max_degree.min(o.max_degree);
            truncate_terms(&self.terms, Grading::Length, n) == truncate_terms(&o.terms, Grading::Length, n)
        }
    }

    // -- ring structure -----------------------------------------------------

    pub fn add(&self, o: &NCSeries) -> Result<NCSeries> {
        let n = self.compat(o)?;
        Ok(self.truncate(n).with_terms(lin_comb(
            &truncate_terms(&self.terms, Grading::Length, n),
            &truncate_terms(&o.terms, Grading::Length, n),
            &Rational::one(),
        )))
    }

    pub fn sub(&self, o: &NCSeries) -> Result<NCSeries> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> NCSeries {
        self.scale(&rint(-1))
    }

    pub fn scale(&self, k: &Rational) -> NCSeries {
        if k.is_zero() {
            return self.with_terms(Terms::new());
        }
        self.with_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect())
    }

    /// Concatenation product.
    pub fn mul(&self, o: &NCSeries) -> Result<NCSeries> {
        let n = self.compat(o)?;
        Ok(NCSeries { gamma: self.gamma.clone(), max_degree: n, terms: mul_terms(&self.terms, &o.terms, Grading::Length, n) })
    }

    pub fn pow(&self, k: usize) -> NCSeries {
        let mut acc = NCSeries::one(self.gamma.clone(), self.max_degree);
        for _ in 0..k {
            acc = acc.mul(self).expect("same alphabet");
        }
        acc
    }

    /// `[a, b] = ab − ba`.
    pub fn bracket(&self, o: &NCSeries) -> Result<NCSeries> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    /// `exp(h)` for `h` without constant term.
    pub fn exp(&self) -> Result<NCSeries> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::ConstantTerm("exp needs a zero constant term".into()));
        }
        Ok(self.with_terms(exp_terms(&self.terms, Grading::Length, self.max_degree)))
    }

    /// `log(h)` for `h` with constant term 1.
    pub fn log(&self) -> Result<NCSeries> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantTerm("log needs constant term 1".into()));
        }
        Ok(self.with_terms(log_terms(&self.terms, Grading::Length, self.max_degree)))
    }

    /// Multiplicative inverse (constant term must be nonzero).
    pub fn inverse(&self) -> Result<NCSeries> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(SeriesError::ConstantTerm("inverse needs a nonzero constant term".into()));
        }
        let ci = Rational::one() / &c;
        // h = c (1 + y)  ⇒  h⁻¹ = c⁻¹ Σ (−y)^k
        let mut y = self.scale(&ci).terms;
        y.remove(&vec![]);
        let n = self.max_degree;
        let mut total = unit_terms();
        let mut p = unit_terms();
        for k in 1..=n {
            p = mul_terms(&p, &y, Grading::Length, n);
            if p.is_empty() {
                break;
            }
            let sign = if k % 2 == 1 { rint(-1) } else { rint(1) };
            total = lin_comb(&total, &p, &sign);
        }
        Ok(self.with_terms(total).scale(&ci))
    }

    // -- Hopf structure -----------------------------------------------------

    /// Shuffle coproduct: every letter primitive.
    pub fn coproduct(&self) -> TensorSeries {
        let mut t = TensorSeries::zero(Grading::Length, self.max_degree);
        for (w, c) in &self.terms {
            let n = w.len();
            for mask in 0u32..(1 << n) {
                let (mut u, mut v) = (vec![], vec![]);
                for (i, &l) in w.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        u.push(l);
                    } else {
                        v.push(l);
                    }
                }
                t.add_term(u, v, c.clone());
            }
        }
        t
    }

    /// `h ⊗ g`, truncated at the smaller degree.
    pub fn tensor(&self, o: &NCSeries) -> TensorSeries {
        TensorSeries::pure(&self.terms, &o.terms, Grading::Length, self.max_degree.min(o.max_degree))
    }

    /// `S(a_1⋯a_m) = (−1)^m a_m⋯a_1`.
    pub fn antipode(&self) -> NCSeries {
        self.with_terms(
            self.terms
                .iter()
                .map(|(w, c)| {
                    let r: Vec<u32> = w.iter().rev().copied().collect();
                    (r, if w.len() % 2 == 1 { -c.clone() } else { c.clone() })
                })
                .collect(),
        )
    }

    /// `h(∅) = 1` and `Δh = h ⊗ h` modulo the truncation.
    pub fn is_group_like(&self) -> bool {
        self.constant_term().is_one() && self.coproduct().agrees_with(&self.tensor(self))
    }

    /// `Δh = h ⊗ 1 + 1 ⊗ h`.
    pub fn is_lie_like(&self) -> bool {
        let mut expect = TensorSeries::zero(Grading::Length, self.max_degree);
        for (w, c) in &self.terms {
            expect.add_term(w.clone(), vec![], c.clone());
            expect.add_term(vec![], w.clone(), c.clone());
        }
        self.coproduct().agrees_with(&expect)
    }

    /// The derivation `d_0`: `f_0 ↦ 1`, `f_σ ↦ 0`.
    pub fn d0(&self) -> NCSeries {
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            for i in 0..w.len() {
                if w[i] == 0 {
                    let mut u = w.clone();
                    u.remove(i);
                    add_to(&mut t, u, c.clone());
                }
            }
        }
        self.with_terms(t)
    }

    /// Membership in `ker d_0`.
    pub fn is_dagger(&self) -> bool {
        self.d0().is_zero()
    }

    // -- label action and Ihara-type operators ------------------------------

    fn require_abelian(&self) -> Result<()> {
        if !self.gamma.has_group() || !self.gamma.is_abelian() {
            return Err(SeriesError::NeedsAbelianGroup);
        }
        Ok(())
    }

    /// `t_σ`: `f_0 ↦ f_0`, `f_τ ↦ f_{στ}`.
    pub fn t_sigma(&self, s: usize) -> Result<NCSeries> {
        self.require_abelian()?;
        let g = &self.gamma;
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            let mut u = Vec::with_capacity(w.len());
            for &l in w {
                u.push(if l == 0 {
                    0
                } else {
                    g.mul(s, l as usize - 1).map_err(|e| SeriesError::Malformed(e.to_string()))? as u32 + 1
                });
            }
            add_to(&mut t, u, c.clone());
        }
        Ok(self.with_terms(t))
    }

    /// `D_ψ(φ)`: the derivation with `D(f_0) = 0`, `D(f_σ) = [t_σ(ψ), f_σ]`.
    pub fn d_psi(psi: &NCSeries, phi: &NCSeries) -> Result<NCSeries> {
        let n = phi.compat(psi)?;
        psi.require_abelian()?;
        let shifted: Vec<NCSeries> = (0..psi.gamma.len()).map(|s| psi.t_sigma(s)).collect::<Result<_>>()?;
        let mut t = Terms::new();
        for (w, c) in &phi.terms {
            for i in 0..w.len() {
                let l = w[i];
                if l == 0 {
                    continue;
                }
                let (pre, post) = (&w[..i], &w[i + 1..]);
                for (u, cu) in &shifted[l as usize - 1].terms {
                    if w.len() + u.len() > n {
                        continue;
                    }
                    let k = c * cu;
                    let mut a = pre.to_vec();
                    a.extend_from_slice(u);
                    a.push(l);
                    a.extend_from_slice(post);
                    add_to(&mut t, a, k.clone());
                    let mut b = pre.to_vec();
                    b.push(l);
                    b.extend_from_slice(u);
                    b.extend_from_slice(post);
                    add_to(&mut t, b, -k);
                }
            }
        }
        Ok(NCSeries { gamma: phi.gamma.clone(), max_degree: n, terms: t })
    }

    /// `s_φ(ψ) = ψφ + D_φ(ψ)`.
    pub fn s_phi(phi: &NCSeries, psi: &NCSeries) -> Result<NCSeries> {
        psi.mul(phi)?.add(&NCSeries::d_psi(phi, psi)?)
    }

    /// `{ψ, φ} = s_ψ(φ) − s_φ(ψ)`.
    pub fn ihara(psi: &NCSeries, phi: &NCSeries) -> Result<NCSeries> {
        NCSeries::s_phi(psi, phi)?.sub(&NCSeries::s_phi(phi, psi)?)
    }

    /// `exp^⊛(φ) = Σ_k s_φ^k(1)/k!`.
    pub fn exp_circledast(&self) -> Result<NCSeries> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::ConstantTerm("exp^⊛ needs a zero constant term".into()));
        }
        let mut term = NCSeries::one(self.gamma.clone(), self.max_degree);
        let mut total = term.clone();
        for k in 1..=self.max_degree {
            term = NCSeries::s_phi(self, &term)?.scale(&(Rational::one() / rint(k as i64)));
            if term.is_zero() {
                break;
            }
            total = total.add(&term)?;
        }
        Ok(total)
    }

    /// Algebra substitution `letter l ↦ images[l]`; the images may live over
    /// another label set (they must share it).
    pub fn substitute(&self, images: &[NCSeries]) -> Result<NCSeries> {
        if images.len() != self.n_letters() as usize {
            return Err(SeriesError::Malformed("one image per letter is required".into()));
        }
        let mut n = self.max_degree;
        let target = images.first().map_or(self.gamma.clone(), |im| im.gamma.clone());
        for im in images {
            if im.gamma != target {
                return Err(SeriesError::AlphabetMismatch);
            }
            n = n.min(im.max_degree);
        }
        let mut cache: HashMap<Vec<u32>, Terms> = HashMap::new();
        cache.insert(vec![], unit_terms());
        let mut total = Terms::new();
        for (w, c) in &self.terms {
            for i in 1..=w.len() {
                if !cache.contains_key(&w[..i]) {
                    let prev = &cache[&w[..i - 1]];
                    let p = mul_terms(prev, &images[w[i - 1] as usize].terms, Grading::Length, n);
                    cache.insert(w[..i].to_vec(), p);
                }
            }
            total = lin_comb(&total, &cache[&w[..]], c);
        }
        Ok(NCSeries { gamma: target, max_degree: n, terms: total })
    }

    /// `κ_ψ(φ) = φ(f_0, t_σ(ψ) f_σ t_σ(ψ)⁻¹)`.
    pub fn kappa(psi: &NCSeries, phi: &NCSeries) -> Result<NCSeries> {
        if !psi.constant_term().is_one() {
            return Err(SeriesError::ConstantTerm("κ_ψ needs ψ(∅) = 1".into()));
        }
        psi.require_abelian()?;
        let n = phi.compat(psi)?;
        let mut images = vec![NCSeries::f0(phi.gamma.clone(), n)];
        for s in 0..phi.gamma.len() {
            let t = psi.t_sigma(s)?;
            let f = NCSeries::f(phi.gamma.clone(), n, s);
            images.push(t.mul(&f)?.mul(&t.inverse()?)?);
        }
        phi.substitute(&images)
    }

    /// `ψ ⊛ φ = κ_ψ(φ) ψ`.
    pub fn circledast(psi: &NCSeries, phi: &NCSeries) -> Result<NCSeries> {
        NCSeries::kappa(psi, phi)?.mul(psi)
    }

    /// `ι_0 φ = φ(−f_0, f_σ)`.
    pub fn iota0(&self) -> NCSeries {
        self.with_terms(
            self.terms
                .iter()
                .map(|(w, c)| {
                    let odd = w.iter().filter(|&&l| l == 0).count() % 2 == 1;
                    (w.clone(), if odd { -c.clone() } else { c.clone() })
                })
                .collect(),
        )
    }

    // -- JSON -----------------------------------------------------------------

    fn letter_name(&self, l: u32) -> String {
        if l == 0 {
            "0".into()
        } else {
            self.gamma.symbol(l as usize - 1).to_string()
        }
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word: Vec<String> = w.iter().map(|&l| self.letter_name(l)).collect();
                json!({"word": word, "coeff": rational_to_string(c)})
            })
            .collect();
        json!({"gamma": self.gamma.name(), "max_degree": self.max_degree, "terms": terms})
    }

    pub fn from_json(v: &Value, strict: bool) -> Result<NCSeries> {
        let bad = |s: &str| SeriesError::Malformed(s.to_string());
        let gamma = v
            .get("gamma")
            .and_then(Value::as_str)
            .and_then(Alphabet::parse)
            .ok_or_else(|| bad("unknown gamma"))?;
        let n = v.get("max_degree").and_then(Value::as_u64).ok_or_else(|| bad("max_degree"))? as usize;
        let mut s = NCSeries::zero(gamma.into(), n);
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("terms"))? {
            let word = t.get("word").and_then(Value::as_array).ok_or_else(|| bad("word"))?;
            if word.len() > n {
                if strict {
                    return Err(bad("word longer than max_degree"));
                }
                continue;
            }
            let mut w = vec![];
            for l in word {
                let l = l.as_str().ok_or_else(|| bad("letter"))?;
                w.push(if l == "0" {
                    0
                } else {
                    s.gamma.index_of(l).ok_or_else(|| bad("unknown letter"))? as u32 + 1
                });
            }
            let c = parse_rational(t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff"))?, strict)?;
            if strict && (c.is_zero() || s.terms.contains_key(&w)) {
                return Err(bad("zero or repeated term"));
            }
            s.add_term(w, c);
        }
        Ok(s)
    }
}

impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                if w.is_empty() {
                    format!("{c}")
                } else {
                    let word: Vec<String> = w.iter().map(|&l| format!("f{}", self.letter_name(l))).collect();
                    format!("{c}*{}", word.join(""))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Lyndon words and random dagger series
// ---------------------------------------------------------------------------

/// Lyndon words over `n` letters of length `1..=max_len`, in lexicographic order.
pub fn lyndon_words(n: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![];
    if n == 0 || max_len == 0 {
        return out;
    }
    let mut w: Vec<u32> = vec![0];
    loop {
        out.push(w.clone());
        // Duval's successor: repeat w to length max_len, strip maximal letters, bump the last.
        let m = w.len();
        while w.len() < max_len {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&(n - 1)) {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(l) => *l += 1,
        }
    }
    out
}

fn is_lyndon(w: &[u32]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// The standard bracketing `P(w) = [P(u), P(v)]`, `v` the longest proper Lyndon suffix.
pub fn lyndon_bracket(gamma: AlphabetRef, max_degree: usize, w: &[u32]) -> NCSeries {
    fn rec(w: &[u32]) -> Terms {
        if w.len() == 1 {
            return Terms::from([(w.to_vec(), Rational::one())]);
        }
        let i = (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("single letters are Lyndon");
        let (u, v) = (rec(&w[..i]), rec(&w[i..]));
        let n = w.len();
        lin_comb(&mul_terms(&u, &v, Grading::Length, n), &mul_terms(&v, &u, Grading::Length, n), &rint(-1))
    }
    NCSeries::from_terms(gamma, max_degree, rec(w))
}

/// A random Lie element without `f_0`-linear term (hence dagger): each
/// Lyndon basis element of degree `1..=max_degree` appears with probability
/// `density` and an integer coefficient in `[-3, 3]`.
pub fn random_lie(gamma: AlphabetRef, max_degree: usize, density: f64, rng: &mut impl Rng) -> NCSeries {
    let n = gamma.len() as u32 + 1;
    let mut s = NCSeries::zero(gamma.clone(), max_degree);
    for w in lyndon_words(n, max_degree) {
        if w == [0] || !rng.gen_bool(density) {
            continue;
        }
        let c = rint(rng.gen_range(-3..=3));
        if c.is_zero() {
            continue;
        }
        s = s.add(&lyndon_bracket(gamma.clone(), max_degree, &w).scale(&c)).expect("same alphabet");
    }
    s
}

/// A random group-like dagger series `exp(L)`.
pub fn random_group_like(gamma: AlphabetRef, max_degree: usize, rng: &mut impl Rng) -> NCSeries {
    random_lie(gamma, max_degree, 0.5, rng).exp().expect("Lie elements have no constant term")
}

/// A random dagger series `c + L_1 + L_2 L_3` (dagger series form an algebra).
pub fn random_dagger(gamma: AlphabetRef, max_degree: usize, rng: &mut impl Rng) -> NCSeries {
    let c = NCSeries::constant(gamma.clone(), max_degree, rint(rng.gen_range(-2..=2)));
    let l1 = random_lie(gamma.clone(), max_degree, 0.4, rng);
    let l2 = random_lie(gamma.clone(), max_degree, 0.3, rng);
    let l3 = random_lie(gamma, max_degree, 0.3, rng);
    c.add(&l1).and_then(|s| s.add(&l2.mul(&l3)?)).expect("same alphabet")
}

// ---------------------------------------------------------------------------
// ma and friends
// ---------------------------------------------------------------------------

/// Splits `f_{σ_1} f_0^{k_1} ⋯ f_{σ_r} f_0^{k_r}` into labels and exponents.
/// Returns `None` for words starting with `f_0`.
fn split_word(w: &[u32]) -> Option<(Vec<usize>, Vec<u32>)> {
    if w.first() == Some(&0) {
        return None;
    }
    let (mut labels, mut exps) = (vec![], vec![]);
    for &l in w {
        if l == 0 {
            *exps.last_mut().expect("word starts with a label") += 1;
        } else {
            labels.push(l as usize - 1);
            exps.push(0);
        }
    }
    Some((labels, exps))
}

/// `Π_i (x_1+⋯+x_i)^{k_i}` with memoized powers.
fn partial_sum_monomial(exps: &[u32], cache: &mut HashMap<(usize, usize, u32), Poly>) -> Poly {
    let r = exps.len();
    let mut p = Poly::one(r);
    for (i, &k) in exps.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let f = cache.entry((r, i, k)).or_insert_with(|| LinForm::range_sum(0, i + 1, r).to_poly().pow(k));
        p = p.mul(f);
    }
    p
}

/// Word-wise `ma`, dropping words that start with `f_0`.
fn ma_terms(terms: &Terms, cache: &mut HashMap<(usize, usize, u32), Poly>) -> BTreeMap<Vec<usize>, Poly> {
    let mut comps: BTreeMap<Vec<usize>, Poly> = BTreeMap::new();
    for (w, c) in terms {
        let Some((labels, exps)) = split_word(w) else { continue };
        let r = labels.len();
        let mono = partial_sum_monomial(&exps, cache).scale(c);
        comps.entry(labels).or_insert_with(|| Poly::zero(r)).add_assign(&mono);
    }
    comps
}

/// `ma(h)`: the length-`r` component at labels `σ` is
/// `Σ ⟨h | f_{σ_1} f_0^{k_1} ⋯ f_{σ_r} f_0^{k_r}⟩ Π (x_1+⋯+x_i)^{k_i}`.
pub fn ma(h: &NCSeries) -> Result<Mould> {
    if !h.is_dagger() {
        return Err(SeriesError::NotDagger);
    }
    ma_unchecked(h)
}

/// `ma` without the dagger check (words starting with `f_0` are ignored).
pub fn ma_unchecked(h: &NCSeries) -> Result<Mould> {
    let n = h.max_degree;
    let mut m = Mould::zero(FamilyTag::TruncSer(n as u32), vec![h.gamma.clone()], n);
    for (labels, p) in ma_terms(&h.terms, &mut HashMap::new()) {
        m.set(Key::one(labels), RatFun::from_poly(p))?;
    }
    Ok(m)
}

/// Inverse of `ma`: rebuilds `vimo(z_0, …, z_r) = M(z_1 − z_0, …, z_r − z_{r−1})`
/// and reads off its coefficients.
pub fn ma_inverse(m: &Mould) -> Result<NCSeries> {
    if m.nblocks() != 1 {
        return Err(SeriesError::Malformed("ma⁻¹ needs a one-block mould".into()));
    }
    let n = match m.family() {
        FamilyTag::TruncSer(n) => n as usize,
        _ => m.max_length(),
    };
    let mut s = NCSeries::zero(m.gamma().clone(), n);
    for (key, f) in m.components() {
        let r = key.len();
        let p = f.as_poly().ok_or_else(|| SeriesError::Malformed("component with a denominator".into()))?;
        if p.total_degree().is_some_and(|d| d as usize + r > n) {
            return Err(SeriesError::Malformed("component exceeds the degree bound".into()));
        }
        let forms: Vec<LinForm> = (1..=r)
            .map(|i| LinForm::var(i, r + 1).sub(&LinForm::var(i - 1, r + 1)))
            .collect();
        let vimo = p.substitute_linear(&forms, r + 1);
        for (e, c) in vimo.terms() {
            let mut w = vec![0; e[0] as usize];
            for i in 0..r {
                w.push(key.labels[i] as u32 + 1);
                w.extend(std::iter::repeat(0).take(e[i + 1] as usize));
            }
            s.add_term(w, c.clone());
        }
    }
    Ok(s)
}

/// Coefficients of a tensor of series: one word per tensor slot.
pub type MultiTerms = BTreeMap<Vec<Vec<u32>>, Rational>;

/// `ma` applied slot-wise to a tensor of series, giving a polymould whose
/// blocks are the given alphabets. Tuples with an `f_0`-initial slot are dropped.
pub fn ma_multi(terms: &MultiTerms, gammas: Vec<AlphabetRef>, bound: usize) -> Result<Mould> {
    let mut m = Mould::zero(FamilyTag::TruncSer(bound as u32), gammas.clone(), bound);
    let mut cache = HashMap::new();
    let mut acc: BTreeMap<Key, Poly> = BTreeMap::new();
    'outer: for (ws, c) in terms {
        if ws.len() != gammas.len() {
            return Err(SeriesError::Malformed("tensor arity does not match the block count".into()));
        }
        let mut shape = vec![];
        let mut labels = vec![];
        let mut parts = vec![];
        for w in ws {
            let Some((l, e)) = split_word(w) else { continue 'outer };
            shape.push(l.len());
            labels.extend(l);
            parts.push(e);
        }
        let d = labels.len();
        let mut mono = Poly::constant(c.clone(), d);
        let mut off = 0;
        for e in &parts {
            mono = mono.mul(&partial_sum_monomial(e, &mut cache).embed(off, d));
            off += e.len();
        }
        acc.entry(Key::new(shape, labels)).or_insert_with(|| Poly::zero(d)).add_assign(&mono);
    }
    for (k, v) in acc {
        m.set(k, RatFun::from_poly(v))?;
    }
    Ok(m)
}

/// Inverse of [`ma_multi`]: per-block `vimo` reconstruction.
pub fn ma_multi_inverse(m: &Mould) -> Result<MultiTerms> {
    let bound = match m.family() {
        FamilyTag::TruncSer(n) => n as usize,
        _ => m.max_length(),
    };
    let nb = m.nblocks();
    let mut out = MultiTerms::new();
    for (key, f) in m.components() {
        let p = f.as_poly().ok_or_else(|| SeriesError::Malformed("component with a denominator".into()))?;
        let r = key.len();
        if p.total_degree().is_some_and(|d| d as usize + r > bound) {
            return Err(SeriesError::Malformed("component exceeds the degree bound".into()));
        }
        // block b owns fresh variables z^b_0..z^b_{r_b}
        let nv = r + nb;
        let mut forms = vec![];
        let mut zoff = vec![];
        let mut z = 0;
        for &rb in &key.shape {
            zoff.push(z);
            for i in 1..=rb {
                forms.push(LinForm::var(z + i, nv).sub(&LinForm::var(z + i - 1, nv)));
            }
            z += rb + 1;
        }
        let vimo = p.substitute_linear(&forms, nv);
        for (e, c) in vimo.terms() {
            let mut ws = vec![];
            let mut lab = 0;
            for (b, &rb) in key.shape.iter().enumerate() {
                let z0 = zoff[b];
                let mut w = vec![0; e[z0] as usize];
                for i in 0..rb {
                    w.push(key.labels[lab] as u32 + 1);
                    lab += 1;
                    w.extend(std::iter::repeat(0).take(e[z0 + i + 1] as usize));
                }
                ws.push(w);
            }
            add_to(&mut out, ws, c.clone());
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// `dima` on a tensor series: `u ⊗ v ↦ ma(u) ⊗ ma(v)` word-wise, a
/// dimould over `(Γ, Γ)`.
pub fn dima(t: &TensorSeries, gamma: AlphabetRef) -> Result<Mould> {
    let terms: MultiTerms = t.terms.iter().map(|((u, v), c)| (vec![u.clone(), v.clone()], c.clone())).collect();
    ma_multi(&terms, vec![gamma.clone(), gamma], t.bound)
}

// ---------------------------------------------------------------------------
// Harmonic side (Γ trivial)
// ---------------------------------------------------------------------------

/// A series in `Q⟨⟨Y_1, Y_2, …⟩⟩` truncated at weight `max_weight`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YSeries {
    max_weight: usize,
    terms: Terms,
}

impl YSeries {
    pub fn zero(max_weight: usize) -> Self {
        YSeries { max_weight, terms: Terms::new() }
    }

    pub fn one(max_weight: usize) -> Self {
        YSeries { max_weight, terms: unit_terms() }
    }

    /// `Y_k`.
    pub fn y(k: u32, max_weight: usize) -> Self {
        let mut s = YSeries::zero(max_weight);
        s.add_term(vec![k], Rational::one());
        s
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    /// `⟨Φ | k_1, …, k_r⟩`.
    pub fn coeff(&self, w: &[u32]) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, w: Vec<u32>, c: Rational) {
        assert!(w.iter().all(|&k| k >= 1), "Y-indices start at 1");
        if Grading::Weight.of(&w) <= self.max_weight {
            add_to(&mut self.terms, w, c);
        }
    }

    pub fn add(&self, o: &YSeries) -> YSeries {
        let n = self.max_weight.min(o.max_weight);
        YSeries {
            max_weight: n,
            terms: truncate_terms(&lin_comb(&self.terms, &o.terms, &Rational::one()), Grading::Weight, n),
        }
    }

    pub fn scale(&self, k: &Rational) -> YSeries {
        YSeries { max_weight: self.max_weight, terms: lin_comb(&Terms::new(), &self.terms, k) }
    }

    pub fn mul(&self, o: &YSeries) -> YSeries {
        let n = self.max_weight.min(o.max_weight);
        YSeries { max_weight: n, terms: mul_terms(&self.terms, &o.terms, Grading::Weight, n) }
    }

    pub fn exp(&self) -> Result<YSeries> {
        if !self.coeff(&[]).is_zero() {
            return Err(SeriesError::ConstantTerm("exp needs a zero constant term".into()));
        }
        Ok(YSeries { max_weight: self.max_weight, terms: exp_terms(&self.terms, Grading::Weight, self.max_weight) })
    }

    pub fn log(&self) -> Result<YSeries> {
        if !self.coeff(&[]).is_one() {
            return Err(SeriesError::ConstantTerm("log needs constant term 1".into()));
        }
        Ok(YSeries { max_weight: self.max_weight, terms: log_terms(&self.terms, Grading::Weight, self.max_weight) })
    }

    pub fn sub(&self, o: &YSeries) -> YSeries {
        self.add(&o.scale(&rint(-1)))
    }

    pub fn bracket(&self, o: &YSeries) -> YSeries {
        self.mul(o).sub(&o.mul(self))
    }

    /// The weight-`k` part.
    pub fn homogeneous(&self, k: usize) -> YSeries {
        let terms = self.terms.iter().filter(|(w, _)| Grading::Weight.of(w) == k).map(|(w, c)| (w.clone(), c.clone())).collect();
        YSeries { max_weight: self.max_weight, terms }
    }

    /// `Φ ⊗ Ψ`.
    pub fn tensor(&self, o: &YSeries) -> TensorSeries {
        TensorSeries::pure(&self.terms, &o.terms, Grading::Weight, self.max_weight.min(o.max_weight))
    }

    /// The harmonic coproduct, multiplicative with
    /// `Δ_*(Y_n) = Y_n⊗1 + 1⊗Y_n + Σ_{i+j=n} Y_i⊗Y_j`.
    pub fn delta_star(&self) -> TensorSeries {
        let n = self.max_weight;
        let letter = |k: u32| {
            let mut t = TensorSeries::zero(Grading::Weight, n);
            t.add_term(vec![k], vec![], Rational::one());
            t.add_term(vec![], vec![k], Rational::one());
            for i in 1..k {
                t.add_term(vec![i], vec![k - i], Rational::one());
            }
            t
        };
        let mut total = TensorSeries::zero(Grading::Weight, n);
        let mut cache: HashMap<Vec<u32>, TensorSeries> = HashMap::new();
        let mut unit = TensorSeries::zero(Grading::Weight, n);
        unit.add_term(vec![], vec![], Rational::one());
        cache.insert(vec![], unit);
        for (w, c) in &self.terms {
            for i in 1..=w.len() {
                if !cache.contains_key(&w[..i]) {
                    let p = cache[&w[..i - 1]].mul(&letter(w[i - 1]));
                    cache.insert(w[..i].to_vec(), p);
                }
            }
            for ((u, v), cu) in &cache[&w[..]].terms {
                total.add_term(u.clone(), v.clone(), cu * c);
            }
        }
        total
    }

    /// `Δ_*Φ = Φ ⊗ Φ` with `Φ(∅) = 1`.
    pub fn is_harmonic_group_like(&self) -> bool {
        self.coeff(&[]).is_one() && self.delta_star().agrees_with(&self.tensor(self))
    }
}

fn require_trivial(h: &NCSeries) -> Result<()> {
    if h.gamma.len() != 1 {
        return Err(SeriesError::NeedsTrivialGamma);
    }
    Ok(())
}

/// `π_Y`: `f_1 f_0^{k_1−1} ⋯ f_1 f_0^{k_r−1} ↦ Y_{k_1}⋯Y_{k_r}`, `1 ↦ 1`,
/// words starting with `f_0` ↦ 0.
pub fn pi_y(h: &NCSeries) -> Result<YSeries> {
    require_trivial(h)?;
    let mut y = YSeries::zero(h.max_degree);
    for (w, c) in &h.terms {
        if w.first() == Some(&0) {
            continue;
        }
        let mut ks: Vec<u32> = vec![];
        for &l in w {
            if l == 0 {
                *ks.last_mut().expect("word starts with f1") += 1;
            } else {
                ks.push(1);
            }
        }
        y.add_term(ks, c.clone());
    }
    Ok(y)
}

/// `⟨h | f_1 f_0^{k−1}⟩`.
pub fn depth_one_coeff(h: &NCSeries, k: usize) -> Rational {
    let mut w = vec![1];
    w.extend(std::iter::repeat(0).take(k - 1));
    h.coeff(&w)
}

/// `⟨h | f_1 f_0⟩`.
pub fn coeff_f1f0(h: &NCSeries) -> Rational {
    h.coeff(&[1, 0])
}

/// `⟨h | f_0 f_1⟩`.
pub fn coeff_f0f1(h: &NCSeries) -> Rational {
    h.coeff(&[0, 1])
}

/// `ζ_φ(k) = −⟨φ | f_1 f_0^{k−1}⟩`.
pub fn zeta_phi(h: &NCSeries, k: usize) -> Rational {
    -depth_one_coeff(h, k)
}

/// Sign convention for the depth-one correction `exp(Σ_k ε_k ⟨φ|f_1f_0^{k−1}⟩/k · t^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    /// `ε_k = (−1)^{k−1}`: the sign for which `φ_*` of an associator is
    /// `Δ_*`-group-like (see `is_dmr`).
    #[default]
    Harmonic,
    /// `ε_k = (−1)^k`.
    Alternating,
}

impl Correction {
    fn sign(self, k: usize) -> Rational {
        let odd = k % 2 == 1;
        match (self, odd) {
            (Correction::Harmonic, true) | (Correction::Alternating, false) => rint(1),
            _ => rint(-1),
        }
    }
}

/// `log` of the correction as a polynomial in `t`: coefficients for `k = 2..=n`.
fn correction_log(h: &NCSeries, conv: Correction) -> Vec<(usize, Rational)> {
    (2..=h.max_degree).map(|k| (k, conv.sign(k) * depth_one_coeff(h, k) / rint(k as i64))).collect()
}

/// `φ_corr = exp(Σ_{k≥2} ε_k ⟨φ|f_1f_0^{k−1}⟩/k · Y_1^k)`.
pub fn phi_corr_with(h: &NCSeries, conv: Correction) -> Result<YSeries> {
    require_trivial(h)?;
    let n = h.max_degree;
    let mut l = YSeries::zero(n);
    for (k, c) in correction_log(h, conv) {
        l.add_term(vec![1; k], c);
    }
    l.exp()
}

pub fn phi_corr(h: &NCSeries) -> Result<YSeries> {
    phi_corr_with(h, Correction::default())
}

/// `φ_* = π_Y(φ) · φ_corr`.
pub fn phi_star_with(h: &NCSeries, conv: Correction) -> Result<YSeries> {
    Ok(pi_y(h)?.mul(&phi_corr_with(h, conv)?))
}

pub fn phi_star(h: &NCSeries) -> Result<YSeries> {
    phi_star_with(h, Correction::default())
}

/// The constant mould `Mini_φ`: its length-`r` value is the `t^r`
/// coefficient of the depth-one correction.
pub fn mini_with(h: &NCSeries, conv: Correction) -> Result<Mould> {
    require_trivial(h)?;
    let n = h.max_degree;
    let mut l = YSeries::zero(n);
    for (k, c) in correction_log(h, conv) {
        l.add_term(vec![1; k], c);
    }
    let e = l.exp()?;
    Ok(Mould::constant_fn(FamilyTag::TruncSer(n as u32), vec![h.gamma.clone()], n, |k| e.coeff(&vec![1; k.len()])))
}

pub fn mini(h: &NCSeries) -> Result<Mould> {
    mini_with(h, Correction::default())
}

/// `x_1^{e_1} ⋯ x_d^{e_d}` as a polynomial.
fn monomial(exps: Vec<u32>) -> Poly {
    let d = exps.len();
    Poly::from_terms(d, [(exps, Rational::one())])
}

/// `mi(φ)(x_1..x_r) = vimo(0, x_r, …, x_1)`.
pub fn mi(h: &NCSeries) -> Result<Mould> {
    require_trivial(h)?;
    if !h.is_dagger() {
        return Err(SeriesError::NotDagger);
    }
    let n = h.max_degree;
    let mut comps: BTreeMap<usize, Poly> = BTreeMap::new();
    for (w, c) in &h.terms {
        let Some((_, mut exps)) = split_word(w) else { continue };
        exps.reverse();
        let r = exps.len();
        comps.entry(r).or_insert_with(|| Poly::zero(r)).add_assign(&monomial(exps).scale(c));
    }
    let mut m = Mould::zero(FamilyTag::TruncSer(n as u32), vec![h.gamma.clone()], n);
    for (r, p) in comps {
        m.set1(vec![0; r], RatFun::from_poly(p))?;
    }
    Ok(m)
}

/// `mi-bar(Φ)(x_1..x_r) = Σ ⟨Φ|k_1..k_r⟩ x_1^{k_r−1} ⋯ x_r^{k_1−1}`.
pub fn mi_bar(y: &YSeries) -> Result<Mould> {
    let n = y.max_weight;
    let mut comps: BTreeMap<usize, Poly> = BTreeMap::new();
    for (w, c) in &y.terms {
        let exps: Vec<u32> = w.iter().rev().map(|&k| k - 1).collect();
        let r = exps.len();
        comps.entry(r).or_insert_with(|| Poly::zero(r)).add_assign(&monomial(exps).scale(c));
    }
    let mut m = Mould::zero(FamilyTag::TruncSer(n as u32), vec![AlphabetRef::new(Alphabet::trivial())], n);
    for (r, p) in comps {
        m.set1(vec![0; r], RatFun::from_poly(p))?;
    }
    Ok(m)
}

/// `dimi-bar` on a weight-graded tensor series: `mi-bar ⊗ mi-bar` word-wise.
pub fn dimi_bar(t: &TensorSeries) -> Result<Mould> {
    if t.grading != Grading::Weight {
        return Err(SeriesError::Malformed("dimi-bar needs a Y-tensor".into()));
    }
    let n = t.bound;
    let one = AlphabetRef::new(Alphabet::trivial());
    let mut m = Mould::zero(FamilyTag::TruncSer(n as u32), vec![one.clone(), one], n);
    let mut acc: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
    for ((u, v), c) in &t.terms {
        let (p, q) = (u.len(), v.len());
        let mut exps: Vec<u32> = u.iter().rev().map(|&k| k - 1).collect();
        exps.extend(v.iter().rev().map(|&k| k - 1));
        acc.entry((p, q)).or_insert_with(|| Poly::zero(p + q)).add_assign(&monomial(exps).scale(c));
    }
    for ((p, q), poly) in acc {
        m.set(Key::new(vec![p, q], vec![0; p + q]), RatFun::from_poly(poly))?;
    }
    Ok(m)
}

/// The individual DMR conditions, in order: constant term 1, group-like,
/// `Δ_*(φ_*) = φ_* ⊗ φ_*`, `⟨φ|f_0⟩ = ⟨φ|f_1⟩ = 0`, and (for `DMR_0`) `⟨φ|f_1f_0⟩ = 0`.
pub fn dmr_conditions(h: &NCSeries) -> Result<[(&'static str, bool); 5]> {
    require_trivial(h)?;
    Ok([
        ("constant term 1", h.constant_term().is_one()),
        ("group-like", h.is_group_like()),
        ("harmonic group-like", phi_star(h)?.is_harmonic_group_like()),
        ("no linear terms", h.coeff(&[0]).is_zero() && h.coeff(&[1]).is_zero()),
        ("f1f0 coefficient zero", coeff_f1f0(h).is_zero()),
    ])
}

/// A dagger series whose `φ_*` is `Δ_*`-group-like by construction: a random
/// group-like `Φ = exp(L)` with `L` a Lie combination of the primitives
/// `p_n` (the weight-`n` parts of `log(1 + Σ_k Y_k)`), pulled back through
/// `π_Y(φ) = Φ · φ_corr⁻¹` and `swap∘ma = mi-bar∘π_Y`.
pub fn harmonic_witness(max_weight: usize, rng: &mut impl Rng) -> Result<NCSeries> {
    let n = max_weight;
    let mut y = YSeries::one(n);
    for k in 1..=n as u32 {
        y.add_term(vec![k], Rational::one());
    }
    let l = y.log()?;
    let p: Vec<YSeries> = (1..=n).map(|k| l.homogeneous(k)).collect();
    let mut lie = YSeries::zero(n);
    for pk in &p {
        lie = lie.add(&pk.scale(&rint(rng.gen_range(-2..=2))));
    }
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if i + j + 2 <= n && rng.gen_bool(0.5) {
                lie = lie.add(&p[i].bracket(&p[j]).scale(&rint(rng.gen_range(-2..=2))));
            }
        }
    }
    let big_phi = lie.exp()?;
    let mut corr_log = YSeries::zero(n);
    for k in 2..=n {
        let c = Correction::default().sign(k) * big_phi.coeff(&[k as u32]) / rint(k as i64);
        corr_log.add_term(vec![1; k], -c);
    }
    let psi = big_phi.mul(&corr_log.exp()?);
    let m = mi_bar(&psi)?.unswap()?;
    ma_inverse(&m)
}

/// Membership in `DMR` modulo the truncation degree.
pub fn is_dmr(h: &NCSeries) -> Result<bool> {
    Ok(dmr_conditions(h)?[..4].iter().all(|c| c.1))
}

/// Membership in `DMR_0` modulo the truncation degree.
pub fn is_dmr0(h: &NCSeries) -> Result<bool> {
    Ok(dmr_conditions(h)?.iter().all(|c| c.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn triv() -> AlphabetRef {
        Arc::new(Alphabet::trivial())
    }

    fn w(g: &AlphabetRef, n: usize, word: &[u32]) -> NCSeries {
        NCSeries::word(g.clone(), n, word)
    }

    #[test]
    fn hopf_examples() {
        let g = triv();
        let f1 = w(&g, 4, &[1]);
        let mut expect = TensorSeries::zero(Grading::Length, 4);
        expect.add_term(vec![1], vec![], rint(1));
        expect.add_term(vec![], vec![1], rint(1));
        assert_eq!(f1.coproduct(), expect);
        assert!(f1.exp().unwrap().is_group_like());
        assert!(f1.is_lie_like());
        assert_eq!(w(&g, 4, &[0, 1]).antipode(), w(&g, 4, &[1, 0]));
        let e = f1.exp().unwrap();
        assert_eq!(e.log().unwrap(), f1);
        assert_eq!(e.mul(&e.inverse().unwrap()).unwrap(), NCSeries::one(g, 4));
    }

    #[test]
    fn dagger_examples() {
        let g = triv();
        assert!(NCSeries::one(g.clone(), 3).is_dagger());
        assert!(w(&g, 3, &[1]).is_dagger());
        assert!(!w(&g, 3, &[0, 0]).is_dagger());
        assert!(w(&g, 3, &[1]).bracket(&w(&g, 3, &[0])).unwrap().is_dagger());
    }

    #[test]
    fn lyndon_counts() {
        // necklace-polynomial counts for two letters: 2, 1, 2, 3, 6
        let ws = lyndon_words(2, 5);
        let counts: Vec<usize> = (1..=5).map(|k| ws.iter().filter(|w| w.len() == k).count()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6]);
        assert_eq!(lyndon_words(3, 2).len(), 3 + 3);
        let p = lyndon_bracket(triv(), 3, &[0, 0, 1]);
        assert!(p.is_lie_like());
    }

    #[test]
    fn ma_examples() {
        let g = triv();
        let one = NCSeries::one(g.clone(), 4);
        assert_eq!(ma(&one).unwrap(), Mould::unit1(FamilyTag::TruncSer(4), g.clone(), 4));
        let m1 = ma(&w(&g, 4, &[1])).unwrap();
        assert_eq!(m1.get1(&[0]), RatFun::one(1));
        assert_eq!(m1.components().count(), 1);
        let br = w(&g, 4, &[1]).bracket(&w(&g, 4, &[0])).unwrap();
        let mb = ma(&br).unwrap();
        assert_eq!(mb.get1(&[0]), RatFun::var(0, 1));
        let mut x1 = Mould::zero1(FamilyTag::TruncSer(4), g.clone(), 4);
        x1.set1(vec![0], RatFun::var(0, 1)).unwrap();
        assert_eq!(ma_inverse(&x1).unwrap(), br);
        assert!(ma(&w(&g, 4, &[0])).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let h = random_dagger(g.clone(), 5, &mut rng);
            assert!(h.is_dagger());
            assert_eq!(ma_inverse(&ma(&h).unwrap()).unwrap(), h);
        }
    }

    #[test]
    fn ihara_examples() {
        let g = triv();
        let f1 = w(&g, 4, &[1]);
        assert!(NCSeries::d_psi(&f1, &w(&g, 4, &[0, 0, 0])).unwrap().is_zero());
        assert!(NCSeries::d_psi(&f1, &f1).unwrap().is_zero());
        let a = f1.scale(&rat(3, 2));
        assert_eq!(a.exp_circledast().unwrap(), a.exp().unwrap());
        assert_eq!(NCSeries::zero(g.clone(), 4).exp_circledast().unwrap(), NCSeries::one(g.clone(), 4));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_group_like(g.clone(), 4, &mut rng);
        let one = NCSeries::one(g, 4);
        assert_eq!(NCSeries::circledast(&psi, &one).unwrap(), psi);
        assert_eq!(NCSeries::circledast(&one, &psi).unwrap(), psi);
    }

    #[test]
    fn harmonic_examples() {
        let g = triv();
        assert_eq!(pi_y(&w(&g, 3, &[1, 0])).unwrap(), YSeries::y(2, 3));
        let d = YSeries::y(2, 3).delta_star();
        let mut expect = TensorSeries::zero(Grading::Weight, 3);
        expect.add_term(vec![2], vec![], rint(1));
        expect.add_term(vec![], vec![2], rint(1));
        expect.add_term(vec![1], vec![1], rint(1));
        assert_eq!(d, expect);
        let mut y = YSeries::zero(6);
        y.add_term(vec![2, 3], rint(1));
        let m = mi_bar(&y).unwrap();
        let x = |i| RatFun::var(i, 2);
        assert_eq!(m.get1(&[0, 0]), &(&x(0) * &x(0)) * &x(1));
        assert!(is_dmr0(&NCSeries::one(g.clone(), 4)).unwrap());
        assert!(!is_dmr(&w(&g, 4, &[1]).exp().unwrap()).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let g: AlphabetRef = Arc::new(Alphabet::cyclic(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_dagger(g, 4, &mut rng);
        assert_eq!(NCSeries::from_json(&h.to_json(), true).unwrap(), h);
    }
}
