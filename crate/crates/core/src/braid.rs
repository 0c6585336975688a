//! Degree-truncated infinitesimal braid algebras `U t_n`.
//!
//! Generators `t_ij` (`0 ≤ i < j < n`) are ordered by column `j`, then by
//! row `i`. A commutator of a lower-column generator with a higher-column one
//! is a commutator of two generators of the higher column:
//!
//! ```text
//! [t_ij, t_ib] = [t_ib, t_jb],   [t_ij, t_jb] = [t_jb, t_ib],   [t_ij, t_kb] = 0 otherwise
//! ```
//!
//! so every word rewrites to a combination of words whose columns are
//! non-decreasing, and those words form a basis (`U t_n ≅ U f_1 ⊗ ⋯ ⊗ U f_{n-1}`
//! as vector spaces). `dec` is then a relabelling of the normal form.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg;
use crate::mould::{Mould, MouldError};
use crate::ncseries::{add_to, lyndon_bracket, lyndon_words, ma_multi, ma_multi_inverse, MultiTerms, NCSeries, SeriesError};
use crate::ratfun::{rational_to_string, rint, Rational};
use crate::words::{Alphabet, AlphabetRef};

#[derive(Debug, Error)]
pub enum BraidError {
    #[error("t_n is supported for 3 ≤ n ≤ 5, got n = {0}")]
    UnsupportedN(usize),
    #[error("degree {0} exceeds the algebra bound {1}")]
    DegreeOverflow(usize, usize),
    #[error("index sets overlap or leave {{0..n-1}}")]
    BadSubsets,
    #[error("element is not in the dagger subspace")]
    NotDagger,
    #[error("elements live in different algebras")]
    AlgebraMismatch,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("the lower part does not satisfy the pentagon below degree {0}")]
    Inconsistent(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Mould(#[from] MouldError),
}

pub type Result<T> = std::result::Result<T, BraidError>;

type Gen = u8;
type Terms = BTreeMap<Vec<Gen>, Rational>;

/// `U t_n` truncated at total degree `max_degree`. Normal forms are memoized
/// per word; the table is behind a mutex so the algebra can be shared.
#[derive(Debug)]
pub struct BraidAlgebra {
    n: usize,
    max_degree: usize,
    gens: Vec<(usize, usize)>,
    memo: Mutex<HashMap<Vec<Gen>, Terms>>,
}

impl BraidAlgebra {
    pub fn new(n: usize, max_degree: usize) -> Result<Arc<Self>> {
        if !(3..=5).contains(&n) {
            return Err(BraidError::UnsupportedN(n));
        }
        let gens = (1..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        Ok(Arc::new(BraidAlgebra { n, max_degree, gens, memo: Mutex::new(HashMap::new()) }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn generators(&self) -> &[(usize, usize)] {
        &self.gens
    }

    /// Index of `t_ij` (`t_ji` is the same generator).
    pub fn gen_index(&self, i: usize, j: usize) -> Option<Gen> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j >= self.n {
            return None;
        }
        Some((j * (j - 1) / 2 + i) as Gen)
    }

    fn col(&self, g: Gen) -> usize {
        self.gens[g as usize].1
    }

    fn is_normal(&self, w: &[Gen]) -> bool {
        w.windows(2).all(|p| self.col(p[0]) <= self.col(p[1]))
    }

    /// The normal form of a word in the generators.
    fn normal_word(&self, w: &[Gen]) -> Terms {
        if self.is_normal(w) {
            return Terms::from([(w.to_vec(), Rational::one())]);
        }
        if let Some(t) = self.memo.lock().expect("memo poisoned").get(w) {
            return t.clone();
        }
        let p = (0..w.len() - 1).find(|&p| self.col(w[p]) > self.col(w[p + 1])).expect("not normal");
        let (x, y) = (w[p], w[p + 1]);
        let (i, j) = self.gens[y as usize];
        let (k, b) = self.gens[x as usize];
        let mut out = Terms::new();
        let push = |u: &[Gen], c: Rational, out: &mut Terms| {
            let mut v = w[..p].to_vec();
            v.extend_from_slice(u);
            v.extend_from_slice(&w[p + 2..]);
            for (nw, nc) in self.normal_word(&v) {
                add_to(out, nw, nc * &c);
            }
        };
        // x y = y x + [x, y]
        push(&[y, x], Rational::one(), &mut out);
        let comm = if k == i {
            Some((self.gen_index(j, b), self.gen_index(i, b)))
        } else if k == j {
            Some((self.gen_index(i, b), self.gen_index(j, b)))
        } else {
            None
        };
        if let Some((Some(u), Some(v))) = comm {
            push(&[u, v], Rational::one(), &mut out);
            push(&[v, u], -Rational::one(), &mut out);
        }
        self.memo.lock().expect("memo poisoned").insert(w.to_vec(), out.clone());
        out
    }

    /// The normal-form basis of the degree-`d` slice.
    pub fn basis(&self, d: usize) -> Vec<Vec<Gen>> {
        let mut out = vec![vec![]];
        for _ in 0..d {
            let mut next = vec![];
            for w in &out {
                let lo = w.last().map_or(0, |&g| self.col(g));
                for g in 0..self.gens.len() as Gen {
                    if self.col(g) >= lo {
                        let mut v: Vec<Gen> = w.clone();
                        v.push(g);
                        next.push(v);
                    }
                }
            }
            out = next;
        }
        out
    }

    pub fn slice_dimension(&self, d: usize) -> usize {
        self.basis(d).len()
    }

    pub fn gen_name(&self, g: Gen) -> String {
        let (i, j) = self.gens[g as usize];
        format!("t{i}{j}")
    }

    fn parse_gen(&self, s: &str) -> Option<Gen> {
        let d: Vec<usize> = s.strip_prefix('t')?.chars().map(|c| c.to_digit(10).map(|x| x as usize)).collect::<Option<_>>()?;
        match d[..] {
            [i, j] => self.gen_index(i, j),
            _ => None,
        }
    }

    /// Slot alphabets of `dec`: column `j ≥ 2` becomes a series over `{1..j−1}`.
    pub fn dec_alphabets(&self) -> Vec<AlphabetRef> {
        (2..self.n).map(|j| Arc::new(Alphabet::set(j - 1))).collect()
    }
}

/// An element of a truncated `U t_n`, stored as normal-form coordinates.
#[derive(Debug, Clone)]
pub struct BraidElement {
    alg: Arc<BraidAlgebra>,
    terms: Terms,
}

impl PartialEq for BraidElement {
    fn eq(&self, o: &Self) -> bool {
        self.alg.n == o.alg.n && self.terms == o.terms
    }
}

impl Eq for BraidElement {}

impl BraidElement {
    pub fn zero(alg: &Arc<BraidAlgebra>) -> Self {
        BraidElement { alg: alg.clone(), terms: Terms::new() }
    }

    pub fn constant(alg: &Arc<BraidAlgebra>, c: Rational) -> Self {
        let mut terms = Terms::new();
        add_to(&mut terms, vec![], c);
        BraidElement { alg: alg.clone(), terms }
    }

    pub fn one(alg: &Arc<BraidAlgebra>) -> Self {
        Self::constant(alg, Rational::one())
    }

    /// The generator `t_ij`.
    pub fn gen(alg: &Arc<BraidAlgebra>, i: usize, j: usize) -> Result<Self> {
        Self::from_word(alg, &[(i, j)])
    }

    /// The normal form of a product of generators; errors above the degree bound.
    pub fn from_word(alg: &Arc<BraidAlgebra>, w: &[(usize, usize)]) -> Result<Self> {
        if w.len() > alg.max_degree {
            return Err(BraidError::DegreeOverflow(w.len(), alg.max_degree));
        }
        let gs: Vec<Gen> = w
            .iter()
            .map(|&(i, j)| alg.gen_index(i, j).ok_or_else(|| BraidError::Malformed(format!("no generator t{i}{j}"))))
            .collect::<Result<_>>()?;
        Ok(BraidElement { alg: alg.clone(), terms: alg.normal_word(&gs) })
    }

    /// `c_n = Σ_{i<j} t_ij`.
    pub fn center(alg: &Arc<BraidAlgebra>) -> Self {
        let mut s = Self::zero(alg);
        for &(i, j) in alg.generators() {
            s = s.add(&Self::gen(alg, i, j).expect("valid generator")).expect("same algebra");
        }
        s
    }

    pub fn algebra(&self) -> &Arc<BraidAlgebra> {
        &self.alg
    }

    /// Normal-form words (as `(i, j)` pairs) with their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<(usize, usize)>, &Rational)> {
        self.terms.iter().map(|(w, c)| (w.iter().map(|&g| self.alg.gens[g as usize]).collect(), c))
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

    pub fn coeff(&self, w: &[(usize, usize)]) -> Rational {
        let gs: Option<Vec<Gen>> = w.iter().map(|&(i, j)| self.alg.gen_index(i, j)).collect();
        gs.and_then(|g| self.terms.get(&g).cloned()).unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![]).cloned().unwrap_or_else(Rational::zero)
    }

    fn check(&self, o: &BraidElement) -> Result<()> {
        if self.alg.n != o.alg.n {
            return Err(BraidError::AlgebraMismatch);
        }
        Ok(())
    }

    fn with_terms(&self, terms: Terms) -> Self {
        BraidElement { alg: self.alg.clone(), terms }
    }

    pub fn add(&self, o: &BraidElement) -> Result<Self> {
        self.check(o)?;
        let mut t = self.terms.clone();
        for (w, c) in &o.terms {
            add_to(&mut t, w.clone(), c.clone());
        }
        Ok(self.with_terms(t))
    }

    pub fn sub(&self, o: &BraidElement) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return self.with_terms(Terms::new());
        }
        self.with_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect())
    }

    pub fn mul(&self, o: &BraidElement) -> Result<Self> {
        self.check(o)?;
        let n = self.alg.max_degree;
        let mut t = Terms::new();
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                if u.len() + v.len() > n {
                    continue;
                }
                let mut w = u.clone();
                w.extend_from_slice(v);
                let ab = a * b;
                for (nw, nc) in self.alg.normal_word(&w) {
                    add_to(&mut t, nw, nc * &ab);
                }
            }
        }
        Ok(self.with_terms(t))
    }

    pub fn bracket(&self, o: &BraidElement) -> Result<Self> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = BraidElement::one(&self.alg);
        for _ in 0..k {
            r = r.mul(self).expect("same algebra");
        }
        r
    }

    /// The inverse of an element with constant term 1.
    pub fn inverse(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(BraidError::Malformed("inverse needs constant term 1".into()));
        }
        let x = BraidElement::one(&self.alg).sub(self)?;
        let mut total = BraidElement::one(&self.alg);
        let mut p = total.clone();
        for _ in 0..self.alg.max_degree {
            p = p.mul(&x)?;
            total = total.add(&p)?;
        }
        Ok(total)
    }

    pub fn truncate(&self, d: usize) -> Self {
        self.with_terms(self.terms.iter().filter(|(w, _)| w.len() <= d).map(|(w, c)| (w.clone(), c.clone())).collect())
    }

    pub fn homogeneous(&self, d: usize) -> Self {
        self.with_terms(self.terms.iter().filter(|(w, _)| w.len() == d).map(|(w, c)| (w.clone(), c.clone())).collect())
    }

    /// Coordinates of the degree-`d` part in [`BraidAlgebra::basis`].
    pub fn coords(&self, d: usize) -> Vec<Rational> {
        self.alg.basis(d).iter().map(|w| self.terms.get(w).cloned().unwrap_or_else(Rational::zero)).collect()
    }

    /// Applies the algebra homomorphism `t_g ↦ images[g]` into `target`.
    fn apply_hom(&self, images: &[BraidElement], target: &Arc<BraidAlgebra>) -> Result<BraidElement> {
        let mut cache: HashMap<Vec<Gen>, BraidElement> = HashMap::new();
        cache.insert(vec![], BraidElement::one(target));
        let mut total = BraidElement::zero(target);
        for (w, c) in &self.terms {
            for i in 1..=w.len() {
                if !cache.contains_key(&w[..i]) {
                    let p = cache[&w[..i - 1]].mul(&images[w[i - 1] as usize])?;
                    cache.insert(w[..i].to_vec(), p);
                }
            }
            total = total.add(&cache[&w[..]].scale(c))?;
        }
        Ok(total)
    }

    /// The derivation `t_0j ↦ 1`, other generators `↦ 0`.
    pub fn e0(&self, j: usize) -> BraidElement {
        let g = self.alg.gen_index(0, j);
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            for p in 0..w.len() {
                if Some(w[p]) == g {
                    let mut u = w.clone();
                    u.remove(p);
                    add_to(&mut t, u, c.clone());
                }
            }
        }
        self.with_terms(t)
    }

    /// Membership in `∩_j ker e_0j`, i.e. `(e_0j ⊗ id)∘Δ(w) = 0` for all `j`.
    pub fn is_dagger(&self) -> bool {
        (1..self.alg.n).all(|j| self.e0(j).is_zero())
    }

    /// `Δ(w)` for primitive generators: a normal word splits over all
    /// sub-sequences, which stay normal.
    pub fn coproduct(&self) -> BTreeMap<(Vec<(usize, usize)>, Vec<(usize, usize)>), Rational> {
        let mut out = BTreeMap::new();
        for (w, c) in &self.terms {
            let k = w.len();
            for mask in 0u32..(1 << k) {
                let (mut l, mut r) = (vec![], vec![]);
                for (p, &g) in w.iter().enumerate() {
                    if mask >> p & 1 == 1 {
                        l.push(self.alg.gens[g as usize]);
                    } else {
                        r.push(self.alg.gens[g as usize]);
                    }
                }
                add_to(&mut out, (l, r), c.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut by_degree: BTreeMap<usize, (Vec<Value>, Vec<Value>)> = BTreeMap::new();
        for (w, c) in &self.terms {
            let e = by_degree.entry(w.len()).or_default();
            e.0.push(json!(rational_to_string(c)));
            e.1.push(json!(w.iter().map(|&g| self.alg.gen_name(g)).collect::<Vec<_>>()));
        }
        json!({
            "n": self.alg.n,
            "max_degree": self.alg.max_degree,
            "terms": by_degree.into_iter().map(|(d, (c, b))| json!({"degree": d, "coords": c, "basis_words": b})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(alg: &Arc<BraidAlgebra>, v: &Value) -> Result<Self> {
        let bad = |m: &str| BraidError::Malformed(m.to_string());
        if v["n"].as_u64() != Some(alg.n as u64) {
            return Err(BraidError::AlgebraMismatch);
        }
        let mut out = BraidElement::zero(alg);
        for block in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let coords = block["coords"].as_array().ok_or_else(|| bad("coords"))?;
            let words = block["basis_words"].as_array().ok_or_else(|| bad("basis_words"))?;
            if coords.len() != words.len() {
                return Err(bad("coords and basis_words differ in length"));
            }
            for (c, w) in coords.iter().zip(words) {
                let c = crate::ratfun::parse_rational(c.as_str().ok_or_else(|| bad("coefficient"))?, false)
                    .map_err(|e| BraidError::Malformed(e.to_string()))?;
                let gs: Vec<(usize, usize)> = w
                    .as_array()
                    .ok_or_else(|| bad("word"))?
                    .iter()
                    .map(|s| s.as_str().and_then(|s| alg.parse_gen(s)).map(|g| alg.gens[g as usize]).ok_or_else(|| bad("generator")))
                    .collect::<Result<_>>()?;
                out = out.add(&BraidElement::from_word(alg, &gs)?.scale(&c))?;
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Maps between braid algebras
// ---------------------------------------------------------------------------

/// `f^*: U t_m → U t_n` for `f: {0..n−1} → {0..m−1} ∪ {∞}` (`None` is `∞`):
/// `t_ij ↦ Σ_{k∈f⁻¹(i), l∈f⁻¹(j)} t_kl`.
pub fn fstar(f: &[Option<usize>], w: &BraidElement, target: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    let m = w.alg.n;
    if f.len() != target.n || f.iter().flatten().any(|&x| x >= m) {
        return Err(BraidError::Malformed("f must map {0..n−1} into {0..m−1, ∞}".into()));
    }
    let images = w
        .alg
        .gens
        .iter()
        .map(|&(i, j)| {
            let mut s = BraidElement::zero(target);
            for k in (0..target.n).filter(|&k| f[k] == Some(i)) {
                for l in (0..target.n).filter(|&l| f[l] == Some(j)) {
                    s = s.add(&BraidElement::gen(target, k, l)?)?;
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    w.apply_hom(&images, target)
}

fn subset_sum(alg: &Arc<BraidAlgebra>, a: &[usize], b: &[usize]) -> Result<BraidElement> {
    let mut s = BraidElement::zero(alg);
    for &i in a {
        for &j in b {
            s = s.add(&BraidElement::gen(alg, i, j)?)?;
        }
    }
    Ok(s)
}

/// `φ^{S₀,S₁,S₂} = φ(Σ_{S₀×S₁} t, Σ_{S₁×S₂} t)` for `φ` over `f₀, f₁`.
pub fn ev_subsets(phi: &NCSeries, s0: &[usize], s1: &[usize], s2: &[usize], alg: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    if phi.n_letters() != 2 {
        return Err(BraidError::Malformed("Ev needs a series in f0, f1".into()));
    }
    let mut seen = vec![false; alg.n];
    for &x in s0.iter().chain(s1).chain(s2) {
        if x >= alg.n || seen[x] {
            return Err(BraidError::BadSubsets);
        }
        seen[x] = true;
    }
    let images = [subset_sum(alg, s0, s1)?, subset_sum(alg, s1, s2)?];
    let mut cache: HashMap<Vec<u32>, BraidElement> = HashMap::new();
    cache.insert(vec![], BraidElement::one(alg));
    let mut total = BraidElement::zero(alg);
    for (w, c) in phi.terms() {
        if w.len() > alg.max_degree {
            continue;
        }
        for i in 1..=w.len() {
            if !cache.contains_key(&w[..i]) {
                let p = cache[&w[..i - 1]].mul(&images[w[i - 1] as usize])?;
                cache.insert(w[..i].to_vec(), p);
            }
        }
        total = total.add(&cache[&w[..]].scale(c))?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// dec / madec
// ---------------------------------------------------------------------------

fn slot_is_dagger(t: &MultiTerms, slot: usize) -> bool {
    let mut d = MultiTerms::new();
    for (ws, c) in t {
        for p in 0..ws[slot].len() {
            if ws[slot][p] == 0 {
                let mut u = ws.clone();
                u[slot].remove(p);
                add_to(&mut d, u, c.clone());
            }
        }
    }
    d.is_empty()
}

/// `dec`: a dagger element as a tensor over the columns `2..n−1`. In slot
/// `j`, `t_0j` becomes `f_0` (letter 0) and `t_ij` becomes `f_i` (letter `i`).
pub fn dec(w: &BraidElement) -> Result<MultiTerms> {
    if !w.is_dagger() {
        return Err(BraidError::NotDagger);
    }
    let n = w.alg.n;
    let mut out = MultiTerms::new();
    for (word, c) in &w.terms {
        let mut slots = vec![vec![]; n - 2];
        for &g in word {
            let (i, j) = w.alg.gens[g as usize];
            slots[j - 2].push(i as u32);
        }
        out.insert(slots, c.clone());
    }
    Ok(out)
}

/// Inverse of [`dec`]; every slot must be dagger.
pub fn dec_inv(t: &MultiTerms, alg: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    let n = alg.n;
    for (ws, _) in t {
        if ws.len() != n - 2 || ws.iter().enumerate().any(|(s, w)| w.iter().any(|&l| l as usize > s + 1)) {
            return Err(BraidError::Malformed("tensor does not match the column alphabets".into()));
        }
    }
    if (0..n - 2).any(|s| !slot_is_dagger(t, s)) {
        return Err(BraidError::NotDagger);
    }
    let mut terms = Terms::new();
    for (ws, c) in t {
        let word: Vec<Gen> = ws
            .iter()
            .enumerate()
            .flat_map(|(s, w)| w.iter().map(move |&i| (i as usize, s + 2)))
            .map(|(i, j)| alg.gen_index(i, j).expect("valid generator"))
            .collect();
        if word.len() <= alg.max_degree {
            add_to(&mut terms, word, c.clone());
        }
    }
    Ok(BraidElement { alg: alg.clone(), terms })
}

/// `dec⁻¹` of a pure tensor `w_2 ⊗ ⋯ ⊗ w_{n−1}`.
pub fn dec_inv_factors(factors: &[NCSeries], alg: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    if factors.len() != alg.n - 2 {
        return Err(BraidError::Malformed("one factor per column 2..n−1 is required".into()));
    }
    let mut t = MultiTerms::from([(vec![], Rational::one())]);
    for f in factors {
        let mut next = MultiTerms::new();
        for (ws, a) in &t {
            for (w, b) in f.terms() {
                let mut v = ws.clone();
                v.push(w.clone());
                add_to(&mut next, v, a * b);
            }
        }
        t = next;
    }
    dec_inv(&t, alg)
}

/// `madec = (ma ⊗ ⋯ ⊗ ma)∘dec`, a polymould over `([1], [1,2], …)`.
pub fn madec(w: &BraidElement) -> Result<Mould> {
    Ok(ma_multi(&dec(w)?, w.alg.dec_alphabets(), w.alg.max_degree)?)
}

pub fn madec_inv(m: &Mould, alg: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    if m.nblocks() != alg.n - 2 || m.blocks().iter().zip(alg.dec_alphabets()).any(|(a, b)| a.len() != b.len()) {
        return Err(BraidError::Malformed("polymould blocks do not match the algebra".into()));
    }
    dec_inv(&ma_multi_inverse(m)?, alg)
}

/// `M ⋄ N = madec(madec⁻¹(M)·madec⁻¹(N))`.
pub fn diamond(m: &Mould, n: &Mould, alg: &Arc<BraidAlgebra>) -> Result<Mould> {
    madec(&madec_inv(m, alg)?.mul(&madec_inv(n, alg)?)?)
}

// ---------------------------------------------------------------------------
// flip and rev
// ---------------------------------------------------------------------------

/// `flip`: `t_ij ↦ t_{n−i,n−j}` for `i > 0`, `t_0j ↦ −Σ_{k≠n−j} t_{k,n−j}`.
pub fn flip(w: &BraidElement) -> Result<BraidElement> {
    let alg = &w.alg;
    let n = alg.n;
    let images = alg
        .gens
        .iter()
        .map(|&(i, j)| {
            if i > 0 {
                BraidElement::gen(alg, n - i, n - j)
            } else {
                let m = n - j;
                let mut s = BraidElement::zero(alg);
                for k in (0..n).filter(|&k| k != m) {
                    s = s.sub(&BraidElement::gen(alg, k, m)?)?;
                }
                Ok(s)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    w.apply_hom(&images, alg)
}

/// Expands a word under a letter substitution `l ↦ Σ c·l'`.
fn substitute_letters(w: &[u32], images: &[Vec<(u32, i64)>]) -> BTreeMap<Vec<u32>, Rational> {
    let mut acc = BTreeMap::from([(vec![], Rational::one())]);
    for &l in w {
        let mut next = BTreeMap::new();
        for (u, c) in &acc {
            for &(m, k) in &images[l as usize] {
                let mut v = u.clone();
                v.push(m);
                add_to(&mut next, v, c * rint(k));
            }
        }
        acc = next;
    }
    acc
}

/// `rev` on `U t_4^†`: `w_2(f_0, f_1) ⊗ w_3(f_0, f_1, f_2) ↦
/// w_2(−f_0−f_1, f_1) ⊗ w_3(−f_0−f_1−f_2, f_2, f_1)`.
pub fn rev(w: &BraidElement) -> Result<BraidElement> {
    if w.alg.n != 4 {
        return Err(BraidError::Malformed("rev is defined on t_4".into()));
    }
    let slot_images: [Vec<Vec<(u32, i64)>>; 2] = [
        vec![vec![(0, -1), (1, -1)], vec![(1, 1)]],
        vec![vec![(0, -1), (1, -1), (2, -1)], vec![(2, 1)], vec![(1, 1)]],
    ];
    let mut out = MultiTerms::new();
    for (ws, c) in dec(w)? {
        let a = substitute_letters(&ws[0], &slot_images[0]);
        let b = substitute_letters(&ws[1], &slot_images[1]);
        for (u, x) in &a {
            for (v, y) in &b {
                add_to(&mut out, vec![u.clone(), v.clone()], &c * x * y);
            }
        }
    }
    dec_inv(&out, &w.alg)
}

/// `madec∘f∘madec⁻¹` for a braid-level map `f`.
pub fn on_moulds(m: &Mould, alg: &Arc<BraidAlgebra>, f: impl Fn(&BraidElement) -> Result<BraidElement>) -> Result<Mould> {
    madec(&f(&madec_inv(m, alg)?)?)
}

/// `M^{S₀,S₁,S₂} = madec(φ^{S₀,S₁,S₂})` with `φ = ma⁻¹(M)`.
pub fn ev_mould(m: &Mould, s0: &[usize], s1: &[usize], s2: &[usize], alg: &Arc<BraidAlgebra>) -> Result<Mould> {
    let phi = crate::ncseries::ma_inverse(m)?;
    madec(&ev_subsets(&phi, s0, s1, s2, alg)?)
}

// ---------------------------------------------------------------------------
// Pentagon
// ---------------------------------------------------------------------------

/// `φ^{01,2,3}φ^{0,1,23} − φ^{0,1,2}φ^{0,12,3}ψ^{1,2,3}` in `U t_4`.
pub fn pentagon_braid(phi: &NCSeries, psi: &NCSeries, alg: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    if alg.n != 4 {
        return Err(BraidError::Malformed("the pentagon lives in t_4".into()));
    }
    let ev = |s: &NCSeries, a: &[usize], b: &[usize], c: &[usize]| ev_subsets(s, a, b, c, alg);
    let lhs = ev(phi, &[0, 1], &[2], &[3])?.mul(&ev(phi, &[0], &[1], &[2, 3])?)?;
    let rhs = ev(phi, &[0], &[1], &[2])?.mul(&ev(phi, &[0], &[1, 2], &[3])?)?.mul(&ev(psi, &[1], &[2], &[3])?)?;
    let n = phi.max_degree().min(psi.max_degree());
    Ok(lhs.sub(&rhs)?.truncate(n))
}

/// The mould pentagon residual `M^{01,2,3} ⋄ M^{0,1,23} − M^{0,1,2} ⋄ M^{0,12,3} ⋄ ψ_P^{1,2,3}`.
pub fn pentagon_residual(m: &Mould, psi: &NCSeries, alg: &Arc<BraidAlgebra>) -> Result<Mould> {
    let phi = crate::ncseries::ma_inverse(m)?;
    madec(&pentagon_braid(&phi, psi, alg)?)
}

/// The pentagon for `ψ` in `U t_5`:
/// `ψ^{12,3,4}ψ^{1,2,34} − ψ^{1,2,3}ψ^{1,23,4}ψ^{2,3,4}`.
pub fn pentagon_t5(psi: &NCSeries, alg5: &Arc<BraidAlgebra>) -> Result<BraidElement> {
    if alg5.n != 5 {
        return Err(BraidError::Malformed("expected t_5".into()));
    }
    let ev = |a: &[usize], b: &[usize], c: &[usize]| ev_subsets(psi, a, b, c, alg5);
    let lhs = ev(&[1, 2], &[3], &[4])?.mul(&ev(&[1], &[2], &[3, 4])?)?;
    let rhs = ev(&[1], &[2], &[3])?.mul(&ev(&[1], &[2, 3], &[4])?)?.mul(&ev(&[2], &[3], &[4])?)?;
    Ok(lhs.sub(&rhs)?.truncate(psi.max_degree()))
}

/// `f_i: {0..4} → {0..3}` merging `i` and `i+1`.
pub fn merge_map(i: usize) -> Vec<Option<usize>> {
    (0..5).map(|p| Some(if p <= i { p } else { p - 1 })).collect()
}

/// The four pullback identities relating the `t_4` pentagon residual of
/// `(φ, ψ)` to `t_5` expressions. Returns `f_i^*(R) − RHS_i` for `i = 0..3`.
pub fn g1234_defects(phi: &NCSeries, psi: &NCSeries, alg4: &Arc<BraidAlgebra>, alg5: &Arc<BraidAlgebra>) -> Result<Vec<BraidElement>> {
    let r = pentagon_braid(phi, psi, alg4)?;
    let ev = |s: &NCSeries, a: &[usize], b: &[usize], c: &[usize]| ev_subsets(s, a, b, c, alg5);
    let n = phi.max_degree().min(psi.max_degree());
    let rhs = [
        ev(phi, &[0, 1, 2], &[3], &[4])?
            .mul(&ev(phi, &[0, 1], &[2], &[3, 4])?)?
            .sub(&ev(phi, &[0, 1], &[2], &[3])?.mul(&ev(phi, &[0, 1], &[2, 3], &[4])?)?.mul(&ev(psi, &[2], &[3], &[4])?)?)?,
        ev(phi, &[0, 1, 2], &[3], &[4])?
            .mul(&ev(phi, &[0], &[1, 2], &[3, 4])?)?
            .sub(&ev(phi, &[0], &[1, 2], &[3])?.mul(&ev(phi, &[0], &[1, 2, 3], &[4])?)?.mul(&ev(psi, &[1, 2], &[3], &[4])?)?)?,
        ev(phi, &[0, 1], &[2, 3], &[4])?
            .mul(&ev(phi, &[0], &[1], &[2, 3, 4])?)?
            .sub(&ev(phi, &[0], &[1], &[2, 3])?.mul(&ev(phi, &[0], &[1, 2, 3], &[4])?)?.mul(&ev(psi, &[1], &[2, 3], &[4])?)?)?,
        ev(phi, &[0, 1], &[2], &[3, 4])?
            .mul(&ev(phi, &[0], &[1], &[2, 3, 4])?)?
            .sub(&ev(phi, &[0], &[1], &[2])?.mul(&ev(phi, &[0], &[1, 2], &[3, 4])?)?.mul(&ev(psi, &[1], &[2], &[3, 4])?)?)?,
    ];
    rhs.iter()
        .enumerate()
        .map(|(i, rh)| Ok(fstar(&merge_map(i), &r, alg5)?.sub(rh)?.truncate(n)))
        .collect()
}

/// Solution space of the degree-`d` linearized pentagon.
#[derive(Debug, Clone)]
pub struct GrtSolution {
    pub degree: usize,
    /// Lyndon words indexing the unknowns.
    pub basis: Vec<Vec<u32>>,
    /// A particular solution (free coordinates set to zero).
    pub particular: Vec<Rational>,
    /// A basis of the homogeneous solutions.
    pub kernel: Vec<Vec<Rational>>,
}

impl GrtSolution {
    /// The Lie element with the given Lyndon coordinates.
    pub fn element(&self, coords: &[Rational], max_degree: usize) -> NCSeries {
        let gamma = Arc::new(Alphabet::trivial());
        let mut s = NCSeries::zero(gamma.clone(), max_degree);
        for (w, c) in self.basis.iter().zip(coords) {
            if !c.is_zero() {
                s = s.add(&lyndon_bracket(gamma.clone(), max_degree, w).scale(c)).expect("same alphabet");
            }
        }
        s
    }

    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// The particular solution if it is nonzero, else the first kernel vector.
    pub fn representative(&self, max_degree: usize) -> NCSeries {
        if self.particular.iter().any(|c| !c.is_zero()) || self.kernel.is_empty() {
            self.element(&self.particular, max_degree)
        } else {
            self.element(&self.kernel[0], max_degree)
        }
    }
}

/// Degree-`d` corrections `σ` (Lie, Lyndon basis) such that `lower + σ`
/// satisfies `φ^{01,2,3}φ^{0,1,23} = φ^{0,1,2}φ^{0,12,3}φ^{1,2,3}` mod degree `d+1`.
pub fn grt_solve(d: usize, lower: &NCSeries, alg: &Arc<BraidAlgebra>) -> Result<GrtSolution> {
    if alg.n != 4 {
        return Err(BraidError::Malformed("the pentagon lives in t_4".into()));
    }
    if d > alg.max_degree {
        return Err(BraidError::DegreeOverflow(d, alg.max_degree));
    }
    let lower = lower.truncate(d);
    let lower = NCSeries::from_terms(lower.gamma().clone(), d, lower.terms().map(|(w, c)| (w.clone(), c.clone())));
    if lower.n_letters() != 2 {
        return Err(BraidError::Malformed("the pentagon needs a series in f0, f1".into()));
    }
    let r = pentagon_braid(&lower, &lower, alg)?;
    if r.terms.keys().any(|w| w.len() < d) {
        return Err(BraidError::Inconsistent(d));
    }
    let basis: Vec<Vec<u32>> = if d == 0 { vec![] } else { lyndon_words(2, d).into_iter().filter(|w| w.len() == d).collect() };
    let lin = |s: &NCSeries| -> Result<Vec<Rational>> {
        let ev = |a: &[usize], b: &[usize], c: &[usize]| ev_subsets(s, a, b, c, alg);
        let v = ev(&[0, 1], &[2], &[3])?
            .add(&ev(&[0], &[1], &[2, 3])?)?
            .sub(&ev(&[0], &[1], &[2])?)?
            .sub(&ev(&[0], &[1, 2], &[3])?)?
            .sub(&ev(&[1], &[2], &[3])?)?;
        Ok(v.coords(d))
    };
    let gamma = lower.gamma().clone();
    let cols: Vec<Vec<Rational>> = basis.iter().map(|w| lin(&lyndon_bracket(gamma.clone(), d, w))).collect::<Result<_>>()?;
    let nrows = alg.slice_dimension(d);
    let rows: Vec<Vec<Rational>> = (0..nrows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let rhs: Vec<Rational> = r.coords(d).into_iter().map(|c| -c).collect();
    let particular = linalg::solve(&rows, &rhs, basis.len()).ok_or(BraidError::Inconsistent(d + 1))?;
    let kernel = linalg::kernel(&rows, basis.len());
    Ok(GrtSolution { degree: d, basis, particular, kernel })
}
