//! Moulds, dimoulds and polymoulds.
//!
//! A single container covers all three: a [`Mould`] has `n` label blocks
//! (alphabets); a component is addressed by its *shape* `(r_1, ..., r_n)` and
//! the concatenated label tuple. Variables are `x_1, ..., x_{r_1 + ... + r_n}`,
//! block by block. Ordinary moulds have one block, dimoulds two.
//!
//! Components are stored sparsely (absent = 0) and every mould carries the
//! total-length bound `max_length` it was built to.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ratfun::{rint, FamilyTag, LinForm, Poly, RatFun, RatFunError, Rational};
use crate::words::{self, Alphabet, AlphabetRef, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MouldError {
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("alphabet has no group law")]
    NoGroupLaw,
    #[error("empty component is not invertible")]
    NotInvertible,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed mould: {0}")]
    Malformed(String),
    #[error(transparent)]
    RatFun(#[from] RatFunError),
    #[error(transparent)]
    Word(#[from] WordError),
}

pub type Result<T> = std::result::Result<T, MouldError>;

/// Address of a component: block lengths and concatenated labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub shape: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Key {
    pub fn new(shape: Vec<usize>, labels: Vec<usize>) -> Self {
        debug_assert_eq!(shape.iter().sum::<usize>(), labels.len());
        Key { shape, labels }
    }

    /// A one-block key.
    pub fn one(labels: Vec<usize>) -> Self {
        Key { shape: vec![labels.len()], labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mould {
    family: FamilyTag,
    blocks: Vec<AlphabetRef>,
    max_length: usize,
    comps: BTreeMap<Key, RatFun>,
}

/// Every shape with `n` blocks and total length `<= l`, ordered by total
/// length then lexicographically.
pub fn shapes(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for total in 0..=l {
        compositions(n, total, &mut vec![], &mut out);
    }
    out
}

fn compositions(n: usize, total: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 0 {
        if total == 0 {
            out.push(acc.clone());
        }
        return;
    }
    if n == 1 {
        acc.push(total);
        out.push(acc.clone());
        acc.pop();
        return;
    }
    for k in 0..=total {
        acc.push(k);
        compositions(n - 1, total - k, acc, out);
        acc.pop();
    }
}

/// Variable offsets of each block for a shape.
pub fn offsets(shape: &[usize]) -> Vec<usize> {
    let mut o = Vec::with_capacity(shape.len());
    let mut s = 0;
    for &r in shape {
        o.push(s);
        s += r;
    }
    o
}

/// Product-split data: for a cut `c <= shape` (block-wise), the global
/// variable positions of the left and right pieces and their keys.
struct Split {
    left: Key,
    right: Key,
    left_vars: Vec<usize>,
    right_vars: Vec<usize>,
}

fn splits(key: &Key) -> Vec<Split> {
    let shape = &key.shape;
    let off = offsets(shape);
    let mut cuts: Vec<Vec<usize>> = vec![vec![]];
    for &r in shape {
        cuts = cuts
            .into_iter()
            .flat_map(|c| {
                (0..=r).map(move |i| {
                    let mut c = c.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }
    cuts.into_iter()
        .map(|cut| {
            let (mut ll, mut rl, mut lv, mut rv) = (vec![], vec![], vec![], vec![]);
            for (b, (&r, &c)) in shape.iter().zip(&cut).enumerate() {
                for t in 0..r {
                    let g = off[b] + t;
                    if t < c {
                        ll.push(key.labels[g]);
                        lv.push(g);
                    } else {
                        rl.push(key.labels[g]);
                        rv.push(g);
                    }
                }
            }
            let rshape = shape.iter().zip(&cut).map(|(r, c)| r - c).collect();
            Split {
                left: Key::new(cut, ll),
                right: Key::new(rshape, rl),
                left_vars: lv,
                right_vars: rv,
            }
        })
        .collect()
}

/// Places a function of `k` variables onto the given positions among `d`.
pub fn place(f: &RatFun, vars: &[usize], d: usize) -> RatFun {
    if vars.iter().enumerate().all(|(i, &v)| i == v) {
        return f.embed(0, d);
    }
    let forms: Vec<LinForm> = vars.iter().map(|&v| LinForm::var(v, d)).collect();
    f.substitute_unchecked(&forms, d).expect("coordinate placement is injective")
}

impl Mould {
    // -- construction -------------------------------------------------------

    pub fn zero(family: FamilyTag, blocks: Vec<AlphabetRef>, max_length: usize) -> Self {
        Mould { family, blocks, max_length, comps: BTreeMap::new() }
    }

    pub fn zero1(family: FamilyTag, gamma: AlphabetRef, max_length: usize) -> Self {
        Mould::zero(family, vec![gamma], max_length)
    }

    /// The unit: 1 on the empty component, 0 elsewhere.
    pub fn unit(family: FamilyTag, blocks: Vec<AlphabetRef>, max_length: usize) -> Self {
        let mut m = Mould::zero(family, blocks, max_length);
        let n = m.blocks.len();
        m.comps.insert(Key::new(vec![0; n], vec![]), RatFun::one(0));
        m
    }

    pub fn unit1(family: FamilyTag, gamma: AlphabetRef, max_length: usize) -> Self {
        Mould::unit(family, vec![gamma], max_length)
    }

    /// Builds every component from a closure `(shape, labels) -> value`.
    pub fn from_fn(
        family: FamilyTag,
        blocks: Vec<AlphabetRef>,
        max_length: usize,
        mut f: impl FnMut(&Key) -> Result<RatFun>,
    ) -> Result<Self> {
        let mut m = Mould::zero(family, blocks, max_length);
        for key in m.keys() {
            let v = f(&key)?;
            m.set(key, v)?;
        }
        Ok(m)
    }

    /// Constant mould with the given value on every component up to `max_length`.
    pub fn constant_fn(
        family: FamilyTag,
        blocks: Vec<AlphabetRef>,
        max_length: usize,
        mut f: impl FnMut(&Key) -> Rational,
    ) -> Self {
        Mould::from_fn(family, blocks, max_length, |k| Ok(RatFun::constant(f(k), k.len())))
            .expect("constants are admissible in every family")
    }

    /// A random mould with small-integer polynomial components of total
    /// degree at most `max_deg` (truncated to the family's cap).
    pub fn random_poly(
        family: FamilyTag,
        blocks: Vec<AlphabetRef>,
        max_length: usize,
        max_deg: u32,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Mould::from_fn(family, blocks, max_length, |k| {
            let d = k.len();
            let cap = family.degree_cap(d).map_or(max_deg, |c| c.min(max_deg));
            let mut p = Poly::zero(d);
            for e in monomials(d, cap) {
                if rng.gen_bool(0.6) {
                    p.add_term(e, rint(rng.gen_range(-3..=3)));
                }
            }
            Ok(RatFun::from_poly(p))
        })
    }

    // -- accessors ----------------------------------------------------------

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn blocks(&self) -> &[AlphabetRef] {
        &self.blocks
    }

    pub fn gamma(&self) -> &AlphabetRef {
        &self.blocks[0]
    }

    pub fn nblocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    /// Nonzero stored components.
    pub fn components(&self) -> impl Iterator<Item = (&Key, &RatFun)> {
        self.comps.iter()
    }

    /// All addressable keys up to `max_length`.
    pub fn keys(&self) -> Vec<Key> {
        self.keys_up_to(self.max_length)
    }

    pub fn keys_up_to(&self, l: usize) -> Vec<Key> {
        let mut out = vec![];
        for shape in shapes(self.blocks.len(), l) {
            out.extend(self.keys_of_shape(&shape));
        }
        out
    }

    pub fn keys_of_shape(&self, shape: &[usize]) -> Vec<Key> {
        let mut labels: Vec<Vec<usize>> = vec![vec![]];
        for (a, &r) in self.blocks.iter().zip(shape) {
            let tuples = a.tuples(r);
            labels = labels
                .into_iter()
                .flat_map(|l| {
                    tuples.iter().map(move |t| {
                        let mut l = l.clone();
                        l.extend_from_slice(t);
                        l
                    })
                })
                .collect();
        }
        labels.into_iter().map(|l| Key::new(shape.to_vec(), l)).collect()
    }

    pub fn get(&self, key: &Key) -> RatFun {
        self.comps.get(key).cloned().unwrap_or_else(|| RatFun::zero(key.len()))
    }

    pub fn get_ref(&self, key: &Key) -> Option<&RatFun> {
        self.comps.get(key)
    }

    /// One-block accessor.
    pub fn get1(&self, labels: &[usize]) -> RatFun {
        self.get(&Key::one(labels.to_vec()))
    }

    /// Stores a component, admitting it into the family (series truncate,
    /// polynomial families reject denominators).
    pub fn set(&mut self, key: Key, v: RatFun) -> Result<()> {
        if v.nvars() != key.len() {
            return Err(MouldError::Malformed(format!(
                "component of length {} has arity {}",
                key.len(),
                v.nvars()
            )));
        }
        if key.shape.len() != self.blocks.len() {
            return Err(MouldError::Malformed("shape/block count mismatch".into()));
        }
        if key.len() > self.max_length {
            return Ok(());
        }
        let v = self.family.admit(v, key.len())?;
        if v.is_zero() {
            self.comps.remove(&key);
        } else {
            self.comps.insert(key, v);
        }
        Ok(())
    }

    pub fn set1(&mut self, labels: Vec<usize>, v: RatFun) -> Result<()> {
        self.set(Key::one(labels), v)
    }

    /// The empty component as a rational.
    pub fn empty_value(&self) -> Rational {
        self.get(&Key::new(vec![0; self.blocks.len()], vec![])).numerator().constant_term()
    }

    /// Value at a word: the component for the word's labels with its variables
    /// replaced by the word's forms (over `d` ambient variables).
    pub fn at_word(&self, w: &Word, d: usize) -> Result<RatFun> {
        self.at(&Key::one(w.labels()), &w.forms(), d)
    }

    /// Value of a component at arbitrary forms.
    pub fn at(&self, key: &Key, forms: &[LinForm], d: usize) -> Result<RatFun> {
        match self.comps.get(key) {
            None => Ok(RatFun::zero(d)),
            Some(f) => Ok(f.substitute_unchecked(forms, d)?),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Components whose value is constant everywhere.
    pub fn is_constant(&self) -> bool {
        self.comps.values().all(|f| f.is_constant())
    }

    /// Same family and label data, with a new length bound.
    pub fn truncate(&self, l: usize) -> Mould {
        let l = l.min(self.max_length);
        Mould {
            family: self.family,
            blocks: self.blocks.clone(),
            max_length: l,
            comps: self.comps.iter().filter(|(k, _)| k.len() <= l).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Changes the family (e.g. embeds polynomial moulds into `Rat`).
    pub fn with_family(&self, family: FamilyTag) -> Result<Mould> {
        let mut m = Mould::zero(family, self.blocks.clone(), self.max_length);
        for (k, v) in &self.comps {
            m.set(k.clone(), v.clone())?;
        }
        Ok(m)
    }

    fn compatible(&self, o: &Mould) -> Result<(FamilyTag, usize)> {
        if self.blocks.len() != o.blocks.len() || self.blocks.iter().zip(&o.blocks).any(|(a, b)| a != b) {
            return Err(MouldError::AlphabetMismatch);
        }
        Ok((self.family.join(o.family), self.max_length.min(o.max_length)))
    }

    // -- linear structure ---------------------------------------------------

    pub fn add(&self, o: &Mould) -> Result<Mould> {
        let (family, l) = self.compatible(o)?;
        let mut m = Mould::zero(family, self.blocks.clone(), l);
        for (k, v) in self.comps.iter().chain(o.comps.iter()) {
            if k.len() <= l {
                let s = &m.get(k) + v;
                m.set(k.clone(), s)?;
            }
        }
        Ok(m)
    }

    pub fn sub(&self, o: &Mould) -> Result<Mould> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Mould {
        self.scale(&rint(-1))
    }

    pub fn scale(&self, c: &Rational) -> Mould {
        let mut m = Mould::zero(self.family, self.blocks.clone(), self.max_length);
        for (k, v) in &self.comps {
            let s = v.scale(c);
            if !s.is_zero() {
                m.comps.insert(k.clone(), s);
            }
        }
        m
    }

    /// Multiplies every component by a function of the key.
    pub fn map(&self, mut f: impl FnMut(&Key, &RatFun) -> Result<RatFun>) -> Result<Mould> {
        let mut m = Mould::zero(self.family, self.blocks.clone(), self.max_length);
        for (k, v) in &self.comps {
            let nv = f(k, v)?;
            m.set(k.clone(), nv)?;
        }
        Ok(m)
    }

    /// First differing key, if any (for failure witnesses).
    pub fn first_difference(&self, o: &Mould) -> Option<Key> {
        let l = self.max_length.min(o.max_length);
        let mut keys: Vec<&Key> = self.comps.keys().chain(o.comps.keys()).filter(|k| k.len() <= l).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find(|k| self.get(k) != o.get(k)).cloned()
    }

    /// Equality of all components up to the common length bound.
    pub fn agrees_with(&self, o: &Mould) -> bool {
        self.first_difference(o).is_none()
    }

    // -- products -----------------------------------------------------------

    /// The `×` product, block-wise concatenation split.
    pub fn mul(&self, o: &Mould) -> Result<Mould> {
        let (family, l) = self.compatible(o)?;
        let mut m = Mould::zero(family, self.blocks.clone(), l);
        let cap = family.degree_cap(0);
        for key in m.keys() {
            let d = key.len();
            let mut acc = RatFun::zero(d);
            for sp in splits(&key) {
                let (Some(a), Some(b)) = (self.comps.get(&sp.left), o.comps.get(&sp.right)) else {
                    continue;
                };
                let term = match (cap, a.as_poly(), b.as_poly()) {
                    (Some(n), Some(pa), Some(pb)) => {
                        let pa = place(&RatFun::from_poly(pa.clone()), &sp.left_vars, d);
                        let pb = place(&RatFun::from_poly(pb.clone()), &sp.right_vars, d);
                        let cap = n.saturating_sub(d as u32);
                        if (d as u32) > n {
                            continue;
                        }
                        RatFun::from_poly(pa.numerator().mul_truncated(pb.numerator(), cap))
                    }
                    _ => &place(a, &sp.left_vars, d) * &place(b, &sp.right_vars, d),
                };
                acc += &term;
            }
            m.set(key, acc)?;
        }
        Ok(m)
    }

    /// Two-sided `×`-inverse (requires an invertible empty component).
    pub fn inv_mul(&self) -> Result<Mould> {
        let b0 = self.empty_value();
        if num_traits::Zero::is_zero(&b0) {
            return Err(MouldError::NotInvertible);
        }
        let inv0 = num_traits::Inv::inv(b0);
        let mut m = Mould::zero(self.family, self.blocks.clone(), self.max_length);
        let n = self.blocks.len();
        m.set(Key::new(vec![0; n], vec![]), RatFun::constant(inv0.clone(), 0))?;
        for key in self.keys() {
            if key.is_empty() {
                continue;
            }
            let d = key.len();
            let mut acc = RatFun::zero(d);
            for sp in splits(&key) {
                if sp.left.is_empty() {
                    continue;
                }
                let (Some(a), Some(b)) = (self.comps.get(&sp.left), m.comps.get(&sp.right)) else {
                    continue;
                };
                acc += &(&place(a, &sp.left_vars, d) * &place(b, &sp.right_vars, d));
            }
            m.set(key, acc.scale(&(-inv0.clone())))?;
        }
        Ok(m)
    }

    /// Tensor product: blocks are concatenated, values multiplied.
    pub fn tensor(&self, o: &Mould) -> Result<Mould> {
        let family = self.family.join(o.family);
        let l = self.max_length.min(o.max_length);
        let mut blocks = self.blocks.clone();
        blocks.extend(o.blocks.iter().cloned());
        let na = self.blocks.len();
        let mut m = Mould::zero(family, blocks, l);
        for (ka, a) in &self.comps {
            for (kb, b) in &o.comps {
                let d = ka.len() + kb.len();
                if d > l {
                    continue;
                }
                let mut shape = ka.shape.clone();
                shape.extend_from_slice(&kb.shape);
                let mut labels = ka.labels.clone();
                labels.extend_from_slice(&kb.labels);
                let v = &a.embed(0, d) * &b.embed(ka.len(), d);
                m.set(Key::new(shape, labels), v)?;
            }
        }
        debug_assert_eq!(m.blocks.len(), na + o.blocks.len());
        Ok(m)
    }

    // -- involutions --------------------------------------------------------

    /// `pari`: multiply the length-`m` components by `(-1)^m`.
    pub fn pari(&self) -> Mould {
        let mut m = self.clone();
        for (k, v) in m.comps.iter_mut() {
            if k.len() % 2 == 1 {
                *v = v.neg();
            }
        }
        m
    }

    /// `anti`: reverse the letters within each block.
    pub fn anti(&self) -> Result<Mould> {
        let mut m = Mould::zero(self.family, self.blocks.clone(), self.max_length);
        for (k, v) in &self.comps {
            let d = k.len();
            let off = offsets(&k.shape);
            // position p (in block b, index t) of the input ↦ reversed position
            let mut perm = vec![0; d];
            let mut labels = vec![0; d];
            for (b, &r) in k.shape.iter().enumerate() {
                for t in 0..r {
                    perm[off[b] + t] = off[b] + r - 1 - t;
                    labels[off[b] + r - 1 - t] = k.labels[off[b] + t];
                }
            }
            // anti(M)(u; σ) = M(reversed u; reversed σ): input var p reads x_{perm[p]}
            m.set(Key::new(k.shape.clone(), labels), place(v, &perm, d))?;
        }
        Ok(m)
    }

    /// `minus`: `u ↦ -u` in every variable.
    pub fn minus(&self) -> Mould {
        let mut m = self.clone();
        for v in m.comps.values_mut() {
            *v = v.negate_vars();
        }
        m
    }

    /// `swap` (one block, group alphabet):
    /// `swap(M)(σ; v) = M(v_m, v_{m-1}-v_m, ..., v_1-v_2; σ_1⋯σ_m, ..., σ_1)`.
    pub fn swap(&self) -> Result<Mould> {
        self.require_one_block()?;
        let g = self.gamma().clone();
        if !g.has_group() {
            return Err(MouldError::NoGroupLaw);
        }
        Mould::from_fn(self.family, self.blocks.clone(), self.max_length, |k| {
            let m = k.len();
            let forms: Vec<LinForm> = (0..m)
                .map(|i| {
                    // position i (0-based) reads v_{m-i} - v_{m-i+1}
                    let a = LinForm::var(m - 1 - i, m);
                    if i == 0 {
                        a
                    } else {
                        a.sub(&LinForm::var(m - i, m))
                    }
                })
                .collect();
            let mut labels = vec![0; m];
            for i in 0..m {
                let mut s = g.identity()?;
                for &t in &k.labels[..m - i] {
                    s = g.mul(s, t)?;
                }
                labels[i] = s;
            }
            self.at(&Key::one(labels), &forms, m)
        })
    }

    /// Inverse of [`Mould::swap`]; coincides with `swap` for the trivial group.
    pub fn unswap(&self) -> Result<Mould> {
        self.require_one_block()?;
        let g = self.gamma().clone();
        if !g.has_group() {
            return Err(MouldError::NoGroupLaw);
        }
        Mould::from_fn(self.family, self.blocks.clone(), self.max_length, |k| {
            let m = k.len();
            // swap(N)(τ; v) = N(w; σ) with w_i = v_{m-i} - v_{m-i+1}, τ-products σ;
            // so N(w; σ) = swap(N)(v; τ) with v_j = w_1 + ... + w_{m+1-j}
            // and τ_1 = σ_m, τ_j = σ_{m+2-j}^{-1} σ_{m+1-j}.
            let forms: Vec<LinForm> = (0..m).map(|j| LinForm::range_sum(0, m - j, m)).collect();
            let mut labels = vec![0; m];
            for j in 0..m {
                labels[j] = if j == 0 {
                    k.labels[m - 1]
                } else {
                    g.mul(g.inv(k.labels[m - j])?, k.labels[m - 1 - j])?
                };
            }
            self.at(&Key::one(labels), &forms, m)
        })
    }

    fn require_one_block(&self) -> Result<()> {
        if self.blocks.len() != 1 {
            return Err(MouldError::Precondition("operation needs a one-block mould".into()));
        }
        Ok(())
    }

    // -- Sh and Sh_* --------------------------------------------------------

    /// `Sh(M)(ω; η) = Σ_α Sh(ω ш η; α) M(α)`, a dimould over `(Γ, Γ)`.
    pub fn sh_map(&self) -> Result<Mould> {
        self.require_one_block()?;
        let g = self.gamma().clone();
        Mould::from_fn(self.family, vec![g.clone(), g], self.max_length, |k| {
            let (p, q) = (k.shape[0], k.shape[1]);
            let d = p + q;
            let mut acc = RatFun::zero(d);
            for pos in words::shuffle_positions(p, q) {
                let labels: Vec<usize> = pos.iter().map(|&i| k.labels[i]).collect();
                acc += &place_key(self, &Key::one(labels), &pos, d)?;
            }
            Ok(acc)
        })
    }

    /// `Sh_*(M)(ω; η) = Σ_α Sh_*(ω ш_* η; α) M(α)` for a lower-layer mould.
    pub fn sh_star_map(&self) -> Result<Mould> {
        self.require_one_block()?;
        let g = self.gamma().clone();
        if !g.has_group() {
            return Err(MouldError::NoGroupLaw);
        }
        let fam = self.family.join(FamilyTag::Rat);
        Mould::from_fn(fam, vec![g.clone(), g.clone()], self.max_length, |k| {
            let (p, q) = (k.shape[0], k.shape[1]);
            let d = p + q;
            let (a, b) = canonical_pair(&k.labels, p, q, true);
            let s = words::stuffle(&a, &b, &g, d)?;
            let mut acc = RatFun::zero(d);
            for (w, c) in &s.terms {
                acc += &(c * &self.at_word(w, d)?);
            }
            Ok(acc)
        })
    }

    // -- Γ extension ---------------------------------------------------------

    /// `M_Γ(x; σ) = M(x)` for a mould over `{1}`.
    pub fn extend_by_gamma(&self, gamma: AlphabetRef) -> Result<Mould> {
        self.require_one_block()?;
        if self.gamma().len() != 1 {
            return Err(MouldError::Precondition("extension needs a one-letter alphabet".into()));
        }
        Mould::from_fn(self.family, vec![gamma], self.max_length, |k| Ok(self.get1(&vec![0; k.len()])))
    }

    /// Restricts to label tuples `(s, ..., s)`, over a one-letter alphabet.
    pub fn restrict_diagonal(&self, s: usize, one: AlphabetRef) -> Result<Mould> {
        self.require_one_block()?;
        Mould::from_fn(self.family, vec![one], self.max_length, |k| Ok(self.get1(&vec![s; k.len()])))
    }

    // -- JSON ---------------------------------------------------------------

    pub fn to_json(&self) -> Value {
        let comps: Vec<Value> = self
            .comps
            .iter()
            .map(|(k, v)| {
                let labels: Vec<String> = k
                    .labels
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        let b = block_of(&k.shape, i);
                        self.blocks[b].symbol(s).to_string()
                    })
                    .collect();
                if self.blocks.len() == 1 {
                    json!({"length": k.len(), "labels": labels, "value": v.to_json()})
                } else {
                    json!({"length": k.shape, "labels": labels, "value": v.to_json()})
                }
            })
            .collect();
        let gamma: Value = if self.blocks.len() == 1 {
            json!(self.blocks[0].name())
        } else {
            json!(self.blocks.iter().map(|b| b.name()).collect::<Vec<_>>())
        };
        json!({
            "family": self.family.name(),
            "gamma": gamma,
            "max_length": self.max_length,
            "components": comps,
        })
    }

    pub fn from_json(v: &Value, strict: bool) -> Result<Mould> {
        let bad = |s: &str| MouldError::Malformed(s.to_string());
        let family = FamilyTag::parse(v.get("family").and_then(Value::as_str).ok_or_else(|| bad("family"))?)?;
        let parse_alpha = |s: &Value| -> Result<AlphabetRef> {
            s.as_str()
                .and_then(Alphabet::parse)
                .map(Arc::new)
                .ok_or_else(|| bad("unknown alphabet"))
        };
        let gamma = v.get("gamma").ok_or_else(|| bad("gamma"))?;
        let blocks = match gamma {
            Value::Array(a) => a.iter().map(parse_alpha).collect::<Result<Vec<_>>>()?,
            other => vec![parse_alpha(other)?],
        };
        let max_length = v
            .get("max_length")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("max_length"))? as usize;
        let mut m = Mould::zero(family, blocks, max_length);
        for c in v.get("components").and_then(Value::as_array).ok_or_else(|| bad("components"))? {
            let shape: Vec<usize> = match c.get("length") {
                Some(Value::Array(a)) => a.iter().map(|x| x.as_u64().map(|x| x as usize)).collect::<Option<_>>().ok_or_else(|| bad("length"))?,
                Some(x) => vec![x.as_u64().ok_or_else(|| bad("length"))? as usize],
                None => return Err(bad("length")),
            };
            if shape.len() != m.blocks.len() {
                return Err(bad("length/block mismatch"));
            }
            let names = c.get("labels").and_then(Value::as_array).ok_or_else(|| bad("labels"))?;
            if names.len() != shape.iter().sum::<usize>() {
                return Err(bad("label count"));
            }
            let mut labels = vec![];
            for (i, n) in names.iter().enumerate() {
                let b = block_of(&shape, i);
                let s = n.as_str().and_then(|s| m.blocks[b].index_of(s)).ok_or_else(|| bad("unknown label"))?;
                labels.push(s);
            }
            let d = labels.len();
            let val = RatFun::from_json(c.get("value").ok_or_else(|| bad("value"))?, d, strict)?;
            if matches!(family, FamilyTag::Pol | FamilyTag::TruncSer(_)) && !val.is_poly() {
                return Err(MouldError::Malformed("denominator in a polynomial family".into()));
            }
            if let Some(cap) = family.degree_cap(d) {
                if strict && val.numerator().total_degree().is_some_and(|t| t > cap) {
                    return Err(MouldError::Malformed("degree exceeds the series truncation".into()));
                }
            }
            if d > max_length {
                return Err(bad("component beyond max_length"));
            }
            m.set(Key::new(shape, labels), val)?;
        }
        Ok(m)
    }
}

fn block_of(shape: &[usize], i: usize) -> usize {
    let mut s = 0;
    for (b, &r) in shape.iter().enumerate() {
        s += r;
        if i < s {
            return b;
        }
    }
    shape.len() - 1
}

/// `M(α)` where α's letter `j` is the canonical letter `pos[j]` of `d`.
fn place_key(m: &Mould, key: &Key, pos: &[usize], d: usize) -> Result<RatFun> {
    Ok(match m.get_ref(key) {
        None => RatFun::zero(d),
        Some(f) => place(f, pos, d),
    })
}

/// The canonical pair of words `(x_1..x_p; σ)` and `(x_{p+1}..x_{p+q}; σ')`.
pub fn canonical_pair(labels: &[usize], p: usize, q: usize, lower: bool) -> (Word, Word) {
    let d = p + q;
    let mk = |r: std::ops::Range<usize>| -> Word {
        let letters = r.map(|i| Letter::new(LinForm::var(i, d), labels[i])).collect();
        if lower {
            Word::y(letters)
        } else {
            Word::x(letters)
        }
    };
    (mk(0..p), mk(p..d))
}

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Alternal,
    Symmetral,
    Alternil,
    Symmetril,
}

/// Outcome of a symmetry check: the bound certified, or the first witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryReport {
    pub kind: Symmetry,
    pub bound: usize,
    pub failure: Option<String>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks the shuffle (`al`/`as`) or stuffle (`il`/`is`) relations for all
/// `p, q >= 1` with `p + q <= bound` and all label tuples.
pub fn symmetry_check(kind: Symmetry, m: &Mould, bound: usize) -> Result<SymmetryReport> {
    m.require_one_block()?;
    let bound = bound.min(m.max_length());
    let g = m.gamma().clone();
    let stuffle = matches!(kind, Symmetry::Alternil | Symmetry::Symmetril);
    if stuffle && !g.has_group() {
        return Err(MouldError::NoGroupLaw);
    }
    let product = matches!(kind, Symmetry::Symmetral | Symmetry::Symmetril);
    let mut report = SymmetryReport { kind, bound, failure: None };
    if product && m.empty_value() != rint(1) {
        report.failure = Some("empty component is not 1".into());
        return Ok(report);
    }
    for total in 2..=bound {
        for p in 1..total {
            let q = total - p;
            for labels in g.tuples(total) {
                let (a, b) = canonical_pair(&labels, p, q, stuffle);
                let lhs = if stuffle {
                    let s = words::stuffle(&a, &b, &g, total)?;
                    let mut acc = RatFun::zero(total);
                    for (w, c) in &s.terms {
                        acc += &(c * &m.at_word(w, total)?);
                    }
                    acc
                } else {
                    let mut acc = RatFun::zero(total);
                    for pos in words::shuffle_positions(p, q) {
                        let ls: Vec<usize> = pos.iter().map(|&i| labels[i]).collect();
                        acc += &place_key(m, &Key::one(ls), &pos, total)?;
                    }
                    acc
                };
                let rhs = if product {
                    &m.at_word(&a, total)? * &m.at_word(&b, total)?
                } else {
                    RatFun::zero(total)
                };
                let ok = match m.family().degree_cap(total) {
                    // series: compare modulo the weight truncation
                    Some(cap) => match (lhs.as_poly(), rhs.as_poly()) {
                        (Some(a), Some(b)) => a.truncate(cap) == b.truncate(cap),
                        _ => lhs == rhs,
                    },
                    None => lhs == rhs,
                };
                if !ok {
                    report.failure = Some(format!(
                        "p={p}, q={q}, labels={:?}: lhs={lhs}, rhs={rhs}",
                        labels.iter().map(|&s| g.symbol(s).to_string()).collect::<Vec<_>>()
                    ));
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

pub fn is_symmetral(m: &Mould, bound: usize) -> Result<bool> {
    Ok(symmetry_check(Symmetry::Symmetral, m, bound)?.passed())
}

pub fn is_alternal(m: &Mould, bound: usize) -> Result<bool> {
    Ok(symmetry_check(Symmetry::Alternal, m, bound)?.passed())
}

// ---------------------------------------------------------------------------
// Named moulds
// ---------------------------------------------------------------------------

/// `paj(x_1..x_m) = 1/(x_1 (x_1+x_2) ⋯ (x_1+⋯+x_m))`, constant in the labels.
pub fn paj(gamma: AlphabetRef, max_length: usize) -> Mould {
    Mould::from_fn(FamilyTag::Rat, vec![gamma], max_length, |k| {
        let m = k.len();
        let den: Vec<(LinForm, u32)> = (1..=m).map(|i| (LinForm::range_sum(0, i, m), 1)).collect();
        Ok(RatFun::from_parts(Poly::one(m), &den)?)
    })
    .expect("paj is well defined")
}

/// `pic(x_1..x_m) = 1/(x_1 ⋯ x_m)`, constant in the labels.
pub fn pic(gamma: AlphabetRef, max_length: usize) -> Mould {
    Mould::from_fn(FamilyTag::Rat, vec![gamma], max_length, |k| {
        let m = k.len();
        let den: Vec<(LinForm, u32)> = (0..m).map(|i| (LinForm::var(i, m), 1)).collect();
        Ok(RatFun::from_parts(Poly::one(m), &den)?)
    })
    .expect("pic is well defined")
}

/// `paj` evaluated on a word's forms: `1/(u_1 (u_1+u_2) ⋯)`.
pub fn paj_of_forms(forms: &[LinForm], d: usize) -> Result<RatFun> {
    let mut acc = LinForm::zero(d);
    let mut den = vec![];
    for f in forms {
        acc = acc.add(f);
        den.push((acc.clone(), 1));
    }
    Ok(RatFun::from_parts(Poly::one(d), &den)?)
}

/// All exponent vectors in `d` variables of total degree `≤ cap`.
fn monomials(d: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=cap - used).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::rat;

    fn triv() -> AlphabetRef {
        Arc::new(Alphabet::trivial())
    }

    fn inv(l: &[i64]) -> RatFun {
        RatFun::inv_linear(&LinForm(l.to_vec())).unwrap()
    }

    #[test]
    fn paj_products() {
        let p = paj(triv(), 3);
        let pp = p.mul(&p).unwrap();
        assert_eq!(pp.get1(&[0]), inv(&[1]).scale(&rint(2)));
        let expect = &(&inv(&[1, 0]) * &inv(&[1, 1])).scale(&rint(2)) + &(&inv(&[1, 0]) * &inv(&[0, 1]));
        assert_eq!(pp.get1(&[0, 0]), expect);
        let one = Mould::unit1(FamilyTag::Rat, triv(), 3);
        assert_eq!(one.mul(&p).unwrap(), p);
    }

    #[test]
    fn inverse_length_one() {
        let mut b = Mould::unit1(FamilyTag::Pol, triv(), 3);
        b.set1(vec![0], RatFun::var(0, 1)).unwrap();
        let i = b.inv_mul().unwrap();
        assert_eq!(i.get1(&[0]), RatFun::var(0, 1).neg());
        assert_eq!(i.mul(&b).unwrap(), Mould::unit1(FamilyTag::Pol, triv(), 3));
        assert!(Mould::zero1(FamilyTag::Pol, triv(), 2).inv_mul().is_err());
    }

    #[test]
    fn swap_of_paj_is_pic() {
        let s = paj(triv(), 4).swap().unwrap();
        assert_eq!(s, pic(triv(), 4));
        assert_eq!(s.unswap().unwrap(), paj(triv(), 4));
    }

    #[test]
    fn unswap_inverts_swap_over_z3() {
        let g = Arc::new(Alphabet::cyclic(3));
        let m = Mould::from_fn(FamilyTag::Pol, vec![g.clone()], 3, |k| {
            let mut f = RatFun::constant(rint(1 + k.labels.iter().enumerate().map(|(i, &s)| ((i + 2) * (s + 1)) as i64).sum::<i64>()), k.len());
            for i in 0..k.len() {
                f = &f * &(&RatFun::var(i, k.len()) + &RatFun::constant(rint(i as i64 + 1), k.len()));
            }
            Ok(f)
        })
        .unwrap();
        assert_eq!(m.swap().unwrap().unswap().unwrap(), m);
        assert_eq!(m.unswap().unwrap().swap().unwrap(), m);
    }

    #[test]
    fn involutions() {
        let p = paj(triv(), 3);
        assert_eq!(p.minus().minus(), p);
        assert_eq!(p.minus().get1(&[0]), inv(&[1]).neg());
        assert_eq!(p.anti().unwrap().anti().unwrap(), p);
        let g = Arc::new(Alphabet::cyclic(2));
        let m = Mould::from_fn(FamilyTag::Pol, vec![g], 2, |k| {
            Ok(if k.len() == 2 {
                RatFun::var(0, 2).scale(&rint(1 + k.labels[0] as i64))
            } else {
                RatFun::zero(k.len())
            })
        })
        .unwrap();
        let a = m.anti().unwrap();
        // anti(M)(x1,x2; s1,s2) = M(x2,x1; s2,s1)
        assert_eq!(a.get1(&[0, 1]), RatFun::var(1, 2).scale(&rint(2)));
    }

    #[test]
    fn sh_of_small_moulds() {
        let p = paj(triv(), 3);
        let sh = p.sh_map().unwrap();
        let k = Key::new(vec![1, 1], vec![0, 0]);
        let expect = &(&inv(&[1, 0]) * &inv(&[1, 1])) + &(&inv(&[0, 1]) * &inv(&[1, 1]));
        assert_eq!(sh.get(&k), expect);
        let sst = pic(triv(), 3).sh_star_map().unwrap();
        assert_eq!(sst.get(&k), &inv(&[1, 0]) * &inv(&[0, 1]));
        assert_eq!(sst.get(&Key::new(vec![1, 0], vec![0])), inv(&[1]));
    }

    #[test]
    fn named_symmetries() {
        let g = triv();
        assert!(is_symmetral(&paj(g.clone(), 4), 4).unwrap());
        assert!(symmetry_check(Symmetry::Symmetril, &pic(g.clone(), 4), 4).unwrap().passed());
        assert!(!symmetry_check(Symmetry::Symmetril, &paj(g.clone(), 3), 3).unwrap().passed());
        assert!(is_alternal(&Mould::zero1(FamilyTag::Pol, g, 3), 3).unwrap());
    }

    #[test]
    fn tensor_and_json() {
        let p = paj(triv(), 2);
        let t = p.tensor(&p).unwrap();
        assert_eq!(t.get(&Key::new(vec![1, 1], vec![0, 0])), &inv(&[1, 0]) * &inv(&[0, 1]));
        let back = Mould::from_json(&t.to_json(), true).unwrap();
        assert_eq!(back, t);
        let s = Mould::from_json(&p.to_json(), true).unwrap();
        assert_eq!(s, p);
        let mut bad = p.to_json();
        bad["family"] = json!("pol");
        assert!(Mould::from_json(&bad, true).is_err());
        assert_eq!(p.empty_value(), rat(1, 1));
    }
}

