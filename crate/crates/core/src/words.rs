//! Words over bi-layer letters `(u; σ)`: shuffle, stuffle and the four flexions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ratfun::{LinForm, RatFun, RatFunError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet has no group law")]
    NoGroupLaw,
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("orientation mismatch")]
    OrientationMismatch,
    #[error("group axioms fail: {0}")]
    BadGroup(String),
    #[error(transparent)]
    RatFun(#[from] RatFunError),
}

// ---------------------------------------------------------------------------
// Alphabets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GroupLaw {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

/// A finite ordered label set, optionally carrying an abelian-or-not group law.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
    group: Option<GroupLaw>,
}

pub type AlphabetRef = Arc<Alphabet>;

impl Alphabet {
    /// The trivial group `{1}`.
    pub fn trivial() -> Self {
        Alphabet::cyclic(1)
    }

    /// The cyclic group of order `k`, symbols `1, z, z^2, ...`.
    pub fn cyclic(k: usize) -> Self {
        assert!(k >= 1);
        let symbols = (0..k)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "z".to_string(),
                _ => format!("z^{i}"),
            })
            .collect();
        let table = (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect();
        let inverse = (0..k).map(|a| (k - a) % k).collect();
        Alphabet { symbols, group: Some(GroupLaw { table, identity: 0, inverse }) }
    }

    /// The plain label set `[k] = {1, ..., k}` without a group law.
    pub fn set(k: usize) -> Self {
        Alphabet { symbols: (1..=k).map(|i| i.to_string()).collect(), group: None }
    }

    /// A plain set with the given symbol names.
    pub fn named(symbols: &[&str]) -> Self {
        Alphabet { symbols: symbols.iter().map(|s| s.to_string()).collect(), group: None }
    }

    /// Builds a group from a multiplication table, checking the axioms.
    pub fn with_group(symbols: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, WordError> {
        let n = symbols.len();
        if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&c| c >= n)) {
            return Err(WordError::BadGroup("table shape".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| WordError::BadGroup("no identity".into()))?;
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| WordError::BadGroup(format!("{} has no inverse", symbols[a])))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(WordError::BadGroup("not associative".into()));
                    }
                }
            }
        }
        Ok(Alphabet { symbols, group: Some(GroupLaw { table, identity, inverse }) })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.symbols.iter().position(|t| t == s)
    }

    pub fn has_group(&self) -> bool {
        self.group.is_some()
    }

    pub fn is_abelian(&self) -> bool {
        self.group.as_ref().is_some_and(|g| {
            (0..self.len()).all(|a| (0..self.len()).all(|b| g.table[a][b] == g.table[b][a]))
        })
    }

    fn law(&self) -> Result<&GroupLaw, WordError> {
        self.group.as_ref().ok_or(WordError::NoGroupLaw)
    }

    pub fn mul(&self, a: usize, b: usize) -> Result<usize, WordError> {
        Ok(self.law()?.table[a][b])
    }

    pub fn inv(&self, a: usize) -> Result<usize, WordError> {
        Ok(self.law()?.inverse[a])
    }

    pub fn identity(&self) -> Result<usize, WordError> {
        Ok(self.law()?.identity)
    }

    /// Every label tuple of length `m`, lexicographic in symbol index.
    pub fn tuples(&self, m: usize) -> Vec<Vec<usize>> {
        let k = self.len();
        let mut out = vec![vec![]];
        for _ in 0..m {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..k).map(move |s| {
                        let mut t = t.clone();
                        t.push(s);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// A short name: `trivial`, `zK`, `[K]` or the symbol list.
    pub fn name(&self) -> String {
        let k = self.len();
        if *self == Alphabet::cyclic(k) {
            if k == 1 {
                "trivial".into()
            } else {
                format!("z{k}")
            }
        } else if *self == Alphabet::set(k) {
            format!("[{k}]")
        } else {
            format!("{{{}}}", self.symbols.join(","))
        }
    }

    pub fn parse(s: &str) -> Option<Alphabet> {
        if s == "trivial" {
            return Some(Alphabet::trivial());
        }
        if let Some(k) = s.strip_prefix('z').and_then(|k| k.parse().ok()).filter(|&k: &usize| k >= 1) {
            return Some(Alphabet::cyclic(k));
        }
        if let Some(k) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).and_then(|k| k.parse().ok()) {
            return Some(Alphabet::set(k));
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// One letter `(u; σ)`: a linear form and a label index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub u: LinForm,
    pub sigma: usize,
}

impl Letter {
    pub fn new(u: LinForm, sigma: usize) -> Self {
        Letter { u, sigma }
    }
}

/// Which layer carries the linear forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub orientation: Orientation,
}

impl Word {
    pub fn empty(orientation: Orientation) -> Self {
        Word { letters: vec![], orientation }
    }

    pub fn x(letters: Vec<Letter>) -> Self {
        Word { letters, orientation: Orientation::X }
    }

    pub fn y(letters: Vec<Letter>) -> Self {
        Word { letters, orientation: Orientation::Y }
    }

    /// The canonical word `(x_1, ..., x_m; σ)` in `m` variables.
    pub fn canonical(labels: &[usize], orientation: Orientation) -> Self {
        let m = labels.len();
        Word {
            letters: labels
                .iter()
                .enumerate()
                .map(|(i, &s)| Letter::new(LinForm::var(i, m), s))
                .collect(),
            orientation,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn forms(&self) -> Vec<LinForm> {
        self.letters.iter().map(|l| l.u.clone()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.sigma).collect()
    }

    /// Sum of all forms, in `d` ambient variables.
    pub fn form_sum(&self, d: usize) -> LinForm {
        self.letters.iter().fold(LinForm::zero(d), |acc, l| acc.add(&l.u))
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend(o.letters.iter().cloned());
        Word { letters, orientation: self.orientation }
    }

    pub fn slice(&self, i: usize, j: usize) -> Word {
        Word { letters: self.letters[i..j].to_vec(), orientation: self.orientation }
    }

    pub fn display(&self, alpha: &Alphabet) -> String {
        let forms: Vec<String> = self.letters.iter().map(|l| l.u.to_string()).collect();
        let labels: Vec<String> = self.letters.iter().map(|l| alpha.symbol(l.sigma).to_string()).collect();
        match self.orientation {
            Orientation::X => format!("({}; {})", forms.join(","), labels.join(",")),
            Orientation::Y => format!("({}; {})", labels.join(","), forms.join(",")),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.letters.iter().map(|l| format!("{}|{}", l.u, l.sigma)).collect();
        write!(f, "[{}]", body.join(", "))
    }
}

/// A finite linear combination of words with rational-function coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSum {
    pub nvars: usize,
    pub terms: BTreeMap<Word, RatFun>,
}

impl WordSum {
    pub fn zero(nvars: usize) -> Self {
        WordSum { nvars, terms: BTreeMap::new() }
    }

    pub fn single(w: Word, nvars: usize) -> Self {
        let mut s = WordSum::zero(nvars);
        s.add_term(w, RatFun::one(nvars));
        s
    }

    pub fn add_term(&mut self, w: Word, c: RatFun) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&mut self, o: &WordSum) {
        for (w, c) in &o.terms {
            self.add_term(w.clone(), c.clone());
        }
    }

    pub fn scale(&self, k: &RatFun) -> WordSum {
        let mut s = WordSum::zero(self.nvars);
        for (w, c) in &self.terms {
            s.add_term(w.clone(), c * k);
        }
        s
    }

    /// Prepends a letter to every word.
    pub fn prepend(&self, l: &Letter) -> WordSum {
        let mut s = WordSum::zero(self.nvars);
        for (w, c) in &self.terms {
            let mut letters = vec![l.clone()];
            letters.extend(w.letters.iter().cloned());
            s.terms.insert(Word { letters, orientation: w.orientation }, c.clone());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn check_pair(a: &Word, b: &Word) -> Result<(), WordError> {
    if a.orientation != b.orientation && !a.is_empty() && !b.is_empty() {
        return Err(WordError::OrientationMismatch);
    }
    Ok(())
}

/// Shuffle product `a ш b`, integer coefficients.
pub fn shuffle(a: &Word, b: &Word, nvars: usize) -> Result<WordSum, WordError> {
    check_pair(a, b)?;
    let orientation = if a.is_empty() { b.orientation } else { a.orientation };
    let mut counts: BTreeMap<Vec<Letter>, i64> = BTreeMap::new();
    shuffle_rec(&a.letters, &b.letters, &mut vec![], &mut counts);
    let mut s = WordSum::zero(nvars);
    for (letters, c) in counts {
        s.add_term(
            Word { letters, orientation },
            RatFun::constant(crate::ratfun::rint(c), nvars),
        );
    }
    Ok(s)
}

fn shuffle_rec(a: &[Letter], b: &[Letter], acc: &mut Vec<Letter>, out: &mut BTreeMap<Vec<Letter>, i64>) {
    if a.is_empty() || b.is_empty() {
        let mut w = acc.clone();
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        *out.entry(w).or_insert(0) += 1;
        return;
    }
    acc.push(a[0].clone());
    shuffle_rec(&a[1..], b, acc, out);
    acc.pop();
    acc.push(b[0].clone());
    shuffle_rec(a, &b[1..], acc, out);
    acc.pop();
}

/// All interleavings of positions: for each, the index list into `a ++ b`.
///
/// Used by the `Sh` maps, which need the pairing rather than the words.
pub fn shuffle_positions(p: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    fn rec(i: usize, j: usize, p: usize, q: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == p && j == q {
            out.push(acc.clone());
            return;
        }
        if i < p {
            acc.push(i);
            rec(i + 1, j, p, q, acc, out);
            acc.pop();
        }
        if j < q {
            acc.push(p + j);
            rec(i, j + 1, p, q, acc, out);
            acc.pop();
        }
    }
    rec(0, 0, p, q, &mut vec![], &mut out);
    out
}

/// Stuffle (quasi-shuffle with divided-difference contraction) of Y-words.
///
/// `(σ;v)ω ш∗ (σ';v')η = (σ;v)(ω ш∗ (σ';v')η) + (σ';v')((σ;v)ω ш∗ η)
///   + 1/(v−v') [(σσ';v)(ω ш∗ η) − (σσ';v')(ω ш∗ η)]`, and the product of two
/// words with equal leading forms is zero.
pub fn stuffle(a: &Word, b: &Word, alpha: &Alphabet, nvars: usize) -> Result<WordSum, WordError> {
    check_pair(a, b)?;
    if !alpha.has_group() {
        return Err(WordError::NoGroupLaw);
    }
    stuffle_rec(&a.letters, &b.letters, alpha, nvars)
}

fn stuffle_rec(a: &[Letter], b: &[Letter], alpha: &Alphabet, nvars: usize) -> Result<WordSum, WordError> {
    if a.is_empty() || b.is_empty() {
        let mut w = a.to_vec();
        w.extend_from_slice(b);
        return Ok(WordSum::single(Word::y(w), nvars));
    }
    let (x, y) = (&a[0], &b[0]);
    if x.u == y.u {
        return Ok(WordSum::zero(nvars));
    }
    let mut s = stuffle_rec(&a[1..], b, alpha, nvars)?.prepend(x);
    s.add(&stuffle_rec(a, &b[1..], alpha, nvars)?.prepend(y));
    let rest = stuffle_rec(&a[1..], &b[1..], alpha, nvars)?;
    let st = alpha.mul(x.sigma, y.sigma)?;
    let k = RatFun::inv_linear(&x.u.sub(&y.u))?;
    let mut corr = rest.prepend(&Letter::new(x.u.clone(), st));
    corr.add(&rest.prepend(&Letter::new(y.u.clone(), st)).scale(&RatFun::constant(crate::ratfun::rint(-1), nvars)));
    s.add(&corr.scale(&k));
    Ok(s)
}

// ---------------------------------------------------------------------------
// Flexions
// ---------------------------------------------------------------------------

/// The four flexions; argument order is always `(left, right)` as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flexion {
    /// `⌈β⌉α`: α with the first form shifted by the sum of β's forms.
    UpperRight,
    /// `α⌉β`: α with the last form shifted by the sum of β's forms.
    UpperLeft,
    /// `⌊β⌋α`: α with labels `τ_n^{-1} σ_i` (τ_n the last label of β).
    LowerRight,
    /// `α⌊β`: α with labels `σ_i τ_1^{-1}` (τ_1 the first label of β).
    LowerLeft,
}

/// Applies a flexion to `(left, right)`; `d` is the ambient arity of the forms.
pub fn flexion(kind: Flexion, left: &Word, right: &Word, alpha: &Alphabet, d: usize) -> Result<Word, WordError> {
    use Flexion::*;
    // the modified word and the context word
    let (target, ctx) = match kind {
        UpperRight | LowerRight => (right, left),
        UpperLeft | LowerLeft => (left, right),
    };
    if target.is_empty() {
        return Ok(Word::empty(target.orientation));
    }
    if ctx.is_empty() {
        return Ok(target.clone());
    }
    let mut w = target.clone();
    match kind {
        UpperRight => w.letters[0].u = w.letters[0].u.add(&ctx.form_sum(d)),
        UpperLeft => {
            let n = w.len() - 1;
            w.letters[n].u = w.letters[n].u.add(&ctx.form_sum(d));
        }
        LowerRight => {
            let t = alpha.inv(ctx.letters.last().unwrap().sigma)?;
            for l in &mut w.letters {
                l.sigma = alpha.mul(t, l.sigma)?;
            }
        }
        LowerLeft => {
            let t = alpha.inv(ctx.letters[0].sigma)?;
            for l in &mut w.letters {
                l.sigma = alpha.mul(l.sigma, t)?;
            }
        }
    }
    Ok(w)
}

pub fn urflex(b: &Word, a: &Word, alpha: &Alphabet, d: usize) -> Result<Word, WordError> {
    flexion(Flexion::UpperRight, b, a, alpha, d)
}

pub fn ulflex(a: &Word, b: &Word, alpha: &Alphabet, d: usize) -> Result<Word, WordError> {
    flexion(Flexion::UpperLeft, a, b, alpha, d)
}

pub fn lrflex(b: &Word, a: &Word, alpha: &Alphabet, d: usize) -> Result<Word, WordError> {
    flexion(Flexion::LowerRight, b, a, alpha, d)
}

pub fn llflex(a: &Word, b: &Word, alpha: &Alphabet, d: usize) -> Result<Word, WordError> {
    flexion(Flexion::LowerLeft, a, b, alpha, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(forms: &[&[i64]], labels: &[usize]) -> Word {
        Word::x(forms.iter().zip(labels).map(|(f, &s)| Letter::new(LinForm(f.to_vec()), s)).collect())
    }

    #[test]
    fn shuffle_counts() {
        let a = w(&[&[1, 0, 0], &[0, 1, 0]], &[0, 0]);
        let c = w(&[&[0, 0, 1]], &[0]);
        let s = shuffle(&a, &c, 3).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.terms.values().all(|v| v.is_one()));
        let e = Word::empty(Orientation::X);
        assert_eq!(shuffle(&e, &a, 3).unwrap(), WordSum::single(a.clone(), 3));
        assert_eq!(shuffle_positions(2, 3).len(), 10);
    }

    #[test]
    fn stuffle_length_one() {
        let g = Alphabet::trivial();
        let a = Word::y(vec![Letter::new(LinForm(vec![1, 0]), 0)]);
        let b = Word::y(vec![Letter::new(LinForm(vec![0, 1]), 0)]);
        let s = stuffle(&a, &b, &g, 2).unwrap();
        assert_eq!(s.len(), 4);
        let k = RatFun::inv_linear(&LinForm(vec![1, -1])).unwrap();
        assert_eq!(s.terms[&a], k);
        assert_eq!(s.terms[&b], k.neg());
        assert!(stuffle(&a, &a, &g, 2).unwrap().is_empty());
        assert!(stuffle(&a, &b, &Alphabet::set(1), 2).is_err());
    }

    #[test]
    fn flexion_table() {
        let g = Alphabet::cyclic(3);
        let beta = w(&[&[0, 0, 1]], &[1]);
        let alpha = w(&[&[1, 0, 0], &[0, 1, 0]], &[1, 2]);
        let r = urflex(&beta, &alpha, &g, 3).unwrap();
        assert_eq!(r, w(&[&[1, 0, 1], &[0, 1, 0]], &[1, 2]));
        let r = ulflex(&alpha, &beta, &g, 3).unwrap();
        assert_eq!(r, w(&[&[1, 0, 0], &[0, 1, 1]], &[1, 2]));
        // labels shifted by z^{-1}
        let r = lrflex(&beta, &alpha, &g, 3).unwrap();
        assert_eq!(r.labels(), vec![0, 1]);
        let r = llflex(&alpha, &beta, &g, 3).unwrap();
        assert_eq!(r.labels(), vec![0, 1]);
        let e = Word::empty(Orientation::X);
        for k in [Flexion::UpperRight, Flexion::UpperLeft, Flexion::LowerRight, Flexion::LowerLeft] {
            let (with_empty_ctx, with_empty_target) = match k {
                Flexion::UpperRight | Flexion::LowerRight => (
                    flexion(k, &e, &alpha, &g, 3).unwrap(),
                    flexion(k, &alpha, &e, &g, 3).unwrap(),
                ),
                _ => (
                    flexion(k, &alpha, &e, &g, 3).unwrap(),
                    flexion(k, &e, &alpha, &g, 3).unwrap(),
                ),
            };
            assert_eq!(with_empty_ctx, alpha);
            assert!(with_empty_target.is_empty());
        }
        assert!(lrflex(&beta, &alpha, &Alphabet::set(3), 3).is_err());
    }
}
