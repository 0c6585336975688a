//! Exact coefficient arithmetic.
//!
//! Big rationals, sparse multivariate polynomials and rational functions whose
//! denominators are products of primitive integer linear forms. Every
//! denominator produced by the mould operations in this crate (divided
//! differences, `paj`, stuffle corrections, the `c0` reduction) has that shape,
//! so cancellation reduces to repeated exact division by linear forms.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

/// The ground field.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatFunError {
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("substituted forms are linearly dependent")]
    DependentForms,
    #[error("denominator factor vanishes after substitution")]
    ZeroDenominator,
    #[error("divisibility violated: quotient is not a polynomial")]
    DivisibilityViolated,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, RatFunError>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `"p/q"`.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or `"p"`. With `strict`, an unreduced fraction is an error.
pub fn parse_rational(s: &str, strict: bool) -> Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| RatFunError::Parse(format!("bad numerator in {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| RatFunError::Parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(RatFunError::Parse(format!("zero denominator in {s:?}")));
    }
    if strict && (d.is_negative() || !n.gcd(&d).is_one()) {
        return Err(RatFunError::Parse(format!("unreduced rational {s:?}")));
    }
    Ok(Rational::new(n, d))
}

// ---------------------------------------------------------------------------
// Family tags
// ---------------------------------------------------------------------------

/// Which family of functions a mould's components are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FamilyTag {
    /// Polynomials.
    Pol,
    /// Rational functions with linear-form denominators.
    Rat,
    /// Polynomials truncated by weight: a length-`m` component keeps total
    /// degree `<= N - m`.
    TruncSer(u32),
}

impl FamilyTag {
    /// The family of a binary operation's result.
    pub fn join(self, other: FamilyTag) -> FamilyTag {
        use FamilyTag::*;
        match (self, other) {
            (TruncSer(a), TruncSer(b)) => TruncSer(a.min(b)),
            (TruncSer(a), _) | (_, TruncSer(a)) => TruncSer(a),
            (Rat, _) | (_, Rat) => Rat,
            _ => Pol,
        }
    }

    pub fn name(&self) -> String {
        match self {
            FamilyTag::Pol => "pol".into(),
            FamilyTag::Rat => "rat".into(),
            FamilyTag::TruncSer(n) => format!("ser:{n}"),
        }
    }

    pub fn parse(s: &str) -> Result<FamilyTag> {
        match s {
            "pol" => Ok(FamilyTag::Pol),
            "rat" => Ok(FamilyTag::Rat),
            _ => s
                .strip_prefix("ser:")
                .and_then(|n| n.parse().ok())
                .map(FamilyTag::TruncSer)
                .ok_or_else(|| RatFunError::Parse(format!("unknown family {s:?}"))),
        }
    }

    /// Maximal polynomial degree allowed in a component of the given length.
    pub fn degree_cap(&self, length: usize) -> Option<u32> {
        match self {
            FamilyTag::TruncSer(n) => Some(n.saturating_sub(length as u32)),
            _ => None,
        }
    }

    /// Brings a value into the family: truncates series and rejects
    /// denominators outside `Rat`.
    pub fn admit(&self, f: RatFun, length: usize) -> Result<RatFun> {
        match self {
            FamilyTag::Rat => Ok(f),
            FamilyTag::Pol => {
                if f.is_poly() {
                    Ok(f)
                } else {
                    Err(RatFunError::DivisibilityViolated)
                }
            }
            FamilyTag::TruncSer(n) => {
                if !f.is_poly() {
                    return Err(RatFunError::DivisibilityViolated);
                }
                if (length as u32) > *n {
                    return Ok(RatFun::zero(f.nvars()));
                }
                Ok(RatFun::from_poly(f.num.truncate(n - length as u32)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Linear forms
// ---------------------------------------------------------------------------

/// An integer linear form `a_1 x_1 + ... + a_d x_d`.
///
/// Letters of words carry arbitrary forms; denominator factors are kept
/// primitive with a positive first nonzero entry (see [`LinForm::normalize`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinForm(pub Vec<i64>);

impl LinForm {
    pub fn zero(d: usize) -> Self {
        LinForm(vec![0; d])
    }

    /// The coordinate form `x_{i+1}` (0-based index `i`) in `d` variables.
    pub fn var(i: usize, d: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        LinForm(v)
    }

    /// `x_{i+1} + ... + x_{j}` for the half-open index range `i..j`.
    pub fn range_sum(i: usize, j: usize, d: usize) -> Self {
        let mut v = vec![0; d];
        for e in v.iter_mut().take(j).skip(i) {
            *e = 1;
        }
        LinForm(v)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        debug_assert_eq!(self.arity(), o.arity());
        LinForm(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        debug_assert_eq!(self.arity(), o.arity());
        LinForm(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LinForm {
        LinForm(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> LinForm {
        LinForm(self.0.iter().map(|a| a * k).collect())
    }

    /// Index of the first nonzero coefficient.
    pub fn lead(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }

    /// Splits `self = s * p` with `p` primitive and sign-normalized.
    pub fn normalize(&self) -> (i64, LinForm) {
        let g = self.0.iter().fold(0i64, |g, &c| g.gcd(&c));
        if g == 0 {
            return (0, self.clone());
        }
        let lead = self.0[self.lead().unwrap()];
        let s = if lead < 0 { -g } else { g };
        (s, LinForm(self.0.iter().map(|c| c / s).collect()))
    }

    pub fn is_normalized(&self) -> bool {
        let (s, _) = self.normalize();
        s == 1
    }

    /// Composes with a substitution `x_i -> forms[i]`.
    pub fn substitute(&self, forms: &[LinForm], e: usize) -> LinForm {
        let mut out = vec![0i64; e];
        for (c, f) in self.0.iter().zip(forms) {
            if *c != 0 {
                for (o, a) in out.iter_mut().zip(&f.0) {
                    *o += c * a;
                }
            }
        }
        LinForm(out)
    }

    /// Re-embeds into `d` variables, shifting indices by `offset`.
    pub fn embed(&self, offset: usize, d: usize) -> LinForm {
        let mut v = vec![0; d];
        v[offset..offset + self.arity()].copy_from_slice(&self.0);
        LinForm(v)
    }

    pub fn to_poly(&self) -> Poly {
        let d = self.arity();
        let mut p = Poly::zero(d);
        for (i, &c) in self.0.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0u32; d];
                e[i] = 1;
                p.terms.insert(e, rint(c));
            }
        }
        p
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "{}", if c > 0 { "+" } else { "-" })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            if c.abs() != 1 {
                write!(f, "{}", c.abs())?;
            }
            write!(f, "x{}", i + 1)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Rank of a set of integer vectors (fraction-free elimination).
pub fn int_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let a = m[rank][col].clone();
            let b = m[r][col].clone();
            for c in 0..ncols {
                let v = &m[r][c] * &a - &m[rank][c] * &b;
                m[r][c] = v;
            }
        }
        rank += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// Sparse polynomial over `Q` in `nvars` variables.
///
/// Terms are keyed by exponent vectors; the map order is lexicographic on the
/// exponent vector, which is the monomial order used for division and display.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    pub(crate) terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational, nvars: usize) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(Rational::one(), nvars)
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        LinForm::var(i, nvars).to_poly()
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
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

    /// The constant term.
    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn truncate(&self, max_deg: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= max_deg)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "poly arity mismatch");
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn add_assign(&mut self, o: &Poly) {
        assert_eq!(self.nvars, o.nvars, "poly arity mismatch");
        for (e, c) in &o.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "poly arity mismatch");
        let mut r = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    /// Product truncated to total degree `<= cap`.
    pub fn mul_truncated(&self, o: &Poly, cap: u32) -> Poly {
        assert_eq!(self.nvars, o.nvars, "poly arity mismatch");
        let mut r = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            if d1 > cap {
                continue;
            }
            for (e2, c2) in &o.terms {
                if d1 + e2.iter().sum::<u32>() > cap {
                    continue;
                }
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one(self.nvars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Exact division by a nonzero linear form; `None` if not divisible.
    ///
    /// Multivariate division along the form's leading variable: the leading
    /// monomial (in the map's lexicographic order) of the form is `x_k` with
    /// `k` its first nonzero index, so each step must find `x_k` in the
    /// remainder's leading monomial.
    pub fn div_linear(&self, l: &LinForm) -> Option<Poly> {
        assert_eq!(self.nvars, l.arity(), "poly arity mismatch");
        let k = l.lead()?;
        let lc = rint(l.0[k]);
        let mut rem = self.clone();
        let mut q = Poly::zero(self.nvars);
        while let Some((e, c)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            if e[k] == 0 {
                return None;
            }
            let mut qe = e.clone();
            qe[k] -= 1;
            let qc = c / &lc;
            for (i, &a) in l.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let mut te = qe.clone();
                te[i] += 1;
                rem.add_term(te, -(&qc * rint(a)));
            }
            q.add_term(qe, qc);
        }
        Some(q)
    }

    /// Substitutes `x_i -> forms[i]` (forms over `e` variables).
    pub fn substitute_linear(&self, forms: &[LinForm], e: usize) -> Poly {
        assert_eq!(forms.len(), self.nvars, "substitution arity");
        let lin: Vec<Poly> = forms.iter().map(|f| f.to_poly()).collect();
        let mut powers: Vec<Vec<Poly>> = vec![vec![Poly::one(e)]; self.nvars];
        let mut out = Poly::zero(e);
        for (ex, c) in &self.terms {
            let mut term = Poly::constant(c.clone(), e);
            for (i, &k) in ex.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&lin[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][k as usize]);
            }
            out.add_assign(&term);
        }
        out
    }

    /// Re-embeds into `d` variables, shifting indices by `offset`.
    pub fn embed(&self, offset: usize, d: usize) -> Poly {
        Poly {
            nvars: d,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut v = vec![0u32; d];
                    v[offset..offset + self.nvars].copy_from_slice(e);
                    (v, c.clone())
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| json!([rational_to_string(c), e]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, nvars: usize, strict: bool) -> Result<Poly> {
        let arr = v.as_array().ok_or_else(|| RatFunError::Parse("poly must be a list".into()))?;
        let mut p = Poly::zero(nvars);
        for t in arr {
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| RatFunError::Parse("poly term must be [coef, exps]".into()))?;
            let c = pair[0]
                .as_str()
                .ok_or_else(|| RatFunError::Parse("coefficient must be a string".into()))
                .and_then(|s| parse_rational(s, strict))?;
            let e: Vec<u32> = serde_json::from_value(pair[1].clone())
                .map_err(|e| RatFunError::Parse(e.to_string()))?;
            if e.len() != nvars {
                return Err(RatFunError::Invariant(format!(
                    "exponent vector of length {} in arity {nvars}",
                    e.len()
                )));
            }
            if strict && c.is_zero() {
                return Err(RatFunError::Invariant("stored zero coefficient".into()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let is_const = e.iter().all(|&k| k == 0);
            let neg = c.is_negative();
            let a = c.abs();
            if n > 0 {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            } else if neg {
                write!(f, "-")?;
            }
            if !a.is_one() || is_const {
                write!(f, "{a}")?;
            }
            let mut first = a.is_one();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", i + 1)?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// `num / prod(form^mult)`, fully cancelled, with sorted primitive factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    pub(crate) num: Poly,
    pub(crate) den: Vec<(LinForm, u32)>,
}

impl RatFun {
    pub fn zero(nvars: usize) -> Self {
        RatFun { num: Poly::zero(nvars), den: vec![] }
    }

    pub fn one(nvars: usize) -> Self {
        RatFun::constant(Rational::one(), nvars)
    }

    pub fn constant(c: Rational, nvars: usize) -> Self {
        RatFun { num: Poly::constant(c, nvars), den: vec![] }
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        RatFun::from_poly(Poly::var(i, nvars))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun { num: p, den: vec![] }
    }

    pub fn from_linform(l: &LinForm) -> Self {
        RatFun::from_poly(l.to_poly())
    }

    /// `1 / l` for a nonzero form `l`.
    pub fn inv_linear(l: &LinForm) -> Result<Self> {
        let (s, p) = l.normalize();
        if s == 0 {
            return Err(RatFunError::ZeroDenominator);
        }
        Ok(RatFun {
            num: Poly::constant(rat(1, s), l.arity()),
            den: vec![(p, 1)],
        })
    }

    /// Builds `num / prod(den)` from arbitrary (nonzero) forms and cancels.
    pub fn from_parts(num: Poly, den: &[(LinForm, u32)]) -> Result<Self> {
        let mut scale = BigInt::one();
        let mut factors: BTreeMap<LinForm, u32> = BTreeMap::new();
        for (l, m) in den {
            if l.arity() != num.nvars() {
                return Err(RatFunError::ArityMismatch(l.arity(), num.nvars()));
            }
            if *m == 0 {
                continue;
            }
            let (s, p) = l.normalize();
            if s == 0 {
                return Err(RatFunError::ZeroDenominator);
            }
            scale *= BigInt::from(s).pow(*m);
            *factors.entry(p).or_insert(0) += m;
        }
        let num = num.scale(&Rational::new(BigInt::one(), scale));
        Ok(RatFun::cancel(num, factors.into_iter().collect()))
    }

    fn cancel(mut num: Poly, den: Vec<(LinForm, u32)>) -> Self {
        if num.is_zero() {
            return RatFun::zero(num.nvars());
        }
        let mut out = Vec::with_capacity(den.len());
        for (l, mut m) in den {
            while m > 0 {
                match num.div_linear(&l) {
                    Some(q) => {
                        num = q;
                        m -= 1;
                    }
                    None => break,
                }
            }
            if m > 0 {
                out.push((l, m));
            }
        }
        RatFun { num, den: out }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &[(LinForm, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num == Poly::one(self.nvars())
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_empty() && self.num.is_constant()
    }

    /// Constant value, if the function is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        self.is_constant().then(|| self.num.constant_term())
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.is_empty().then_some(&self.num)
    }

    /// The denominator expanded as a polynomial.
    pub fn den_poly(&self) -> Poly {
        let mut p = Poly::one(self.nvars());
        for (l, m) in &self.den {
            p = p.mul(&l.to_poly().pow(*m));
        }
        p
    }

    fn check(&self, o: &RatFun) -> Result<()> {
        if self.nvars() != o.nvars() {
            Err(RatFunError::ArityMismatch(self.nvars(), o.nvars()))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, o: &RatFun) -> Result<RatFun> {
        self.check(o)?;
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        if self.den.is_empty() && o.den.is_empty() {
            return Ok(RatFun::from_poly(self.num.add(&o.num)));
        }
        if self.den == o.den {
            return Ok(RatFun::cancel(self.num.add(&o.num), self.den.clone()));
        }
        // least common multiple of the two factor multisets
        let mut lcm: BTreeMap<LinForm, u32> = self.den.iter().cloned().collect();
        for (l, m) in &o.den {
            let e = lcm.entry(l.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let lift = |f: &RatFun| -> Poly {
            let own: BTreeMap<&LinForm, u32> = f.den.iter().map(|(l, m)| (l, *m)).collect();
            let mut p = f.num.clone();
            for (l, m) in &lcm {
                let k = m - own.get(l).copied().unwrap_or(0);
                if k > 0 {
                    p = p.mul(&l.to_poly().pow(k));
                }
            }
            p
        };
        let num = lift(self).add(&lift(o));
        Ok(RatFun::cancel(num, lcm.into_iter().collect()))
    }

    pub fn checked_mul(&self, o: &RatFun) -> Result<RatFun> {
        self.check(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(RatFun::zero(self.nvars()));
        }
        if self.den.is_empty() && o.den.is_empty() {
            return Ok(RatFun::from_poly(self.num.mul(&o.num)));
        }
        let mut den: BTreeMap<LinForm, u32> = self.den.iter().cloned().collect();
        for (l, m) in &o.den {
            *den.entry(l.clone()).or_insert(0) += m;
        }
        Ok(RatFun::cancel(self.num.mul(&o.num), den.into_iter().collect()))
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, k: &Rational) -> RatFun {
        if k.is_zero() {
            return RatFun::zero(self.nvars());
        }
        RatFun { num: self.num.scale(k), den: self.den.clone() }
    }

    /// Division by a nonzero linear form.
    pub fn div_linear(&self, l: &LinForm) -> Result<RatFun> {
        if l.arity() != self.nvars() {
            return Err(RatFunError::ArityMismatch(l.arity(), self.nvars()));
        }
        self.checked_mul(&RatFun::inv_linear(l)?)
    }

    /// Substitutes `x_i -> forms[i]`, forms over `e` variables.
    pub fn substitute_linear(&self, forms: &[LinForm], e: usize) -> Result<RatFun> {
        if forms.len() != self.nvars() {
            return Err(RatFunError::ArityMismatch(forms.len(), self.nvars()));
        }
        if let Some(f) = forms.iter().find(|f| f.arity() != e) {
            return Err(RatFunError::ArityMismatch(f.arity(), e));
        }
        if !forms.is_empty() && int_rank(&forms.iter().map(|f| f.0.clone()).collect::<Vec<_>>()) < forms.len() {
            return Err(RatFunError::DependentForms);
        }
        self.substitute_unchecked(forms, e)
    }

    /// Substitution without the independence check; a denominator factor that
    /// vanishes is still an error.
    pub fn substitute_unchecked(&self, forms: &[LinForm], e: usize) -> Result<RatFun> {
        let num = self.num.substitute_linear(forms, e);
        if self.den.is_empty() {
            return Ok(RatFun::from_poly(num));
        }
        let den: Vec<(LinForm, u32)> = self
            .den
            .iter()
            .map(|(l, m)| (l.substitute(forms, e), *m))
            .collect();
        RatFun::from_parts(num, &den)
    }

    /// Re-embeds into `d` variables, shifting indices by `offset`.
    pub fn embed(&self, offset: usize, d: usize) -> RatFun {
        RatFun {
            num: self.num.embed(offset, d),
            den: self.den.iter().map(|(l, m)| (l.embed(offset, d), *m)).collect(),
        }
    }

    /// `f(-x)`.
    pub fn negate_vars(&self) -> RatFun {
        let d = self.nvars();
        let forms: Vec<LinForm> = (0..d).map(|i| LinForm::var(i, d).neg()).collect();
        self.substitute_unchecked(&forms, d).expect("negation keeps denominators nonzero")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "num": self.num.to_json(),
            "den": self.den.iter().map(|(l, m)| json!([l.0, m])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, nvars: usize, strict: bool) -> Result<RatFun> {
        let num = Poly::from_json(
            v.get("num").ok_or_else(|| RatFunError::Parse("missing num".into()))?,
            nvars,
            strict,
        )?;
        let mut den = vec![];
        if let Some(d) = v.get("den") {
            let arr = d.as_array().ok_or_else(|| RatFunError::Parse("den must be a list".into()))?;
            for f in arr {
                let pair = f
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| RatFunError::Parse("den factor must be [form, mult]".into()))?;
                let l: Vec<i64> = serde_json::from_value(pair[0].clone())
                    .map_err(|e| RatFunError::Parse(e.to_string()))?;
                let m: u32 = serde_json::from_value(pair[1].clone())
                    .map_err(|e| RatFunError::Parse(e.to_string()))?;
                let l = LinForm(l);
                if l.arity() != nvars {
                    return Err(RatFunError::Invariant("denominator form arity".into()));
                }
                if l.is_zero() {
                    return Err(RatFunError::Invariant("zero denominator form".into()));
                }
                if strict && !l.is_normalized() {
                    return Err(RatFunError::Invariant(format!("non-primitive linear form {:?}", l.0)));
                }
                den.push((l, m));
            }
        }
        let f = RatFun::from_parts(num, &den)?;
        Ok(f)
    }

    /// Evaluates at a rational point (denominator must not vanish).
    pub fn eval(&self, pt: &[Rational]) -> Option<Rational> {
        let ev_poly = |p: &Poly| -> Rational {
            let mut s = Rational::zero();
            for (e, c) in p.terms() {
                let mut t = c.clone();
                for (x, &k) in pt.iter().zip(e) {
                    for _ in 0..k {
                        t *= x;
                    }
                }
                s += t;
            }
            s
        };
        let d = ev_poly(&self.den_poly());
        if d.is_zero() {
            return None;
        }
        Some(ev_poly(&self.num) / d)
    }
}

/// The divided difference `(f(..u_i..) - f(..u_{i+1}..)) / (u_i - u_{i+1})`.
///
/// In the polynomial families the quotient must be exact.
pub fn divided_difference(
    m_at_ui: &RatFun,
    m_at_ui1: &RatFun,
    form: &LinForm,
    family: FamilyTag,
) -> Result<RatFun> {
    let diff = m_at_ui.checked_add(&m_at_ui1.neg())?;
    if diff.is_zero() {
        return Ok(diff);
    }
    match family {
        FamilyTag::Rat => diff.div_linear(form),
        _ => {
            if !diff.is_poly() {
                return Err(RatFunError::DivisibilityViolated);
            }
            diff.num
                .div_linear(form)
                .map(RatFun::from_poly)
                .ok_or(RatFunError::DivisibilityViolated)
        }
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/(", self.num)?;
        for (n, (l, m)) in self.den.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            write!(f, "({l})")?;
            if *m > 1 {
                write!(f, "^{m}")?;
            }
        }
        write!(f, ")")
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl std::ops::$tr<&RatFun> for &RatFun {
            type Output = RatFun;
            fn $m(self, o: &RatFun) -> RatFun {
                self.$call(o).expect("rational-function arity mismatch")
            }
        }
        impl std::ops::$tr<RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, o: RatFun) -> RatFun {
                (&self).$call(&o).expect("rational-function arity mismatch")
            }
        }
    };
}
forward_binop!(Add, add, checked_add);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Sub<&RatFun> for &RatFun {
    type Output = RatFun;
    fn sub(self, o: &RatFun) -> RatFun {
        self.checked_add(&o.neg()).expect("rational-function arity mismatch")
    }
}

impl std::ops::Sub<RatFun> for RatFun {
    type Output = RatFun;
    fn sub(self, o: RatFun) -> RatFun {
        &self - &o
    }
}

impl std::ops::Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun::neg(self)
    }
}

impl std::ops::AddAssign<&RatFun> for RatFun {
    fn add_assign(&mut self, o: &RatFun) {
        *self = &*self + o;
    }
}

/// Small integer helper used by generators and tests.
pub fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize, d: usize) -> RatFun {
        RatFun::var(i, d)
    }

    fn inv(l: &[i64]) -> RatFun {
        RatFun::inv_linear(&LinForm(l.to_vec())).unwrap()
    }

    #[test]
    fn common_denominator() {
        let s = &inv(&[1, 0]) + &inv(&[0, 1]);
        let expect = RatFun::from_parts(x(0, 2).num.add(&x(1, 2).num), &[(LinForm(vec![1, 0]), 1), (LinForm(vec![0, 1]), 1)]).unwrap();
        assert_eq!(s, expect);
        assert_eq!(s.den.len(), 2);
    }

    #[test]
    fn paj_length_two_partial_fractions() {
        // 1/(x1(x1+x2)) + 1/(x2(x1+x2)) = 1/(x1 x2)
        let a = &inv(&[1, 0]) * &inv(&[1, 1]);
        let b = &inv(&[0, 1]) * &inv(&[1, 1]);
        assert_eq!(&a + &b, &inv(&[1, 0]) * &inv(&[0, 1]));
    }

    #[test]
    fn multiplicity_cancellation() {
        let l = LinForm(vec![1, -1]);
        let sq = RatFun::from_parts(Poly::one(2), &[(l.clone(), 2)]).unwrap();
        let r = &RatFun::from_linform(&l) * &sq;
        assert_eq!(r, RatFun::inv_linear(&l).unwrap());
        assert_eq!(&x(0, 1) * &inv(&[1]), RatFun::one(1));
    }

    #[test]
    fn normalization_moves_sign_and_content() {
        let r = RatFun::inv_linear(&LinForm(vec![-2, 4])).unwrap();
        assert_eq!(r.den, vec![(LinForm(vec![1, -2]), 1)]);
        assert_eq!(r.num.constant_term(), rat(-1, 2));
    }

    #[test]
    fn substitution_examples() {
        let f = inv(&[1]);
        let g = f.substitute_linear(&[LinForm(vec![1, 1])], 2).unwrap();
        assert_eq!(g, inv(&[1, 1]));
        let p = &x(0, 2) * &x(1, 2);
        let q = p.substitute_linear(&[LinForm(vec![0, 1]), LinForm(vec![1, -1])], 2).unwrap();
        let expect = &(&x(0, 2) * &x(1, 2)) - &(&x(1, 2) * &x(1, 2));
        assert_eq!(q, expect);
        assert!(p
            .substitute_linear(&[LinForm(vec![1, 1]), LinForm(vec![2, 2])], 2)
            .is_err());
    }

    #[test]
    fn divided_differences() {
        let l = LinForm(vec![1, -1]);
        let sq = |i| &x(i, 2) * &x(i, 2);
        let d = divided_difference(&sq(0), &sq(1), &l, FamilyTag::Pol).unwrap();
        assert_eq!(d, &x(0, 2) + &x(1, 2));
        let c = RatFun::constant(rint(3), 2);
        assert!(divided_difference(&c, &c, &l, FamilyTag::Pol).unwrap().is_zero());
        let d = divided_difference(&inv(&[1, 0]), &inv(&[0, 1]), &l, FamilyTag::Rat).unwrap();
        assert_eq!(d, (&inv(&[1, 0]) * &inv(&[0, 1])).neg());
        assert_eq!(
            divided_difference(&x(0, 2), &RatFun::zero(2), &l, FamilyTag::Pol),
            Err(RatFunError::DivisibilityViolated)
        );
    }

    #[test]
    fn json_round_trip() {
        let f = &(&x(0, 2) + &RatFun::constant(rat(2, 3), 2)) * &inv(&[1, 1]);
        let back = RatFun::from_json(&f.to_json(), 2, true).unwrap();
        assert_eq!(f, back);
        assert_eq!(parse_rational("2/4", false).unwrap(), rat(1, 2));
        assert!(parse_rational("2/4", true).is_err());
    }
}
