//! Flexion calculus: `arit`, `ari`, `garit`, `gari`, `invgari`, `preari`, `expari`.
//!
//! Every operator evaluates a component on the canonical word
//! `(x_1, ..., x_m; σ_1, ..., σ_m)` by splitting it into factors and
//! contracting them with the four flexions.

use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::mould::{Key, Mould, MouldError, Result};
use crate::ratfun::{rint, RatFun, Rational};
use crate::words::{llflex, lrflex, ulflex, urflex, Alphabet, Orientation, Word};

fn check_group(a: &Mould, b: &Mould) -> Result<()> {
    if a.nblocks() != 1 || b.nblocks() != 1 {
        return Err(MouldError::Precondition("flexion operators act on one-block moulds".into()));
    }
    if a.gamma() != b.gamma() {
        return Err(MouldError::AlphabetMismatch);
    }
    if !a.gamma().has_group() {
        return Err(MouldError::NoGroupLaw);
    }
    Ok(())
}

fn result_shell(a: &Mould, b: &Mould) -> Mould {
    Mould::zero(a.family().join(b.family()), a.blocks().to_vec(), a.max_length().min(b.max_length()))
}

/// `arit(B)(A)`:
/// `Σ_{x=αβγ, β,γ≠∅} A(α⌈β⌉γ) B(β⌊γ) − Σ_{x=αβγ, α,β≠∅} A(α⌉β γ) B(α⌋β)`.
pub fn arit(b: &Mould, a: &Mould) -> Result<Mould> {
    check_group(a, b)?;
    let g: &Alphabet = a.gamma();
    let mut out = result_shell(a, b);
    for key in out.keys() {
        let m = key.len();
        if m < 2 {
            continue;
        }
        let x = Word::canonical(&key.labels, Orientation::X);
        let mut acc = RatFun::zero(m);
        for i in 0..m {
            for j in i + 1..m {
                let (al, be, ga) = (x.slice(0, i), x.slice(i, j), x.slice(j, m));
                // β, γ nonempty
                let aw = al.concat(&urflex(&be, &ga, g, m)?);
                let bw = llflex(&be, &ga, g, m)?;
                acc += &(&a.at_word(&aw, m)? * &b.at_word(&bw, m)?);
            }
        }
        for i in 1..m {
            for j in i + 1..=m {
                let (al, be, ga) = (x.slice(0, i), x.slice(i, j), x.slice(j, m));
                // α, β nonempty
                let aw = ulflex(&al, &be, g, m)?.concat(&ga);
                let bw = lrflex(&al, &be, g, m)?;
                acc = &acc - &(&a.at_word(&aw, m)? * &b.at_word(&bw, m)?);
            }
        }
        out.set(key, acc)?;
    }
    Ok(out)
}

fn require_empty(m: &Mould, v: Rational, what: &str) -> Result<()> {
    if m.empty_value() != v {
        return Err(MouldError::Precondition(format!("{what}: empty component must be {v}")));
    }
    Ok(())
}

/// `ari(A, B) = arit(B)(A) − arit(A)(B) + A×B − B×A` on `ARI`.
pub fn ari(a: &Mould, b: &Mould) -> Result<Mould> {
    require_empty(a, Rational::zero(), "ari")?;
    require_empty(b, Rational::zero(), "ari")?;
    arit(b, a)?
        .sub(&arit(a, b)?)?
        .add(&a.mul(b)?)?
        .sub(&b.mul(a)?)
}

/// `preari(A, B) = arit(B)(A) + A×B`.
pub fn preari(a: &Mould, b: &Mould) -> Result<Mould> {
    arit(b, a)?.add(&a.mul(b)?)
}

/// `expari(A) = Σ_k preari_k(A)/k!`, with `preari_0 = 1` and
/// `preari_k(A) = preari(preari_{k-1}(A), A)`.
pub fn expari(a: &Mould) -> Result<Mould> {
    require_empty(a, Rational::zero(), "expari")?;
    let unit = Mould::unit(a.family(), a.blocks().to_vec(), a.max_length());
    let mut total = unit.clone();
    let mut term = unit;
    let mut fact = Rational::one();
    for k in 1..=a.max_length() {
        term = preari(&term, a)?;
        if term.is_zero() {
            break;
        }
        fact *= rint(k as i64);
        total = total.add(&term.scale(&(Rational::one() / &fact)))?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// garit
// ---------------------------------------------------------------------------

/// One factor `α_i β_i γ_i` of a garit decomposition, as lengths.
pub type Triple = (usize, usize, usize);

/// All decompositions `x_m = α_1β_1γ_1 ⋯ α_sβ_sγ_s` with `β_i ≠ ∅` and
/// `γ_jα_{j+1} ≠ ∅`, as lists of length triples. Memoized per `m`.
pub fn garit_decompositions(m: usize) -> &'static [Vec<Triple>] {
    static MEMO: OnceLock<Vec<Vec<Vec<Triple>>>> = OnceLock::new();
    const CAP: usize = 9;
    let memo = MEMO.get_or_init(|| (0..=CAP).map(enumerate_decompositions).collect());
    &memo[m.min(CAP)]
}

fn enumerate_decompositions(m: usize) -> Vec<Vec<Triple>> {
    let mut out = vec![];
    fn rec(pos: usize, m: usize, prev_gamma: Option<usize>, acc: &mut Vec<Triple>, out: &mut Vec<Vec<Triple>>) {
        if pos == m && !acc.is_empty() {
            out.push(acc.clone());
        }
        for a in 0..=(m - pos) {
            // γ_j α_{j+1} must be nonempty between consecutive factors
            if let Some(g) = prev_gamma {
                if g + a == 0 {
                    continue;
                }
            }
            for b in 1..=(m - pos - a) {
                for c in 0..=(m - pos - a - b) {
                    acc.push((a, b, c));
                    rec(pos + a + b + c, m, Some(c), acc, out);
                    acc.pop();
                }
            }
        }
    }
    if m == 0 {
        return vec![];
    }
    rec(0, m, None, &mut vec![], &mut out);
    out
}

/// `garit(B)(A)`; `B` must have empty component 1.
pub fn garit(b: &Mould, a: &Mould) -> Result<Mould> {
    check_group(a, b)?;
    require_empty(b, Rational::one(), "garit")?;
    let binv = b.inv_mul()?;
    let g: &Alphabet = a.gamma();
    let mut out = result_shell(a, b);
    for key in out.keys() {
        let m = key.len();
        if m == 0 {
            out.set(key, a.get(&Key::one(vec![])))?;
            continue;
        }
        let x = Word::canonical(&key.labels, Orientation::X);
        let mut acc = RatFun::zero(m);
        for dec in garit_decompositions(m) {
            let mut pos = 0;
            let mut aw = Word::empty(Orientation::X);
            let mut coef = RatFun::one(m);
            for &(la, lb, lc) in dec {
                let al = x.slice(pos, pos + la);
                let be = x.slice(pos + la, pos + la + lb);
                let ga = x.slice(pos + la + lb, pos + la + lb + lc);
                pos += la + lb + lc;
                aw = aw.concat(&ulflex(&urflex(&al, &be, g, m)?, &ga, g, m)?);
                if !al.is_empty() {
                    coef = &coef * &b.at_word(&llflex(&al, &be, g, m)?, m)?;
                }
                if !ga.is_empty() {
                    coef = &coef * &binv.at_word(&lrflex(&be, &ga, g, m)?, m)?;
                }
                if coef.is_zero() {
                    break;
                }
            }
            if coef.is_zero() {
                continue;
            }
            acc += &(&a.at_word(&aw, m)? * &coef);
        }
        out.set(key, acc)?;
    }
    Ok(out)
}

/// `gari(A, B) = garit(B)(A) × B` on `GARI`.
pub fn gari(a: &Mould, b: &Mould) -> Result<Mould> {
    require_empty(a, Rational::one(), "gari")?;
    garit(b, a)?.mul(b)
}

/// The `gari`-inverse, built length by length from `gari(invgari(B), B) = 1`.
pub fn invgari(b: &Mould) -> Result<Mould> {
    require_empty(b, Rational::one(), "invgari")?;
    let mut a = Mould::unit(b.family(), b.blocks().to_vec(), b.max_length());
    for l in 1..=b.max_length() {
        let bl = b.truncate(l);
        let mut al = a.truncate(l);
        let g = gari(&al, &bl)?;
        for key in al.keys_up_to(l) {
            if key.len() == l {
                let v = g.get(&key).neg();
                al.set(key, v)?;
            }
        }
        for (k, v) in al.components() {
            if k.len() == l {
                a.set(k.clone(), v.clone())?;
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::{FamilyTag, LinForm};
    use crate::words::Alphabet;
    use std::sync::Arc;

    fn two_var_mould(f: impl Fn(&[usize]) -> RatFun, family: FamilyTag, l: usize) -> Mould {
        Mould::from_fn(family, vec![Arc::new(Alphabet::trivial())], l, |k| Ok(f(&k.labels))).unwrap()
    }

    #[test]
    fn decomposition_counts() {
        let counts: Vec<usize> = (1..=3).map(|m| garit_decompositions(m).len()).collect();
        assert_eq!(counts, vec![1, 3, 8]);
    }

    #[test]
    fn arit_length_two_trivial_group() {
        // A(x) = x at length 1, B(x) = x^2 at length 1
        let a = two_var_mould(|l| if l.len() == 1 { RatFun::var(0, 1) } else { RatFun::zero(l.len()) }, FamilyTag::Pol, 2);
        let b = two_var_mould(
            |l| if l.len() == 1 { &RatFun::var(0, 1) * &RatFun::var(0, 1) } else { RatFun::zero(l.len()) },
            FamilyTag::Pol,
            2,
        );
        let r = arit(&b, &a).unwrap();
        let s = &RatFun::var(0, 2) + &RatFun::var(1, 2);
        let x1sq = &RatFun::var(0, 2) * &RatFun::var(0, 2);
        let x2sq = &RatFun::var(1, 2) * &RatFun::var(1, 2);
        assert_eq!(r.get1(&[0, 0]), &(&s * &x1sq) - &(&s * &x2sq));
        assert!(r.get1(&[0]).is_zero());
    }

    #[test]
    fn garit_small_cases() {
        let a = two_var_mould(
            |l| {
                let d = l.len();
                (0..d).fold(RatFun::constant(rint(d as i64 + 1), d), |f, i| &f * &RatFun::var(i, d))
            },
            FamilyTag::Pol,
            3,
        );
        let unit = Mould::unit1(FamilyTag::Pol, a.gamma().clone(), 3);
        assert_eq!(garit(&unit, &a).unwrap(), a);
        let mut b = unit.clone();
        b.set1(vec![0], RatFun::from_linform(&LinForm(vec![2]))).unwrap();
        let r = garit(&b, &a).unwrap();
        assert_eq!(r.get1(&[0]), a.get1(&[0]));
        // length 2: A(x1,x2) + A(x1+x2) B(x1) + A(x1+x2) B^{-1}(x2)
        let s = RatFun::from_linform(&LinForm(vec![1, 1]));
        let expect = &(&a.get1(&[0, 0]) + &(&s.scale(&rint(2)) * &RatFun::var(0, 2).scale(&rint(2))))
            - &(&s.scale(&rint(2)) * &RatFun::var(1, 2).scale(&rint(2)));
        assert_eq!(r.get1(&[0, 0]), expect);
        assert_eq!(gari(&unit, &b).unwrap(), b);
        assert_eq!(gari(&b, &unit).unwrap(), b);
        let i = invgari(&b).unwrap();
        assert_eq!(gari(&i, &b).unwrap(), unit);
        assert_eq!(gari(&b, &i).unwrap(), unit);
    }

    #[test]
    fn expari_of_zero() {
        let z = Mould::zero1(FamilyTag::Pol, Arc::new(Alphabet::trivial()), 3);
        assert_eq!(expari(&z).unwrap(), Mould::unit1(FamilyTag::Pol, z.gamma().clone(), 3));
    }
}
