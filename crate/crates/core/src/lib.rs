//! Exact mould calculus over the rationals.

pub mod ratfun;
pub mod words;
pub mod mould;
pub mod flexion;
pub mod ncseries;
pub mod linalg;
pub mod braid;
pub mod bal;

pub use ratfun::{FamilyTag, LinForm, Poly, RatFun, RatFunError, Rational};
pub use words::{Alphabet, Letter, Orientation, Word, WordError, WordSum};
