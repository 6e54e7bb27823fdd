//! Commutative semirings that tensor entries live in.
//!
//! Four semirings are built in:
//!
//! | name       | elements        | ⊕    | ⊗    | zero  | one   |
//! |------------|-----------------|------|------|-------|-------|
//! | `int`      | `i64` (mod 2⁶⁴) | `+`  | `×`  | 0     | 1     |
//! | `float`    | `f64`           | `+`  | `×`  | 0.0   | 1.0   |
//! | `bool`     | `bool`          | `∨`  | `∧`  | false | true  |
//! | `tropical` | `i64 ∪ {+∞}`    | min  | `+`  | +∞    | 0     |
//!
//! Integer arithmetic wraps, so `int` is the ring ℤ/2⁶⁴ and every law holds
//! exactly even for values that would overflow.

use std::fmt;

use rand::Rng;

use crate::error::LiteralError;

/// A constant as written in expression text, before it is bound to a semiring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    /// `inf`: the tropical zero, or floating-point infinity.
    Infinity,
}

impl Eq for Literal {}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            // Debug keeps a decimal point or exponent so the text re-parses as a float.
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Infinity => f.write_str("inf"),
        }
    }
}

/// A commutative semiring `(R, ⊕, ⊗)` with identities `zero` and `one`.
pub trait Semiring: Clone + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Aggregation ⊕.
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Combination ⊗.
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Element comparison; tolerance-based for inexact semirings.
    fn approx_eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    /// Whether results are order-independent bit for bit.
    fn is_exact(&self) -> bool {
        true
    }

    // Takes `&self` so parameterized semirings (a float tolerance) can decide.
    #[allow(clippy::wrong_self_convention)]
    fn from_literal(&self, lit: &Literal) -> Result<Self::Elem, LiteralError>;
    fn to_literal(&self, e: &Self::Elem) -> Literal;

    /// A random element from the small range used by equivalence testing.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    /// Maps `k ∈ {0, 1, 2}` onto elements for exhaustive enumeration.
    #[allow(clippy::wrong_self_convention)]
    fn from_small(&self, k: u8) -> Self::Elem;
}

/// `(ℤ/2⁶⁴, +, ×)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Arithmetic;

impl Semiring for Arithmetic {
    type Elem = i64;

    fn name(&self) -> &'static str {
        "int"
    }
    fn zero(&self) -> i64 {
        0
    }
    fn one(&self) -> i64 {
        1
    }
    fn add(&self, a: &i64, b: &i64) -> i64 {
        a.wrapping_add(*b)
    }
    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a.wrapping_mul(*b)
    }
    fn from_literal(&self, lit: &Literal) -> Result<i64, LiteralError> {
        match *lit {
            Literal::Int(n) => Ok(n),
            Literal::Bool(b) => Ok(b as i64),
            Literal::Float(x) if x.fract() == 0.0 && x.abs() < 9.0e18 => Ok(x as i64),
            _ => Err(LiteralError::new(*lit, self.name())),
        }
    }
    fn to_literal(&self, e: &i64) -> Literal {
        Literal::Int(*e)
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        rng.gen_range(0..=3)
    }
    fn from_small(&self, k: u8) -> i64 {
        k as i64
    }
}

/// `(f64, +, ×)` compared with a relative tolerance.
#[derive(Clone, Copy, Debug)]
pub struct Real {
    pub rel_tol: f64,
}

impl Default for Real {
    fn default() -> Self {
        Real { rel_tol: 1e-9 }
    }
}

impl Semiring for Real {
    type Elem = f64;

    fn name(&self) -> &'static str {
        "float"
    }
    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn approx_eq(&self, a: &f64, b: &f64) -> bool {
        if a == b {
            return true;
        }
        let scale = a.abs().max(b.abs());
        scale.is_finite() && (a - b).abs() <= self.rel_tol * scale
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn from_literal(&self, lit: &Literal) -> Result<f64, LiteralError> {
        Ok(match *lit {
            Literal::Int(n) => n as f64,
            Literal::Float(x) => x,
            Literal::Bool(b) => b as i64 as f64,
            Literal::Infinity => f64::INFINITY,
        })
    }
    fn to_literal(&self, e: &f64) -> Literal {
        if *e == f64::INFINITY {
            Literal::Infinity
        } else {
            Literal::Float(*e)
        }
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen_range(0.0..4.0)
    }
    fn from_small(&self, k: u8) -> f64 {
        k as f64
    }
}

/// `({false, true}, ∨, ∧)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Boolean;

impl Semiring for Boolean {
    type Elem = bool;

    fn name(&self) -> &'static str {
        "bool"
    }
    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn from_literal(&self, lit: &Literal) -> Result<bool, LiteralError> {
        match *lit {
            Literal::Bool(b) => Ok(b),
            // Any nonzero integer reads as true.
            Literal::Int(n) => Ok(n != 0),
            _ => Err(LiteralError::new(*lit, self.name())),
        }
    }
    fn to_literal(&self, e: &bool) -> Literal {
        Literal::Bool(*e)
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.gen_bool(0.5)
    }
    fn from_small(&self, k: u8) -> bool {
        k % 2 == 1
    }
}

/// An element of the min-plus semiring: an integer or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tropical {
    Finite(i64),
    Infinity,
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Finite(n) => write!(f, "{n}"),
            Tropical::Infinity => f.write_str("inf"),
        }
    }
}

/// `(ℤ ∪ {+∞}, min, +)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinPlus;

impl Semiring for MinPlus {
    type Elem = Tropical;

    fn name(&self) -> &'static str {
        "tropical"
    }
    fn zero(&self) -> Tropical {
        Tropical::Infinity
    }
    fn one(&self) -> Tropical {
        Tropical::Finite(0)
    }
    fn add(&self, a: &Tropical, b: &Tropical) -> Tropical {
        // Finite < Infinity under the derived ordering.
        *a.min(b)
    }
    fn mul(&self, a: &Tropical, b: &Tropical) -> Tropical {
        match (a, b) {
            (Tropical::Finite(x), Tropical::Finite(y)) => Tropical::Finite(x + y),
            _ => Tropical::Infinity,
        }
    }
    fn from_literal(&self, lit: &Literal) -> Result<Tropical, LiteralError> {
        match *lit {
            Literal::Int(n) => Ok(Tropical::Finite(n)),
            Literal::Infinity => Ok(Tropical::Infinity),
            Literal::Float(x) if x == f64::INFINITY => Ok(Tropical::Infinity),
            Literal::Float(x) if x.fract() == 0.0 && x.abs() < 9.0e18 => {
                Ok(Tropical::Finite(x as i64))
            }
            _ => Err(LiteralError::new(*lit, self.name())),
        }
    }
    fn to_literal(&self, e: &Tropical) -> Literal {
        match e {
            Tropical::Finite(n) => Literal::Int(*n),
            Tropical::Infinity => Literal::Infinity,
        }
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tropical {
        // {0, …, 7} ∪ {+∞}, uniformly.
        match rng.gen_range(0..=8) {
            8 => Tropical::Infinity,
            n => Tropical::Finite(n),
        }
    }
    fn from_small(&self, k: u8) -> Tropical {
        Tropical::Finite(k as i64)
    }
}

/// The semirings selectable by name on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringKind {
    Int,
    Float,
    Bool,
    Tropical,
}

impl SemiringKind {
    pub const ALL: [SemiringKind; 4] = [
        SemiringKind::Int,
        SemiringKind::Float,
        SemiringKind::Bool,
        SemiringKind::Tropical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemiringKind::Int => "int",
            SemiringKind::Float => "float",
            SemiringKind::Bool => "bool",
            SemiringKind::Tropical => "tropical",
        }
    }
}

impl std::str::FromStr for SemiringKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemiringKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown semiring `{s}` (expected int, float, bool or tropical)")
            })
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_laws<S: Semiring>(sr: &S, a: &S::Elem, b: &S::Elem, c: &S::Elem) {
        let eq = |x: &S::Elem, y: &S::Elem| sr.approx_eq(x, y);
        assert!(eq(&sr.add(a, b), &sr.add(b, a)));
        assert!(eq(&sr.mul(a, b), &sr.mul(b, a)));
        assert!(eq(&sr.add(&sr.add(a, b), c), &sr.add(a, &sr.add(b, c))));
        assert!(eq(&sr.mul(&sr.mul(a, b), c), &sr.mul(a, &sr.mul(b, c))));
        assert!(eq(&sr.add(a, &sr.zero()), a));
        assert!(eq(&sr.mul(a, &sr.one()), a));
        assert!(eq(&sr.mul(a, &sr.zero()), &sr.zero()));
        assert!(eq(
            &sr.mul(a, &sr.add(b, c)),
            &sr.add(&sr.mul(a, b), &sr.mul(a, c))
        ));
    }

    proptest! {
        #[test]
        fn arithmetic_laws(a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
            check_laws(&Arithmetic, &a, &b, &c);
        }

        #[test]
        fn real_laws(a in -100i32..100, b in -100i32..100, c in -100i32..100) {
            // Small integers keep float arithmetic exact enough for the tolerance.
            check_laws(&Real::default(), &(a as f64 / 4.0), &(b as f64 / 4.0), &(c as f64 / 4.0));
        }

        #[test]
        fn boolean_laws(a in any::<bool>(), b in any::<bool>(), c in any::<bool>()) {
            check_laws(&Boolean, &a, &b, &c);
        }

        #[test]
        fn tropical_laws(a in prop::option::of(-1000i64..1000),
                         b in prop::option::of(-1000i64..1000),
                         c in prop::option::of(-1000i64..1000)) {
            let t = |x: Option<i64>| x.map_or(Tropical::Infinity, Tropical::Finite);
            check_laws(&MinPlus, &t(a), &t(b), &t(c));
        }
    }

    #[test]
    fn literal_round_trip_through_semirings() {
        assert_eq!(
            MinPlus.from_literal(&Literal::Infinity),
            Ok(Tropical::Infinity)
        );
        assert_eq!(MinPlus.to_literal(&MinPlus.one()), Literal::Int(0));
        assert!(Arithmetic.from_literal(&Literal::Infinity).is_err());
        assert_eq!(Boolean.from_literal(&Literal::Int(2)), Ok(true));
        assert_eq!(Real::default().from_literal(&Literal::Int(3)), Ok(3.0));
    }

    #[test]
    fn float_literal_text_keeps_its_kind() {
        assert_eq!(Literal::Float(1.0).to_string(), "1.0");
        assert_eq!(Literal::Float(1e-10).to_string(), "1e-10");
        assert_eq!(Literal::Infinity.to_string(), "inf");
    }

    #[test]
    fn relative_tolerance() {
        let r = Real::default();
        assert!(r.approx_eq(&1.0, &(1.0 + 1e-12)));
        assert!(!r.approx_eq(&1.0, &(1.0 + 1e-6)));
        assert!(r.approx_eq(&0.0, &0.0));
    }

    #[test]
    fn kind_parses() {
        assert_eq!(
            "tropical".parse::<SemiringKind>(),
            Ok(SemiringKind::Tropical)
        );
        assert!("max".parse::<SemiringKind>().is_err());
    }
}
