//! Exact coefficient arithmetic: rational numbers and univariate polynomials
//! in a formal marker `w` with rational coefficients.
//!
//! A [`Coeff`] is stored as a dense list of [`BigRational`] coefficients by
//! `w`-degree, with trailing zeros stripped. Plain rationals are the constant
//! polynomials, so a single type covers both coefficient domains used by the
//! series layer. All arithmetic is exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

/// Errors raised when decoding a coefficient from its JSON form.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("coefficient JSON must be an object with a \"poly\" array")]
    BadShape,
    #[error("polynomial entry {index} must be a [numerator, denominator] pair")]
    BadPair { index: usize },
    #[error("invalid integer literal {text:?}")]
    BadInteger { text: String },
    #[error("zero denominator in polynomial entry {index}")]
    ZeroDenominator { index: usize },
}

/// An exact ring element: a polynomial in the marker `w` over the rationals.
///
/// Index `k` of the backing vector holds the coefficient of `w^k`. The vector
/// never ends in a zero, so the zero element is the empty vector and constants
/// have length one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    terms: Vec<BigRational>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Coeff::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Coeff::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut c = Coeff { terms: vec![r] };
        c.normalize();
        c
    }

    /// The marker `w` itself.
    pub fn w() -> Self {
        Coeff::w_pow(1)
    }

    /// `w^k` with coefficient one.
    pub fn w_pow(k: usize) -> Self {
        let mut terms = vec![BigRational::zero(); k + 1];
        terms[k] = BigRational::one();
        Coeff { terms }
    }

    /// Builds a polynomial from rational coefficients indexed by `w`-degree.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        let mut c = Coeff { terms: coeffs };
        c.normalize();
        c
    }

    fn normalize(&mut self) {
        while matches!(self.terms.last(), Some(t) if t.is_zero()) {
            self.terms.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_one()
    }

    /// Degree in `w`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.len().checked_sub(1)
    }

    /// The constant value when the polynomial has no `w` term.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.terms[0].clone()),
            _ => None,
        }
    }

    pub fn coefficient(&self, degree: usize) -> BigRational {
        self.terms.get(degree).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        let n = self.terms.len().max(other.terms.len());
        let mut terms = Vec::with_capacity(n);
        for k in 0..n {
            terms.push(self.coefficient(k) + other.coefficient(k));
        }
        Coeff::from_coeffs(terms)
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|t| -t.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        if self.is_zero() || other.is_zero() {
            return Coeff::zero();
        }
        let mut terms = vec![BigRational::zero(); self.terms.len() + other.terms.len() - 1];
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.terms.iter().enumerate() {
                if !b.is_zero() {
                    terms[i + j] += a * b;
                }
            }
        }
        Coeff::from_coeffs(terms)
    }

    pub fn scale(&self, r: &BigRational) -> Coeff {
        Coeff::from_coeffs(self.terms.iter().map(|t| t * r).collect())
    }

    /// Substitutes a rational value for the marker `w`.
    pub fn eval_at(&self, w: &BigRational) -> Coeff {
        let mut acc = BigRational::zero();
        for t in self.terms.iter().rev() {
            acc = acc * w + t;
        }
        Coeff::from_rational(acc)
    }

    /// JSON form `{ "poly": [[num, den], ...] }`, pairs indexed by `w`-degree.
    /// Integers that do not fit a signed 64-bit value are written as decimal
    /// strings.
    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .terms
            .iter()
            .map(|r| json!([int_to_json(r.numer()), int_to_json(r.denom())]))
            .collect();
        json!({ "poly": pairs })
    }

    pub fn from_json(value: &Value) -> Result<Coeff, CoeffError> {
        let obj = value.as_object().ok_or(CoeffError::BadShape)?;
        let poly = obj.get("poly").and_then(Value::as_array).ok_or(CoeffError::BadShape)?;
        let mut terms = Vec::with_capacity(poly.len());
        for (index, entry) in poly.iter().enumerate() {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or(CoeffError::BadPair { index })?;
            let num = int_from_json(&pair[0]).ok_or_else(|| bad_int(&pair[0], index))?;
            let den = int_from_json(&pair[1]).ok_or_else(|| bad_int(&pair[1], index))?;
            if den.is_zero() {
                return Err(CoeffError::ZeroDenominator { index });
            }
            terms.push(BigRational::new(num, den));
        }
        Ok(Coeff::from_coeffs(terms))
    }
}

fn bad_int(value: &Value, index: usize) -> CoeffError {
    match value {
        Value::String(s) => CoeffError::BadInteger { text: s.clone() },
        _ => CoeffError::BadPair { index },
    }
}

fn int_to_json(n: &BigInt) -> Value {
    match i64::try_from(n.clone()) {
        Ok(small) => json!(small),
        Err(_) => json!(n.to_string()),
    }
}

fn int_from_json(value: &Value) -> Option<BigInt> {
    match value {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => BigInt::from_str(s).ok(),
        _ => None,
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, r) in self.terms.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let mag = r.abs();
            if first {
                if r.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if r.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit_mag = mag.is_one();
            if k == 0 || !unit_mag {
                write!(f, "{}", mag)?;
            }
            if k == 1 {
                if !unit_mag {
                    write!(f, "*")?;
                }
                write!(f, "w")?;
            } else if k > 1 {
                if !unit_mag {
                    write!(f, "*")?;
                }
                write!(f, "w^{}", k)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coeff({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn constants_and_zero() {
        assert!(Coeff::zero().is_zero());
        assert!(Coeff::one().is_one());
        assert_eq!(Coeff::from_int(0), Coeff::zero());
        assert_eq!(Coeff::from_ratio(2, 4), Coeff::from_ratio(1, 2));
        assert_eq!(Coeff::from_ratio(1, -2), Coeff::from_ratio(-1, 2));
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        let c = Coeff::from_coeffs(vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(c.degree(), Some(0));
        let d = Coeff::w().sub(&Coeff::w());
        assert!(d.is_zero());
        assert_eq!(d.degree(), None);
    }

    #[test]
    fn polynomial_product() {
        // (1 + w)(1 - w) = 1 - w^2
        let p = Coeff::one().add(&Coeff::w());
        let q = Coeff::one().sub(&Coeff::w());
        let expect = Coeff::one().sub(&Coeff::w_pow(2));
        assert_eq!(p.mul(&q), expect);
    }

    #[test]
    fn evaluation_at_rational() {
        // 1 + 2w + w^2 at w = 3/2 is 1 + 3 + 9/4 = 25/4
        let p = Coeff::from_coeffs(vec![rat(1, 1), rat(2, 1), rat(1, 1)]);
        assert_eq!(p.eval_at(&rat(3, 2)), Coeff::from_ratio(25, 4));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Coeff::zero().to_string(), "0");
        assert_eq!(Coeff::from_ratio(-3, 2).to_string(), "-3/2");
        assert_eq!(Coeff::w().to_string(), "w");
        let p = Coeff::from_int(2).sub(&Coeff::w()).add(&Coeff::w_pow(3).scale(&rat(1, 2)));
        assert_eq!(p.to_string(), "2 - w + 1/2*w^3");
    }

    #[test]
    fn json_round_trip_with_big_values() {
        let huge = BigRational::new(
            BigInt::from_str("123456789012345678901234567890").unwrap(),
            BigInt::from(7),
        );
        let p = Coeff::from_coeffs(vec![rat(1, 2), huge]);
        let back = Coeff::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        // big numerator serialized as a string
        let v = p.to_json();
        assert!(v["poly"][1][0].is_string());
        assert!(v["poly"][0][0].is_i64());
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert_eq!(Coeff::from_json(&json!({"poly": [[1]]})), Err(CoeffError::BadPair { index: 0 }));
        assert_eq!(
            Coeff::from_json(&json!({"poly": [[1, 0]]})),
            Err(CoeffError::ZeroDenominator { index: 0 })
        );
        assert_eq!(Coeff::from_json(&json!([1, 2])), Err(CoeffError::BadShape));
        assert_eq!(
            Coeff::from_json(&json!({"poly": [["x", 1]]})),
            Err(CoeffError::BadInteger { text: "x".into() })
        );
    }

    fn arb_coeff() -> impl Strategy<Value = Coeff> {
        prop::collection::vec((-6i64..=6, 1i64..=4), 0..4)
            .prop_map(|pairs| Coeff::from_coeffs(pairs.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&Coeff::zero()), a.clone());
            prop_assert_eq!(a.mul(&Coeff::one()), a.clone());
            prop_assert_eq!(a.sub(&a), Coeff::zero());
        }

        #[test]
        fn evaluation_is_a_ring_map(a in arb_coeff(), b in arb_coeff(), n in -5i64..=5, d in 1i64..=3) {
            let w = rat(n, d);
            prop_assert_eq!(a.add(&b).eval_at(&w), a.eval_at(&w).add(&b.eval_at(&w)));
            prop_assert_eq!(a.mul(&b).eval_at(&w), a.eval_at(&w).mul(&b.eval_at(&w)));
        }

        #[test]
        fn json_round_trip(a in arb_coeff()) {
            prop_assert_eq!(Coeff::from_json(&a.to_json()).unwrap(), a);
        }
    }
}
