//! Coefficient fields: the rationals and prime fields `F_p`.
//!
//! Every other layer of the crate does its arithmetic through [`FieldSpec`],
//! so exactness is guaranteed by construction: `Q` is backed by
//! [`num_rational::BigRational`], `F_p` by reduced `u64` residues.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// A coefficient field: `Q` or `F_p` for a prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Q,
    Fp(u64),
}

/// An element of a coefficient field. The `Fp` variant carries its modulus so
/// that values are self-describing; mixing fields is a programming error and
/// panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rat(BigRational),
    Fp { p: u64, v: u64 },
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn fp(p: u64) -> FieldSpec {
        assert!(is_prime(p), "F_p modulus {p} is not prime");
        FieldSpec::Fp(p)
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Q => 0,
            FieldSpec::Fp(p) => *p,
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Q => Scalar::Rat(BigRational::zero()),
            FieldSpec::Fp(p) => Scalar::Fp { p: *p, v: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            FieldSpec::Q => Scalar::Rat(BigRational::one()),
            FieldSpec::Fp(p) => Scalar::Fp { p: *p, v: 1 },
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Q => Scalar::Rat(BigRational::from(BigInt::from(n))),
            FieldSpec::Fp(p) => {
                let r = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { p: *p, v: r }
            }
        }
    }

    /// `n/d` in the field; `d` must be invertible.
    pub fn from_ratio(&self, n: i64, d: i64) -> Scalar {
        assert!(d != 0, "zero denominator");
        let num = self.from_i64(n);
        let den = self.from_i64(d);
        self.div(&num, &den)
    }

    fn check(&self, a: &Scalar) {
        match (self, a) {
            (FieldSpec::Q, Scalar::Rat(_)) => {}
            (FieldSpec::Fp(p), Scalar::Fp { p: q, .. }) if p == q => {}
            _ => panic!("scalar {a:?} does not belong to field {self:?}"),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.check(a);
        self.check(b);
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Fp { p, v }, Scalar::Fp { v: w, .. }) => Scalar::Fp {
                p: *p,
                v: (v + w) % p,
            },
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.check(a);
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.check(a);
        self.check(b);
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Fp { p, v }, Scalar::Fp { v: w, .. }) => {
                let prod = (*v as u128 * *w as u128 % *p as u128) as u64;
                Scalar::Fp { p: *p, v: prod }
            }
            _ => unreachable!(),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Scalar {
        self.check(a);
        assert!(!self.is_zero(a), "inverse of zero");
        match a {
            Scalar::Rat(x) => Scalar::Rat(x.recip()),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: mod_inv(*v, *p),
            },
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.mul(a, &self.inv(b))
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        self.check(a);
        match a {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self, a: &Scalar) -> bool {
        self.check(a);
        match a {
            Scalar::Rat(x) => x.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p)
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {p}");
    s0.rem_euclid(p as i128) as u64
}

impl Scalar {
    /// The field this scalar belongs to.
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Q,
            Scalar::Fp { p, .. } => FieldSpec::Fp(*p),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    write!(f, "{}", x.numer())
                } else {
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

/// Parse "n" or "n/d" into a field element.
pub fn parse_scalar(field: &FieldSpec, s: &str) -> Result<Scalar, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|e| format!("bad denominator: {e}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        if let FieldSpec::Fp(p) = field {
            if d.rem_euclid(*p as i64) == 0 {
                return Err(format!("denominator {d} is zero mod {p}"));
            }
        }
        Ok(field.from_ratio(n, d))
    } else {
        let n: i64 = s.parse().map_err(|e| format!("bad integer: {e}"))?;
        Ok(field.from_i64(n))
    }
}

/// Render a scalar in the form accepted by [`parse_scalar`].
pub fn scalar_to_string(a: &Scalar) -> String {
    a.to_string()
}

/// Rational scalars that happen to be integers render as plain integers; this
/// asks whether that is the case (always true over `F_p`).
pub fn scalar_is_integral(a: &Scalar) -> bool {
    match a {
        Scalar::Rat(x) => x.denom().is_one(),
        Scalar::Fp { .. } => true,
    }
}

/// Signed integer value of an integral scalar, if it fits in `i64`.
pub fn scalar_as_i64(a: &Scalar) -> Option<i64> {
    match a {
        Scalar::Rat(x) => {
            if x.denom().is_one() {
                let n = x.numer();
                if n.abs() <= BigInt::from(i64::MAX) {
                    return Some(i64::try_from(n).ok()?);
                }
            }
            None
        }
        Scalar::Fp { v, .. } => i64::try_from(*v).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_arithmetic() {
        let f = FieldSpec::fp(7);
        let a = f.from_i64(5);
        let b = f.from_i64(4);
        assert_eq!(f.mul(&a, &b), f.from_i64(6));
        assert_eq!(f.add(&a, &b), f.from_i64(2));
        assert_eq!(f.mul(&a, &f.inv(&a)), f.one());
        assert_eq!(f.from_i64(-3), f.from_i64(4));
    }

    #[test]
    fn q_arithmetic() {
        let f = FieldSpec::Q;
        let half = f.from_ratio(1, 2);
        assert_eq!(f.add(&half, &half), f.one());
        assert_eq!(f.mul(&half, &f.from_i64(2)), f.one());
    }

    #[test]
    fn parse_roundtrip() {
        let f = FieldSpec::Q;
        for s in ["3", "-2", "1/2", "-7/3"] {
            let v = parse_scalar(&f, s).unwrap();
            assert_eq!(parse_scalar(&f, &scalar_to_string(&v)).unwrap(), v);
        }
    }

    #[test]
    #[should_panic]
    fn mixed_fields_panic() {
        let q = FieldSpec::Q;
        let a = q.one();
        let b = FieldSpec::fp(5).one();
        let _ = q.add(&a, &b);
    }

    #[test]
    fn primality_guard() {
        assert!(std::panic::catch_unwind(|| FieldSpec::fp(6)).is_err());
    }
}
