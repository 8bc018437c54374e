//! Univariate polynomials over a coefficient field, in one fixed variable
//! `x`, stored lowest degree first with no trailing zeros.

use crate::scalar::{parse_scalar, scalar_to_string, FieldSpec, Scalar};
use std::fmt;

/// A polynomial over some [`FieldSpec`]. The zero polynomial has an empty
/// coefficient vector and is the only field-agnostic value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    pub coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn constant(c: Scalar, field: &FieldSpec) -> Poly {
        if field.is_zero(&c) {
            Poly::zero()
        } else {
            Poly { coeffs: vec![c] }
        }
    }
}

impl FieldSpec {
    pub fn p_zero(&self) -> Poly {
        Poly::zero()
    }

    pub fn p_one(&self) -> Poly {
        Poly {
            coeffs: vec![self.one()],
        }
    }

    pub fn p_x(&self) -> Poly {
        Poly {
            coeffs: vec![self.zero(), self.one()],
        }
    }

    pub fn p_from_coeffs(&self, cs: &[i64]) -> Poly {
        let coeffs = cs.iter().map(|&c| self.from_i64(c)).collect();
        self.p_trim(Poly { coeffs })
    }

    pub fn p_constant(&self, c: i64) -> Poly {
        self.p_from_coeffs(&[c])
    }

    fn p_trim(&self, mut p: Poly) -> Poly {
        while let Some(c) = p.coeffs.last() {
            if self.is_zero(c) {
                p.coeffs.pop();
            } else {
                break;
            }
        }
        p
    }

    pub fn p_add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            let y = b.coeffs.get(i).cloned().unwrap_or_else(|| self.zero());
            coeffs.push(self.add(&x, &y));
        }
        self.p_trim(Poly { coeffs })
    }

    pub fn p_neg(&self, a: &Poly) -> Poly {
        Poly {
            coeffs: a.coeffs.iter().map(|c| self.neg(c)).collect(),
        }
    }

    pub fn p_sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.p_add(a, &self.p_neg(b))
    }

    pub fn p_mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![self.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            for (j, y) in b.coeffs.iter().enumerate() {
                coeffs[i + j] = self.add(&coeffs[i + j], &self.mul(x, y));
            }
        }
        self.p_trim(Poly { coeffs })
    }

    pub fn p_mul_scalar(&self, a: &Poly, c: &Scalar) -> Poly {
        if self.is_zero(c) {
            return Poly::zero();
        }
        Poly {
            coeffs: a.coeffs.iter().map(|x| self.mul(x, c)).collect(),
        }
    }

    /// Euclidean division: `a = q*b + r` with `deg r < deg b`.
    pub fn p_divmod(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_zero(), "division by zero polynomial");
        let db = b.degree().unwrap();
        let lead_inv = self.inv(b.leading().unwrap());
        let mut rem = a.clone();
        let mut q = vec![self.zero(); a.coeffs.len().saturating_sub(db)];
        while let Some(dr) = rem.degree() {
            if dr < db {
                break;
            }
            let c = self.mul(rem.leading().unwrap(), &lead_inv);
            let shift = dr - db;
            q[shift] = self.add(&q[shift], &c);
            // rem -= c * x^shift * b
            for (i, bc) in b.coeffs.iter().enumerate() {
                let t = self.mul(&c, bc);
                rem.coeffs[i + shift] = self.sub(&rem.coeffs[i + shift], &t);
            }
            rem = self.p_trim(rem);
        }
        (self.p_trim(Poly { coeffs: q }), rem)
    }

    pub fn p_rem(&self, a: &Poly, b: &Poly) -> Poly {
        self.p_divmod(a, b).1
    }

    /// Monic associate (zero stays zero).
    pub fn p_monic(&self, a: &Poly) -> Poly {
        match a.leading() {
            None => Poly::zero(),
            Some(l) => self.p_mul_scalar(a, &self.inv(l)),
        }
    }

    /// Monic gcd.
    pub fn p_gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        while !r1.is_zero() {
            let r = self.p_rem(&r0, &r1);
            r0 = r1;
            r1 = r;
        }
        self.p_monic(&r0)
    }

    /// Extended gcd: returns monic `g` and `(s, t)` with `s*a + t*b = g`.
    pub fn p_xgcd(&self, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.p_one(), self.p_zero());
        let (mut t0, mut t1) = (self.p_zero(), self.p_one());
        while !r1.is_zero() {
            let (q, r) = self.p_divmod(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let ns = self.p_sub(&s0, &self.p_mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, ns);
            let nt = self.p_sub(&t0, &self.p_mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, nt);
        }
        if r0.is_zero() {
            return (Poly::zero(), Poly::zero(), Poly::zero());
        }
        let l = self.inv(r0.leading().unwrap());
        (
            self.p_mul_scalar(&r0, &l),
            self.p_mul_scalar(&s0, &l),
            self.p_mul_scalar(&t0, &l),
        )
    }

    pub fn p_derivative(&self, a: &Poly) -> Poly {
        if a.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = a.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| self.mul(c, &self.from_i64(i as i64 + 1)))
            .collect();
        self.p_trim(Poly { coeffs })
    }

    /// `gcd(a, a')` is constant, i.e. `a` has no repeated roots in any
    /// extension. The zero polynomial is not squarefree.
    pub fn p_is_squarefree(&self, a: &Poly) -> bool {
        if a.is_zero() {
            return false;
        }
        if a.degree() == Some(0) {
            return true;
        }
        let d = self.p_derivative(a);
        if d.is_zero() {
            // only happens in characteristic p for p-th power patterns
            return false;
        }
        self.p_gcd(a, &d).degree() == Some(0)
    }

    pub fn p_pow_mod(&self, a: &Poly, mut e: u64, m: &Poly) -> Poly {
        let mut base = self.p_rem(a, m);
        let mut acc = self.p_rem(&self.p_one(), m);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.p_rem(&self.p_mul(&acc, &base), m);
            }
            base = self.p_rem(&self.p_mul(&base, &base), m);
            e >>= 1;
        }
        acc
    }

    /// Inverse of `a` mod `m`, if `gcd(a, m) = 1`.
    pub fn p_inv_mod(&self, a: &Poly, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.p_xgcd(a, m);
        if g.degree() == Some(0) {
            Some(self.p_rem(&s, m))
        } else {
            None
        }
    }

    pub fn p_eval(&self, a: &Poly, at: &Scalar) -> Scalar {
        let mut acc = self.zero();
        for c in a.coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, at), c);
        }
        acc
    }

    pub fn p_is_unit(&self, a: &Poly) -> bool {
        a.degree() == Some(0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            let s = scalar_to_string(c);
            if s == "0" {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{s}")?,
                1 => {
                    if s == "1" {
                        write!(f, "x")?
                    } else {
                        write!(f, "{s}*x")?
                    }
                }
                _ => {
                    if s == "1" {
                        write!(f, "x^{i}")?
                    } else {
                        write!(f, "{s}*x^{i}")?
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parse a coefficient array (strings or integers already split by serde)
/// into a polynomial.
pub fn poly_from_strings(field: &FieldSpec, cs: &[String]) -> Result<Poly, String> {
    let mut coeffs = Vec::with_capacity(cs.len());
    for c in cs {
        coeffs.push(parse_scalar(field, c)?);
    }
    let mut p = Poly { coeffs };
    while let Some(c) = p.coeffs.last() {
        if field.is_zero(c) {
            p.coeffs.pop();
        } else {
            break;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> FieldSpec {
        FieldSpec::Q
    }

    #[test]
    fn divmod_roundtrip() {
        let f = q();
        let a = f.p_from_coeffs(&[1, 0, -3, 2]);
        let b = f.p_from_coeffs(&[-1, 1]);
        let (qq, r) = f.p_divmod(&a, &b);
        assert_eq!(f.p_add(&f.p_mul(&qq, &b), &r), a);
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let f = q();
        let a = f.p_from_coeffs(&[0, 1]); // x
        let b = f.p_from_coeffs(&[-1, 1]); // x - 1
        assert_eq!(f.p_gcd(&a, &b), f.p_one());
    }

    #[test]
    fn squarefree_detection() {
        let f = q();
        assert!(f.p_is_squarefree(&f.p_from_coeffs(&[-1, 0, 1]))); // x^2-1
        assert!(!f.p_is_squarefree(&f.p_from_coeffs(&[0, 0, 1]))); // x^2
        assert!(!f.p_is_squarefree(&Poly::zero()));
    }

    #[test]
    fn xgcd_bezout() {
        let f = FieldSpec::fp(5);
        let a = f.p_from_coeffs(&[0, 1]);
        let b = f.p_from_coeffs(&[-1, 1]);
        let (g, s, t) = f.p_xgcd(&a, &b);
        assert_eq!(g, f.p_one());
        assert_eq!(f.p_add(&f.p_mul(&s, &a), &f.p_mul(&t, &b)), f.p_one());
    }

    proptest! {
        #[test]
        fn prop_divmod(av in proptest::collection::vec(-5i64..=5, 0..6),
                       bv in proptest::collection::vec(-5i64..=5, 1..5)) {
            let f = q();
            let a = f.p_from_coeffs(&av);
            let b = f.p_from_coeffs(&bv);
            prop_assume!(!b.is_zero());
            let (qq, r) = f.p_divmod(&a, &b);
            prop_assert_eq!(f.p_add(&f.p_mul(&qq, &b), &r), a);
            if let Some(dr) = r.degree() {
                prop_assert!(dr < b.degree().unwrap());
            }
        }

        #[test]
        fn prop_gcd_divides(av in proptest::collection::vec(-3i64..=3, 1..5),
                            bv in proptest::collection::vec(-3i64..=3, 1..5)) {
            let f = FieldSpec::fp(7);
            let a = f.p_from_coeffs(&av);
            let b = f.p_from_coeffs(&bv);
            prop_assume!(!a.is_zero() && !b.is_zero());
            let g = f.p_gcd(&a, &b);
            prop_assert!(f.p_rem(&a, &g).is_zero());
            prop_assert!(f.p_rem(&b, &g).is_zero());
        }
    }
}
