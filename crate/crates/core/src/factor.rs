//! Factorization of squarefree univariate polynomials into monic
//! irreducibles, over `F_p` (Berlekamp) and over `Q` (rational roots, then a
//! monic Zassenhaus lift for degree four and up).
//!
//! Only squarefree inputs are accepted; callers validate squarefreeness
//! first, which keeps the characteristic-p corner cases out of scope.

use crate::matrix::{kernel_cols, ElimCtx, Mat};
use crate::poly::Poly;
use crate::scalar::{FieldSpec, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Factor a squarefree nonzero polynomial into monic irreducibles, sorted by
/// `(degree, coefficients)`. The unit content is dropped.
pub fn factor_squarefree(field: &FieldSpec, f: &Poly) -> Vec<Poly> {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    assert!(
        field.p_is_squarefree(f),
        "factor_squarefree requires a squarefree input"
    );
    let f = field.p_monic(f);
    if f.degree() == Some(0) {
        return vec![];
    }
    let mut out = match field {
        FieldSpec::Fp(_) => berlekamp(field, &f),
        FieldSpec::Q => factor_squarefree_q(field, &f),
    };
    out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.coeffs.cmp(&b.coeffs)));
    debug_assert_eq!(
        out.iter()
            .fold(field.p_one(), |acc, g| field.p_mul(&acc, g)),
        f,
        "factorization must multiply back to the input"
    );
    out
}

// ---------------------------------------------------------------------------
// Berlekamp over F_p
// ---------------------------------------------------------------------------

fn berlekamp(field: &FieldSpec, f: &Poly) -> Vec<Poly> {
    let p = field.characteristic();
    let d = f.degree().unwrap();
    if d == 1 {
        return vec![f.clone()];
    }
    // Frobenius-minus-identity matrix on the basis 1, x, .., x^{d-1}.
    let x = field.p_x();
    let mut frob = Mat::zero(d, d);
    for i in 0..d {
        let xi = field.p_pow_mod(&x, p * i as u64, f);
        for (r, c) in xi.coeffs.iter().enumerate() {
            frob.set(r, i, Poly::constant(c.clone(), field));
        }
        let diag = frob.at(i, i).clone();
        frob.set(i, i, field.p_sub(&diag, &field.p_one()));
    }
    let ctx = ElimCtx::Field(field);
    let null = kernel_cols(&ctx, &frob);
    let s = null.cols; // number of irreducible factors
    if s == 1 {
        return vec![f.clone()];
    }
    let basis: Vec<Poly> = (0..s)
        .map(|j| {
            let coeffs: Vec<Scalar> = (0..d)
                .map(|i| {
                    let e = null.at(i, j);
                    if e.is_zero() {
                        field.zero()
                    } else {
                        e.coeffs[0].clone()
                    }
                })
                .collect();
            let mut v = Poly { coeffs };
            while v.coeffs.last().map_or(false, |c| field.is_zero(c)) {
                v.coeffs.pop();
            }
            v
        })
        .collect();
    let mut factors = vec![f.clone()];
    for v in &basis {
        if factors.len() == s {
            break;
        }
        if v.degree().map_or(true, |dg| dg == 0) {
            continue; // constants never split anything
        }
        let mut next = Vec::new();
        for g in factors {
            if g.degree() == Some(1) {
                next.push(g);
                continue;
            }
            let mut pieces = Vec::new();
            for c in 0..p {
                let shifted = field.p_sub(v, &field.p_constant(c as i64));
                let h = field.p_gcd(&g, &shifted);
                if h.degree().map_or(false, |dg| dg >= 1) {
                    pieces.push(h);
                }
            }
            debug_assert_eq!(
                pieces
                    .iter()
                    .fold(field.p_one(), |acc, h| field.p_mul(&acc, h)),
                g
            );
            next.extend(pieces);
        }
        factors = next;
    }
    assert_eq!(factors.len(), s, "Berlekamp basis failed to split fully");
    factors
}

// ---------------------------------------------------------------------------
// Rational factorization
// ---------------------------------------------------------------------------

fn factor_squarefree_q(field: &FieldSpec, f: &Poly) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut g = f.clone();
    // strip a factor of x
    if !g.coeffs.is_empty() && field.is_zero(&g.coeffs[0]) {
        out.push(field.p_x());
        g = Poly {
            coeffs: g.coeffs[1..].to_vec(),
        };
    }
    if g.degree() == Some(0) {
        return out;
    }
    let zf = to_primitive_int(&g);
    let mut rem = zf;
    // rational roots first
    for root in rational_roots(&rem) {
        let lin = field.p_sub(
            &field.p_x(),
            &Poly::constant(Scalar::Rat(root.clone()), field),
        );
        out.push(lin);
        rem = deflate_root(&rem, &root);
    }
    let deg = rem.len().saturating_sub(1);
    match deg {
        0 => {}
        1 => out.push(field.p_monic(&zpoly_to_poly(field, &rem))),
        2 | 3 => out.push(field.p_monic(&zpoly_to_poly(field, &rem))),
        _ => {
            for zf in zassenhaus_monic_scaled(&rem) {
                out.push(field.p_monic(&zpoly_to_poly(field, &zf)));
            }
        }
    }
    out
}

type ZPoly = Vec<BigInt>; // lowest degree first, trimmed

fn z_trim(mut p: ZPoly) -> ZPoly {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

fn z_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    z_trim(out)
}

/// Exact division by a monic divisor; `None` if the remainder is nonzero.
fn z_div_exact_monic(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
    assert!(b.last().map_or(false, |c| c.is_one()), "divisor not monic");
    let mut rem = a.clone();
    let db = b.len() - 1;
    let mut q = vec![BigInt::zero(); a.len().saturating_sub(db)];
    while z_trim(rem.clone()).len() > db {
        let rem_t = z_trim(rem.clone());
        let dr = rem_t.len() - 1;
        let c = rem_t[dr].clone();
        let shift = dr - db;
        q[shift] = c.clone();
        rem = rem_t;
        for (i, bc) in b.iter().enumerate() {
            rem[i + shift] -= &c * bc;
        }
        rem = z_trim(rem);
        rem.resize(rem.len().max(1), BigInt::zero());
    }
    if z_trim(rem).is_empty() {
        Some(z_trim(q))
    } else {
        None
    }
}

fn to_primitive_int(f: &Poly) -> ZPoly {
    let mut lcm = BigInt::one();
    for c in &f.coeffs {
        if let Scalar::Rat(r) = c {
            lcm = lcm.lcm(r.denom());
        }
    }
    let mut z: ZPoly = f
        .coeffs
        .iter()
        .map(|c| match c {
            Scalar::Rat(r) => r.numer() * (&lcm / r.denom()),
            _ => unreachable!(),
        })
        .collect();
    let mut content = BigInt::zero();
    for c in &z {
        content = content.gcd(c);
    }
    if !content.is_zero() && !content.is_one() {
        for c in z.iter_mut() {
            *c /= &content;
        }
    }
    z_trim(z)
}

fn zpoly_to_poly(_field: &FieldSpec, z: &ZPoly) -> Poly {
    Poly {
        coeffs: z
            .iter()
            .map(|c| Scalar::Rat(BigRational::from(c.clone())))
            .collect(),
    }
}

fn small_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
        if out.len() > 4000 {
            break; // give up on root search, Zassenhaus will handle it
        }
    }
    out.sort();
    out.dedup();
    out
}

fn z_eval_rational(f: &ZPoly, r: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in f.iter().rev() {
        acc = acc * r + BigRational::from(c.clone());
    }
    acc
}

fn rational_roots(f: &ZPoly) -> Vec<BigRational> {
    if f.len() < 2 {
        return vec![];
    }
    let a0 = &f[0];
    let lead = f.last().unwrap();
    if a0.magnitude().bits() > 48 || lead.magnitude().bits() > 48 {
        return vec![]; // coefficients too large for trial roots
    }
    let mut roots = Vec::new();
    for p in small_divisors(a0) {
        for q in small_divisors(lead) {
            if q.is_zero() || p.gcd(&q) != BigInt::one() {
                continue;
            }
            for sign in [1, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                if z_eval_rational(f, &cand).is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

/// Divide out `x - r` from an integer polynomial, returning the primitive
/// integer quotient.
fn deflate_root(f: &ZPoly, r: &BigRational) -> ZPoly {
    // synthetic division over Q, then clear denominators
    let mut qcoeffs: Vec<BigRational> = Vec::with_capacity(f.len() - 1);
    let mut acc = BigRational::zero();
    for c in f.iter().rev() {
        acc = acc * r + BigRational::from(c.clone());
        qcoeffs.push(acc.clone());
    }
    debug_assert!(qcoeffs.last().unwrap().is_zero());
    qcoeffs.pop();
    qcoeffs.reverse();
    let mut lcm = BigInt::one();
    for c in &qcoeffs {
        lcm = lcm.lcm(c.denom());
    }
    let z: ZPoly = qcoeffs
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let mut content = BigInt::zero();
    for c in &z {
        content = content.gcd(c);
    }
    let z: ZPoly = if content.is_one() || content.is_zero() {
        z
    } else {
        z.iter().map(|c| c / &content).collect()
    };
    z_trim(z)
}

/// Zassenhaus for a primitive squarefree integer polynomial of degree >= 4
/// with no rational roots. Works on the monicized polynomial
/// `L^{d-1} f(y/L)` and maps factors back.
fn zassenhaus_monic_scaled(f: &ZPoly) -> Vec<ZPoly> {
    let d = f.len() - 1;
    let lead = f.last().unwrap().clone();
    let monic: ZPoly = if lead.is_one() {
        f.clone()
    } else {
        // G(y) = L^{d-1} f(y/L): coefficient of y^i is a_i * L^{d-1-i}
        (0..=d)
            .map(|i| &f[i] * lead.pow((d - 1 - i) as u32))
            .collect()
    };
    let factors = zassenhaus_monic(&z_trim(monic));
    if lead.is_one() {
        return factors;
    }
    factors
        .iter()
        .map(|h| {
            // h(L x), made primitive
            let z: ZPoly = h
                .iter()
                .enumerate()
                .map(|(i, c)| c * lead.pow(i as u32))
                .collect();
            let mut content = BigInt::zero();
            for c in &z {
                content = content.gcd(c);
            }
            z_trim(z.iter().map(|c| c / &content).collect())
        })
        .collect()
}

fn zassenhaus_monic(f: &ZPoly) -> Vec<ZPoly> {
    debug_assert!(f.last().unwrap().is_one());
    // choose a prime where f stays squarefree
    let mut p = 0u64;
    for cand in [
        3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97, 101, 103,
    ] {
        let fp = FieldSpec::fp(cand);
        let reduced = zpoly_mod(f, &fp);
        if reduced.degree() == Some(f.len() - 1) && fp.p_is_squarefree(&reduced) {
            p = cand;
            break;
        }
    }
    assert!(p != 0, "no good prime found for Hensel lifting");
    let fp = FieldSpec::fp(p);
    let reduced = zpoly_mod(f, &fp);
    let modp_factors = berlekamp(&fp, &reduced);
    if modp_factors.len() == 1 {
        return vec![f.clone()];
    }
    // Mignotte-style bound on factor coefficients
    let norm2_sq: BigInt = f.iter().map(|c| c * c).sum();
    let bound = (BigInt::from(2).pow((f.len() - 1) as u32)) * (norm2_sq.sqrt() + 1) + 1;
    let mut pk = BigInt::from(p);
    while pk < BigInt::from(2) * &bound + 1 {
        pk = &pk * &pk;
    }
    let modp_z: Vec<ZPoly> = modp_factors.iter().map(|g| poly_to_zpoly(&fp, g)).collect();
    let lifted = hensel_tree(f, &modp_z, &BigInt::from(p), &pk);
    recombine(f, lifted, &pk)
}

fn zpoly_mod(f: &ZPoly, fp: &FieldSpec) -> Poly {
    let p = fp.characteristic() as i64;
    let coeffs: Vec<i64> = f
        .iter()
        .map(|c| {
            let r = c.mod_floor(&BigInt::from(p));
            i64::try_from(r).unwrap()
        })
        .collect();
    fp.p_from_coeffs(&coeffs)
}

fn poly_to_zpoly(_fp: &FieldSpec, g: &Poly) -> ZPoly {
    g.coeffs
        .iter()
        .map(|c| match c {
            Scalar::Fp { v, .. } => BigInt::from(*v),
            Scalar::Rat(r) => r.numer().clone(),
        })
        .collect()
}

// -- modular ZPoly helpers --------------------------------------------------

fn zm_red(a: &ZPoly, m: &BigInt) -> ZPoly {
    z_trim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn zm_mul(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    zm_red(&z_mul(a, b), m)
}

fn zm_add(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let mut out = vec![BigInt::zero(); n];
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_default();
        let y = b.get(i).cloned().unwrap_or_default();
        out[i] = (x + y).mod_floor(m);
    }
    z_trim(out)
}

fn zm_sub(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let mut out = vec![BigInt::zero(); n];
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_default();
        let y = b.get(i).cloned().unwrap_or_default();
        out[i] = (x - y).mod_floor(m);
    }
    z_trim(out)
}

/// Division with remainder by a monic divisor, mod m.
fn zm_divmod_monic(a: &ZPoly, b: &ZPoly, m: &BigInt) -> (ZPoly, ZPoly) {
    debug_assert!(b.last().map_or(false, |c| c.is_one()));
    let db = b.len() - 1;
    let mut rem = zm_red(a, m);
    let mut q = vec![BigInt::zero(); rem.len().saturating_sub(db)];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = rem[dr].clone();
        let shift = dr - db;
        q[shift] = c.clone();
        for (i, bc) in b.iter().enumerate() {
            let v = (&rem[i + shift] - &c * bc).mod_floor(m);
            rem[i + shift] = v;
        }
        rem = z_trim(rem);
    }
    (z_trim(q), rem)
}

/// One quadratic Hensel step: from factorization and Bezout data mod m to
/// mod m^2.
#[allow(clippy::too_many_arguments)]
fn hensel_step(
    f: &ZPoly,
    g: &ZPoly,
    h: &ZPoly,
    s: &ZPoly,
    t: &ZPoly,
    m: &BigInt,
) -> (ZPoly, ZPoly, ZPoly, ZPoly) {
    let m2 = m * m;
    let e = zm_sub(f, &zm_mul(g, h, &m2), &m2);
    let (q, r) = zm_divmod_monic(&zm_mul(s, &e, &m2), h, &m2);
    let g2 = zm_add(&zm_add(g, &zm_mul(t, &e, &m2), &m2), &zm_mul(&q, g, &m2), &m2);
    let h2 = zm_add(h, &r, &m2);
    let b = zm_sub(
        &zm_add(&zm_mul(s, &g2, &m2), &zm_mul(t, &h2, &m2), &m2),
        &vec![BigInt::one()],
        &m2,
    );
    let (c, d) = zm_divmod_monic(&zm_mul(s, &b, &m2), &h2, &m2);
    let s2 = zm_sub(s, &d, &m2);
    let t2 = zm_sub(
        t,
        &zm_add(&zm_mul(t, &b, &m2), &zm_mul(&c, &g2, &m2), &m2),
        &m2,
    );
    (g2, h2, s2, t2)
}

/// Lift a mod-p factorization of monic `f` to mod `pk` (a power of p^2^j).
fn hensel_tree(f: &ZPoly, factors: &[ZPoly], p: &BigInt, pk: &BigInt) -> Vec<ZPoly> {
    if factors.len() == 1 {
        return vec![zm_red(f, pk)];
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let mut u = vec![BigInt::one()];
    for g in left {
        u = zm_mul(&u, g, p);
    }
    let mut v = vec![BigInt::one()];
    for g in right {
        v = zm_mul(&v, g, p);
    }
    // Bezout over F_p
    let fp = FieldSpec::fp(u64::try_from(p).unwrap());
    let up = zpoly_mod(&u, &fp);
    let vp = zpoly_mod(&v, &fp);
    let (gcd, s, t) = fp.p_xgcd(&up, &vp);
    assert_eq!(gcd.degree(), Some(0), "lift factors must be coprime mod p");
    let mut s = poly_to_zpoly(&fp, &s);
    let mut t = poly_to_zpoly(&fp, &t);
    let mut g = u;
    let mut h = v;
    let mut m = p.clone();
    while &m < pk {
        let (g2, h2, s2, t2) = hensel_step(f, &g, &h, &s, &t, &m);
        g = g2;
        h = h2;
        s = s2;
        t = t2;
        m = &m * &m;
    }
    let g = zm_red(&g, pk);
    let h = zm_red(&h, pk);
    let mut out = hensel_tree(&g, left, p, pk);
    out.extend(hensel_tree(&h, right, p, pk));
    out
}

fn balanced(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Try products of subsets of the lifted factors as true integer divisors.
fn recombine(f: &ZPoly, lifted: Vec<ZPoly>, pk: &BigInt) -> Vec<ZPoly> {
    let mut rem = f.clone();
    let mut pool: Vec<ZPoly> = lifted;
    let mut out = Vec::new();
    let mut size = 1usize;
    while 2 * size <= pool.len() {
        let mut advanced = false;
        let idxs: Vec<usize> = (0..pool.len()).collect();
        for combo in combinations(&idxs, size) {
            let mut cand = vec![BigInt::one()];
            for &i in &combo {
                cand = zm_mul(&cand, &pool[i], pk);
            }
            let cand: ZPoly = cand.iter().map(|c| balanced(c, pk)).collect();
            let cand = z_trim(cand);
            if cand.last().map_or(true, |c| !c.is_one()) {
                continue;
            }
            if let Some(q) = z_div_exact_monic(&rem, &cand) {
                out.push(cand);
                rem = q;
                let keep: Vec<ZPoly> = pool
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !combo.contains(i))
                    .map(|(_, g)| g.clone())
                    .collect();
                pool = keep;
                advanced = true;
                break;
            }
        }
        if !advanced {
            size += 1;
        }
    }
    if rem.len() > 1 {
        out.push(rem);
    }
    out
}

fn combinations(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = items.len();
    if size > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_splits_x2_minus_1() {
        let f = FieldSpec::fp(5);
        let poly = f.p_from_coeffs(&[-1, 0, 1]);
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 2);
    }

    #[test]
    fn fp_irreducible_detected() {
        let f = FieldSpec::fp(7);
        // x^2 + 1 is irreducible mod 7 (-1 is not a QR mod 7)
        let poly = f.p_from_coeffs(&[1, 0, 1]);
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn q_rational_roots_and_irreducible_quadratic() {
        let f = FieldSpec::Q;
        // (x-1)(x+2)(x^2-2)
        let poly = f.p_mul(
            &f.p_mul(&f.p_from_coeffs(&[-1, 1]), &f.p_from_coeffs(&[2, 1])),
            &f.p_from_coeffs(&[-2, 0, 1]),
        );
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 3);
        assert_eq!(fs.iter().filter(|g| g.degree() == Some(1)).count(), 2);
        assert_eq!(fs.iter().filter(|g| g.degree() == Some(2)).count(), 1);
    }

    #[test]
    fn q_two_irreducible_quadratics() {
        let f = FieldSpec::Q;
        // (x^2+1)(x^2-2): degree 4, no rational roots, needs the lift
        let poly = f.p_mul(&f.p_from_coeffs(&[1, 0, 1]), &f.p_from_coeffs(&[-2, 0, 1]));
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|g| g.degree() == Some(2)));
    }

    #[test]
    fn q_irreducible_quartic() {
        let f = FieldSpec::Q;
        // x^4 + x + 1 is irreducible over Q
        let poly = f.p_from_coeffs(&[1, 1, 0, 0, 1]);
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn q_nonmonic_input() {
        let f = FieldSpec::Q;
        // 2x^2 - 2 = 2(x-1)(x+1); monic factors returned
        let poly = f.p_from_coeffs(&[-2, 0, 2]);
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|g| g.degree() == Some(1)));
    }

    #[test]
    fn q_degree_six_mixed() {
        let f = FieldSpec::Q;
        // (x^2+1)(x^3 - x - 1)(x - 3)
        let poly = f.p_mul(
            &f.p_mul(&f.p_from_coeffs(&[1, 0, 1]), &f.p_from_coeffs(&[-1, -1, 0, 1])),
            &f.p_from_coeffs(&[-3, 1]),
        );
        let fs = factor_squarefree(&f, &poly);
        assert_eq!(fs.len(), 3);
        let degs: Vec<_> = fs.iter().map(|g| g.degree().unwrap()).collect();
        assert_eq!(degs, vec![1, 2, 3]);
    }
}
