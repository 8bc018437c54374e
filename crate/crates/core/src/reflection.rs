//! Finite matrix groups, pseudo-reflection detection, mirror arrangements,
//! and the normal-crossing/abelian dichotomy check, together with an
//! exhaustive two-generator sweep over small prime fields in dimension two.

use crate::error::Error;
use crate::matrix::{rank, ElimCtx, Mat};
use crate::poly::Poly;
use crate::scalar::{FieldSpec, Scalar};
use std::collections::{HashMap, HashSet};

pub const CLOSURE_CAP: usize = 10_000;

/// A finite matrix group with its pseudo-reflections and mirror normals.
#[derive(Clone, Debug)]
pub struct ReflectionGroup {
    field: FieldSpec,
    dim: usize,
    generators: Vec<Vec<Scalar>>,
    elements: Vec<Vec<Scalar>>,
    reflections: Vec<usize>,
    mirrors: Vec<Vec<Scalar>>,
}

fn mat_id(field: &FieldSpec, n: usize) -> Vec<Scalar> {
    let mut m = vec![field.zero(); n * n];
    for i in 0..n {
        m[i * n + i] = field.one();
    }
    m
}

fn mat_mul_scalar(field: &FieldSpec, n: usize, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![field.zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if field.is_zero(&a[i * n + k]) {
                continue;
            }
            for j in 0..n {
                let t = field.mul(&a[i * n + k], &b[k * n + j]);
                out[i * n + j] = field.add(&out[i * n + j], &t);
            }
        }
    }
    out
}

fn to_poly_mat(field: &FieldSpec, n: usize, a: &[Scalar]) -> Mat {
    Mat::from_fn(n, n, |i, j| Poly::constant(a[i * n + j].clone(), field))
}

fn scalar_rank(field: &FieldSpec, n: usize, a: &[Scalar]) -> usize {
    rank(&ElimCtx::Field(field), &to_poly_mat(field, n, a))
}

/// `1 - g` as a flat scalar matrix.
fn one_minus(field: &FieldSpec, n: usize, g: &[Scalar]) -> Vec<Scalar> {
    let mut out = g.iter().map(|x| field.neg(x)).collect::<Vec<_>>();
    for i in 0..n {
        out[i * n + i] = field.add(&out[i * n + i], &field.one());
    }
    out
}

/// Normalized normal covector of a pseudo-reflection: the first nonzero row
/// of `1 - g`, scaled to leading coefficient one.
fn mirror_normal(field: &FieldSpec, n: usize, g: &[Scalar]) -> Vec<Scalar> {
    let om = one_minus(field, n, g);
    for i in 0..n {
        let row = &om[i * n..(i + 1) * n];
        if let Some(lead) = row.iter().position(|x| !field.is_zero(x)) {
            let inv = field.inv(&row[lead]);
            return row.iter().map(|x| field.mul(x, &inv)).collect();
        }
    }
    unreachable!("pseudo-reflection has a nonzero displacement")
}

fn closure_of(
    field: &FieldSpec,
    dim: usize,
    generators: &[Vec<Scalar>],
    cap: usize,
) -> Result<Vec<Vec<Scalar>>, Error> {
    let id = mat_id(field, dim);
    let mut seen: HashSet<Vec<Scalar>> = HashSet::new();
    let mut elements: Vec<Vec<Scalar>> = Vec::new();
    let mut work: Vec<Vec<Scalar>> = vec![id.clone()];
    seen.insert(id.clone());
    elements.push(id);
    while let Some(g) = work.pop() {
        for gen in generators {
            let h = mat_mul_scalar(field, dim, &g, gen);
            if seen.insert(h.clone()) {
                elements.push(h.clone());
                work.push(h);
                if elements.len() > cap {
                    return Err(Error::ClosureCap);
                }
            }
        }
    }
    Ok(elements)
}

impl ReflectionGroup {
    /// Close a generating set into the full finite group, recording the
    /// pseudo-reflections and their distinct mirror normals.
    pub fn close(
        field: FieldSpec,
        dim: usize,
        generators: Vec<Vec<Scalar>>,
    ) -> Result<ReflectionGroup, Error> {
        for (i, g) in generators.iter().enumerate() {
            assert_eq!(g.len(), dim * dim, "generator {i} has the wrong shape");
            if scalar_rank(&field, dim, g) != dim {
                return Err(Error::NotInvertible(format!("generator {i}")));
            }
        }
        let elements = closure_of(&field, dim, &generators, CLOSURE_CAP)?;
        if let FieldSpec::Fp(p) = field {
            if elements.len() as u64 % p == 0 {
                return Err(Error::WildCharacteristic);
            }
        }
        let mut reflections = Vec::new();
        let mut mirrors: Vec<Vec<Scalar>> = Vec::new();
        for (i, g) in elements.iter().enumerate() {
            let om = one_minus(&field, dim, g);
            if scalar_rank(&field, dim, &om) == 1 {
                reflections.push(i);
                let normal = mirror_normal(&field, dim, g);
                if !mirrors.contains(&normal) {
                    mirrors.push(normal);
                }
            }
        }
        mirrors.sort();
        Ok(ReflectionGroup {
            field,
            dim,
            generators,
            elements,
            reflections,
            mirrors,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn elements(&self) -> &[Vec<Scalar>] {
        &self.elements
    }

    pub fn reflection_count(&self) -> usize {
        self.reflections.len()
    }

    pub fn mirror_normals(&self) -> &[Vec<Scalar>] {
        &self.mirrors
    }

    /// Whether the distinct mirror normals are jointly linearly independent
    /// (at most `dim` mirrors through the origin, cutting transversally).
    pub fn normal_crossing(&self) -> bool {
        if self.mirrors.len() > self.dim {
            return false;
        }
        if self.mirrors.is_empty() {
            return true;
        }
        let stacked = Mat::from_fn(self.mirrors.len(), self.dim, |i, j| {
            Poly::constant(self.mirrors[i][j].clone(), &self.field)
        });
        rank(&ElimCtx::Field(&self.field), &stacked) == self.mirrors.len()
    }

    pub fn is_abelian(&self) -> bool {
        // generators commute iff the group is abelian
        for i in 0..self.generators.len() {
            for j in i + 1..self.generators.len() {
                let gh = mat_mul_scalar(
                    &self.field,
                    self.dim,
                    &self.generators[i],
                    &self.generators[j],
                );
                let hg = mat_mul_scalar(
                    &self.field,
                    self.dim,
                    &self.generators[j],
                    &self.generators[i],
                );
                if gh != hg {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_generated_by_reflections(&self) -> bool {
        let refl: Vec<Vec<Scalar>> = self
            .reflections
            .iter()
            .map(|&i| self.elements[i].clone())
            .collect();
        if refl.is_empty() {
            return self.elements.len() == 1;
        }
        match closure_of(&self.field, self.dim, &refl, CLOSURE_CAP) {
            Ok(sub) => sub.len() == self.elements.len(),
            Err(_) => false,
        }
    }
}

/// Outcome of the mirror-arrangement dichotomy check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InertiaVerdict {
    /// Normal crossing and abelian, as the dichotomy predicts.
    Confirmed,
    /// Not normal crossing; the abelianness bit is reported for exploration.
    NotApplicable { abelian: bool },
    /// Normal crossing but non-abelian: a counterexample (expected never).
    LemmaFalsified,
}

/// For a group generated by pseudo-reflections, check the dichotomy: a
/// normal-crossing mirror arrangement forces the group to be abelian.
pub fn abelian_inertia_check(g: &ReflectionGroup) -> Result<InertiaVerdict, Error> {
    if !g.is_generated_by_reflections() {
        return Err(Error::GeneratedByReflectionsViolation);
    }
    let abelian = g.is_abelian();
    if g.normal_crossing() {
        if abelian {
            Ok(InertiaVerdict::Confirmed)
        } else {
            Ok(InertiaVerdict::LemmaFalsified)
        }
    } else {
        Ok(InertiaVerdict::NotApplicable { abelian })
    }
}

// ---------------------------------------------------------------------------
// Exhaustive dimension-2 sweep over a prime field
// ---------------------------------------------------------------------------

/// Tallies of the two-generator sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub reflections: u64,
    pub pairs: u64,
    pub nc_abelian: u64,
    pub nc_nonabelian: u64,
    pub not_nc: u64,
    pub wild: u64,
    pub cap_hit: u64,
    pub cross_checked: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairVerdict {
    NcAbelian,
    NcNonAbelian,
    NotNc,
    Wild,
    CapHit,
}

// 2x2 matrices over F_p packed as four 8-bit entries (row major).
fn pk(a: [u64; 4]) -> u32 {
    (a[0] as u32) | ((a[1] as u32) << 8) | ((a[2] as u32) << 16) | ((a[3] as u32) << 24)
}

fn unpk(m: u32) -> [u64; 4] {
    [
        (m & 0xff) as u64,
        ((m >> 8) & 0xff) as u64,
        ((m >> 16) & 0xff) as u64,
        ((m >> 24) & 0xff) as u64,
    ]
}

fn m2mul(p: u64, a: [u64; 4], b: [u64; 4]) -> [u64; 4] {
    [
        (a[0] * b[0] + a[1] * b[2]) % p,
        (a[0] * b[1] + a[1] * b[3]) % p,
        (a[2] * b[0] + a[3] * b[2]) % p,
        (a[2] * b[1] + a[3] * b[3]) % p,
    ]
}

fn m2det(p: u64, a: [u64; 4]) -> u64 {
    (a[0] * a[3] % p + p - a[1] * a[2] % p) % p
}

fn m2inv_scalar(p: u64, a: u64) -> u64 {
    // p is prime and a is nonzero
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

fn m2inv(p: u64, a: [u64; 4]) -> [u64; 4] {
    let d = m2det(p, a);
    let di = m2inv_scalar(p, d);
    [
        a[3] * di % p,
        (p - a[1] % p) % p * di % p,
        (p - a[2] % p) % p * di % p,
        a[0] * di % p,
    ]
}

fn m2order(p: u64, a: [u64; 4], cap: u64) -> Option<u64> {
    let id = [1, 0, 0, 1];
    let mut cur = a;
    for k in 1..=cap {
        if cur == id {
            return Some(k);
        }
        cur = m2mul(p, cur, a);
    }
    None
}

/// `rank(1 - g) == 1` over F_p in dimension 2.
fn m2_is_reflection(p: u64, g: [u64; 4]) -> bool {
    let om = [
        (1 + p - g[0]) % p,
        (p - g[1] % p) % p,
        (p - g[2] % p) % p,
        (1 + p - g[3]) % p,
    ];
    let det = m2det(p, om);
    let nonzero = om.iter().any(|&x| x != 0);
    det == 0 && nonzero
}

/// Normalized mirror normal of a reflection, packed into 16 bits.
fn m2_mirror(p: u64, g: [u64; 4]) -> u32 {
    let om = [
        (1 + p - g[0]) % p,
        (p - g[1] % p) % p,
        (p - g[2] % p) % p,
        (1 + p - g[3]) % p,
    ];
    let row = if om[0] != 0 || om[1] != 0 {
        [om[0], om[1]]
    } else {
        [om[2], om[3]]
    };
    let lead = if row[0] != 0 { row[0] } else { row[1] };
    let li = m2inv_scalar(p, lead);
    let n = [row[0] * li % p, row[1] * li % p];
    (n[0] as u32) | ((n[1] as u32) << 8)
}

/// Verdict for the group generated by a canonical pair, by explicit closure.
fn canonical_pair_verdict(p: u64, g: [u64; 4], h: [u64; 4], cap: usize) -> PairVerdict {
    let mut seen: HashSet<u32> = HashSet::new();
    let mut work: Vec<[u64; 4]> = Vec::new();
    let id = [1u64, 0, 0, 1];
    seen.insert(pk(id));
    work.push(id);
    let mut elements: Vec<[u64; 4]> = vec![id];
    while let Some(e) = work.pop() {
        for gen in [g, h] {
            let f = m2mul(p, e, gen);
            if seen.insert(pk(f)) {
                elements.push(f);
                work.push(f);
                if elements.len() > cap {
                    return PairVerdict::CapHit;
                }
            }
        }
    }
    if elements.len() as u64 % p == 0 {
        return PairVerdict::Wild;
    }
    // mirrors of all pseudo-reflections in the group
    let mut mirrors: Vec<u32> = Vec::new();
    for e in &elements {
        if m2_is_reflection(p, *e) {
            let m = m2_mirror(p, *e);
            if !mirrors.contains(&m) {
                mirrors.push(m);
            }
        }
    }
    let nc = match mirrors.len() {
        0 | 1 => true,
        2 => {
            let a = unpk(mirrors[0]);
            let b = unpk(mirrors[1]);
            (a[0] * b[1] % p + p - a[1] * b[0] % p) % p != 0
        }
        _ => false,
    };
    let abelian = m2mul(p, g, h) == m2mul(p, h, g);
    match (nc, abelian) {
        (true, true) => PairVerdict::NcAbelian,
        (true, false) => PairVerdict::NcNonAbelian,
        (false, _) => PairVerdict::NotNc,
    }
}

/// A matrix conjugating `g` (a tame reflection with eigenvalues `1, lambda`)
/// to `diag(1, lambda)`: columns are eigenvectors.
fn diagonalizing_matrix(p: u64, g: [u64; 4], lambda: u64) -> [u64; 4] {
    let eigvec = |mu: u64| -> [u64; 2] {
        // kernel of g - mu
        let m = [
            (g[0] + p - mu) % p,
            g[1],
            g[2],
            (g[3] + p - mu) % p,
        ];
        if m[0] != 0 || m[1] != 0 {
            [(p - m[1] % p) % p, m[0]]
        } else if m[2] != 0 || m[3] != 0 {
            [(p - m[3] % p) % p, m[2]]
        } else {
            [1, 0] // g - mu = 0: any vector
        }
    };
    let u = eigvec(1);
    let w = eigvec(lambda);
    [u[0], w[0], u[1], w[1]]
}

/// Exhaustive sweep over every ordered pair of tame pseudo-reflections of
/// bounded order in `GL_2(F_p)`. Verdicts are computed on a canonical
/// representative of each simultaneous-conjugacy class (conjugation
/// preserves order, mirrors, normal crossing, and abelianness) and memoized;
/// a sample of pairs is re-checked against the general-purpose path.
pub fn sweep_reflection_pairs(p: u64, max_order: u64, cap: usize) -> SweepOutcome {
    assert!(p >= 3 && p < 256, "packed representation needs a small odd prime");
    let field = FieldSpec::fp(p);
    // enumerate tame pseudo-reflections of bounded order
    let mut reflections: Vec<[u64; 4]> = Vec::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let g = [a, b, c, d];
                    if m2det(p, g) == 0 || !m2_is_reflection(p, g) {
                        continue;
                    }
                    match m2order(p, g, max_order) {
                        Some(k) if k % p != 0 => {
                            let _ = k;
                            reflections.push(g);
                        }
                        _ => continue,
                    }
                }
            }
        }
    }
    let mut memo: HashMap<(u64, u32), PairVerdict> = HashMap::new();
    let mut out = SweepOutcome {
        reflections: reflections.len() as u64,
        ..SweepOutcome::default()
    };
    let mut counter = 0u64;
    for &g in &reflections {
        // lambda is the non-unit eigenvalue, which equals the determinant
        let lambda = m2det(p, g);
        let c = diagonalizing_matrix(p, g, lambda);
        let cinv = m2inv(p, c);
        for &h in &reflections {
            let h_conj = m2mul(p, m2mul(p, cinv, h), c);
            let key = (lambda, pk(h_conj));
            let verdict = *memo.entry(key).or_insert_with(|| {
                let g_canon = [1, 0, 0, lambda];
                canonical_pair_verdict(p, g_canon, h_conj, cap)
            });
            out.pairs += 1;
            match verdict {
                PairVerdict::NcAbelian => out.nc_abelian += 1,
                PairVerdict::NcNonAbelian => out.nc_nonabelian += 1,
                PairVerdict::NotNc => out.not_nc += 1,
                PairVerdict::Wild => out.wild += 1,
                PairVerdict::CapHit => out.cap_hit += 1,
            }
            // periodically tie the fast path to the general implementation
            counter += 1;
            if counter % 9973 == 1 {
                let to_scalars = |m: [u64; 4]| -> Vec<Scalar> {
                    m.iter().map(|&v| field.from_i64(v as i64)).collect()
                };
                let general =
                    ReflectionGroup::close(field, 2, vec![to_scalars(g), to_scalars(h)]);
                let expect = match verdict {
                    PairVerdict::NcAbelian => Some((true, true)),
                    PairVerdict::NcNonAbelian => Some((true, false)),
                    PairVerdict::NotNc => None,
                    PairVerdict::Wild | PairVerdict::CapHit => {
                        assert!(general.is_err(), "fast path skipped a closable group");
                        out.cross_checked += 1;
                        continue;
                    }
                };
                let grp = general.expect("fast path closed but general path failed");
                match expect {
                    Some((nc, ab)) => {
                        assert_eq!(grp.normal_crossing(), nc);
                        assert_eq!(grp.is_abelian(), ab);
                    }
                    None => assert!(!grp.normal_crossing()),
                }
                out.cross_checked += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qmat(entries: &[i64]) -> Vec<Scalar> {
        entries.iter().map(|&x| FieldSpec::Q.from_i64(x)).collect()
    }

    #[test]
    fn klein_four() {
        let g = ReflectionGroup::close(
            FieldSpec::Q,
            2,
            vec![qmat(&[-1, 0, 0, 1]), qmat(&[1, 0, 0, -1])],
        )
        .unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.reflection_count(), 2);
        assert!(g.normal_crossing());
        assert_eq!(abelian_inertia_check(&g).unwrap(), InertiaVerdict::Confirmed);
    }

    #[test]
    fn symmetric_group_on_three_letters() {
        // the two simple transpositions in the standard 2-dim representation
        let g = ReflectionGroup::close(
            FieldSpec::Q,
            2,
            vec![qmat(&[-1, 1, 0, 1]), qmat(&[1, 0, 1, -1])],
        )
        .unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.reflection_count(), 3);
        assert!(!g.normal_crossing());
        assert_eq!(
            abelian_inertia_check(&g).unwrap(),
            InertiaVerdict::NotApplicable { abelian: false }
        );
    }

    #[test]
    fn cyclic_reflection_over_f7() {
        // diag(2, 1): a third root of unity in one coordinate
        let f = FieldSpec::fp(7);
        let gens = vec![vec![
            f.from_i64(2),
            f.from_i64(0),
            f.from_i64(0),
            f.from_i64(1),
        ]];
        let g = ReflectionGroup::close(f, 2, gens).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.reflection_count(), 2);
        assert_eq!(g.mirror_normals().len(), 1);
        assert_eq!(abelian_inertia_check(&g).unwrap(), InertiaVerdict::Confirmed);
    }

    #[test]
    fn trivial_group() {
        let g = ReflectionGroup::close(FieldSpec::Q, 2, vec![qmat(&[1, 0, 0, 1])]).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.normal_crossing());
        assert_eq!(abelian_inertia_check(&g).unwrap(), InertiaVerdict::Confirmed);
    }

    #[test]
    fn non_reflection_generated_rejected() {
        // minus the identity is not a pseudo-reflection in dimension 2
        let g = ReflectionGroup::close(FieldSpec::Q, 2, vec![qmat(&[-1, 0, 0, -1])]).unwrap();
        assert_eq!(g.reflection_count(), 0);
        assert!(matches!(
            abelian_inertia_check(&g),
            Err(Error::GeneratedByReflectionsViolation)
        ));
    }

    #[test]
    fn conjugate_reflections_have_transported_mirrors() {
        // conjugating a reflection moves its mirror by the same change of
        // basis
        let f = FieldSpec::Q;
        let refl = [-1i64, 0, 0, 1];
        let conj = [1i64, 1, 0, 1]; // shear
        let conj_inv = [1i64, -1, 0, 1];
        let mul = |a: &[i64; 4], b: &[i64; 4]| -> [i64; 4] {
            [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ]
        };
        let moved = mul(&mul(&conj, &refl), &conj_inv);
        let g1 = ReflectionGroup::close(f, 2, vec![qmat(&refl)]).unwrap();
        let g2 = ReflectionGroup::close(f, 2, vec![qmat(&moved)]).unwrap();
        assert_eq!(g1.reflection_count(), g2.reflection_count());
        assert_eq!(g1.mirror_normals().len(), g2.mirror_normals().len());
        assert_ne!(g1.mirror_normals(), g2.mirror_normals());
    }

    #[test]
    fn wild_characteristic_detected() {
        // a transvection has order p
        let f = FieldSpec::fp(5);
        let gens = vec![vec![
            f.from_i64(1),
            f.from_i64(1),
            f.from_i64(0),
            f.from_i64(1),
        ]];
        assert!(matches!(
            ReflectionGroup::close(f, 2, gens),
            Err(Error::WildCharacteristic)
        ));
    }

    #[test]
    fn small_sweep_is_clean() {
        let out = sweep_reflection_pairs(7, 6, CLOSURE_CAP);
        assert_eq!(out.nc_nonabelian, 0);
        assert!(out.pairs > 0);
        assert_eq!(
            out.pairs,
            out.nc_abelian + out.not_nc + out.wild + out.cap_hit
        );
        assert!(out.cross_checked > 0);
    }
}
