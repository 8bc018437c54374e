//! Base rings, finitely presented modules, module maps, and
//! Grothendieck-group classes.
//!
//! The supported bases are a coefficient field, the polynomial line `k[x]`,
//! and squarefree quotients `k[x]/(m)`. Over such bases kernels, cokernels
//! and classes are computable by Euclidean elimination alone: fields and
//! `k[x]` directly, squarefree quotients factorwise through the CRT
//! decomposition into residue fields.
//!
//! Modules are kept in a canonical diagonal presentation at all times, so
//! module equality is presentation equality and map equality is matrix
//! equality after per-row reduction mod the generator annihilators.

use crate::error::Error;
use crate::factor::factor_squarefree;
use crate::matrix::{col_echelon, kernel_cols, solve_in_span, ElimCtx, Mat};
use crate::poly::Poly;
use crate::scalar::FieldSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Field,
    PolyLine,
    SquarefreeQuotient,
}

/// A computable coefficient base. For `SquarefreeQuotient` the modulus is
/// monic squarefree and carries its irreducible factorization; a unit
/// modulus is allowed and denotes the zero ring (the empty divisor
/// intersection).
#[derive(Clone, Debug)]
pub struct BaseRing {
    inner: std::sync::Arc<BaseRingInner>,
}

#[derive(Debug)]
struct BaseRingInner {
    field: FieldSpec,
    kind: RingKind,
    modulus: Option<Poly>,
    factors: Vec<Poly>,
    idempotents: Vec<Poly>,
}

impl PartialEq for BaseRing {
    fn eq(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.field == other.inner.field
                && self.inner.kind == other.inner.kind
                && self.inner.modulus == other.inner.modulus)
    }
}
impl Eq for BaseRing {}

fn ring_of(inner: BaseRingInner) -> BaseRing {
    BaseRing {
        inner: std::sync::Arc::new(inner),
    }
}

impl BaseRing {
    pub fn field(field: FieldSpec) -> BaseRing {
        ring_of(BaseRingInner {
            field,
            kind: RingKind::Field,
            modulus: None,
            factors: vec![],
            idempotents: vec![],
        })
    }

    pub fn poly_line(field: FieldSpec) -> BaseRing {
        ring_of(BaseRingInner {
            field,
            kind: RingKind::PolyLine,
            modulus: None,
            factors: vec![],
            idempotents: vec![],
        })
    }

    /// `k[x]/(m)` for squarefree `m`; `m` a unit gives the zero ring.
    pub fn squarefree_quotient(field: FieldSpec, modulus: &Poly) -> Result<BaseRing, Error> {
        if modulus.is_zero() {
            return Err(Error::NotSquarefree("zero modulus".into()));
        }
        let m = field.p_monic(modulus);
        if m.degree() == Some(0) {
            return Ok(ring_of(BaseRingInner {
                modulus: Some(field.p_one()),
                field,
                kind: RingKind::SquarefreeQuotient,
                factors: vec![],
                idempotents: vec![],
            }));
        }
        if !field.p_is_squarefree(&m) {
            return Err(Error::NotSquarefree(format!("{m}")));
        }
        let factors = factor_squarefree(&field, &m);
        let mut idempotents = Vec::with_capacity(factors.len());
        for mi in &factors {
            let (cofactor, _) = field.p_divmod(&m, mi);
            let inv = field
                .p_inv_mod(&cofactor, mi)
                .expect("cofactor is invertible mod an irreducible factor");
            idempotents.push(field.p_rem(&field.p_mul(&cofactor, &inv), &m));
        }
        Ok(ring_of(BaseRingInner {
            field,
            kind: RingKind::SquarefreeQuotient,
            modulus: Some(m),
            factors,
            idempotents,
        }))
    }

    pub fn coefficient_field(&self) -> &FieldSpec {
        &self.inner.field
    }

    pub fn kind(&self) -> RingKind {
        self.inner.kind
    }

    pub fn modulus(&self) -> Option<&Poly> {
        self.inner.modulus.as_ref()
    }

    pub fn irreducible_factors(&self) -> &[Poly] {
        &self.inner.factors
    }

    /// The zero ring: quotient by a unit modulus.
    pub fn is_zero_ring(&self) -> bool {
        matches!(self.inner.kind, RingKind::SquarefreeQuotient)
            && self.inner.modulus.as_ref().map_or(false, |m| m.degree() == Some(0))
    }

    /// Rank of the free part of `G_0` over this base: 1 for a field or the
    /// line, one per irreducible factor for a quotient.
    pub fn g0_rank(&self) -> usize {
        match self.inner.kind {
            RingKind::Field | RingKind::PolyLine => 1,
            RingKind::SquarefreeQuotient => self.inner.factors.len(),
        }
    }

    pub fn reduce(&self, a: &Poly) -> Poly {
        match self.inner.kind {
            RingKind::Field => {
                debug_assert!(a.degree().map_or(true, |d| d == 0));
                a.clone()
            }
            RingKind::PolyLine => a.clone(),
            RingKind::SquarefreeQuotient => {
                let m = self.inner.modulus.as_ref().unwrap();
                if m.degree() == Some(0) {
                    Poly::zero()
                } else {
                    self.inner.field.p_rem(a, m)
                }
            }
        }
    }

    pub fn zero_elem(&self) -> Poly {
        Poly::zero()
    }

    pub fn one_elem(&self) -> Poly {
        if self.is_zero_ring() {
            Poly::zero()
        } else {
            self.inner.field.p_one()
        }
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.inner.field.p_add(a, b))
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.inner.field.p_sub(a, b))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.inner.field.p_mul(a, b))
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        self.inner.field.p_neg(a)
    }

    pub fn is_unit(&self, a: &Poly) -> bool {
        match self.inner.kind {
            RingKind::Field => !a.is_zero(),
            RingKind::PolyLine => a.degree() == Some(0),
            RingKind::SquarefreeQuotient => {
                if self.is_zero_ring() {
                    return false;
                }
                let m = self.inner.modulus.as_ref().unwrap();
                self.inner.field.p_gcd(a, m).degree() == Some(0)
            }
        }
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        match self.inner.kind {
            RingKind::Field | RingKind::PolyLine => {
                if a.degree() == Some(0) {
                    Some(Poly {
                        coeffs: vec![self.inner.field.inv(&a.coeffs[0])],
                    })
                } else {
                    None
                }
            }
            RingKind::SquarefreeQuotient => {
                if self.is_zero_ring() {
                    return None;
                }
                self.inner.field.p_inv_mod(a, self.inner.modulus.as_ref().unwrap())
            }
        }
    }

    /// Chinese-remainder combination of residues, one per irreducible factor.
    fn crt(&self, residues: &[Poly]) -> Poly {
        assert_eq!(residues.len(), self.inner.factors.len());
        let mut acc = Poly::zero();
        for (r, e) in residues.iter().zip(&self.inner.idempotents) {
            acc = self.inner.field.p_add(&acc, &self.inner.field.p_mul(r, e));
        }
        self.reduce(&acc)
    }

    fn mat_reduce(&self, a: &Mat) -> Mat {
        Mat::from_fn(a.rows, a.cols, |i, j| self.reduce(a.at(i, j)))
    }

    pub fn mat_mul(&self, a: &Mat, b: &Mat) -> Mat {
        assert_eq!(a.cols, b.rows);
        Mat::from_fn(a.rows, b.cols, |i, j| {
            let mut acc = Poly::zero();
            for k in 0..a.cols {
                if a.at(i, k).is_zero() || b.at(k, j).is_zero() {
                    continue;
                }
                acc = self.inner.field.p_add(&acc, &self.inner.field.p_mul(a.at(i, k), b.at(k, j)));
            }
            self.reduce(&acc)
        })
    }

    pub fn mat_sub(&self, a: &Mat, b: &Mat) -> Mat {
        assert_eq!((a.rows, a.cols), (b.rows, b.cols));
        Mat::from_fn(a.rows, a.cols, |i, j| self.sub(a.at(i, j), b.at(i, j)))
    }

    pub fn mat_add(&self, a: &Mat, b: &Mat) -> Mat {
        assert_eq!((a.rows, a.cols), (b.rows, b.cols));
        Mat::from_fn(a.rows, a.cols, |i, j| self.add(a.at(i, j), b.at(i, j)))
    }

    /// Generators of `{ x : a x = 0 }` over this ring, as matrix columns.
    pub fn mat_kernel(&self, a: &Mat) -> Mat {
        match self.inner.kind {
            RingKind::Field => kernel_cols(&ElimCtx::Field(&self.inner.field), a),
            RingKind::PolyLine => kernel_cols(&ElimCtx::PolyLine(&self.inner.field), a),
            RingKind::SquarefreeQuotient => {
                if self.is_zero_ring() {
                    return Mat::zero(a.cols, 0);
                }
                let mut cols: Vec<Mat> = Vec::new();
                for (fi, mi) in self.inner.factors.iter().enumerate() {
                    let ctx = ElimCtx::ModIrreducible(&self.inner.field, mi);
                    let ker = kernel_cols(&ctx, a);
                    // embed: nonzero only on factor fi
                    let e = &self.inner.idempotents[fi];
                    let lifted = Mat::from_fn(ker.rows, ker.cols, |i, j| {
                        self.mul(ker.at(i, j), e)
                    });
                    cols.push(lifted);
                }
                if cols.is_empty() {
                    Mat::zero(a.cols, 0)
                } else {
                    let mut acc = cols[0].clone();
                    for c in &cols[1..] {
                        acc = acc.hstack(c);
                    }
                    acc
                }
            }
        }
    }

    /// Solve `span * x = b` over this ring; `None` when some column of `b`
    /// lies outside the column span.
    pub fn mat_solve_in_span(&self, span: &Mat, b: &Mat) -> Option<Mat> {
        match self.inner.kind {
            RingKind::Field => solve_in_span(&ElimCtx::Field(&self.inner.field), span, b),
            RingKind::PolyLine => solve_in_span(&ElimCtx::PolyLine(&self.inner.field), span, b),
            RingKind::SquarefreeQuotient => {
                if self.is_zero_ring() {
                    return Some(Mat::zero(span.cols, b.cols));
                }
                let mut parts: Vec<Mat> = Vec::new();
                for mi in &self.inner.factors {
                    let ctx = ElimCtx::ModIrreducible(&self.inner.field, mi);
                    parts.push(solve_in_span(&ctx, span, b)?);
                }
                Some(Mat::from_fn(span.cols, b.cols, |i, j| {
                    let residues: Vec<Poly> =
                        parts.iter().map(|p| p.at(i, j).clone()).collect();
                    self.crt(&residues)
                }))
            }
        }
    }

    pub fn mat_rank_all_factors(&self, a: &Mat) -> Vec<usize> {
        match self.inner.kind {
            RingKind::Field => vec![crate::matrix::rank(&ElimCtx::Field(&self.inner.field), a)],
            RingKind::PolyLine => vec![crate::matrix::rank_fraction_field(&self.inner.field, a)],
            RingKind::SquarefreeQuotient => self
                .inner
                .factors
                .iter()
                .map(|mi| crate::matrix::rank(&ElimCtx::ModIrreducible(&self.inner.field, mi), a))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Finitely presented modules
// ---------------------------------------------------------------------------

/// A finitely presented module in canonical form: generators with diagonal
/// annihilators (`Poly::zero()` marks a free generator) and the matching
/// diagonal relation matrix. Values are immutable and cheaply shared.
#[derive(Clone, Debug)]
pub struct FpModule {
    inner: std::sync::Arc<FpInner>,
}

#[derive(Debug)]
struct FpInner {
    ring: BaseRing,
    gens: usize,
    rels: Mat,
    anns: Vec<Poly>,
}

impl PartialEq for FpModule {
    fn eq(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.gens == other.inner.gens
                && self.inner.anns == other.inner.anns
                && self.inner.ring == other.inner.ring
                && self.inner.rels == other.inner.rels)
    }
}
impl Eq for FpModule {}

fn module_of(inner: FpInner) -> FpModule {
    FpModule {
        inner: std::sync::Arc::new(inner),
    }
}

impl FpModule {
    pub fn ring(&self) -> &BaseRing {
        &self.inner.ring
    }

    pub fn gens(&self) -> usize {
        self.inner.gens
    }

    pub fn rels(&self) -> &Mat {
        &self.inner.rels
    }

    pub fn annihilators(&self) -> &[Poly] {
        &self.inner.anns
    }

    pub fn is_zero(&self) -> bool {
        self.inner.gens == 0
    }

    pub fn zero(ring: &BaseRing) -> FpModule {
        module_of(FpInner {
            ring: ring.clone(),
            gens: 0,
            rels: Mat::zero(0, 0),
            anns: vec![],
        })
    }

    pub fn free(ring: &BaseRing, n: usize) -> FpModule {
        if ring.is_zero_ring() {
            return FpModule::zero(ring);
        }
        module_of(FpInner {
            ring: ring.clone(),
            gens: n,
            rels: Mat::zero(n, 0),
            anns: vec![Poly::zero(); n],
        })
    }

    /// `R/(ann)` as a module (zero if `ann` is a unit).
    pub fn cyclic(ring: &BaseRing, ann: &Poly) -> FpModule {
        let rels = Mat::from_rows(vec![vec![ring.reduce(ann)]]);
        FpModule::from_presentation(ring, 1, &rels).0
    }

    /// Bring an arbitrary presentation into canonical form. Returns the
    /// module plus the generator-level isomorphisms `to` (raw -> canonical)
    /// and `from` (canonical -> raw).
    pub fn from_presentation(ring: &BaseRing, gens: usize, rels: &Mat) -> (FpModule, Mat, Mat) {
        assert_eq!(rels.rows, gens, "relation matrix must have one row per generator");
        let rels = ring.mat_reduce(rels);
        match ring.kind() {
            RingKind::Field => {
                let ctx = ElimCtx::Field(ring.coefficient_field());
                let (free_rows, to, from) = field_like_normalize(&ctx, gens, &rels);
                let n = free_rows.len();
                (
                    module_of(FpInner {
                        ring: ring.clone(),
                        gens: n,
                        rels: Mat::zero(n, 0),
                        anns: vec![Poly::zero(); n],
                    }),
                    to,
                    from,
                )
            }
            RingKind::PolyLine => normalize_poly_line(ring, gens, &rels),
            RingKind::SquarefreeQuotient => normalize_squarefree(ring, gens, &rels),
        }
    }

    /// Direct sum with tracked injections and projections.
    pub fn direct_sum(parts: &[&FpModule]) -> (FpModule, Vec<ModuleMap>, Vec<ModuleMap>) {
        assert!(!parts.is_empty());
        let ring = parts[0].ring().clone();
        for p in parts {
            assert_eq!(p.ring(), &ring, "direct sum over mixed rings");
        }
        // with at most one nonzero summand the sum is that summand
        if parts.iter().filter(|p| !p.is_zero()).count() <= 1 {
            let live = parts.iter().position(|p| !p.is_zero());
            let sum = live.map_or_else(|| FpModule::zero(&ring), |i| parts[i].clone());
            let injections = parts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if Some(i) == live {
                        ModuleMap::identity(p)
                    } else {
                        ModuleMap::zero_map(p, &sum)
                    }
                })
                .collect();
            let projections = parts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if Some(i) == live {
                        ModuleMap::identity(p)
                    } else {
                        ModuleMap::zero_map(&sum, p)
                    }
                })
                .collect();
            return (sum, injections, projections);
        }
        let gens: usize = parts.iter().map(|p| p.gens()).sum();
        let rel_blocks: Vec<&Mat> = parts.iter().map(|p| p.rels()).collect();
        let rels = Mat::block_diag(&rel_blocks);
        let (sum, to, from) = FpModule::from_presentation(&ring, gens, &rels);
        let mut injections = Vec::new();
        let mut projections = Vec::new();
        let mut offset = 0usize;
        for p in parts {
            let embed = Mat::from_fn(gens, p.gens(), |i, j| {
                if i == offset + j {
                    ring.one_elem()
                } else {
                    Poly::zero()
                }
            });
            let extract = Mat::from_fn(p.gens(), gens, |i, j| {
                if j == offset + i {
                    ring.one_elem()
                } else {
                    Poly::zero()
                }
            });
            let inj = ModuleMap::new_internal((*p).clone(), sum.clone(), ring.mat_mul(&to, &embed));
            let proj =
                ModuleMap::new_internal(sum.clone(), (*p).clone(), ring.mat_mul(&extract, &from));
            injections.push(inj);
            projections.push(proj);
            offset += p.gens();
        }
        (sum, injections, projections)
    }

    /// The submodule generated by the columns of `gens_mat` (coordinates in
    /// this module's generators), with its inclusion.
    pub fn submodule(&self, gens_mat: &Mat) -> (FpModule, ModuleMap) {
        assert_eq!(gens_mat.rows, self.inner.gens);
        let big = gens_mat.hstack(&self.inner.rels);
        let syz = self.inner.ring.mat_kernel(&big);
        let rels_raw = Mat::from_fn(gens_mat.cols, syz.cols, |i, j| syz.at(i, j).clone());
        let (sub, _, from) = FpModule::from_presentation(&self.inner.ring, gens_mat.cols, &rels_raw);
        let incl_mat = self.inner.ring.mat_mul(gens_mat, &from);
        let incl = ModuleMap::new_internal(sub.clone(), self.clone(), incl_mat);
        (sub, incl)
    }

    /// Class in `G_0` of the base.
    pub fn g0_class(&self) -> G0Class {
        match self.inner.ring.kind() {
            RingKind::Field | RingKind::PolyLine => {
                // canonical form: class = number of free generators
                let free = self.inner.anns.iter().filter(|a| a.is_zero()).count();
                G0Class {
                    base: self.inner.ring.clone(),
                    vector: vec![free as i64],
                }
            }
            RingKind::SquarefreeQuotient => {
                let field = self.inner.ring.coefficient_field().clone();
                let vector = self
                    .inner
                    .ring
                    .inner
                    .factors
                    .iter()
                    .map(|mi| {
                        self.inner.anns
                            .iter()
                            .filter(|a| {
                                a.is_zero() || field.p_rem(a, mi).is_zero()
                            })
                            .count() as i64
                    })
                    .collect();
                G0Class {
                    base: self.inner.ring.clone(),
                    vector,
                }
            }
        }
    }

    /// Reinterpret a module killed by `g` as a module over `ring/(g)`.
    /// Errors with `SupportViolation` if some generator is not killed.
    pub fn restrict_to_quotient(&self, target: &BaseRing, g: &Poly) -> Result<FpModule, Error> {
        self.restrict_to_quotient_with(target, g).map(|(m, _, _)| m)
    }

    /// As [`restrict_to_quotient`](Self::restrict_to_quotient), also
    /// returning the generator transforms between this module's generators
    /// and the canonical quotient-ring presentation.
    pub fn restrict_to_quotient_with(
        &self,
        target: &BaseRing,
        g: &Poly,
    ) -> Result<(FpModule, Mat, Mat), Error> {
        for ann in &self.inner.anns {
            let ok = if ann.is_zero() {
                // free generator: only killed if g is zero in the base ring
                self.inner.ring.reduce(g).is_zero()
            } else {
                self.inner.ring.coefficient_field().p_rem(g, ann).is_zero()
            };
            if !ok {
                return Err(Error::SupportViolation(format!(
                    "generator with annihilator {ann} is not killed by {g}"
                )));
            }
        }
        let rels = Mat::from_fn(self.inner.gens, self.inner.rels.cols, |i, j| {
            target.reduce(self.inner.rels.at(i, j))
        });
        Ok(FpModule::from_presentation(target, self.inner.gens, &rels))
    }

    /// Push a module over `ring/(g)` forward to a module over the base,
    /// together with generator transforms (raw generators of the pushforward
    /// correspond one to one with the quotient module's generators).
    pub fn pushforward(&self, base: &BaseRing, g: &Poly) -> (FpModule, Mat, Mat) {
        let extra = Mat::from_fn(self.inner.gens, self.inner.gens, |i, j| {
            if i == j {
                base.reduce(g)
            } else {
                Poly::zero()
            }
        });
        let rels = self.inner.rels.hstack(&extra);
        FpModule::from_presentation(base, self.inner.gens, &rels)
    }
}

/// Field-style normalization over a field-like context; returns the list of
/// surviving (free) rows and the transforms.
fn field_like_normalize(ctx: &ElimCtx, gens: usize, rels: &Mat) -> (Vec<usize>, Mat, Mat) {
    let e = col_echelon(ctx, rels);
    let pivot_rows: Vec<usize> = e.pivots.iter().map(|&(r, _)| r).collect();
    let free_rows: Vec<usize> = (0..gens).filter(|r| !pivot_rows.contains(r)).collect();
    let n = free_rows.len();
    let mut to = Mat::zero(n, gens);
    for (slot, &fr) in free_rows.iter().enumerate() {
        to.set(slot, fr, ctx.field().p_one());
    }
    for &(r, t) in &e.pivots {
        // e_r = -(sum over free rows of H[i][t] e_i); pivot entry is 1
        for (slot, &fr) in free_rows.iter().enumerate() {
            let h = e.h.at(fr, t);
            if !h.is_zero() {
                to.set(slot, r, ctx.neg(h));
            }
        }
    }
    let mut from = Mat::zero(gens, n);
    for (slot, &fr) in free_rows.iter().enumerate() {
        from.set(fr, slot, ctx.field().p_one());
    }
    (free_rows, to, from)
}

fn normalize_poly_line(ring: &BaseRing, gens: usize, rels: &Mat) -> (FpModule, Mat, Mat) {
    let field = ring.coefficient_field();
    let ctx = ElimCtx::PolyLine(field);
    let sm = crate::matrix::smith(&ctx, rels);
    let mut torsion_rows: Vec<usize> = Vec::new();
    let mut unit_rows: Vec<usize> = Vec::new();
    for (i, d) in sm.diag.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        if d.degree() == Some(0) {
            unit_rows.push(i);
        } else {
            torsion_rows.push(i);
        }
    }
    let free_rows: Vec<usize> = (0..gens)
        .filter(|i| !torsion_rows.contains(i) && !unit_rows.contains(i))
        .collect();
    let keep: Vec<usize> = torsion_rows.iter().chain(free_rows.iter()).cloned().collect();
    let n = keep.len();
    let mut anns: Vec<Poly> = torsion_rows.iter().map(|&i| sm.diag[i].clone()).collect();
    anns.extend(vec![Poly::zero(); free_rows.len()]);
    let mut rels_canon = Mat::zero(n, torsion_rows.len());
    for (j, ann) in anns.iter().take(torsion_rows.len()).enumerate() {
        rels_canon.set(j, j, ann.clone());
    }
    let to = sm.s.submatrix_rows(&keep);
    let from = sm.s_inv.submatrix_cols(&keep);
    let anns_ref = anns.clone();
    let module = module_of(FpInner {
        ring: ring.clone(),
        gens: n,
        rels: rels_canon,
        anns,
    });
    // canonicalize the transforms against the annihilators
    let to = canonicalize_matrix(ring, &anns_ref, &to);
    (module, to, from)
}

fn normalize_squarefree(ring: &BaseRing, gens: usize, rels: &Mat) -> (FpModule, Mat, Mat) {
    if ring.is_zero_ring() {
        return (
            FpModule::zero(ring),
            Mat::zero(0, gens),
            Mat::zero(gens, 0),
        );
    }
    let field = ring.coefficient_field().clone();
    let modulus = ring.modulus().unwrap().clone();
    struct FactorData {
        to: Mat,
        from: Mat,
        n: usize,
    }
    let mut per_factor: Vec<FactorData> = Vec::new();
    for mi in &ring.inner.factors {
        let ctx = ElimCtx::ModIrreducible(&field, mi);
        let (free_rows, to, from) = field_like_normalize(&ctx, gens, rels);
        per_factor.push(FactorData {
            to,
            from,
            n: free_rows.len(),
        });
    }
    let g_star = per_factor.iter().map(|f| f.n).max().unwrap_or(0);
    // Canonical generator j is the cyclic module R/(c_j) with c_j the
    // product of the factors where it survives (n_i > j); c_j = m means a
    // free generator and is stored as the zero annihilator.
    let mut anns: Vec<Poly> = Vec::with_capacity(g_star);
    for j in 0..g_star {
        let mut a = field.p_one();
        for (fd, mi) in per_factor.iter().zip(&ring.inner.factors) {
            if fd.n > j {
                a = field.p_mul(&a, mi);
            }
        }
        debug_assert!(a.degree() != Some(0), "generator must survive somewhere");
        if a == modulus {
            anns.push(Poly::zero());
        } else {
            anns.push(a);
        }
    }
    let mut rels_cols: Vec<usize> = Vec::new();
    for (j, a) in anns.iter().enumerate() {
        if !a.is_zero() {
            rels_cols.push(j);
        }
    }
    let mut rels_canon = Mat::zero(g_star, rels_cols.len());
    for (cidx, &j) in rels_cols.iter().enumerate() {
        rels_canon.set(j, cidx, anns[j].clone());
    }
    // transforms via CRT across factors
    let to = Mat::from_fn(g_star, gens, |i, j| {
        let residues: Vec<Poly> = per_factor
            .iter()
            .map(|fd| {
                if i < fd.n {
                    fd.to.at(i, j).clone()
                } else {
                    Poly::zero()
                }
            })
            .collect();
        ring.crt(&residues)
    });
    let from = Mat::from_fn(gens, g_star, |i, j| {
        let residues: Vec<Poly> = per_factor
            .iter()
            .map(|fd| {
                if j < fd.n {
                    fd.from.at(i, j).clone()
                } else {
                    Poly::zero()
                }
            })
            .collect();
        ring.crt(&residues)
    });
    let anns_ref = anns.clone();
    let module = module_of(FpInner {
        ring: ring.clone(),
        gens: g_star,
        rels: rels_canon,
        anns,
    });
    let to = canonicalize_matrix(ring, &anns_ref, &to);
    (module, to, from)
}

/// Reduce each row of a map matrix modulo the row generator's annihilator,
/// on top of the base-ring reduction. For canonical (diagonal) presentations
/// this yields a unique representative per module map.
fn canonicalize_matrix(ring: &BaseRing, target_anns: &[Poly], mat: &Mat) -> Mat {
    // entries over a field or the line with free target rows are already
    // canonical
    if ring.kind() != RingKind::SquarefreeQuotient
        && target_anns.iter().all(|a| a.is_zero())
    {
        return mat.clone();
    }
    Mat::from_fn(mat.rows, mat.cols, |i, j| {
        let v = ring.reduce(mat.at(i, j));
        let ann = &target_anns[i];
        if ann.is_zero() || v.is_zero() {
            v
        } else {
            ring.coefficient_field().p_rem(&v, ann)
        }
    })
}

// ---------------------------------------------------------------------------
// Module maps
// ---------------------------------------------------------------------------

/// A map of finitely presented modules, stored as a canonical
/// (annihilator-reduced) matrix on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    source: FpModule,
    target: FpModule,
    mat: Mat,
}

impl ModuleMap {
    /// Construct and verify well-definedness.
    pub fn new(source: FpModule, target: FpModule, mat: Mat) -> Result<ModuleMap, Error> {
        assert_eq!(source.ring(), target.ring(), "map across different rings");
        if mat.rows != target.gens() || mat.cols != source.gens() {
            return Err(Error::IllFormedMap(format!(
                "matrix is {}x{}, expected {}x{}",
                mat.rows, mat.cols, target.gens(), source.gens()
            )));
        }
        let m = ModuleMap {
            mat: canonicalize_matrix(&source.ring(), &target.annihilators(), &mat),
            source,
            target,
        };
        if !m.respects_relations() {
            return Err(Error::IllFormedMap(
                "matrix does not carry source relations into target relations".into(),
            ));
        }
        Ok(m)
    }

    /// For internally constructed maps that are well defined by construction.
    fn new_internal(source: FpModule, target: FpModule, mat: Mat) -> ModuleMap {
        let m = ModuleMap {
            mat: canonicalize_matrix(&source.ring(), &target.annihilators(), &mat),
            source,
            target,
        };
        debug_assert!(m.respects_relations(), "internal map is ill-formed");
        m
    }

    fn respects_relations(&self) -> bool {
        let ring = &self.source.ring();
        let image = ring.mat_mul(&self.mat, &self.source.rels());
        for j in 0..image.cols {
            for i in 0..image.rows {
                let v = image.at(i, j);
                let ann = &self.target.annihilators()[i];
                let ok = if ann.is_zero() {
                    v.is_zero()
                } else {
                    ring.coefficient_field().p_rem(v, ann).is_zero()
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn source(&self) -> &FpModule {
        &self.source
    }

    pub fn target(&self) -> &FpModule {
        &self.target
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn ring(&self) -> &BaseRing {
        &self.source.ring()
    }

    pub fn identity(m: &FpModule) -> ModuleMap {
        ModuleMap::new_internal(m.clone(), m.clone(), Mat::identity(m.gens(), m.ring().coefficient_field()))
    }

    pub fn zero_map(source: &FpModule, target: &FpModule) -> ModuleMap {
        ModuleMap::new_internal(
            source.clone(),
            target.clone(),
            Mat::zero(target.gens(), source.gens()),
        )
    }

    /// Multiplication by a ring element as an endomorphism.
    pub fn mult_by(m: &FpModule, c: &Poly) -> ModuleMap {
        let mat = Mat::from_fn(m.gens(), m.gens(), |i, j| {
            if i == j {
                m.ring().reduce(c)
            } else {
                Poly::zero()
            }
        });
        ModuleMap::new_internal(m.clone(), m.clone(), mat)
    }

    pub fn compose(after: &ModuleMap, first: &ModuleMap) -> ModuleMap {
        assert_eq!(
            first.target, after.source,
            "composition with mismatched middle module"
        );
        ModuleMap::new_internal(
            first.source.clone(),
            after.target.clone(),
            first.ring().mat_mul(&after.mat, &first.mat),
        )
    }

    pub fn add(&self, other: &ModuleMap) -> ModuleMap {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        ModuleMap::new_internal(
            self.source.clone(),
            self.target.clone(),
            self.ring().mat_add(&self.mat, &other.mat),
        )
    }

    pub fn sub(&self, other: &ModuleMap) -> ModuleMap {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        ModuleMap::new_internal(
            self.source.clone(),
            self.target.clone(),
            self.ring().mat_sub(&self.mat, &other.mat),
        )
    }

    pub fn is_zero_map(&self) -> bool {
        self.mat.is_zero_mat()
    }

    /// Kernel with its inclusion.
    pub fn kernel(&self) -> (FpModule, ModuleMap) {
        if self.mat.is_zero_mat() {
            return (self.source.clone(), ModuleMap::identity(&self.source));
        }
        let ring = self.ring().clone();
        let big = self.mat.hstack(&self.target.rels());
        let syz = ring.mat_kernel(&big);
        let u = Mat::from_fn(self.source.gens(), syz.cols, |i, j| syz.at(i, j).clone());
        self.source.submodule(&u)
    }

    /// Cokernel with its projection.
    pub fn cokernel(&self) -> (FpModule, ModuleMap) {
        if self.mat.is_zero_mat() {
            return (self.target.clone(), ModuleMap::identity(&self.target));
        }
        let ring = self.ring().clone();
        let rels = self.target.rels().hstack(&self.mat);
        let (coker, to, _) = FpModule::from_presentation(&ring, self.target.gens(), &rels);
        let proj = ModuleMap::new_internal(self.target.clone(), coker.clone(), to);
        (coker, proj)
    }

    /// The image as a submodule of the target, with inclusion.
    pub fn image(&self) -> (FpModule, ModuleMap) {
        self.target.submodule(&self.mat)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().0.is_zero()
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel().0.is_zero()
    }

    pub fn is_iso(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Two-sided inverse, or `NotInvertible`.
    pub fn inverse(&self) -> Result<ModuleMap, Error> {
        let ring = self.ring().clone();
        let span = self.mat.hstack(&self.target.rels());
        let targets = Mat::identity(self.target.gens(), ring.coefficient_field());
        let sol = ring
            .mat_solve_in_span(&span, &targets)
            .ok_or_else(|| Error::NotInvertible("map is not surjective".into()))?;
        let inv_mat = Mat::from_fn(self.source.gens(), self.target.gens(), |i, j| {
            sol.at(i, j).clone()
        });
        let inv = ModuleMap::new(self.target.clone(), self.source.clone(), inv_mat)
            .map_err(|_| Error::NotInvertible("no well-defined inverse".into()))?;
        let back = ModuleMap::compose(&inv, self);
        if back != ModuleMap::identity(&self.source) {
            return Err(Error::NotInvertible("map is not injective".into()));
        }
        debug_assert_eq!(ModuleMap::compose(self, &inv), ModuleMap::identity(&self.target));
        Ok(inv)
    }

    /// Factor this map through a mono `incl` into the same target:
    /// find `g` with `incl . g = self`.
    pub fn factor_through(&self, incl: &ModuleMap) -> Option<ModuleMap> {
        assert_eq!(self.target, incl.target);
        let ring = self.ring().clone();
        let span = incl.mat.hstack(&self.target.rels());
        let sol = ring.mat_solve_in_span(&span, &self.mat)?;
        let g_mat = Mat::from_fn(incl.source.gens(), self.source.gens(), |i, j| {
            sol.at(i, j).clone()
        });
        ModuleMap::new(self.source.clone(), incl.source.clone(), g_mat).ok()
    }

    /// Descend this map along an epi `proj` out of the same source:
    /// find `g` with `g . proj = self` (requires `self` to kill `ker proj`).
    pub fn descend_along(&self, proj: &ModuleMap) -> Option<ModuleMap> {
        assert_eq!(self.source, proj.source);
        let ring = self.ring().clone();
        // preimages of the quotient generators
        let span = proj.mat.hstack(&proj.target.rels());
        let targets = Mat::identity(proj.target.gens(), ring.coefficient_field());
        let wit = ring.mat_solve_in_span(&span, &targets)?;
        let pre = Mat::from_fn(proj.source.gens(), proj.target.gens(), |i, j| {
            wit.at(i, j).clone()
        });
        let g_mat = ring.mat_mul(&self.mat, &pre);
        let g = ModuleMap::new(proj.target.clone(), self.target.clone(), g_mat).ok()?;
        // soundness: g . proj must equal self
        if ModuleMap::compose(&g, proj) == *self {
            Some(g)
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// G0 classes and devissage
// ---------------------------------------------------------------------------

/// An element of `G_0(base)`, represented on the canonical basis: dimension
/// for a field, generic rank for the line, per-factor residue dimensions for
/// a squarefree quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G0Class {
    base: BaseRing,
    vector: Vec<i64>,
}

impl G0Class {
    pub fn zero(base: &BaseRing) -> G0Class {
        G0Class {
            base: base.clone(),
            vector: vec![0; base.g0_rank()],
        }
    }

    pub fn from_vector(base: &BaseRing, vector: Vec<i64>) -> G0Class {
        assert_eq!(vector.len(), base.g0_rank());
        G0Class {
            base: base.clone(),
            vector,
        }
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn vector(&self) -> &[i64] {
        &self.vector
    }

    pub fn add(&self, other: &G0Class) -> G0Class {
        assert_eq!(self.base, other.base);
        G0Class {
            base: self.base.clone(),
            vector: self
                .vector
                .iter()
                .zip(&other.vector)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &G0Class) -> G0Class {
        assert_eq!(self.base, other.base);
        G0Class {
            base: self.base.clone(),
            vector: self
                .vector
                .iter()
                .zip(&other.vector)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, c: i64) -> G0Class {
        G0Class {
            base: self.base.clone(),
            vector: self.vector.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|&a| a == 0)
    }
}

/// Class of a `k[x]`-module supported on the zero locus of a squarefree
/// section `s`, computed through the `s`-adic filtration. The result lives in
/// `G_0(k[x]/(s))`.
pub fn devissage_class(m: &FpModule, s: &Poly) -> Result<G0Class, Error> {
    assert_eq!(
        m.ring().kind(),
        RingKind::PolyLine,
        "devissage is defined for modules over the polynomial line"
    );
    let field = m.ring().coefficient_field().clone();
    if s.is_zero() || !field.p_is_squarefree(s) {
        return Err(Error::NotSquarefree(format!("{s}")));
    }
    let target = BaseRing::squarefree_quotient(field.clone(), s)?;
    let mut total = G0Class::zero(&target);
    let g = m.gens();
    if g == 0 {
        return Ok(total);
    }
    let deg_bound = m
        .annihilators()
        .iter()
        .chain(std::iter::once(s))
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0)
        .max(1);
    let cap = g * deg_bound + 1;
    let ring = m.ring().clone();
    let pow = |j: usize| -> Mat {
        let mut sj = field.p_one();
        for _ in 0..j {
            sj = field.p_mul(&sj, s);
        }
        Mat::from_fn(g, g, |i, jj| if i == jj { sj.clone() } else { Poly::zero() })
    };
    let mut j = 0usize;
    loop {
        let uj = pow(j);
        let uj1 = pow(j + 1);
        // S_j = 0 ?
        if ring.mat_solve_in_span(&m.rels().clone(), &uj).is_some() {
            break;
        }
        // stabilization: S_j = S_{j+1} (nonzero) means s never kills M
        let span_next = uj1.hstack(m.rels());
        if ring.mat_solve_in_span(&span_next, &uj).is_some() {
            return Err(Error::NotSupportedOnDivisor);
        }
        if j >= cap {
            return Err(Error::NotSupportedOnDivisor);
        }
        // piece S_j / S_{j+1}: generators s^j e_k, relations {v : U_j v in
        // span(U_{j+1}, rels)}
        let big = uj.hstack(&span_next);
        let syz = ring.mat_kernel(&big);
        let piece_rels = Mat::from_fn(g, syz.cols, |i, c| target.reduce(syz.at(i, c)));
        let piece = FpModule::from_presentation(&target, g, &piece_rels).0;
        total = total.add(&piece.g0_class());
        j += 1;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Q
    }

    #[test]
    fn canonical_field_module() {
        let ring = BaseRing::field(q());
        // k^3 / span{(1,1,0)} has dimension 2
        let rels = Mat::from_rows(vec![
            vec![q().p_one()],
            vec![q().p_one()],
            vec![Poly::zero()],
        ]);
        let (m, to, from) = FpModule::from_presentation(&ring, 3, &rels);
        assert_eq!(m.gens(), 2);
        assert_eq!(ring.mat_mul(&to, &from), Mat::identity(2, &q()));
    }

    #[test]
    fn kernel_of_mult_x_is_zero() {
        let ring = BaseRing::poly_line(q());
        let r = FpModule::free(&ring, 1);
        let f = ModuleMap::mult_by(&r, &q().p_x());
        let (k, _) = f.kernel();
        assert!(k.is_zero());
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let ring = BaseRing::poly_line(q());
        let r = FpModule::free(&ring, 1);
        let f = ModuleMap::zero_map(&r, &r);
        let (k, incl) = f.kernel();
        assert_eq!(k, r);
        assert!(incl.is_injective());
    }

    #[test]
    fn kernel_over_squarefree_quotient() {
        // mult by (x-1) on Q[x]/(x^2-1): kernel is the (x-1)-residue line
        let field = q();
        let m = field.p_from_coeffs(&[-1, 0, 1]);
        let ring = BaseRing::squarefree_quotient(field.clone(), &m).unwrap();
        let r = FpModule::free(&ring, 1);
        let f = ModuleMap::mult_by(&r, &field.p_from_coeffs(&[-1, 1]));
        let (k, _) = f.kernel();
        let expected = FpModule::cyclic(&ring, &field.p_from_coeffs(&[-1, 1]));
        assert_eq!(k, expected);
        assert_eq!(k.g0_class().vector(), &[1, 0]);
    }

    #[test]
    fn cokernel_examples() {
        let field = q();
        let ring = BaseRing::poly_line(field.clone());
        let r = FpModule::free(&ring, 1);
        // mult by x: cokernel k[x]/(x)
        let f = ModuleMap::mult_by(&r, &field.p_x());
        let (c, proj) = f.cokernel();
        assert_eq!(c, FpModule::cyclic(&ring, &field.p_x()));
        assert!(proj.is_surjective());
        // identity: cokernel 0
        let (c2, _) = ModuleMap::identity(&r).cokernel();
        assert!(c2.is_zero());
        // Bezout: (a,b) -> a x + b (x-1) is onto
        let r2 = FpModule::free(&ring, 2);
        let mat = Mat::from_rows(vec![vec![
            field.p_x(),
            field.p_from_coeffs(&[-1, 1]),
        ]]);
        let f3 = ModuleMap::new(r2, r, mat).unwrap();
        assert!(f3.cokernel().0.is_zero());
    }

    #[test]
    fn g0_examples() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        assert_eq!(FpModule::free(&line, 1).g0_class().vector(), &[1]);
        assert_eq!(
            FpModule::cyclic(&line, &field.p_x()).g0_class().vector(),
            &[0]
        );
        let m = field.p_from_coeffs(&[-1, 0, 1]);
        let ring = BaseRing::squarefree_quotient(field, &m).unwrap();
        assert_eq!(FpModule::free(&ring, 1).g0_class().vector(), &[1, 1]);
    }

    #[test]
    fn devissage_examples() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        let x = field.p_x();
        let skyscraper = FpModule::cyclic(&line, &x);
        assert_eq!(devissage_class(&skyscraper, &x).unwrap().vector(), &[1]);
        let double = FpModule::cyclic(&line, &field.p_from_coeffs(&[0, 0, 1]));
        assert_eq!(devissage_class(&double, &x).unwrap().vector(), &[2]);
        let free = FpModule::free(&line, 1);
        assert_eq!(
            devissage_class(&free, &x),
            Err(Error::NotSupportedOnDivisor)
        );
        // a module supported away from div(s) errors
        let off = FpModule::cyclic(&line, &field.p_from_coeffs(&[-1, 1]));
        assert_eq!(devissage_class(&off, &x), Err(Error::NotSupportedOnDivisor));
    }

    #[test]
    fn exactness_of_kernel_cokernel() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        // f: R^2 -> R/(x^2), (a, b) -> a x + b x
        let src = FpModule::free(&line, 2);
        let tgt = FpModule::cyclic(&line, &field.p_from_coeffs(&[0, 0, 1]));
        let mat = Mat::from_rows(vec![vec![field.p_x(), field.p_x()]]);
        let f = ModuleMap::new(src.clone(), tgt.clone(), mat).unwrap();
        let (k, incl) = f.kernel();
        let (c, proj) = f.cokernel();
        assert!(ModuleMap::compose(&f, &incl).is_zero_map());
        assert!(ModuleMap::compose(&proj, &f).is_zero_map());
        assert!(incl.is_injective());
        assert!(proj.is_surjective());
        // image = kernel(proj)
        let (im, im_incl) = f.image();
        let (kp, kp_incl) = proj.kernel();
        assert_eq!(im, kp);
        // mutual containment of the two submodules
        assert!(im_incl.factor_through(&kp_incl).is_some());
        assert!(kp_incl.factor_through(&im_incl).is_some());
        let _ = (k, c);
    }

    #[test]
    fn inverse_roundtrip() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        let m = FpModule::cyclic(&line, &field.p_from_coeffs(&[0, 0, 1])); // R/(x^2)
        let f = ModuleMap::mult_by(&m, &field.p_from_coeffs(&[1, 1])); // 1+x is a unit on R/(x^2)
        let inv = f.inverse().unwrap();
        assert_eq!(ModuleMap::compose(&inv, &f), ModuleMap::identity(&m));
        let g = ModuleMap::mult_by(&m, &field.p_x());
        assert!(g.inverse().is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        let rels = Mat::from_rows(vec![
            vec![field.p_x(), field.p_from_coeffs(&[0, 1, 1])],
            vec![field.p_x(), field.p_x()],
        ]);
        let (m, _, _) = FpModule::from_presentation(&line, 2, &rels);
        let (m2, to, from) = FpModule::from_presentation(&line, m.gens(), m.rels());
        assert_eq!(m, m2);
        assert_eq!(to, Mat::identity(m.gens(), &field));
        assert_eq!(from, Mat::identity(m.gens(), &field));
    }

    #[test]
    fn direct_sum_transforms() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        let a = FpModule::cyclic(&line, &field.p_x());
        let b = FpModule::free(&line, 1);
        let (s, inj, proj) = FpModule::direct_sum(&[&a, &b]);
        assert_eq!(s.gens(), 2);
        for i in 0..2 {
            let round = ModuleMap::compose(&proj[i], &inj[i]);
            assert_eq!(round, ModuleMap::identity(if i == 0 { &a } else { &b }));
        }
        assert!(ModuleMap::compose(&proj[1], &inj[0]).is_zero_map());
    }

    #[test]
    fn zero_ring_modules_vanish() {
        let field = q();
        let zero_ring = BaseRing::squarefree_quotient(field.clone(), &field.p_one()).unwrap();
        assert!(zero_ring.is_zero_ring());
        assert!(FpModule::free(&zero_ring, 3).is_zero());
        assert_eq!(zero_ring.g0_rank(), 0);
    }

    #[test]
    fn pushforward_and_restrict() {
        let field = q();
        let line = BaseRing::poly_line(field.clone());
        let x = field.p_x();
        let quot = BaseRing::squarefree_quotient(field.clone(), &x).unwrap();
        let m = FpModule::free(&quot, 2);
        let (pushed, _, _) = m.pushforward(&line, &x);
        assert_eq!(pushed.g0_class().vector(), &[0]);
        let back = pushed.restrict_to_quotient(&quot, &x).unwrap();
        assert_eq!(back, m);
        let bad = FpModule::free(&line, 1).restrict_to_quotient(&quot, &x);
        assert!(bad.is_err());
    }
}
