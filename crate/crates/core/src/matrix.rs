//! Dense matrices with polynomial entries and the elimination algorithms
//! (Hermite column form, kernels, membership solving, Smith form) used by the
//! module layer.
//!
//! All elimination happens over one of three Euclidean contexts: a coefficient
//! field, the polynomial line `k[x]`, or a residue field `k[x]/(m)` with `m`
//! irreducible. Squarefree quotient rings never enter elimination directly;
//! they are handled factorwise by the ring layer.

use crate::poly::Poly;
use crate::scalar::FieldSpec;

/// Row-major dense matrix over `k[x]` (entries may be constants).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<Poly>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            a: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, field: &FieldSpec) -> Mat {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = field.p_one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
        }
        Mat {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Mat {
        let mut a = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                a.push(f(i, j));
            }
        }
        Mat { rows, cols, a }
    }

    pub fn at(&self, i: usize, j: usize) -> &Poly {
        &self.a[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Poly {
        &mut self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Poly) {
        self.a[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_zero_mat(&self) -> bool {
        self.a.iter().all(|p| p.is_zero())
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        Mat::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.at(i, j).clone()
            } else {
                other.at(i - self.rows, j).clone()
            }
        })
    }

    pub fn block_diag(blocks: &[&Mat]) -> Mat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Mat::zero(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(ro + i, co + j, b.at(i, j).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    pub fn submatrix_rows(&self, keep: &[usize]) -> Mat {
        Mat::from_fn(keep.len(), self.cols, |i, j| self.at(keep[i], j).clone())
    }

    pub fn submatrix_cols(&self, keep: &[usize]) -> Mat {
        Mat::from_fn(self.rows, keep.len(), |i, j| self.at(i, keep[j]).clone())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }
}

/// Euclidean context for elimination.
#[derive(Clone, Copy, Debug)]
pub enum ElimCtx<'a> {
    /// The coefficient field itself; all entries are constants.
    Field(&'a FieldSpec),
    /// The polynomial ring `k[x]`.
    PolyLine(&'a FieldSpec),
    /// The residue field `k[x]/(m)`, `m` monic irreducible.
    ModIrreducible(&'a FieldSpec, &'a Poly),
}

impl<'a> ElimCtx<'a> {
    pub fn field(&self) -> &'a FieldSpec {
        match self {
            ElimCtx::Field(f) | ElimCtx::PolyLine(f) | ElimCtx::ModIrreducible(f, _) => f,
        }
    }

    pub fn reduce(&self, a: &Poly) -> Poly {
        match self {
            ElimCtx::Field(_) | ElimCtx::PolyLine(_) => a.clone(),
            ElimCtx::ModIrreducible(f, m) => f.p_rem(a, m),
        }
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.field().p_add(a, b))
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.field().p_sub(a, b))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&self.field().p_mul(a, b))
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        self.field().p_neg(a)
    }

    pub fn is_zero(&self, a: &Poly) -> bool {
        a.is_zero()
    }

    /// Euclidean size; `None` for zero.
    pub fn norm(&self, a: &Poly) -> Option<usize> {
        if a.is_zero() {
            None
        } else {
            match self {
                ElimCtx::PolyLine(_) => a.degree(),
                _ => Some(0),
            }
        }
    }

    pub fn is_unit(&self, a: &Poly) -> bool {
        match self {
            ElimCtx::Field(_) | ElimCtx::ModIrreducible(..) => !a.is_zero(),
            ElimCtx::PolyLine(_) => a.degree() == Some(0),
        }
    }

    pub fn inv(&self, a: &Poly) -> Poly {
        match self {
            ElimCtx::Field(f) => {
                assert_eq!(a.degree(), Some(0));
                Poly {
                    coeffs: vec![f.inv(&a.coeffs[0])],
                }
            }
            ElimCtx::PolyLine(f) => {
                assert_eq!(a.degree(), Some(0), "non-unit inverse in k[x]");
                Poly {
                    coeffs: vec![f.inv(&a.coeffs[0])],
                }
            }
            ElimCtx::ModIrreducible(f, m) => f
                .p_inv_mod(a, m)
                .expect("nonzero element of k[x]/(m) must be invertible"),
        }
    }

    /// `a = q*b + r`; in field-like contexts the remainder is zero.
    pub fn divmod(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        match self {
            ElimCtx::Field(_) | ElimCtx::ModIrreducible(..) => {
                (self.mul(a, &self.inv(b)), Poly::zero())
            }
            ElimCtx::PolyLine(f) => f.p_divmod(a, b),
        }
    }

    /// Unit `u` such that `u*a` is canonical (monic / one).
    pub fn canonizing_unit(&self, a: &Poly) -> Poly {
        assert!(!a.is_zero());
        match self {
            ElimCtx::PolyLine(f) => Poly {
                coeffs: vec![f.inv(a.leading().unwrap())],
            },
            _ => self.inv(a),
        }
    }
}

/// Result of column Hermite reduction: `h = a * v` with `v` invertible.
pub struct Echelon {
    pub h: Mat,
    pub v: Mat,
    /// `(row, col)` of each pivot, rows strictly increasing.
    pub pivots: Vec<(usize, usize)>,
}

fn col_axpy(ctx: &ElimCtx, m: &mut Mat, dst: usize, src: usize, q: &Poly) {
    // col_dst -= q * col_src
    for i in 0..m.rows {
        let t = ctx.mul(q, m.at(i, src));
        let v = ctx.sub(m.at(i, dst), &t);
        m.set(i, dst, v);
    }
}

fn col_swap(m: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows {
        let x = m.at(i, a).clone();
        let y = m.at(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

fn col_scale(ctx: &ElimCtx, m: &mut Mat, j: usize, u: &Poly) {
    for i in 0..m.rows {
        let v = ctx.mul(m.at(i, j), u);
        m.set(i, j, v);
    }
}

/// Canonical column Hermite form with transform.
pub fn col_echelon(ctx: &ElimCtx, a: &Mat) -> Echelon {
    let mut h = Mat::from_fn(a.rows, a.cols, |i, j| ctx.reduce(a.at(i, j)));
    let mut v = Mat::identity(a.cols, ctx.field());
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0usize;
    for r in 0..h.rows {
        if next >= h.cols {
            break;
        }
        // Euclidean sweep on row r among active columns.
        loop {
            let mut best: Option<(usize, usize)> = None;
            let mut live = 0;
            for j in next..h.cols {
                if let Some(n) = ctx.norm(h.at(r, j)) {
                    live += 1;
                    if best.map_or(true, |(_, bn)| n < bn) {
                        best = Some((j, n));
                    }
                }
            }
            let Some((jp, _)) = best else { break };
            if live == 1 {
                col_swap(&mut h, next, jp);
                col_swap(&mut v, next, jp);
                break;
            }
            for j in next..h.cols {
                if j == jp || h.at(r, j).is_zero() {
                    continue;
                }
                let (q, _) = ctx.divmod(h.at(r, j), h.at(r, jp));
                if !q.is_zero() {
                    col_axpy(ctx, &mut h, j, jp, &q);
                    col_axpy(ctx, &mut v, j, jp, &q);
                }
            }
        }
        if h.at(r, next).is_zero() {
            continue;
        }
        let u = ctx.canonizing_unit(h.at(r, next));
        if u != ctx.field().p_one() {
            col_scale(ctx, &mut h, next, &u);
            col_scale(ctx, &mut v, next, &u);
        }
        // reduce this row in earlier pivot columns
        for j in 0..next {
            if h.at(r, j).is_zero() {
                continue;
            }
            let (q, _) = ctx.divmod(h.at(r, j), h.at(r, next));
            if !q.is_zero() {
                col_axpy(ctx, &mut h, j, next, &q);
                col_axpy(ctx, &mut v, j, next, &q);
            }
        }
        pivots.push((r, next));
        next += 1;
    }
    Echelon { h, v, pivots }
}

pub fn rank(ctx: &ElimCtx, a: &Mat) -> usize {
    col_echelon(ctx, a).pivots.len()
}

/// Basis of `{ x : a*x = 0 }`, as the columns of the returned matrix.
pub fn kernel_cols(ctx: &ElimCtx, a: &Mat) -> Mat {
    let e = col_echelon(ctx, a);
    let pivot_cols: Vec<usize> = e.pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..a.cols).filter(|j| !pivot_cols.contains(j)).collect();
    e.v.submatrix_cols(&free)
}

/// Solve `span * x = b` column by column; `None` if any column of `b` is not
/// in the column span.
pub fn solve_in_span(ctx: &ElimCtx, span: &Mat, b: &Mat) -> Option<Mat> {
    assert_eq!(span.rows, b.rows);
    let e = col_echelon(ctx, span);
    let mut x = Mat::zero(span.cols, b.cols);
    for c in 0..b.cols {
        let mut resid: Vec<Poly> = (0..b.rows).map(|i| ctx.reduce(b.at(i, c))).collect();
        let mut y = vec![Poly::zero(); span.cols];
        for &(r, t) in &e.pivots {
            if resid[r].is_zero() {
                continue;
            }
            let (q, _) = ctx.divmod(&resid[r], e.h.at(r, t));
            if !q.is_zero() {
                for i in 0..span.rows {
                    let s = ctx.mul(&q, e.h.at(i, t));
                    resid[i] = ctx.sub(&resid[i], &s);
                }
                y[t] = q;
            }
            if !resid[r].is_zero() {
                return None;
            }
        }
        if resid.iter().any(|p| !p.is_zero()) {
            return None;
        }
        // x_col = v * y
        for i in 0..span.cols {
            let mut acc = Poly::zero();
            for (t, yt) in y.iter().enumerate() {
                if !yt.is_zero() {
                    acc = ctx.add(&acc, &ctx.mul(e.v.at(i, t), yt));
                }
            }
            x.set(i, c, acc);
        }
    }
    Some(x)
}

pub fn mat_mul(ctx: &ElimCtx, a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.cols, b.rows, "dimension mismatch in matrix product");
    Mat::from_fn(a.rows, b.cols, |i, j| {
        let mut acc = Poly::zero();
        for k in 0..a.cols {
            if a.at(i, k).is_zero() || b.at(k, j).is_zero() {
                continue;
            }
            acc = ctx.add(&acc, &ctx.mul(a.at(i, k), b.at(k, j)));
        }
        acc
    })
}

pub fn mat_add(ctx: &ElimCtx, a: &Mat, b: &Mat) -> Mat {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |i, j| ctx.add(a.at(i, j), b.at(i, j)))
}

pub fn mat_sub(ctx: &ElimCtx, a: &Mat, b: &Mat) -> Mat {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |i, j| ctx.sub(a.at(i, j), b.at(i, j)))
}

pub fn mat_scale(ctx: &ElimCtx, a: &Mat, c: &Poly) -> Mat {
    Mat::from_fn(a.rows, a.cols, |i, j| ctx.mul(a.at(i, j), c))
}

/// Smith normal form data: `s * a * t = diag(d)` for an untracked `t`.
pub struct Smith {
    pub diag: Vec<Poly>,
    pub s: Mat,
    pub s_inv: Mat,
}

struct RowOps {
    s: Mat,
    s_inv: Mat,
}

impl RowOps {
    fn swap(&mut self, a: &mut Mat, i: usize, j: usize) {
        if i == j {
            return;
        }
        for m in [a, &mut self.s] {
            for c in 0..m.cols {
                let x = m.at(i, c).clone();
                let y = m.at(j, c).clone();
                m.set(i, c, y);
                m.set(j, c, x);
            }
        }
        col_swap(&mut self.s_inv, i, j);
    }

    /// row_i -= q * row_j
    fn axpy(&mut self, ctx: &ElimCtx, a: &mut Mat, i: usize, j: usize, q: &Poly) {
        for m in [a, &mut self.s] {
            for c in 0..m.cols {
                let t = ctx.mul(q, m.at(j, c));
                let v = ctx.sub(m.at(i, c), &t);
                m.set(i, c, v);
            }
        }
        // s_inv: col_j += q * col_i
        for r in 0..self.s_inv.rows {
            let t = ctx.mul(q, self.s_inv.at(r, i));
            let v = ctx.add(self.s_inv.at(r, j), &t);
            self.s_inv.set(r, j, v);
        }
    }

    fn scale(&mut self, ctx: &ElimCtx, a: &mut Mat, i: usize, u: &Poly) {
        for m in [a, &mut self.s] {
            for c in 0..m.cols {
                let v = ctx.mul(m.at(i, c), u);
                m.set(i, c, v);
            }
        }
        let ui = ctx.inv(u);
        for r in 0..self.s_inv.rows {
            let v = ctx.mul(self.s_inv.at(r, i), &ui);
            self.s_inv.set(r, i, v);
        }
    }
}

/// Smith normal form over a Euclidean context, tracking the row transform and
/// its inverse. Diagonal entries are canonical (monic) and form a
/// divisibility chain.
pub fn smith(ctx: &ElimCtx, a0: &Mat) -> Smith {
    let mut a = Mat::from_fn(a0.rows, a0.cols, |i, j| ctx.reduce(a0.at(i, j)));
    let mut ops = RowOps {
        s: Mat::identity(a.rows, ctx.field()),
        s_inv: Mat::identity(a.rows, ctx.field()),
    };
    let n = a.rows.min(a.cols);
    let mut k = 0usize;
    while k < n {
        // locate minimal-norm nonzero entry in the trailing submatrix
        let mut best: Option<(usize, usize, usize)> = None;
        for i in k..a.rows {
            for j in k..a.cols {
                if let Some(nm) = ctx.norm(a.at(i, j)) {
                    if best.map_or(true, |(_, _, bn)| nm < bn) {
                        best = Some((i, j, nm));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        ops.swap(&mut a, k, pi);
        col_swap(&mut a, k, pj);
        loop {
            let mut dirty = false;
            // clear column k below the pivot
            for i in k + 1..a.rows {
                if a.at(i, k).is_zero() {
                    continue;
                }
                let (q, r) = ctx.divmod(a.at(i, k), a.at(k, k));
                if !q.is_zero() {
                    ops.axpy(ctx, &mut a, i, k, &q);
                }
                if !r.is_zero() {
                    ops.swap(&mut a, k, i);
                    dirty = true;
                }
            }
            // clear row k right of the pivot
            for j in k + 1..a.cols {
                if a.at(k, j).is_zero() {
                    continue;
                }
                let (q, r) = ctx.divmod(a.at(k, j), a.at(k, k));
                if !q.is_zero() {
                    let qn = q.clone();
                    for i in 0..a.rows {
                        let t = ctx.mul(&qn, a.at(i, k));
                        let v = ctx.sub(a.at(i, j), &t);
                        a.set(i, j, v);
                    }
                }
                if !r.is_zero() {
                    col_swap(&mut a, k, j);
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        // enforce divisibility into the trailing block
        let mut fixed = true;
        'scan: for i in k + 1..a.rows {
            for j in k + 1..a.cols {
                if !a.at(i, j).is_zero() {
                    let (_, r) = ctx.divmod(a.at(i, j), a.at(k, k));
                    if !r.is_zero() {
                        // fold row i into row k and redo this pivot
                        let minus_one = Poly {
                            coeffs: vec![ctx.field().neg(&ctx.field().one())],
                        };
                        ops.axpy(ctx, &mut a, k, i, &minus_one);
                        fixed = false;
                        break 'scan;
                    }
                }
            }
        }
        if fixed {
            let u = ctx.canonizing_unit(a.at(k, k));
            ops.scale(ctx, &mut a, k, &u);
            k += 1;
        }
    }
    let diag = (0..n).map(|i| a.at(i, i).clone()).collect();
    Smith {
        diag,
        s: ops.s,
        s_inv: ops.s_inv,
    }
}

/// Rank over the fraction field `k(x)` by fraction-free (Bareiss)
/// elimination; for constant matrices this agrees with the field rank.
pub fn rank_fraction_field(field: &FieldSpec, a0: &Mat) -> usize {
    let mut a = a0.clone();
    let mut prev = field.p_one();
    let mut rk = 0usize;
    let (rows, cols) = (a.rows, a.cols);
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let pivot_row = (row..rows).find(|&i| !a.at(i, col).is_zero());
        let Some(pr) = pivot_row else { continue };
        if pr != row {
            for c in 0..cols {
                let x = a.at(row, c).clone();
                let y = a.at(pr, c).clone();
                a.set(row, c, y);
                a.set(pr, c, x);
            }
        }
        let pivot = a.at(row, col).clone();
        for i in row + 1..rows {
            for j in col + 1..cols {
                let t1 = field.p_mul(&pivot, a.at(i, j));
                let t2 = field.p_mul(a.at(i, col), a.at(row, j));
                let num = field.p_sub(&t1, &t2);
                let (q, r) = if prev.degree() == Some(0) {
                    (
                        field.p_mul_scalar(&num, &field.inv(&prev.coeffs[0])),
                        Poly::zero(),
                    )
                } else {
                    field.p_divmod(&num, &prev)
                };
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a.set(i, j, q);
            }
            a.set(i, col, Poly::zero());
        }
        prev = pivot;
        rk += 1;
        row += 1;
    }
    rk
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Q
    }

    fn pmat(field: &FieldSpec, rows: &[&[&[i64]]]) -> Mat {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|c| field.p_from_coeffs(c)).collect())
                .collect(),
        )
    }

    #[test]
    fn echelon_transform_consistent() {
        let f = q();
        let ctx = ElimCtx::PolyLine(&f);
        let a = pmat(&f, &[&[&[0, 1], &[-1, 1]], &[&[1], &[0]]]);
        let e = col_echelon(&ctx, &a);
        assert_eq!(mat_mul(&ctx, &a, &e.v), e.h);
    }

    #[test]
    fn kernel_of_bezout_row() {
        // [x, x-1] has kernel generated by (x-1, -x)
        let f = q();
        let ctx = ElimCtx::PolyLine(&f);
        let a = pmat(&f, &[&[&[0, 1], &[-1, 1]]]);
        let k = kernel_cols(&ctx, &a);
        assert_eq!(k.cols, 1);
        assert!(mat_mul(&ctx, &a, &k).is_zero_mat());
    }

    #[test]
    fn solve_membership() {
        let f = q();
        let ctx = ElimCtx::PolyLine(&f);
        // span of single column (x); x^2 is a member, 1 is not
        let span = pmat(&f, &[&[&[0, 1]]]);
        let b_in = pmat(&f, &[&[&[0, 0, 1]]]);
        let b_out = pmat(&f, &[&[&[1]]]);
        let x = solve_in_span(&ctx, &span, &b_in).unwrap();
        assert_eq!(mat_mul(&ctx, &span, &x), b_in);
        assert!(solve_in_span(&ctx, &span, &b_out).is_none());
    }

    #[test]
    fn smith_diag_and_transform() {
        let f = q();
        let ctx = ElimCtx::PolyLine(&f);
        // presentation of k[x]/(x) + k[x]/(x^2) mixed by a unimodular change
        let a = pmat(&f, &[&[&[0, 1], &[0, 1]], &[&[0, 1], &[0, 1, 1]]]);
        let sm = smith(&ctx, &a);
        assert_eq!(mat_mul(&ctx, &sm.s, &sm.s_inv), Mat::identity(2, &f));
        let nonzero: Vec<_> = sm.diag.iter().filter(|d| !d.is_zero()).collect();
        for w in nonzero.windows(2) {
            assert!(f.p_rem(w[1], w[0]).is_zero(), "divisibility chain");
        }
    }

    #[test]
    fn fraction_field_rank() {
        let f = q();
        // [[x, x^2], [1, x]] has rank 1 over k(x)
        let a = pmat(&f, &[&[&[0, 1], &[0, 0, 1]], &[&[1], &[0, 1]]]);
        assert_eq!(rank_fraction_field(&f, &a), 1);
    }

    #[test]
    fn modular_context_is_field() {
        let f = FieldSpec::fp(5);
        let m = f.p_from_coeffs(&[3, 0, 1]); // x^2+3 irreducible mod 5
        let ctx = ElimCtx::ModIrreducible(&f, &m);
        let a = Mat::from_rows(vec![vec![f.p_from_coeffs(&[0, 1])]]); // [x]
        assert_eq!(rank(&ctx, &a), 1);
        let inv = ctx.inv(a.at(0, 0));
        assert_eq!(ctx.mul(&inv, a.at(0, 0)), f.p_one());
    }

    #[test]
    fn empty_shapes() {
        let f = q();
        let ctx = ElimCtx::Field(&f);
        let a = Mat::zero(0, 3);
        let k = kernel_cols(&ctx, &a);
        assert_eq!((k.rows, k.cols), (3, 3));
        let b = Mat::zero(2, 0);
        assert_eq!(rank(&ctx, &b), 0);
        assert!(solve_in_span(&ctx, &b, &Mat::zero(2, 1)).is_some());
    }
}
