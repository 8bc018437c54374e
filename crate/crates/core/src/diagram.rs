//! Box posets and functors from them into finitely presented modules, with
//! the restriction/extension adjunction along the bottom face of the last
//! coordinate.

use crate::ring::{BaseRing, FpModule, ModuleMap};

/// The poset of integer points of the product of intervals `[0, r_i]`,
/// enumerated lexicographically.
#[derive(Clone, Debug)]
pub struct BoxPoset {
    r: Vec<u32>,
    strides: Vec<usize>,
}

impl PartialEq for BoxPoset {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r
    }
}
impl Eq for BoxPoset {}

impl BoxPoset {
    pub fn new(r: Vec<u32>) -> BoxPoset {
        assert!(!r.is_empty(), "box poset needs at least one coordinate");
        let mut strides = vec![1usize; r.len()];
        for i in (0..r.len() - 1).rev() {
            strides[i] = strides[i + 1] * (r[i + 1] as usize + 1);
        }
        BoxPoset { r, strides }
    }

    pub fn bounds(&self) -> &[u32] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn point_count(&self) -> usize {
        self.r.iter().map(|&ri| ri as usize + 1).product()
    }

    /// Lexicographic rank of a point.
    pub fn index(&self, point: &[u32]) -> usize {
        assert_eq!(point.len(), self.r.len());
        let mut idx = 0usize;
        for (i, &p) in point.iter().enumerate() {
            assert!(p <= self.r[i], "point has coordinate outside the box");
            idx += p as usize * self.strides[i];
        }
        idx
    }

    pub fn point(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.r.len()];
        for i in (0..self.r.len()).rev() {
            let size = self.r[i] as usize + 1;
            out[i] = (idx % size) as u32;
            idx /= size;
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<u32>> {
        (0..self.point_count()).map(|i| self.point(i)).collect()
    }

    pub fn has_edge(&self, point: &[u32], dir: usize) -> bool {
        point[dir] < self.r[dir]
    }

    pub fn step(&self, point: &[u32], dir: usize) -> Vec<u32> {
        let mut p = point.to_vec();
        p[dir] += 1;
        p
    }
}

/// One failure found while validating a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagramFailure {
    /// An edge map is missing, has wrong endpoints, or does not respect
    /// relations.
    BadEdge {
        point: Vec<u32>,
        dir: usize,
        reason: String,
    },
    /// The square at `point` in directions `(i, j)` does not commute.
    Square { point: Vec<u32>, i: usize, j: usize },
    /// An object lives over a different ring than the diagram's.
    RingMismatch { point: Vec<u32> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagramReport {
    pub failures: Vec<DiagramFailure>,
}

impl DiagramReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A functor from a box poset to finitely presented modules: one module per
/// lattice point and one map per elementary edge, all elementary squares
/// commuting. Squares are validated eagerly at construction; invalid data is
/// only representable as a [`DiagramReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDiagram {
    ring: BaseRing,
    bx: BoxPoset,
    objects: Vec<FpModule>,
    /// `edges[point_index][dir]`, present when the edge exists in the box.
    edges: Vec<Vec<Option<ModuleMap>>>,
}

impl BoxDiagram {
    /// Validate raw diagram data without constructing; reports every failure.
    pub fn validate(
        ring: &BaseRing,
        bx: &BoxPoset,
        objects: &[FpModule],
        edges: &[Vec<Option<ModuleMap>>],
    ) -> DiagramReport {
        let mut failures = Vec::new();
        let n = bx.dim();
        assert_eq!(objects.len(), bx.point_count());
        assert_eq!(edges.len(), bx.point_count());
        for (idx, obj) in objects.iter().enumerate() {
            if obj.ring() != ring {
                failures.push(DiagramFailure::RingMismatch {
                    point: bx.point(idx),
                });
            }
        }
        for idx in 0..bx.point_count() {
            let u = bx.point(idx);
            for dir in 0..n {
                let expected = bx.has_edge(&u, dir);
                match (&edges[idx][dir], expected) {
                    (None, false) => {}
                    (None, true) => failures.push(DiagramFailure::BadEdge {
                        point: u.clone(),
                        dir,
                        reason: "missing edge".into(),
                    }),
                    (Some(_), false) => failures.push(DiagramFailure::BadEdge {
                        point: u.clone(),
                        dir,
                        reason: "edge leaves the box".into(),
                    }),
                    (Some(e), true) => {
                        let tgt_idx = bx.index(&bx.step(&u, dir));
                        if e.source() != &objects[idx] || e.target() != &objects[tgt_idx] {
                            failures.push(DiagramFailure::BadEdge {
                                point: u.clone(),
                                dir,
                                reason: "edge endpoints disagree with objects".into(),
                            });
                        }
                    }
                }
            }
        }
        if !failures.is_empty() {
            return DiagramReport { failures };
        }
        // commutativity of all elementary squares
        for idx in 0..bx.point_count() {
            let u = bx.point(idx);
            for i in 0..n {
                for j in i + 1..n {
                    if !bx.has_edge(&u, i) || !bx.has_edge(&u, j) {
                        continue;
                    }
                    let ui = bx.index(&bx.step(&u, i));
                    let uj = bx.index(&bx.step(&u, j));
                    let via_i = ModuleMap::compose(
                        edges[ui][j].as_ref().unwrap(),
                        edges[idx][i].as_ref().unwrap(),
                    );
                    let via_j = ModuleMap::compose(
                        edges[uj][i].as_ref().unwrap(),
                        edges[idx][j].as_ref().unwrap(),
                    );
                    if via_i != via_j {
                        failures.push(DiagramFailure::Square {
                            point: u.clone(),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        DiagramReport { failures }
    }

    /// Construct a diagram, validating eagerly.
    pub fn new(
        ring: BaseRing,
        bx: BoxPoset,
        objects: Vec<FpModule>,
        edges: Vec<Vec<Option<ModuleMap>>>,
    ) -> Result<BoxDiagram, DiagramReport> {
        let report = BoxDiagram::validate(&ring, &bx, &objects, &edges);
        if !report.is_valid() {
            return Err(report);
        }
        Ok(BoxDiagram {
            ring,
            bx,
            objects,
            edges,
        })
    }

    /// For internal constructions whose commutativity holds by construction;
    /// only the shape is checked.
    pub(crate) fn new_internal(
        ring: BaseRing,
        bx: BoxPoset,
        objects: Vec<FpModule>,
        edges: Vec<Vec<Option<ModuleMap>>>,
    ) -> BoxDiagram {
        assert_eq!(objects.len(), bx.point_count());
        assert_eq!(edges.len(), bx.point_count());
        BoxDiagram {
            ring,
            bx,
            objects,
            edges,
        }
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn poset(&self) -> &BoxPoset {
        &self.bx
    }

    pub fn objects(&self) -> &[FpModule] {
        &self.objects
    }

    pub fn edges(&self) -> &[Vec<Option<ModuleMap>>] {
        &self.edges
    }

    pub fn object(&self, point: &[u32]) -> &FpModule {
        &self.objects[self.bx.index(point)]
    }

    pub fn object_at(&self, idx: usize) -> &FpModule {
        &self.objects[idx]
    }

    pub fn edge(&self, point: &[u32], dir: usize) -> &ModuleMap {
        self.edges[self.bx.index(point)][dir]
            .as_ref()
            .expect("edge exists inside the box")
    }

    pub fn is_zero(&self) -> bool {
        self.objects.iter().all(|m| m.is_zero())
    }

    /// Composite of edge maps from `from` to `to` (requires `from <= to`),
    /// stepping through directions in index order. By commutativity any path
    /// gives the same map.
    pub fn edge_composite(&self, from: &[u32], to: &[u32]) -> ModuleMap {
        assert!(from.iter().zip(to).all(|(a, b)| a <= b));
        let mut cur = from.to_vec();
        let mut acc = ModuleMap::identity(self.object(from));
        for dir in 0..self.bx.dim() {
            while cur[dir] < to[dir] {
                let e = self.edge(&cur, dir).clone();
                acc = ModuleMap::compose(&e, &acc);
                cur[dir] += 1;
            }
        }
        acc
    }

    /// Restriction to the bottom face (last coordinate pinned at 0).
    pub fn restrict_bottom(&self) -> BoxDiagram {
        let n = self.bx.dim();
        assert!(n >= 2, "restriction needs at least two directions");
        let sub = BoxPoset::new(self.bx.bounds()[..n - 1].to_vec());
        let mut objects = Vec::with_capacity(sub.point_count());
        let mut edges = Vec::with_capacity(sub.point_count());
        for idx in 0..sub.point_count() {
            let mut u = sub.point(idx);
            let base = u.clone();
            u.push(0);
            objects.push(self.object(&u).clone());
            let mut e: Vec<Option<ModuleMap>> = Vec::with_capacity(n - 1);
            for dir in 0..n - 1 {
                e.push(if sub.has_edge(&base, dir) {
                    Some(self.edge(&u, dir).clone())
                } else {
                    None
                });
            }
            edges.push(e);
        }
        BoxDiagram {
            ring: self.ring.clone(),
            bx: sub,
            objects,
            edges,
        }
    }

    /// Left adjoint of [`restrict_bottom`]: constant extension in a new last
    /// direction of length `r_last`, with identity edges.
    pub fn extend_bottom(&self, r_last: u32) -> BoxDiagram {
        let mut r = self.bx.bounds().to_vec();
        r.push(r_last);
        let bx = BoxPoset::new(r);
        let n = bx.dim();
        let mut objects = Vec::with_capacity(bx.point_count());
        let mut edges = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let u = bx.point(idx);
            let base = &u[..n - 1];
            let obj = self.object(base).clone();
            let mut e: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n - 1 {
                e.push(if bx.has_edge(&u, dir) {
                    Some(self.edge(base, dir).clone())
                } else {
                    None
                });
            }
            e.push(bx.has_edge(&u, n - 1).then(|| ModuleMap::identity(&obj)));
            objects.push(obj);
            edges.push(e);
        }
        BoxDiagram {
            ring: self.ring.clone(),
            bx,
            objects,
            edges,
        }
    }

    /// Per-point classes, in lexicographic point order.
    pub fn class_vector(&self) -> Vec<crate::ring::G0Class> {
        self.objects.iter().map(|m| m.g0_class()).collect()
    }

    /// For a diagram vanishing on the bottom face of the last direction, the
    /// equivalent diagram over `(r_1, .., r_{n-1}, r_n - 1)` obtained by
    /// shifting the last coordinate down by one.
    pub fn shift_last_down(&self) -> BoxDiagram {
        let n = self.bx.dim();
        let r = self.bx.bounds();
        assert!(r[n - 1] >= 1);
        let mut sub_r = r.to_vec();
        sub_r[n - 1] -= 1;
        let bx = BoxPoset::new(sub_r);
        let mut objects = Vec::with_capacity(bx.point_count());
        let mut edges = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let mut u = bx.point(idx);
            u[n - 1] += 1;
            {
                let mut bottom = u.clone();
                bottom[n - 1] = 0;
                assert!(
                    self.object(&bottom).is_zero(),
                    "shift requires a diagram vanishing on the bottom face"
                );
            }
            objects.push(self.object(&u).clone());
            let mut e: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                e.push(if bx.has_edge(&bx.point(idx), dir) {
                    Some(self.edge(&u, dir).clone())
                } else {
                    None
                });
            }
            edges.push(e);
        }
        BoxDiagram {
            ring: self.ring.clone(),
            bx,
            objects,
            edges,
        }
    }

    /// Inverse of [`shift_last_down`]: shift the last coordinate up by one
    /// and insert a zero bottom face.
    pub fn shift_last_up(&self) -> BoxDiagram {
        let n = self.bx.dim();
        let mut big_r = self.bx.bounds().to_vec();
        big_r[n - 1] += 1;
        let bx = BoxPoset::new(big_r);
        let zero = FpModule::zero(&self.ring);
        let mut objects = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let u = bx.point(idx);
            if u[n - 1] == 0 {
                objects.push(zero.clone());
            } else {
                let mut v = u.clone();
                v[n - 1] -= 1;
                objects.push(self.object(&v).clone());
            }
        }
        let mut edges = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let u = bx.point(idx);
            let mut e: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                if !bx.has_edge(&u, dir) {
                    e.push(None);
                    continue;
                }
                let tgt = bx.step(&u, dir);
                if u[n - 1] == 0 {
                    e.push(Some(ModuleMap::zero_map(
                        &objects[idx],
                        &objects[bx.index(&tgt)],
                    )));
                } else {
                    let mut v = u.clone();
                    v[n - 1] -= 1;
                    e.push(Some(self.edge(&v, dir).clone()));
                }
            }
            edges.push(e);
        }
        BoxDiagram {
            ring: self.ring.clone(),
            bx,
            objects,
            edges,
        }
    }

    /// Pointwise direct sum of diagrams over the same box.
    pub fn direct_sum(parts: &[&BoxDiagram]) -> BoxDiagram {
        assert!(!parts.is_empty());
        let bx = parts[0].bx.clone();
        let ring = parts[0].ring.clone();
        for p in parts {
            assert_eq!(p.bx, bx);
            assert_eq!(p.ring, ring);
        }
        let count = bx.point_count();
        let n = bx.dim();
        let mut sums = Vec::with_capacity(count);
        let mut injs: Vec<Vec<ModuleMap>> = Vec::with_capacity(count);
        let mut projs: Vec<Vec<ModuleMap>> = Vec::with_capacity(count);
        for idx in 0..count {
            let mods: Vec<&FpModule> = parts.iter().map(|p| &p.objects[idx]).collect();
            let (s, inj, proj) = FpModule::direct_sum(&mods);
            sums.push(s);
            injs.push(inj);
            projs.push(proj);
        }
        let mut edges = Vec::with_capacity(count);
        for idx in 0..count {
            let u = bx.point(idx);
            let mut e: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                if !bx.has_edge(&u, dir) {
                    e.push(None);
                    continue;
                }
                let tgt = bx.index(&bx.step(&u, dir));
                let mut acc = ModuleMap::zero_map(&sums[idx], &sums[tgt]);
                for (pi, p) in parts.iter().enumerate() {
                    let part_edge = p.edges[idx][dir].as_ref().unwrap();
                    let lifted = ModuleMap::compose(
                        &injs[tgt][pi],
                        &ModuleMap::compose(part_edge, &projs[idx][pi]),
                    );
                    acc = acc.add(&lifted);
                }
                e.push(Some(acc));
            }
            edges.push(e);
        }
        BoxDiagram {
            ring,
            bx,
            objects: sums,
            edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldSpec;

    fn field_ring() -> BaseRing {
        BaseRing::field(FieldSpec::Q)
    }

    fn const_diagram(ring: &BaseRing, r: Vec<u32>, m: &FpModule) -> BoxDiagram {
        let bx = BoxPoset::new(r);
        let objects = vec![m.clone(); bx.point_count()];
        let edges = (0..bx.point_count())
            .map(|idx| {
                let u = bx.point(idx);
                (0..bx.dim())
                    .map(|d| bx.has_edge(&u, d).then(|| ModuleMap::identity(m)))
                    .collect()
            })
            .collect();
        BoxDiagram::new(ring.clone(), bx, objects, edges).unwrap()
    }

    #[test]
    fn lex_enumeration() {
        let bx = BoxPoset::new(vec![1, 2]);
        let pts = bx.points();
        assert_eq!(pts[0], vec![0, 0]);
        assert_eq!(pts[1], vec![0, 1]);
        assert_eq!(pts[3], vec![1, 0]);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(bx.index(p), i);
        }
    }

    #[test]
    fn n1_diagram_valid() {
        let ring = field_ring();
        let k = FpModule::free(&ring, 1);
        let d = const_diagram(&ring, vec![1], &k);
        assert!(BoxDiagram::validate(&ring, d.poset(), &d.objects, &d.edges).is_valid());
    }

    #[test]
    fn bad_square_reported() {
        let ring = field_ring();
        let k = FpModule::free(&ring, 1);
        let bx = BoxPoset::new(vec![1, 1]);
        let objects = vec![k.clone(); 4];
        let mut edges: Vec<Vec<Option<ModuleMap>>> = (0..4)
            .map(|idx| {
                let u = bx.point(idx);
                (0..2)
                    .map(|d| bx.has_edge(&u, d).then(|| ModuleMap::identity(&k)))
                    .collect()
            })
            .collect();
        // zero out one edge of the square at (0,0)
        edges[bx.index(&[0, 0])][0] = Some(ModuleMap::zero_map(&k, &k));
        let report = BoxDiagram::validate(&ring, &bx, &objects, &edges);
        assert_eq!(
            report.failures,
            vec![DiagramFailure::Square {
                point: vec![0, 0],
                i: 0,
                j: 1
            }]
        );
    }

    #[test]
    fn scalar_square_commutes_iff_products_match() {
        let ring = field_ring();
        let f = FieldSpec::Q;
        let k = FpModule::free(&ring, 1);
        let bx = BoxPoset::new(vec![1, 1]);
        let scale = |c: i64| ModuleMap::mult_by(&k, &f.p_constant(c));
        // path products 2*3 and 6*1 agree, so the square commutes
        let (a, b, c, d) = (2, 3, 6, 1);
        let mut edges: Vec<Vec<Option<ModuleMap>>> = vec![vec![None, None]; 4];
        edges[bx.index(&[0, 0])][0] = Some(scale(a));
        edges[bx.index(&[1, 0])][1] = Some(scale(b));
        edges[bx.index(&[0, 0])][1] = Some(scale(c));
        edges[bx.index(&[0, 1])][0] = Some(scale(d));
        let objects = vec![k.clone(); 4];
        let report = BoxDiagram::validate(&ring, &bx, &objects, &edges);
        assert!(report.is_valid());
    }

    #[test]
    fn restrict_extend_roundtrip() {
        let ring = field_ring();
        let k = FpModule::free(&ring, 2);
        let e = const_diagram(&ring, vec![2], &k);
        let big = e.extend_bottom(2);
        assert_eq!(big.restrict_bottom(), e);
    }

    #[test]
    fn extend_of_zero_is_zero() {
        let ring = field_ring();
        let z = FpModule::zero(&ring);
        let e = const_diagram(&ring, vec![1], &z);
        assert!(e.extend_bottom(3).is_zero());
    }

    #[test]
    fn shift_bijection() {
        let ring = field_ring();
        let k = FpModule::free(&ring, 1);
        let d = const_diagram(&ring, vec![1, 1], &k);
        let lifted = d.shift_last_up();
        assert!(lifted.object(&[0, 0]).is_zero());
        assert!(lifted.object(&[1, 0]).is_zero());
        let back = lifted.shift_last_down();
        assert_eq!(back, d);
    }

    #[test]
    fn zero_length_last_direction_is_iso() {
        let ring = field_ring();
        let k = FpModule::free(&ring, 1);
        let e = const_diagram(&ring, vec![2], &k);
        let flat = e.extend_bottom(0);
        assert_eq!(flat.poset().bounds(), &[2, 0]);
        assert_eq!(flat.restrict_bottom(), e);
    }

    #[test]
    fn class_vector_additive() {
        let ring = field_ring();
        let a = const_diagram(&ring, vec![1], &FpModule::free(&ring, 1));
        let b = const_diagram(&ring, vec![1], &FpModule::free(&ring, 2));
        let s = BoxDiagram::direct_sum(&[&a, &b]);
        let va: Vec<i64> = a.class_vector().iter().map(|c| c.vector()[0]).collect();
        let vb: Vec<i64> = b.class_vector().iter().map(|c| c.vector()[0]).collect();
        let vs: Vec<i64> = s.class_vector().iter().map(|c| c.vector()[0]).collect();
        assert_eq!(
            vs,
            va.iter().zip(&vb).map(|(x, y)| x + y).collect::<Vec<_>>()
        );
    }
}
