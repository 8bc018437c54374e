//! Divisor data and extendable pairs: finite box diagrams of modules with
//! pseudo-period isomorphisms, the finite model of a sheaf on a root stack
//! over a trivialized affine base. Line-bundle twists are bookkeeping on
//! integer vectors, so the pseudo-period maps are honest matrices.

use crate::diagram::{BoxDiagram, BoxPoset};
use crate::error::Error;
use crate::poly::Poly;
use crate::ring::{BaseRing, FpModule, ModuleMap, RingKind};

/// One root datum: a section of a trivialized line bundle and the root index.
/// A zero section means the whole base is the divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorTriple {
    pub section: Poly,
    pub index: u32,
}

/// Check the divisor list against the base ring: indices positive and prime
/// to the characteristic; on the line the nonzero sections squarefree and
/// (for several divisors) pairwise coprime; on a field or quotient base the
/// sections zero or units.
pub fn validate_divisors(ring: &BaseRing, divisors: &[DivisorTriple]) -> Result<(), Error> {
    let field = ring.coefficient_field();
    for (i, d) in divisors.iter().enumerate() {
        if d.index == 0 {
            return Err(Error::InvalidDivisor(format!("divisor {i} has index 0")));
        }
        let p = field.characteristic();
        if p != 0 && u64::from(d.index) % p == 0 {
            return Err(Error::BadCharacteristic(format!(
                "index {} at divisor {i} is divisible by the characteristic {p}",
                d.index
            )));
        }
        let s = ring.reduce(&d.section);
        if s != d.section {
            return Err(Error::InvalidDivisor(format!(
                "section at divisor {i} is not reduced in the base ring"
            )));
        }
        match ring.kind() {
            RingKind::PolyLine => {
                if !s.is_zero() && !field.p_is_squarefree(&s) {
                    return Err(Error::NotSquarefree(format!("section at divisor {i}")));
                }
            }
            RingKind::Field | RingKind::SquarefreeQuotient => {
                if !s.is_zero() && !ring.is_unit(&s) {
                    return Err(Error::InvalidDivisor(format!(
                        "section at divisor {i} must be zero or a unit over this base"
                    )));
                }
            }
        }
    }
    if ring.kind() == RingKind::PolyLine && divisors.len() >= 2 {
        for i in 0..divisors.len() {
            for j in i + 1..divisors.len() {
                let (a, b) = (&divisors[i].section, &divisors[j].section);
                if !a.is_zero() && !b.is_zero() && field.p_gcd(a, b).degree() != Some(0) {
                    return Err(Error::InvalidDivisor(format!(
                        "sections at divisors {i} and {j} share a factor"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// One failure found while validating a pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairFailure {
    Divisor(String),
    Diagram(crate::diagram::DiagramFailure),
    /// A pseudo-period map is missing, misplaced, ill-formed, or not
    /// invertible.
    BadRho { point: Vec<u32>, dir: usize, reason: String },
    Ex1 { point: Vec<u32>, dir: usize },
    Ex2 { point: Vec<u32>, i: usize, j: usize },
    Ex3 { point: Vec<u32>, i: usize, j: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairReport {
    pub failures: Vec<PairFailure>,
}

impl PairReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// An extendable pair: a box diagram together with invertible pseudo-period
/// maps on the top faces, satisfying the three compatibility axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendablePair {
    divisors: Vec<DivisorTriple>,
    diagram: BoxDiagram,
    /// `rho[point_idx][dir]`: the map `F_a -> F_{a - r_i e_i}`, present
    /// exactly when `a_i = r_i`.
    rho: Vec<Vec<Option<ModuleMap>>>,
}

/// The value of the associated infinite-lattice sheaf at a point: the box
/// module at the residue together with the twist multi-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicValue {
    pub point: Vec<i64>,
    pub module: FpModule,
    pub twist: Vec<i64>,
}

/// An evaluated lattice edge: the matrix together with the twist increment
/// it incurs (the unit vector in its direction when the step wraps).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeEval {
    pub map: ModuleMap,
    pub twist_delta: Vec<i64>,
}

impl ExtendablePair {
    /// Validate raw pair data; the diagram part must already be valid.
    pub fn validate(
        divisors: &[DivisorTriple],
        diagram: &BoxDiagram,
        rho: &[Vec<Option<ModuleMap>>],
    ) -> PairReport {
        let mut failures = Vec::new();
        if let Err(e) = validate_divisors(diagram.ring(), divisors) {
            failures.push(PairFailure::Divisor(e.to_string()));
        }
        let bx = diagram.poset();
        let n = bx.dim();
        if divisors.len() != n
            || bx
                .bounds()
                .iter()
                .zip(divisors)
                .any(|(&r, d)| r != d.index)
        {
            failures.push(PairFailure::Divisor(
                "box bounds must equal the divisor indices".into(),
            ));
            return PairReport { failures };
        }
        assert_eq!(rho.len(), bx.point_count());
        // placement, endpoints, invertibility
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            for dir in 0..n {
                let expected = a[dir] == bx.bounds()[dir];
                match (&rho[idx][dir], expected) {
                    (None, false) => {}
                    (None, true) => failures.push(PairFailure::BadRho {
                        point: a.clone(),
                        dir,
                        reason: "missing pseudo-period map".into(),
                    }),
                    (Some(_), false) => failures.push(PairFailure::BadRho {
                        point: a.clone(),
                        dir,
                        reason: "pseudo-period map away from the top face".into(),
                    }),
                    (Some(m), true) => {
                        let mut down = a.clone();
                        down[dir] = 0;
                        if m.source() != diagram.object(&a) || m.target() != diagram.object(&down) {
                            failures.push(PairFailure::BadRho {
                                point: a.clone(),
                                dir,
                                reason: "pseudo-period endpoints disagree with objects".into(),
                            });
                        } else if !m.is_iso() {
                            failures.push(PairFailure::BadRho {
                                point: a.clone(),
                                dir,
                                reason: "pseudo-period map is not invertible".into(),
                            });
                        }
                    }
                }
            }
        }
        if !failures.is_empty() {
            return PairReport { failures };
        }
        let rho_at = |a: &[u32], dir: usize| -> &ModuleMap {
            rho[bx.index(a)][dir].as_ref().unwrap()
        };
        // EX1: going all the way around direction i is multiplication by s_i
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            for dir in 0..n {
                let r_i = bx.bounds()[dir];
                let mut beta = a.clone();
                beta[dir] = r_i;
                let mut low = a.clone();
                low[dir] = 0;
                let up = diagram.edge_composite(&a, &beta);
                let back = diagram.edge_composite(&low, &a);
                let composite =
                    ModuleMap::compose(&back, &ModuleMap::compose(rho_at(&beta, dir), &up));
                let target = ModuleMap::mult_by(diagram.object(&a), &divisors[dir].section);
                if composite != target {
                    failures.push(PairFailure::Ex1 {
                        point: a.clone(),
                        dir,
                    });
                }
            }
        }
        // EX2: pseudo-period maps commute with transverse edges
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            for i in 0..n {
                if a[i] != bx.bounds()[i] {
                    continue;
                }
                for j in 0..n {
                    if j == i || !bx.has_edge(&a, j) {
                        continue;
                    }
                    let mut down = a.clone();
                    down[i] = 0;
                    let lhs = ModuleMap::compose(diagram.edge(&down, j), rho_at(&a, i));
                    let stepped = bx.step(&a, j);
                    let rhs = ModuleMap::compose(rho_at(&stepped, i), diagram.edge(&a, j));
                    if lhs != rhs {
                        failures.push(PairFailure::Ex2 {
                            point: a.clone(),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        // EX3: two pseudo-period maps commute
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            for i in 0..n {
                for j in i + 1..n {
                    if a[i] != bx.bounds()[i] || a[j] != bx.bounds()[j] {
                        continue;
                    }
                    let mut down_i = a.clone();
                    down_i[i] = 0;
                    let mut down_j = a.clone();
                    down_j[j] = 0;
                    let lhs = ModuleMap::compose(rho_at(&down_i, j), rho_at(&a, i));
                    let rhs = ModuleMap::compose(rho_at(&down_j, i), rho_at(&a, j));
                    if lhs != rhs {
                        failures.push(PairFailure::Ex3 {
                            point: a.clone(),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        PairReport { failures }
    }

    pub fn new(
        divisors: Vec<DivisorTriple>,
        diagram: BoxDiagram,
        rho: Vec<Vec<Option<ModuleMap>>>,
    ) -> Result<ExtendablePair, PairReport> {
        let report = ExtendablePair::validate(&divisors, &diagram, &rho);
        if !report.is_valid() {
            return Err(report);
        }
        Ok(ExtendablePair {
            divisors,
            diagram,
            rho,
        })
    }

    /// For internal constructions whose axioms hold by construction (faces,
    /// extensions, adjoints, kernels and cokernels of pair morphisms); only
    /// the shape of the pseudo-period table is checked.
    pub(crate) fn new_internal(
        divisors: Vec<DivisorTriple>,
        diagram: BoxDiagram,
        rho: Vec<Vec<Option<ModuleMap>>>,
    ) -> ExtendablePair {
        let bx = diagram.poset();
        assert_eq!(rho.len(), bx.point_count());
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            for dir in 0..bx.dim() {
                assert_eq!(
                    rho[idx][dir].is_some(),
                    a[dir] == bx.bounds()[dir],
                    "pseudo-period table has the wrong shape"
                );
            }
        }
        ExtendablePair {
            divisors,
            diagram,
            rho,
        }
    }

    pub fn divisors(&self) -> &[DivisorTriple] {
        &self.divisors
    }

    pub fn diagram(&self) -> &BoxDiagram {
        &self.diagram
    }

    pub fn ring(&self) -> &BaseRing {
        self.diagram.ring()
    }

    pub fn bounds(&self) -> &[u32] {
        self.diagram.poset().bounds()
    }

    pub fn dim(&self) -> usize {
        self.diagram.poset().dim()
    }

    pub fn rho_at(&self, point: &[u32], dir: usize) -> &ModuleMap {
        self.rho[self.diagram.poset().index(point)][dir]
            .as_ref()
            .expect("pseudo-period map exists on the top face")
    }

    pub fn rho_table(&self) -> &[Vec<Option<ModuleMap>>] {
        &self.rho
    }

    pub fn is_zero(&self) -> bool {
        self.diagram.is_zero()
    }

    /// Pointwise direct sum of pairs over the same divisors.
    pub fn direct_sum(parts: &[&ExtendablePair]) -> ExtendablePair {
        assert!(!parts.is_empty());
        let divisors = parts[0].divisors.clone();
        for p in parts {
            assert_eq!(p.divisors, divisors);
        }
        let diagrams: Vec<&BoxDiagram> = parts.iter().map(|p| &p.diagram).collect();
        let diagram = BoxDiagram::direct_sum(&diagrams);
        let bx = diagram.poset().clone();
        let n = bx.dim();
        // recompute the sum injections/projections pointwise to assemble rho
        let mut rho: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
        let mut sums_inj: Vec<Vec<ModuleMap>> = Vec::with_capacity(bx.point_count());
        let mut sums_proj: Vec<Vec<ModuleMap>> = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let mods: Vec<&FpModule> = parts.iter().map(|p| p.diagram.object_at(idx)).collect();
            let (_, inj, proj) = FpModule::direct_sum(&mods);
            sums_inj.push(inj);
            sums_proj.push(proj);
        }
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            let mut row: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                if a[dir] != bx.bounds()[dir] {
                    row.push(None);
                    continue;
                }
                let mut down = a.clone();
                down[dir] = 0;
                let down_idx = bx.index(&down);
                let mut acc = ModuleMap::zero_map(
                    diagram.object_at(idx),
                    diagram.object_at(down_idx),
                );
                for (pi, p) in parts.iter().enumerate() {
                    let part_rho = p.rho_at(&a, dir);
                    let lifted = ModuleMap::compose(
                        &sums_inj[down_idx][pi],
                        &ModuleMap::compose(part_rho, &sums_proj[idx][pi]),
                    );
                    acc = acc.add(&lifted);
                }
                row.push(Some(acc));
            }
            rho.push(row);
        }
        ExtendablePair {
            divisors,
            diagram,
            rho,
        }
    }

    /// Conjugate every object's presentation by a per-point automorphism.
    /// The pair stays valid; the matrices change.
    pub fn conjugate(&self, autos: &[ModuleMap]) -> ExtendablePair {
        let bx = self.diagram.poset();
        assert_eq!(autos.len(), bx.point_count());
        let invs: Vec<ModuleMap> = autos
            .iter()
            .map(|g| g.inverse().expect("conjugating map must be invertible"))
            .collect();
        let n = bx.dim();
        let mut edges: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
        let mut rho: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            let mut erow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            let mut rrow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                if bx.has_edge(&a, dir) {
                    let tgt = bx.index(&bx.step(&a, dir));
                    erow.push(Some(ModuleMap::compose(
                        &autos[tgt],
                        &ModuleMap::compose(self.diagram.edge(&a, dir), &invs[idx]),
                    )));
                } else {
                    erow.push(None);
                }
                if a[dir] == bx.bounds()[dir] {
                    let mut down = a.clone();
                    down[dir] = 0;
                    let down_idx = bx.index(&down);
                    rrow.push(Some(ModuleMap::compose(
                        &autos[down_idx],
                        &ModuleMap::compose(self.rho_at(&a, dir), &invs[idx]),
                    )));
                } else {
                    rrow.push(None);
                }
            }
            edges.push(erow);
            rho.push(rrow);
        }
        let diagram = BoxDiagram::new_internal(
            self.ring().clone(),
            bx.clone(),
            self.diagram.objects().to_vec(),
            edges,
        );
        ExtendablePair {
            divisors: self.divisors.clone(),
            diagram,
            rho,
        }
    }

    /// Euclidean reduction of a lattice point: `v = r*u + q` with
    /// `0 <= q_i < r_i`.
    pub fn reduce_point(&self, v: &[i64]) -> (Vec<i64>, Vec<u32>) {
        assert_eq!(v.len(), self.dim());
        let mut twist = Vec::with_capacity(v.len());
        let mut q = Vec::with_capacity(v.len());
        for (vi, d) in v.iter().zip(&self.divisors) {
            let r = i64::from(d.index);
            let qi = vi.rem_euclid(r);
            twist.push((vi - qi) / r);
            q.push(qi as u32);
        }
        (twist, q)
    }

    /// The lattice extension evaluated at `v`.
    pub fn evaluate(&self, v: &[i64]) -> ParabolicValue {
        let (twist, q) = self.reduce_point(v);
        ParabolicValue {
            point: v.to_vec(),
            module: self.diagram.object(&q).clone(),
            twist,
        }
    }

    /// The lattice edge map out of `v` in direction `dir`.
    pub fn evaluate_edge(&self, v: &[i64], dir: usize) -> EdgeEval {
        let (_, q) = self.reduce_point(v);
        let r = self.bounds()[dir];
        let mut delta = vec![0i64; self.dim()];
        if q[dir] + 1 < r {
            EdgeEval {
                map: self.diagram.edge(&q, dir).clone(),
                twist_delta: delta,
            }
        } else {
            let stepped = self.diagram.poset().step(&q, dir);
            delta[dir] = 1;
            EdgeEval {
                map: ModuleMap::compose(self.rho_at(&stepped, dir), self.diagram.edge(&q, dir)),
                twist_delta: delta,
            }
        }
    }

    /// Composite of the `r_dir` consecutive lattice edges starting at `v` in
    /// direction `dir`; an endomorphism of the value at `v` after the twist
    /// bookkeeping.
    pub fn edge_power_composite(&self, v: &[i64], dir: usize) -> ModuleMap {
        let r = i64::from(self.bounds()[dir]);
        let mut acc = ModuleMap::identity(&self.evaluate(v).module);
        let mut cur = v.to_vec();
        for _ in 0..r {
            let e = self.evaluate_edge(&cur, dir);
            acc = ModuleMap::compose(&e.map, &acc);
            cur[dir] += 1;
        }
        acc
    }

    /// The composite pseudo-period reduction at an in-box point: one factor
    /// per coordinate sitting on the top face, applied in direction order.
    fn reduction_to_residue(&self, a: &[u32]) -> ModuleMap {
        let bx = self.diagram.poset();
        let mut cur = a.to_vec();
        let mut acc = ModuleMap::identity(self.diagram.object(a));
        for dir in 0..bx.dim() {
            if cur[dir] == bx.bounds()[dir] {
                let rho = self.rho_at(&cur, dir).clone();
                acc = ModuleMap::compose(&rho, &acc);
                cur[dir] = 0;
            }
        }
        acc
    }

    /// Materialize the lattice extension on the window `[lo, hi]`, which must
    /// contain the box. Inside the box the stored data is this pair's data,
    /// verbatim.
    pub fn extend_window(&self, lo: &[i64], hi: &[i64]) -> Window {
        let n = self.dim();
        assert_eq!(lo.len(), n);
        assert_eq!(hi.len(), n);
        for i in 0..n {
            assert!(lo[i] <= 0 && hi[i] >= i64::from(self.bounds()[i]));
        }
        let shape = WindowShape {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        };
        let in_box = |v: &[i64]| -> Option<Vec<u32>> {
            let mut p = Vec::with_capacity(n);
            for (i, &vi) in v.iter().enumerate() {
                if vi < 0 || vi > i64::from(self.bounds()[i]) {
                    return None;
                }
                p.push(vi as u32);
            }
            Some(p)
        };
        // reduction map of each stored point into its residue module
        let reduction = |v: &[i64]| -> ModuleMap {
            match in_box(v) {
                Some(p) => self.reduction_to_residue(&p),
                None => {
                    let (_, q) = self.reduce_point(v);
                    ModuleMap::identity(self.diagram.object(&q))
                }
            }
        };
        let count = shape.point_count();
        let mut values = Vec::with_capacity(count);
        for idx in 0..count {
            let v = shape.point(idx);
            match in_box(&v) {
                Some(p) => values.push(self.diagram.object(&p).clone()),
                None => values.push(self.evaluate(&v).module),
            }
        }
        let mut edges: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(count);
        let mut periods: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(count);
        for idx in 0..count {
            let v = shape.point(idx);
            let mut erow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            let mut prow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                // edge v -> v + e_dir
                let mut w = v.clone();
                w[dir] += 1;
                if w[dir] > shape.hi[dir] {
                    erow.push(None);
                } else {
                    match (in_box(&v), in_box(&w)) {
                        (Some(pv), Some(_)) => {
                            erow.push(Some(self.diagram.edge(&pv, dir).clone()));
                        }
                        _ => {
                            let red_v = reduction(&v);
                            let red_w = reduction(&w);
                            let mid = self.evaluate_edge(&v, dir).map;
                            let lift = red_w
                                .inverse()
                                .expect("reduction maps are isomorphisms");
                            erow.push(Some(ModuleMap::compose(
                                &lift,
                                &ModuleMap::compose(&mid, &red_v),
                            )));
                        }
                    }
                }
                // period v -> v - r_dir e_dir
                let mut d = v.clone();
                d[dir] -= i64::from(self.bounds()[dir]);
                if d[dir] < shape.lo[dir] {
                    prow.push(None);
                } else {
                    match (in_box(&v), in_box(&d)) {
                        (Some(pv), Some(_)) => {
                            prow.push(Some(self.rho_at(&pv, dir).clone()));
                        }
                        _ => {
                            let red_v = reduction(&v);
                            let red_d = reduction(&d);
                            let lift = red_d
                                .inverse()
                                .expect("reduction maps are isomorphisms");
                            prow.push(Some(ModuleMap::compose(&lift, &red_v)));
                        }
                    }
                }
            }
            edges.push(erow);
            periods.push(prow);
        }
        Window {
            divisors: self.divisors.clone(),
            ring: self.ring().clone(),
            shape,
            values,
            edges,
            periods,
        }
    }
}

/// Lattice shape of a window `[lo, hi]`, enumerated lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowShape {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl WindowShape {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn point_count(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| (h - l + 1) as usize)
            .product()
    }

    pub fn index(&self, v: &[i64]) -> usize {
        let mut idx = 0usize;
        for (i, &vi) in v.iter().enumerate() {
            assert!(vi >= self.lo[i] && vi <= self.hi[i]);
            let tail: usize = self.lo[i + 1..]
                .iter()
                .zip(&self.hi[i + 1..])
                .map(|(&l, &h)| (h - l + 1) as usize)
                .product();
            idx += (vi - self.lo[i]) as usize * tail;
        }
        idx
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let n = self.dim();
        let mut out = vec![0i64; n];
        for i in (0..n).rev() {
            let size = (self.hi[i] - self.lo[i] + 1) as usize;
            out[i] = self.lo[i] + (idx % size) as i64;
            idx /= size;
        }
        out
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.iter()
            .enumerate()
            .all(|(i, &vi)| vi >= self.lo[i] && vi <= self.hi[i])
    }
}

/// A materialized stretch of the lattice extension: values, edges, and
/// period maps on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    divisors: Vec<DivisorTriple>,
    ring: BaseRing,
    shape: WindowShape,
    values: Vec<FpModule>,
    edges: Vec<Vec<Option<ModuleMap>>>,
    periods: Vec<Vec<Option<ModuleMap>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowFailure {
    BadEdge { point: Vec<i64>, dir: usize },
    Square { point: Vec<i64>, i: usize, j: usize },
    PeriodNotIso { point: Vec<i64>, dir: usize },
    PeriodEdge { point: Vec<i64>, i: usize, j: usize },
    PeriodPeriod { point: Vec<i64>, i: usize, j: usize },
    SectionPower { point: Vec<i64>, dir: usize },
}

impl Window {
    pub fn shape(&self) -> &WindowShape {
        &self.shape
    }

    pub fn divisors(&self) -> &[DivisorTriple] {
        &self.divisors
    }

    pub fn value(&self, v: &[i64]) -> &FpModule {
        &self.values[self.shape.index(v)]
    }

    pub fn edge(&self, v: &[i64], dir: usize) -> Option<&ModuleMap> {
        self.edges[self.shape.index(v)][dir].as_ref()
    }

    pub fn period(&self, v: &[i64], dir: usize) -> Option<&ModuleMap> {
        self.periods[self.shape.index(v)][dir].as_ref()
    }

    /// All lattice identities a window of parabolic values must satisfy:
    /// functoriality, period naturality and commutation, and the section
    /// power law (the composite of `r_i` edges equals multiplication by
    /// `s_i` after one period reduction).
    pub fn check(&self) -> Vec<WindowFailure> {
        let mut failures = Vec::new();
        let n = self.shape.dim();
        for idx in 0..self.shape.point_count() {
            let v = self.shape.point(idx);
            for i in 0..n {
                if let Some(e) = &self.edges[idx][i] {
                    let mut w = v.clone();
                    w[i] += 1;
                    if e.source() != self.value(&v) || e.target() != self.value(&w) {
                        failures.push(WindowFailure::BadEdge {
                            point: v.clone(),
                            dir: i,
                        });
                        continue;
                    }
                    // squares
                    for j in i + 1..n {
                        let mut wj = v.clone();
                        wj[j] += 1;
                        if wj[j] > self.shape.hi[j] || w[i] > self.shape.hi[i] {
                            continue;
                        }
                        let (Some(eji), Some(ej), Some(eij)) = (
                            self.edge(&w, j),
                            self.edge(&v, j),
                            self.edge(&wj, i),
                        ) else {
                            continue;
                        };
                        if ModuleMap::compose(eji, e) != ModuleMap::compose(eij, ej) {
                            failures.push(WindowFailure::Square {
                                point: v.clone(),
                                i,
                                j,
                            });
                        }
                    }
                }
                if let Some(p) = &self.periods[idx][i] {
                    if !p.is_iso() {
                        failures.push(WindowFailure::PeriodNotIso {
                            point: v.clone(),
                            dir: i,
                        });
                        continue;
                    }
                    let mut d = v.clone();
                    d[i] -= i64::from(self.divisors[i].index);
                    // period naturality against edges
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let mut vj = v.clone();
                        vj[j] += 1;
                        if !self.shape.contains(&vj) {
                            continue;
                        }
                        let (Some(ed), Some(ev), Some(pj)) =
                            (self.edge(&d, j), self.edge(&v, j), self.period(&vj, i))
                        else {
                            continue;
                        };
                        if ModuleMap::compose(ed, p) != ModuleMap::compose(pj, ev) {
                            failures.push(WindowFailure::PeriodEdge {
                                point: v.clone(),
                                i,
                                j,
                            });
                        }
                    }
                    // two periods commute
                    for j in i + 1..n {
                        let mut dj = v.clone();
                        dj[j] -= i64::from(self.divisors[j].index);
                        if !self.shape.contains(&dj) {
                            continue;
                        }
                        let (Some(pdij), Some(pj), Some(pdji)) = (
                            self.period(&d, j),
                            self.period(&v, j),
                            self.period(&dj, i),
                        ) else {
                            continue;
                        };
                        if ModuleMap::compose(pdij, p) != ModuleMap::compose(pdji, pj) {
                            failures.push(WindowFailure::PeriodPeriod {
                                point: v.clone(),
                                i,
                                j,
                            });
                        }
                    }
                }
            }
        }
        // section power law
        for idx in 0..self.shape.point_count() {
            let v = self.shape.point(idx);
            for dir in 0..n {
                let r = i64::from(self.divisors[dir].index);
                let mut top = v.clone();
                top[dir] += r;
                if !self.shape.contains(&top) {
                    continue;
                }
                let mut acc = ModuleMap::identity(self.value(&v));
                let mut cur = v.clone();
                let mut ok = true;
                for _ in 0..r {
                    match self.edge(&cur, dir) {
                        Some(e) => acc = ModuleMap::compose(e, &acc),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                    cur[dir] += 1;
                }
                if !ok {
                    continue;
                }
                let Some(p) = self.period(&top, dir) else {
                    continue;
                };
                let around = ModuleMap::compose(p, &acc);
                let target = ModuleMap::mult_by(self.value(&v), &self.divisors[dir].section);
                if around != target {
                    failures.push(WindowFailure::SectionPower {
                        point: v.clone(),
                        dir,
                    });
                }
            }
        }
        failures
    }

    /// Restriction of the window back to the box: values and edges inside,
    /// pseudo-period maps from the stored periods on the top faces.
    pub fn truncate(&self) -> Result<ExtendablePair, PairReport> {
        let n = self.shape.dim();
        let r: Vec<u32> = self.divisors.iter().map(|d| d.index).collect();
        for i in 0..n {
            assert!(
                self.shape.lo[i] <= 0 && self.shape.hi[i] >= i64::from(r[i]),
                "window must cover the box"
            );
        }
        let bx = BoxPoset::new(r.clone());
        let mut objects = Vec::with_capacity(bx.point_count());
        let mut edges: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
        let mut rho: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
        for idx in 0..bx.point_count() {
            let a = bx.point(idx);
            let v: Vec<i64> = a.iter().map(|&x| i64::from(x)).collect();
            objects.push(self.value(&v).clone());
            let mut erow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            let mut rrow: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
            for dir in 0..n {
                erow.push(if bx.has_edge(&a, dir) {
                    self.edge(&v, dir).cloned()
                } else {
                    None
                });
                rrow.push(if a[dir] == r[dir] {
                    self.period(&v, dir).cloned()
                } else {
                    None
                });
            }
            edges.push(erow);
            rho.push(rrow);
        }
        let diagram = BoxDiagram::new(self.ring.clone(), bx, objects, edges).map_err(|d| {
            PairReport {
                failures: d.failures.into_iter().map(PairFailure::Diagram).collect(),
            }
        })?;
        ExtendablePair::new(self.divisors.clone(), diagram, rho)
    }
}

/// Box-graded module data over the local root algebra: graded pieces on the
/// box, multiplication by the adjoined root along each direction, and the
/// invertible deck transformations from the bottom to the top face.
#[derive(Clone, Debug)]
pub struct GradedBoxModule {
    pub divisors: Vec<DivisorTriple>,
    pub pieces: Vec<FpModule>,
    /// `s_edges[point_idx][dir]`: multiplication by the root generator.
    pub s_edges: Vec<Vec<Option<ModuleMap>>>,
    /// `t_maps[point_idx][dir]`: for points with `u_dir = 0`, the invertible
    /// map `M_u -> M_{u + r_dir e_dir}`.
    pub t_maps: Vec<Vec<Option<ModuleMap>>>,
}

/// Build the extendable pair of a box-graded module: objects are the graded
/// pieces, edges the root multiplication, pseudo-period maps the inverses of
/// the deck transformations.
pub fn pair_from_graded(g: &GradedBoxModule, ring: &BaseRing) -> Result<ExtendablePair, Error> {
    let r: Vec<u32> = g.divisors.iter().map(|d| d.index).collect();
    let bx = BoxPoset::new(r.clone());
    let n = bx.dim();
    assert_eq!(g.pieces.len(), bx.point_count());
    let diagram = BoxDiagram::new(
        ring.clone(),
        bx.clone(),
        g.pieces.clone(),
        g.s_edges.clone(),
    )
    .map_err(|rep| Error::InvalidInput(format!("graded pieces do not form a diagram: {rep:?}")))?;
    let mut rho: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
    for idx in 0..bx.point_count() {
        let a = bx.point(idx);
        let mut row: Vec<Option<ModuleMap>> = Vec::with_capacity(n);
        for dir in 0..n {
            if a[dir] != r[dir] {
                row.push(None);
                continue;
            }
            let mut bottom = a.clone();
            bottom[dir] = 0;
            let t = g.t_maps[bx.index(&bottom)][dir]
                .as_ref()
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "missing deck transformation at {bottom:?} direction {dir}"
                    ))
                })?;
            let inv = t.inverse().map_err(|_| {
                Error::NotInvertible(format!(
                    "deck transformation at {bottom:?} direction {dir}"
                ))
            })?;
            row.push(Some(inv));
        }
        rho.push(row);
    }
    ExtendablePair::new(g.divisors.clone(), diagram, rho)
        .map_err(|rep| Error::InvalidInput(format!("graded data violates the pair axioms: {rep:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;
    use crate::scalar::FieldSpec;

    fn line() -> BaseRing {
        BaseRing::poly_line(FieldSpec::Q)
    }

    /// The constant pair on k[x] with section x and index 2: edges identity
    /// then multiplication by x, pseudo-period the identity.
    fn worked_pair() -> ExtendablePair {
        let ring = line();
        let f = FieldSpec::Q;
        let free = FpModule::free(&ring, 1);
        let bx = BoxPoset::new(vec![2]);
        let objects = vec![free.clone(); 3];
        let e0 = ModuleMap::identity(&free);
        let e1 = ModuleMap::mult_by(&free, &f.p_x());
        let edges = vec![
            vec![Some(e0)],
            vec![Some(e1)],
            vec![None],
        ];
        let diagram = BoxDiagram::new(ring, bx, objects, edges).unwrap();
        let rho = vec![
            vec![None],
            vec![None],
            vec![Some(ModuleMap::identity(&free))],
        ];
        ExtendablePair::new(
            vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            diagram,
            rho,
        )
        .unwrap()
    }

    #[test]
    fn worked_pair_satisfies_ex1() {
        let p = worked_pair();
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn broken_edge_fails_ex1_at_origin() {
        let ring = line();
        let f = FieldSpec::Q;
        let free = FpModule::free(&ring, 1);
        let bx = BoxPoset::new(vec![2]);
        let objects = vec![free.clone(); 3];
        let edges = vec![
            vec![Some(ModuleMap::identity(&free))],
            vec![Some(ModuleMap::identity(&free))],
            vec![None],
        ];
        let diagram = BoxDiagram::new(ring, bx, objects, edges).unwrap();
        let rho = vec![
            vec![None],
            vec![None],
            vec![Some(ModuleMap::identity(&free))],
        ];
        let report = ExtendablePair::new(
            vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            diagram,
            rho,
        )
        .unwrap_err();
        assert!(report
            .failures
            .contains(&PairFailure::Ex1 { point: vec![0], dir: 0 }));
    }

    #[test]
    fn evaluate_division() {
        let p = worked_pair();
        let v = p.evaluate(&[5]);
        assert_eq!(v.twist, vec![2]);
        assert_eq!(v.module, FpModule::free(p.ring(), 1));
        let w = p.evaluate(&[1]);
        assert_eq!(w.twist, vec![0]);
        let neg = p.evaluate(&[-1]);
        assert_eq!(neg.twist, vec![-1]);
    }

    #[test]
    fn evaluate_edge_wraps_with_section() {
        let p = worked_pair();
        let f = FieldSpec::Q;
        let e = p.evaluate_edge(&[1], 0);
        assert_eq!(e.twist_delta, vec![1]);
        let free = FpModule::free(p.ring(), 1);
        assert_eq!(e.map, ModuleMap::mult_by(&free, &f.p_x()));
    }

    #[test]
    fn edge_power_is_section() {
        let p = worked_pair();
        let f = FieldSpec::Q;
        let free = FpModule::free(p.ring(), 1);
        for v in -2..=4 {
            assert_eq!(
                p.edge_power_composite(&[v], 0),
                ModuleMap::mult_by(&free, &f.p_x())
            );
        }
    }

    #[test]
    fn window_roundtrip_and_checks() {
        let p = worked_pair();
        let w = p.extend_window(&[-2], &[4]);
        assert!(w.check().is_empty());
        let back = w.truncate().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn window_of_invalid_mutation_fails_checks() {
        let p = worked_pair();
        let f = FieldSpec::Q;
        let free = FpModule::free(p.ring(), 1);
        let mut w = p.extend_window(&[-2], &[4]);
        // corrupt one out-of-box edge
        let idx = w.shape.index(&[3]);
        w.edges[idx][0] = Some(ModuleMap::mult_by(&free, &f.p_constant(7)));
        assert!(!w.check().is_empty());
    }

    #[test]
    fn graded_algebra_gives_worked_pair() {
        // the local root algebra itself: pieces free of rank one, root
        // multiplication 1 then x, deck transformation the identity
        let ring = line();
        let f = FieldSpec::Q;
        let free = FpModule::free(&ring, 1);
        let g = GradedBoxModule {
            divisors: vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            pieces: vec![free.clone(); 3],
            s_edges: vec![
                vec![Some(ModuleMap::identity(&free))],
                vec![Some(ModuleMap::mult_by(&free, &f.p_x()))],
                vec![None],
            ],
            t_maps: vec![
                vec![Some(ModuleMap::identity(&free))],
                vec![None],
                vec![None],
            ],
        };
        let p = pair_from_graded(&g, &ring).unwrap();
        assert_eq!(p, worked_pair());
    }

    #[test]
    fn graded_quotient_by_root() {
        // the quotient of the root algebra by its root generator: pieces
        // k[x]/(x), 0, k[x]/(x) with zero multiplication and identity deck
        let ring = line();
        let f = FieldSpec::Q;
        let sky = FpModule::cyclic(&ring, &f.p_x());
        let zero = FpModule::zero(&ring);
        let g = GradedBoxModule {
            divisors: vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            pieces: vec![sky.clone(), zero.clone(), sky.clone()],
            s_edges: vec![
                vec![Some(ModuleMap::zero_map(&sky, &zero))],
                vec![Some(ModuleMap::zero_map(&zero, &sky))],
                vec![None],
            ],
            t_maps: vec![
                vec![Some(ModuleMap::identity(&sky))],
                vec![None],
                vec![None],
            ],
        };
        let p = pair_from_graded(&g, &ring).unwrap();
        assert_eq!(p.diagram().object(&[0]), &sky);
        assert!(p.diagram().object(&[1]).is_zero());
    }

    #[test]
    fn zero_graded_module_gives_zero_pair() {
        let ring = line();
        let f = FieldSpec::Q;
        let zero = FpModule::zero(&ring);
        let g = GradedBoxModule {
            divisors: vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            pieces: vec![zero.clone(); 3],
            s_edges: vec![
                vec![Some(ModuleMap::zero_map(&zero, &zero))],
                vec![Some(ModuleMap::zero_map(&zero, &zero))],
                vec![None],
            ],
            t_maps: vec![
                vec![Some(ModuleMap::identity(&zero))],
                vec![None],
                vec![None],
            ],
        };
        let p = pair_from_graded(&g, &ring).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn noninvertible_deck_rejected() {
        let ring = line();
        let f = FieldSpec::Q;
        let free = FpModule::free(&ring, 1);
        let g = GradedBoxModule {
            divisors: vec![DivisorTriple {
                section: f.p_x(),
                index: 2,
            }],
            pieces: vec![free.clone(); 3],
            s_edges: vec![
                vec![Some(ModuleMap::identity(&free))],
                vec![Some(ModuleMap::mult_by(&free, &f.p_x()))],
                vec![None],
            ],
            t_maps: vec![
                vec![Some(ModuleMap::mult_by(&free, &f.p_x()))],
                vec![None],
                vec![None],
            ],
        };
        assert!(matches!(
            pair_from_graded(&g, &ring),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn coprimality_enforced() {
        let ring = line();
        let f = FieldSpec::Q;
        let ds = vec![
            DivisorTriple {
                section: f.p_x(),
                index: 2,
            },
            DivisorTriple {
                section: f.p_mul(&f.p_x(), &f.p_from_coeffs(&[-1, 1])),
                index: 2,
            },
        ];
        assert!(matches!(
            validate_divisors(&ring, &ds),
            Err(Error::InvalidDivisor(_))
        ));
        let ok = vec![
            DivisorTriple {
                section: f.p_x(),
                index: 2,
            },
            DivisorTriple {
                section: f.p_from_coeffs(&[-1, 1]),
                index: 3,
            },
        ];
        assert!(validate_divisors(&ring, &ok).is_ok());
    }

    #[test]
    fn conjugation_preserves_validity() {
        let p = worked_pair();
        let free = FpModule::free(p.ring(), 1);
        let f = FieldSpec::Q;
        let auto = ModuleMap::mult_by(&free, &f.p_constant(3));
        let autos = vec![auto.clone(), auto.clone(), auto];
        let q = p.conjugate(&autos);
        let report = ExtendablePair::validate(q.divisors(), q.diagram(), q.rho_table());
        assert!(report.is_valid());
        let _ = Mat::zero(0, 0);
    }
}
