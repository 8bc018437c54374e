//! Deterministic seeded sample builders for property sweeps: random modules,
//! maps, valid pairs, leaf families, and graded modules. All randomness runs
//! through a self-contained SplitMix64 stream so results are reproducible
//! across platforms from a single seed.

use crate::diagram::{BoxDiagram, BoxPoset};
use crate::equivariant::{GradedLineModule, GradedMap};
use crate::localize::{d_adjoint, interior_points, leaf_ring, FaceIndex, LeafDiagram};
use crate::matrix::Mat;
use crate::parabolic::{DivisorTriple, ExtendablePair};
use crate::poly::Poly;
use crate::ring::{BaseRing, FpModule, ModuleMap, RingKind};
use crate::scalar::FieldSpec;

/// SplitMix64 stream.
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    pub fn i64_in(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

pub fn random_poly(field: &FieldSpec, rng: &mut Rng, max_deg: usize) -> Poly {
    let deg = rng.below(max_deg as u64 + 1) as usize;
    let coeffs: Vec<i64> = (0..=deg).map(|_| rng.i64_in(-3, 3)).collect();
    field.p_from_coeffs(&coeffs)
}

/// A random canonical module from a random presentation.
pub fn random_module(ring: &BaseRing, rng: &mut Rng, max_gens: usize) -> FpModule {
    let gens = rng.below(max_gens as u64 + 1) as usize;
    if gens == 0 {
        return FpModule::zero(ring);
    }
    let rels = rng.below(gens as u64 + 2) as usize;
    let max_deg = match ring.kind() {
        RingKind::Field => 0,
        _ => 2,
    };
    let mat = Mat::from_fn(gens, rels, |_, _| {
        if rng.chance(1, 3) {
            Poly::zero()
        } else {
            ring.reduce(&random_poly(ring.coefficient_field(), rng, max_deg))
        }
    });
    FpModule::from_presentation(ring, gens, &mat).0
}

/// A random well-defined map, built entrywise against the diagonal
/// annihilator structure of the canonical presentations.
pub fn random_map(src: &FpModule, tgt: &FpModule, rng: &mut Rng) -> ModuleMap {
    let ring = src.ring().clone();
    let field = ring.coefficient_field().clone();
    let modulus = ring.modulus().cloned();
    let hom_entry = |tgt_ann: &Poly, src_ann: &Poly, rng: &mut Rng| -> Poly {
        let rand = random_poly(&field, rng, 1);
        if src_ann.is_zero() {
            return ring.reduce(&rand);
        }
        let effective_tgt = if tgt_ann.is_zero() {
            match ring.kind() {
                RingKind::Field => return rand,
                RingKind::PolyLine => return Poly::zero(),
                RingKind::SquarefreeQuotient => modulus.clone().unwrap(),
            }
        } else {
            tgt_ann.clone()
        };
        let g = field.p_gcd(&effective_tgt, src_ann);
        let (factor, _) = field.p_divmod(&effective_tgt, &g);
        ring.reduce(&field.p_mul(&factor, &rand))
    };
    let mat = Mat::from_fn(tgt.gens(), src.gens(), |i, j| {
        hom_entry(&tgt.annihilators()[i], &src.annihilators()[j], rng)
    });
    ModuleMap::new(src.clone(), tgt.clone(), mat).expect("entrywise construction is well defined")
}

/// A random invertible endomorphism: a unit scalar plus a strictly
/// triangular well-defined perturbation.
pub fn random_automorphism(m: &FpModule, rng: &mut Rng) -> ModuleMap {
    let ring = m.ring().clone();
    let field = ring.coefficient_field().clone();
    let unit = loop {
        let c = field.from_i64(rng.i64_in(-3, 3));
        if !field.is_zero(&c) {
            break c;
        }
    };
    let base = ModuleMap::mult_by(m, &Poly::constant(unit, &field));
    let n = m.gens();
    let modulus = ring.modulus().cloned();
    let mat = Mat::from_fn(n, n, |i, j| {
        if i >= j {
            return Poly::zero();
        }
        let (tgt_ann, src_ann) = (&m.annihilators()[i], &m.annihilators()[j]);
        let rand = random_poly(&field, rng, 1);
        if src_ann.is_zero() {
            return ring.reduce(&rand);
        }
        let effective_tgt = if tgt_ann.is_zero() {
            match ring.kind() {
                RingKind::Field => return rand,
                RingKind::PolyLine => return Poly::zero(),
                RingKind::SquarefreeQuotient => modulus.clone().unwrap(),
            }
        } else {
            tgt_ann.clone()
        };
        let g = field.p_gcd(&effective_tgt, src_ann);
        let (factor, _) = field.p_divmod(&effective_tgt, &g);
        ring.reduce(&field.p_mul(&factor, &rand))
    });
    let nil = ModuleMap::new(m.clone(), m.clone(), mat).expect("triangular perturbation");
    base.add(&nil)
}

/// Random pairwise-coprime divisor data over the base.
pub fn random_divisors(ring: &BaseRing, rng: &mut Rng, n: usize, max_index: u32) -> Vec<DivisorTriple> {
    let field = ring.coefficient_field().clone();
    let pool: Vec<Poly> = match ring.kind() {
        RingKind::PolyLine => vec![
            field.p_x(),
            field.p_from_coeffs(&[-1, 1]),
            field.p_from_coeffs(&[1, 1]),
            field.p_from_coeffs(&[-2, 1]),
            field.p_from_coeffs(&[2, 1]),
        ],
        _ => vec![],
    };
    let mut available: Vec<usize> = (0..pool.len()).collect();
    (0..n)
        .map(|_| {
            let index = 1 + rng.below(max_index as u64) as u32;
            let index = if field.characteristic() != 0 {
                // keep the index prime to the characteristic
                let p = field.characteristic();
                let mut i = index;
                while u64::from(i) % p == 0 {
                    i += 1;
                }
                i
            } else {
                index
            };
            let section = if available.is_empty() || rng.chance(1, 2) {
                Poly::zero()
            } else {
                let k = rng.below(available.len() as u64) as usize;
                pool[available.remove(k)].clone()
            };
            DivisorTriple { section, index }
        })
        .collect()
}

/// A random commuting diagram on a box: a sum of upper-set cones with random
/// modules.
pub fn random_box_diagram(
    ring: &BaseRing,
    bx: &BoxPoset,
    rng: &mut Rng,
    cones: usize,
) -> BoxDiagram {
    let parts: Vec<BoxDiagram> = (0..cones.max(1))
        .map(|_| {
            let apex = bx.point(rng.below(bx.point_count() as u64) as usize);
            let m = random_module(ring, rng, 2);
            cone_diagram(ring, bx, &apex, &m)
        })
        .collect();
    let refs: Vec<&BoxDiagram> = parts.iter().collect();
    BoxDiagram::direct_sum(&refs)
}

/// The diagram that is `m` on the upper set of `apex` (identity edges) and
/// zero elsewhere.
pub fn cone_diagram(ring: &BaseRing, bx: &BoxPoset, apex: &[u32], m: &FpModule) -> BoxDiagram {
    let zero = FpModule::zero(ring);
    let above = |u: &[u32]| u.iter().zip(apex).all(|(a, b)| a >= b);
    let objects: Vec<FpModule> = (0..bx.point_count())
        .map(|i| {
            if above(&bx.point(i)) {
                m.clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    let edges = (0..bx.point_count())
        .map(|i| {
            let u = bx.point(i);
            (0..bx.dim())
                .map(|d| {
                    bx.has_edge(&u, d).then(|| {
                        let v = bx.step(&u, d);
                        let (s, t) = (&objects[bx.index(&u)], &objects[bx.index(&v)]);
                        if above(&u) && above(&v) {
                            ModuleMap::identity(m)
                        } else {
                            ModuleMap::zero_map(s, t)
                        }
                    })
                })
                .collect()
        })
        .collect();
    BoxDiagram::new(ring.clone(), bx.clone(), objects, edges).expect("cone diagram is valid")
}

/// A random leaf family at a given level: cone-style diagrams over the
/// divisor intersections.
pub fn random_leaf_family(
    base: &BaseRing,
    divisors: &[DivisorTriple],
    level: usize,
    rng: &mut Rng,
) -> Vec<LeafDiagram> {
    let n = divisors.len();
    FaceIndex::subsets(n, level)
        .into_iter()
        .map(|t| {
            let (ring, _) = leaf_ring(base, divisors, &t);
            let r_sub: Vec<u32> = t.dirs().iter().map(|&i| divisors[i].index).collect();
            let pts = interior_points(&r_sub);
            if pts.is_empty() || ring.is_zero_ring() {
                return LeafDiagram::zero(t, r_sub, ring);
            }
            // sum of interior cones
            let zero = FpModule::zero(&ring);
            let mut objects: Vec<FpModule> = vec![zero; pts.len()];
            let mut ids: Vec<Option<FpModule>> = vec![None; pts.len()];
            for _ in 0..=rng.below(2) {
                let apex = pts[rng.below(pts.len() as u64) as usize].clone();
                let m = random_module(&ring, rng, 2);
                for (i, w) in pts.iter().enumerate() {
                    if w.iter().zip(&apex).all(|(a, b)| a >= b) {
                        let (s, _, _) = FpModule::direct_sum(&[&objects[i], &m]);
                        objects[i] = s;
                        ids[i] = Some(m.clone());
                    }
                }
            }
            // rebuild as plain cones so the edges can be reconstructed
            // deterministically: identity where both endpoints carry the
            // same cone stack, zero into fresh stacks
            let mut edges: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(pts.len());
            for (i, w) in pts.iter().enumerate() {
                let mut row = Vec::with_capacity(r_sub.len());
                for d in 0..r_sub.len() {
                    if w[d] + 1 > r_sub[d] - 1 {
                        row.push(None);
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2[d] += 1;
                    let j = pts.iter().position(|p| p == &w2).unwrap();
                    row.push(Some(if objects[i] == objects[j] {
                        ModuleMap::identity(&objects[i])
                    } else {
                        ModuleMap::zero_map(&objects[i], &objects[j])
                    }));
                }
                edges.push(row);
            }
            let _ = ids;
            LeafDiagram::new(t, r_sub, ring, objects, edges)
                .expect("cone leaf diagram is valid")
        })
        .collect()
}

/// A random valid pair: a direct sum of extension pairs and adjoint images,
/// conjugated pointwise by random automorphisms so presentations are
/// scrambled while validity is preserved.
pub fn random_pair(base: &BaseRing, divisors: &[DivisorTriple], rng: &mut Rng) -> ExtendablePair {
    let n = divisors.len();
    let mut parts: Vec<ExtendablePair> = Vec::new();
    parts.push(crate::localize::pi_upper(
        &random_module(base, rng, 2),
        divisors,
    ));
    if rng.chance(2, 3) {
        let level = 1 + rng.below(n as u64) as usize;
        let leaves = random_leaf_family(base, divisors, level, rng);
        parts.push(d_adjoint(&leaves, base, divisors).expect("random leaves are supported"));
    }
    if rng.chance(1, 3) {
        parts.push(crate::localize::pi_upper(
            &random_module(base, rng, 1),
            divisors,
        ));
    }
    let refs: Vec<&ExtendablePair> = parts.iter().collect();
    let pair = ExtendablePair::direct_sum(&refs);
    let bx = pair.diagram().poset().clone();
    let autos: Vec<ModuleMap> = (0..bx.point_count())
        .map(|i| random_automorphism(pair.diagram().object_at(i), rng))
        .collect();
    pair.conjugate(&autos)
}

/// The pair concentrated on one residue class of the box: the coefficient
/// module sits at points congruent to `w`, all edges vanish, and the
/// pseudo-period maps are identities. Valid over zero sections.
pub fn skyscraper_pair(
    base: &BaseRing,
    divisors: &[DivisorTriple],
    w: &[u32],
) -> ExtendablePair {
    assert!(divisors.iter().all(|d| d.section.is_zero()));
    let r: Vec<u32> = divisors.iter().map(|d| d.index).collect();
    assert!(w.iter().zip(&r).all(|(a, b)| a < b));
    let bx = BoxPoset::new(r.clone());
    let n = bx.dim();
    let one = FpModule::free(base, 1);
    let zero = FpModule::zero(base);
    let on_support = |u: &[u32]| -> bool {
        u.iter()
            .zip(w)
            .zip(&r)
            .all(|((&ui, &wi), &ri)| ui == wi || (wi == 0 && ui == ri))
    };
    let objects: Vec<FpModule> = (0..bx.point_count())
        .map(|i| {
            if on_support(&bx.point(i)) {
                one.clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    let mut edges: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
    let mut rho: Vec<Vec<Option<ModuleMap>>> = Vec::with_capacity(bx.point_count());
    for i in 0..bx.point_count() {
        let u = bx.point(i);
        let mut erow = Vec::with_capacity(n);
        let mut rrow = Vec::with_capacity(n);
        for dir in 0..n {
            erow.push(bx.has_edge(&u, dir).then(|| {
                let v = bx.step(&u, dir);
                ModuleMap::zero_map(&objects[i], &objects[bx.index(&v)])
            }));
            rrow.push((u[dir] == r[dir]).then(|| {
                let mut down = u.clone();
                down[dir] = 0;
                let (s, t) = (&objects[i], &objects[bx.index(&down)]);
                if s.is_zero() || t.is_zero() {
                    ModuleMap::zero_map(s, t)
                } else {
                    ModuleMap::identity(s)
                }
            }));
        }
        edges.push(erow);
        rho.push(rrow);
    }
    let diagram = BoxDiagram::new_internal(base.clone(), bx, objects, edges);
    ExtendablePair::new_internal(divisors.to_vec(), diagram, rho)
}

/// Piece entry of the graded map multiplying the degree-`a` free generator
/// into the degree-`b` one by `t^{(a-b) mod r} h(x)`.
fn graded_hom_entry(r: u32, a: u32, b: u32, h: &Poly, j: u32, field: &FieldSpec) -> Poly {
    let r64 = i64::from(r);
    let shift = (i64::from(a) - i64::from(b)).rem_euclid(r64);
    let src_off = (i64::from(j) - i64::from(a)).rem_euclid(r64);
    let tgt_off = (i64::from(j) - i64::from(b)).rem_euclid(r64);
    let eps = (src_off + shift - tgt_off) / r64;
    debug_assert!(eps == 0 || eps == 1);
    if eps == 0 {
        h.clone()
    } else {
        field.p_mul(h, &field.p_x())
    }
}

/// A random graded module: the cokernel of a random map between graded free
/// modules, plus occasional skyscraper summands.
pub fn random_graded_module(ring: &BaseRing, r: u32, rng: &mut Rng) -> GradedLineModule {
    let field = ring.coefficient_field().clone();
    let tgt_count = 1 + rng.below(2) as usize;
    let src_count = rng.below(tgt_count as u64 + 1) as usize;
    let tgt_degrees: Vec<u32> = (0..tgt_count)
        .map(|_| rng.below(u64::from(r)) as u32)
        .collect();
    let src_degrees: Vec<u32> = (0..src_count)
        .map(|_| rng.below(u64::from(r)) as u32)
        .collect();
    let f0 = GradedLineModule::free_sum(ring, r, &tgt_degrees);
    let f1 = GradedLineModule::free_sum(ring, r, &src_degrees);
    let entries: Vec<Vec<Poly>> = (0..tgt_count)
        .map(|_| {
            (0..src_count)
                .map(|_| {
                    if rng.chance(1, 3) {
                        Poly::zero()
                    } else {
                        random_poly(&field, rng, 2)
                    }
                })
                .collect()
        })
        .collect();
    let maps: Vec<ModuleMap> = (0..r)
        .map(|j| {
            let mat = Mat::from_fn(tgt_count, src_count, |bi, ai| {
                if entries[bi][ai].is_zero() {
                    Poly::zero()
                } else {
                    graded_hom_entry(r, src_degrees[ai], tgt_degrees[bi], &entries[bi][ai], j, &field)
                }
            });
            ModuleMap::new(
                f1.piece(j as usize).clone(),
                f0.piece(j as usize).clone(),
                mat,
            )
            .expect("free piece map")
        })
        .collect();
    let f = GradedMap::new(f1, f0, maps).expect("graded free map");
    let (mut m, _) = f.cokernel().expect("cokernel of a graded map");
    if rng.chance(1, 3) {
        let c = rng.below(u64::from(r)) as u32;
        let sky = GradedLineModule::origin_skyscraper(ring, r, c);
        m = GradedLineModule::direct_sum(&[&m, &sky]);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::{character_class, character_class_by_filtration};
    use crate::parabolic::ExtendablePair as EP;

    #[test]
    fn rng_is_deterministic() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn random_maps_are_well_defined() {
        let field = FieldSpec::Q;
        let line = BaseRing::poly_line(field);
        let mut rng = Rng::new(7);
        for _ in 0..30 {
            let a = random_module(&line, &mut rng, 3);
            let b = random_module(&line, &mut rng, 3);
            let _ = random_map(&a, &b, &mut rng); // construction validates
        }
    }

    #[test]
    fn random_automorphism_is_invertible() {
        let field = FieldSpec::fp(5);
        let line = BaseRing::poly_line(field);
        let mut rng = Rng::new(11);
        for _ in 0..20 {
            let m = random_module(&line, &mut rng, 3);
            let a = random_automorphism(&m, &mut rng);
            assert!(a.is_iso());
        }
    }

    #[test]
    fn random_pairs_validate() {
        let field = FieldSpec::fp(5);
        let line = BaseRing::poly_line(field);
        let mut rng = Rng::new(3);
        for _ in 0..10 {
            let ds = random_divisors(&line, &mut rng, 2, 3);
            let p = random_pair(&line, &ds, &mut rng);
            let report = EP::validate(p.divisors(), p.diagram(), p.rho_table());
            assert!(report.is_valid());
        }
    }

    #[test]
    fn random_graded_modules_validate_and_agree() {
        let line = BaseRing::poly_line(FieldSpec::Q);
        let mut rng = Rng::new(19);
        for _ in 0..15 {
            let m = random_graded_module(&line, 3, &mut rng);
            let a = character_class(&m).unwrap();
            let b = character_class_by_filtration(&m).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn skyscrapers_are_valid_pairs() {
        let base = BaseRing::field(FieldSpec::Q);
        let ds = vec![
            DivisorTriple {
                section: Poly::zero(),
                index: 2,
            },
            DivisorTriple {
                section: Poly::zero(),
                index: 3,
            },
        ];
        for w in [[0u32, 0], [1, 2], [0, 1]] {
            let p = skyscraper_pair(&base, &ds, &w);
            let report = EP::validate(p.divisors(), p.diagram(), p.rho_table());
            assert!(report.is_valid());
        }
    }
}
