//! Independent oracles for the module layer: residue-field evaluation for
//! quotient-ring computations, explicit Bezout witnesses, explicit
//! filtrations, and randomized exactness sweeps.

use rootstack_core::matrix::{rank, ElimCtx, Mat};
use rootstack_core::poly::Poly;
use rootstack_core::ring::{devissage_class, BaseRing, FpModule, ModuleMap};
use rootstack_core::samples::{random_map, random_module, Rng};
use rootstack_core::scalar::FieldSpec;

fn q() -> FieldSpec {
    FieldSpec::Q
}

/// Oracle: over a squarefree quotient the ring splits into residue fields;
/// the kernel of an endomorphism has, at each residue field, the dimension
/// of the kernel of the evaluated scalar matrix.
#[test]
fn kernel_over_quotient_matches_residue_evaluation() {
    let field = q();
    let modulus = field.p_from_coeffs(&[-1, 0, 1]); // x^2 - 1
    let ring = BaseRing::squarefree_quotient(field.clone(), &modulus).unwrap();
    let free2 = FpModule::free(&ring, 2);
    // multiplication matrix [[x-1, 0], [1, x-1]]
    let mat = Mat::from_rows(vec![
        vec![field.p_from_coeffs(&[-1, 1]), Poly::zero()],
        vec![field.p_one(), field.p_from_coeffs(&[-1, 1])],
    ]);
    let f = ModuleMap::new(free2.clone(), free2, mat.clone()).unwrap();
    let (k, incl) = f.kernel();
    // oracle: evaluate the matrix at the two roots of the modulus
    let mut expected_dims = Vec::new();
    for root in [1i64, -1] {
        let eval = Mat::from_fn(2, 2, |i, j| {
            Poly::constant(field.p_eval(mat.at(i, j), &field.from_i64(root)), &field)
        });
        let rk = rank(&ElimCtx::Field(&field), &eval);
        expected_dims.push(2 - rk as i64);
    }
    // factor order: x - 1 (root 1), then x + 1 (root -1)
    assert_eq!(k.g0_class().vector(), &expected_dims[..]);
    assert!(incl.is_injective());
}

/// Oracle for the worked kernel example: multiplication by x - 1 on the
/// quotient by x^2 - 1 has a one-dimensional kernel at the root 1.
#[test]
fn kernel_of_section_multiplication_is_residue_line() {
    let field = q();
    let modulus = field.p_from_coeffs(&[-1, 0, 1]);
    let ring = BaseRing::squarefree_quotient(field.clone(), &modulus).unwrap();
    let m = FpModule::free(&ring, 1);
    let f = ModuleMap::mult_by(&m, &field.p_from_coeffs(&[-1, 1]));
    let (k, _) = f.kernel();
    // brute force through the two residue evaluations
    let dims: Vec<i64> = [1i64, -1]
        .iter()
        .map(|&root| {
            let v = field.p_eval(&field.p_from_coeffs(&[-1, 1]), &field.from_i64(root));
            i64::from(field.is_zero(&v))
        })
        .collect();
    assert_eq!(k.g0_class().vector(), &dims[..]);
}

/// Oracle: an explicit Bezout combination witnesses that (x, x - 1) is the
/// unit ideal, so the pairing map is onto.
#[test]
fn bezout_cokernel_vanishes() {
    let field = q();
    let ring = BaseRing::poly_line(field.clone());
    let a = field.p_x();
    let b = field.p_from_coeffs(&[-1, 1]);
    let (g, s, t) = field.p_xgcd(&a, &b);
    assert_eq!(g, field.p_one());
    assert_eq!(
        field.p_add(&field.p_mul(&s, &a), &field.p_mul(&t, &b)),
        field.p_one()
    );
    let src = FpModule::free(&ring, 2);
    let tgt = FpModule::free(&ring, 1);
    let f = ModuleMap::new(src, tgt, Mat::from_rows(vec![vec![a, b]])).unwrap();
    assert!(f.cokernel().0.is_zero());
}

/// Oracle: the explicit two-step filtration of the length-two thickening.
#[test]
fn devissage_matches_explicit_filtration() {
    let field = q();
    let ring = BaseRing::poly_line(field.clone());
    let x = field.p_x();
    let m = FpModule::cyclic(&ring, &field.p_from_coeffs(&[0, 0, 1])); // R/(x^2)
    // the submodule generated by x
    let gens = Mat::from_rows(vec![vec![x.clone()]]);
    let (xm, incl) = m.submodule(&gens);
    let (quot, _) = incl.cokernel();
    let sky = FpModule::cyclic(&ring, &x);
    assert_eq!(xm, sky, "middle layer of the filtration");
    assert_eq!(quot, sky, "top layer of the filtration");
    // so the class on the divisor is 1 + 1
    assert_eq!(devissage_class(&m, &x).unwrap().vector(), &[2]);
}

#[test]
fn devissage_agrees_with_class_when_annihilated() {
    let field = q();
    let line = BaseRing::poly_line(field.clone());
    let s = field.p_mul(&field.p_x(), &field.p_from_coeffs(&[-1, 1])); // x(x-1)
    let quot = BaseRing::squarefree_quotient(field.clone(), &s).unwrap();
    let mut rng = Rng::new(31);
    for _ in 0..25 {
        let mz = random_module(&quot, &mut rng, 3);
        let (mx, _, _) = mz.pushforward(&line, &s);
        let dev = devissage_class(&mx, &s).unwrap();
        assert_eq!(dev.vector(), mz.g0_class().vector());
    }
}

#[test]
fn devissage_additive_in_the_module() {
    let field = q();
    let line = BaseRing::poly_line(field.clone());
    let x = field.p_x();
    let mut rng = Rng::new(77);
    for _ in 0..20 {
        // random x-power torsion modules
        let e1 = 1 + rng.below(3) as i64;
        let e2 = 1 + rng.below(3) as i64;
        let xa = field.p_from_coeffs(&(0..=e1).map(|i| i64::from(i == e1)).collect::<Vec<_>>());
        let xb = field.p_from_coeffs(&(0..=e2).map(|i| i64::from(i == e2)).collect::<Vec<_>>());
        let a = FpModule::cyclic(&line, &xa);
        let b = FpModule::cyclic(&line, &xb);
        let (s, _, _) = FpModule::direct_sum(&[&a, &b]);
        let total = devissage_class(&s, &x).unwrap();
        let sum = devissage_class(&a, &x)
            .unwrap()
            .add(&devissage_class(&b, &x).unwrap());
        assert_eq!(total, sum);
    }
}

/// The four-term sequence around a map is exact, on seeded random maps over
/// all three base kinds.
#[test]
fn kernel_cokernel_sequences_are_exact() {
    let field_q = q();
    let field_p = FieldSpec::fp(5);
    let rings = vec![
        BaseRing::field(field_q),
        BaseRing::poly_line(field_q),
        BaseRing::squarefree_quotient(field_q, &field_q.p_from_coeffs(&[0, -1, 0, 1])).unwrap(),
        BaseRing::field(field_p),
        BaseRing::poly_line(field_p),
    ];
    let mut rng = Rng::new(5);
    for ring in &rings {
        for _ in 0..15 {
            let a = random_module(ring, &mut rng, 3);
            let b = random_module(ring, &mut rng, 3);
            let f = random_map(&a, &b, &mut rng);
            let (_, incl) = f.kernel();
            let (_, proj) = f.cokernel();
            assert!(ModuleMap::compose(&f, &incl).is_zero_map());
            assert!(ModuleMap::compose(&proj, &f).is_zero_map());
            assert!(incl.is_injective());
            assert!(proj.is_surjective());
            // image of the inclusion is the kernel of f in the strong sense:
            // the two submodules factor through each other
            let (_, im_incl) = f.image();
            let (_, kp_incl) = proj.kernel();
            assert!(im_incl.factor_through(&kp_incl).is_some());
            assert!(kp_incl.factor_through(&im_incl).is_some());
        }
    }
}

/// Classes add along random short exact sequences built from random maps.
#[test]
fn g0_additive_on_short_exact_sequences() {
    let field = q();
    let rings = vec![
        BaseRing::field(field),
        BaseRing::poly_line(field),
        BaseRing::squarefree_quotient(field, &field.p_from_coeffs(&[-1, 0, 1])).unwrap(),
    ];
    let mut rng = Rng::new(23);
    for ring in &rings {
        for _ in 0..20 {
            let a = random_module(ring, &mut rng, 3);
            let b = random_module(ring, &mut rng, 3);
            let f = random_map(&a, &b, &mut rng);
            let (k, _) = f.kernel();
            let (im, _) = f.image();
            // 0 -> ker f -> A -> im f -> 0
            let lhs = a.g0_class();
            let rhs = k.g0_class().add(&im.g0_class());
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn canonical_form_idempotent_on_random_presentations() {
    let field = FieldSpec::fp(7);
    let rings = vec![
        BaseRing::field(field),
        BaseRing::poly_line(field),
        BaseRing::squarefree_quotient(field, &field.p_from_coeffs(&[0, 1, 1, 1]))
            .unwrap_or_else(|_| BaseRing::poly_line(field)),
    ];
    let mut rng = Rng::new(41);
    for ring in &rings {
        for _ in 0..25 {
            let m = random_module(ring, &mut rng, 4);
            let (m2, to, from) = FpModule::from_presentation(ring, m.gens(), m.rels());
            assert_eq!(m, m2);
            assert_eq!(to, Mat::identity(m.gens(), ring.coefficient_field()));
            assert_eq!(from, Mat::identity(m.gens(), ring.coefficient_field()));
        }
    }
}
