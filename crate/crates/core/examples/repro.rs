use rootstack_core::matrix::Mat;
use rootstack_core::ring::{BaseRing, FpModule};
use rootstack_core::samples::{random_module, Rng};
use rootstack_core::scalar::FieldSpec;

fn main() {
    let field = FieldSpec::fp(7);
    let rings = vec![
        BaseRing::field(field),
        BaseRing::poly_line(field),
        BaseRing::squarefree_quotient(field, &field.p_from_coeffs(&[0, 1, 1, 1]))
            .unwrap_or_else(|_| BaseRing::poly_line(field)),
    ];
    let mut rng = Rng::new(41);
    for (ri, ring) in rings.iter().enumerate() {
        for it in 0..25 {
            let m = random_module(ring, &mut rng, 4);
            let (m2, to, from) = FpModule::from_presentation(ring, m.gens(), m.rels());
            if m != m2 {
                println!("ring {ri} iter {it}: module changed");
                return;
            }
            if to != Mat::identity(m.gens(), ring.coefficient_field()) {
                println!("ring {ri} iter {it}: to != id");
                println!("  anns: {:?}", m.annihilators().iter().map(|a| a.to_string()).collect::<Vec<_>>());
                for i in 0..m.rels().rows {
                    for j in 0..m.rels().cols {
                        println!("  rel[{i}][{j}] = {}", m.rels().at(i, j));
                    }
                }
                println!("  to = {to:?}");
                return;
            }
            let _ = from;
        }
    }
    println!("no divergence found");
}
