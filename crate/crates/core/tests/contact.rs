use courant_core::algebra::Element;
use courant_core::builders;
use courant_core::coeff::Coeff;
use courant_core::contact::{ContactModel, ContactOptions, Orientation};
use courant_core::courant::{CourantDatum, TestConfig};
use courant_core::linfinity::rw_construct;
use proptest::prelude::*;

fn data() -> Vec<CourantDatum> {
    vec![
        builders::so3(),
        builders::hyperbolic_r2(),
        builders::standard_courant(1),
        builders::dolbeault_standard(1),
    ]
}

fn model(d: &CourantDatum, scale: i64) -> ContactModel {
    let o = Orientation::new(Orientation::default_for(d).n, Coeff::int(scale));
    ContactModel::new(d, o, ContactOptions::default()).unwrap()
}

/// Replaces every jet (and variation) of `lam` by `c` times itself.
fn scale_lam(m: &ContactModel, e: &Element, c: i64) -> Element {
    let jet = m.jet();
    let lam = m.lam_index();
    e.substitute(jet.algebra(), |g| {
        jet.decode(g).filter(|v| v.field == lam).map(|_| jet.algebra().gen(g).scale_rat(c, 1))
    })
}

#[test]
fn master_action_has_degree_three_minus_n() {
    for d in data() {
        // even n > 0 has no volume constant of the right degree
        for n in [0u32, 1, 3] {
            let m = ContactModel::new(&d, Orientation::new(n, Coeff::one()), ContactOptions::default()).unwrap();
            let s = m.master_action();
            if s.is_zero() {
                continue;
            }
            assert_eq!(s.grade().expect("homogeneous").degree, 3 - n as i32, "{} n={n}", d.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn theta_omega_and_action_have_weight_one(s in 1i64..4, c in prop::sample::select(vec![-3i64, -2, -1, 2, 5])) {
        for d in data() {
            let a = model(&d, s);
            let b = model(&d, c * s);
            let pairs = [
                (a.liouville_theta(), b.liouville_theta()),
                (a.symplectic_omega().unwrap(), b.symplectic_omega().unwrap()),
                (a.master_action(), b.master_action()),
            ];
            for (x, y) in pairs {
                prop_assert_eq!(scale_lam(&b, &y, c).render(), x.scale_rat(c, 1).render(), "{}", d.name());
            }
        }
    }

    #[test]
    fn d_of_a_function_is_isotropic(seed in any::<u64>()) {
        for d in data() {
            let ts = d.test_set(&TestConfig { random_sections: 2, degree: 3, seed });
            for (_, f) in &ts.functions {
                let df = d.d_script(f).unwrap();
                prop_assert!(d.pair(&df, &df).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn contact_field_restricts_to_the_rw_field() {
    for d in data() {
        let m = model(&d, 1);
        let x = m.homological_field().unwrap();
        let rw = rw_construct(&d).unwrap().rw_vector_field(m.jet().order()).unwrap();
        for field in 0..=d.rank() as u32 {
            let ours = x.superfield_image(field);
            // lam' = 0: the image does not involve lam at all
            let lam_free = ours.support().iter().all(|&g| m.jet().decode(g).is_none_or(|v| v.field != m.lam_index()));
            assert!(lam_free, "{} field {field}", d.name());
            assert_eq!(ours.render(), rw.q.superfield_image(field).render(), "{} field {field}", d.name());
        }
    }
}

#[test]
fn master_equation_in_density_form() {
    for d in data() {
        let m = model(&d, 1);
        let r = m.verify_cme().unwrap();
        assert!(r.hamiltonian.pass && r.square.is_empty(), "{}", d.name());
        assert!(r.action_invariance.total_derivative, "{}: {:?}", d.name(), r.action_invariance.witness);
        assert!(r.pass());
    }
}

#[test]
fn point_models_satisfy_the_master_equation_exactly() {
    for d in [builders::so3(), builders::hyperbolic_r2()] {
        let m = model(&d, 1);
        assert!(m.point_bracket(&m.master_action()).unwrap().is_zero(), "{}", d.name());
    }
    // the single flip keeps the antisymmetrized bracket Lie, so {S,S}
    // vanishes; the bracket field is no longer Hamiltonian for S
    let broken = model(&builders::so3_broken(), 1);
    let r = broken.verify_cme().unwrap();
    assert!(r.point.unwrap().bracket.is_zero());
    assert!(!r.hamiltonian.pass);
}
