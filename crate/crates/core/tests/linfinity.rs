use courant_core::algebra::Element;
use courant_core::builders;
use courant_core::courant::{CourantDatum, TestConfig};
use courant_core::fixtures::FIXTURES;
use courant_core::linfinity::{antisymmetry_defects, proof_identities, rw_construct, rw_construct_unchecked};
use courant_core::model::parse_model;
use courant_core::module::Section;
use proptest::prelude::*;

fn suite() -> Vec<CourantDatum> {
    vec![
        builders::so3(),
        builders::standard_courant(1),
        builders::standard_courant(2),
        builders::dolbeault_standard(1),
        builders::flat_transitive(1, &builders::so3()).unwrap(),
    ]
}

fn cfg(seed: u64) -> TestConfig {
    TestConfig { random_sections: 3, degree: 2, seed }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn brackets_are_graded_antisymmetric(seed in any::<u64>()) {
        for e in suite() {
            let rw = rw_construct(&e).unwrap();
            let secs: Vec<_> = e.test_set(&cfg(seed)).sections.into_iter().map(|(_, s)| s).collect();
            let defects = antisymmetry_defects(&rw, &secs).unwrap();
            prop_assert!(defects.is_empty(), "{}: {:?}", e.name(), defects);
        }
    }

    #[test]
    fn dorfman_form_of_mu3_differs_by_a_symmetric_term(seed in any::<u64>()) {
        // -1/6 (<[u,v],w> + cyclic) = mu3(u,v,w) - 1/12 (rho(w)<u,v> + rho(u)<v,w> + rho(v)<w,u>)
        for e in [builders::standard_courant(1), builders::standard_courant(2)] {
            let rw = rw_construct(&e).unwrap();
            let ts = e.test_set(&cfg(seed));
            let s: Vec<_> = ts.sections.iter().map(|(_, s)| s).collect();
            for i in 0..s.len() {
                let (u, v, w) = (s[i], s[(i + 1) % s.len()], s[(i + 3) % s.len()]);
                let p = |a: &Section, b: &Section| -> Element { e.pair(a, b).unwrap() };
                let br = |a: &Section, b: &Section| -> Section { e.bracket(a, b).unwrap() };
                let dorfman = (&(&p(&br(u, v), w) + &p(&br(v, w), u)) + &p(&br(w, u), v)).scale_rat(-1, 6);
                let rho = |a: &Section, f: &Element| -> Element { e.anchor_apply(a, f).unwrap() };
                let sym = &(&rho(w, &p(u, v)) + &rho(u, &p(v, w))) + &rho(v, &p(w, u));
                prop_assert_eq!(dorfman, &rw.mu3(u, v, w).unwrap() - &sym.scale_rat(1, 12));
            }
        }
    }

    #[test]
    fn mu2_on_functions_is_half_the_pairing_with_d(seed in any::<u64>()) {
        for e in suite() {
            let rw = rw_construct(&e).unwrap();
            let ts = e.test_set(&cfg(seed));
            for (_, u) in &ts.sections {
                for (_, f) in &ts.functions {
                    let half = e.pair(u, &e.d_script(f).unwrap()).unwrap().scale_rat(1, 2);
                    prop_assert_eq!(rw.mu2_function(u, f).unwrap(), half);
                }
            }
        }
    }

    #[test]
    fn proof_identities_on_random_sections(seed in any::<u64>()) {
        for e in [builders::so3(), builders::standard_courant(1), builders::dolbeault_standard(1)] {
            for v in proof_identities(&e, &TestConfig { random_sections: 8, degree: 2, seed }).unwrap() {
                prop_assert!(v.pass, "{}: {:?}", e.name(), v);
                prop_assert_eq!(v.checked, 8);
            }
        }
    }
}

#[test]
fn mu3_values() {
    let e = builders::so3();
    let rw = rw_construct(&e).unwrap();
    let b = |a| e.basis(a);
    assert_eq!(rw.mu3(&b(0), &b(1), &b(2)).unwrap(), e.algebra().rat(-1, 2));
    assert!(rw.mu3(&b(0), &b(0), &b(1)).unwrap().is_zero());
    let h = builders::hyperbolic_r2();
    let rh = rw_construct(&h).unwrap();
    assert!(rh.mu2(&h.basis(0), &h.basis(1)).unwrap().is_zero());
}

#[test]
fn homological_on_every_shipped_model() {
    for (name, src) in FIXTURES {
        let m = parse_model(src).unwrap();
        if !m.expect_pass {
            assert!(rw_construct(&m.datum).is_err() || m.datum.check_axioms(&cfg(1)).all_pass());
            continue;
        }
        let r = rw_construct(&m.datum).unwrap().check_homological().unwrap();
        assert!(r.pass, "{name}: {:?}", r.failures);
    }
}

#[test]
fn twisted_jacobi_shows_up_in_the_f_component() {
    let r = rw_construct_unchecked(&builders::twisted_standard_r4()).check_homological().unwrap();
    assert!(!r.pass);
    assert!(r.failures.iter().any(|(f, _)| f == "f"), "{:?}", r.failures);
}
