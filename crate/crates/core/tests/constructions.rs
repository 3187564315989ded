use courant_core::algebra::{Derivation, Element};
use courant_core::builders;
use courant_core::cdga::Cdga;
use courant_core::coeff::{CoefficientField, Coeff};
use courant_core::constructions::*;
use courant_core::courant::{CourantDatum, TestConfig};
use courant_core::error::Error;
use courant_core::module::Section;
use proptest::prelude::*;

fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Coeff>> {
    rows.iter().map(|r| r.iter().map(|&x| Coeff::int(x)).collect()).collect()
}

fn hyperbolic_r4() -> CourantDatum {
    builders::abelian("hyperbolic R^4", &int_matrix(&[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]]))
        .unwrap()
}

fn so3_double() -> CourantDatum {
    let mut c = vec![vec![vec![Coeff::zero(); 6]; 6]; 6];
    for off in [0, 3] {
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[off + i][off + j][off + k] = Coeff::one();
            c[off + j][off + i][off + k] = Coeff::int(-1);
        }
    }
    let mut eta = vec![vec![Coeff::zero(); 6]; 6];
    for a in 0..6 {
        eta[a][a] = Coeff::int(if a < 3 { 1 } else { -1 });
    }
    builders::quadratic_lie("so(3) + so(3)", &["a1", "a2", "a3", "b1", "b2", "b3"], &c, &eta).unwrap()
}

#[test]
fn lagrangian_reductions_are_zero() {
    let h = hyperbolic_r4();
    // a = span(e1, e3) is paired with a^dual = span(e2, e4)
    let r = reduce_point(&h, vec![h.basis(0), h.basis(2)]).unwrap();
    assert_eq!(r.datum.rank(), 0);
    assert!(r.all_pass(), "{:?}", r.verdicts);

    let g = so3_double();
    let diag: Vec<Section> = (0..3).map(|i| g.basis(i).add(&g.basis(3 + i))).collect();
    let r = reduce_point(&g, diag).unwrap();
    assert_eq!(r.datum.rank(), 0);
    assert!(r.all_pass(), "{:?}", r.verdicts);
}

#[test]
fn isotropic_line_in_hyperbolic_r4() {
    let h = hyperbolic_r4();
    let r = reduce_point(&h, vec![h.basis(0)]).unwrap();
    assert!(r.all_pass(), "{:?}", r.verdicts);
    // perp of e1 is {v : v2 = 0}; modulo e1 this leaves e3, e4
    assert_eq!(r.representatives, vec![h.basis(2), h.basis(3)]);
    let m = r.datum.pairing().matrix();
    let expect = [[0, 1], [1, 0]];
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(m[i][j].as_constant(), Some(Coeff::int(expect[i][j])));
        }
    }
    assert!(r.datum.bracket(&r.datum.basis(0), &r.datum.basis(1)).unwrap().is_zero());
}

#[test]
fn hypothesis_failures_carry_witnesses() {
    let h = hyperbolic_r4();
    match reduce_point(&h, vec![h.basis(0), h.basis(1)]) {
        Err(Error::Validation { message, witness }) => {
            assert!(message.contains("isotropic"));
            assert_eq!(witness.as_deref(), Some("<l1, l2> = 1"));
        }
        other => panic!("{other:?}"),
    }
    let e = builders::standard_courant(2);
    let x = e.algebra().var("x");
    let l = IsotropicSubmodule::new(e.clone(), vec![e.basis(0), e.basis(1).lmul(&x)]);
    match l {
        Err(Error::Validation { message, witness }) => {
            assert!(message.contains("involutive"));
            assert_eq!(witness.as_deref(), Some("[l1, l2] = del_y"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn dolbeault_reduction_flat_sections() {
    let cfg = TestConfig { random_sections: 4, ..TestConfig::default() };
    let c = reduce_dolbeault(1, 2, &cfg).unwrap();
    assert!(c.all_pass(), "{:?}", c.verdicts);
    let red = &c.reduction;
    // z^k del_z and z^k dz for k <= 2
    assert_eq!(red.flat_dimensions[2], 6);
    let e = red.submodule.parent();
    let z = e.algebra().var("z");
    let zb = e.algebra().var("zb");
    for k in 0..=2 {
        for a in [0, 2] {
            assert!(red.submodule.is_flat(&e.basis(a).lmul(&z.pow(k))).unwrap());
        }
    }
    assert!(!red.submodule.is_flat(&e.basis(0).lmul(&zb)).unwrap());
    // constant sections reduce to themselves
    assert_eq!(red.lift(&red.datum.basis(0)).unwrap(), e.basis(0));
    assert_eq!(red.lift(&red.datum.basis(1)).unwrap(), e.basis(2));
    let rz = red.datum.algebra().var("z");
    let br = red.datum.bracket(&red.datum.basis(0).lmul(&rz), &red.datum.basis(1)).unwrap();
    assert_eq!(br, red.datum.basis(1));
}

#[test]
fn holomorphic_core_of_dolbeault_standard() {
    let hol = builders::holomorphic_standard(2);
    let dol = builders::dolbeault_standard(2);
    assert_eq!(hol.names(), dol.names());
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(hol.pairing().matrix()[a][b].render(), dol.pairing().matrix()[a][b].render());
            assert!(dol.structure()[a][b].is_zero() && hol.structure()[a][b].is_zero());
        }
        assert_eq!(hol.anchors()[a].render(), dol.anchors()[a].render());
    }
}

#[test]
fn flat_cy_tau_examples() {
    let cfg = TestConfig { random_sections: 2, ..TestConfig::default() };
    let c = cy_flat_reduction_check(1, 1, false, &cfg).unwrap();
    assert!(c.all_pass(), "{:?}", c.verdicts);
    let red = &c.reduction;
    let e = red.submodule.parent();
    let a = e.algebra();
    // tau(del_z) = del_z - dzb, tau(dz) = (dz - del_zb)/2
    let tau_del = e.basis(0).sub(&e.basis(3));
    let tau_dz = e.basis(2).sub(&e.basis(1)).scale_rat(1, 2);
    assert_eq!(red.representatives, vec![tau_del.clone(), tau_dz.clone()]);
    assert!(e.pair(&tau_del, &tau_dz).unwrap().is_one());
    let z = a.var("z");
    assert_eq!(e.bracket(&tau_del, &tau_del.lmul(&z)).unwrap(), tau_del);
    assert!(c.verdicts.iter().any(|v| v.name.contains("conj(L)") && v.pass));
}

#[test]
fn cy_dimension_restriction() {
    let cfg = TestConfig { random_sections: 1, ..TestConfig::default() };
    assert!(matches!(cy_flat_reduction_check(2, 1, false, &cfg), Err(Error::Validation { .. })));
    let c = cy_flat_reduction_check(2, 1, true, &cfg).unwrap();
    assert!(c.all_pass(), "{:?}", c.verdicts);
}

fn poly(names: &[&str]) -> Cdga {
    Cdga::polynomial(CoefficientField::Rationals, names).unwrap()
}

#[test]
fn lift_examples() {
    let h = builders::hyperbolic_r2();
    let t = poly(&["t"]);
    let dt = Derivation::partial(t.algebra(), 0);
    let zero = Derivation::zero(t.algebra());
    let ok = ScalarsMap::inclusion(h.base().clone(), t.clone(), vec![dt.clone(), zero]).unwrap();
    assert!(check_lift(&ok, &h).unwrap().all_pass());
    let bad = ScalarsMap::inclusion(h.base().clone(), t, vec![dt.clone(), dt]).unwrap();
    let r = check_lift(&bad, &h).unwrap();
    assert!(!r.coisotropy.pass);
    assert_eq!(r.coisotropy.witness.as_deref(), Some("rho' eta^-1 rho'^dual (t, t) = 2"));

    // holomorphic vector fields acting on smooth functions
    let hol = builders::holomorphic_standard(1);
    let smooth = builders::complexified_standard(1).base().clone();
    let dz = Derivation::partial(smooth.algebra(), 0);
    let m = ScalarsMap::inclusion(hol.base().clone(), smooth.clone(), vec![dz, Derivation::zero(smooth.algebra())])
        .unwrap();
    assert!(check_lift(&m, &hol).unwrap().all_pass());
    let ext = extend_scalars(&hol, &m).unwrap();
    assert!(ext.check_axioms(&TestConfig { random_sections: 3, ..TestConfig::default() }).all_pass());

    // anti-holomorphic anchor breaks the restriction condition
    let dzb = Derivation::partial(smooth.algebra(), 1);
    let m = ScalarsMap::inclusion(hol.base().clone(), smooth.clone(), vec![dzb, Derivation::zero(smooth.algebra())])
        .unwrap();
    assert!(!check_lift(&m, &hol).unwrap().restriction.pass);
}

#[test]
fn holomorphic_to_dolbeault_gives_dolbeault_standard() {
    let hol = builders::holomorphic_standard(1);
    let dol = Cdga::dolbeault(1);
    let lam = Derivation::partial(dol.algebra(), 0);
    let m = ScalarsMap::inclusion(hol.base().clone(), dol.clone(), vec![lam, Derivation::zero(dol.algebra())]).unwrap();
    let ext = extend_scalars(&hol, &m).unwrap();
    let target = builders::dolbeault_standard(1);
    assert!(ext.algebra().same_as(target.algebra()));
    for a in 0..2 {
        assert_eq!(ext.anchors()[a], target.anchors()[a]);
        for b in 0..2 {
            assert_eq!(ext.pairing().matrix()[a][b], target.pairing().matrix()[a][b]);
            assert_eq!(ext.structure()[a][b], target.structure()[a][b]);
        }
    }
}

#[test]
fn hyperbolic_extension_is_standard_r1() {
    let h = builders::hyperbolic_r2();
    let t = poly(&["t"]);
    let m = ScalarsMap::inclusion(
        h.base().clone(),
        t.clone(),
        vec![Derivation::partial(t.algebra(), 0), Derivation::zero(t.algebra())],
    )
    .unwrap();
    let ext = extend_scalars(&h, &m).unwrap();
    let std = builders::standard_courant(1);
    assert!(ext.algebra().same_as(std.algebra()));
    for a in 0..2 {
        assert_eq!(ext.anchors()[a], std.anchors()[a]);
        for b in 0..2 {
            assert_eq!(ext.pairing().matrix()[a][b], std.pairing().matrix()[a][b]);
            assert_eq!(ext.structure()[a][b], std.structure()[a][b]);
        }
    }
    let tt = ext.algebra().var("t");
    assert_eq!(ext.bracket(&ext.basis(0).lmul(&tt), &ext.basis(1)).unwrap(), ext.basis(1));
    assert_eq!(ext.d_script(&tt).unwrap(), ext.basis(1));
}

#[test]
fn so3_valued_functions() {
    let g = builders::so3();
    let t = poly(&["t"]);
    let m = ScalarsMap::inclusion(g.base().clone(), t.clone(), vec![Derivation::zero(t.algebra()); 3]).unwrap();
    let ext = extend_scalars(&g, &m).unwrap();
    let tt = ext.algebra().var("t");
    let br = ext.bracket(&ext.basis(0).lmul(&tt), &ext.basis(1).lmul(&tt)).unwrap();
    assert_eq!(br, ext.basis(2).lmul(&(&tt * &tt)));
    for a in 0..3 {
        for b in 0..3 {
            let lhs = ext.bracket(&ext.basis(a), &ext.basis(b)).unwrap();
            let rhs = g.bracket(&g.basis(a), &g.basis(b)).unwrap();
            assert_eq!(lhs.coeffs().iter().map(Element::render).collect::<Vec<_>>(),
                rhs.coeffs().iter().map(Element::render).collect::<Vec<_>>());
        }
    }
    assert!(ext.check_axioms(&TestConfig::default()).all_pass());
}

/// `E = T + T^* + so(3)` over `R[t]`, extended to `R[t, s]`.
fn transitive_extension() -> (CourantDatum, ScalarsMap, CourantDatum) {
    let e = builders::flat_transitive(1, &builders::so3()).unwrap();
    let ts = poly(&["t", "s"]);
    let mut lift = vec![Derivation::zero(ts.algebra()); e.rank()];
    lift[0] = Derivation::partial(ts.algebra(), 0);
    let m = ScalarsMap::inclusion(e.base().clone(), ts, lift).unwrap();
    let ext = extend_scalars(&e, &m).unwrap();
    (e, m, ext)
}

fn random_poly(alg: &courant_core::algebra::Algebra, seed: u64) -> Element {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<u32> = (0..alg.len() as u32).collect();
    courant_core::courant::random_polynomial(alg, &vars, 2, &mut rng)
}

/// `[u a, v b]' = [u,v] ab + v a rho_hat(u)b - u b rho_hat(v)a + b <u,v> D'a`,
/// with `D'a = sum eta^{ab} rho_hat(e_b)(a) e_a`.
fn formula(e: &CourantDatum, m: &ScalarsMap, u: &Section, a: &Element, v: &Section, b: &Element) -> Section {
    let i = |s: &Section| s.try_map(|c| m.apply(c)).unwrap();
    let n = e.rank();
    let rho_hat = |s: &Section, f: &Element| m.rho_prime(&i(s)).apply(f).unwrap();
    let ta = m.target().algebra();
    let mut d_a = Section::zero(ta, n);
    for x in 0..n {
        for y in 0..n {
            let inv = m.apply(&e.pairing().inverse()[x][y]).unwrap();
            if inv.is_zero() {
                continue;
            }
            let c = &inv * &m.lifted_anchor()[y].apply(a).unwrap();
            *d_a.coeff_mut(x) = d_a.coeff(x) + &c;
        }
    }
    let uv = i(&e.bracket(u, v).unwrap()).lmul(&(a * b));
    let t2 = i(v).lmul(&(a * &rho_hat(u, b)));
    let t3 = i(u).lmul(&(b * &rho_hat(v, a)));
    let t4 = d_a.lmul(&(b * &m.apply(&e.pair(u, v).unwrap()).unwrap()));
    uv.add(&t2).sub(&t3).add(&t4)
}

#[test]
fn extended_bracket_matches_formula() {
    let (e, m, ext) = transitive_extension();
    let ts = e.test_set(&TestConfig { random_sections: 3, ..TestConfig::default() });
    let ta = ext.algebra();
    let i = |s: &Section| s.try_map(|c| m.apply(c)).unwrap();
    for (k, (_, u)) in ts.sections.iter().enumerate() {
        for (l, (_, v)) in ts.sections.iter().enumerate() {
            let a = random_poly(ta, (k * 31 + l) as u64);
            let b = random_poly(ta, (k * 17 + l + 1000) as u64);
            let lhs = ext.bracket(&i(u).lmul(&a), &i(v).lmul(&b)).unwrap();
            assert_eq!(lhs, formula(&e, &m, u, &a, v, &b));
        }
    }
}

#[test]
fn extension_restricts_to_original() {
    let (e, m, ext) = transitive_extension();
    let ts = e.test_set(&TestConfig { random_sections: 3, ..TestConfig::default() });
    let i = |s: &Section| s.try_map(|c| m.apply(c)).unwrap();
    for (_, u) in &ts.sections {
        for (_, v) in &ts.sections {
            assert_eq!(ext.bracket(&i(u), &i(v)).unwrap(), i(&e.bracket(u, v).unwrap()));
            assert_eq!(ext.pair(&i(u), &i(v)).unwrap(), m.apply(&e.pair(u, v).unwrap()).unwrap());
        }
        for g in 0..e.algebra().len() as u32 {
            let f = e.algebra().gen(g);
            assert_eq!(
                ext.anchor_apply(&i(u), &m.apply(&f).unwrap()).unwrap(),
                m.apply(&e.anchor_apply(u, &f).unwrap()).unwrap()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn extended_algebroid_axioms(seed in any::<u64>()) {
        let (_, _, ext) = transitive_extension();
        let r = ext.check_axioms(&TestConfig { random_sections: 2, degree: 2, seed });
        prop_assert!(r.all_pass(), "{:?}", r);
    }

    #[test]
    fn reduction_preserves_nondegeneracy(k in 0usize..4) {
        let h = hyperbolic_r4();
        // isotropic lines e1, e2, e3, e4 all reduce to a rank-2 hyperbolic plane
        let r = reduce_point(&h, vec![h.basis(k)]).unwrap();
        prop_assert_eq!(r.datum.rank(), 2);
        prop_assert!(r.verdicts.iter().any(|v| v.name.contains("exact inverse") && v.pass));
    }
}
