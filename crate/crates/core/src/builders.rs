//! Ready-made Courant algebroids and the closed-form brackets they are
//! cross-checked against.

use crate::algebra::{sum_owned, Algebra, Derivation, Element};
use crate::cdga::Cdga;
use crate::coeff::{CoefficientField, Coeff};
use crate::courant::CourantDatum;
use crate::error::{validation, Result};
use crate::linalg::{self, Matrix};
use crate::module::{DgModule, Pairing, Section};

pub(crate) fn coordinate_names(d: usize) -> Vec<String> {
    match d {
        1 => vec!["t".into()],
        2..=4 => ["x", "y", "z", "w"][..d].iter().map(|s| s.to_string()).collect(),
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

fn split_pairing(alg: &Algebra, d: usize) -> Pairing {
    let n = 2 * d;
    let m: Vec<Vec<Element>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| if a + d == b || b + d == a { alg.one() } else { alg.zero() })
                .collect()
        })
        .collect();
    Pairing::new(alg, m.clone(), m).expect("split pairing is its own inverse")
}

fn zero_table(alg: &Algebra, n: usize) -> Vec<Vec<Section>> {
    vec![vec![Section::zero(alg, n); n]; n]
}

/// `T + T^*` over polynomial functions on `R^d` with the Dorfman bracket.
pub fn standard_courant(d: usize) -> CourantDatum {
    let names = coordinate_names(d);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let base = Cdga::polynomial(CoefficientField::Rationals, &refs).expect("distinct names");
    standard_over(base, &names, &format!("standard R^{d}"), None)
}

fn standard_over(
    base: Cdga,
    coords: &[String],
    name: &str,
    table: Option<Vec<Vec<Section>>>,
) -> CourantDatum {
    let d = coords.len();
    let alg = base.algebra().clone();
    let mut basis: Vec<String> = coords.iter().map(|c| format!("del_{c}")).collect();
    basis.extend(coords.iter().map(|c| format!("d{c}")));
    let anchors = (0..2 * d)
        .map(|a| {
            if a < d {
                Derivation::partial(&alg, alg.index_of(&coords[a]).expect("coordinate"))
            } else {
                Derivation::zero(&alg)
            }
        })
        .collect();
    let eta = split_pairing(&alg, d);
    let module = DgModule::new(base, basis, None).expect("free module");
    let table = table.unwrap_or_else(|| zero_table(&alg, 2 * d));
    CourantDatum::new(name, module, eta, anchors, table).expect("consistent data")
}

/// Standard Courant algebroid on `R^4` twisted by the non-closed 3-form
/// `H = w dx^dy^dz`: `[del_i, del_j] = sum_k H_ijk dx_k`. Axioms other than
/// Jacobi still hold; `Jac(del_x, del_y, del_z) = -dw`.
pub fn twisted_standard_r4() -> CourantDatum {
    let names = coordinate_names(4);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let base = Cdga::polynomial(CoefficientField::Rationals, &refs).expect("distinct names");
    let alg = base.algebra().clone();
    let w = alg.var("w");
    let mut table = zero_table(&alg, 8);
    let perms: [([usize; 3], i64); 6] = [
        ([0, 1, 2], 1),
        ([1, 2, 0], 1),
        ([2, 0, 1], 1),
        ([1, 0, 2], -1),
        ([0, 2, 1], -1),
        ([2, 1, 0], -1),
    ];
    for ([i, j, k], s) in perms {
        *table[i][j].coeff_mut(4 + k) = w.scale_rat(s, 1);
    }
    standard_over(base, &names, "twisted standard R^4", Some(table))
}

/// Standard Courant algebroid over the Dolbeault model of `C^d`, with basis
/// `del_z_k, dz_k` and anchors `d/dz_k`.
pub fn dolbeault_standard(d: usize) -> CourantDatum {
    let base = Cdga::dolbeault(d);
    let alg = base.algebra().clone();
    let zs: Vec<String> = (0..d).map(|k| alg.generator(k as u32).name.clone()).collect();
    let mut basis: Vec<String> = zs.iter().map(|z| format!("del_{z}")).collect();
    basis.extend(zs.iter().map(|z| format!("d{z}")));
    let anchors = (0..2 * d)
        .map(|a| if a < d { Derivation::partial(&alg, a as u32) } else { Derivation::zero(&alg) })
        .collect();
    let eta = split_pairing(&alg, d);
    let module = DgModule::new(base, basis, None).expect("free module");
    CourantDatum::new(format!("dolbeault C^{d}"), module, eta, anchors, zero_table(&alg, 2 * d))
        .expect("consistent data")
}

/// Complexified smooth `T + T^*` on `C^d`, over complex polynomials in
/// `z_k, zb_k` with basis `del_z_k, del_zb_k, dz_k, dzb_k`.
pub fn complexified_standard(d: usize) -> CourantDatum {
    let gens = crate::cdga::dolbeault_generators(d);
    let names: Vec<String> = gens[..2 * d].iter().map(|g| g.name.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let base = Cdga::polynomial(CoefficientField::GaussianRationals, &refs).expect("distinct names");
    standard_over(base, &names, &format!("complexified standard C^{d}"), None)
}

/// Standard holomorphic Courant algebroid on `C^d`: basis `del_z_k, dz_k`
/// over complex polynomials in the `z_k`.
pub fn holomorphic_standard(d: usize) -> CourantDatum {
    let gens = crate::cdga::dolbeault_generators(d);
    let names: Vec<String> = gens[..d].iter().map(|g| g.name.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let base = Cdga::polynomial(CoefficientField::GaussianRationals, &refs).expect("distinct names");
    standard_over(base, &names, &format!("holomorphic C^{d}"), None)
}

/// Courant algebroid over a point from structure constants
/// `[e_a, e_b] = sum_c c[a][b][c] e_c` and a constant pairing. The pairing
/// must be invertible and invariant: `<[x,y],z> + <y,[x,z]> = 0`.
pub fn quadratic_lie(
    name: &str,
    names: &[&str],
    constants: &[Vec<Vec<Coeff>>],
    pairing: &Matrix,
) -> Result<CourantDatum> {
    let n = names.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = Coeff::zero();
                for k in 0..n {
                    s += &(&constants[a][b][k] * &pairing[k][c]);
                    s += &(&constants[a][c][k] * &pairing[b][k]);
                }
                if !s.is_zero() {
                    return Err(validation(
                        "pairing is not invariant",
                        Some(format!("<[{0},{1}],{2}> + <{1},[{0},{2}]> = {s}", names[a], names[b], names[c])),
                    ));
                }
            }
        }
    }
    quadratic_lie_unchecked(name, names, constants, pairing)
}

/// As [`quadratic_lie`] without the invariance check (for negative controls).
pub fn quadratic_lie_unchecked(
    name: &str,
    names: &[&str],
    constants: &[Vec<Vec<Coeff>>],
    pairing: &Matrix,
) -> Result<CourantDatum> {
    let n = names.len();
    let field = if constants.iter().flatten().flatten().chain(pairing.iter().flatten()).all(Coeff::is_real)
    {
        CoefficientField::Rationals
    } else {
        CoefficientField::GaussianRationals
    };
    let base = Cdga::point(field);
    let alg = base.algebra().clone();
    let inv = linalg::inverse(pairing)
        .ok_or_else(|| validation("pairing is degenerate", Some(name.to_string())))?;
    let lift = |m: &Matrix| -> Vec<Vec<Element>> {
        m.iter().map(|r| r.iter().map(|c| alg.constant(c.clone())).collect()).collect()
    };
    let eta = Pairing::new(&alg, lift(pairing), lift(&inv))?;
    let table = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| Section::new((0..n).map(|c| alg.constant(constants[a][b][c].clone())).collect()))
                .collect()
        })
        .collect();
    let module = DgModule::new(base, names.iter().map(|s| s.to_string()).collect(), None)?;
    let anchors = vec![Derivation::zero(&alg); n];
    CourantDatum::new(name, module, eta, anchors, table)
}

fn int_matrix(rows: &[&[i64]]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| Coeff::int(x)).collect()).collect()
}

fn levi_civita() -> Vec<Vec<Vec<Coeff>>> {
    let mut c = vec![vec![vec![Coeff::zero(); 3]; 3]; 3];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[i][j][k] = Coeff::one();
        c[j][i][k] = Coeff::int(-1);
    }
    c
}

/// `so(3)` with `[e_i, e_j] = eps_ijk e_k` and the identity pairing.
pub fn so3() -> CourantDatum {
    quadratic_lie("so(3)", &["e1", "e2", "e3"], &levi_civita(), &linalg::identity(3))
        .expect("so(3) is quadratic")
}

/// `so(3)` with the single entry `[e1, e2]` flipped to `-e3` while
/// `[e2, e1] = -e3` is kept. Jacobi then fails on basis triples such as
/// `(e1, e2, e1)`.
pub fn so3_broken() -> CourantDatum {
    let mut c = levi_civita();
    c[0][1][2] = Coeff::int(-1);
    quadratic_lie_unchecked("so(3) broken", &["e1", "e2", "e3"], &c, &linalg::identity(3))
        .expect("nondegenerate pairing")
}

pub fn abelian(name: &str, pairing: &Matrix) -> Result<CourantDatum> {
    let n = pairing.len();
    let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    quadratic_lie(name, &refs, &vec![vec![vec![Coeff::zero(); n]; n]; n], pairing)
}

/// Abelian `R^2` with the identity pairing.
pub fn abelian_r2() -> CourantDatum {
    abelian("abelian R^2", &linalg::identity(2)).expect("abelian")
}

/// Abelian `R^2` with the hyperbolic pairing `[[0,1],[1,0]]`.
pub fn hyperbolic_r2() -> CourantDatum {
    abelian("hyperbolic R^2", &int_matrix(&[&[0, 1], &[1, 0]])).expect("abelian")
}

/// `T + T^* + g` over `R^d` for a quadratic Lie algebra `g` (given as a
/// point datum): the transitive algebroid of a flat trivial adjoint bundle.
pub fn flat_transitive(d: usize, g: &CourantDatum) -> Result<CourantDatum> {
    let coords = coordinate_names(d);
    let refs: Vec<&str> = coords.iter().map(String::as_str).collect();
    let field = g.algebra().field();
    let base = Cdga::polynomial(field, &refs)?;
    let alg = base.algebra().clone();
    let r = g.rank();
    let n = 2 * d + r;
    let mut basis: Vec<String> = coords.iter().map(|c| format!("del_{c}")).collect();
    basis.extend(coords.iter().map(|c| format!("d{c}")));
    basis.extend(g.names().iter().cloned());
    let lift = |e: &Element| e.embed(&alg).expect("constants embed");
    let mut m = vec![vec![alg.zero(); n]; n];
    let mut mi = vec![vec![alg.zero(); n]; n];
    for i in 0..d {
        for (a, b) in [(i, d + i), (d + i, i)] {
            m[a][b] = alg.one();
            mi[a][b] = alg.one();
        }
    }
    for a in 0..r {
        for b in 0..r {
            m[2 * d + a][2 * d + b] = lift(&g.pairing().matrix()[a][b]);
            mi[2 * d + a][2 * d + b] = lift(&g.pairing().inverse()[a][b]);
        }
    }
    let eta = Pairing::new(&alg, m, mi)?;
    let anchors = (0..n)
        .map(|a| if a < d { Derivation::partial(&alg, a as u32) } else { Derivation::zero(&alg) })
        .collect();
    let mut table = zero_table(&alg, n);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                *table[2 * d + a][2 * d + b].coeff_mut(2 * d + c) =
                    lift(g.structure()[a][b].coeff(c));
            }
        }
    }
    let module = DgModule::new(base, basis, None)?;
    CourantDatum::new(format!("flat transitive R^{d} x {}", g.name()), module, eta, anchors, table)
}

/// Closed-form Dorfman bracket on `T + T^*` over `R^d`:
/// `[x+a, y+b] = [x,y] + L_x b - i_y da`.
pub fn standard_closed_bracket(e: &CourantDatum, u: &Section, v: &Section) -> Section {
    let alg = e.algebra();
    let d = e.rank() / 2;
    let p = |f: &Element, i: usize| f.left_derivative(i as u32);
    let mut out = Vec::with_capacity(2 * d);
    for j in 0..d {
        let terms = (0..d).flat_map(|i| {
            [&u.coeff(i).clone() * &p(v.coeff(j), i), -(v.coeff(i) * &p(u.coeff(j), i))]
        });
        out.push(sum_owned(alg, terms.collect::<Vec<_>>()));
    }
    for j in 0..d {
        let mut terms = Vec::new();
        for i in 0..d {
            terms.push(u.coeff(i) * &p(v.coeff(d + j), i));
            terms.push(v.coeff(d + i) * &p(u.coeff(i), j));
            let da = &p(u.coeff(d + j), i) - &p(u.coeff(d + i), j);
            terms.push(-(v.coeff(i) * &da));
        }
        out.push(sum_owned(alg, terms));
    }
    Section::new(out)
}

/// Closed-form bracket of the Dolbeault standard Courant algebroid, term by
/// term from the four bracket cases on `zeta (x) y` and `xi (x) alpha` with
/// coordinate frames `y = d/dz_k`, `alpha = dz_k`.
pub fn dolbeault_closed_bracket(e: &CourantDatum, u: &Section, v: &Section) -> Section {
    let alg = e.algebra();
    let d = e.rank() / 2;
    let l = |k: usize, f: &Element| f.left_derivative(k as u32);
    let mut cols: Vec<Vec<Element>> = vec![Vec::new(); 2 * d];
    for k in 0..d {
        for m in 0..d {
            // [zeta y, theta z] = zeta (L_y theta) z - (L_z zeta) theta y
            let (zeta, theta) = (u.coeff(k), v.coeff(m));
            cols[m].push(zeta * &l(k, theta));
            cols[k].push(-(&l(m, zeta) * theta));
            // [zeta y, kappa beta] = zeta (L_y kappa) beta + (D zeta) kappa beta(y)
            let kappa = v.coeff(d + m);
            cols[d + m].push(zeta * &l(k, kappa));
            if k == m {
                for q in 0..d {
                    cols[d + q].push(&l(q, zeta) * kappa);
                }
            }
            // [xi alpha, theta z] = -(L_z xi) theta alpha + (D xi) theta alpha(z)
            let xi = u.coeff(d + k);
            cols[d + k].push(-(&l(m, xi) * theta));
            if k == m {
                for q in 0..d {
                    cols[d + q].push(&l(q, xi) * theta);
                }
            }
        }
    }
    Section::new(cols.into_iter().map(|c| sum_owned(alg, c)).collect())
}

/// Closed-form bracket on `T + T^* + g` with flat connection `d`:
/// `[x+a+s, y+b+t] = L_x y + (L_x b - i_y da + <ds, t>) + (x(t) - y(s) + [s,t])`.
pub fn transitive_closed_bracket(e: &CourantDatum, d: usize, u: &Section, v: &Section) -> Section {
    let alg = e.algebra();
    let n = e.rank();
    let r = n - 2 * d;
    let sub = |s: &Section, lo: usize, hi: usize| Section::new(s.coeffs()[lo..hi].to_vec());
    // T + T^* part via the standard closed form on a rank-2d view
    let std_view = standard_view(e, d);
    let tt = standard_closed_bracket(&std_view, &sub(u, 0, 2 * d), &sub(v, 0, 2 * d));
    let mut out: Vec<Element> = tt.coeffs().to_vec();
    let g_eta: Vec<Vec<Element>> =
        (0..r).map(|a| (0..r).map(|b| e.pairing().matrix()[2 * d + a][2 * d + b].clone()).collect()).collect();
    // <ds, t>_j = sum_ab d_j(s^a) t^b eta_ab
    for j in 0..d {
        let mut terms = Vec::new();
        for a in 0..r {
            for b in 0..r {
                if g_eta[a][b].is_zero() {
                    continue;
                }
                let ds = u.coeff(2 * d + a).left_derivative(j as u32);
                terms.push(&(&ds * v.coeff(2 * d + b)) * &g_eta[a][b]);
            }
        }
        out[d + j] = &out[d + j] + &sum_owned(alg, terms);
    }
    for c in 0..r {
        let mut terms = Vec::new();
        for i in 0..d {
            terms.push(u.coeff(i) * &v.coeff(2 * d + c).left_derivative(i as u32));
            terms.push(-(v.coeff(i) * &u.coeff(2 * d + c).left_derivative(i as u32)));
        }
        for a in 0..r {
            for b in 0..r {
                let k = e.structure()[2 * d + a][2 * d + b].coeff(2 * d + c);
                if !k.is_zero() {
                    terms.push(&(u.coeff(2 * d + a) * v.coeff(2 * d + b)) * k);
                }
            }
        }
        out.push(sum_owned(alg, terms));
    }
    Section::new(out)
}

fn standard_view(e: &CourantDatum, d: usize) -> CourantDatum {
    let alg = e.algebra();
    let coords: Vec<String> = (0..d).map(|i| alg.generator(i as u32).name.clone()).collect();
    standard_over(e.base().clone(), &coords, "view", None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::courant::TestConfig;

    #[test]
    fn standard_r1_examples() {
        let e = standard_courant(1);
        let a = e.algebra();
        let t = a.var("t");
        let del = e.basis(0);
        let dt = e.basis(1);
        assert_eq!(e.bracket(&del, &del.lmul(&t)).unwrap(), del);
        assert_eq!(e.bracket(&del.lmul(&t), &dt).unwrap(), dt);
        assert_eq!(e.d_script(&t).unwrap(), dt);
        assert!(e.d_script(&a.int(5)).unwrap().is_zero());
        assert_eq!(e.pair(&del, &dt).unwrap(), a.one());
        assert!(e.pair(&del, &del).unwrap().is_zero());
        assert_eq!(e.lie_function(&del, &(&t * &t)).unwrap(), t.scale_rat(2, 1));
        assert_eq!(e.lie_density(&del.lmul(&t), &a.one()).unwrap(), a.one());
    }

    #[test]
    fn generic_bracket_matches_closed_forms() {
        let cfg = TestConfig::default();
        for e in [standard_courant(2), standard_courant(3)] {
            let ts = e.test_set(&cfg);
            for (_, u) in &ts.sections {
                for (_, v) in &ts.sections {
                    assert_eq!(e.bracket(u, v).unwrap(), standard_closed_bracket(&e, u, v));
                }
            }
        }
        for d in [1, 2] {
            let e = dolbeault_standard(d);
            let ts = e.test_set(&cfg);
            for (_, u) in &ts.sections {
                for (_, v) in &ts.sections {
                    assert_eq!(e.bracket(u, v).unwrap(), dolbeault_closed_bracket(&e, u, v));
                }
            }
        }
        let e = flat_transitive(1, &so3()).unwrap();
        let ts = e.test_set(&cfg);
        for (_, u) in &ts.sections {
            for (_, v) in &ts.sections {
                assert_eq!(e.bracket(u, v).unwrap(), transitive_closed_bracket(&e, 1, u, v));
            }
        }
    }

    #[test]
    fn dolbeault_fourth_case_with_constants() {
        let e = dolbeault_standard(1);
        assert!(e.bracket(&e.basis(0), &e.basis(1)).unwrap().is_zero());
    }

    #[test]
    fn non_invariant_pairing_rejected() {
        let m = int_matrix(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 1]]);
        assert!(quadratic_lie("bad", &["e1", "e2", "e3"], &levi_civita(), &m).is_err());
    }

    #[test]
    fn axioms_hold_on_small_models() {
        let cfg = TestConfig::default();
        for e in [standard_courant(1), so3(), hyperbolic_r2(), dolbeault_standard(1)] {
            let r = e.check_axioms(&cfg);
            assert!(r.all_pass(), "{}: {:?}", e.name(), r);
        }
    }

    #[test]
    fn twisted_r4_fails_only_jacobi() {
        let e = twisted_standard_r4();
        let r = e.check_axioms(&TestConfig { random_sections: 2, ..TestConfig::default() });
        assert!(r.leibniz.pass && r.antisymmetry.pass && r.pairing.pass && r.coisotropy.pass);
        assert!(!r.jacobi.pass);
        let j = e.jacobiator(&e.basis(0), &e.basis(1), &e.basis(2)).unwrap();
        assert_eq!(j, e.basis(7).neg());
    }
}
