//! Hamiltonian checks for local functionals and the graded Poisson bracket
//! of a constant symplectic form.

use crate::algebra::{Algebra, Element, Generator, Monomial};
use crate::coeff::Coeff;
use crate::error::{structural, validation, Result};
use crate::jets::{Evolutionary, JetSpace};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianReport {
    pub pass: bool,
    /// Nonzero Euler residues of `i_X omega + delta S`, by field direction.
    pub residues: Vec<(String, String)>,
}

/// Checks that every term of `omega` is quadratic in order-zero field
/// variations (the block shape of the two-forms used here).
pub fn check_two_form_shape(jet: &JetSpace, omega: &Element) -> Result<()> {
    for (m, _) in omega.terms() {
        let mut count = 0;
        for &(g, e) in &m.0 {
            if let Some(v) = jet.decode(g) {
                if v.delta {
                    if v.alpha != 0 {
                        return Err(structural("unsupported two-form shape: derivative of a variation"));
                    }
                    count += e;
                }
            }
        }
        if count != 2 {
            return Err(structural("unsupported two-form shape: term is not quadratic in variations"));
        }
    }
    Ok(())
}

/// Verifies `i_X omega + delta S` is a total derivative in each field
/// direction.
pub fn hamiltonian_check(
    jet: &JetSpace,
    x: &Evolutionary,
    s: &Element,
    omega: &Element,
) -> Result<HamiltonianReport> {
    check_two_form_shape(jet, omega)?;
    let r = &x.contract(omega)? + &jet.delta(s)?;
    let residues: Vec<(String, String)> =
        jet.one_form_residues(&r)?.into_iter().map(|(n, e)| (n, e.render())).collect();
    Ok(HamiltonianReport { pass: residues.is_empty(), residues })
}

/// Graded Poisson bracket on a finite-dimensional space with coordinates
/// `coords` (order-zero jet variables of a point model) and a constant
/// two-form `omega` in their variations. `{S1, S2} = X_{S1}(S2)` where
/// `i_{X_{S1}} omega = -delta S1`.
pub fn point_poisson_bracket(
    jet: &JetSpace,
    coords: &[u32],
    omega: &Element,
    s1: &Element,
    s2: &Element,
) -> Result<Element> {
    let x = hamiltonian_vector_field(jet, coords, omega, s1)?;
    Ok(s2.derive_by(|g| coords.iter().position(|&c| c == g).map(|k| x[k].clone())))
}

/// Components `X^a` of the Hamiltonian vector field of `h`.
pub fn hamiltonian_vector_field(
    jet: &JetSpace,
    coords: &[u32],
    omega: &Element,
    h: &Element,
) -> Result<Vec<Element>> {
    let alg = jet.algebra();
    check_two_form_shape(jet, omega)?;
    for (m, _) in omega.terms() {
        if m.0.iter().any(|&(g, _)| jet.decode(g).is_none_or(|v| !v.delta)) {
            return Err(validation("two-form is not constant", None));
        }
    }
    let xp = match (h.parity(), omega.parity()) {
        (Some(a), Some(b)) => (a + b) % 2,
        _ if h.is_zero() => 0,
        _ => return Err(structural("Hamiltonian and two-form must be homogeneous")),
    };
    let deltas: Vec<u32> = coords
        .iter()
        .map(|&c| {
            let v = jet.decode(c).expect("coordinate is a jet variable");
            jet.var_index(crate::jets::JetVar { delta: true, ..v })
        })
        .collect();
    // Probe with fresh symbols u_a of parity |X| + |z^a|.
    let probes: Vec<Generator> = coords
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let g = alg.generator(c).grade;
            let intrinsic = (g.intrinsic + xp) % 2;
            Generator::new(format!("u#{k}"), crate::algebra::Grade::new(g.degree, intrinsic))
        })
        .collect();
    let ext: Algebra = alg.extend(probes)?;
    let base_len = alg.len() as u32;
    let w = omega.embed(&ext)?;
    let sign = if xp == 1 { -1 } else { 1 };
    let contracted = w.derive_by(|g| {
        deltas
            .iter()
            .position(|&d| d == g)
            .map(|k| ext.gen(base_len + k as u32).scale_rat(sign, 1))
    });
    let n = coords.len();
    let mut k_mat = vec![vec![Coeff::zero(); n]; n];
    for (c, &d) in deltas.iter().enumerate() {
        let part = contracted.left_derivative(d);
        for (m, coef) in part.terms() {
            match m.0.as_slice() {
                [(g, 1)] if *g >= base_len => k_mat[c][(*g - base_len) as usize] = coef.clone(),
                _ => return Err(validation("contraction is not linear in the vector field", None)),
            }
        }
    }
    let inv = linalg::inverse(&k_mat).ok_or_else(|| validation("singular symplectic form", None))?;
    let rhs: Vec<Element> = coords.iter().map(|&c| -h.left_derivative(c)).collect();
    Ok((0..n)
        .map(|a| {
            let terms = (0..n).filter(|&c| !inv[a][c].is_zero()).map(|c| rhs[c].scale(&inv[a][c]));
            crate::algebra::sum_owned(alg, terms)
        })
        .collect())
}

/// The constant part of a two-form: drops every term still depending on a
/// field variable (not a variation) and returns the rest.
pub fn constant_part(jet: &JetSpace, omega: &Element) -> Element {
    omega.filter(|m: &Monomial| {
        m.0.iter().all(|&(g, _)| jet.decode(g).is_none_or(|v| v.delta))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Grade;
    use crate::cdga::Cdga;
    use crate::coeff::CoefficientField;
    use crate::jets::{FieldSpec, JetSpec};
    use std::sync::Arc;

    fn space(fields: &[(&str, Grade)]) -> Arc<JetSpace> {
        JetSpace::new(JetSpec {
            base: Cdga::point(CoefficientField::Rationals),
            fields: fields.iter().map(|(n, g)| FieldSpec::new(*n, *g)).collect(),
            order: 0,
            extras: vec![],
            delta: true,
            expand: false,
        })
        .unwrap()
    }

    #[test]
    fn canonical_even_pair() {
        let j = space(&[("z", Grade::ZERO), ("w", Grade::ZERO)]);
        let (z, w) = (j.superfield(0), j.superfield(1));
        let omega = &j.delta_superfield(0) * &j.delta_superfield(1);
        let coords = [z.support()[0], w.support()[0]];
        let b = point_poisson_bracket(&j, &coords, &omega, &z, &w).unwrap();
        assert!(b.is_one(), "{}", b.render());
    }

    #[test]
    fn singular_form_is_rejected() {
        let j = space(&[("z", Grade::ZERO), ("w", Grade::ZERO)]);
        let z = j.superfield(0);
        let omega = &j.delta_superfield(0) * &j.delta_superfield(0);
        let coords = [z.support()[0], j.superfield(1).support()[0]];
        assert!(point_poisson_bracket(&j, &coords, &omega, &z, &z).is_err());
    }
}
