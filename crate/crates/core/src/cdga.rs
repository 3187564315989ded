//! Commutative dg algebras: a free graded-commutative algebra plus a degree
//! +1 derivation, and builders for the polynomial models used throughout.

use crate::algebra::{Algebra, Derivation, Element, Generator, Grade};
use crate::coeff::CoefficientField;
use crate::error::{structural, Result};

#[derive(Clone, Debug)]
pub struct Cdga {
    alg: Algebra,
    d: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareZeroReport {
    pub pass: bool,
    /// Generator on which `d∘d` fails, with the nonzero value.
    pub offending: Option<(String, String)>,
}

impl Cdga {
    /// Pairs an algebra with a differential. Every nonzero image must have
    /// the grade of its generator shifted by `(+1, 0)`.
    pub fn new(alg: Algebra, d: Derivation) -> Result<Self> {
        alg.check_same(d.algebra())?;
        for (&g, img) in d.images() {
            let want = alg.generator(g).grade + Grade::even(1);
            for (gr, _) in img.homogeneous_components() {
                if gr != want {
                    return Err(structural(format!(
                        "differential of `{}` has grade {gr}, expected {want}",
                        alg.generator(g).name
                    )));
                }
            }
        }
        Ok(Cdga { alg, d })
    }

    pub fn with_zero_differential(alg: Algebra) -> Self {
        let d = Derivation::zero(&alg);
        Cdga { alg, d }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn differential(&self) -> &Derivation {
        &self.d
    }

    pub fn apply_d(&self, a: &Element) -> Element {
        self.d.apply_unchecked(a)
    }

    pub fn check_square_zero(&self) -> SquareZeroReport {
        for (&g, img) in self.d.images() {
            let dd = self.d.apply_unchecked(img);
            if !dd.is_zero() {
                return SquareZeroReport {
                    pass: false,
                    offending: Some((self.alg.generator(g).name.clone(), dd.render())),
                };
            }
        }
        SquareZeroReport { pass: true, offending: None }
    }

    /// Even degree-0 generators: the coordinates that total derivatives and
    /// divergences act on.
    pub fn coordinates(&self) -> Vec<u32> {
        (0..self.alg.len() as u32)
            .filter(|&g| self.alg.generator(g).grade == Grade::ZERO)
            .collect()
    }

    /// Odd generators of the ring (the `dzb`'s of a Dolbeault model).
    pub fn odd_generators(&self) -> Vec<u32> {
        (0..self.alg.len() as u32).filter(|&g| self.alg.parity_of(g) == 1).collect()
    }

    /// Ring with no generators: functions on a point.
    pub fn point(field: CoefficientField) -> Self {
        Cdga::with_zero_differential(Algebra::new(field, vec![]).expect("empty algebra"))
    }

    /// Polynomials in the given even degree-0 variables, zero differential.
    pub fn polynomial(field: CoefficientField, names: &[&str]) -> Result<Self> {
        let gens = names.iter().map(|n| Generator::new(*n, Grade::ZERO)).collect();
        Ok(Cdga::with_zero_differential(Algebra::new(field, gens)?))
    }

    /// `x1..xd, dx1..dxd` with the de Rham differential.
    pub fn de_rham(d: usize) -> Self {
        let mut gens: Vec<Generator> =
            (1..=d).map(|i| Generator::new(format!("x{i}"), Grade::ZERO)).collect();
        gens.extend((1..=d).map(|i| Generator::new(format!("dx{i}"), Grade::even(1))));
        let alg = Algebra::new(CoefficientField::Rationals, gens).expect("distinct names");
        let images = (0..d as u32).map(|i| (i, alg.gen(d as u32 + i)));
        let dd = Derivation::new(&alg, images).expect("in range");
        Cdga { alg, d: dd }
    }

    /// Dolbeault model of flat `C^d`: even `z_k, zb_k`, odd `dzb_k`,
    /// `dbar zb_k = dzb_k`, over the Gaussian rationals.
    pub fn dolbeault(d: usize) -> Self {
        let alg = Algebra::new(CoefficientField::GaussianRationals, dolbeault_generators(d))
            .expect("distinct names");
        let images = (0..d as u32).map(|k| (d as u32 + k, alg.gen(2 * d as u32 + k)));
        let dd = Derivation::new(&alg, images).expect("in range");
        Cdga { alg, d: dd }
    }
}

pub(crate) fn dolbeault_generators(d: usize) -> Vec<Generator> {
    let name = |s: &str, k: usize| if d == 1 { s.to_string() } else { format!("{s}{k}") };
    let mut gens: Vec<Generator> =
        (1..=d).map(|k| Generator::new(name("z", k), Grade::ZERO)).collect();
    gens.extend((1..=d).map(|k| Generator::new(name("zb", k), Grade::ZERO)));
    gens.extend((1..=d).map(|k| Generator::new(name("dzb", k), Grade::even(1))));
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_element;

    #[test]
    fn builders_square_to_zero() {
        assert!(Cdga::de_rham(2).check_square_zero().pass);
        assert!(Cdga::dolbeault(2).check_square_zero().pass);
        assert!(Cdga::polynomial(CoefficientField::Rationals, &["t"]).unwrap().check_square_zero().pass);
    }

    #[test]
    fn dolbeault_derivative_example() {
        let c = Cdga::dolbeault(1);
        let a = c.algebra();
        let e = parse_element(a, "z*zb^2").unwrap();
        assert_eq!(c.apply_d(&e), parse_element(a, "2*z*zb*dzb").unwrap());
        assert!(c.apply_d(&a.var("dzb")).is_zero());
    }

    #[test]
    fn mutated_differential_fails_square_zero() {
        let alg = Algebra::new(
            CoefficientField::GaussianRationals,
            vec![
                Generator::new("z", Grade::ZERO),
                Generator::new("zb", Grade::ZERO),
                Generator::new("dzb", Grade::even(1)),
                Generator::new("eta", Grade::even(1)),
            ],
        )
        .unwrap();
        let harmless = Derivation::from_names(
            &alg,
            &[("zb", alg.var("dzb")), ("dzb", &alg.var("z") * &(&alg.var("dzb") * &alg.var("dzb")))],
        )
        .unwrap();
        assert!(Cdga::new(alg.clone(), harmless).unwrap().check_square_zero().pass);
        // zb*eta alone would have degree 1, so the second odd generator enters as dzb*eta
        let broken = Derivation::from_names(
            &alg,
            &[("zb", alg.var("dzb")), ("dzb", &alg.var("zb") * &(&alg.var("dzb") * &alg.var("eta")))],
        )
        .unwrap();
        let r = Cdga::new(alg, broken).unwrap().check_square_zero();
        assert!(!r.pass);
        assert_eq!(r.offending.unwrap().0, "zb");
    }
}
