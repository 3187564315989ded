//! Free modules over a graded-commutative algebra, their sections, and
//! pairings.
//!
//! A section is written `u = sum_a u^a e_a` with coefficients to the left of
//! basis elements. Basis elements of the modules used here are even, so no
//! sign arises from this placement.

use std::fmt;

use crate::algebra::{Algebra, Element, Grade};
use crate::cdga::Cdga;
use crate::error::{structural, validation, Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Section {
    coeffs: Vec<Element>,
}

impl Section {
    pub fn new(coeffs: Vec<Element>) -> Self {
        Section { coeffs }
    }

    pub fn zero(alg: &Algebra, rank: usize) -> Self {
        Section { coeffs: vec![alg.zero(); rank] }
    }

    /// The basis section `e_a`.
    pub fn basis(alg: &Algebra, rank: usize, a: usize) -> Self {
        let mut s = Section::zero(alg, rank);
        s.coeffs[a] = alg.one();
        s
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize) -> &Element {
        &self.coeffs[a]
    }

    pub fn coeff_mut(&mut self, a: usize) -> &mut Element {
        &mut self.coeffs[a]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Element::is_zero)
    }

    pub fn check_rank(&self, other: &Section) -> Result<()> {
        if self.rank() != other.rank() {
            return Err(structural(format!(
                "sections of rank {} and {} do not belong to the same module",
                self.rank(),
                other.rank()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Section) -> Section {
        Section { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Section) -> Section {
        Section { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Section {
        Section { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    /// `f * u`, multiplying every coefficient on the left.
    pub fn lmul(&self, f: &Element) -> Section {
        Section { coeffs: self.coeffs.iter().map(|a| f * a).collect() }
    }

    pub fn scale_rat(&self, n: i64, d: i64) -> Section {
        Section { coeffs: self.coeffs.iter().map(|a| a.scale_rat(n, d)).collect() }
    }

    pub fn map(&self, f: impl Fn(&Element) -> Element) -> Section {
        Section { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&Element) -> Result<Element>) -> Result<Section> {
        Ok(Section { coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    /// Total parity if homogeneous (zero counts as even).
    pub fn parity(&self) -> Option<u8> {
        let mut out = None;
        for c in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            let p = c.parity()?;
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(0))
    }

    pub fn grade(&self) -> Option<Grade> {
        let mut out = None;
        for c in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            let g = c.grade()?;
            match out {
                None => out = Some(g),
                Some(h) if h != g => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Grade::ZERO))
    }

    /// Splits into even and odd parts.
    pub fn parity_parts(&self) -> [Section; 2] {
        let (e, o): (Vec<_>, Vec<_>) = self
            .coeffs
            .iter()
            .map(|c| {
                let [e, o] = c.parity_parts();
                (e, o)
            })
            .unzip();
        [Section { coeffs: e }, Section { coeffs: o }]
    }

    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .zip(names)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| {
                if c.is_one() {
                    n.clone()
                } else {
                    format!("({})*{}", c.render(), n)
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

pub fn sum_sections(rank: usize, alg: &Algebra, items: impl IntoIterator<Item = Section>) -> Section {
    let mut cols: Vec<Vec<Element>> = vec![Vec::new(); rank];
    for s in items {
        for (a, c) in s.coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                cols[a].push(c);
            }
        }
    }
    Section { coeffs: cols.into_iter().map(|v| crate::algebra::sum_owned(alg, v)).collect() }
}

/// A free dg module with named even basis and differential
/// `dbar e_a = sum_b M[a][b] e_b`.
#[derive(Clone, Debug)]
pub struct DgModule {
    base: Cdga,
    names: Vec<String>,
    diff: Vec<Section>,
}

impl DgModule {
    pub fn new(base: Cdga, names: Vec<String>, diff: Option<Vec<Section>>) -> Result<Self> {
        let n = names.len();
        let alg = base.algebra().clone();
        let diff = diff.unwrap_or_else(|| vec![Section::zero(&alg, n); n]);
        if diff.len() != n || diff.iter().any(|s| s.rank() != n) {
            return Err(structural("module differential has the wrong shape"));
        }
        for s in &diff {
            for c in s.coeffs() {
                alg.check_same(c.algebra())?;
            }
        }
        let m = DgModule { base, names, diff };
        for a in 0..n {
            let e = m.basis(a);
            let dd = m.apply_d(&m.apply_d(&e));
            if !dd.is_zero() {
                return Err(validation(
                    "module differential does not square to zero",
                    Some(m.names[a].clone()),
                ));
            }
        }
        Ok(m)
    }

    pub fn base(&self) -> &Cdga {
        &self.base
    }

    pub fn algebra(&self) -> &Algebra {
        self.base.algebra()
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn differential(&self) -> &[Section] {
        &self.diff
    }

    pub fn basis(&self, a: usize) -> Section {
        Section::basis(self.algebra(), self.rank(), a)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `dbar(sum u^a e_a) = sum dbar(u^a) e_a + (-1)^{|u^a|} u^a dbar(e_a)`.
    pub fn apply_d(&self, u: &Section) -> Section {
        let alg = self.algebra();
        let mut out: Vec<Section> = vec![u.map(|c| self.base.apply_d(c))];
        for (a, c) in u.coeffs().iter().enumerate() {
            if self.diff[a].is_zero() || c.is_zero() {
                continue;
            }
            let [ev, od] = c.parity_parts();
            out.push(self.diff[a].lmul(&ev));
            out.push(self.diff[a].lmul(&od).neg());
        }
        sum_sections(self.rank(), alg, out)
    }
}

/// Symmetric pairing matrix on the basis plus an inverse witness.
#[derive(Clone, Debug)]
pub struct Pairing {
    matrix: Vec<Vec<Element>>,
    inverse: Vec<Vec<Element>>,
}

impl Pairing {
    /// Validates shape, symmetry and `matrix * inverse = 1`.
    pub fn new(alg: &Algebra, matrix: Vec<Vec<Element>>, inverse: Vec<Vec<Element>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().chain(&inverse).any(|r| r.len() != n) || inverse.len() != n {
            return Err(structural("pairing matrices must be square of the module rank"));
        }
        for row in matrix.iter().chain(&inverse) {
            for e in row {
                alg.check_same(e.algebra())?;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if matrix[a][b] != matrix[b][a] {
                    return Err(validation(
                        "pairing is not graded-symmetric",
                        Some(format!("entries ({},{}) and ({},{})", a + 1, b + 1, b + 1, a + 1)),
                    ));
                }
            }
        }
        for a in 0..n {
            for c in 0..n {
                let s = crate::algebra::sum_owned(
                    alg,
                    (0..n).map(|b| &matrix[a][b] * &inverse[b][c]),
                );
                let want = if a == c { alg.one() } else { alg.zero() };
                if s != want {
                    return Err(Error::PairingWitness { row: a + 1, column: c + 1, value: s.render() });
                }
            }
        }
        Ok(Pairing { matrix, inverse })
    }

    pub fn matrix(&self) -> &[Vec<Element>] {
        &self.matrix
    }

    pub fn inverse(&self) -> &[Vec<Element>] {
        &self.inverse
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    /// `<u, v> = sum u^a v^b eta_ab`.
    pub fn pair(&self, u: &Section, v: &Section) -> Result<Element> {
        u.check_rank(v)?;
        if u.rank() != self.rank() {
            return Err(structural("section rank does not match the pairing"));
        }
        let alg = u
            .coeffs()
            .first()
            .map(|c| c.algebra().clone())
            .ok_or_else(|| structural("empty module"))?;
        Ok(pair_with(&alg, &self.matrix, u, v))
    }
}

pub(crate) fn pair_with(alg: &Algebra, eta: &[Vec<Element>], u: &Section, v: &Section) -> Element {
    let mut terms = Vec::new();
    for (a, ua) in u.coeffs().iter().enumerate() {
        if ua.is_zero() {
            continue;
        }
        for (b, vb) in v.coeffs().iter().enumerate() {
            if vb.is_zero() || eta[a][b].is_zero() {
                continue;
            }
            terms.push(&(ua * vb) * &eta[a][b]);
        }
    }
    crate::algebra::sum_owned(alg, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientField;

    fn hyperbolic(alg: &Algebra) -> Pairing {
        let (z, o) = (alg.zero(), alg.one());
        Pairing::new(alg, vec![vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]], vec![
            vec![z.clone(), o.clone()],
            vec![o, z],
        ])
        .unwrap()
    }

    #[test]
    fn hyperbolic_pairing_matrix_form() {
        let c = Cdga::polynomial(CoefficientField::Rationals, &["a", "b", "c", "d"]).unwrap();
        let alg = c.algebra();
        let eta = hyperbolic(alg);
        let u = Section::new(vec![alg.var("a"), alg.var("b")]);
        let v = Section::new(vec![alg.var("c"), alg.var("d")]);
        let want = &(&alg.var("a") * &alg.var("d")) + &(&alg.var("b") * &alg.var("c"));
        assert_eq!(eta.pair(&u, &v).unwrap(), want);
        assert!(eta.pair(&u, &Section::zero(alg, 3)).is_err());
    }

    #[test]
    fn wrong_inverse_is_reported() {
        let c = Cdga::point(CoefficientField::Rationals);
        let alg = c.algebra();
        let (z, o) = (alg.zero(), alg.one());
        let bad = Pairing::new(alg, vec![vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]], vec![
            vec![o.clone(), z.clone()],
            vec![z, o],
        ]);
        assert!(matches!(bad, Err(Error::PairingWitness { .. })));
    }
}
