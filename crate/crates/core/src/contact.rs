//! The contact model of a Courant algebroid with a strict orientation.
//!
//! Fields are `f` (grade (2,0)), one `xi` per basis section (grade (1,0))
//! and `lam` (grade (-n,0)); the orientation is `lam0 = c * vol`, where
//! `vol` is a formal constant of grade (-n,0) when `n` is odd and `1`
//! otherwise. Densities are coefficients of the coordinate volume.

use std::sync::Arc;

use crate::algebra::{Element, Generator, Grade};
use crate::coeff::Coeff;
use crate::courant::{CourantDatum, Frame};
use crate::error::{structural, Result};
use crate::jets::{Evolutionary, FieldSpec, JetSpace, JetSpec, JetVar};
use crate::module::Section;
use crate::variational::{self, HamiltonianReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub n: u32,
    pub scale: Coeff,
}

impl Orientation {
    pub fn new(n: u32, scale: Coeff) -> Self {
        Orientation { n, scale }
    }

    /// `0` over a point, the complex dimension for a Dolbeault base, the
    /// number of coordinates otherwise.
    pub fn default_for(datum: &CourantDatum) -> Self {
        let base = datum.base();
        let coords = base.coordinates().len() as u32;
        let n = if base.odd_generators().is_empty() { coords } else { coords / 2 };
        Orientation { n, scale: Coeff::one() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContactOptions {
    pub order: u32,
    pub expand: bool,
}

impl Default for ContactOptions {
    fn default() -> Self {
        ContactOptions { order: 2, expand: false }
    }
}

pub struct ContactModel {
    datum: CourantDatum,
    orientation: Orientation,
    jet: Arc<JetSpace>,
    frame: Frame,
}

impl std::fmt::Debug for ContactModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ContactModel({}, n = {})", self.datum.name(), self.orientation.n)
    }
}

/// The three blocks of `omega`.
#[derive(Clone, Debug)]
pub struct OmegaBlocks {
    /// `delta lam * delta f`
    pub lam_f: Element,
    /// `1/2 delta lam <xi, delta xi>`
    pub lam_xi: Element,
    /// `(-1)^n/2 lam <delta xi, delta xi>`
    pub xi_xi: Element,
}

#[derive(Clone, Debug)]
pub struct CmeReport {
    pub point: Option<PointCme>,
    pub hamiltonian: HamiltonianReport,
    /// Fields whose `X_S(X_S(phi))` does not vanish, with the value.
    pub square: Vec<(String, String)>,
    pub action_invariance: crate::jets::TotalDerivativeReport,
}

#[derive(Clone, Debug)]
pub struct PointCme {
    pub bracket: Element,
}

impl CmeReport {
    pub fn pass(&self) -> bool {
        self.point.as_ref().is_none_or(|p| p.bracket.is_zero())
            && self.hamiltonian.pass
            && self.square.is_empty()
            && self.action_invariance.total_derivative
    }
}

impl ContactModel {
    pub fn new(datum: &CourantDatum, orientation: Orientation, opts: ContactOptions) -> Result<Self> {
        let n = orientation.n as i32;
        if orientation.scale.is_zero() {
            return Err(structural("orientation scale must be nonzero"));
        }
        let mut fields = vec![FieldSpec::new("f", Grade::even(2))];
        for name in datum.names() {
            fields.push(FieldSpec::new(format!("xi:{name}"), Grade::even(1)));
        }
        fields.push(FieldSpec::new("lam", Grade::even(-n)));
        let extras = if n % 2 == 1 { vec![Generator::new("vol", Grade::even(-n))] } else { vec![] };
        let jet = JetSpace::new(JetSpec {
            base: datum.base().clone(),
            fields,
            order: opts.order,
            extras,
            delta: true,
            expand: opts.expand,
        })?;
        let frame = jet.frame(datum)?;
        Ok(ContactModel { datum: datum.clone(), orientation, jet, frame })
    }

    pub fn datum(&self) -> &CourantDatum {
        &self.datum
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orientation
    }

    pub fn jet(&self) -> &Arc<JetSpace> {
        &self.jet
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn f_index(&self) -> u32 {
        0
    }

    pub fn xi_index(&self, a: usize) -> u32 {
        1 + a as u32
    }

    pub fn lam_index(&self) -> u32 {
        1 + self.datum.rank() as u32
    }

    pub fn f(&self) -> Element {
        self.jet.superfield(self.f_index())
    }

    pub fn xi(&self) -> Section {
        Section::new((0..self.datum.rank()).map(|a| self.jet.superfield(self.xi_index(a))).collect())
    }

    pub fn delta_xi(&self) -> Section {
        Section::new(
            (0..self.datum.rank()).map(|a| self.jet.delta_superfield(self.xi_index(a))).collect(),
        )
    }

    pub fn lambda0(&self) -> Element {
        let alg = self.jet.algebra();
        let c = alg.constant(self.orientation.scale.clone());
        if self.orientation.n % 2 == 1 {
            &c * &alg.gen(self.jet.extra(0))
        } else {
            c
        }
    }

    pub fn lambda_prime(&self) -> Element {
        self.jet.superfield(self.lam_index())
    }

    pub fn lambda(&self) -> Element {
        &self.lambda0() + &self.lambda_prime()
    }

    fn sign_n(&self) -> i64 {
        if self.orientation.n.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `lam (delta f + 1/2 <xi, delta xi>)`.
    pub fn liouville_theta(&self) -> Element {
        let fr = &self.frame;
        let inner = &self.jet.delta_superfield(self.f_index())
            + &fr.pair(&self.xi(), &self.delta_xi()).scale_rat(1, 2);
        &self.lambda() * &inner
    }

    pub fn omega_blocks(&self) -> OmegaBlocks {
        let fr = &self.frame;
        let dl = self.jet.delta_superfield(self.lam_index());
        OmegaBlocks {
            lam_f: &dl * &self.jet.delta_superfield(self.f_index()),
            lam_xi: (&dl * &fr.pair(&self.xi(), &self.delta_xi())).scale_rat(1, 2),
            xi_xi: (&self.lambda() * &fr.pair(&self.delta_xi(), &self.delta_xi()))
                .scale_rat(self.sign_n(), 2),
        }
    }

    /// `omega = delta theta`.
    pub fn symplectic_omega(&self) -> Result<Element> {
        self.jet.delta(&self.liouville_theta())
    }

    /// `lam (dbar f + 1/2 <xi, dbar xi>)`.
    pub fn s_dbar(&self) -> Element {
        let fr = &self.frame;
        let xi = self.xi();
        let df = fr.dbar.apply_to(&self.f());
        let inner = &df + &fr.pair(&xi, &fr.apply_d(&xi)).scale_rat(1, 2);
        &self.lambda() * &inner
    }

    /// `lam (L_xi f + 1/6 <xi, L_xi xi>)`.
    pub fn s_zero(&self) -> Element {
        let fr = &self.frame;
        let xi = self.xi();
        let inner = &fr.anchor(&xi, &self.f()) + &fr.pair(&xi, &fr.bracket(&xi, &xi)).scale_rat(1, 6);
        &self.lambda() * &inner
    }

    pub fn master_action(&self) -> Element {
        &self.s_dbar() + &self.s_zero()
    }

    /// The vector field `dbar` on all fields.
    pub fn dbar_field(&self) -> Result<Evolutionary> {
        let fr = &self.frame;
        let mut targets = vec![(self.f_index(), fr.dbar.apply_to(&self.f()))];
        let dxi = fr.apply_d(&self.xi());
        for (a, c) in dxi.coeffs().iter().enumerate() {
            targets.push((self.xi_index(a), c.clone()));
        }
        targets.push((self.lam_index(), fr.dbar.apply_to(&self.lambda_prime())));
        Evolutionary::from_superfields(&self.jet, 1, &targets)
    }

    /// Components of the homological vector field without its `dbar` part:
    /// `f -> 1/2 L_xi f - 1/12 <xi, L_xi xi>`, `xi -> D f + 1/2 L_xi xi`,
    /// `lam -> L_xi lam`.
    pub fn x_zero_targets(&self) -> Vec<(u32, Element)> {
        let fr = &self.frame;
        let xi = self.xi();
        let f = self.f();
        let lxx = fr.bracket(&xi, &xi);
        let tf = &fr.anchor(&xi, &f).scale_rat(1, 2) - &fr.pair(&xi, &lxx).scale_rat(1, 12);
        let txi = fr.d_script(&f).add(&lxx.scale_rat(1, 2));
        let mut out = vec![(self.f_index(), tf)];
        for (a, c) in txi.coeffs().iter().enumerate() {
            out.push((self.xi_index(a), c.clone()));
        }
        out.push((self.lam_index(), fr.lie_density(&xi, &self.lambda())));
        out
    }

    /// `X_S = X_{S_0} + dbar`.
    pub fn homological_field(&self) -> Result<Evolutionary> {
        let dbar = self.dbar_field()?;
        let mut targets = self.x_zero_targets();
        for (field, t) in targets.iter_mut() {
            *t = &*t + &dbar.superfield_image(*field);
        }
        Evolutionary::from_superfields(&self.jet, 1, &targets)
    }

    pub fn hamiltonian_check(&self, x: &Evolutionary, s: &Element) -> Result<HamiltonianReport> {
        variational::hamiltonian_check(&self.jet, x, s, &self.symplectic_omega()?)
    }

    /// The order-zero field coordinates `(f, xi.., lam)` of a point model.
    pub fn point_coordinates(&self) -> Vec<u32> {
        (0..=self.lam_index())
            .map(|field| self.jet.var_index(JetVar { field, mask: 0, alpha: 0, delta: false }))
            .collect()
    }

    /// `{S, S}` with the constant part of `omega` at `lam' = 0, xi = 0`.
    pub fn point_bracket(&self, s: &Element) -> Result<Element> {
        if !self.jet.coords().is_empty() {
            return Err(structural("the point bracket needs a point model"));
        }
        let omega = variational::constant_part(&self.jet, &self.symplectic_omega()?);
        variational::point_poisson_bracket(&self.jet, &self.point_coordinates(), &omega, s, s)
    }

    pub fn verify_cme(&self) -> Result<CmeReport> {
        let s = self.master_action();
        let x = self.homological_field()?;
        let point = if self.jet.coords().is_empty() {
            Some(PointCme { bracket: self.point_bracket(&s)? })
        } else {
            None
        };
        let hamiltonian = self.hamiltonian_check(&x, &s)?;
        let fields: Vec<u32> = (0..=self.lam_index()).collect();
        let sq = crate::par::map(&fields, |&fi| x.apply(&x.superfield_image(fi)));
        let mut square = Vec::new();
        for (fi, r) in fields.iter().zip(sq) {
            let r = r?;
            if !r.is_zero() {
                square.push((self.jet.fields()[*fi as usize].name.clone(), r.render()));
            }
        }
        let action_invariance = self.jet.total_derivative_test(&x.apply(&s)?)?;
        Ok(CmeReport { point, hamiltonian, square, action_invariance })
    }
}
