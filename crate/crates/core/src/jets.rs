//! Jet algebras of graded superfields and exact variational calculus.
//!
//! A [`JetSpace`] extends a base cdga by jet variables `phi_{I,alpha}`: one
//! for every field, every monomial `theta^I` in the odd generators of the
//! base (the `dzb`'s of a Dolbeault model) and every multi-index `alpha`
//! over the coordinates up to the jet order. The superfield of a field is
//! `Phi = sum_I phi_I theta^I`, so `phi_I` carries the grade of `Phi` minus
//! that of `theta^I`. Optionally a copy `delta phi_{I,alpha}` of every jet
//! variable is added for local forms on field space.
//!
//! Without component expansion each superfield jet is a single graded symbol
//! and the `theta`'s stay explicit constants. The map to components is an
//! algebra homomorphism commuting with total derivatives, so identities
//! (and vanishing Euler derivatives) proved there hold for components too.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::algebra::{Algebra, Derivation, DerivationLike, Element, Generator, Grade, Monomial};
use crate::cdga::Cdga;
use crate::coeff::Coeff;
use crate::courant::{CourantDatum, DynDer, Frame};
use crate::error::{structural, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: String,
    pub grade: Grade,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, grade: Grade) -> Self {
        FieldSpec { name: name.into(), grade }
    }
}

/// Identifies a jet variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JetVar {
    pub field: u32,
    pub mask: u32,
    pub alpha: u32,
    pub delta: bool,
}

pub struct JetSpace {
    base: Cdga,
    alg: Algebra,
    fields: Vec<FieldSpec>,
    coords: Vec<u32>,
    thetas: Vec<u32>,
    order: u32,
    expand: bool,
    alphas: Vec<Vec<u32>>,
    alpha_index: HashMap<Vec<u32>, u32>,
    extras: u32,
    jet_offset: u32,
    jet_count: u32,
    delta: bool,
}

impl std::fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "JetSpace({} fields, order {})", self.fields.len(), self.order)
    }
}

fn multi_indices(vars: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0u32; vars];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos == cur.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

/// Builder parameters for a jet space.
#[derive(Clone, Debug)]
pub struct JetSpec {
    pub base: Cdga,
    pub fields: Vec<FieldSpec>,
    pub order: u32,
    /// Extra constant generators appended after the base (e.g. a formal
    /// holomorphic volume form).
    pub extras: Vec<Generator>,
    pub delta: bool,
    /// Expand superfields into `theta`-components.
    pub expand: bool,
}

impl JetSpace {
    pub fn new(spec: JetSpec) -> Result<Arc<Self>> {
        let base = spec.base;
        let balg = base.algebra().clone();
        let coords = base.coordinates();
        let thetas = base.odd_generators();
        if spec.expand && thetas.len() > 16 {
            return Err(structural("too many odd base generators for superfield expansion"));
        }
        let alphas = multi_indices(coords.len(), spec.order);
        let alpha_index = alphas.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        let nmask = if spec.expand { 1u32 << thetas.len() } else { 1 };
        let mut gens: Vec<Generator> = balg.generators().to_vec();
        let extras = spec.extras.len() as u32;
        gens.extend(spec.extras);
        let jet_offset = gens.len() as u32;
        let coord_names: Vec<String> =
            coords.iter().map(|&c| balg.generator(c).name.clone()).collect();
        let mut names = Vec::new();
        for f in &spec.fields {
            for mask in 0..nmask {
                let mut grade = f.grade;
                let mut tname = String::new();
                for (k, &t) in thetas.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        grade = grade - balg.generator(t).grade;
                        tname.push_str(&(k + 1).to_string());
                    }
                }
                for a in &alphas {
                    let mut n = f.name.clone();
                    if !tname.is_empty() {
                        n.push_str(&format!("[{tname}]"));
                    }
                    if a.iter().any(|&k| k > 0) {
                        n.push('_');
                        for (i, &k) in a.iter().enumerate() {
                            for _ in 0..k {
                                n.push_str(&coord_names[i]);
                            }
                        }
                    }
                    names.push((n, grade));
                }
            }
        }
        let jet_count = names.len() as u32;
        for (n, g) in &names {
            gens.push(Generator::new(n.clone(), *g));
        }
        if spec.delta {
            for (n, g) in &names {
                gens.push(Generator::new(format!("δ{n}"), *g + Grade::new(0, 1)));
            }
        }
        let alg = Algebra::new(balg.field(), gens)?;
        Ok(Arc::new(JetSpace {
            base,
            alg,
            fields: spec.fields,
            coords,
            thetas,
            order: spec.order,
            expand: spec.expand,
            alphas,
            alpha_index,
            extras,
            jet_offset,
            jet_count,
            delta: spec.delta,
        }))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn base(&self) -> &Cdga {
        &self.base
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn field_index(&self, name: &str) -> Option<u32> {
        self.fields.iter().position(|f| f.name == name).map(|i| i as u32)
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn thetas(&self) -> &[u32] {
        &self.thetas
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn has_delta(&self) -> bool {
        self.delta
    }

    fn nmask(&self) -> u32 {
        if self.expand {
            1 << self.thetas.len()
        } else {
            1
        }
    }

    pub fn expanded(&self) -> bool {
        self.expand
    }

    /// Index of the `k`-th extra constant generator.
    pub fn extra(&self, k: u32) -> u32 {
        assert!(k < self.extras);
        self.base.algebra().len() as u32 + k
    }

    pub fn var_index(&self, v: JetVar) -> u32 {
        let na = self.alphas.len() as u32;
        let idx = (v.field * self.nmask() + v.mask) * na + v.alpha;
        self.jet_offset + idx + if v.delta { self.jet_count } else { 0 }
    }

    pub fn decode(&self, g: u32) -> Option<JetVar> {
        if g < self.jet_offset {
            return None;
        }
        let mut idx = g - self.jet_offset;
        let delta = idx >= self.jet_count;
        if delta {
            idx -= self.jet_count;
        }
        let na = self.alphas.len() as u32;
        let alpha = idx % na;
        let rest = idx / na;
        Some(JetVar { field: rest / self.nmask(), mask: rest % self.nmask(), alpha, delta })
    }

    pub fn alpha(&self, idx: u32) -> &[u32] {
        &self.alphas[idx as usize]
    }

    pub fn alpha_order(&self, idx: u32) -> u32 {
        self.alphas[idx as usize].iter().sum()
    }

    fn shift_alpha(&self, idx: u32, i: usize) -> Option<u32> {
        let mut a = self.alphas[idx as usize].clone();
        a[i] += 1;
        self.alpha_index.get(&a).copied()
    }

    pub fn jet_var(&self, field: u32, mask: u32, alpha: &[u32]) -> Result<Element> {
        let a = *self
            .alpha_index
            .get(alpha)
            .ok_or_else(|| Error::OrderOverflow(format!("multi-index {alpha:?}")))?;
        Ok(self.alg.gen(self.var_index(JetVar { field, mask, alpha: a, delta: false })))
    }

    /// `theta^I` for a mask, in increasing generator order.
    pub fn theta_monomial(&self, mask: u32) -> Monomial {
        Monomial(
            self.thetas
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &t)| (t, 1))
                .collect(),
        )
    }

    /// The superfield `sum_I phi_{I,alpha} theta^I` (or its `delta` copy).
    pub fn superfield_at(&self, field: u32, alpha: u32, delta: bool) -> Element {
        let terms: Vec<Element> = (0..self.nmask())
            .map(|mask| {
                let g = self.var_index(JetVar { field, mask, alpha, delta });
                self.alg.gen(g).mul_term(&Coeff::one(), &self.theta_monomial(mask))
            })
            .collect();
        crate::algebra::sum_owned(&self.alg, terms)
    }

    pub fn superfield(&self, field: u32) -> Element {
        self.superfield_at(field, 0, false)
    }

    pub fn delta_superfield(&self, field: u32) -> Element {
        self.superfield_at(field, 0, true)
    }

    /// Grade of a jet component `phi_I`.
    pub fn component_grade(&self, field: u32, mask: u32) -> Grade {
        let g = self.alg.generator(self.var_index(JetVar { field, mask, alpha: 0, delta: false }));
        g.grade
    }

    /// Embeds an element of the base ring.
    pub fn embed(&self, e: &Element) -> Element {
        e.embed(&self.alg).expect("base is a generator prefix of the jet algebra")
    }

    fn check_orders(&self, e: &Element, extra: u32) -> Result<()> {
        for g in e.support() {
            if let Some(v) = self.decode(g) {
                if self.alpha_order(v.alpha) + extra > self.order {
                    return Err(Error::OrderOverflow(format!(
                        "{} needs jet order {}, declared {}",
                        self.alg.generator(g).name,
                        self.alpha_order(v.alpha) + extra,
                        self.order
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total derivative `D_i` along the `i`-th coordinate.
    pub fn total_derivative(&self, i: usize, e: &Element) -> Result<Element> {
        self.check_orders(e, 1)?;
        Ok(e.derive_by(|g| self.total_image(i, g)))
    }

    fn total_image(&self, i: usize, g: u32) -> Option<Element> {
        if g == self.coords[i] {
            return Some(self.alg.one());
        }
        let v = self.decode(g)?;
        let a = self.shift_alpha(v.alpha, i).expect("order checked");
        Some(self.alg.gen(self.var_index(JetVar { alpha: a, ..v })))
    }

    /// `D^alpha e`.
    pub fn total_derivative_multi(&self, alpha: &[u32], e: &Element) -> Result<Element> {
        let mut out = e.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = self.total_derivative(i, &out)?;
                if out.is_zero() {
                    return Ok(out);
                }
            }
        }
        Ok(out)
    }

    /// Lift of a derivation of the base that kills the odd generators:
    /// acts as `X` on the base and by `phi_{I,alpha} -> sum_i X(x_i) phi_{I,alpha+e_i}`.
    pub fn lift(self: &Arc<Self>, x: &Derivation) -> Result<JetLift> {
        self.base.algebra().check_same(x.algebra())?;
        for &t in &self.thetas {
            if x.image(t).is_some_and(|e| !e.is_zero()) {
                return Err(structural(format!(
                    "cannot lift a derivation that moves `{}`",
                    self.alg.generator(t).name
                )));
            }
        }
        let on_coords: Vec<(usize, Element)> = self
            .coords
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| x.image(c).map(|e| (i, self.embed(e))))
            .collect();
        let base_images =
            x.images().iter().map(|(&g, e)| (g, self.embed(e))).collect::<BTreeMap<_, _>>();
        Ok(JetLift { jet: self.clone(), base_images, on_coords })
    }

    pub fn total(self: &Arc<Self>, i: usize) -> TotalDerivative {
        TotalDerivative { jet: self.clone(), i }
    }

    /// The structure data of `datum` over this jet algebra: anchors and the
    /// base differential act through their lifts, divergence uses total
    /// derivatives.
    pub fn frame(self: &Arc<Self>, datum: &CourantDatum) -> Result<Frame> {
        datum.algebra().check_same(self.base.algebra())?;
        let mut fr = datum.frame_over(&self.alg)?;
        fr.anchors = datum
            .anchors()
            .iter()
            .map(|x| Ok(Arc::new(self.lift(x)?) as DynDer))
            .collect::<Result<Vec<_>>>()?;
        fr.dbar = Arc::new(self.lift(self.base.differential())?);
        fr.coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &g)| (g, Arc::new(self.total(i)) as DynDer))
            .collect();
        Ok(fr)
    }

    /// The field-space de Rham differential `delta` (odd).
    pub fn delta(&self, e: &Element) -> Result<Element> {
        if !self.delta {
            return Err(structural("jet space was built without delta generators"));
        }
        Ok(e.derive_by(|g| {
            let v = self.decode(g)?;
            (!v.delta).then(|| self.alg.gen(self.var_index(JetVar { delta: true, ..v })))
        }))
    }

    /// Right coefficient of `theta^top` (Berezin integral over the odd base
    /// directions); identity when the base has none.
    pub fn integrate(&self, e: &Element) -> Element {
        if self.thetas.is_empty() {
            return e.clone();
        }
        let top = Monomial(self.thetas.iter().map(|&t| (t, 1)).collect());
        e.split_right(&self.thetas).remove(&top).unwrap_or_else(|| self.alg.zero())
    }

    /// The representative used for functional identities: the Berezin
    /// integral in component mode, the full superfield density otherwise
    /// (superfield Euler derivatives already control every component).
    pub fn functional_density(&self, e: &Element) -> Element {
        if self.expand {
            self.integrate(e)
        } else {
            e.clone()
        }
    }

    /// Component generators `phi_I` (order zero, not delta).
    pub fn components(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for f in 0..self.fields.len() as u32 {
            for mask in 0..self.nmask() {
                out.push(self.var_index(JetVar { field: f, mask, alpha: 0, delta: false }));
            }
        }
        out
    }

    pub fn component_name(&self, g: u32) -> &str {
        &self.alg.generator(g).name
    }

    /// Euler operator `E_phi(L) = sum_alpha (-D)^alpha dL/dphi_alpha` with
    /// graded left derivatives, for the component generator `g` (or its
    /// delta copy).
    pub fn euler(&self, l: &Element, g: u32) -> Result<Element> {
        let v = self.decode(g).ok_or_else(|| structural("not a jet variable"))?;
        let mut terms = Vec::new();
        for a in 0..self.alphas.len() as u32 {
            let ga = self.var_index(JetVar { alpha: a, ..v });
            let p = l.left_derivative(ga);
            if p.is_zero() {
                continue;
            }
            let mut t = self.total_derivative_multi(&self.alphas[a as usize].clone(), &p)?;
            if self.alpha_order(a) % 2 == 1 {
                t = -t;
            }
            terms.push(t);
        }
        Ok(crate::algebra::sum_owned(&self.alg, terms))
    }

    /// Terms of `l` free of jet variables.
    pub fn field_free_part(&self, l: &Element) -> Element {
        let off = self.jet_offset;
        l.filter(|m| m.0.iter().all(|&(g, _)| g < off))
    }

    /// Whether `l` is a total derivative: every Euler derivative vanishes and
    /// the field-free part is a divergence (automatic for polynomials once a
    /// coordinate exists).
    pub fn total_derivative_test(&self, l: &Element) -> Result<TotalDerivativeReport> {
        let l = &self.functional_density(l);
        let comps: Vec<u32> = self.components();
        let used: std::collections::HashSet<(u32, u32, bool)> = l
            .support()
            .into_iter()
            .filter_map(|g| self.decode(g))
            .map(|v| (v.field, v.mask, v.delta))
            .collect();
        let mut gens = Vec::new();
        for g in comps {
            let v = self.decode(g).expect("component");
            if used.contains(&(v.field, v.mask, false)) {
                gens.push(g);
            }
            if used.contains(&(v.field, v.mask, true)) {
                gens.push(self.var_index(JetVar { delta: true, ..v }));
            }
        }
        let res = crate::par::map(&gens, |&g| self.euler(l, g));
        for (g, r) in gens.iter().zip(res) {
            let r = r?;
            if !r.is_zero() {
                return Ok(TotalDerivativeReport {
                    total_derivative: false,
                    witness: Some(format!("E[{}] = {}", self.component_name(*g), r.render())),
                });
            }
        }
        let free = self.field_free_part(l);
        if !free.is_zero() && self.coords.is_empty() {
            return Ok(TotalDerivativeReport {
                total_derivative: false,
                witness: Some(format!("field-free part {}", free.render())),
            });
        }
        Ok(TotalDerivativeReport { total_derivative: true, witness: None })
    }

    /// Euler residues of a local one-form `sum delta(phi_alpha) c_alpha` in
    /// each field direction: `sum_alpha (-D)^alpha c_alpha`.
    pub fn one_form_residues(&self, r: &Element) -> Result<Vec<(String, Element)>> {
        let r = &self.functional_density(r);
        let used: std::collections::BTreeSet<(u32, u32)> = r
            .support()
            .into_iter()
            .filter_map(|g| self.decode(g))
            .filter(|v| v.delta)
            .map(|v| (v.field, v.mask))
            .collect();
        let gens: Vec<u32> = used
            .into_iter()
            .map(|(field, mask)| self.var_index(JetVar { field, mask, alpha: 0, delta: true }))
            .collect();
        let res = crate::par::map(&gens, |&g| self.euler(r, g));
        let mut out = Vec::new();
        for (g, e) in gens.iter().zip(res) {
            let e = e?;
            if !e.is_zero() {
                out.push((self.component_name(*g).to_string(), e));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalDerivativeReport {
    pub total_derivative: bool,
    pub witness: Option<String>,
}

/// Lazily evaluated lift of a base derivation to the jet algebra.
pub struct JetLift {
    jet: Arc<JetSpace>,
    base_images: BTreeMap<u32, Element>,
    on_coords: Vec<(usize, Element)>,
}

impl DerivationLike for JetLift {
    fn algebra(&self) -> &Algebra {
        &self.jet.alg
    }

    fn image(&self, g: u32) -> Option<Element> {
        if let Some(e) = self.base_images.get(&g) {
            return Some(e.clone());
        }
        let v = self.jet.decode(g)?;
        let terms: Vec<Element> = self
            .on_coords
            .iter()
            .map(|(i, c)| {
                let a = self.jet.shift_alpha(v.alpha, *i).unwrap_or_else(|| {
                    panic!("jet order overflow lifting through {}", self.jet.component_name(g))
                });
                c * &self.jet.alg.gen(self.jet.var_index(JetVar { alpha: a, ..v }))
            })
            .collect();
        Some(crate::algebra::sum_owned(&self.jet.alg, terms))
    }
}

pub struct TotalDerivative {
    jet: Arc<JetSpace>,
    i: usize,
}

impl DerivationLike for TotalDerivative {
    fn algebra(&self) -> &Algebra {
        &self.jet.alg
    }

    fn image(&self, g: u32) -> Option<Element> {
        if g == self.jet.coords[self.i] {
            return Some(self.jet.alg.one());
        }
        let v = self.jet.decode(g)?;
        let a = self.jet.shift_alpha(v.alpha, self.i).unwrap_or_else(|| {
            panic!("jet order overflow differentiating {}", self.jet.component_name(g))
        });
        Some(self.jet.alg.gen(self.jet.var_index(JetVar { alpha: a, ..v })))
    }
}

/// An evolutionary vector field, given by the superfield it assigns to each
/// field and prolonged to jets on demand: `X(phi_{I,alpha}) = D^alpha X(phi_I)`.
pub struct Evolutionary {
    jet: Arc<JetSpace>,
    parity: u8,
    /// Images of order-zero components.
    components: HashMap<u32, Element>,
    cache: Mutex<HashMap<u32, Element>>,
}

impl std::fmt::Debug for Evolutionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Evolutionary(parity {}, {} components)", self.parity, self.components.len())
    }
}

impl Evolutionary {
    /// `targets[k] = (field, superfield image)`. The image of `phi_J` is the
    /// right coefficient of `theta^J` in the target. `parity` is the parity
    /// of the vector field.
    pub fn from_superfields(jet: &Arc<JetSpace>, parity: u8, targets: &[(u32, Element)]) -> Result<Self> {
        let mut components = HashMap::new();
        for (field, t) in targets {
            jet.alg.check_same(t.algebra())?;
            if !jet.expand {
                let g = jet.var_index(JetVar { field: *field, mask: 0, alpha: 0, delta: false });
                components.insert(g, t.clone());
                continue;
            }
            let parts = t.split_right(jet.thetas());
            for (mono, coeff) in parts {
                let mask = jet
                    .thetas()
                    .iter()
                    .enumerate()
                    .filter(|(_, th)| mono.exponent(**th) > 0)
                    .fold(0u32, |m, (k, _)| m | 1 << k);
                let g = jet.var_index(JetVar { field: *field, mask, alpha: 0, delta: false });
                components.insert(g, coeff);
            }
        }
        Ok(Evolutionary { jet: jet.clone(), parity, components, cache: Mutex::new(HashMap::new()) })
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn jet(&self) -> &Arc<JetSpace> {
        &self.jet
    }

    /// Image of a jet variable (zero on base generators and delta copies).
    pub fn image_of(&self, g: u32) -> Result<Option<Element>> {
        let Some(v) = self.jet.decode(g) else { return Ok(None) };
        if v.delta {
            return Ok(None);
        }
        if let Some(e) = self.cache.lock().expect("cache").get(&g) {
            return Ok(Some(e.clone()));
        }
        let g0 = self.jet.var_index(JetVar { alpha: 0, ..v });
        let Some(base) = self.components.get(&g0) else { return Ok(None) };
        let alpha = self.jet.alpha(v.alpha).to_vec();
        let e = self.jet.total_derivative_multi(&alpha, base)?;
        self.cache.lock().expect("cache").insert(g, e.clone());
        Ok(Some(e))
    }

    /// The target superfield of a field: `sum_J X(phi_J) theta^J`.
    pub fn superfield_image(&self, field: u32) -> Element {
        let terms: Vec<Element> = (0..self.jet.nmask())
            .filter_map(|mask| {
                let g = self.jet.var_index(JetVar { field, mask, alpha: 0, delta: false });
                self.components.get(&g).map(|c| c.mul_term(&Coeff::one(), &self.jet.theta_monomial(mask)))
            })
            .collect();
        crate::algebra::sum_owned(&self.jet.alg, terms)
    }

    pub fn apply(&self, l: &Element) -> Result<Element> {
        let mut images: HashMap<u32, Element> = HashMap::new();
        for g in l.support() {
            if let Some(e) = self.image_of(g)? {
                images.insert(g, e);
            }
        }
        Ok(l.derive_by(|g| images.get(&g).cloned()))
    }

    /// Contraction `i_X` on local forms: `i_X(delta phi_alpha) = (-1)^{|X|} D^alpha X(phi)`.
    pub fn contract(&self, l: &Element) -> Result<Element> {
        let mut images: HashMap<u32, Element> = HashMap::new();
        for g in l.support() {
            if let Some(v) = self.jet.decode(g) {
                if v.delta {
                    let plain = self.jet.var_index(JetVar { delta: false, ..v });
                    if let Some(e) = self.image_of(plain)? {
                        images.insert(g, if self.parity == 1 { -e } else { e });
                    }
                }
            }
        }
        Ok(l.derive_by(|g| images.get(&g).cloned()))
    }

    /// Component images, for reports.
    pub fn component_images(&self) -> Vec<(String, Element)> {
        let mut v: Vec<(u32, &Element)> = self.components.iter().map(|(g, e)| (*g, e)).collect();
        v.sort_by_key(|(g, _)| *g);
        v.into_iter().map(|(g, e)| (self.jet.component_name(g).to_string(), e.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientField;

    fn line(order: u32) -> Arc<JetSpace> {
        JetSpace::new(JetSpec {
            base: Cdga::polynomial(CoefficientField::Rationals, &["t"]).unwrap(),
            fields: vec![FieldSpec::new("phi", Grade::ZERO)],
            order,
            extras: vec![],
            delta: false,
            expand: true,
        })
        .unwrap()
    }

    #[test]
    fn euler_examples() {
        let j = line(3);
        let phi = j.jet_var(0, 0, &[0]).unwrap();
        let phi1 = j.jet_var(0, 0, &[1]).unwrap();
        let phi2 = j.jet_var(0, 0, &[2]).unwrap();
        let g = j.var_index(JetVar { field: 0, mask: 0, alpha: 0, delta: false });
        assert!(j.euler(&(&phi * &phi1), g).unwrap().is_zero());
        assert_eq!(j.euler(&(&phi1 * &phi1), g).unwrap(), phi2.scale_rat(-2, 1));
        assert_eq!(j.euler(&(&phi * &phi), g).unwrap(), phi.scale_rat(2, 1));
        assert!(j.total_derivative_test(&(&phi * &phi1)).unwrap().total_derivative);
        assert!(!j.total_derivative_test(&(&phi * &phi)).unwrap().total_derivative);
    }

    #[test]
    fn order_overflow_is_reported() {
        let j = line(1);
        let phi1 = j.jet_var(0, 0, &[1]).unwrap();
        assert!(matches!(j.total_derivative(0, &phi1), Err(Error::OrderOverflow(_))));
        let g = j.var_index(JetVar { field: 0, mask: 0, alpha: 0, delta: false });
        assert!(matches!(j.euler(&(&phi1 * &phi1), g), Err(Error::OrderOverflow(_))));
    }

    #[test]
    fn scaling_field() {
        let j = line(2);
        let phi = j.superfield(0);
        let x = Evolutionary::from_superfields(&j, 0, &[(0, phi.clone())]).unwrap();
        assert_eq!(x.apply(&(&phi * &phi)).unwrap(), (&phi * &phi).scale_rat(2, 1));
    }

    #[test]
    fn superfield_components_have_shifted_parity() {
        let j = JetSpace::new(JetSpec {
            base: Cdga::dolbeault(1),
            fields: vec![FieldSpec::new("b", Grade::ZERO)],
            order: 1,
            extras: vec![],
            delta: true,
            expand: true,
        })
        .unwrap();
        assert_eq!(j.component_grade(0, 0).parity(), 0);
        assert_eq!(j.component_grade(0, 1).parity(), 1);
        let s = j.superfield(0);
        assert_eq!(s.parity(), Some(0));
        assert_eq!(j.integrate(&s).render(), "b[1]");
    }
}
