//! Courant algebroids presented by structure data on a free module.
//!
//! The bracket is extended from the basis table `[e_a, e_b] = c_ab` by the
//! second-slot Leibniz rule and the first-slot rule
//! `[f u, v] = f[u,v] - (rho(v) f) u + <u,v> D f`. Written out with
//! coefficients kept on the left,
//!
//! ```text
//! [u, v] = sum_ab  u^a v^b c_ab + u^a X_a(v^b) e_b - X_b(u^a) v^b e_a
//!                  + eta_ab (D u^a) v^b
//! ```
//!
//! where `X_a = rho(e_a)`. Anchors are even, so every Koszul sign is carried
//! by the order of the factors.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{koszul, sum_owned, Algebra, Derivation, DerivationLike, Element, Grade, Monomial};
use crate::cdga::Cdga;
use crate::coeff::Coeff;
use crate::error::{structural, Result};
use crate::module::{pair_with, sum_sections, DgModule, Pairing, Section};
use crate::par;

pub type DynDer = Arc<dyn DerivationLike>;

/// The structure data of a Courant algebroid realized over some algebra of
/// coefficients: the base ring itself, or a jet algebra containing it.
#[derive(Clone)]
pub struct Frame {
    pub(crate) alg: Algebra,
    pub(crate) anchors: Vec<DynDer>,
    pub(crate) eta: Vec<Vec<Element>>,
    pub(crate) eta_inv: Vec<Vec<Element>>,
    pub(crate) structure: Vec<Vec<Section>>,
    pub(crate) dbar: DynDer,
    pub(crate) module_diff: Vec<Section>,
    /// Coordinate generators and the derivative along each (for divergence).
    pub(crate) coords: Vec<(u32, DynDer)>,
}

impl Frame {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn rank(&self) -> usize {
        self.eta.len()
    }

    pub fn basis(&self, a: usize) -> Section {
        Section::basis(&self.alg, self.rank(), a)
    }

    pub fn zero_section(&self) -> Section {
        Section::zero(&self.alg, self.rank())
    }

    /// `rho(u)(h) = sum_a u^a X_a(h)`.
    pub fn anchor(&self, u: &Section, h: &Element) -> Element {
        let terms = u
            .coeffs()
            .iter()
            .zip(&self.anchors)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| c * &x.apply_to(h));
        sum_owned(&self.alg, terms)
    }

    /// `(D h)^c = sum_d eta_inv^{cd} X_d(h)`.
    pub fn d_script(&self, h: &Element) -> Section {
        let xs: Vec<Element> = self.anchors.iter().map(|x| x.apply_to(h)).collect();
        let n = self.rank();
        Section::new(
            (0..n)
                .map(|c| {
                    sum_owned(
                        &self.alg,
                        (0..n)
                            .filter(|&d| !self.eta_inv[c][d].is_zero() && !xs[d].is_zero())
                            .map(|d| &self.eta_inv[c][d] * &xs[d]),
                    )
                })
                .collect(),
        )
    }

    pub fn pair(&self, u: &Section, v: &Section) -> Element {
        pair_with(&self.alg, &self.eta, u, v)
    }

    pub fn bracket(&self, u: &Section, v: &Section) -> Section {
        let n = self.rank();
        let mut cols: Vec<Vec<Element>> = vec![Vec::new(); n];
        for (a, ua) in u.coeffs().iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            let dua = self.d_script(ua);
            let xua: Vec<Element> = self.anchors.iter().map(|x| x.apply_to(ua)).collect();
            for (b, vb) in v.coeffs().iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let uv = ua * vb;
                for (c, k) in self.structure[a][b].coeffs().iter().enumerate() {
                    if !k.is_zero() {
                        cols[c].push(&uv * k);
                    }
                }
                let xv = self.anchors[a].apply_to(vb);
                if !xv.is_zero() {
                    cols[b].push(ua * &xv);
                }
                if !xua[b].is_zero() {
                    cols[a].push(-(&xua[b] * vb));
                }
                let e = &self.eta[a][b];
                if !e.is_zero() {
                    for (c, dc) in dua.coeffs().iter().enumerate() {
                        if !dc.is_zero() {
                            cols[c].push(&(dc * vb) * e);
                        }
                    }
                }
            }
        }
        Section::new(cols.into_iter().map(|v| sum_owned(&self.alg, v)).collect())
    }

    /// Internal differential on sections.
    pub fn apply_d(&self, u: &Section) -> Section {
        let mut out = vec![u.map(|c| self.dbar.apply_to(c))];
        for (a, c) in u.coeffs().iter().enumerate() {
            if self.module_diff[a].is_zero() || c.is_zero() {
                continue;
            }
            let [ev, od] = c.parity_parts();
            out.push(self.module_diff[a].lmul(&ev));
            out.push(self.module_diff[a].lmul(&od).neg());
        }
        sum_sections(self.rank(), &self.alg, out)
    }

    /// Coordinate divergence of the vector field `rho(u)`.
    pub fn divergence(&self, u: &Section) -> Element {
        let terms = self.coords.iter().map(|(g, d)| {
            let xi = self.alg.gen(*g);
            d.apply_to(&self.anchor(u, &xi))
        });
        sum_owned(&self.alg, terms)
    }

    /// Generalized Lie derivative of the density `g * vol`; returns the new
    /// coefficient of `vol`: `rho(u) g + div(rho u) g`.
    pub fn lie_density(&self, u: &Section, g: &Element) -> Element {
        &self.anchor(u, g) + &(&self.divergence(u) * g)
    }

    /// `Jac(u,v,w) = [u,[v,w]] - (-1)^{|u||v|}[v,[u,w]] - [[u,v],w]`.
    pub fn jacobiator(&self, u: &Section, v: &Section, w: &Section) -> Section {
        let s = koszul(par_of(u), par_of(v));
        let a = self.bracket(u, &self.bracket(v, w));
        let b = self.bracket(v, &self.bracket(u, w));
        let c = self.bracket(&self.bracket(u, v), w);
        let mid = if s == 1 { a.sub(&b) } else { a.add(&b) };
        mid.sub(&c)
    }
}

pub(crate) fn par_of(u: &Section) -> u8 {
    u.parity().unwrap_or(0)
}

fn par_el(e: &Element) -> u8 {
    e.parity().unwrap_or(0)
}

/// A Courant algebroid over a cdga, given by structure data on a basis.
#[derive(Clone)]
pub struct CourantDatum {
    name: String,
    module: DgModule,
    eta: Pairing,
    anchors: Vec<Derivation>,
    structure: Vec<Vec<Section>>,
    frame: Frame,
}

impl std::fmt::Debug for CourantDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CourantDatum({}, rank {})", self.name, self.rank())
    }
}

impl CourantDatum {
    pub fn new(
        name: impl Into<String>,
        module: DgModule,
        eta: Pairing,
        anchors: Vec<Derivation>,
        structure: Vec<Vec<Section>>,
    ) -> Result<Self> {
        let n = module.rank();
        let alg = module.algebra().clone();
        if eta.rank() != n || anchors.len() != n || structure.len() != n {
            return Err(structural("pairing, anchor and bracket table must match the module rank"));
        }
        for x in &anchors {
            alg.check_same(x.algebra())?;
            if let Some(g) = x.grade() {
                if g != Grade::ZERO {
                    return Err(structural(format!("anchor has grade {g}, expected (0,0)")));
                }
            } else if !x.is_zero() {
                return Err(structural("anchor is not homogeneous of grade (0,0)"));
            }
        }
        for row in &structure {
            if row.len() != n {
                return Err(structural("bracket table is not square"));
            }
            for s in row {
                if s.rank() != n {
                    return Err(structural("bracket entry has the wrong rank"));
                }
                for c in s.coeffs() {
                    alg.check_same(c.algebra())?;
                }
            }
        }
        let base = module.base();
        let coords = base
            .coordinates()
            .into_iter()
            .map(|g| (g, Arc::new(Derivation::partial(&alg, g)) as DynDer))
            .collect();
        let frame = Frame {
            alg: alg.clone(),
            anchors: anchors.iter().map(|x| Arc::new(x.clone()) as DynDer).collect(),
            eta: eta.matrix().to_vec(),
            eta_inv: eta.inverse().to_vec(),
            structure: structure.clone(),
            dbar: Arc::new(base.differential().clone()),
            module_diff: module.differential().to_vec(),
            coords,
        };
        Ok(CourantDatum { name: name.into(), module, eta, anchors, structure, frame })
    }

    /// The structure data over an algebra extending the base by extra
    /// generators, on which anchors and differential act by zero.
    pub fn frame_over(&self, alg: &Algebra) -> Result<Frame> {
        let emb = |e: &Element| e.embed(alg);
        let emb_sec = |s: &Section| s.try_map(|c| c.embed(alg));
        let anchors = self
            .anchors
            .iter()
            .map(|x| Ok(Arc::new(x.embed(alg)?) as DynDer))
            .collect::<Result<Vec<_>>>()?;
        let coords = self
            .base()
            .coordinates()
            .into_iter()
            .map(|g| (g, Arc::new(Derivation::partial(alg, g)) as DynDer))
            .collect();
        Ok(Frame {
            alg: alg.clone(),
            anchors,
            eta: self.frame.eta.iter().map(|r| r.iter().map(emb).collect()).collect::<Result<_>>()?,
            eta_inv: self
                .frame
                .eta_inv
                .iter()
                .map(|r| r.iter().map(emb).collect())
                .collect::<Result<_>>()?,
            structure: self
                .structure
                .iter()
                .map(|r| r.iter().map(emb_sec).collect())
                .collect::<Result<_>>()?,
            dbar: Arc::new(self.base().differential().embed(alg)?),
            module_diff: self.frame.module_diff.iter().map(emb_sec).collect::<Result<_>>()?,
            coords,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Cdga {
        self.module.base()
    }

    pub fn algebra(&self) -> &Algebra {
        self.module.algebra()
    }

    pub fn module(&self) -> &DgModule {
        &self.module
    }

    pub fn pairing(&self) -> &Pairing {
        &self.eta
    }

    pub fn anchors(&self) -> &[Derivation] {
        &self.anchors
    }

    pub fn structure(&self) -> &[Vec<Section>] {
        &self.structure
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn names(&self) -> &[String] {
        self.module.names()
    }

    pub fn basis(&self, a: usize) -> Section {
        self.module.basis(a)
    }

    pub fn section(&self, coeffs: Vec<Element>) -> Result<Section> {
        if coeffs.len() != self.rank() {
            return Err(structural("wrong number of section coefficients"));
        }
        for c in &coeffs {
            self.algebra().check_same(c.algebra())?;
        }
        Ok(Section::new(coeffs))
    }

    pub fn render(&self, u: &Section) -> String {
        u.render(self.names())
    }

    fn check(&self, u: &Section) -> Result<()> {
        if u.rank() != self.rank() {
            return Err(structural("section does not belong to this module"));
        }
        for c in u.coeffs() {
            self.algebra().check_same(c.algebra())?;
        }
        Ok(())
    }

    pub fn bracket(&self, u: &Section, v: &Section) -> Result<Section> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.frame.bracket(u, v))
    }

    pub fn pair(&self, u: &Section, v: &Section) -> Result<Element> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.frame.pair(u, v))
    }

    pub fn d_script(&self, f: &Element) -> Result<Section> {
        self.algebra().check_same(f.algebra())?;
        Ok(self.frame.d_script(f))
    }

    pub fn anchor_apply(&self, u: &Section, f: &Element) -> Result<Element> {
        self.check(u)?;
        self.algebra().check_same(f.algebra())?;
        Ok(self.frame.anchor(u, f))
    }

    /// `rho(u)` as an explicit derivation of the base ring.
    pub fn rho(&self, u: &Section) -> Result<Derivation> {
        self.check(u)?;
        let alg = self.algebra();
        let images = (0..alg.len() as u32).map(|g| (g, self.frame.anchor(u, &alg.gen(g))));
        Derivation::new(alg, images)
    }

    pub fn lie_function(&self, u: &Section, f: &Element) -> Result<Element> {
        self.anchor_apply(u, f)
    }

    pub fn lie_section(&self, u: &Section, v: &Section) -> Result<Section> {
        self.bracket(u, v)
    }

    /// `L_u (g vol)` as the coefficient of `vol`.
    pub fn lie_density(&self, u: &Section, g: &Element) -> Result<Element> {
        self.check(u)?;
        Ok(self.frame.lie_density(u, g))
    }

    pub fn apply_d(&self, u: &Section) -> Result<Section> {
        self.check(u)?;
        Ok(self.frame.apply_d(u))
    }

    pub fn jacobiator(&self, u: &Section, v: &Section, w: &Section) -> Result<Section> {
        self.check(u)?;
        self.check(v)?;
        self.check(w)?;
        Ok(self.frame.jacobiator(u, v, w))
    }

    /// `R(u,v) = rho([u,v]) - [rho(u), rho(v)]` on the base ring.
    pub fn curvature(&self, u: &Section, v: &Section) -> Result<Derivation> {
        let (p, q) = (par_of(u), par_of(v));
        let ru = self.rho(u)?;
        let rv = self.rho(v)?;
        let ruv = self.rho(&self.bracket(u, v)?)?;
        Ok(ruv.add(&ru.commutator(&rv, p, q).neg()))
    }

    /// Entries of `rho eta^{-1} rho^dual` on pairs of generators; empty when
    /// `ker rho` is coisotropic.
    pub fn coisotropy_defects(&self) -> Vec<(String, String, Element)> {
        let alg = self.algebra();
        let n = self.rank();
        let ng = alg.len() as u32;
        let xs: Vec<Vec<Element>> = (0..ng)
            .map(|g| self.anchors.iter().map(|x| x.apply_unchecked(&alg.gen(g))).collect())
            .collect();
        let mut out = Vec::new();
        for i in 0..ng {
            for j in 0..ng {
                let mut terms = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        let e = &self.frame.eta_inv[a][b];
                        if e.is_zero() || xs[i as usize][a].is_zero() || xs[j as usize][b].is_zero() {
                            continue;
                        }
                        terms.push(&(&xs[i as usize][a] * e) * &xs[j as usize][b]);
                    }
                }
                let s = sum_owned(alg, terms);
                if !s.is_zero() {
                    out.push((alg.generator(i).name.clone(), alg.generator(j).name.clone(), s));
                }
            }
        }
        out
    }
}

/// Parameters of the randomized part of a test set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestConfig {
    pub random_sections: usize,
    pub degree: u32,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig { random_sections: 8, degree: 2, seed: 0x5eed }
    }
}

/// Sections and functions used to exercise the axioms.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub sections: Vec<(String, Section)>,
    pub functions: Vec<(String, Element)>,
    pub basis_count: usize,
}

/// Random polynomial of total degree at most `deg` in `vars`.
pub fn random_polynomial(alg: &Algebra, vars: &[u32], deg: u32, rng: &mut ChaCha8Rng) -> Element {
    let mut monos: Vec<Vec<(u32, u32)>> = vec![vec![]];
    for &v in vars {
        let mut next = Vec::new();
        for m in &monos {
            let used: u32 = m.iter().map(|&(_, e)| e).sum();
            for e in 0..=(deg - used) {
                let mut m2 = m.clone();
                if e > 0 {
                    m2.push((v, e));
                }
                next.push(m2);
            }
        }
        monos = next;
    }
    let terms = monos.into_iter().filter_map(|mut m| {
        if rng.gen_bool(0.4) {
            return None;
        }
        let c = rng.gen_range(-3i64..=3);
        m.sort_unstable();
        (c != 0).then(|| (Monomial(m), Coeff::int(c)))
    });
    let e = Element::from_terms(alg, terms);
    if e.is_zero() {
        alg.one()
    } else {
        e
    }
}

impl CourantDatum {
    /// Basis sections plus deterministic random sections and functions.
    /// Odd random sections (coefficients times an odd generator of the base)
    /// alternate with even ones when the base has odd generators.
    pub fn test_set(&self, cfg: &TestConfig) -> TestSet {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let alg = self.algebra();
        let coords: Vec<u32> = self.base().coordinates().into_iter().take(2).collect();
        let odd = self.base().odd_generators();
        let n = self.rank();
        let mut sections: Vec<(String, Section)> =
            (0..n).map(|a| (self.names()[a].clone(), self.basis(a))).collect();
        for i in 0..cfg.random_sections {
            let coeffs: Vec<Element> =
                (0..n).map(|_| random_polynomial(alg, &coords, cfg.degree, &mut rng)).collect();
            let mut s = Section::new(coeffs);
            if i % 2 == 1 && !odd.is_empty() {
                let g = odd[rng.gen_range(0..odd.len())];
                s = s.lmul(&alg.gen(g));
            }
            sections.push((format!("r{}", i + 1), s));
        }
        let mut functions: Vec<(String, Element)> = Vec::new();
        for i in 0..3 {
            let mut f = random_polynomial(alg, &coords, cfg.degree, &mut rng);
            if i == 1 && !odd.is_empty() {
                f = &f * &alg.gen(odd[0]);
            }
            functions.push((format!("f{}", i + 1), f));
        }
        TestSet { sections, functions, basis_count: n }
    }
}

impl TestSet {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.basis_count;
        let m = self.sections.len() - n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                out.push((a, b));
            }
        }
        for i in 0..m {
            let r = n + i;
            out.push((r, n + (i + 1) % m));
            out.push((r, r));
            if n > 0 {
                out.push((r, i % n));
                out.push(((i + 1) % n, r));
            }
        }
        out
    }

    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.basis_count;
        let m = self.sections.len() - n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out.push((a, b, c));
                }
            }
        }
        for i in 0..m {
            out.push((n + i, n + (i + 1) % m, n + (i + 2) % m));
            if n > 0 {
                out.push((n + i, i % n, n + (i + 3) % m));
                out.push((i % n, n + i, (i + 1) % n));
            }
        }
        out
    }
}

/// One verdict line of a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn new(name: impl Into<String>, checked: usize, witness: Option<String>) -> Self {
        Verdict { name: name.into(), pass: witness.is_none(), checked, witness }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        Verdict { name: name.into(), pass: ok, checked: 1, witness: (!ok).then_some(detail) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub leibniz: Verdict,
    pub antisymmetry: Verdict,
    pub pairing: Verdict,
    pub jacobi: Verdict,
    pub coisotropy: Verdict,
    pub differential: Verdict,
}

impl AxiomReport {
    pub fn verdicts(&self) -> [&Verdict; 6] {
        [
            &self.leibniz,
            &self.antisymmetry,
            &self.pairing,
            &self.jacobi,
            &self.coisotropy,
            &self.differential,
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }
}

/// First failure in input order, rendered by `show`.
fn first_failure<T: Sync, R: Send>(
    items: &[T],
    run: impl Fn(&T) -> Option<R> + Sync + Send,
    show: impl Fn(&T, R) -> String,
) -> Option<String> {
    let results = par::map(items, run);
    items.iter().zip(results).find_map(|(t, r)| r.map(|r| show(t, r)))
}

impl CourantDatum {
    pub fn check_axioms(&self, cfg: &TestConfig) -> AxiomReport {
        let ts = self.test_set(cfg);
        self.check_axioms_on(&ts)
    }

    pub fn check_axioms_on(&self, ts: &TestSet) -> AxiomReport {
        let fr = &self.frame;
        let secs = &ts.sections;
        let label = |i: usize| secs[i].0.clone();
        let sec = |i: usize| &secs[i].1;
        let pairs = ts.pairs();
        let triples = ts.triples();
        let nf = ts.functions.len();

        let leib_cases: Vec<(usize, usize, usize)> =
            pairs.iter().enumerate().map(|(k, &(i, j))| (i, j, k % nf)).collect();
        let leibniz = first_failure(
            &leib_cases,
            |&(i, j, k)| {
                let (u, v) = (sec(i), sec(j));
                let f = &ts.functions[k].1;
                let lhs = fr.bracket(u, &v.lmul(f));
                let t1 = v.lmul(&fr.anchor(u, f));
                let t2 = fr.bracket(u, v).lmul(f);
                let rhs = if koszul(par_of(u), par_el(f)) == 1 { t1.add(&t2) } else { t1.sub(&t2) };
                let r = lhs.sub(&rhs);
                (!r.is_zero()).then_some(r)
            },
            |&(i, j, k), r| {
                format!("({}, {}*{}) -> {}", label(i), ts.functions[k].0, label(j), self.render(&r))
            },
        );

        let antisymmetry = first_failure(
            &pairs,
            |&(i, j)| {
                let (u, v) = (sec(i), sec(j));
                let a = fr.bracket(u, v);
                let b = fr.bracket(v, u);
                let sym = if koszul(par_of(u), par_of(v)) == 1 { a.add(&b) } else { a.sub(&b) };
                let r = sym.sub(&fr.d_script(&fr.pair(u, v)));
                (!r.is_zero()).then_some(r)
            },
            |&(i, j), r| format!("({}, {}) -> {}", label(i), label(j), self.render(&r)),
        );

        let pairing = first_failure(
            &triples,
            |&(i, j, k)| {
                let (u, v, w) = (sec(i), sec(j), sec(k));
                let lhs = fr.anchor(u, &fr.pair(v, w));
                let a = fr.pair(&fr.bracket(u, v), w);
                let b = fr.pair(v, &fr.bracket(u, w));
                let rhs = if koszul(par_of(u), par_of(v)) == 1 { &a + &b } else { &a - &b };
                let r = &lhs - &rhs;
                (!r.is_zero()).then_some(r)
            },
            |&(i, j, k), r| format!("({}, {}, {}) -> {}", label(i), label(j), label(k), r),
        );

        let jacobi = first_failure(
            &triples,
            |&(i, j, k)| {
                let r = fr.jacobiator(sec(i), sec(j), sec(k));
                (!r.is_zero()).then_some(r)
            },
            |&(i, j, k), r| {
                format!("({}, {}, {}) -> {}", label(i), label(j), label(k), self.render(&r))
            },
        );

        let defects = self.coisotropy_defects();
        let coisotropy = Verdict::new(
            "coisotropy",
            self.algebra().len().pow(2),
            defects.first().map(|(a, b, e)| format!("({a}, {b}) -> {e}")),
        );

        let differential = self.differential_witness(ts, &pairs);

        AxiomReport {
            leibniz: Verdict::new("leibniz", leib_cases.len(), leibniz),
            antisymmetry: Verdict::new("failed antisymmetry", pairs.len(), antisymmetry),
            pairing: Verdict::new("pairing compatibility", triples.len(), pairing),
            jacobi: Verdict::new("jacobi", triples.len(), jacobi),
            coisotropy,
            differential: Verdict::new(
                "differential compatibility",
                pairs.len() + self.rank(),
                differential,
            ),
        }
    }

    fn differential_witness(&self, ts: &TestSet, pairs: &[(usize, usize)]) -> Option<String> {
        let fr = &self.frame;
        let alg = self.algebra();
        let n = self.rank();
        // anchor intertwines: X_a(dbar g) - dbar(X_a g) = rho(dbar e_a)(g)
        for a in 0..n {
            for g in 0..alg.len() as u32 {
                let x = alg.gen(g);
                let lhs = &fr.anchors[a].apply_to(&fr.dbar.apply_to(&x))
                    - &fr.dbar.apply_to(&fr.anchors[a].apply_to(&x));
                let rhs = fr.anchor(&fr.module_diff[a], &x);
                if lhs != rhs {
                    return Some(format!("anchor of {} on {}", self.names()[a], alg.generator(g).name));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let (ea, eb) = (self.basis(a), self.basis(b));
                let lhs = fr.dbar.apply_to(&fr.pair(&ea, &eb));
                let rhs = &fr.pair(&fr.apply_d(&ea), &eb) + &fr.pair(&ea, &fr.apply_d(&eb));
                if lhs != rhs {
                    return Some(format!("pairing of ({}, {})", self.names()[a], self.names()[b]));
                }
            }
        }
        first_failure(
            pairs,
            |&(i, j)| {
                let (u, v) = (&ts.sections[i].1, &ts.sections[j].1);
                let lhs = fr.apply_d(&fr.bracket(u, v));
                let a = fr.bracket(&fr.apply_d(u), v);
                let b = fr.bracket(u, &fr.apply_d(v));
                let rhs = if par_of(u) == 1 { a.sub(&b) } else { a.add(&b) };
                let r = lhs.sub(&rhs);
                (!r.is_zero()).then_some(r)
            },
            |&(i, j), r| {
                format!(
                    "bracket of ({}, {}) -> {}",
                    ts.sections[i].0,
                    ts.sections[j].0,
                    self.render(&r)
                )
            },
        )
    }

    /// Conclusions of the almost-Courant lemma and its corollary, checked on
    /// a test set: `R` antisymmetric and bilinear (needs coisotropy), and,
    /// when `R` vanishes on the basis, `[u, D f] = D rho(u) f`,
    /// `[D f, u] = 0`, and antisymmetry and trilinearity of `Jac`.
    pub fn almost_courant_checks(&self, cfg: &TestConfig) -> Vec<Verdict> {
        let ts = self.test_set(cfg);
        let fr = &self.frame;
        let alg = self.algebra();
        let secs: Vec<&Section> = ts.sections.iter().map(|s| &s.1).collect();
        let lab = |i: usize| ts.sections[i].0.clone();
        let pairs = ts.pairs();
        let triples = ts.triples();
        let fns = &ts.functions;
        let mut out = Vec::new();

        let curv = |u: &Section, v: &Section| -> Vec<Element> {
            let (p, q) = (par_of(u), par_of(v));
            let uv = fr.bracket(u, v);
            (0..alg.len() as u32)
                .map(|g| {
                    let x = alg.gen(g);
                    let a = fr.anchor(&uv, &x);
                    let b = fr.anchor(u, &fr.anchor(v, &x));
                    let c = fr.anchor(v, &fr.anchor(u, &x));
                    let comm = if koszul(p, q) == 1 { &b - &c } else { &b + &c };
                    &a - &comm
                })
                .collect()
        };

        let coiso = self.coisotropy_defects().is_empty();
        if coiso {
            let w = first_failure(
                &pairs,
                |&(i, j)| {
                    let (u, v) = (secs[i], secs[j]);
                    let s = koszul(par_of(u), par_of(v));
                    let r1 = curv(u, v);
                    let r2 = curv(v, u);
                    let bad = r1.iter().zip(&r2).any(|(a, b)| {
                        let t = if s == 1 { a + b } else { a - b };
                        !t.is_zero()
                    });
                    bad.then_some(())
                },
                |&(i, j), _| format!("({}, {})", lab(i), lab(j)),
            );
            out.push(Verdict::new("curvature antisymmetric", pairs.len(), w));
            let w = first_failure(
                &pairs,
                |&(i, j)| {
                    let (u, v) = (secs[i], secs[j]);
                    let f = &fns[(i + j) % fns.len()].1;
                    let lhs = curv(u, &v.lmul(f));
                    let rhs = curv(u, v);
                    let s = koszul(par_of(u), par_el(f));
                    let bad = lhs.iter().zip(&rhs).any(|(a, b)| {
                        let fb = f * b;
                        let t = if s == 1 { a - &fb } else { a + &fb };
                        !t.is_zero()
                    });
                    bad.then_some(())
                },
                |&(i, j), _| format!("({}, f*{})", lab(i), lab(j)),
            );
            out.push(Verdict::new("curvature bilinear", pairs.len(), w));
        } else {
            out.push(Verdict::from_bool("curvature antisymmetric", false, "ker rho is not coisotropic"));
        }

        let n = self.rank();
        let basis_pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        let r_basis = first_failure(
            &basis_pairs,
            |&(a, b)| curv(secs[a], secs[b]).iter().any(|e| !e.is_zero()).then_some(()),
            |&(a, b), _| format!("({}, {})", lab(a), lab(b)),
        );
        out.push(Verdict::new("curvature vanishes on basis", basis_pairs.len(), r_basis.clone()));
        if r_basis.is_some() {
            return out;
        }

        let cases: Vec<(usize, usize)> =
            (0..secs.len()).flat_map(|i| (0..fns.len()).map(move |k| (i, k))).collect();
        let w = first_failure(
            &cases,
            |&(i, k)| {
                let f = &fns[k].1;
                let lhs = fr.bracket(secs[i], &fr.d_script(f));
                let r = lhs.sub(&fr.d_script(&fr.anchor(secs[i], f)));
                (!r.is_zero()).then_some(r)
            },
            |&(i, k), r| format!("({}, D {}) -> {}", lab(i), fns[k].0, self.render(&r)),
        );
        out.push(Verdict::new("[u, D f] = D rho(u) f", cases.len(), w));
        let w = first_failure(
            &cases,
            |&(i, k)| {
                let r = fr.bracket(&fr.d_script(&fns[k].1), secs[i]);
                (!r.is_zero()).then_some(r)
            },
            |&(i, k), r| format!("(D {}, {}) -> {}", fns[k].0, lab(i), self.render(&r)),
        );
        out.push(Verdict::new("[D f, u] = 0", cases.len(), w));

        let w = first_failure(
            &triples,
            |&(i, j, k)| {
                let (u, v, x) = (secs[i], secs[j], secs[k]);
                let j0 = fr.jacobiator(u, v, x);
                let s = koszul(par_of(u), par_of(v));
                let j1 = fr.jacobiator(v, u, x);
                let anti = if s == 1 { j0.add(&j1) } else { j0.sub(&j1) };
                let s2 = koszul(par_of(v), par_of(x));
                let j2 = fr.jacobiator(u, x, v);
                let anti2 = if s2 == 1 { j0.add(&j2) } else { j0.sub(&j2) };
                let f = &fns[(i + j + k) % fns.len()].1;
                let lin = fr.jacobiator(&u.lmul(f), v, x).sub(&j0.lmul(f));
                let bad = !anti.is_zero() || !anti2.is_zero() || !lin.is_zero();
                bad.then_some(())
            },
            |&(i, j, k), _| format!("({}, {}, {})", lab(i), lab(j), lab(k)),
        );
        out.push(Verdict::new("Jac antisymmetric and trilinear", triples.len(), w));
        out
    }

    /// Density-level adjoint identity: `(L_u f) vol + (-1)^{|f||u|} f L_u vol`
    /// on the test set, returned as coefficients of `vol`. Moving `f` past
    /// `div(rho u)` absorbs the sign.
    pub fn lie_adjoint_densities(&self, cfg: &TestConfig) -> Vec<(String, Element)> {
        let ts = self.test_set(cfg);
        let fr = &self.frame;
        let mut out = Vec::new();
        for (lu, u) in &ts.sections {
            for (lf, f) in &ts.functions {
                let lhs = fr.anchor(u, f);
                let rhs = &fr.divergence(u) * f;
                out.push((format!("({lu}, {lf})"), &lhs + &rhs));
            }
        }
        out
    }
}
