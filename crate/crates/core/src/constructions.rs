//! Reduction along an involutive isotropic submodule and extension of
//! scalars along a lifted anchor. Reductions work over polynomial bases at a
//! bounded coefficient degree; every report names the cutoff it certifies.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Derivation, Element, Grade, Monomial};
use crate::builders;
use crate::cdga::Cdga;
use crate::coeff::Coeff;
use crate::courant::{random_polynomial, CourantDatum, TestConfig, Verdict};
use crate::error::{structural, validation, Result};
use crate::linalg::{self, Matrix};
use crate::module::{DgModule, Pairing, Section};
use crate::par;

/// Monomials in `vars` of total degree at most `deg`, by degree.
pub fn monomials_upto(vars: &[u32], deg: u32) -> Vec<Monomial> {
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
    let mut out: Vec<Monomial> = monos
        .into_iter()
        .map(|mut m| {
            m.sort_unstable();
            Monomial(m)
        })
        .collect();
    out.sort_by(|a, b| (a.total_degree(), a).cmp(&(b.total_degree(), b)));
    out
}

fn section_degree(s: &Section) -> u32 {
    s.coeffs()
        .iter()
        .flat_map(|c| c.terms().iter().map(|(m, _)| m.total_degree()))
        .max()
        .unwrap_or(0)
}

fn mono(alg: &Algebra, m: &Monomial) -> Element {
    alg.term(Coeff::one(), m.clone())
}

/// Moves an element between algebras by generator name.
fn transfer(e: &Element, target: &Algebra) -> Option<Element> {
    let src = e.algebra();
    if src.same_as(target) {
        return Some(e.clone());
    }
    if e.support().iter().any(|&g| target.index_of(&src.generator(g).name).is_none()) {
        return None;
    }
    Some(e.substitute(target, |_| None))
}

fn transfer_section(s: &Section, target: &Algebra) -> Option<Section> {
    s.coeffs().iter().map(|c| transfer(c, target)).collect::<Option<Vec<_>>>().map(Section::new)
}

/// Sparse coordinates of element lists in a shared monomial basis.
#[derive(Default)]
struct Coords {
    keys: BTreeMap<(usize, Monomial), usize>,
}

impl Coords {
    fn vector(&mut self, blocks: &[Element]) -> Vec<(usize, Coeff)> {
        let mut out = Vec::new();
        for (b, e) in blocks.iter().enumerate() {
            for (m, c) in e.terms() {
                let n = self.keys.len();
                let k = *self.keys.entry((b, m.clone())).or_insert(n);
                out.push((k, c.clone()));
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.keys.len()
    }
}

fn column_matrix(cols: &[Vec<(usize, Coeff)>], rows: usize) -> Matrix {
    let mut m = vec![vec![Coeff::zero(); cols.len()]; rows];
    for (j, col) in cols.iter().enumerate() {
        for (i, c) in col {
            m[*i][j] = c.clone();
        }
    }
    m
}

fn rank_of(sections: &[Section]) -> usize {
    let mut c = Coords::default();
    let cols: Vec<_> = sections.iter().map(|s| c.vector(s.coeffs())).collect();
    if c.len() == 0 {
        return 0;
    }
    linalg::rank(&column_matrix(&cols, c.len()))
}

/// Coefficients `f_j`, spanned by the listed monomials, with
/// `target = sum_j f_j gens_j`.
fn express(alg: &Algebra, target: &Section, gens: &[(&Section, &[Monomial])]) -> Option<Vec<Element>> {
    let mut coords = Coords::default();
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for (j, (g, monos)) in gens.iter().enumerate() {
        for m in monos.iter() {
            cols.push(coords.vector(g.lmul(&mono(alg, m)).coeffs()));
            labels.push((j, m));
        }
    }
    let rhs = coords.vector(target.coeffs());
    let rows = coords.len();
    let mut out = vec![alg.zero(); gens.len()];
    if rows == 0 {
        return Some(out);
    }
    let mut b = vec![Coeff::zero(); rows];
    for (i, c) in rhs {
        b[i] = c;
    }
    let x = if cols.is_empty() {
        if b.iter().all(Coeff::is_zero) {
            Vec::new()
        } else {
            return None;
        }
    } else {
        linalg::solve(&column_matrix(&cols, rows), &b)?
    };
    for ((j, m), c) in labels.into_iter().zip(x) {
        if !c.is_zero() {
            out[j] = &out[j] + &alg.term(c, m.clone());
        }
    }
    Some(out)
}

fn polynomial_base(e: &CourantDatum) -> Result<Vec<u32>> {
    let alg = e.algebra();
    let flat = alg.generators().iter().all(|g| g.grade == Grade::ZERO)
        && e.base().differential().is_zero()
        && e.module().differential().iter().all(Section::is_zero);
    if !flat {
        return Err(structural("reduction needs a polynomial base with zero differentials"));
    }
    Ok((0..alg.len() as u32).collect())
}

/// A submodule `L` given by generating sections; `<L,L> = 0` and
/// `[L,L] in L` are checked on generators.
#[derive(Clone, Debug)]
pub struct IsotropicSubmodule {
    parent: CourantDatum,
    span: Vec<Section>,
}

impl IsotropicSubmodule {
    pub fn new(parent: CourantDatum, span: Vec<Section>) -> Result<Self> {
        let l = Self::new_unchecked(parent, span)?;
        l.check()?;
        Ok(l)
    }

    /// Builds the submodule without testing isotropy or involutivity.
    pub fn new_unchecked(parent: CourantDatum, span: Vec<Section>) -> Result<Self> {
        polynomial_base(&parent)?;
        for s in &span {
            parent.section(s.coeffs().to_vec())?;
        }
        Ok(IsotropicSubmodule { parent, span })
    }

    pub fn parent(&self) -> &CourantDatum {
        &self.parent
    }

    pub fn span(&self) -> &[Section] {
        &self.span
    }

    pub fn check(&self) -> Result<()> {
        let e = &self.parent;
        for (i, a) in self.span.iter().enumerate() {
            for (j, b) in self.span.iter().enumerate() {
                let p = e.pair(a, b)?;
                if !p.is_zero() {
                    return Err(validation(
                        "submodule is not isotropic",
                        Some(format!("<l{}, l{}> = {}", i + 1, j + 1, p.render())),
                    ));
                }
            }
        }
        for (i, a) in self.span.iter().enumerate() {
            for (j, b) in self.span.iter().enumerate() {
                let br = e.bracket(a, b)?;
                if !self.contains(&br) {
                    return Err(validation(
                        "submodule is not involutive",
                        Some(format!("[l{}, l{}] = {}", i + 1, j + 1, e.render(&br))),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Membership `s in L`, solved with coefficients up to the degree of `s`.
    pub fn contains(&self, s: &Section) -> bool {
        self.express(s).is_some()
    }

    /// Coefficients writing `s` in terms of the generators.
    pub fn express(&self, s: &Section) -> Option<Vec<Element>> {
        let alg = self.parent.algebra();
        let coords: Vec<u32> = (0..alg.len() as u32).collect();
        let monos = monomials_upto(&coords, section_degree(s));
        let gens: Vec<(&Section, &[Monomial])> = self.span.iter().map(|l| (l, &monos[..])).collect();
        express(alg, s, &gens)
    }

    /// `s` pairs to zero with `L` and `[l, s] in L` for every generator.
    pub fn is_flat(&self, s: &Section) -> Result<bool> {
        for l in &self.span {
            if !self.parent.pair(l, s)?.is_zero() || !self.contains(&self.parent.bracket(l, s)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn span_upto(&self, k: u32) -> Vec<Section> {
        let alg = self.parent.algebra();
        let coords: Vec<u32> = (0..alg.len() as u32).collect();
        let mut out = Vec::new();
        for l in &self.span {
            let dl = section_degree(l);
            if dl > k {
                continue;
            }
            for m in monomials_upto(&coords, k - dl) {
                out.push(l.lmul(&mono(alg, &m)));
            }
        }
        out
    }

    /// Sections of `L^perp` with coefficients of degree `<= k` whose class
    /// is flat, as a spanning set.
    fn flat_space(&self, k: u32) -> Result<Vec<Section>> {
        let e = &self.parent;
        let alg = e.algebra();
        let n = e.rank();
        let coords: Vec<u32> = (0..alg.len() as u32).collect();
        let monos = monomials_upto(&coords, k);
        let dl = self.span.iter().map(section_degree).max().unwrap_or(0);
        let fmonos = monomials_upto(&coords, k + dl);
        let nb = self.span.len();
        let mut coords_map = Coords::default();
        let mut cols = Vec::new();
        let mut unknowns = Vec::new();
        for a in 0..n {
            for m in &monos {
                let u = e.basis(a).lmul(&mono(alg, m));
                let mut blocks = Vec::with_capacity(nb * (n + 1));
                for l in &self.span {
                    blocks.push(e.pair(l, &u)?);
                    blocks.extend(e.bracket(l, &u)?.coeffs().iter().cloned());
                }
                cols.push(coords_map.vector(&blocks));
                unknowns.push(u);
            }
        }
        for i in 0..nb {
            for l in &self.span {
                for m in &fmonos {
                    let s = l.lmul(&mono(alg, m)).neg();
                    let mut blocks = vec![alg.zero(); nb * (n + 1)];
                    for c in 0..n {
                        blocks[i * (n + 1) + 1 + c] = s.coeff(c).clone();
                    }
                    cols.push(coords_map.vector(&blocks));
                }
            }
        }
        let total = cols.len();
        let kernel = if coords_map.len() == 0 {
            linalg::identity(total)
        } else {
            linalg::nullspace(&column_matrix(&cols, coords_map.len()), total)
        };
        let mut out = Vec::new();
        for v in kernel {
            let parts = unknowns
                .iter()
                .zip(&v)
                .filter(|(_, c)| !c.is_zero())
                .map(|(u, c)| u.map(|x| x.scale(c)));
            let s = crate::module::sum_sections(n, alg, parts);
            if !s.is_zero() {
                out.push(s);
            }
        }
        Ok(out)
    }
}

/// The result of reducing a Courant algebroid along `L` at a degree cutoff.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub submodule: IsotropicSubmodule,
    /// The induced Courant algebroid over the `L`-invariant functions.
    pub datum: CourantDatum,
    /// Representatives in the parent of the reduced basis sections.
    pub representatives: Vec<Section>,
    pub invariant_coordinates: Vec<String>,
    pub cutoff: u32,
    /// Dimension of flat classes with coefficients of degree `<= k`, for
    /// `k = 0..=cutoff`.
    pub flat_dimensions: Vec<usize>,
    pub verdicts: Vec<Verdict>,
}

impl Reduction {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Representative in the parent of a section of the reduced algebroid.
    pub fn lift(&self, u: &Section) -> Result<Section> {
        let e = self.submodule.parent();
        let parts = u
            .coeffs()
            .iter()
            .zip(&self.representatives)
            .map(|(c, b)| {
                transfer(c, e.algebra())
                    .map(|c| b.lmul(&c))
                    .ok_or_else(|| structural("coefficient is not an invariant function"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(crate::module::sum_sections(e.rank(), e.algebra(), parts))
    }
}

fn constant_vector(s: &Section) -> Option<Vec<Coeff>> {
    s.coeffs().iter().map(Element::as_constant).collect()
}

fn constant_section(alg: &Algebra, v: &[Coeff]) -> Section {
    Section::new(v.iter().map(|c| alg.constant(c.clone())).collect())
}

/// Classes of `flat` modulo `l` as reduced constant representatives.
fn quotient_representatives(l: &[Section], flat: &[Section], alg: &Algebra, n: usize) -> Result<Vec<Section>> {
    let vecs = |ss: &[Section]| -> Result<Matrix> {
        ss.iter()
            .map(|s| constant_vector(s).ok_or_else(|| structural("degree-zero sections must be constant")))
            .collect()
    };
    let mut lm = vecs(l)?;
    let piv = if lm.is_empty() { Vec::new() } else { linalg::rref(&mut lm) };
    let mut reduced: Matrix = Vec::new();
    for mut v in vecs(flat)? {
        for (r, &p) in piv.iter().enumerate() {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for c in 0..n {
                v[c] = &v[c] - &(&f * &lm[r][c]);
            }
        }
        reduced.push(v);
    }
    if reduced.is_empty() {
        return Ok(Vec::new());
    }
    let rows = linalg::rref(&mut reduced).len();
    Ok(reduced[..rows].iter().map(|v| constant_section(alg, v)).collect())
}

/// Reduces `l.parent()` along `l` with coefficients up to degree `cutoff`.
/// Flat classes must be generated in degree zero; `basis` optionally fixes
/// named constant representatives, otherwise they are chosen by row
/// reduction.
pub fn reduce(
    l: &IsotropicSubmodule,
    cutoff: u32,
    basis: Option<&[(String, Section)]>,
    cfg: &TestConfig,
) -> Result<Reduction> {
    l.check()?;
    let e = l.parent();
    let alg = e.algebra();
    let n = e.rank();
    let coords = polynomial_base(e)?;
    let mut verdicts = Vec::new();

    // invariant functions
    let inv: Vec<u32> = coords
        .iter()
        .copied()
        .filter(|&g| {
            l.span().iter().all(|s| e.anchor_apply(s, &alg.gen(g)).map(|x| x.is_zero()).unwrap_or(false))
        })
        .collect();
    let all_monos = monomials_upto(&coords, cutoff);
    let inv_monos = monomials_upto(&inv, cutoff);
    let mut fc = Coords::default();
    let cols = all_monos
        .iter()
        .map(|m| {
            let blocks =
                l.span().iter().map(|s| e.anchor_apply(s, &mono(alg, m))).collect::<Result<Vec<_>>>()?;
            Ok(fc.vector(&blocks))
        })
        .collect::<Result<Vec<_>>>()?;
    let inv_dim = if fc.len() == 0 {
        all_monos.len()
    } else {
        all_monos.len() - linalg::rank(&column_matrix(&cols, fc.len()))
    };
    verdicts.push(Verdict::from_bool(
        format!("invariant functions are polynomials in invariant coordinates (cutoff {cutoff})"),
        inv_dim == inv_monos.len(),
        format!("{inv_dim} invariant monomial combinations, {} from coordinates", inv_monos.len()),
    ));

    // flat classes degree by degree
    let mut flat_dimensions = Vec::new();
    let mut flat_top = Vec::new();
    let mut flat_zero = Vec::new();
    for k in 0..=cutoff {
        let f = l.flat_space(k)?;
        let lk = l.span_upto(k);
        let all: Vec<Section> = lk.iter().chain(&f).cloned().collect();
        flat_dimensions.push(rank_of(&all) - rank_of(&lk));
        if k == 0 {
            flat_zero = f.clone();
        }
        if k == cutoff {
            flat_top = f;
        }
    }
    let _ = flat_top;

    let l0 = l.span_upto(0);
    let (names, reps): (Vec<String>, Vec<Section>) = match basis {
        Some(b) => {
            for (name, s) in b {
                if !l.is_flat(s)? {
                    return Err(validation("representative is not flat", Some(name.clone())));
                }
            }
            let reps: Vec<Section> = b.iter().map(|(_, s)| s.clone()).collect();
            let all: Vec<Section> = l0.iter().chain(&reps).cloned().collect();
            if rank_of(&all) - rank_of(&l0) != reps.len() || reps.len() != flat_dimensions[0] {
                return Err(validation(
                    "representatives do not form a basis of the degree-zero flat classes",
                    Some(format!("{} given, {} needed", reps.len(), flat_dimensions[0])),
                ));
            }
            b.iter().cloned().unzip()
        }
        None => {
            let reps = quotient_representatives(&l0, &flat_zero, alg, n)?;
            let names = reps
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    (0..n)
                        .find(|&a| e.basis(a) == *r)
                        .map_or_else(|| format!("b{}", k + 1), |a| e.names()[a].clone())
                })
                .collect();
            (names, reps)
        }
    };
    let r = reps.len();

    // local generation at the cutoff
    let lk = l.span_upto(cutoff);
    let products: Vec<Section> =
        reps.iter().flat_map(|b| inv_monos.iter().map(|m| b.lmul(&mono(alg, m)))).collect();
    let all: Vec<Section> = lk.iter().chain(&products).cloned().collect();
    let spanned = rank_of(&all) - rank_of(&lk);
    let expected = r * inv_monos.len();
    verdicts.push(Verdict::from_bool(
        format!("flat classes generated in degree 0 (cutoff {cutoff})"),
        spanned == expected && spanned == flat_dimensions[cutoff as usize],
        format!(
            "{spanned} independent products, {expected} expected, {} flat classes",
            flat_dimensions[cutoff as usize]
        ),
    ));
    let rank_l0 = rank_of(&l0);
    verdicts.push(Verdict::from_bool(
        "fiber dimension rank(E) - 2 rank(L)",
        r + 2 * rank_l0 == n,
        format!("{r} classes, rank {n}, rank(L) {rank_l0}"),
    ));

    // reduced base and structure
    let inv_names: Vec<String> = inv.iter().map(|&g| alg.generator(g).name.clone()).collect();
    let refs: Vec<&str> = inv_names.iter().map(String::as_str).collect();
    let base = Cdga::polynomial(alg.field(), &refs)?;
    let ralg = base.algebra().clone();
    let to_reduced = |x: &Element, what: &str| {
        transfer(x, &ralg).ok_or_else(|| {
            validation(format!("{what} is not an invariant function"), Some(x.render()))
        })
    };
    let mut g = vec![vec![Coeff::zero(); r]; r];
    for i in 0..r {
        for j in 0..r {
            let p = e.pair(&reps[i], &reps[j])?;
            g[i][j] = p
                .as_constant()
                .ok_or_else(|| structural(format!("induced pairing <{},{}> is not constant", names[i], names[j])))?;
        }
    }
    let gi = linalg::inverse(&g);
    verdicts.push(Verdict::from_bool(
        "induced pairing has an exact inverse",
        gi.is_some(),
        "induced pairing is degenerate",
    ));
    let gi = gi.ok_or_else(|| validation("induced pairing is degenerate", None))?;
    let lift_m = |m: &Matrix| -> Vec<Vec<Element>> {
        m.iter().map(|row| row.iter().map(|c| ralg.constant(c.clone())).collect()).collect()
    };
    let pairing = Pairing::new(&ralg, lift_m(&g), lift_m(&gi))?;
    let anchors = reps
        .iter()
        .map(|b| {
            let images = inv
                .iter()
                .enumerate()
                .map(|(k, &gen)| Ok((k as u32, to_reduced(&e.anchor_apply(b, &alg.gen(gen))?, "anchor image")?)))
                .collect::<Result<Vec<_>>>()?;
            Derivation::new(&ralg, images)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = vec![vec![Section::zero(&ralg, r); r]; r];
    for i in 0..r {
        for j in 0..r {
            let br = e.bracket(&reps[i], &reps[j])?;
            let deg = section_degree(&br);
            let im = monomials_upto(&inv, deg);
            let am = monomials_upto(&coords, deg);
            let mut gens: Vec<(&Section, &[Monomial])> = reps.iter().map(|b| (b, &im[..])).collect();
            gens.extend(l.span().iter().map(|s| (s, &am[..])));
            let c = express(alg, &br, &gens).ok_or_else(|| {
                validation(
                    "bracket of representatives leaves the flat span",
                    Some(format!("[{}, {}] = {}", names[i], names[j], e.render(&br))),
                )
            })?;
            table[i][j] =
                Section::new(c[..r].iter().map(|x| to_reduced(x, "bracket coefficient")).collect::<Result<_>>()?);
        }
    }
    let module = DgModule::new(base, names, None)?;
    let datum = CourantDatum::new(format!("{} reduced", e.name()), module, pairing, anchors, table)?;
    let axioms = datum.check_axioms(cfg);
    let failing: Vec<&str> = axioms.verdicts().iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
    verdicts.push(Verdict::from_bool("reduced axioms", failing.is_empty(), failing.join(", ")));
    Ok(Reduction {
        submodule: l.clone(),
        datum,
        representatives: reps,
        invariant_coordinates: inv_names,
        cutoff,
        flat_dimensions,
        verdicts,
    })
}

/// Reduction of a quadratic Lie algebra (a Courant algebroid over a point).
pub fn reduce_point(g: &CourantDatum, span: Vec<Section>) -> Result<Reduction> {
    if !g.algebra().is_empty() {
        return Err(structural("reduce_point needs an algebroid over a point"));
    }
    let l = IsotropicSubmodule::new(g.clone(), span)?;
    reduce(&l, 0, None, &TestConfig::default())
}

/// Checks a reduction against a target algebroid whose basis corresponds
/// to the reduced basis: structure data, and pairing, anchor and bracket of
/// representatives on basis monomial sections and random sections of degree
/// `<= cutoff`.
pub fn compare_reduction(red: &Reduction, target: &CourantDatum, cfg: &TestConfig) -> Result<Vec<Verdict>> {
    let e = red.submodule.parent();
    let palg = e.algebra();
    let talg = target.algebra();
    if target.rank() != red.datum.rank() {
        return Err(structural("target rank differs from the reduced rank"));
    }
    let mut out = Vec::new();
    let r = target.rank();
    let rd = &red.datum;
    let mut diffs = Vec::new();
    for i in 0..r {
        if rd.anchors()[i].render() != target.anchors()[i].render() {
            diffs.push(format!("anchor of {}", target.names()[i]));
        }
        for j in 0..r {
            if rd.pairing().matrix()[i][j].render() != target.pairing().matrix()[i][j].render() {
                diffs.push(format!("<{},{}>", target.names()[i], target.names()[j]));
            }
            if rd.render(&rd.structure()[i][j]) != target.render(&target.structure()[i][j]) {
                diffs.push(format!("[{},{}]", target.names()[i], target.names()[j]));
            }
        }
    }
    out.push(Verdict::new(
        format!("structure functions match {}", target.name()),
        r * r,
        diffs.first().cloned(),
    ));

    let coords: Vec<u32> = (0..talg.len() as u32).collect();
    let mut sections: Vec<(String, Section)> = Vec::new();
    for a in 0..r {
        for m in monomials_upto(&coords, red.cutoff) {
            let s = target.basis(a).lmul(&mono(talg, &m));
            sections.push((target.render(&s), s));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..cfg.random_sections {
        let s = Section::new((0..r).map(|_| random_polynomial(talg, &coords, red.cutoff, &mut rng)).collect());
        sections.push((format!("r{}", k + 1), s));
    }
    let lifts = sections
        .iter()
        .map(|(_, s)| red.lift(&transfer_section(s, rd.algebra()).expect("same coordinates")))
        .collect::<Result<Vec<_>>>()?;
    let l = &red.submodule;

    let flat = par::map(&(0..sections.len()).collect::<Vec<_>>(), |&i| l.is_flat(&lifts[i]));
    let bad = flat.iter().position(|x| !matches!(x, Ok(true)));
    out.push(Verdict::new("representatives are flat", sections.len(), bad.map(|i| sections[i].0.clone())));

    let anchor_bad = (0..sections.len()).find_map(|i| {
        coords.iter().find_map(|&g| {
            let name = &talg.generator(g).name;
            let lhs = e.anchor_apply(&lifts[i], &palg.var(name)).ok()?;
            let rhs = target.anchor_apply(&sections[i].1, &talg.gen(g)).ok()?;
            (Some(lhs) != transfer(&rhs, palg)).then(|| format!("rho({})({name})", sections[i].0))
        })
    });
    out.push(Verdict::new("anchor on invariant functions", sections.len(), anchor_bad));

    let pairs: Vec<(usize, usize)> =
        (0..sections.len()).flat_map(|i| (0..sections.len()).map(move |j| (i, j))).collect();
    let results = par::map(&pairs, |&(i, j)| -> Result<(bool, bool)> {
        let (u, v) = (&sections[i].1, &sections[j].1);
        let p = e.pair(&lifts[i], &lifts[j])?;
        let pair_ok = Some(p) == transfer(&target.pair(u, v)?, palg);
        let tb = target.bracket(u, v)?;
        let lifted = red.lift(&transfer_section(&tb, rd.algebra()).expect("same coordinates"))?;
        let diff = e.bracket(&lifts[i], &lifts[j])?.sub(&lifted);
        Ok((pair_ok, l.contains(&diff)))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let witness = |ok: fn(&(bool, bool)) -> bool, what: &str| {
        results.iter().position(|x| !ok(x)).map(|k| {
            let (i, j) = pairs[k];
            format!("{what}({}, {})", sections[i].0, sections[j].0)
        })
    };
    out.push(Verdict::new("pairing of representatives", pairs.len(), witness(|x| x.0, "<,>")));
    out.push(Verdict::new("bracket of representatives modulo L", pairs.len(), witness(|x| x.1, "[,]")));
    Ok(out)
}

/// A reduction together with the comparison against its expected target.
#[derive(Clone, Debug)]
pub struct ReductionCheck {
    pub reduction: Reduction,
    pub verdicts: Vec<Verdict>,
}

impl ReductionCheck {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Reduces the complexified standard Courant algebroid on `C^d` along
/// `L = T^{0,1}` and compares with the standard holomorphic one.
pub fn reduce_dolbeault(d: usize, cutoff: u32, cfg: &TestConfig) -> Result<ReductionCheck> {
    let e = builders::complexified_standard(d);
    let span = (0..d).map(|k| e.basis(d + k)).collect();
    let l = IsotropicSubmodule::new(e, span)?;
    let reduction = reduce(&l, cutoff, None, cfg)?;
    let mut verdicts = reduction.verdicts.clone();
    verdicts.extend(compare_reduction(&reduction, &builders::holomorphic_standard(d), cfg)?);
    Ok(ReductionCheck { reduction, verdicts })
}

/// Constant-coefficient linear algebra on the fiber `T + T^*` of the
/// complexified standard algebroid on `C^d`, with coordinates ordered
/// `z_k, zb_k` and the Kaehler form `omega = i sum dz_k ^ dzb_k`.
struct FlatKaehler {
    d: usize,
    omega: Matrix,
    omega_inv: Matrix,
}

impl FlatKaehler {
    fn new(d: usize) -> Self {
        let n = 2 * d;
        let mut omega = vec![vec![Coeff::zero(); n]; n];
        for k in 0..d {
            omega[k][d + k] = Coeff::i();
            omega[d + k][k] = -&Coeff::i();
        }
        let omega_inv = linalg::inverse(&omega).expect("Kaehler form is nondegenerate");
        FlatKaehler { d, omega, omega_inv }
    }

    /// `e^{s omega}(y + alpha) = y + alpha + s omega(y, .)`.
    fn exp(&self, s: &Coeff, v: &[Coeff]) -> Vec<Coeff> {
        let n = 2 * self.d;
        let mut out = v.to_vec();
        for j in 0..n {
            for i in 0..n {
                out[n + j] = &out[n + j] + &(&(s * &v[i]) * &self.omega[i][j]);
            }
        }
        out
    }

    fn vector(&self, i: usize) -> Vec<Coeff> {
        let mut v = vec![Coeff::zero(); 4 * self.d];
        v[i] = Coeff::one();
        v
    }

    /// `tau(y + alpha) = e^{i omega} y + (i/2) e^{-i omega} omega^{-1} alpha`.
    fn tau(&self, v: &[Coeff]) -> Vec<Coeff> {
        let n = 2 * self.d;
        let mut y = v[..n].to_vec();
        y.extend(vec![Coeff::zero(); n]);
        let mut x = vec![Coeff::zero(); 2 * n];
        for i in 0..n {
            for j in 0..n {
                x[i] = &x[i] + &(&v[n + j] * &self.omega_inv[j][i]);
            }
        }
        let i = Coeff::i();
        let a = self.exp(&i, &y);
        let b = self.exp(&-&i, &x);
        let half_i = &i * &Coeff::rat(1, 2);
        a.iter().zip(&b).map(|(p, q)| p + &(&half_i * q)).collect()
    }

    /// Complex conjugation: conjugate coefficients and swap `z` with `zb`.
    fn conj(&self, v: &[Coeff]) -> Vec<Coeff> {
        let d = self.d;
        let swap = |i: usize| {
            let (blk, k) = (i / (2 * d), i % (2 * d));
            blk * 2 * d + if k < d { k + d } else { k - d }
        };
        let mut out = vec![Coeff::zero(); 4 * d];
        for (i, c) in v.iter().enumerate() {
            out[swap(i)] = c.conj();
        }
        out
    }
}

fn positive_definite_hermitian(h: &Matrix) -> bool {
    let n = h.len();
    let mut m = h.clone();
    for k in 0..n {
        let p = m[k][k].clone();
        if !p.is_real() || p.re.is_negative() || p.is_zero() {
            return false;
        }
        for i in k + 1..n {
            let f = &m[i][k] / &p;
            for j in k..n {
                m[i][j] = &m[i][j] - &(&f * &m[k][j]);
            }
        }
    }
    true
}

/// Flat Calabi-Yau reduction: `L = e^{i omega}(T^{0,1})` inside the
/// complexified standard algebroid on `C^d`, reduced at the cutoff and
/// compared with the standard holomorphic algebroid through `tau`.
/// Odd `d` only unless `allow_even` is set.
pub fn cy_flat_reduction_check(d: usize, cutoff: u32, allow_even: bool, cfg: &TestConfig) -> Result<ReductionCheck> {
    if d == 0 || (d.is_multiple_of(2) && !allow_even) {
        return Err(validation(
            "the Calabi-Yau check is restricted to odd complex dimension",
            Some(format!("d = {d}")),
        ));
    }
    let e = builders::complexified_standard(d);
    let alg = e.algebra().clone();
    let k = FlatKaehler::new(d);
    let i = Coeff::i();
    let lvecs: Vec<Vec<Coeff>> = (0..d).map(|j| k.exp(&i, &k.vector(d + j))).collect();
    let lbar: Vec<Vec<Coeff>> = lvecs.iter().map(|v| k.conj(v)).collect();
    let mut verdicts = Vec::new();

    let span: Vec<Section> = lvecs.iter().map(|v| constant_section(&alg, v)).collect();
    let l = IsotropicSubmodule::new(e.clone(), span.clone());
    verdicts.push(Verdict::from_bool(
        "L isotropic and involutive",
        l.is_ok(),
        l.as_ref().err().map(|x| x.to_string()).unwrap_or_default(),
    ));
    let l = l?;
    let bars: Vec<Section> = lbar.iter().map(|v| constant_section(&alg, v)).collect();
    let both: Vec<Section> = span.iter().chain(&bars).cloned().collect();
    verdicts.push(Verdict::from_bool(
        "L and conj(L) meet in zero",
        rank_of(&both) == 2 * d,
        format!("rank of L + conj(L) is {}", rank_of(&both)),
    ));
    let gram: Matrix = both
        .iter()
        .map(|a| both.iter().map(|b| e.pair(a, b).expect("same module").constant_term()).collect())
        .collect();
    let herm: Matrix =
        span.iter().map(|a| bars.iter().map(|b| e.pair(a, b).expect("same module").constant_term()).collect()).collect();
    verdicts.push(Verdict::from_bool(
        "L maximal isotropic in the definite subbundle L + conj(L)",
        linalg::inverse(&gram).is_some() && positive_definite_hermitian(&herm),
        "pairing on L + conj(L) is degenerate or indefinite",
    ));

    let names = builders::holomorphic_standard(d).names().to_vec();
    let basis: Vec<(String, Section)> = (0..2 * d)
        .map(|a| {
            let idx = if a < d { a } else { 2 * d + (a - d) };
            (names[a].clone(), constant_section(&alg, &k.tau(&k.vector(idx))))
        })
        .collect();
    let reduction = reduce(&l, cutoff, Some(&basis), cfg)?;
    verdicts.extend(reduction.verdicts.iter().cloned());
    verdicts.extend(compare_reduction(&reduction, &builders::holomorphic_standard(d), cfg)?);
    Ok(ReductionCheck { reduction, verdicts })
}

/// A cdga map `i: O -> O'` with a lift of the anchor: one derivation of
/// `O'` for each basis section.
#[derive(Clone, Debug)]
pub struct ScalarsMap {
    source: Cdga,
    target: Cdga,
    images: Vec<Element>,
    lifted_anchor: Vec<Derivation>,
}

impl ScalarsMap {
    /// `images[g]` is the image of source generator `g`. Parities must be
    /// preserved and `i` must commute with the differentials on generators.
    pub fn new(source: Cdga, target: Cdga, images: Vec<Element>, lifted_anchor: Vec<Derivation>) -> Result<Self> {
        let (sa, ta) = (source.algebra().clone(), target.algebra().clone());
        if images.len() != sa.len() {
            return Err(structural("one image per source generator is required"));
        }
        for (g, img) in images.iter().enumerate() {
            ta.check_same(img.algebra())?;
            if !img.is_zero() && img.grade() != Some(sa.generator(g as u32).grade) {
                return Err(structural(format!("image of `{}` has the wrong grade", sa.generator(g as u32).name)));
            }
        }
        for x in &lifted_anchor {
            ta.check_same(x.algebra())?;
            if !x.is_zero() && x.grade() != Some(Grade::ZERO) {
                return Err(structural("lifted anchor must have grade (0,0)"));
            }
        }
        let m = ScalarsMap { source, target, images, lifted_anchor };
        for g in 0..sa.len() as u32 {
            let lhs = m.target.apply_d(&m.images[g as usize]);
            let rhs = m.apply(&m.source.apply_d(&sa.gen(g)))?;
            if lhs != rhs {
                return Err(validation(
                    "map does not commute with the differentials",
                    Some(format!("generator {}", sa.generator(g).name)),
                ));
            }
        }
        Ok(m)
    }

    /// The map sending each source generator to the target generator of the
    /// same name.
    pub fn inclusion(source: Cdga, target: Cdga, lifted_anchor: Vec<Derivation>) -> Result<Self> {
        let images = source
            .algebra()
            .generators()
            .iter()
            .map(|g| target.algebra().try_var(&g.name))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, images, lifted_anchor)
    }

    pub fn source(&self) -> &Cdga {
        &self.source
    }

    pub fn target(&self) -> &Cdga {
        &self.target
    }

    pub fn lifted_anchor(&self) -> &[Derivation] {
        &self.lifted_anchor
    }

    /// `i(f)` for `f` in the source.
    pub fn apply(&self, f: &Element) -> Result<Element> {
        self.source.algebra().check_same(f.algebra())?;
        Ok(f.substitute(self.target.algebra(), |g| Some(self.images[g as usize].clone())))
    }

    fn apply_section(&self, s: &Section) -> Result<Section> {
        s.try_map(|c| self.apply(c))
    }

    /// `rho'(sum_a f_a e_a) = sum_a f_a rho_hat(e_a)` for coefficients in `O'`.
    pub fn rho_prime(&self, s: &Section) -> Derivation {
        let ta = self.target.algebra();
        s.coeffs()
            .iter()
            .zip(&self.lifted_anchor)
            .fold(Derivation::zero(ta), |acc, (f, x)| acc.add(&x.scale_by(f)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftReport {
    pub bracket: Verdict,
    pub restriction: Verdict,
    pub coisotropy: Verdict,
}

impl LiftReport {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.bracket, &self.restriction, &self.coisotropy]
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }
}

fn check_map_fits(m: &ScalarsMap, e: &CourantDatum) -> Result<()> {
    e.algebra().check_same(m.source.algebra())?;
    if m.lifted_anchor.len() != e.rank() {
        return Err(structural("lifted anchor needs one derivation per basis section"));
    }
    if !m.target.algebra().field().contains(&Coeff::i()) && !e.algebra().field().contains(&Coeff::one()) {
        return Err(structural("coefficient fields do not match"));
    }
    Ok(())
}

/// Checks the three conditions on a lift of the anchor.
pub fn check_lift(m: &ScalarsMap, e: &CourantDatum) -> Result<LiftReport> {
    check_map_fits(m, e)?;
    let n = e.rank();
    let ta = m.target.algebra();
    let mut bracket_bad = None;
    for a in 0..n {
        for b in 0..n {
            let br = m.apply_section(&e.structure()[a][b])?;
            let lhs = m.rho_prime(&br);
            let rhs = m.lifted_anchor[a].commutator(&m.lifted_anchor[b], 0, 0);
            if lhs != rhs && bracket_bad.is_none() {
                bracket_bad = Some(format!("rho_hat([{0},{1}]) != [rho_hat({0}), rho_hat({1})]", e.names()[a], e.names()[b]));
            }
        }
    }
    let mut restriction_bad = None;
    for a in 0..n {
        for g in 0..e.algebra().len() as u32 {
            let lhs = m.lifted_anchor[a].apply(&m.images[g as usize])?;
            let rhs = m.apply(&e.anchors()[a].apply(&e.algebra().gen(g))?)?;
            if lhs != rhs && restriction_bad.is_none() {
                restriction_bad =
                    Some(format!("rho_hat({})({}) != i(rho(..))", e.names()[a], e.algebra().generator(g).name));
            }
        }
    }
    let eta_inv = e
        .pairing()
        .inverse()
        .iter()
        .map(|r| r.iter().map(|x| m.apply(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut coiso_bad = None;
    let ng = ta.len() as u32;
    for x in 0..ng {
        for y in 0..ng {
            let mut acc = ta.zero();
            for a in 0..n {
                for b in 0..n {
                    if eta_inv[a][b].is_zero() {
                        continue;
                    }
                    let p = m.lifted_anchor[a].apply(&ta.gen(x))?;
                    let q = m.lifted_anchor[b].apply(&ta.gen(y))?;
                    acc = &acc + &(&(&p * &eta_inv[a][b]) * &q);
                }
            }
            if !acc.is_zero() && coiso_bad.is_none() {
                coiso_bad = Some(format!(
                    "rho' eta^-1 rho'^dual ({}, {}) = {}",
                    ta.generator(x).name,
                    ta.generator(y).name,
                    acc.render()
                ));
            }
        }
    }
    Ok(LiftReport {
        bracket: Verdict::new("lift preserves brackets", n * n, bracket_bad),
        restriction: Verdict::new("lift restricts to the anchor", n * e.algebra().len(), restriction_bad),
        coisotropy: Verdict::new("ker rho' coisotropic", (ng * ng) as usize, coiso_bad),
    })
}

/// `E' = E (x)_O O'` with pairing `i(eta)`, anchor `rho'` and the bracket
/// determined by the basis brackets `[e_a, e_b]' = i([e_a, e_b])`.
pub fn extend_scalars(e: &CourantDatum, m: &ScalarsMap) -> Result<CourantDatum> {
    let report = check_lift(m, e)?;
    if let Some(v) = report.verdicts().into_iter().find(|v| !v.pass) {
        return Err(validation(format!("not a lift of the anchor: {} fails", v.name), v.witness.clone()));
    }
    let ta = m.target.algebra();
    let map_m = |rows: &[Vec<Element>]| -> Result<Vec<Vec<Element>>> {
        rows.iter().map(|r| r.iter().map(|x| m.apply(x)).collect()).collect()
    };
    let pairing = Pairing::new(ta, map_m(e.pairing().matrix())?, map_m(e.pairing().inverse())?)?;
    let table = e
        .structure()
        .iter()
        .map(|r| r.iter().map(|s| m.apply_section(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let diff = e.module().differential().iter().map(|s| m.apply_section(s)).collect::<Result<Vec<_>>>()?;
    let module = DgModule::new(m.target.clone(), e.names().to_vec(), Some(diff))?;
    CourantDatum::new(format!("{} extended", e.name()), module, pairing, m.lifted_anchor.clone(), table)
}
