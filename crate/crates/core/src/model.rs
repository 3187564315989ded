//! Declarative model files.
//!
//! A model file is TOML with `format = "courant-model/1"`. Polynomial
//! entries are strings in the literal syntax of [`crate::text`]. Every
//! diagnostic carries the line and column of the offending entry and one of
//! the classes of [`ParseClass`].
//!
//! ```toml
//! format = "courant-model/1"
//! name = "standard R^1"
//! suites = ["check-courant", "rw-check"]
//!
//! [ring]
//! field = "QQ"
//! generators = [{ name = "t", degree = 0 }]
//!
//! [module]
//! basis = ["del_t", "dt"]
//!
//! [pairing]
//! matrix = [["0", "1"], ["1", "0"]]
//! inverse = [["0", "1"], ["1", "0"]]
//!
//! [anchor]
//! del_t = { t = "1" }
//! ```
//!
//! Optional blocks: `[ring.differential]` (generator to image),
//! `[module.differential]` (basis name to section), `[[bracket]]` entries
//! `pair = [a, b]`, `value = { c = poly }` for the ordered basis pair
//! (missing pairs are zero), `[orientation]` (`n`, `scale`),
//! `[submodule]` (`span`, a list of sections) and `[lift]` (a target
//! `ring`, generator `images` and the lifted `anchor`).

use std::collections::BTreeMap;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::algebra::{Algebra, Derivation, Element, Generator, Grade};
use crate::cdga::Cdga;
use crate::coeff::{CoefficientField, Coeff};
use crate::constructions::ScalarsMap;
use crate::contact::Orientation;
use crate::courant::CourantDatum;
use crate::error::{Error, ParseClass, Result};
use crate::module::{DgModule, Pairing, Section};
use crate::text::parse_element;

pub const FORMAT: &str = "courant-model/1";

/// A validated model file.
#[derive(Clone, Debug)]
pub struct Model {
    pub datum: CourantDatum,
    /// Suites that `examples run` executes on this model.
    pub suites: Vec<String>,
    /// Whether those suites are expected to pass.
    pub expect_pass: bool,
    pub orientation: Option<Orientation>,
    pub submodule: Option<Vec<Section>>,
    pub lift: Option<ScalarsMap>,
}

type Table = BTreeMap<Spanned<String>, Spanned<String>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    format: Spanned<String>,
    name: String,
    #[serde(default)]
    suites: Vec<Spanned<String>>,
    expect: Option<Spanned<String>>,
    ring: Spanned<RawRing>,
    module: Spanned<RawModule>,
    pairing: Spanned<RawPairing>,
    #[serde(default)]
    anchor: BTreeMap<Spanned<String>, Table>,
    #[serde(default)]
    bracket: Vec<RawBracket>,
    orientation: Option<RawOrientation>,
    submodule: Option<Spanned<RawSubmodule>>,
    lift: Option<Spanned<RawLift>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRing {
    field: Spanned<String>,
    generators: Spanned<Vec<RawGenerator>>,
    #[serde(default)]
    differential: Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    degree: i32,
    #[serde(default)]
    intrinsic: u8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    basis: Vec<Spanned<String>>,
    #[serde(default)]
    differential: BTreeMap<Spanned<String>, Table>,
}

type RawMatrix = Spanned<Vec<Vec<Spanned<String>>>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairing {
    matrix: RawMatrix,
    inverse: RawMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBracket {
    pair: Spanned<Vec<Spanned<String>>>,
    #[serde(default)]
    value: Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrientation {
    n: u32,
    scale: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubmodule {
    span: Vec<Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLift {
    ring: Spanned<RawRing>,
    #[serde(default)]
    images: Table,
    #[serde(default)]
    anchor: BTreeMap<Spanned<String>, Table>,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.src.len());
        let before = &self.src[..offset];
        let line = before.matches('\n').count() + 1;
        let start = before.rfind('\n').map_or(0, |i| i + 1);
        (line, before[start..].chars().count() + 1)
    }

    fn err(&self, class: ParseClass, span: Range<usize>, message: impl Into<String>) -> Error {
        let (line, column) = self.position(span.start);
        Error::Parse { class, line, column, message: message.into() }
    }

    fn schema(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        self.err(ParseClass::Schema, span, message)
    }

    fn unresolved(&self, s: &Spanned<String>, what: &str) -> Error {
        self.err(ParseClass::UnresolvedReference, s.span(), format!("unknown {what} `{}`", s.get_ref()))
    }

    /// Parses a polynomial string, moving the inner column of a parse error
    /// onto the file.
    fn poly(&self, alg: &Algebra, s: &Spanned<String>) -> Result<Element> {
        parse_element(alg, s.get_ref()).map_err(|e| match e {
            Error::Parse { class, column, message, .. } => {
                let raw = &self.src[s.span()];
                let open = if raw.starts_with("\"\"\"") || raw.starts_with("'''") { 3 } else { 1 };
                let inner: usize = s.get_ref().chars().take(column - 1).map(char::len_utf8).sum();
                let class = if class == ParseClass::UnresolvedReference { class } else { ParseClass::Syntax };
                self.err(class, s.span().start + open + inner..s.span().end, message)
            }
            other => self.schema(s.span(), other.to_string()),
        })
    }

    fn ring(&self, raw: &Spanned<RawRing>) -> Result<Cdga> {
        let r = raw.get_ref();
        let field = CoefficientField::from_name(r.field.get_ref())
            .ok_or_else(|| self.schema(r.field.span(), format!("unknown coefficient field `{}`", r.field.get_ref())))?;
        let gens = r
            .generators
            .get_ref()
            .iter()
            .map(|g| Generator::new(g.name.clone(), Grade::new(g.degree, g.intrinsic)))
            .collect();
        let alg = Algebra::new(field, gens).map_err(|e| self.schema(r.generators.span(), e.to_string()))?;
        let mut images = Vec::new();
        for (k, v) in &r.differential {
            let g = alg.index_of(k.get_ref()).ok_or_else(|| self.unresolved(k, "generator"))?;
            images.push((g, self.poly(&alg, v)?));
        }
        let d = Derivation::new(&alg, images).map_err(|e| self.schema(raw.span(), e.to_string()))?;
        Cdga::new(alg, d).map_err(|e| self.schema(raw.span(), e.to_string()))
    }

    fn basis_index(&self, names: &[String], s: &Spanned<String>) -> Result<usize> {
        names.iter().position(|n| n == s.get_ref()).ok_or_else(|| self.unresolved(s, "basis section"))
    }

    fn section(&self, alg: &Algebra, names: &[String], t: &Table) -> Result<Section> {
        let mut s = Section::zero(alg, names.len());
        for (k, v) in t {
            let a = self.basis_index(names, k)?;
            *s.coeff_mut(a) = self.poly(alg, v)?;
        }
        Ok(s)
    }

    fn derivation(&self, alg: &Algebra, t: &Table) -> Result<Derivation> {
        let mut images = Vec::new();
        for (k, v) in t {
            let g = alg.index_of(k.get_ref()).ok_or_else(|| self.unresolved(k, "generator"))?;
            images.push((g, self.poly(alg, v)?));
        }
        Derivation::new(alg, images)
    }

    fn anchors(
        &self,
        alg: &Algebra,
        names: &[String],
        raw: &BTreeMap<Spanned<String>, Table>,
    ) -> Result<Vec<Derivation>> {
        let mut out = vec![Derivation::zero(alg); names.len()];
        for (k, t) in raw {
            let a = self.basis_index(names, k)?;
            out[a] = self.derivation(alg, t)?;
        }
        Ok(out)
    }

    fn matrix(&self, alg: &Algebra, n: usize, m: &RawMatrix) -> Result<Vec<Vec<Element>>> {
        let rows = m.get_ref();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(self.schema(m.span(), format!("expected a {n} x {n} matrix")));
        }
        rows.iter().map(|r| r.iter().map(|e| self.poly(alg, e)).collect()).collect()
    }
}

/// Parses and validates a model file.
pub fn parse_model(src: &str) -> Result<Model> {
    let cx = Ctx { src };
    if let Err(e) = src.parse::<toml::Table>() {
        return Err(cx.err(ParseClass::Syntax, e.span().unwrap_or(0..0), e.message()));
    }
    let raw: RawModel =
        toml::from_str(src).map_err(|e| cx.schema(e.span().unwrap_or(0..0), e.message()))?;
    if raw.format.get_ref() != FORMAT {
        return Err(cx.schema(raw.format.span(), format!("unsupported format, expected `{FORMAT}`")));
    }
    let expect_pass = match raw.expect.as_ref().map(|s| s.get_ref().as_str()) {
        None | Some("pass") => true,
        Some("fail") => false,
        Some(_) => return Err(cx.schema(raw.expect.as_ref().unwrap().span(), "expect must be `pass` or `fail`")),
    };
    for s in &raw.suites {
        if !crate::suite::SUITES.contains(&s.get_ref().as_str()) {
            return Err(cx.unresolved(s, "suite"));
        }
    }

    let base = cx.ring(&raw.ring)?;
    let alg = base.algebra().clone();
    let m = raw.module.get_ref();
    let names: Vec<String> = m.basis.iter().map(|s| s.get_ref().clone()).collect();
    for (i, s) in m.basis.iter().enumerate() {
        if names[..i].contains(s.get_ref()) {
            return Err(cx.schema(s.span(), format!("duplicate basis name `{}`", s.get_ref())));
        }
    }
    let n = names.len();
    let diff = if m.differential.is_empty() {
        None
    } else {
        let mut d = vec![Section::zero(&alg, n); n];
        for (k, t) in &m.differential {
            d[cx.basis_index(&names, k)?] = cx.section(&alg, &names, t)?;
        }
        Some(d)
    };
    let module =
        DgModule::new(base.clone(), names.clone(), diff).map_err(|e| cx.schema(raw.module.span(), e.to_string()))?;

    let p = raw.pairing.get_ref();
    let matrix = cx.matrix(&alg, n, &p.matrix)?;
    let inverse = cx.matrix(&alg, n, &p.inverse)?;
    let pairing = Pairing::new(&alg, matrix, inverse).map_err(|e| match e {
        Error::PairingWitness { row, column, value } => cx.err(
            ParseClass::PairingWitness,
            p.inverse.span(),
            format!("eta * eta_inv has entry ({row},{column}) = {value}"),
        ),
        other => cx.schema(p.matrix.span(), other.to_string()),
    })?;

    let anchors = cx.anchors(&alg, &names, &raw.anchor)?;
    let mut table = vec![vec![Section::zero(&alg, n); n]; n];
    for b in &raw.bracket {
        let pair = b.pair.get_ref();
        if pair.len() != 2 {
            return Err(cx.schema(b.pair.span(), "a bracket pair names two basis sections"));
        }
        let (i, j) = (cx.basis_index(&names, &pair[0])?, cx.basis_index(&names, &pair[1])?);
        table[i][j] = cx.section(&alg, &names, &b.value)?;
    }
    let datum = CourantDatum::new(raw.name.clone(), module, pairing, anchors, table)
        .map_err(|e| cx.schema(0..0, e.to_string()))?;

    let orientation = match &raw.orientation {
        None => None,
        Some(o) => {
            let c = Algebra::new(alg.field(), vec![]).expect("empty algebra");
            let scale = cx.poly(&c, &o.scale)?.as_constant().unwrap_or_else(Coeff::zero);
            if scale.is_zero() {
                return Err(cx.schema(o.scale.span(), "orientation scale must be a nonzero constant"));
            }
            Some(Orientation::new(o.n, scale))
        }
    };
    let submodule = match &raw.submodule {
        None => None,
        Some(s) => Some(
            s.get_ref().span.iter().map(|t| cx.section(&alg, &names, t)).collect::<Result<Vec<_>>>()?,
        ),
    };
    let lift = match &raw.lift {
        None => None,
        Some(l) => {
            let r = l.get_ref();
            let target = cx.ring(&r.ring)?;
            let talg = target.algebra().clone();
            let mut images = Vec::new();
            for g in 0..alg.len() as u32 {
                let name = alg.generator(g).name.clone();
                let image = match r.images.iter().find(|(k, _)| k.get_ref() == &name) {
                    Some((_, v)) => cx.poly(&talg, v)?,
                    None => match talg.index_of(&name) {
                        Some(h) => talg.gen(h),
                        None => {
                            return Err(cx.err(
                                ParseClass::UnresolvedReference,
                                r.ring.span(),
                                format!("no image for generator `{name}`"),
                            ))
                        }
                    },
                };
                images.push(image);
            }
            for k in r.images.keys() {
                if alg.index_of(k.get_ref()).is_none() {
                    return Err(cx.unresolved(k, "generator"));
                }
            }
            let lifted = cx.anchors(&talg, &names, &r.anchor)?;
            Some(ScalarsMap::new(base, target, images, lifted).map_err(|e| cx.schema(l.span(), e.to_string()))?)
        }
    };
    Ok(Model {
        datum,
        suites: raw.suites.iter().map(|s| s.get_ref().clone()).collect(),
        expect_pass,
        orientation,
        submodule,
        lift,
    })
}

/// Reads and parses a model file from disk.
pub fn load_model(path: &std::path::Path) -> Result<Model> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Structural(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&src)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn key(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        s.to_string()
    } else {
        quote(s)
    }
}

fn inline(entries: impl IntoIterator<Item = (String, String)>) -> String {
    let body: Vec<String> = entries.into_iter().map(|(k, v)| format!("{} = {}", key(&k), quote(&v))).collect();
    if body.is_empty() {
        "{}".into()
    } else {
        format!("{{ {} }}", body.join(", "))
    }
}

fn section_entries(names: &[String], s: &Section) -> Vec<(String, String)> {
    s.coeffs()
        .iter()
        .zip(names)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, n)| (n.clone(), c.render()))
        .collect()
}

fn derivation_entries(d: &Derivation) -> Vec<(String, String)> {
    d.images().iter().map(|(g, e)| (d.algebra().generator(*g).name.clone(), e.render())).collect()
}

fn render_ring(out: &mut String, header: &str, base: &Cdga) {
    let alg = base.algebra();
    out.push_str(&format!("[{header}]\nfield = {}\n", quote(alg.field().name())));
    let gens: Vec<String> = (0..alg.len() as u32)
        .map(|g| {
            let gen = alg.generator(g);
            let mut s = format!("{{ name = {}, degree = {}", quote(&gen.name), gen.grade.degree);
            if gen.grade.intrinsic != 0 {
                s.push_str(&format!(", intrinsic = {}", gen.grade.intrinsic));
            }
            s + " }"
        })
        .collect();
    if gens.is_empty() {
        out.push_str("generators = []\n");
    } else {
        out.push_str("generators = [\n");
        for g in gens {
            out.push_str(&format!("  {g},\n"));
        }
        out.push_str("]\n");
    }
    let d = derivation_entries(base.differential());
    if !d.is_empty() {
        out.push_str(&format!("\n[{header}.differential]\n"));
        for (k, v) in d {
            out.push_str(&format!("{} = {}\n", key(&k), quote(&v)));
        }
    }
}

fn render_anchors(out: &mut String, header: &str, names: &[String], anchors: &[Derivation]) {
    if anchors.iter().all(Derivation::is_zero) {
        return;
    }
    out.push_str(&format!("\n[{header}]\n"));
    for (n, a) in names.iter().zip(anchors) {
        if !a.is_zero() {
            out.push_str(&format!("{} = {}\n", key(n), inline(derivation_entries(a))));
        }
    }
}

fn render_matrix(m: &[Vec<Element>]) -> String {
    let mut s = String::from("[\n");
    for row in m {
        let cells: Vec<String> = row.iter().map(|e| quote(&e.render())).collect();
        s.push_str(&format!("  [{}],\n", cells.join(", ")));
    }
    s + "]"
}

/// Canonical rendering of a model; parsing it gives back an equal model.
pub fn render_model(m: &Model) -> String {
    let e = &m.datum;
    let names = e.names();
    let mut out = format!("format = {}\nname = {}\n", quote(FORMAT), quote(e.name()));
    if !m.suites.is_empty() {
        let s: Vec<String> = m.suites.iter().map(|s| quote(s)).collect();
        out.push_str(&format!("suites = [{}]\n", s.join(", ")));
    }
    if !m.expect_pass {
        out.push_str("expect = \"fail\"\n");
    }
    out.push('\n');
    render_ring(&mut out, "ring", e.base());

    let basis: Vec<String> = names.iter().map(|n| quote(n)).collect();
    out.push_str(&format!("\n[module]\nbasis = [{}]\n", basis.join(", ")));
    let diff = e.module().differential();
    if diff.iter().any(|s| !s.is_zero()) {
        out.push_str("\n[module.differential]\n");
        for (n, s) in names.iter().zip(diff) {
            if !s.is_zero() {
                out.push_str(&format!("{} = {}\n", key(n), inline(section_entries(names, s))));
            }
        }
    }

    out.push_str(&format!(
        "\n[pairing]\nmatrix = {}\ninverse = {}\n",
        render_matrix(e.pairing().matrix()),
        render_matrix(e.pairing().inverse())
    ));
    render_anchors(&mut out, "anchor", names, e.anchors());

    for (i, row) in e.structure().iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            if !s.is_zero() {
                out.push_str(&format!(
                    "\n[[bracket]]\npair = [{}, {}]\nvalue = {}\n",
                    quote(&names[i]),
                    quote(&names[j]),
                    inline(section_entries(names, s))
                ));
            }
        }
    }

    if let Some(o) = &m.orientation {
        out.push_str(&format!("\n[orientation]\nn = {}\nscale = {}\n", o.n, quote(&o.scale.to_string())));
    }
    if let Some(span) = &m.submodule {
        out.push_str("\n[submodule]\nspan = [\n");
        for s in span {
            out.push_str(&format!("  {},\n", inline(section_entries(names, s))));
        }
        out.push_str("]\n");
    }
    if let Some(l) = &m.lift {
        out.push('\n');
        render_ring(&mut out, "lift.ring", l.target());
        let salg = e.algebra();
        let talg = l.target().algebra();
        let images: Vec<(String, String)> = (0..salg.len() as u32)
            .filter_map(|g| {
                let name = salg.generator(g).name.clone();
                let img = l.apply(&salg.gen(g)).expect("source element");
                let default = talg.index_of(&name).map(|h| talg.gen(h));
                (default.as_ref() != Some(&img)).then(|| (name, img.render()))
            })
            .collect();
        if !images.is_empty() {
            out.push_str("\n[lift.images]\n");
            for (k, v) in images {
                out.push_str(&format!("{} = {}\n", key(&k), quote(&v)));
            }
        }
        render_anchors(&mut out, "lift.anchor", names, l.lifted_anchor());
    }
    out
}

fn same_cdga(a: &Cdga, b: &Cdga) -> bool {
    let (x, y) = (a.algebra(), b.algebra());
    x.field() == y.field()
        && x.len() == y.len()
        && (0..x.len() as u32).all(|g| x.generator(g) == y.generator(g))
        && derivation_entries(a.differential()) == derivation_entries(b.differential())
}

fn same_derivations(a: &[Derivation], b: &[Derivation]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| derivation_entries(x) == derivation_entries(y))
}

fn render_rows(m: &[Vec<Element>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(Element::render).collect()).collect()
}

fn render_sections(names: &[String], ss: &[Section]) -> Vec<Vec<(String, String)>> {
    ss.iter().map(|s| section_entries(names, s)).collect()
}

/// Structural equality of models: every generator, grade, differential,
/// pairing entry, anchor, structure function and auxiliary block agrees.
impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (&self.datum, &other.datum);
        let names = a.names();
        let base = a.name() == b.name()
            && names == b.names()
            && same_cdga(a.base(), b.base())
            && render_sections(names, a.module().differential())
                == render_sections(names, b.module().differential())
            && render_rows(a.pairing().matrix()) == render_rows(b.pairing().matrix())
            && render_rows(a.pairing().inverse()) == render_rows(b.pairing().inverse())
            && same_derivations(a.anchors(), b.anchors())
            && a.structure().len() == b.structure().len()
            && a.structure().iter().zip(b.structure()).all(|(r, s)| render_sections(names, r) == render_sections(names, s));
        let lift = match (&self.lift, &other.lift) {
            (None, None) => true,
            (Some(l), Some(m)) => {
                let salg = a.algebra();
                same_cdga(l.target(), m.target())
                    && same_derivations(l.lifted_anchor(), m.lifted_anchor())
                    && (0..salg.len() as u32).all(|g| {
                        let x = l.apply(&salg.gen(g)).map(|e| e.render());
                        let y = m.apply(&salg.gen(g)).map(|e| e.render());
                        x == y
                    })
            }
            _ => false,
        };
        base && lift
            && self.suites == other.suites
            && self.expect_pass == other.expect_pass
            && self.orientation == other.orientation
            && self.submodule.as_ref().map(|s| render_sections(names, s))
                == other.submodule.as_ref().map(|s| render_sections(names, s))
    }
}
