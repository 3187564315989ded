//! Verification suites behind the command-line front end. Each runner
//! returns a [`Report`]; checks inside a runner use [`crate::par::map`], so
//! reports are the same in parallel and sequential mode.

use crate::bcov::{self, Denominator, EquivalenceOptions};
use crate::constructions::{self, IsotropicSubmodule};
use crate::contact::{ContactModel, ContactOptions, Orientation};
use crate::courant::{TestConfig, Verdict};
use crate::error::{validation, Result};
use crate::linfinity;
use crate::model::Model;
use crate::report::Report;

pub const SUITES: &[&str] = &["check-courant", "rw-check", "cme", "extend", "reduce", "cy-check", "bcov-equiv"];

fn with_cfg(r: &mut Report, cfg: &TestConfig) {
    r.param("degree", cfg.degree).param("sections", cfg.random_sections);
}

/// Courant axioms on a model.
pub fn check_courant(m: &Model, input: &str, cfg: &TestConfig) -> Report {
    let mut r = Report::new("check-courant", input, cfg.seed);
    with_cfg(&mut r, cfg);
    r.extend(m.datum.check_axioms(cfg).verdicts());
    r
}

/// `Q_RW^2 = 0`, the identities behind the master equation, and graded
/// antisymmetry of `mu2`, `mu3`.
pub fn rw_check(m: &Model, input: &str, cfg: &TestConfig) -> Result<Report> {
    let mut r = Report::new("rw-check", input, cfg.seed);
    with_cfg(&mut r, cfg);
    let rw = linfinity::rw_construct(&m.datum)?;
    let h = rw.check_homological()?;
    let fields = m.datum.rank() + 1;
    let w = h.failures.first().map(|(f, v)| format!("Q(Q({f})) = {v}"));
    r.push(&Verdict::new("Q_RW^2 = 0", fields, w));
    r.extend(&linfinity::proof_identities(&m.datum, cfg)?);
    let sections: Vec<_> = m.datum.test_set(cfg).sections.into_iter().map(|(_, s)| s).collect();
    let defects = linfinity::antisymmetry_defects(&rw, &sections)?;
    r.push(&Verdict::new("mu2 and mu3 graded antisymmetric", sections.len(), defects.first().cloned()));
    Ok(r)
}

/// The classical master equation of the contact model.
pub fn cme(m: &Model, input: &str, order: u32) -> Result<Report> {
    let o = m.orientation.clone().unwrap_or_else(|| Orientation::default_for(&m.datum));
    let mut r = Report::new("cme", input, 0);
    r.param("n", o.n).param("scale", &o.scale).param("order", order);
    let model = ContactModel::new(&m.datum, o, ContactOptions { order, expand: false })?;
    let c = model.verify_cme()?;
    if let Some(p) = &c.point {
        let ok = p.bracket.is_zero();
        r.push(&Verdict::from_bool("{S,S} = 0", ok, format!("{{S,S}} = {}", p.bracket.render())));
        r.note(if ok { "{S,S} = 0 (exact)".to_string() } else { format!("{{S,S}} = {}", p.bracket.render()) });
    }
    let ham = c.hamiltonian.residues.first().map(|(f, v)| format!("{f}: {v}"));
    r.push(&Verdict::new("i_{X_S} omega = -delta S", model.jet().fields().len(), ham));
    let sq = c.square.first().map(|(f, v)| format!("X_S(X_S({f})) = {v}"));
    r.push(&Verdict::new("X_S^2 = 0 per field", model.jet().fields().len(), sq));
    let inv = c.action_invariance;
    r.push(&Verdict::from_bool(
        "X_S(S) is a total derivative",
        inv.total_derivative,
        inv.witness.unwrap_or_default(),
    ));
    Ok(r)
}

/// Lift conditions, then the axioms on the extended algebroid.
pub fn extend(m: &Model, input: &str, cfg: &TestConfig) -> Result<Report> {
    let lift = m.lift.as_ref().ok_or_else(|| validation("the model has no [lift] block", None))?;
    let mut r = Report::new("extend", input, cfg.seed);
    with_cfg(&mut r, cfg);
    let lr = constructions::check_lift(lift, &m.datum)?;
    r.extend(lr.verdicts());
    if lr.all_pass() {
        let e = constructions::extend_scalars(&m.datum, lift)?;
        for v in e.check_axioms(cfg).verdicts() {
            let mut v = v.clone();
            v.name = format!("extended: {}", v.name);
            r.push(&v);
        }
        for (a, d) in e.anchors().iter().enumerate() {
            r.note(format!("rho({}) = {}", e.names()[a], d.render()));
        }
        for (a, row) in e.structure().iter().enumerate() {
            for (b, s) in row.iter().enumerate() {
                if !s.is_zero() {
                    r.note(format!("[{}, {}] = {}", e.names()[a], e.names()[b], e.render(s)));
                }
            }
        }
    }
    Ok(r)
}

fn reduction_notes(r: &mut Report, red: &constructions::Reduction) {
    r.note(format!("reduced rank {}", red.datum.rank()));
    if !red.invariant_coordinates.is_empty() {
        r.note(format!("invariant coordinates {}", red.invariant_coordinates.join(", ")));
    }
    let dims: Vec<String> = red.flat_dimensions.iter().map(usize::to_string).collect();
    r.note(format!("flat dimensions by degree {}", dims.join(", ")));
}

/// Reduction along the `[submodule]` block of a model.
pub fn reduce(m: &Model, input: &str, cutoff: u32, cfg: &TestConfig) -> Result<Report> {
    let span = m.submodule.clone().ok_or_else(|| validation("the model has no [submodule] block", None))?;
    let mut r = Report::new("reduce", input, cfg.seed);
    with_cfg(&mut r, cfg);
    let red = if m.datum.algebra().is_empty() {
        constructions::reduce_point(&m.datum, span)?
    } else {
        r.param("cutoff", cutoff);
        constructions::reduce(&IsotropicSubmodule::new(m.datum.clone(), span)?, cutoff, None, cfg)?
    };
    r.extend(&red.verdicts);
    reduction_notes(&mut r, &red);
    Ok(r)
}

/// Reduction of the complexified standard algebroid on `C^d` along
/// `T^{0,1}`, compared with the holomorphic one.
pub fn reduce_dolbeault(d: usize, cutoff: u32, cfg: &TestConfig) -> Result<Report> {
    let mut r = Report::new("reduce", &format!("dolbeault C^{d}"), cfg.seed);
    with_cfg(&mut r, cfg);
    r.param("cutoff", cutoff).param("dim", d);
    let c = constructions::reduce_dolbeault(d, cutoff, cfg)?;
    r.extend(&c.verdicts);
    reduction_notes(&mut r, &c.reduction);
    Ok(r)
}

pub fn cy_check(d: usize, cutoff: u32, cfg: &TestConfig) -> Result<Report> {
    let mut r = Report::new("cy-check", &format!("flat Calabi-Yau C^{d}"), cfg.seed);
    with_cfg(&mut r, cfg);
    r.param("cutoff", cutoff).param("dim", d);
    let c = constructions::cy_flat_reduction_check(d, cutoff, false, cfg)?;
    r.extend(&c.verdicts);
    reduction_notes(&mut r, &c.reduction);
    Ok(r)
}

#[derive(Clone, Copy, Debug)]
pub struct BcovParams {
    pub dim: u32,
    pub order: u32,
    pub cutoff: u32,
    /// `None` picks 16 evaluations from five dimensions on and none below.
    pub seeds: Option<u32>,
    pub seed: u64,
    pub denominator: Denominator,
}

pub fn bcov_equiv(p: &BcovParams) -> Result<Report> {
    let seeds = p.seeds.unwrap_or(if p.dim >= 5 { 16 } else { 0 });
    let mut r = Report::new("bcov-equiv", &format!("contact model on C^{}", p.dim), p.seed);
    r.param("dim", p.dim).param("order", p.order).param("cutoff", p.cutoff).param("evaluations", seeds);
    let den = match p.denominator {
        Denominator::OnePlusNu => "1+nu",
        Denominator::OneMinusNu => "1-nu",
    };
    r.param("denominator", den);
    let opts = EquivalenceOptions { seeds, seed: p.seed, drop_mixed_term: false, denominator: p.denominator };
    let e = bcov::verify_equivalence_with(p.dim, p.order, p.cutoff, opts)?;
    r.extend(e.verdicts());
    if let Some(a) = &e.alternative {
        r.note(a.clone());
    }
    r.note(e.note.clone());
    Ok(r)
}
