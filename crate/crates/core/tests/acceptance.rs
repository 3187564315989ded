//! Acceptance criteria. Each test prints one `criterion N: pass|fail` line
//! with its elapsed time and fails when the check or the time budget does.

use std::time::{Duration, Instant};

use courant_core::algebra::Derivation;
use courant_core::bcov::{self, EquivalenceOptions};
use courant_core::builders;
use courant_core::cdga::Cdga;
use courant_core::coeff::{Coeff, CoefficientField};
use courant_core::constructions::{self, ScalarsMap};
use courant_core::contact::{ContactModel, ContactOptions, Orientation};
use courant_core::courant::{CourantDatum, TestConfig, Verdict};
use courant_core::fixtures;
use courant_core::linfinity;
use courant_core::model;
use courant_core::suite::{self, BcovParams};

fn criterion(n: u32, what: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let t = Instant::now();
    let outcome = body();
    let elapsed = t.elapsed();
    let outcome = outcome.and_then(|()| {
        if elapsed <= budget {
            Ok(())
        } else {
            Err(format!("took {:.1} s, budget {} s", elapsed.as_secs_f64(), budget.as_secs()))
        }
    });
    match &outcome {
        Ok(()) => println!("criterion {n}: pass  {what} ({:.2} s)", elapsed.as_secs_f64()),
        Err(e) => println!("criterion {n}: fail  {what} ({:.2} s): {e}", elapsed.as_secs_f64()),
    }
    if let Err(e) = outcome {
        panic!("criterion {n}: {e}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass<'a>(label: &str, vs: impl IntoIterator<Item = &'a Verdict>) -> Result<(), String> {
    for v in vs {
        ensure(v.pass, || {
            let w = v.witness.as_deref().unwrap_or("");
            let short: String = w.chars().take(120).collect();
            let more = if short.len() < w.len() { " ..." } else { "" };
            format!("{label}: {} failed: {short}{more}", v.name)
        })?;
    }
    Ok(())
}

fn suite_data() -> Vec<CourantDatum> {
    vec![
        builders::standard_courant(1),
        builders::standard_courant(2),
        builders::standard_courant(3),
        builders::dolbeault_standard(1),
        builders::dolbeault_standard(2),
        builders::abelian_r2(),
        builders::so3(),
        builders::hyperbolic_r2(),
        builders::flat_transitive(1, &builders::so3()).unwrap(),
    ]
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn t_line() -> Cdga {
    Cdga::polynomial(CoefficientField::Rationals, &["t"]).unwrap()
}

#[test]
fn criterion_1_courant_axioms() {
    criterion(1, "Courant axioms on the suite", secs(60), || {
        let cfg = TestConfig::default();
        for d in suite_data() {
            all_pass(d.name(), d.check_axioms(&cfg).verdicts())?;
        }
        Ok(())
    });
}

#[test]
fn criterion_2_negative_controls() {
    criterion(2, "broken so(3) and the non-coisotropic lift are rejected", secs(5), || {
        let r = builders::so3_broken().check_axioms(&TestConfig::default());
        ensure(!r.all_pass(), || "so3_broken passes the axioms".into())?;
        let w = r.jacobi.witness.clone().unwrap_or_default();
        ensure(!r.jacobi.pass && w.starts_with("(e1, e2, e3)"), || {
            format!("so3_broken: no Jacobiator witness on (e1, e2, e3); first witness {w}")
        })?;

        let h = builders::hyperbolic_r2();
        let t = t_line();
        let dt = Derivation::partial(t.algebra(), 0);
        let m = ScalarsMap::inclusion(h.base().clone(), t, vec![dt.clone(), dt]).map_err(|e| e.to_string())?;
        let lr = constructions::check_lift(&m, &h).map_err(|e| e.to_string())?;
        ensure(!lr.all_pass(), || "the non-coisotropic lift passes check_lift".into())
    });
}

#[test]
fn criterion_3_rw_homological() {
    criterion(3, "Q_RW^2 = 0 and the three proof identities", secs(120), || {
        let cfg = TestConfig::default();
        for d in suite_data() {
            let rw = linfinity::rw_construct(&d).map_err(|e| e.to_string())?;
            let h = rw.check_homological().map_err(|e| e.to_string())?;
            ensure(h.pass, || format!("{}: Q^2 != 0 on {:?}", d.name(), h.failures.first()))?;
            let ids = linfinity::proof_identities(&d, &cfg).map_err(|e| e.to_string())?;
            ensure(ids.len() == 3, || format!("{}: {} identities", d.name(), ids.len()))?;
            for v in &ids {
                ensure(v.checked >= 8, || format!("{}: {} on {} sections", d.name(), v.name, v.checked))?;
            }
            all_pass(d.name(), &ids)?;
        }
        Ok(())
    });
}

#[test]
fn criterion_4_point_cme() {
    criterion(4, "{S,S} = 0 at a point", secs(10), || {
        for d in [builders::so3(), builders::hyperbolic_r2()] {
            let m = ContactModel::new(&d, Orientation::new(0, Coeff::one()), ContactOptions::default())
                .map_err(|e| e.to_string())?;
            let b = m.point_bracket(&m.master_action()).map_err(|e| e.to_string())?;
            ensure(b.is_zero(), || format!("{}: {{S,S}} = {}", d.name(), b.render()))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_5_jet_cme() {
    criterion(5, "master equation in the jet regime", secs(300), || {
        for d in [builders::standard_courant(1), builders::standard_courant(2)] {
            let m = ContactModel::new(&d, Orientation::default_for(&d), ContactOptions::default())
                .map_err(|e| e.to_string())?;
            let c = m.verify_cme().map_err(|e| e.to_string())?;
            ensure(c.hamiltonian.pass, || format!("{}: {:?}", d.name(), c.hamiltonian.residues.first()))?;
            ensure(c.square.is_empty(), || format!("{}: {:?}", d.name(), c.square.first()))?;
            ensure(c.action_invariance.total_derivative, || {
                format!("{}: X_S(S) {:?}", d.name(), c.action_invariance.witness)
            })?;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_dbar_hamiltonian() {
    criterion(6, "dbar is the Hamiltonian field of S_dbar", secs(30), || {
        let d = builders::dolbeault_standard(1);
        let m = ContactModel::new(&d, Orientation::default_for(&d), ContactOptions::default())
            .map_err(|e| e.to_string())?;
        let x = m.dbar_field().map_err(|e| e.to_string())?;
        let r = m.hamiltonian_check(&x, &m.s_dbar()).map_err(|e| e.to_string())?;
        ensure(r.pass, || format!("{:?}", r.residues.first()))
    });
}

#[test]
fn criterion_7_extension_of_scalars() {
    criterion(7, "hyperbolic R^2 extended to R[t] is standard R^1", secs(10), || {
        let h = builders::hyperbolic_r2();
        let t = t_line();
        let m = ScalarsMap::inclusion(
            h.base().clone(),
            t.clone(),
            vec![Derivation::partial(t.algebra(), 0), Derivation::zero(t.algebra())],
        )
        .map_err(|e| e.to_string())?;
        all_pass("lift", constructions::check_lift(&m, &h).map_err(|e| e.to_string())?.verdicts())?;
        let ext = constructions::extend_scalars(&h, &m).map_err(|e| e.to_string())?;
        let std = builders::standard_courant(1);
        ensure(ext.algebra().same_as(std.algebra()), || "different function algebras".into())?;
        for a in 0..2 {
            ensure(ext.anchors()[a] == std.anchors()[a], || format!("anchor of e{}", a + 1))?;
            for b in 0..2 {
                ensure(ext.pairing().matrix()[a][b] == std.pairing().matrix()[a][b], || format!("pairing {a},{b}"))?;
                ensure(ext.structure()[a][b] == std.structure()[a][b], || format!("bracket {a},{b}"))?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_8_reduction() {
    criterion(8, "Dolbeault reduction and flat Calabi-Yau check", secs(60), || {
        let cfg = TestConfig::default();
        let c = constructions::reduce_dolbeault(1, 3, &cfg).map_err(|e| e.to_string())?;
        all_pass("reduce_dolbeault", &c.verdicts)?;
        ensure(c.verdicts.iter().any(|v| v.name.starts_with("structure functions match")), || {
            "no comparison with the holomorphic algebroid".into()
        })?;
        let flat: usize = c.reduction.flat_dimensions.len();
        ensure(flat == 4, || format!("flat sections computed up to degree {}", flat - 1))?;

        let cy = constructions::cy_flat_reduction_check(1, 2, false, &cfg).map_err(|e| e.to_string())?;
        all_pass("cy_flat_reduction_check", &cy.verdicts)?;
        ensure(cy.verdicts.iter().any(|v| v.name.contains("conj(L)")), || "no conj(L) comparison".into())
    });
}

#[test]
fn criterion_9_bcov_equivalence() {
    criterion(9, "contact model on C^n is BCOV theory", secs(900), || {
        let r = bcov::verify_equivalence(1, 3, 2).map_err(|e| e.to_string())?;
        all_pass("n = 1", r.verdicts())?;

        let mutated = EquivalenceOptions { drop_mixed_term: true, ..Default::default() };
        let r = bcov::verify_equivalence_with(1, 1, 1, mutated).map_err(|e| e.to_string())?;
        ensure(!r.action[0].pass, || "the dropped-term mutation passes at order 0".into())?;

        let r = bcov::verify_equivalence(5, 1, 1).map_err(|e| e.to_string())?;
        let evals = r.evaluations.as_ref().map_or(0, |v| v.checked);
        ensure(evals == 16, || format!("n = 5: {evals} rational evaluations"))?;
        all_pass("n = 5", r.verdicts()).map_err(|e| match &r.alternative {
            Some(a) => format!("{e}; {a}"),
            None => e,
        })
    });
}

#[test]
fn criterion_10_determinism_and_round_trip() {
    criterion(10, "byte-identical reports and model round trips", secs(10), || {
        let cfg = TestConfig::default();
        let so3 = model::parse_model(fixtures::get("so3_point").unwrap()).map_err(|e| e.to_string())?;
        let run = || -> Result<Vec<String>, String> {
            let bcov = BcovParams {
                dim: 1,
                order: 2,
                cutoff: 2,
                seeds: Some(4),
                seed: 11,
                denominator: Default::default(),
            };
            Ok(vec![
                suite::check_courant(&so3, "examples/so3_point", &cfg).to_machine(),
                suite::rw_check(&so3, "examples/so3_point", &cfg).map_err(|e| e.to_string())?.to_machine(),
                suite::reduce_dolbeault(1, 2, &cfg).map_err(|e| e.to_string())?.to_machine(),
                suite::bcov_equiv(&bcov).map_err(|e| e.to_string())?.to_machine(),
            ])
        };
        let (a, b) = (run()?, run()?);
        ensure(a == b, || "machine reports differ between runs".into())?;

        for (name, src) in fixtures::FIXTURES {
            let m = model::parse_model(src).map_err(|e| format!("{name}: {e}"))?;
            let text = model::render_model(&m);
            let again = model::parse_model(&text).map_err(|e| format!("{name} rendered: {e}"))?;
            ensure(again == m, || format!("{name}: parse(render(m)) != m"))?;
            ensure(model::render_model(&again) == text, || format!("{name}: render is not idempotent"))?;
        }
        Ok(())
    });
}
