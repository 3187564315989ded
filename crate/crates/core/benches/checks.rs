use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use courant_core::bcov::verify_equivalence;
use courant_core::builders;
use courant_core::courant::TestConfig;
use courant_core::linfinity::{proof_identities, rw_construct};
use courant_core::par;

fn both_modes(c: &mut Criterion, name: &str, f: impl Fn()) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    for (mode, seq) in [("parallel", false), ("sequential", true)] {
        par::set_sequential(seq);
        g.bench_function(mode, |b| b.iter(&f));
    }
    par::set_sequential(false);
    g.finish();
}

fn axioms(c: &mut Criterion) {
    let e = builders::standard_courant(2);
    let cfg = TestConfig { random_sections: 12, ..TestConfig::default() };
    both_modes(c, "check_axioms standard R^2", || {
        black_box(e.check_axioms(&cfg));
    });
}

fn rw(c: &mut Criterion) {
    let e = builders::dolbeault_standard(2);
    let cfg = TestConfig::default();
    both_modes(c, "rw homological + identities, Dolbeault C^2", || {
        let rw = rw_construct(&e).unwrap();
        black_box(rw.check_homological().unwrap());
        black_box(proof_identities(&e, &cfg).unwrap());
    });
}

fn bcov(c: &mut Criterion) {
    both_modes(c, "bcov equivalence n=3 K=2", || {
        black_box(verify_equivalence(3, 2, 1).unwrap());
    });
}

criterion_group!(benches, axioms, rw, bcov);
criterion_main!(benches);
