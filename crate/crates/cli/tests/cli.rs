use std::process::{Command, Output};

fn courant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_courant")).args(args).env_remove("COURANT_JOBS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn negative(name: &str) -> String {
    format!("{}/../core/tests/fixtures/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn cme_on_so3_is_exact() {
    let o = courant(&["cme", "examples/so3_point"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("{S,S} = 0 (exact)"), "{}", stdout(&o));
}

#[test]
fn bcov_in_one_dimension() {
    let o = courant(&["bcov-equiv", "--dim", "1", "--order", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn broken_so3_reports_a_jacobiator() {
    let o = courant(&["check-courant", "examples/so3_broken"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let jac = out.lines().position(|l| l.starts_with("FAIL  jacobi")).expect("jacobi fails");
    assert!(out.lines().nth(jac + 1).unwrap().contains("witness: (e"), "{out}");
}

#[test]
fn machine_reports_are_byte_stable() {
    for args in [
        &["--format", "machine", "check-courant", "examples/standard_r2", "--seed", "11"][..],
        &["--format", "machine", "rw-check", "examples/dolbeault_c1", "--seed", "11"][..],
    ] {
        let a = courant(args);
        let b = courant(args);
        assert_eq!(a.stdout, b.stdout);
        let mut seq = args.to_vec();
        seq.insert(0, "--sequential");
        assert_eq!(courant(&seq).stdout, a.stdout);
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["schema"], "courant-report/1");
        assert_eq!(v["seed"], 11);
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn jobs_come_from_the_environment() {
    let args = ["--format", "machine", "check-courant", "examples/standard_r1"];
    let base = courant(&args);
    let one = Command::new(env!("CARGO_BIN_EXE_courant")).args(args).env("COURANT_JOBS", "1").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, base.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_courant")).args(args).env("COURANT_JOBS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn diagnostics_name_their_class() {
    let o = courant(&["check-courant", &negative("wrong_inverse")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pairing witness at 18:11"), "{}", stderr(&o));
    let o = courant(&["check-courant", &negative("undeclared_generator")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unresolved reference at 38:19"), "{}", stderr(&o));
    let o = courant(&["check-courant", "examples/nothing_here"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_are_rejected() {
    for args in [
        &["check-courant", "examples/so3_point", "--degree", "9"][..],
        &["bcov-equiv", "--dim", "0"][..],
        &["cme", "examples/so3_point", "--frobnicate"][..],
        &["--format", "yaml", "examples", "list"][..],
    ] {
        assert_eq!(courant(args).status.code(), Some(2), "{args:?}");
    }
    // even dimension is a validation error, not a failed check
    let o = courant(&["bcov-equiv", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn examples_behave_as_declared() {
    let o = courant(&["examples", "list"]);
    assert!(stdout(&o).contains("examples/so3_broken  [check-courant]  expect fail"));
    let o = courant(&["--format", "machine", "examples", "run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 10);
    assert_eq!(courant(&["examples", "run", "so3_point"]).status.code(), Some(0));
}

#[test]
fn constructions_from_the_command_line() {
    let o = courant(&["extend", "examples/hyperbolic_r2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rho(e1) = t -> 1"), "{}", stdout(&o));
    let o = courant(&["extend", "examples/lift_not_coisotropic"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(t, t) = 2"));
    assert_eq!(courant(&["reduce", "--dim", "1", "--cutoff", "3"]).status.code(), Some(0));
    assert_eq!(courant(&["cy-check", "--dim", "1", "--cutoff", "2"]).status.code(), Some(0));
    assert_eq!(courant(&["reduce", "examples/hyperbolic_r2"]).status.code(), Some(0));
}
