use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qbnet::density::fmt9;
use qbnet::protocols;
use qbnet::recipe::Recipe;

fn qbnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbnet")).args(args).output().expect("run qbnet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn export(dir: &Path, name: &str, file: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(file);
    let mut args = vec!["export", name, "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = qbnet(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn epr_file(dir: &Path) -> PathBuf {
    export(dir, "epr", "epr.qbn", &[])
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let epr = epr_file(dir.path());
    assert_eq!(qbnet(&["validate", epr.to_str().unwrap()]).status.code(), Some(0));

    let text = std::fs::read_to_string(&epr).unwrap();
    let scaled = dir.path().join("scaled.qbn");
    std::fs::write(&scaled, text.replacen("0.7071067811865476+0i", "1.4142135623730951+0i", 1)).unwrap();
    let o = qbnet(&["validate", scaled.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ColumnNorm\te"), "{}", stderr(&o));

    let bad = dir.path().join("bad.qbn");
    std::fs::write(&bad, text.replacen("0.7071067811865476+0i", "0.70710678+0.1k", 1)).unwrap();
    let o = qbnet(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 6, column 17"), "{}", stderr(&o));

    let cyclic = dir.path().join("cyclic.qbn");
    std::fs::write(
        &cyclic,
        "[node a]\nstates = 1\nparents = b\nmatrix =\n 1\n[node b]\nstates = 1\nparents = a\nmatrix =\n 1\n",
    )
    .unwrap();
    assert_eq!(qbnet(&["validate", cyclic.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qbnet(&["validate", "/nonexistent/file.qbn"]).status.code(), Some(1));
}

#[test]
fn entropy_on_the_epr_file() {
    let dir = tempfile::tempdir().unwrap();
    let epr = epr_file(dir.path());
    let f = epr.to_str().unwrap();
    let run = |args: &[&str]| {
        let mut all = vec!["entropy", f];
        all.extend_from_slice(args);
        let o = qbnet(&all);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(run(&["--recipe", "esum(e)", "--expr", "x:y"]), "2.000000000\n");
    assert_eq!(run(&["--recipe", "esum(e)", "--expr", "x:y", "--kind", "h"]), "1.000000000\n");
    assert_eq!(run(&["--recipe", "esum(e)", "--expr", "x:x"]), run(&["--recipe", "esum(e)", "--expr", "x"]));
    assert_eq!(run(&["--recipe", "esum(e);project(y=0)", "--expr", "x"]), "0.000000000\n");
    let m = run(&["--recipe", "esum(e);trace(y)", "--out", "matrix"]);
    assert_eq!(m, "0\t0\t0.500000000\t0.000000000\n0\t1\t0.000000000\t0.000000000\n1\t0\t0.000000000\t0.000000000\n1\t1\t0.500000000\t0.000000000\n");

    assert_eq!(qbnet(&["entropy", f, "--recipe", "esum(e)", "--expr", "x:(y"]).status.code(), Some(1));
    assert_eq!(qbnet(&["entropy", f, "--recipe", "esum(q)", "--expr", "x"]).status.code(), Some(2));
    assert_eq!(qbnet(&["entropy", f, "--recipe", "project(y=0;", "--expr", "x"]).status.code(), Some(1));
}

#[test]
fn probability_tables() {
    let dir = tempfile::tempdir().unwrap();
    let epr = epr_file(dir.path());
    let f = epr.to_str().unwrap();
    let o = qbnet(&["probs", f, "--gamma", "x,y"]);
    assert_eq!(stdout(&o), "x\ty\tP\n0\t0\t0.000000000\n0\t1\t0.500000000\n1\t0\t0.500000000\n1\t1\t0.000000000\n");
    let o = qbnet(&["probs", f, "--gamma", "x", "--given", "y=1"]);
    assert_eq!(stdout(&o), "x\tP\n0\t1.000000000\n1\t0.000000000\n");

    // Interference: P(c) differs from the sum over b of P(b, c).
    let w = export(dir.path(), "witness", "w.qbn", &[]);
    let w = w.to_str().unwrap();
    assert_eq!(stdout(&qbnet(&["probs", w, "--gamma", "c"])), "c\tP\n0\t1.000000000\n1\t0.000000000\n");
    assert_eq!(
        stdout(&qbnet(&["probs", w, "--gamma", "b,c"])),
        "b\tc\tP\n0\t0\t0.250000000\n0\t1\t0.250000000\n1\t0\t0.250000000\n1\t1\t0.250000000\n"
    );
    assert_eq!(qbnet(&["probs", f, "--gamma", "x", "--given", "y"]).status.code(), Some(1));
}

#[test]
fn holevo_and_accessible_information() {
    let dir = tempfile::tempdir().unwrap();
    let trine = export(dir.path(), "trine", "trine.ens", &[]);
    let t = trine.to_str().unwrap();
    assert_eq!(stdout(&qbnet(&["holevo", t])), "chi\t1.000000000\n");

    let o = qbnet(&["accinfo", t, "--m", "3", "--restarts", "32", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let value: f64 = stdout(&o).lines().next().unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((0.5849..=1.0).contains(&value), "{value}");

    let pom = export(dir.path(), "trine-pom", "trine.pom", &[]);
    let o = qbnet(&["accinfo", t, "--pom", pom.to_str().unwrap()]);
    assert_eq!(stdout(&o), format!("mutual_info\t{}\nchi\t1.000000000\n", fmt9(3f64.log2() - 1.0)));

    let single = dir.path().join("single.ens");
    std::fs::write(&single, "dim 2, signals 1\n1\n0 0 0.5 0\n0 1 0.5 0\n1 0 0.5 0\n1 1 0.5 0\n").unwrap();
    assert_eq!(stdout(&qbnet(&["holevo", single.to_str().unwrap()])), "chi\t0.000000000\n");

    let broken = dir.path().join("broken.ens");
    std::fs::write(&broken, "dim 2 signals 1\n1\n").unwrap();
    assert_eq!(qbnet(&["holevo", broken.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn property_suites_pass() {
    for args in [
        &["check", "table1", "--trials", "100", "--seed", "7"][..],
        &["check", "dp", "--trials", "200", "--seed", "7"],
        &["check", "protocols"],
    ] {
        let o = qbnet(args);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let out = stdout(&o);
        assert!(!out.contains("FAIL"));
        assert!(out.lines().filter(|l| l.starts_with("PASS")).count() > 5);
    }
}

#[test]
fn demos() {
    let o = qbnet(&["demo", "epr"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rho: Vec<&str> = out.lines().filter(|l| l.starts_with("rho\t")).collect();
    assert_eq!(
        rho,
        [
            "rho\tx\t1.000000000\t1.000000000",
            "rho\ty\t1.000000000\t1.000000000",
            "rho\tx,y\t0.000000000\t1.000000000",
            "rho\tx|y\t-1.000000000\t0.000000000",
            "rho\ty|x\t-1.000000000\t0.000000000",
            "rho\tx:y\t2.000000000\t1.000000000",
        ]
    );

    let out = stdout(&qbnet(&["demo", "teleport", "--alpha", "1,0"]));
    for expr in ["a", "a,f", "a:f", "a|f"] {
        let row = out.lines().find(|l| l.starts_with(&format!("rho_a\t{expr}\t"))).unwrap();
        assert!(row.ends_with("\t0.000000000\t0.000000000") || expr == "a,f", "{row}");
    }
    assert!(!out.contains("FAIL"));

    let out = stdout(&qbnet(&["demo", "holevo", "--restarts", "8"]));
    assert!(out.contains("chi\t1.000000000\n"));
    assert!(out.contains("trine_pom_info\t0.584962501\n"));

    for name in ["eraser", "densecode", "sysenv", "twomix"] {
        let o = qbnet(&["demo", name]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
    assert!(qbnet(&["demo", "sysenv", "--steps", "2"]).status.success());
    assert_eq!(qbnet(&["demo", "teleport", "--alpha", "1,1"]).status.code(), Some(3));
    assert_eq!(qbnet(&["demo", "teleport", "--alpha", "1,0,0"]).status.code(), Some(2));
}

#[test]
fn exported_files_replay_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    let fx = protocols::teleport_net(&protocols::demo_alpha2()).unwrap();
    let path = export(dir.path(), "teleport", "tele.qbn", &["--alpha", "0.6,0+0.8i"]);
    let f = path.to_str().unwrap();
    assert!(qbnet(&["validate", f]).status.success());
    for (recipe, expr) in [("trace(b)", "a:f"), ("project(f=0)", "a,b"), ("esum(e,x,y)", "a:b")] {
        let want = recipe.parse::<Recipe>().unwrap().apply(&fx.net).unwrap().s(expr).unwrap();
        let o = qbnet(&["entropy", f, "--recipe", recipe, "--expr", expr]);
        assert_eq!(stdout(&o), format!("{}\n", fmt9(want)), "{recipe} {expr}");
    }
}
