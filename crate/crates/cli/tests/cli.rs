use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HENON: &str = r#"
schema_version = 1

[[generators]]
family = "henon"
name = "h"
p = "x^2"

[measure]
atoms = [{ name = "h", weight = "1/2" }, { name = "h^-1", weight = "1/2" }]
free_basis = true

[walk]
length = 400
checkpoints = [100, 400]
trials = 400
seed = 3
backend = "fast"

[thresholds]
ks = 0.2
"#;

fn cremona(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cremona"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn passing_clt_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), HENON);
    let out = dir.path().join("out");
    let o = cremona(&["clt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("status: pass\n"));
    for f in ["walk.csv", "summary.txt", "histogram.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(out.join("walk.csv")).unwrap();
    assert!(csv.starts_with("trial,step,log_deg\n"));
    assert!(csv.ends_with("summary,failures,0\n"));
}

#[test]
fn threshold_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &HENON.replace("ks = 0.2", "ks = 0.0001"));
    let o = cremona(&["clt", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: fail"));
}

#[test]
fn malformed_config_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &HENON.replace("\"1/2\" }]", "\"half\" }]"));
    let o = cremona(&["clt", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("measure.atoms[1].weight"),
        "{}",
        stderr(&o)
    );

    let cfg = write_config(dir.path(), &HENON.replace("length = 400", "lenght = 400"));
    let o = cremona(&["walk", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lenght"), "{}", stderr(&o));

    let o = cremona(&["degree", "[X^2 : Y"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_three_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), HENON);
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("walk.csv")).unwrap();
    let o = cremona(&["clt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["walk.csv".to_string()]);

    let o = cremona(&["clt", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), HENON);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = cremona(&["clt", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["walk.csv", "summary.txt", "histogram.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let c = dir.path().join("c");
    cremona(&[
        "clt",
        "--config",
        &cfg,
        "--seed",
        "4",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_ne!(
        fs::read(a.join("walk.csv")).unwrap(),
        fs::read(c.join("walk.csv")).unwrap()
    );
}

#[test]
fn compose_and_degree_commands() {
    let o = cremona(&["compose", "[X*Y : Y*Z : Z^2]", "[Y : X : Z]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("degree: 2\n"));

    let o = cremona(&["degree", "[Y*Z + X^2 : X*Z : Z^2]", "--iterate", "4"]);
    assert_eq!(stdout(&o), "k,degree\n1,2\n2,4\n3,8\n4,16\n");

    let o = cremona(&[
        "degree",
        "[Y*Z + X^2 : X*Z : Z^2]",
        "--iterate",
        "4",
        "--cap",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dyndeg_routes() {
    let o = cremona(&["dyndeg", "--matrix", "1 1; 1 0"]);
    assert!(stdout(&o).starts_with("lambda1: 1.618033988749"));
    let o = cremona(&["dyndeg", "--lambda", "1/3"]);
    assert!(stdout(&o).starts_with("lambda1: 3\n"));
    let o = cremona(&[
        "dyndeg",
        "--map",
        "[Y*Z + X^2 : X*Z : Z^2]",
        "--budget",
        "5",
    ]);
    assert!(stdout(&o).contains("5,32,2\n"));
    let o = cremona(&["dyndeg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_named_suite() {
    let o = cremona(&["verify", "table"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("table: 7 cases, 0 counterexamples"));
    let o = cremona(&["verify", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}
