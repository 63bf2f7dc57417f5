use std::path::Path;
use std::process::{Command, Output};

fn nevlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NEV_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let head: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (head, rows)
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn functionals_of_exp_match_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(&["functionals", "--f", "exp(z)", "--grid", "20:1.5:3"], tmp.path());
    assert_eq!(code(&o), 0);
    let (head, rows) = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let t = head.iter().position(|h| h == "T").unwrap();
    assert_eq!(rows[0][0], 20.0);
    assert!((rows[0][t] / (20.0 / std::f64::consts::PI) - 1.0).abs() < 1e-6);
}

#[test]
fn functionals_of_polynomial_has_no_poles_and_writes_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tables/z2.csv");
    let o = nevlab(
        &[
            "functionals",
            "--f",
            "z^2",
            "--target",
            "0",
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let (head, rows) = csv_rows(&std::fs::read_to_string(out).unwrap());
    let np = head.iter().position(|h| h == "N_pole").unwrap();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r[np] == 0.0));
}

#[test]
fn config_file_supplies_values_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "f = sin(z)  # overridden\ngrid = 10:2:2\n").unwrap();
    let o = nevlab(
        &["--config", cfg.to_str().unwrap(), "functionals", "--f", "exp(z)"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let (head, rows) = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let t = head.iter().position(|h| h == "T").unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[1][t] - 20.0 / std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn singularities_of_sine_are_the_integers() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(&["singularities", "--f", "sin(pi*z)", "--radius", "3.5"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut re: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    re.sort_by(f64::total_cmp);
    let expect = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    assert_eq!(re.len(), expect.len());
    for (x, e) in re.iter().zip(expect) {
        assert!((x - e).abs() < 1e-9);
    }
    let poles = nevlab(&["singularities", "--f", "1/(z^2-4)", "--target", "pole"], tmp.path());
    assert_eq!(String::from_utf8(poles.stdout).unwrap().lines().count(), 3);
}

#[test]
fn parse_error_exits_three_with_caret() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(&["functionals", "--f", "exp(z"], tmp.path());
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("exp(z"));
    assert!(err.contains('^'));
}

#[test]
fn bad_flags_and_unknown_checks_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&nevlab(&["verify", "no-such-check"], tmp.path())), 3);
    assert_eq!(code(&nevlab(&["functionals", "--bogus"], tmp.path())), 3);
    assert_eq!(
        code(&nevlab(&["functionals", "--f", "z", "--grid", "1:0.5:3"], tmp.path())),
        3
    );
    assert_eq!(
        code(&nevlab(&["--workers", "many", "functionals", "--f", "z"], tmp.path())),
        3
    );
    assert_eq!(code(&nevlab(&["--help"], tmp.path())), 0);
}

#[test]
fn verify_main_estimate_passes_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(&["verify", "main-estimate", "--f", "exp(z)", "--a", "2"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("main-estimate: pass"));
    let text = std::fs::read_to_string(tmp.path().join("main-estimate.json")).unwrap();
    let rep = nevlab::harness::CheckReport::from_json(&text).unwrap();
    assert_eq!(rep.to_json(), text);
    assert!(tmp.path().join("main-estimate.tsv").exists());
}

#[test]
fn verify_weierstrass_example_near_four_thirds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(&["verify", "weierstrass-example", "--n", "1", "--out", "r"], tmp.path());
    assert_eq!(code(&o), 0);
    let rep = report(&tmp.path().join("r"), "weierstrass-example");
    let pi_hat = rep["fitted"]["sum_Pi_hat"].as_f64().unwrap();
    assert!((pi_hat - 4.0 / 3.0).abs() < 0.05);
}

#[test]
fn verify_elementary_bounds_passes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&nevlab(&["verify", "elementary-bounds"], tmp.path())), 0);
}

#[test]
fn suite_single_tag_and_unknown_tag() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nevlab(
        &["--workers", "2", "suite", "--only", "jensen", "--out", "s"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let dir = tmp.path().join("s");
    let idx =
        nevlab::harness::SuiteIndex::from_json(&std::fs::read_to_string(dir.join("index.json")).unwrap()).unwrap();
    assert!(idx.all_matched);
    assert_eq!(idx.runs.len(), 1);
    assert!(dir.join("jensen.json").exists());
    assert_eq!(code(&nevlab(&["suite", "--only", "astrology"], tmp.path())), 3);
}
