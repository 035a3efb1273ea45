//! End-to-end behaviour of the `treefv` binary.

use std::process::{Command, Output};

fn treefv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treefv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Payload lines of a CSV or text output, without the `#` manifest.
fn payload(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn variance_at_lambda_one_is_exact() {
    let o = treefv(&["moments", "--formula", "variance", "--lambda", "1"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(payload(&o), vec!["1/30  [exact]"]);
}

#[test]
fn fraction_and_decimal_bindings_agree() {
    let a = treefv(&["moments", "--formula", "variance", "--lambda", "0.5"]);
    let b = treefv(&["moments", "--formula", "psi12", "--lambda", "0.5"]);
    assert_eq!(payload(&a), vec!["1/56  [exact]"]);
    assert_eq!(payload(&b), vec!["2/3  [exact]"]);
}

#[test]
fn formula_list_and_unknown_formula() {
    let o = treefv(&["moments"]);
    assert!(o.status.success());
    assert!(payload(&o).iter().any(|l| l.starts_with("psi12 = 1/(λ+1)")));
    let bad = treefv(&["moments", "--formula", "nonsense"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown formula"));
}

#[test]
fn gen_table_highlights_mismatches() {
    let o = treefv(&["gen-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    // Two unmarked rows, the marked pair row that violates the row-sum law,
    // and the marked equilibrium value.
    assert_eq!(text.matches("MISMATCH").count(), 4, "{text}");
    assert!(text.contains("listed value 1/(λ+ϑ+1)"));
    let json = treefv(&["gen-table", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["manifest"]["config"]["subcommand"], "gen-table");
    assert!(doc["records"].as_array().unwrap().len() > 36);
}

#[test]
fn invalid_parameters_exit_with_status_two() {
    for args in [
        &["verify", "all", "--reps", "0"][..],
        &["sim-coalescent", "--eps", "-1"],
        &["sim-moran", "--N", "1"],
        &["sim-moran", "--t-grid", "2,1"],
        &["sim-moran", "--functional", "nope"],
    ] {
        let o = treefv(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn coalescent_rows_carry_manifest_and_are_reproducible() {
    let args = ["sim-coalescent", "--reps", "100", "--eps", "0.05", "--seed", "7"];
    let a = treefv(&args);
    assert!(a.status.success(), "{a:?}");
    let text = stdout(&a);
    assert!(text.starts_with("# {"));
    assert!(text.contains("\"seed\": 7"));
    let rows = payload(&a);
    assert_eq!(rows.len(), 101, "header plus one row per replicate");
    assert!(rows[0].starts_with("replicate,eps,n_eps"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("[MC ± SE, n=100]"));
    assert_eq!(stdout(&treefv(&args)), text);
    assert_ne!(payload(&treefv(&["sim-coalescent", "--reps", "100", "--eps", "0.05", "--seed", "8"])), rows);
}

#[test]
fn coalescent_depth_and_profile() {
    let tn = treefv(&["sim-coalescent", "--quantity", "tn", "--level", "4", "--reps", "20", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&tn.stdout).unwrap();
    let recs = doc["records"].as_array().unwrap();
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r["t_n"].as_f64().unwrap() > 0.0 && r["n"] == 4));
    assert_eq!(doc["summary"][0]["provenance"], "mc");

    let z = treefv(&["sim-coalescent", "--quantity", "z-profile", "--reps", "3", "--n0", "5000", "--lambda", "50"]);
    assert!(z.status.success(), "{z:?}");
    assert_eq!(payload(&z).len(), 1 + 3 * 2);
}

#[test]
fn moran_output_to_file() {
    let dir = std::env::temp_dir().join(format!("treefv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("moran.json");
    let o = treefv(&[
        "sim-moran",
        "--N",
        "200",
        "--reps",
        "2",
        "--t-grid",
        "0.5,1",
        "--functional",
        "n_eps",
        "--eps",
        "0.05",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(o.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["manifest"]["config"]["params"]["population"], 200);
    assert_eq!(doc["records"].as_array().unwrap().len(), 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn symbolic_suite_reports_known_failure() {
    let o = treefv(&["verify", "symbolic", "--format", "text"]);
    // Criterion 1 fails on two misprinted rows, so the suite exits with 1.
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    let lines = payload(&o);
    assert!(lines.iter().any(|l| l.starts_with("FAIL criterion  1")));
    assert!(lines.iter().any(|l| l.starts_with("PASS criterion  6")));
}
