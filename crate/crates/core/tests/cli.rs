use std::path::Path;
use std::process::{Command, Output};

use trischmidt::report::{CoefficientDocument, ReductionDocument, SpectrumDocument};
use trischmidt::verify::VerifyReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trischmidt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_quantum_coefficients() {
    let o = run(&["coeffs", "--n", "0,0,1", "--angles", "0,0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: CoefficientDocument = serde_json::from_str(&stdout(&o)).unwrap();
    let one: Vec<_> = doc.entries.iter().filter(|e| e.value != 0.0).collect();
    assert_eq!(one.len(), 1);
    assert_eq!((one[0].k, one[0].l, one[0].m, one[0].value), (0, 0, 1, 1.0));
}

#[test]
fn both_routes_agree() {
    let o = run(&["coeffs", "--n", "1,1,2", "--angles", "0.5236,-0.3,0.7", "--route", "both"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: CoefficientDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc.discrepancy.unwrap() <= 1e-12);
    assert!(doc.fallback_entries.is_some());
}

#[test]
fn csv_coefficients() {
    let o = run(&["coeffs", "--n", "0,1,0", "--angles", "0.1,0.2,0.3", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("k,l,m,value\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn degree_limit_is_reported() {
    let o = run(&["coeffs", "--n", "20,20,20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("40"), "{}", stderr(&o));
}

#[test]
fn malformed_arguments_are_usage_errors() {
    assert_eq!(run(&["coeffs", "--n", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["purity", "--n", "0,0,1", "--bipartition", "D"]).status.code(), Some(2));
    assert_eq!(run(&["surface", "--grid-points", "1"]).status.code(), Some(2));
}

#[test]
fn purity_direct_and_closed() {
    let o = run(&["purity", "--n", "0,0,1", "--angles", "0.7853981633974483,0,0", "--method", "closed"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: SpectrumDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc.purity - 0.5).abs() < 1e-12);
    assert!(doc.difference.unwrap().abs() < 1e-12);
}

#[test]
fn closed_method_needs_single_axis() {
    let o = run(&["purity", "--n", "1,0,1", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("single-axis"));
}

#[test]
fn reduction_example() {
    let o = run(&["reduce", "--n1", "1", "--n2", "0", "--phi", "0.5235987755982988"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: ReductionDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc.lambda[0] - 0.25).abs() < 1e-12);
    assert!((doc.lambda[1] - 0.75).abs() < 1e-12);
    assert!(doc.deviation < 1e-12);
}

#[test]
fn surface_and_verify_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let p = dir.path().join(format!("s{i}.csv"));
            let o = run(&["surface", "--bipartition", "C", "--vphi", "0.785", "--grid-points", "41", "--out", path(&p)]);
            assert!(o.status.success());
            std::fs::read(&p).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].contains(&b'\r'));

    let a = run(&["verify", "--skip", "surface"]);
    let b = run(&["verify", "--skip", "surface"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn skipping_a_stage() {
    let o = run(&["verify", "--skip", "quadrature"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: VerifyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.passed);
    assert_eq!(r.skipped_stages, vec!["quadrature".to_string()]);
    assert!(r.checks.iter().all(|c| c.stage != "quadrature"));
}

#[test]
fn tight_tolerance_fails_with_margins() {
    let o = run(&["verify", "--skip", "quadrature,surface", "--tolerance", "1e-16"]);
    assert_eq!(o.status.code(), Some(1));
    let r: VerifyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!r.passed);
    let failures: Vec<_> = r.failures().collect();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|c| c.margin < 0.0));
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "units = \"dimensionless\"\nskip = [\"quadrature\", \"surface\"]\nseed = 7\nout = \"{}\"\n",
            path(&out)
        ),
    )
    .unwrap();
    let o = run(&["--config", path(&cfg), "verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: VerifyReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.skipped_stages.len(), 2);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(run(&["--config", path(&cfg), "verify"]).status.code(), Some(2));
}
