use psi_cli::{run, Outcome, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn psi(args: &[&str]) -> Outcome {
    run(args.iter().copied())
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn density_geo2_matches_golden() {
    let out = psi(&["density", "--set", "geo2", "--psi", "log", "--cutoff", "1e24"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(out.stdout, golden("density_geo2_log.json"));
    let v = json(&out);
    let upper = v["estimate"]["upper"].as_f64().unwrap();
    let lower = v["estimate"]["lower"].as_f64().unwrap();
    assert!((upper - 0.5).abs() < 1e-2 && (lower - 0.5).abs() < 1e-2, "{upper} {lower}");
}

#[test]
fn verify_extremal_powers_matches_golden() {
    let out = psi(&["verify", "--id", "cor4.1", "--zigzag", "1,3", "--params", "a=2,b=2", "--cutoff", "1e100"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(out.stdout, golden("verify_cor41_zigzag.json"));
    let reports = json(&out)["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r["pass"] == Value::Bool(true)));
}

#[test]
fn chain_csv_matches_golden() {
    let out = psi(&["chain", "--set", "accel4", "--psi", "log", "--cutoff", "e^1000", "--csv"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(out.stdout, golden("chain_accel4.csv"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["density", "--set"][..],
        &["density", "--set", "geo2"],
        &["density", "--set", "geo2", "--cutoff", "-5"],
        &["density", "--set", "nonsense", "--cutoff", "1e9"],
        &["density", "--set", "geo2", "--psi", "cubic", "--cutoff", "1e9"],
        &["verify", "--id", "thm9.9", "--zigzag", "1,3", "--cutoff", "1e9"],
        &["verify", "--id", "cor4.1", "--zigzag", "1,3", "--params", "a=2", "--cutoff", "1e9"],
        &["verify", "--id", "cor4.1", "--zigzag", "1,3", "--params", "a=2,b=2,z=1", "--cutoff", "1e9"],
        &["order", "--cutoff", "1e9"],
        &["limit-density", "--fn", "1/t", "--l", "zero", "--cutoff", "1e9"],
        &["frobnicate"],
    ] {
        let out = psi(args);
        assert_eq!(out.code, EXIT_USAGE, "{args:?}: {}", out.stdout);
        assert!(out.stdout.is_empty() && !out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn failing_checks_exit_1() {
    let out = psi(&["verify", "--id", "prop3.2", "--zigzag", "1,3", "--params", "eps=0.5", "--cutoff", "e^1e300"]);
    assert_eq!(out.code, EXIT_FAIL);
    let reports = json(&out)["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 4);
    // Inapplicable statements also exit 1.
    let out = psi(&["verify", "--id", "prop3.2", "--zigzag", "1,3", "--params", "eps=1.5", "--cutoff", "e^1e300"]);
    assert_eq!(out.code, EXIT_FAIL);
    assert_eq!(json(&out)["reports"][0]["applicable"], Value::Bool(false));
}

#[test]
fn limit_density_of_bumps() {
    let out = psi(&["limit-density", "--fn", "bumps", "--l", "0", "--psi", "linear", "--cutoff", "1e4"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["verdict"]["kind"], "psi-density-limit");
    assert_eq!(v["trailing"]["kind"], "no-limit-detected");
}

#[test]
fn infinite_limit_is_written_as_string() {
    let out = psi(&["limit-density", "--fn", "log(t)", "--l", "inf", "--psi", "log", "--cutoff", "e^1e6"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(json(&out)["verdict"]["value"], "inf");
}

#[test]
fn integrability_reports_witness() {
    let out = psi(&[
        "integrability", "--fn", "sin(t)^2/(t*log(t))", "--psi", "log", "--r0", "2", "--rmax", "1e6",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["witness"]["kind"], "divergence-witness");
    assert_eq!(v["usual_limit"]["applicable"], Value::Bool(false));
    let out = psi(&["integrability", "--fn", "1/(t*log(t)^2)", "--psi", "linear", "--r0", "2", "--rmax", "1e8"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(json(&out)["usual_limit"]["kind"], "usual-limit");
}

#[test]
fn order_of_zigzag() {
    let out = psi(&["order", "--zigzag", "1,3", "--cutoff", "e^1e300", "--csv"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("ln_r,ratio\n"));
    let out = psi(&["order", "--fn", "exp(log(t)^2)", "--cutoff", "e^100"]);
    let v = json(&out);
    assert!((v["estimate"]["upper_order"].as_f64().unwrap() - 100.0).abs() < 1e-6, "{v}");
}

#[test]
fn out_writes_file() {
    let dir = std::env::temp_dir().join(format!("psi-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("d.json");
    let out = psi(&["density", "--set", "geo2", "--cutoff", "1e24", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("density_geo2_log.json"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["verify", "--id", "thm3.1", "--zigzag", "1,3", "--params", "eps=0.5", "--cutoff", "e^1e300"];
    let a = psi(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stdout);
    assert_eq!(a, psi(&args));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_psi");
    let ok = std::process::Command::new(bin)
        .args(["density", "--set", "geo2", "--cutoff", "1e24"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), golden("density_geo2_log.json"));
    let bad = std::process::Command::new(bin).args(["density", "--set"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
