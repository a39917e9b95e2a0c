//! End-to-end checks of the command-line interface and its exit codes.

use std::path::Path;
use std::process::Command;

const DOUBLE_WELL: &str = r#"
schema_version = 1

[model.diffusion]
potential = "double_well"
sigma = { constant = { value = 1.0 } }

[domain]
a = -1.42
b = 1.42
x0 = 1.0
horizon = 0.25

[sampling]
method = "ucyk"
epsilon = 0.09
batches = 4
samples_per_batch = 250
seed = 99
"#;

fn mane() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mane"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn critical_value_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DOUBLE_WELL);
    let out = mane()
        .args(["critical-value", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("c_H = "), "{text}");
}

#[test]
fn missing_config_is_a_config_error() {
    let out = mane().arg("critical-value").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{DOUBLE_WELL}\nturbo = 1\n"));
    let out = mane()
        .args(["critical-value", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn potential_writes_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DOUBLE_WELL);
    let out = mane()
        .args(["potential", "--c", "0.5", "--y", "1.42", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("S^c(x, y) = "), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("potential_profile.csv")).unwrap();
    assert!(csv.starts_with("z,p_c"));
    assert!(csv.lines().count() > 500);
}

#[test]
fn minmax_reports_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DOUBLE_WELL);
    let out = mane()
        .args(["minmax", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("value = 1.10"), "{text}");
    assert!(text.contains("y_star = 1.42"), "{text}");
}

#[test]
fn simulate_emits_batch_means_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &DOUBLE_WELL.replace("epsilon = 0.09", "epsilon = 0.4"));
    let out = mane()
        .args(["simulate", "--trace", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("estimate.mean = "), "{text}");
    assert!(text.contains("config_hash = "), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("batch_means.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(std::fs::read_to_string(dir.path().join("path_trace.csv"))
        .unwrap()
        .starts_with("t,x,log_weight"));
}

#[test]
fn simulate_degenerate_exits_with_code_4() {
    let text = DOUBLE_WELL
        .replace("a = -1.42", "a = -8.0")
        .replace("b = 1.42", "b = 8.0")
        .replace("epsilon = 0.09", "epsilon = 0.0001")
        .replace("method = \"ucyk\"", "method = \"standard\"");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &text);
    let out = mane()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{out:?}");
}

#[test]
fn duality_check_passes_on_the_double_well() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DOUBLE_WELL);
    let out = mane()
        .args(["duality-check", "--y", "1.42", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pass = true"), "{text}");
    assert!(dir.path().join("duality_residuals.csv").exists());
}

#[test]
fn duality_failure_exits_with_code_3() {
    // A one-step time grid cannot match the Mather action; the report fails
    // and the run signals a numerical failure.
    let text = format!(
        "{DOUBLE_WELL}
[grid]
x_lo = 1.0
x_hi = 1.42
nx = 21
t_hi = 1.0
nt = 4
v_max = 8.0
"
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &text);
    let out = mane()
        .args(["duality-check", "--y", "1.42", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let textout = String::from_utf8_lossy(&out.stdout);
    assert!(textout.contains("pass = false"), "{textout}");
}

#[test]
fn minmax_curve_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DOUBLE_WELL);
    let out = mane()
        .args(["minmax", "--curve", "--curve-points", "40", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("minmax_curve.csv")).unwrap();
    assert!(csv.starts_with("c,objective_a,objective_b"));
    assert!(csv.lines().count() > 30);
}

#[test]
fn table2_desk_scale_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = mane()
        .args(["table2", "--desk-scale", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("table2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("n,T,estimate"));
}

#[test]
fn example_gap_reports_the_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = mane()
        .args(["example-gap", "--desk-scale", "--epsilon", "0.01", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("K = 0.23"), "{text}");
    assert!(text.contains("value = 0.005"), "{text}");
    assert!(text.contains("maxmin = 0.0"), "{text}");
    // symmetric boundaries violate the precondition
    let bad = mane()
        .args(["example-gap", "--a", "-1.0", "--b", "3.0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2), "{bad:?}");
}
