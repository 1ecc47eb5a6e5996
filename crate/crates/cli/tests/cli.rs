use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(cmd: &str, cfg: &str, dir: &Path, extra: &[&str]) -> Output {
    let path = dir.join(format!("{cmd}.cfg"));
    fs::write(&path, cfg).unwrap();
    Command::new(env!("CARGO_BIN_EXE_evodyn"))
        .args([cmd, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join(cmd))
        .args(extra)
        .output()
        .unwrap()
}

fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("{key} missing from report"))
        .parse()
        .unwrap()
}

const CONSTANT: &str = "\
[game]
payoff =
0, -1, 1
1, 0, -1
-1, 1, 0

[protocol]
kind = constant

[run]
N = 2
";

#[test]
fn experiment_reports_two_fifteenths_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("experiment", CONSTANT, tmp.path(), &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(tmp.path().join("experiment/report.txt")).unwrap();
    assert!((value(&report, "tv_predicted_vs_exact") - 2.0 / 15.0).abs() < 1e-6);
    assert!(report.contains("variant_factor: standard"));
    assert!(report.contains("[balance]"));
}

#[test]
fn validate_rejects_asymmetric_table() {
    let cfg = "\
[game]
payoff =
0, 0, 0
0, 0, 0
0, 0, 0

[protocol]
kind = table
rates =
1, 2, 1
1, 1, 1
1, 1, 1
";
    let tmp = tempfile::tempdir().unwrap();
    let out = run("validate", cfg, tmp.path(), &[]);
    assert!(!out.status.success());
    let report = fs::read_to_string(tmp.path().join("validate/report.txt")).unwrap();
    assert_eq!(value(&report, "max_asymmetry"), 1.0);
    assert!(report.contains("symmetric: false"));
}

#[test]
fn mean_dynamic_emits_101_rows() {
    let cfg = format!("{CONSTANT}horizon = 1\ndt = 0.01\n");
    let tmp = tempfile::tempdir().unwrap();
    let out = run("mean-dynamic", &cfg, tmp.path(), &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("mean-dynamic/trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,x_1,x_2,x_3");
    assert_eq!(rows.len(), 102);
    assert!(!csv.contains('\r'));
}

#[test]
fn flags_override_config() {
    let cfg = format!(
        "{}horizon = 1\nseeds = 1\n",
        CONSTANT.replace("N = 2", "N = 3")
    );
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        "predict",
        &cfg,
        tmp.path(),
        &[
            "--variant-factor",
            "paper",
            "--fstar",
            "weighted",
            "--seed-override",
            "7,8",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("# variant_factor: paper"));
    assert!(report.contains("# fstar: weighted"));
    assert!(report.contains("degenerate: true"));
    let sim = run("simulate", &cfg, tmp.path(), &["--seed-override", "7,8"]);
    assert!(sim.status.success());
    assert!(tmp.path().join("simulate/path_seed8.csv").exists());
}

#[test]
fn errors_leave_no_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("simulate", CONSTANT, tmp.path(), &[]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: "), "{err}");
    assert!(!tmp.path().join("simulate").exists());
}

#[test]
fn config_typos_get_hints() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("validate", "[game]\npayof = 1\n", tmp.path(), &[]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("did you mean \"payoff\""), "{err}");
}

#[test]
fn transformed_config_is_runnable() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run("transform", CONSTANT, tmp.path(), &[]).status.success());
    let text = fs::read_to_string(tmp.path().join("transform/transformed.cfg")).unwrap();
    assert!(text.contains("3->2 symmetrize"));
    let out = run("exact-stationary", &text, tmp.path(), &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = format!("{CONSTANT}horizon = 2\nseeds = 5, 6\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run("experiment", &cfg, a.path(), &[]);
    let ob = run("experiment", &cfg, b.path(), &[]);
    assert_eq!(oa.stdout, ob.stdout);
    let mut names: Vec<_> = fs::read_dir(a.path().join("experiment"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 9);
    for n in names {
        let x = fs::read(a.path().join("experiment").join(&n)).unwrap();
        let y = fs::read(b.path().join("experiment").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
}
