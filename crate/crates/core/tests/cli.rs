use std::path::Path;
use std::process::{Command, Output};

fn gyro(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyro"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gyro(dir.path(), &["--help"])), 0);
    assert_eq!(code(&gyro(dir.path(), &["--version"])), 0);
    assert_eq!(code(&gyro(dir.path(), &["trajectory", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec![],
        vec!["spin_echo"],
        vec!["trajectory", "--bogus"],
        vec!["trajectory", "--sz", "0.7"],
        vec!["trajectory", "--ell", "0.3"],
        vec!["trajectory", "--n-steps", "20000"],
        vec!["trajectory", "--tau-mode", "explicit"],
        vec!["coherence", "--tolerance", "made_up=1"],
        vec!["chi_norm", "--tau-mode", "explicit", "--tau", "0.2"],
    ] {
        let out = gyro(dir.path(), &args);
        assert_eq!(
            code(&out),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    std::fs::write(dir.path().join("bad.json"), "{\"ell\": \"big\"}").unwrap();
    assert_eq!(
        code(&gyro(dir.path(), &["trajectory", "--config", "bad.json"])),
        1
    );
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&gyro(
            dir.path(),
            &["trajectory", "--config", "missing.json"]
        )),
        3
    );
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = gyro(
        dir.path(),
        &["trajectory", "--n-steps", "2", "--out", "blocker/t.csv"],
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocker"));
}

#[test]
fn failing_audit_exits_two_and_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = gyro(
        dir.path(),
        &[
            "channel_audit",
            "--n-random",
            "2",
            "--tolerance",
            "trace_preservation=0",
            "--out",
            "a.json",
        ],
    );
    assert_eq!(code(&out), 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let failed: Vec<_> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|n| n.starts_with("trace_preservation[")));
    assert!(dir.path().join("a.json.manifest.json").exists());
}

#[test]
fn audits_pass_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for s in ["channel_audit", "povm_audit"] {
        assert_eq!(code(&gyro(dir.path(), &[s, "--n-random", "3"])), 0);
        assert!(dir.path().join(format!("{s}.json")).exists());
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"scenario": "coherence", "ell": 3, "n_steps": 4, "theta0": 1.0, "output_path": "from_file.csv"}"#,
    )
    .unwrap();
    let out = gyro(
        dir.path(),
        &[
            "trajectory",
            "--config",
            "cfg.json",
            "--n_steps",
            "6",
            "--phi0",
            "-0.5",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("from_file.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "step,Lx,Ly,Lz,r,theta,phi_az,purity");
    assert_eq!(lines.len(), 8);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("from_file.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["scenario"], "trajectory");
    assert_eq!(manifest["config"]["n_steps"], 6);
    assert_eq!(manifest["config"]["phi0"], -0.5);
    assert_eq!(manifest["config"]["ell"], 3.0);
}

#[test]
fn fixed_point_rows_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = gyro(
        dir.path(),
        &[
            "trajectory",
            "--theta0",
            "0",
            "--n-steps",
            "20",
            "--out",
            "f.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let bodies: Vec<String> = csv
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.to_string())
        .collect();
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for s in [
        "compare_semiclassical",
        "coherence",
        "chi_norm",
        "purity_scan",
        "povm_audit",
    ] {
        let common = [
            "--ell",
            "4",
            "--n-steps",
            "25",
            "--ell-grid",
            "2,4",
            "--audit-ell-grid",
            "1,2",
            "--n-random",
            "2",
            "--seed",
            "9",
        ];
        let mut files = Vec::new();
        for rep in 0..2 {
            let name = format!("{s}_{rep}.out");
            let mut args = vec![s, "--out", &name];
            args.extend(common);
            assert_eq!(code(&gyro(dir.path(), &args)), 0, "{s}");
            files.push(std::fs::read(dir.path().join(&name)).unwrap());
        }
        assert_eq!(files[0], files[1], "{s}");
    }
}

#[test]
fn compare_semiclassical_columns_and_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gyro(
        dir.path(),
        &[
            "compare_semiclassical",
            "--ell",
            "20",
            "--theta0",
            "2.941592653589793",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "step,Lx,Ly,Lz,r,theta,phi_az,purity,r_leading,theta_leading,r_corrected,theta_corrected"
    );
    assert_eq!(csv.lines().count(), 402);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    let reg = &manifest["summary"]["semiclassical"]["regimes"];
    let t = [&reg["t1"], &reg["t2"], &reg["t3"]].map(|v| v.as_u64().unwrap());
    assert!(t[0] < t[1] && t[1] < t[2]);
}

#[test]
fn density_dump_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = gyro(
        dir.path(),
        &[
            "trajectory",
            "--ell",
            "1.5",
            "--n-steps",
            "3",
            "--dump-density",
            "--out",
            "t.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let bytes = std::fs::read(dir.path().join("t.csv.density.bin")).unwrap();
    assert_eq!(bytes.len(), 4 * 4 * 4 * 16);
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("t.csv.density.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["shape"], serde_json::json!([4, 4, 4]));
    // step 0 is |3/2,3/2> rotated to θ0; its trace is the sum of the diagonal real parts
    let re = |k: usize| f64::from_le_bytes(bytes[16 * k..16 * k + 8].try_into().unwrap());
    let trace: f64 = (0..4).map(|i| re(i * 4 + i)).sum();
    assert!((trace - 1.0).abs() < 1e-12);
}
