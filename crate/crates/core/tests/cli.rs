//! The `x1jacobi` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_x1jacobi"))
        .args(args)
        .output()
        .unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn coeffs_writes_table_and_reproduction_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["coeffs", "--N", "20", "--out", &out_arg(dir.path())]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        header(&dir.path().join("jacobi_coeffs.csv")),
        "n,a_n,b_n,A_n,B_n,C_n"
    );
    let rows = fs::read_to_string(dir.path().join("jacobi_coeffs.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 21);
    let cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["N_values"], serde_json::json!([20]));
    let d: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("darboux.json")).unwrap())
            .unwrap();
    assert_eq!(d["c"], -3.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"alpha": 3, "beta": 1, "N_values": [10, 20], "format": "json"}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "coeffs",
        "--config",
        cfg.to_str().unwrap(),
        "--beta",
        "2",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let echoed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["alpha"], 3.0);
    assert_eq!(echoed["beta"], 2.0);
    let t: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("jacobi_coeffs.json")).unwrap()).unwrap();
    assert_eq!(t["columns"][0], "n");
    assert_eq!(t["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"alpha": 3, "gamma": 1}"#).unwrap();
    let o = run(&[
        "coeffs",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "coeffs",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("X1 admissibility"));
    let o = run(&[
        "coeffs",
        "--alpha",
        "-0.5",
        "--beta",
        "1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = dir.path().join("empty.json");
    fs::write(&cfg, r#"{"N_values": []}"#).unwrap();
    let o = run(&[
        "moments",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let o = run(&[
        "coeffs",
        "--N",
        "5",
        "--out",
        file.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn recurrence_moments_spectrum_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    for cmd in ["recurrence", "moments", "spectrum"] {
        let o = run(&[
            cmd, "--N", "20", "--N", "40", "--kmax", "3", "--lmax", "3", "--out", &d,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let p = dir.path();
    assert_eq!(
        header(&p.join("recurrence.csv")),
        "n,u_m2,u_m1,u_0,u_p1,u_p2,dev_0,dev_1,dev_2,corollaryB_gap"
    );
    assert_eq!(header(&p.join("moments.csv")), "N,k,moment,target,abs_dev");
    assert_eq!(
        header(&p.join("density_N40.csv")),
        "x,mu_N_density,arcsine_density"
    );
    assert_eq!(header(&p.join("spectrum_N20.csv")), "i,z_i,y_i,in_range");
    assert_eq!(
        header(&p.join("spectrum_moments_N40.csv")),
        "l,trace_full,trace_proj,gap,bound"
    );
    assert_eq!(header(&p.join("cdf_N40.csv")), "x,empirical,arcsine");
    let moments = fs::read_to_string(p.join("moments.csv")).unwrap();
    assert_eq!(moments.lines().count(), 1 + 2 * 4);
}

#[test]
fn paths_verify_passes_and_reports_faults() {
    let o = run(&["paths", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("identities hold"));
    let o = run(&["paths", "verify", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("counterexample path"), "{out}");
    let o = run(&["paths", "verify", "--max-length", "40"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&[
            "spectrum",
            "--N",
            "30",
            "--N",
            "60",
            "--out",
            &out_arg(d.path()),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    // config.json echoes the output directory
    for name in names.into_iter().filter(|n| n != "config.json") {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}
