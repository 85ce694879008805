//! End-to-end checks of the command-line contract: flags, exit codes,
//! report plumbing, and the defaults file.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gssf-lab"))
}

fn scratch(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("gssf-lab-cli-{}-{name}", std::process::id()));
    p
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn spaces_list_prints_the_catalog() {
    let out = bin().args(["spaces", "list"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "cosymplectic-flat-3",
        "kenmotsu-h3",
        "kenmotsu-h5",
        "sasakian-r3",
        "sasakian-r5",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn exit_codes_follow_the_verdict() {
    let out_file = scratch("pass.json");
    let out = bin()
        .args([
            "theorem",
            "--id",
            "T-QSsigma",
            "--space",
            "sasakian-r5",
            "--synthetic",
            "--mode",
            "identity",
            "--samples",
            "3",
            "--out",
        ])
        .arg(&out_file)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);

    let out = bin()
        .args(["validate", "--space", "kenmotsu-h3", "--samples", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);

    let out_file = scratch("inconclusive.json");
    let out = bin()
        .args([
            "theorem",
            "--id",
            "T-QgCsigma",
            "--space",
            "kenmotsu-h5",
            "--embedding",
            "h3-in-h5-kenmotsu",
            "--samples",
            "3",
            "--out",
        ])
        .arg(&out_file)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = bin()
        .args(["theorem", "--id", "T-QSsigma", "--space", "sasakian-r5"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "missing --out must be a usage error");

    let out = bin()
        .args(["validate", "--space", "does-not-exist"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown model space"), "{err}");

    let out = bin()
        .args([
            "theorem",
            "--id",
            "T-QSsigma",
            "--space",
            "sasakian-r5",
            "--embedding",
            "r3-in-r5-sasakian",
            "--synthetic",
            "--out",
            "x.json",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "--embedding and --synthetic must conflict");
}

#[test]
fn stdout_carries_the_report_when_out_is_omitted() {
    let out = bin()
        .args(["validate", "--space", "sasakian-r3", "--samples", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tool_version"], "0.1.0");
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["scenario"]["space"], "sasakian-r3");
    assert!(report["results"].as_array().map(|a| !a.is_empty()).unwrap_or(false));
}

#[test]
fn config_file_sets_defaults_and_rejects_unknown_keys() {
    let cfg = scratch("cfg.txt");
    std::fs::write(
        &cfg,
        "# defaults\nsamples = 4\ntol.identity = 1e-5\nbox.sasakian-r5 = -0.2:0.2, -0.2:0.2, -0.2:0.2, -0.2:0.2, -0.2:0.2\n",
    )
    .unwrap();
    let report_path = scratch("cfg-run.json");
    let out = bin()
        .args([
            "theorem",
            "--id",
            "T-pseudo",
            "--space",
            "sasakian-r5",
            "--synthetic",
            "--mode",
            "identity",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(report["scenario"]["samples"], 4);
    let tol: f64 = report["scenario"]["tol"].as_str().unwrap().parse().unwrap();
    assert!((tol - 1e-5).abs() < 1e-20);
    for row in report["results"].as_array().unwrap() {
        for c in row["worst_point"].as_array().unwrap() {
            let v: f64 = c.as_str().unwrap().parse().unwrap();
            assert!(v.abs() <= 0.2, "box override ignored: {v}");
        }
    }

    let bad = scratch("bad.txt");
    std::fs::write(&bad, "mystery = 7\n").unwrap();
    let out = bin()
        .args(["validate", "--space", "sasakian-r3", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let a = scratch("det-a.json");
    let b = scratch("det-b.json");
    for path in [&a, &b] {
        let out = bin()
            .args([
                "theorem",
                "--id",
                "T-QgRsigma",
                "--space",
                "sasakian-r5",
                "--synthetic",
                "--mode",
                "identity",
                "--samples",
                "4",
                "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
