//! End-to-end checks of the binary: output shapes, determinism, exit codes,
//! and the config-file path.

use std::process::Command;

fn entlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entlab"))
}

#[test]
fn sweep_csv_shape() {
    let out = entlab()
        .args([
            "sweep",
            "--state",
            "ghz:4",
            "--channel",
            "d",
            "--measure",
            "negativity",
            "--partition",
            "2:2",
            "--grid",
            "0:1:101",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102); // header + 101 rows
    assert_eq!(lines[0], "p,value");
    assert!(!text.contains('\r'));
    assert!(!text.contains(','.to_string().repeat(2).as_str()));
}

#[test]
fn deterministic_output_files() {
    // identical seeds give byte-identical files regardless of worker count
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = entlab()
            .env("ENTLAB_THREADS", threads)
            .args([
                "haar-stats",
                "--n",
                "3",
                "--channel",
                "pd",
                "--p",
                "0.2",
                "--samples",
                "300",
                "--seed",
                "7",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn timelaw_report_matches_closed_form() {
    let out = entlab()
        .args(["timelaw", "--law", "ad", "--n", "3", "--alpha", "0.5", "--beta", "0.8660"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let closed = v["closed_form"].as_f64().unwrap();
    assert!((closed - 0.6934).abs() < 5e-4);
    assert!(v["pass"].as_bool().unwrap());
}

#[test]
fn window_subcommand_reports_depolarizing_window() {
    let out = entlab().args(["window", "--state", "ghz:4", "--channel", "d"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let w = v["window"].as_array().expect("window expected");
    assert!(w[0].as_f64().unwrap() < w[1].as_f64().unwrap());

    let out = entlab().args(["window", "--state", "ghz:4", "--channel", "pd"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["window"].is_null());
}

#[test]
fn exit_codes() {
    // unknown subcommand: clap argument error
    let out = entlab().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // bad state spec
    let out = entlab()
        .args(["sweep", "--state", "nope:4", "--channel", "d", "--measure", "negativity"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // out-of-range parameter
    let out = entlab().args(["criteria", "--state", "werner:1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_path = dir.path().join("sweep.csv");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "command": "sweep",
            "state": "ghz:3",
            "channel": "pd",
            "measure": "negativity",
            "partition": "1:rest",
            "grid": "0:1:11",
            "out": out_path.to_str().unwrap(),
        })
        .to_string(),
    )
    .unwrap();
    let out = entlab().args(["--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn graph_json_input() {
    let dir = tempfile::tempdir().unwrap();
    let gpath = dir.path().join("g.json");
    std::fs::write(&gpath, r#"{"n": 3, "edges": [[0,1],[1,2]]}"#).unwrap();
    let out = entlab()
        .args([
            "graph-ent",
            "--graph",
            &format!("graph:{}", gpath.display()),
            "--channel",
            "pd",
            "--cut",
            "0",
            "--measure",
            "negativity",
            "--grid",
            "0:0.5:3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("p,exact,traced_bound,partition\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn verify_flag_reports_pass() {
    let out = entlab()
        .args([
            "sweep",
            "--state",
            "ghz:2",
            "--channel",
            "ad",
            "--measure",
            "concurrence",
            "--grid",
            "0:1:5",
            "--verify",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("verify:") && err.contains("PASS"), "{err}");
}

#[test]
fn cv_check_closed_forms() {
    let out = entlab().args(["cv-check", "--r", "1.0", "--verify"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pt = v["pt_symplectic"].as_array().unwrap();
    let min = pt.last().unwrap().as_f64().unwrap();
    assert!((min - (-2.0f64).exp()).abs() < 1e-8);
}
