use std::process::Command;

use discordnet::cli::{run, RunManifest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_discordnet"))
}

fn stdout_of(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("discordnet").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

#[test]
fn gqd_of_the_three_party_w_state() {
    let (code, text) = stdout_of(&["gqd", "--state", "w", "--n", "3"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&text);
    let v: f64 = rows[0][2].parse().unwrap();
    assert!((v - 1.5850).abs() < 1e-3);
}

#[test]
fn protocol_run_reports_the_discord_witness() {
    let (code, text) = stdout_of(&[
        "protocol", "run", "--n", "2", "--theta", "1.5708,0.7854", "--phi", "0,0", "--report", "discord",
    ]);
    assert_eq!(code, 0);
    let row = csv_rows(&text).into_iter().find(|r| &r[3] == "M1|M2").unwrap();
    let d: f64 = row[4].parse().unwrap();
    assert!((d - 0.2018).abs() < 1e-3);
}

#[test]
fn computational_carrier_basis_leaves_no_discord() {
    let (code, text) = stdout_of(&["protocol", "run", "--n", "2", "--theta", "0,1.0"]);
    assert_eq!(code, 0);
    for r in csv_rows(&text) {
        assert!(r[4].parse::<f64>().unwrap().abs() < 1e-9);
    }
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let status = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(status(&["gqd", "--state", "w", "--n", "2"]), Some(0));
    assert_eq!(status(&["frobnicate"]), Some(1));
    assert_eq!(status(&["gqd", "--state", "w", "--colour"]), Some(1));
    assert_eq!(status(&["gqd", "--state", "werner", "--n", "2", "--param", "eps=2"]), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    assert_eq!(status(&["--out", out.to_str().unwrap(), "gqd", "--state", "bell"]), Some(2));
}

#[test]
fn usage_is_printed_for_unknown_subcommands() {
    let o = bin().arg("frobnicate").output().unwrap();
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn outputs_are_reproducible_and_hashed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let code = run(
            ["discordnet", "--seed", "5", "--inner-budget", "fast", "--out", d.path().to_str().unwrap(), "heatmap", "--points", "5"],
            &mut std::io::sink(),
        );
        assert_eq!(code, 0);
    }
    let manifest: RunManifest =
        serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.outputs.len(), 3);
    assert_eq!(manifest.seed, 5);
    for f in &manifest.outputs {
        let bytes = std::fs::read(a.path().join(&f.path)).unwrap();
        assert_eq!(discordnet::cli::emit::sha256_hex(&bytes), f.sha256);
        assert_eq!(bytes, std::fs::read(b.path().join(&f.path)).unwrap());
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 26);
        assert!(text.starts_with("theta1,theta2,value\n"));
    }
}

#[test]
fn json_output_round_trips() {
    let (code, text) = stdout_of(&["--format", "json", "discord", "--state", "rho2"]);
    assert_eq!(code, 0);
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["state"], "rho2");
    let d = rows[0]["value"].as_f64().unwrap();
    assert!((d - 1.0 / 3.0).abs() < 1e-6);
    let again = serde_json::to_string_pretty(&rows).unwrap();
    assert_eq!(again.trim_end(), text.trim_end());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# two-party W state\nstate = w\nn = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, text) = stdout_of(&["--config", cfg, "gqd"]);
    assert_eq!(code, 0);
    assert!((csv_rows(&text)[0][2].parse::<f64>().unwrap() - 1.0).abs() < 1e-3);
    let (code, text) = stdout_of(&["--config", cfg, "gqd", "--n", "3"]);
    assert_eq!(code, 0);
    assert!((csv_rows(&text)[0][2].parse::<f64>().unwrap() - 3f64.log2()).abs() < 1e-3);
    std::fs::write(dir.path().join("bad.cfg"), "state w\n").unwrap();
    let (code, _) = stdout_of(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "gqd"]);
    assert_eq!(code, 1);
}

#[test]
fn thread_count_comes_from_the_environment_first() {
    let o = bin()
        .env("DISCORDNET_THREADS", "zero")
        .args(["--threads", "2", "gqd", "--state", "bell"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin()
        .env("DISCORDNET_THREADS", "1")
        .args(["--threads", "0", "gqd", "--state", "bell"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn every_subcommand_is_wired() {
    let fast = ["--inner-budget", "fast"];
    let cases: &[&[&str]] = &[
        &["appendix1", "--theta-points", "3", "--phi-points", "2"],
        &["fits", "--values", "0.2198,0.4694,0.7040,0.9338"],
        &["robustness", "measurement", "--samples", "3"],
        &["table2", "--n", "2"],
        &["table1", "--n-max", "2"],
    ];
    for args in cases {
        let all: Vec<&str> = fast.iter().chain(args.iter()).copied().collect();
        let (code, text) = stdout_of(&all);
        assert_eq!(code, 0, "{args:?}");
        assert!(!text.is_empty());
    }
    for help in [&["robustness", "carrier", "--help"][..], &["robustness", "memory", "--help"], &["appendix2", "--help"]] {
        assert_eq!(stdout_of(help).0, 0);
    }
}
