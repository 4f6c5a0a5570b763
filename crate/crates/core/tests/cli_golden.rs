use std::fs;
use std::path::Path;
use std::process::Command;

use wbasn_sim::io::METRICS_HEADER;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wbasn-sim"));
    c.env_remove("WBASN_SIM_OUT");
    c
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn single_run_writes_one_csv_with_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--protocol", "mattempt", "--seed", "1", "--rounds", "10", "-q", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("mattempt_seed1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], METRICS_HEADER);
    assert_eq!(lines.len(), 11);
    assert!(!csv.contains('\r'));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["manifest.txt", "mattempt_seed1.csv", "summary.csv"]);
}

#[test]
fn csv_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let ok = bin().args(args).arg("-q").arg("--out").arg(dir.path()).status().unwrap().success();
        assert!(ok);
    };
    run(&["--protocol", "mattempt", "--seed", "1", "--rounds", "20"]);
    run(&["--protocol", "attempt", "--preset", "prototype", "--seed", "2", "--rounds", "20"]);
    assert_eq!(
        fs::read_to_string(dir.path().join("mattempt_seed1.csv")).unwrap(),
        golden("mattempt_seed1_20_rounds.csv")
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("attempt_seed2.csv")).unwrap(),
        golden("prototype_attempt_seed2_20_rounds.csv")
    );
}

#[test]
fn sweep_writes_every_run_plus_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--protocol", "all", "--preset", "paper-simulation", "--seeds", "1..10", "--rounds", "50"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mattempt"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 32);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 30 + 3);
    assert!(summary.lines().any(|l| l.starts_with("attempt,median,")));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("seeds = 1..10"));
    assert!(manifest.contains("protocols = multihop,attempt,mattempt"));
    assert!(manifest.contains("rounds = 50"));
}

#[test]
fn manifest_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(bin()
        .args(["--protocol", "all", "--seeds", "3..4", "--rounds", "300", "-q", "--out"])
        .arg(&a)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .arg("--config")
        .arg(a.join("manifest.txt"))
        .args(["-q", "--out"])
        .arg(&b)
        .status()
        .unwrap()
        .success());
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("WBASN_SIM_OUT", dir.path())
        .args(["--protocol", "multihop", "--rounds", "5", "-q"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("multihop_seed1.csv").exists());
}

#[test]
fn bad_input_exits_nonzero_with_a_diagnostic() {
    let out = bin().args(["--set", "ch_probability=1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ch_probability"));

    let out = bin().args(["--protocol", "leach"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "rounds = 10\nwarp_speed = 9\n").unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_speed"));

    // a file where the output directory should go
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = bin().args(["--rounds", "5", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# short prototype run\npreset = prototype\nrounds = 7\nseed = 3\n").unwrap();
    let out_dir = dir.path().join("out");
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--rounds", "4", "-q", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out_dir.join("mattempt_seed3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("preset = prototype"));
    assert!(manifest.contains("node_count = 11"));
}
