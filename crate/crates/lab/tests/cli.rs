use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blowup_lab::{preset, Experiment, ExperimentConfig};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowup-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    path.to_string_lossy().into_owned()
}

fn leftovers(dir: &Path) -> Vec<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with('.'))
        .collect()
}

#[test]
fn preset_list_names_every_preset() {
    let o = lab(&["preset-list"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    for n in ["ss-n3-p2q2", "gg-multi-n2-c05", "flat-eigen-n3", "all"] {
        assert!(out.lines().any(|l| l == n), "{n} missing from {out}");
    }
}

#[test]
fn unknown_preset_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    let o = lab(&["preset", "no-such", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("available"));
    assert!(!out.exists());
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(
        &path,
        "[[experiment]]\nkind = \"validate-metric\"\nname = \"v\"\nr_end = 10.0\ncells = 10\ntol = 1.0\n\
         [experiment.metric]\nprofile = \"long_range\"\ndelta = 0.1\n",
    )
    .unwrap();
    let o = lab(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        tmp.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("experiment[0].metric.rho"), "{err}");

    fs::write(&path, "seed = 1\nbogus = 2\n").unwrap();
    let o = lab(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn empty_config_gives_empty_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &ExperimentConfig::default());
    let out = tmp.path().join("b");
    let o = lab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["experiments"].as_array().unwrap().len(), 0);
    assert!(out.join("table.txt").exists());
}

#[test]
fn passing_preset_writes_tables_and_replaces_old_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("stale.txt"), "old").unwrap();
    let o = lab(&[
        "--threads",
        "2",
        "preset",
        "curves-n3-c05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("curves-n3-c05/region.csv").exists());
    assert!(out.join("curves-n3-c05/iterations.csv").exists());
    assert!(!out.join("stale.txt").exists());
    assert!(leftovers(tmp.path()).is_empty());
    let table = fs::read_to_string(out.join("table.txt")).unwrap();
    assert!(table.ends_with("overall: PASS\n"));
}

#[test]
fn failed_assertion_exits_one_but_keeps_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("curves-n3-c05").unwrap();
    let Experiment::CurvesScan(c) = &mut cfg.experiments[0] else {
        panic!()
    };
    c.spots[0].expected += 1e-3;
    c.iterations = None;
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("b");
    let o = lab(&["run", "--config", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let table = fs::read_to_string(out.join("table.txt")).unwrap();
    assert!(table.contains("FAIL"));
}

#[test]
fn runtime_error_leaves_no_partial_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("ss-n3-p2q2").unwrap();
    let Experiment::OdeSweep(s) = &mut cfg.experiments[0] else {
        panic!()
    };
    // far too short to reach the threshold
    s.t_max = 1.0;
    let path = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("b");
    let o = lab(&["run", "--config", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ss-n3-p2q2"));
    assert!(!out.exists());
    assert!(leftovers(tmp.path()).is_empty());
}

#[test]
fn module_subcommand_filters_by_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    let o = lab(&[
        "validate-metric",
        "--preset",
        "all",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dirs: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(dirs, vec!["validate-long-range".to_string()]);

    let o = lab(&["kato", "--preset", "flat-eigen-n3"]);
    assert_eq!(code(&o), 2);
}
