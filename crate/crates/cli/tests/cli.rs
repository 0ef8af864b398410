use std::path::Path;
use std::process::{Command, Output};

use spe_core::io::{read_table, RunManifest};

const SMALL: &[&str] = &["--gamma", "0.5", "--epsilon", "0.05", "--t-final", "0.2", "--x-min", "0", "--x-max", "12", "--n-cells", "128", "--width", "0.5"];

fn spe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spe")).args(args).env_remove("SPE_THREADS").output().unwrap()
}

fn with_small<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(SMALL).chain(tail).copied().collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_verifiable_and_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = spe(&with_small(&["solve"], &["--snapshot-every", "10", "--svg", "--out", d.to_str().unwrap()]));
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let m = RunManifest::read(&a.join("manifest.json")).unwrap();
    m.verify(&a).unwrap();
    assert_eq!(m.command, "solve");
    assert_eq!(m.config["solve"]["gamma"], 0.5);
    for name in ["snapshots.csv", "diagnostics.csv", "trace.csv"] {
        assert!(m.outputs.iter().any(|o| o.path == Path::new(name)), "{name} missing from manifest");
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let svg = std::fs::read_to_string(a.join("profile.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small run\ngamma = 0.5\nepsilon = 0.05\nt_final = 0.2\nx_min = 0\nx_max = 12\nn_cells = 128\nwidth = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = spe(&["solve", "-c", cfg.to_str().unwrap(), "--gamma", "0.25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(m.config["solve"]["gamma"], 0.25);
    assert_eq!(m.config["solve"]["eps"], 0.05);
    assert!(m.input_checksum.is_some());
}

#[test]
fn negative_viscosity_is_a_config_error() {
    let o = spe(&["solve", "--gamma", "0.5", "--epsilon", "-1", "--t-final", "1", "--x-min", "0", "--x-max", "10", "--n-cells", "64"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon must be ≥ 0"), "{}", stderr(&o));
}

#[test]
fn missing_keys_are_reported() {
    let o = spe(&["solve", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing required keys"), "{}", stderr(&o));
}

#[test]
fn audit_without_source_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("audit");
    let args = ["audit", "--gamma", "0", "--epsilon", "0.05", "--t-final", "0.3", "--x-min", "0", "--x-max", "12"];
    let o = spe(&[&args[..], &["--n-cells", "128", "--width", "0.5", "--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("audit: PASS"));
    let table = std::fs::read_to_string(out.join("audit.csv")).unwrap();
    assert!(table.lines().skip(1).all(|l| !l.contains("fail")), "{table}");
    assert!(table.contains("l2-energy"));
    RunManifest::read(&out.join("manifest.json")).unwrap().verify(&out).unwrap();
}

#[test]
fn sweep_refine_and_stability_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = spe(&with_small(&["sweep-eps"], &["--eps", "0.1,0.03,0.01", "--svg", "--out", out]));
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("eps_sweep.csv")).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!(dir.path().join("eps_sweep.svg").exists());

    let o = spe(&with_small(&["refine"], &["--cells", "64,128,256", "--out", out]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_table(&dir.path().join("refine.csv")).unwrap().rows.len(), 3);

    let o = spe(&with_small(&["stability"], &["--radius", "8", "--out", out]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("C"));
    let t = read_table(&dir.path().join("stability.csv")).unwrap();
    assert_eq!(t.header, vec!["t", "distance_l1", "quotient"]);
}

#[test]
fn ascending_viscosities_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = spe(&with_small(&["sweep-eps"], &["--eps", "0.01,0.1,0.2", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_renders_each_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = spe(&with_small(&["solve"], &["--snapshot-every", "1000", "--out", out.to_str().unwrap()]));
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = dir.path().join("u.svg");
    let o = spe(&["plot", out.join("snapshots.csv").to_str().unwrap(), "-o", svg.to_str().unwrap(), "--y", "u,P"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = std::fs::read_to_string(&svg).unwrap();
    assert!(doc.matches("<polyline").count() >= 2);
}

#[test]
fn invalid_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spe"))
        .args(with_small(&["refine"], &["--cells", "64,128,256", "--out", dir.path().to_str().unwrap()]))
        .env("SPE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SPE_THREADS"), "{}", stderr(&o));
}

#[test]
fn single_thread_sweep_matches_default_pool() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |d: &Path| with_small(&["sweep-eps"], &["--eps", "0.1,0.03,0.01", "--out", d.to_str().unwrap()]).iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert!(spe(&args(&a).iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_spe")).args(args(&b)).env("SPE_THREADS", "1").output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(a.join("eps_sweep.csv")).unwrap(), std::fs::read(b.join("eps_sweep.csv")).unwrap());
}
