use std::path::Path;
use std::process::{Command, Output};

fn mecmob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mecmob")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[schedule]\nhorizon = 20\n");
    let out = dir.path().join("out");
    let o = mecmob(&["run", "--config", &cfg, "--seed", "4", "--replications", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 2);

    let csv = std::fs::read_to_string(out.join("run_proposed.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.contains("energy_avg") && header.contains("final_window_failure_rate"));
    assert_eq!(csv.lines().count(), 3);
    let frames = std::fs::read_to_string(out.join("run_proposed_frames.csv")).unwrap();
    assert_eq!(frames.lines().count(), 21);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_proposed.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "run");
    assert_eq!(json["config"]["seed"], 4);
    assert_eq!(json["metrics"]["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_and_multiuser_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[schedule]\nhorizon = 6\n");
    let out = dir.path().join("out");
    let o = mecmob(&["bench", "--config", &cfg, "--scheme", "rss", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(out.join("bench_rss.csv").exists() && out.join("bench_rss.json").exists());

    let o = mecmob(&["multiuser", "--config", &cfg, "--users", "3,5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("multiuser_proposed.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("multiuser_proposed_m5_users.csv").exists());
}

#[test]
fn sweep_and_epsmin() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "s.toml",
        "parameter = \"control_v\"\nvalues = [1000.0, 5000.0]\n[base.schedule]\nhorizon = 10\n",
    );
    let out = dir.path().join("out");
    let o = mecmob(&["sweep", "--config", &spec, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep_rows.csv").exists() && out.join("sweep_means.csv").exists());

    let cfg = write(dir.path(), "c.toml", "[schedule]\nhorizon = 10\n");
    let o = mecmob(&["epsmin", "--config", &cfg, "--iterations", "2", "--replications", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("eps_min="));
    assert!(out.join("epsmin_proposed.json").exists());
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write(dir.path(), "bad.toml", "num_bs = 0\n");
    let o = mecmob(&["run", "--config", &bad, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("num_bs"));

    let junk = write(dir.path(), "junk.toml", "this is = = not toml");
    assert_eq!(mecmob(&["run", "--config", &junk]).status.code(), Some(2));

    let unknown = write(dir.path(), "unknown.toml", "turbo = true\n");
    assert_eq!(mecmob(&["run", "--config", &unknown]).status.code(), Some(2));

    assert_eq!(mecmob(&["sweep"]).status.code(), Some(2));
    assert_eq!(mecmob(&["run", "--replications", "0"]).status.code(), Some(2));
    assert_eq!(mecmob(&["bench", "--scheme", "proposed"]).status.code(), Some(2));
    assert_ne!(mecmob(&["run", "--scheme", "teleport"]).status.code(), Some(0));
    assert_ne!(mecmob(&["run", "--config", s(&dir.path().join("missing.toml"))]).status.code(), Some(0));
    assert!(!out.exists());
}
