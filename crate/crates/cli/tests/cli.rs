use std::path::Path;
use std::process::{Command, Output};

fn pfzeros(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfzeros")).arg("--out").arg(dir).args(args).output().expect("binary runs")
}

fn body(dir: &Path, name: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').filter_map(|f| f.parse().ok()).collect())
        .collect()
}

fn header(dir: &Path, name: &str, key: &str) -> Option<String> {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("# {key} = ")).map(str::to_string))
}

#[test]
fn ising_analytic_zeros_lie_on_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = pfzeros(dir.path(), &["zeros", "--model", "ising", "--n", "100", "--beta", "1", "--method", "analytic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(dir.path(), "zeros.csv");
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert!((r[0].hypot(r[1]) - 1.0).abs() < 1e-10);
    }
    assert_eq!(header(dir.path(), "zeros.csv", "n").as_deref(), Some("100"));
    assert_eq!(header(dir.path(), "zeros.csv", "command").as_deref(), Some("zeros"));
    assert!(header(dir.path(), "zeros.csv", "version").is_some());
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n = \"four\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pfzeros")).arg("--config").arg(&bad).arg("--out").arg(dir.path()).arg("zeros").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(pfzeros(dir.path(), &["zeros", "--model", "heisenberg"]).status.code(), Some(2));
    assert_eq!(pfzeros(dir.path(), &["zeros", "--model", "xxz", "--n", "3", "--method", "analytic"]).status.code(), Some(2));
    assert_eq!(pfzeros(dir.path(), &["sweep", "--noise", "oops"]).status.code(), Some(2));
    assert_eq!(pfzeros(dir.path(), &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "beta = 2.0\n[zeros]\nn = 6\nmodel = \"ising\"\nmethod = \"analytic\"\n").unwrap();
    let run = |extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pfzeros"));
        cmd.arg("--config").arg(&cfg).arg("--out").arg(dir.path()).arg("zeros").args(extra);
        assert!(cmd.output().unwrap().status.success());
    };
    run(&[]);
    assert_eq!(body(dir.path(), "zeros.csv").len(), 6);
    assert_eq!(header(dir.path(), "zeros.csv", "beta").as_deref(), Some("2"));
    run(&["--n", "4"]);
    assert_eq!(body(dir.path(), "zeros.csv").len(), 4);
}

#[test]
fn xy_fisher_minima_sit_on_the_imaginary_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = pfzeros(
        dir.path(),
        &["fisher", "--model", "xy-jw", "--n", "4", "--j", "1", "--br-min", "-0.5", "--br-max", "0.5", "--br-points", "11", "--bi-points", "31"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let minima = body(dir.path(), "fisher_minima.csv");
    assert!(!minima.is_empty());
    assert!(minima.iter().all(|r| r[0].abs() <= 0.1 + 1e-12), "{minima:?}");
    assert!(dir.path().join("fisher_grid.csv").exists());
    assert!(!body(dir.path(), "fisher_analytic.csv").is_empty());
}

#[test]
fn reconstruction_tracks_exact_free_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = pfzeros(dir.path(), &["reconstruct", "--source", "analytic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(dir.path(), "reconstruct_free_energy.csv");
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(((r[2] - r[1]) / r[1]).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn zeros_file_round_trips_through_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pfzeros(dir.path(), &["zeros", "--j", "1.2", "--method", "polynomial"]).status.success());
    let zeros = dir.path().join("zeros.csv");
    let out = pfzeros(dir.path(), &["reconstruct", "--j", "1.2", "--zeros", zeros.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(dir.path(), "reconstruct_free_energy.csv");
    assert_eq!(rows.len(), 1);
    assert!(((rows[0][2] - rows[0][1]) / rows[0][1]).abs() < 1e-6, "{rows:?}");
}

#[test]
fn infinite_temperature_tfd_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = pfzeros(dir.path(), &["tfd-optimize", "--beta", "0", "--restarts", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fidelity: f64 = header(dir.path(), "tfd_angles.csv", "fidelity").unwrap().parse().unwrap();
    assert!(fidelity > 1.0 - 1e-6);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tfd_optimization.json")).unwrap()).unwrap();
    assert!(json["data"]["fidelity"].as_f64().unwrap() > 1.0 - 1e-6);
    assert_eq!(body(dir.path(), "tfd_angles.csv")[0].len(), 9);
}

#[test]
fn shot_sweeps_are_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--mode", "shots", "--shots", "200", "--points", "9", "--seed", "11"];
    assert!(pfzeros(a.path(), &args).status.success());
    assert!(pfzeros(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read_to_string(d.join("sweep_trace.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(header(a.path(), "sweep_trace.csv", "seed").as_deref(), Some("11"));
    let c = tempfile::tempdir().unwrap();
    assert!(pfzeros(c.path(), &["sweep", "--mode", "shots", "--shots", "200", "--points", "9", "--seed", "12"]).status.success());
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn noise_fit_recovers_swept_parameters() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pfzeros(dir.path(), &["sweep", "--prep", "reference", "--noise", "1.1,0.04"]).status.success());
    let trace = dir.path().join("sweep_trace.csv");
    let out = pfzeros(dir.path(), &["noise-fit", "--observed", trace.to_str().unwrap(), "--fit-restarts", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a: f64 = header(dir.path(), "noise_fit_trace.csv", "a").unwrap().parse().unwrap();
    let b: f64 = header(dir.path(), "noise_fit_trace.csv", "b").unwrap().parse().unwrap();
    assert!((a - 1.1).abs() < 0.01 && (b - 0.04).abs() < 0.01, "({a}, {b})");
}

#[test]
fn json_flag_writes_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pfzeros(dir.path(), &["--json", "zeros", "--method", "polynomial"]).status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("zeros.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["command"], "zeros");
}
