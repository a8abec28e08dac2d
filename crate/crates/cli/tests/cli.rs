use std::path::Path;
use std::process::{Command, Output};

fn adiabat(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiabat"))
        .args(args)
        .env("ADIABAT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{"model": "holonomy", "gamma_list": [0.1, 0], "T_list": [5], "dt": 0.05, "checkpoints": 4}"#;

#[test]
fn small_config_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = adiabat(&["run", "--config", &config, "--out", out.to_str().unwrap()], "1");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert!(lines[0].starts_with("# generated "));
    assert!(lines[1].starts_with("model,gamma,T,dt,elem11_exact"));
    assert_eq!(lines.len(), 4);
    // rows sorted by Γ
    assert!(lines[2].starts_with("holonomy,0,"));
    let trajectory = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    // header, stamp, 2 points × 2 evolutions × 5 checkpoints
    assert_eq!(trajectory.lines().count(), 2 + 20);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS complete positivity")));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn random_model_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"model": "random_rotating", "gamma_list": [0.01], "T_list": [4], "dt": 0.1, "seed": 3, "dim": 3}"#,
    );
    let out = dir.path().join("out");
    let o = adiabat(&["run", "--config", &config, "--out", out.to_str().unwrap()], "1");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.lines().nth(2).unwrap().starts_with("random_rotating,"));
}

#[test]
fn unknown_field_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"model": "holonomy", "gamma_list": [0], "T_list": [5], "gama": 1}"#);
    let o = adiabat(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));
}

#[test]
fn bad_invocations_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(adiabat(&["run", "--preset", "fig-nothing"], "1").status.code(), Some(2));
    assert_eq!(adiabat(&["run"], "1").status.code(), Some(2));
    let config = write_config(dir.path(), SMALL);
    assert_eq!(adiabat(&["run", "--config", &config, "--dt", "2"], "1").status.code(), Some(2));
    assert_eq!(adiabat(&["run", "--config", &config], "zero").status.code(), Some(2));
}

#[test]
fn output_is_reproducible_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let out = dir.path().join(name);
        let o = adiabat(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--no-timestamp"], threads);
        assert!(o.status.success());
        let sweep = std::fs::read(out.join("sweep.csv")).unwrap();
        let trajectory = std::fs::read(out.join("trajectory.csv")).unwrap();
        outputs.push((sweep, trajectory));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert!(!String::from_utf8_lossy(&outputs[0].0).starts_with('#'));
}
