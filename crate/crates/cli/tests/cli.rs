use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lfc-scc"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_cmd(args: &[&str], cfg: &str, out: &std::path::Path) -> Output {
    bin()
        .arg("run")
        .arg(config(cfg))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn run_load_step_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_cmd(&[], "load_step", dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.contains("scc_active_time      0.000 s"), "{text}");
    assert!(text.contains("trips                none"));
    let settle: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("settling_time"))
        .and_then(|v| v.trim().strip_suffix(" s"))
        .and_then(|v| v.parse().ok())
        .expect("settling time printed");
    assert!(settle < 30.0);
    assert!(dir.path().join("trace.csv").is_file());
    let summary = std::fs::read_to_string(dir.path().join("summary.toml")).unwrap();
    assert!(summary.contains("scc_active_time = 0.0"));
}

#[test]
fn fail_on_trip_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tripped = run_cmd(&["--fail-on-trip"], "rocof_attack_noscc", dir.path());
    assert_eq!(tripped.status.code(), Some(1));
    assert!(stdout(&tripped).contains("ROCOF@"));

    let protected = run_cmd(&["--fail-on-trip"], "rocof_attack_scc20", dir.path());
    assert_eq!(protected.status.code(), Some(0));

    // Same attack with the filter switched off from the command line.
    let unprotected = run_cmd(
        &["--fail-on-trip", "--no-scc"],
        "rocof_attack_scc20",
        dir.path(),
    );
    assert_eq!(unprotected.status.code(), Some(1));

    let no_flag = run_cmd(&[], "rocof_attack_noscc", dir.path());
    assert_eq!(no_flag.status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "dt = 0.001\n").unwrap();
    let o = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duration"));

    let missing = bin()
        .arg("run")
        .arg(dir.path().join("nope.toml"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let o = run_cmd(&["--alpha", "-1"], "load_step", dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn sweep_alpha_orders_peaks() {
    let o = bin()
        .arg("sweep-alpha")
        .arg(config("rocof_attack_scc20"))
        .args(["--alphas", "3,20"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert_eq!(rows[0][0], 3.0);
    assert_eq!(rows[1][0], 20.0);
    assert!(rows[0][1] <= rows[1][1]);
    assert!(rows.iter().all(|r| r[4] == 0.0));
}

#[test]
fn calibrate_writes_loadable_configs() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("calibrate-attack")
        .arg(config("of_bias_attack"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("trip amplitude"));
    for name in ["strong.toml", "weak.toml"] {
        let cfg = lfc_scc::scenario::load_config(dir.path().join(name)).unwrap();
        assert!(cfg.attack.amplitude > 0.0);
    }
}

#[test]
fn plot_emits_svgs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = lfc_scc::scenario::load_config(config("rocof_attack_scc20")).unwrap();
    cfg.duration = 5.0;
    let short = dir.path().join("short.toml");
    std::fs::write(&short, cfg.to_toml_string()).unwrap();
    let o = bin()
        .arg("run")
        .arg(&short)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));

    let o = bin()
        .arg("plot")
        .arg(dir.path().join("trace.csv"))
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for name in ["rocof.svg", "frequency.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("control signal"));
    }
}

#[test]
fn help_lists_flags() {
    let o = bin().args(["run", "--help"]).output().unwrap();
    let text = stdout(&o);
    for flag in ["--out", "--no-scc", "--alpha", "--seed", "--fail-on-trip"] {
        assert!(text.contains(flag), "{flag}");
    }
    let o = bin().arg("--help").output().unwrap();
    let text = stdout(&o);
    for cmd in ["run", "sweep-alpha", "calibrate-attack", "plot"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
