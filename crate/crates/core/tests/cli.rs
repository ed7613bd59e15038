use std::fs;
use std::process::{Command, Output};

fn rpz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpz"))
        .args(args)
        .env_remove("RPZ_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let o = rpz(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for s in [
        "phase",
        "sample",
        "zeros",
        "intensity",
        "si-fraction",
        "crossover",
        "haar",
        "experiment",
        "fig1",
        "fig2",
        "fig3",
        "replay",
    ] {
        assert!(text.contains(s), "missing {s}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(rpz(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        rpz(&["phase", "--profile", "alpha=x", "--n", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        rpz(&["phase", "--profile", "alpha=0", "--n", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        rpz(&["zeros", "--profile", "alpha=0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        rpz(&["experiment", "run", "/nonexistent/config.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        rpz(&[
            "--threads",
            "0",
            "phase",
            "--profile",
            "alpha=0",
            "--n",
            "10"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn phase_row_for_strong_crystalline() {
    let o = rpz(&[
        "phase",
        "--profile",
        "alpha=-2,slow=const:1,sigma=1",
        "--n",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().rsplit(',').collect();
    // Columns from the right: a_n, c_n, 2n log r_n, r_n, phase.
    assert_eq!(row[4], "StrongCrystalline");
    assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
    let r: f64 = row[3].parse().unwrap();
    assert!(r > 1.0 && r < 1.02, "{r}");
}

#[test]
fn seed_env_and_flag_agree() {
    let a = rpz(&["--seed", "9", "sample", "--profile", "alpha=0", "--n", "5"]);
    let b = Command::new(env!("CARGO_BIN_EXE_rpz"))
        .args(["sample", "--profile", "alpha=0", "--n", "5"])
        .env("RPZ_SEED", "9")
        .output()
        .unwrap();
    let c = rpz(&["--seed", "10", "sample", "--profile", "alpha=0", "--n", "5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).lines().count(), 7);
}

#[test]
fn manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zeros");
    let o = rpz(&[
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
        "zeros",
        "--profile",
        "alpha=-1",
        "--n",
        "60",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(out.join("zeros.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
    let manifest = out.join("manifest.json");
    let r = rpz(&["replay", manifest.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("byte-identical"));

    // A tampered hash is reported as a mismatch.
    let text = fs::read_to_string(&manifest).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["outputs"]["zeros.csv"] = serde_json::Value::String("00".into());
    fs::write(&manifest, v.to_string()).unwrap();
    assert_eq!(
        rpz(&["replay", manifest.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn experiment_run_and_replay_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"kind":"AnnulusCount","profile":"alpha=0","law":"icn:1","n":100,"trials":12,"master_seed":3,"s1":-1,"s2":1}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = rpz(&[
        "--threads",
        "3",
        "--out",
        out.to_str().unwrap(),
        "experiment",
        "run",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "records.csv",
        "summary.json",
        "config.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 12);
    let r = rpz(&[
        "--threads",
        "1",
        "replay",
        out.join("manifest.json").to_str().unwrap(),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind":"AnnulusCount","profile":"alpha=0","law":"icn:1","trials":5,"master_seed":1,"extra":1}"#).unwrap();
    assert_eq!(
        rpz(&["experiment", "run", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn crossover_accepts_sum_literals() {
    let o = rpz(&["crossover", "--alphas=-0.4,-0.5+1e-9", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("s,rho1_alpha_-0.4,rho1_alpha_-0.499999999,sech2_target"));
    assert!(text.contains("alpha,shift,sup_error"));
}

#[test]
fn fig2_rows_lie_in_window() {
    let o = rpz(&[
        "fig2",
        "--alpha=-3",
        "--n",
        "200",
        "--realizations",
        "2",
        "--window",
        "0.9,1.1,-0.2,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((0.9..=1.1).contains(&f[1]) && (-0.2..=0.2).contains(&f[2]));
        assert!(f[3] > 1.0);
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn si_fraction_table() {
    let o = rpz(&["si-fraction", "--profile", "alpha=0", "--m", "10000"]);
    let text = stdout(&o);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|x| x.parse().unwrap())
        .collect();
    let exact = row[5];
    assert!((exact * 3f64.sqrt() - 1.0).abs() < 0.05, "{exact}");
}
