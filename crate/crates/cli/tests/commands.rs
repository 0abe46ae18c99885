use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const REQUIRED_META: [&str; 7] = ["units", "g", "kappa_e", "n_max", "captured_norm", "version", "config_hash"];

fn qdl(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qdl"))
        .args(args)
        .current_dir(dir)
        .env("QDL_OUTPUT_DIR", dir)
        .output()
        .expect("spawn qdl");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let lines = data_lines(path);
    let idx = lines[0].split(',').position(|h| h == name).unwrap();
    lines[1..]
        .iter()
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn meta(path: &Path) -> Vec<(String, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| {
            let (k, v) = l[2..].split_once('=').unwrap();
            (k.to_owned(), v.to_owned())
        })
        .collect()
}

#[test]
fn run_config_reproduces_fig1b_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "b.toml", "kappa = 0.01\nmodel.g = 0.5\nstate.c1 = [0.5, 0.0]\n");
    assert_eq!(qdl(dir.path(), &["fig1", "--variant", "b"]).0, 0);
    assert_eq!(qdl(dir.path(), &["run", "--config", cfg.to_str().unwrap()]).0, 0);
    let a = data_lines(&dir.path().join("fig1b.csv"));
    let b = data_lines(&dir.path().join("run.csv"));
    assert!(a.len() > 1000);
    assert_eq!(a, b);
}

#[test]
fn every_output_carries_metadata() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", "kappa = 0.1\nselective.enabled = true\ntime.end = 5.0\n");
    for args in [
        vec!["fig1", "--variant", "a"],
        vec!["fig1", "--variant", "c"],
        vec!["fig2"],
        vec!["fig4"],
        vec!["run", "--config", cfg.to_str().unwrap()],
    ] {
        let (code, _, err) = qdl(dir.path(), &args);
        assert_eq!(code, 0, "{args:?}: {err}");
    }
    for name in ["fig1a.csv", "fig1c.csv", "fig2.csv", "fig2_coefficients.csv", "fig4.csv", "run.csv"] {
        let m = meta(&dir.path().join(name));
        let keys: Vec<&str> = m.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(&keys[..7], &REQUIRED_META, "{name}");
        let hash = &m[6].1;
        assert!(hash.len() == 64 && hash.chars().all(|c| c.is_ascii_hexdigit()), "{name}");
    }
    assert!(meta(&dir.path().join("fig1a.csv")).contains(&("g".into(), "5e-1".into())));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for args in [vec!["fig1", "--variant", "b"], vec!["fig3"], vec!["fig4"]] {
        let mut a = args.clone();
        a.extend(["--out", "first.csv"]);
        let mut b = args.clone();
        b.extend(["--out", "second.csv"]);
        assert_eq!(qdl(dir.path(), &a).0, 0);
        assert_eq!(qdl(dir.path(), &b).0, 0);
        let x = std::fs::read(dir.path().join("first.csv")).unwrap();
        let y = std::fs::read(dir.path().join("second.csv")).unwrap();
        assert!(x == y, "{args:?} differs between runs");
    }
}

#[test]
fn selective_norm_never_increases() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "kappa = 0.01\nselective.enabled = true\nselective.level = 1\ntime.end = 1000.0\ntime.samples = 2001\n",
    );
    assert_eq!(qdl(dir.path(), &["run", "--config", cfg.to_str().unwrap()]).0, 0);
    let norm = column(&dir.path().join("run.csv"), "norm");
    assert_eq!(norm.len(), 2001);
    assert!(norm.windows(2).all(|w| w[1] <= w[0]), "norm column must not increase");
    // Only the E_1 component survives: ‖ψ‖² → |c_1|² = 1/4.
    assert!((norm.last().unwrap() - 0.25).abs() < 1e-3);
}

#[test]
fn oracle_on_fig1b_within_a_tenth_of_a_percent() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "b.toml", "kappa = 0.01\n");
    assert_eq!(qdl(dir.path(), &["run", "--config", cfg.to_str().unwrap(), "--oracle"]).0, 0);
    let m = meta(&dir.path().join("run.csv"));
    let dev: f64 = m
        .iter()
        .find(|(k, _)| k == "oracle_max_rel_deviation")
        .map(|(_, v)| v.parse().unwrap())
        .expect("deviation recorded");
    assert!(dev <= 1e-3, "deviation {dev}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let path = |n: &str| p.join(n).to_str().unwrap().to_owned();
    write(p, "neg.toml", "kappa = -1.0\n");
    write(p, "unknown.toml", "kapa = 1.0\n");
    write(p, "syntax.toml", "kappa = \n");
    write(p, "ok.toml", "time.end = 1.0\n");

    let (code, _, err) = qdl(p, &["run", "--config", &path("neg.toml")]);
    assert_eq!(code, 2);
    assert!(err.contains("kappa"), "{err}");
    assert_eq!(qdl(p, &["run", "--config", &path("unknown.toml")]).0, 2);
    assert_eq!(qdl(p, &["run", "--config", &path("syntax.toml")]).0, 2);
    assert_eq!(qdl(p, &["run", "--config", &path("missing.toml")]).0, 2);
    assert_eq!(qdl(p, &["fig1", "--variant", "d"]).0, 2);
    assert_eq!(qdl(p, &["fig4", "--nmax", "5"]).0, 2);
    // Too few levels for the packet: a numerical failure, not a config error.
    assert_eq!(qdl(p, &["fig2", "--nmax", "6"]).0, 3);
    assert_eq!(qdl(p, &["run", "--config", &path("ok.toml")]).0, 0);
    assert_eq!(qdl(p, &["--help"]).0, 0);
}

#[test]
fn output_location() {
    let dir = TempDir::new().unwrap();
    let (code, stdout, _) = qdl(dir.path(), &["fig2"]);
    assert_eq!(code, 0);
    assert!(dir.path().join("fig2.csv").exists());
    assert!(dir.path().join("fig2_coefficients.csv").exists());
    assert_eq!(stdout.lines().count(), 2);

    let sub = dir.path().join("elsewhere.csv");
    assert_eq!(qdl(dir.path(), &["fig1", "--variant", "a", "--out", sub.to_str().unwrap()]).0, 0);
    assert!(sub.exists());
    assert!(!dir.path().join("fig1a.csv").exists());

    let cfg = write(dir.path(), "o.toml", "output = \"custom.csv\"\ntime.end = 2.0\n");
    assert_eq!(qdl(dir.path(), &["run", "--config", cfg.to_str().unwrap()]).0, 0);
    assert!(dir.path().join("custom.csv").exists());
}
