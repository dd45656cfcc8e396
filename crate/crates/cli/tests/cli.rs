use std::path::Path;
use std::process::{Command, Output};

fn frns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frns")).args(args).output().expect("run frns")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "grid.points = 64\ngrid.half_length = 8\nsolver.restarts = 1\n";

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    for name in ["default.conf", "double_well.conf", "one_d.conf"] {
        let o = frns(&["validate", "--config", &format!("{shipped}/{name}")]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let unknown = write(dir.path(), "unknown.conf", "frac.S = 0.5\n");
    assert_eq!(code(&frns(&["validate", "--config", &unknown])), 3);
    let repeated = write(dir.path(), "repeated.conf", "frac.s = 0.5\nfrac.s = 0.4\n");
    assert_eq!(code(&frns(&["validate", "--config", &repeated])), 3);
    let garbage = write(dir.path(), "garbage.conf", "grid.points = many\n");
    assert_eq!(code(&frns(&["validate", "--config", &garbage])), 3);

    let v1 = write(dir.path(), "v1.conf", "potential.V1 = 1.2\n");
    let o = frns(&["validate", "--config", &v1]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("V1"));
    let kappa = write(dir.path(), "kappa.conf", "pen.kappa = 1\n");
    assert_eq!(code(&frns(&["validate", "--config", &kappa])), 2);

    assert_eq!(code(&frns(&["validate", "--no-such-flag"])), 3);
    assert_eq!(code(&frns(&["--help"])), 0);
}

#[test]
fn kernels_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let o = frns(&["kernels", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("kernels.csv").exists());
    assert!(out.join("manifest.txt").exists());
    let o = frns(&["kernels", "--corrupt-sigma", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.conf", SMALL);
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = frns(&["solve", "--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["solution.csv", "diagnostics.csv", "manifest.txt"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let head = std::fs::read_to_string(a.join("solution.csv")).unwrap();
    assert!(head.starts_with("# config_sha256="));
    assert!(head.lines().next().unwrap().contains("seed=5"));
}

#[test]
fn solve_rejects_eps_list() {
    assert_eq!(code(&frns(&["solve", "--eps", "0.5,0.25"])), 3);
}

#[test]
fn sstar_outside_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = frns(&["sstar", "--dim", "1", "--order", "0.6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_needs_three_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.conf", SMALL);
    let out = dir.path().join("s");
    let o = frns(&["sweep", "--config", &cfg, "--eps", "0.5,0.25", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = frns(&["sweep", "--config", &cfg, "--eps", "0.25,0.5,0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}
