use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mcgl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcgl"))
        .current_dir(dir)
        .args(args)
        .args(["--output-dir", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Data rows of a CSV written by the tool, after checking its header lines.
fn csv_rows(path: &Path, columns: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let stamp = lines.next().unwrap();
    assert!(stamp.starts_with("# mcgl ") && stamp.contains("config_hash="), "{stamp}");
    assert_eq!(lines.next().unwrap(), columns);
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn maxwell_point_of_tilted_quartic() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "tilt.toml", "[potential]\nkind = \"tilted-quartic\"\ntilt = 0.1\n");
    let v = stdout_json(&mcgl(dir.path(), &["--config", &cfg, "maxwell-point"]));
    for (key, want) in [("sigma0", 0.1), ("b0", 0.0), ("alpha0", 1.0), ("beta0", 3.0)] {
        assert!((v[key].as_f64().unwrap() - want).abs() < 1e-12, "{key} = {}", v[key]);
    }
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("maxwell_point.json").exists());
}

#[test]
fn maxwell_point_of_symmetric_quartic() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&mcgl(dir.path(), &["maxwell-point"]));
    assert!((v["zeta0"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn convex_potential_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "convex.toml", "[potential]\nkind = \"polynomial\"\ncoeffs = [0.0, 0.0, 1.0, 0.0, 1.0]\n");
    let out = mcgl(dir.path(), &["--config", &cfg, "maxwell-point"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("double-well hypothesis"), "{msg}");
}

#[test]
fn solve_writes_report_and_profile() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&mcgl(dir.path(), &["solve", "--eps", "0.1", "--r", "2"]));
    for res in v["residuals"].as_array().unwrap() {
        assert!(res.as_f64().unwrap().abs() < 1e-9);
    }
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve_eps0.1_r2.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
    let rows = csv_rows(&dir.path().join("profile_eps0.1_r2.csv"), "x,u");
    assert_eq!(rows.len(), 2001);
    assert_eq!(f(&rows[0][0]), -1.0);
    assert_eq!(f(&rows[2000][0]), 1.0);
    assert!(rows.windows(2).all(|w| f(&w[1][1]) >= f(&w[0][1])));
}

#[test]
fn out_of_domain_parameters_exit_with_code_3() {
    let dir = TempDir::new().unwrap();
    for (eps, r) in [("0.1", "0.5"), ("3.0", "2")] {
        let out = mcgl(dir.path(), &["solve", "--eps", eps, "--r", r]);
        assert_eq!(out.status.code(), Some(3), "eps {eps}, r {r}");
    }
    let out = mcgl(dir.path(), &["second-variation", "--n", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_rows_are_ordered_and_failures_are_kept() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "grid.toml", "[grid]\neps = [0.1, 3.0, 0.2]\nr = [2.0, 1.5]\n");
    let out = mcgl(dir.path(), &["--config", &cfg, "sweep"]);
    assert!(out.status.success());
    let rows = csv_rows(
        &dir.path().join("convergence.csv"),
        "eps,r,sigma,b,ln_h1,ln_h2,k1,k2,res0,res1,z1,z2,energy,iters,status",
    );
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r[1]), f(&r[0]))).collect();
    assert_eq!(keys, [(1.5, 3.0), (1.5, 0.2), (1.5, 0.1), (2.0, 3.0), (2.0, 0.2), (2.0, 0.1)]);
    for row in &rows {
        assert_eq!(row.len(), 15);
        if f(&row[0]) == 3.0 {
            assert_eq!(row[14], "out-of-domain");
            assert!(row[2..14].iter().all(|v| v == "NaN"));
        } else {
            assert_eq!(row[14], "ok");
            assert!(f(&row[8]).abs() < 1e-9 && f(&row[9]).abs() < 1e-9);
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg_text = "[grid]\neps = [0.2, 0.1]\nr = [1.5, 2.0]\n";
    let run = |threads: &str| {
        let dir = TempDir::new().unwrap();
        let cfg = config(dir.path(), "grid.toml", cfg_text);
        let out = Command::new(env!("CARGO_BIN_EXE_mcgl"))
            .env("MCGL_THREADS", threads)
            .args(["--config", &cfg, "--output-dir", dir.path().to_str().unwrap(), "sweep"])
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(dir.path().join("convergence.csv")).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
}

#[test]
fn config_hash_follows_the_effective_config() {
    let dir = TempDir::new().unwrap();
    let hash = |args: &[&str]| stdout_json(&mcgl(dir.path(), args))["config_hash"].as_str().unwrap().to_string();
    let cfg = config(dir.path(), "one.toml", "[grid]\neps = [0.1]\nr = [2.0]\n");
    let from_file = hash(&["--config", &cfg, "solve"]);
    let from_flags = hash(&["solve", "--eps", "0.1", "--r", "2"]);
    assert_eq!(from_file, from_flags);
    assert_ne!(from_flags, hash(&["solve", "--eps", "0.1", "--r", "1.5"]));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mcgl")).env("MCGL_THREADS", "0").arg("maxwell-point").current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rank_puts_maxwell_first() {
    let dir = TempDir::new().unwrap();
    assert!(mcgl(dir.path(), &["rank", "--eps", "0.1", "--r", "2"]).status.success());
    let rows = csv_rows(&dir.path().join("rank.csv"), "label,energy,status");
    assert_eq!(rows[0][0], "maxwell");
    assert!(rows.windows(2).all(|w| f(&w[1][1]) > f(&w[0][1])));
    assert!(rows.iter().any(|r| r[0] == "constant" && f(&r[1]) == 0.5));
}

#[test]
fn second_variation_is_negative_for_two_transitions() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&mcgl(dir.path(), &["second-variation", "--eps", "0.05", "--r", "2", "--n", "2"]));
    assert!(v["J"].as_f64().unwrap() < 0.0, "{}", v["J"]);
    assert!(dir.path().join("second_variation_eps0.05_r2_n2.json").exists());
}

#[test]
fn limit_check_deviation_decreases_with_eps() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "lim.toml", "[grid]\neps = [0.2, 0.1, 0.05]\nr = [2.0]\n");
    assert!(mcgl(dir.path(), &["--config", &cfg, "limit-check"]).status.success());
    let rows = csv_rows(&dir.path().join("limit.csv"), "eps,r,sup_dev,interface_x,interface_err,status");
    let sup: Vec<f64> = rows.iter().map(|r| f(&r[2])).collect();
    assert_eq!(sup.len(), 3);
    assert!(sup[1] < sup[0] && sup[2] < sup[1], "{sup:?}");
}

#[test]
fn simulate_conserves_mass_and_dissipates_energy() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "sim.toml",
        "[grid]\neps = [0.1]\nr = [2.0]\n\n[simulate]\nn_cells = 64\nt_end = 0.2\nsample_interval = 0.05\ninit = \"spinodal\"\n",
    );
    let v = stdout_json(&mcgl(dir.path(), &["--config", &cfg, "simulate"]));
    assert_eq!(v["t"].as_f64().unwrap(), 0.2);
    let trace = csv_rows(&dir.path().join("trace.csv"), "t,mass,energy");
    assert_eq!(trace.len(), 5);
    for w in trace.windows(2) {
        assert!((f(&w[1][1]) - 4.0).abs() < 1e-12);
        assert!(f(&w[1][2]) <= f(&w[0][2]));
    }
    let snap = csv_rows(&dir.path().join("snapshot.csv"), "x,u");
    assert_eq!(snap.len(), 64);

    let again = stdout_json(&mcgl(dir.path(), &["--config", &cfg, "simulate", "--init", "file", "--file", "snapshot.csv"]));
    assert_eq!(again["n_cells"], 64);
    assert!((again["mass0"].as_f64().unwrap() - v["mass"].as_f64().unwrap()).abs() < 1e-13);
}

#[test]
fn huge_mobility_exits_with_code_5() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "stiff.toml", "[simulate]\nn_cells = 32\nmobility = 1e30\ninit = \"spinodal\"\n");
    let out = mcgl(dir.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "typo.toml", "[grid]\nepsilon = [0.1]\n");
    let out = mcgl(dir.path(), &["--config", &cfg, "maxwell-point"]);
    assert_eq!(out.status.code(), Some(1));
}
