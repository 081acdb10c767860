use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ness")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn solve_ising_default_reaches_steady_state() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("solve.json");
    let o = ness(&["solve", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out);
    assert_eq!(v["command"], "solve");
    assert_eq!(v["config"]["model"]["name"], "ising");
    let infid = v["result"]["infidelity"].as_f64().unwrap();
    assert!((0.0..1e-4).contains(&infid), "infidelity {infid}");
    let obs = v["result"]["observables"].as_array().unwrap();
    assert_eq!(obs.len(), 3);
    for o in obs {
        assert!((o["exact"].as_f64().unwrap() - o["steady_state"].as_f64().unwrap()).abs() < 1e-3);
        assert!(o.get("shadow").is_none());
    }
    assert!(v["result"].get("wall_time_secs").is_none());
}

#[test]
fn solve_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "seed = 5\n[ansatz]\nd1 = 2\nd2 = 2\n[search]\nrestarts = 3\n");
    let out = dir.path().join("r.json");
    assert!(ness(&["solve", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let first = fs::read(&out).unwrap();
    assert!(ness(&["solve", "--config", s(&cfg), "--out", s(&out)]).status.success());
    assert_eq!(first, fs::read(&out).unwrap());
}

#[test]
fn shadow_mode_reports_shadow_observables() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "[ansatz]\nd1 = 1\nd2 = 1\n[optimizer]\nmax_iters = 3\n[search]\nrestarts = 1\n[cost]\nn_unitaries = 40\nshots_per_unitary = 2\n",
    );
    let out = dir.path().join("r.json");
    let o = ness(&["solve", "--config", s(&cfg), "--mode", "shadow", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out);
    assert_eq!(v["config"]["cost"]["mode"], "shadow");
    for o in v["result"]["observables"].as_array().unwrap() {
        assert!(o["shadow"].as_f64().unwrap().abs() <= 9.0 + 1e-9);
    }
}

#[test]
fn wrong_gamma_length_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[model]\ngammas = [1.0, 0.5, 0.25]\n");
    let o = ness(&["solve", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.gammas"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_line_and_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "seed = 1\n[model]\nnme = \"ising\"\n");
    let o = ness(&["oracle", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("nme"), "{e}");
    assert_eq!(ness(&["oracle", "--config", "/nonexistent/c.toml"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "observables = [\"XY\", \"YY\", \"ZZ\"]\n[sweep]\nvalues = [0.0, 0.5, 1.0, 1.5, 2.0]\n",
    );
    let out = dir.path().join("sweep.csv");
    let o = ness(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# {\"command\":\"sweep\""));
    assert_eq!(lines[1], "g,cost,infidelity,XY,YY,ZZ,iterations,terminated_by,wall_time_secs");
    let rows: Vec<Vec<&str>> = lines[2..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for (row, g) in rows.iter().zip([0.0, 0.5, 1.0, 1.5, 2.0]) {
        assert_eq!(row[0].parse::<f64>().unwrap(), g);
        let infid: f64 = row[2].parse().unwrap();
        assert!((0.0..1e-4).contains(&infid), "g = {g}: infidelity {infid}");
        assert_eq!(row[8], "");
    }
}

#[test]
fn heisenberg_sweep_matches_oracle_observables() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "observables = [\"XX\", \"XZ\"]\n[model]\nname = \"heisenberg\"\ngammas = [1.0]\n[sweep]\nvalues = [0.5, 1.5]\nwarm_start = false\n",
    );
    let out = dir.path().join("sweep.csv");
    let o = ness(&["sweep", "--config", s(&cfg), "--out", s(&out), "--timing"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next().unwrap(), "g,cost,infidelity,XX,XZ,iterations,terminated_by,wall_time_secs");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert!(f[2].parse::<f64>().unwrap() < 1e-4);
        assert!(f[7].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn sweep_needs_a_grid() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "e.toml", "[sweep]\nvalues = []\n");
    let o = ness(&["sweep", "--config", s(&empty)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sweep.values"));
    let missing = write(&dir, "m.toml", "seed = 2\n");
    assert_eq!(ness(&["sweep", "--config", s(&missing)]).status.code(), Some(1));
}

#[test]
fn oracle_reports_damped_ground_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "observables = [\"ZI\", \"ZZ\"]\n[model]\ng = 0.0\ngammas = [1.0, 0.0]\n");
    let out = dir.path().join("o.json");
    let o = ness(&["oracle", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out);
    let r = &v["result"];
    assert!(r["residual"].as_f64().unwrap() < 1e-12);
    assert!((r["state"]["re"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((r["purity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((r["observables"][0][1].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn oracle_ising_residual_is_small() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.json");
    assert!(ness(&["oracle", "--out", s(&out)]).status.success());
    let v = read_json(&out);
    assert!(v["result"]["residual"].as_f64().unwrap() < 1e-9);
    let eig: Vec<f64> = v["result"]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((eig.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(eig.iter().all(|&e| e > -1e-12));
}

#[test]
fn oracle_pure_dephasing_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[model]\ng = 0.0\ngammas = [0.0, 1.0]\n");
    let o = ness(&["oracle", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not unique"), "{}", stderr(&o));
}

#[test]
fn paper_convention_flag_is_applied() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.json");
    let o = ness(&["oracle", "--convention", "paper", "--out", s(&out)]);
    // the literal convention need not conserve trace, so it may have no steady state
    match o.status.code() {
        Some(0) => assert_eq!(read_json(&out)["config"]["model"]["convention"], "paper_literal"),
        code => assert_eq!(code, Some(2), "{}", stderr(&o)),
    }
}

#[test]
fn gradcheck_passes_and_self_check_is_exact() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.json");
    let o = ness(&["gradcheck", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out);
    assert!(v["result"]["max_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["result"]["pass"], true);

    let cfg = write(&dir, "fd.toml", "[optimizer]\ngradient = \"finite_diff\"\n[gradcheck]\nsamples = 3\n");
    assert!(ness(&["gradcheck", "--config", s(&cfg), "--out", s(&out)]).status.success());
    assert_eq!(read_json(&out)["result"]["max_deviation"].as_f64().unwrap(), 0.0);

    let cfg = write(&dir, "gs.toml", "[optimizer]\ngradient = \"general_shift\"\n[gradcheck]\nsamples = 3\n");
    assert!(ness(&["gradcheck", "--config", s(&cfg), "--out", s(&out)]).status.success());
}

#[test]
fn gradcheck_flags_a_loose_comparison() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "[gradcheck]\nsamples = 2\nfd_step = 0.3\n");
    let out = dir.path().join("g.json");
    let o = ness(&["gradcheck", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(read_json(&out)["result"]["pass"], false);
    assert_eq!(ness(&["gradcheck", "--mode", "shadow"]).status.code(), Some(1));
}

#[test]
fn shadowbench_checks_pass() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let o = ness(&["shadowbench", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(lines.next().unwrap(), "test,parameter,value,mean,std_error,reference,bias,variance,bound,ratio,pass");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let count = |t: &str| rows.iter().filter(|r| r[0] == t).count();
    assert_eq!(count("cost"), 3);
    assert_eq!(count("variance_ratio"), 2);
    assert_eq!(count("distill"), 2);
    assert_eq!(count("distill_bias_ratio"), 1);
    assert!(rows.iter().all(|r| r[10] == "true"));
    for r in rows.iter().filter(|r| r[0] == "variance_ratio") {
        let ratio: f64 = r[9].parse().unwrap();
        assert!((0.15..=0.4).contains(&ratio), "{ratio}");
    }
}
