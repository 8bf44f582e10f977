use std::path::Path;
use std::process::{Command, Output};

use noisesync_core::coloring::{chromatic_number_bruteforce, DEFAULT_NODE_LIMIT};
use noisesync_core::graph::parse_dimacs;
use serde_json::Value;

fn noisesync(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisesync"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run noisesync")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = noisesync(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().next().unwrap()).unwrap()
}

#[test]
fn gen_circulant() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["gen", "--circulant", "8", "4", "--out", "g.col"],
    );
    let g = parse_dimacs(&std::fs::read_to_string(dir.path().join("g.col")).unwrap()).unwrap();
    assert_eq!(g.n(), 8);
    assert_eq!(g.edges().len(), 16);
    assert!(g.degrees().iter().all(|&d| d == 4));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = noisesync(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = noisesync(dir.path(), &["gen", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failure_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = noisesync(
        dir.path(),
        &["color", "--graph", "missing.col", "--out", "c.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    let e = error_line(&out);
    assert_eq!(e["error"], "io");
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    std::fs::write(dir.path().join("bad.col"), "p edge 3 1\ne 4 1\n").unwrap();
    let out = noisesync(
        dir.path(),
        &["color", "--graph", "bad.col", "--out", "c.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "simulation");
}

#[test]
fn color_triangle() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["gen", "--named", "triangle", "--out", "triangle.col"],
    );
    ok(
        dir.path(),
        &[
            "color",
            "--graph",
            "triangle.col",
            "--runs",
            "12",
            "--seed",
            "7",
            "--out",
            "c.json",
        ],
    );
    let v = json(&dir.path().join("c.json"));
    let g =
        parse_dimacs(&std::fs::read_to_string(dir.path().join("triangle.col")).unwrap()).unwrap();
    let chi = chromatic_number_bruteforce(&g, DEFAULT_NODE_LIMIT).unwrap();
    assert_eq!(v["num_colors"], chi);
    assert_eq!(v["total_runs"], 12);
    assert!(v["locked_runs"].as_u64().unwrap() >= 1);
    let mut order: Vec<u64> = v["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    order.sort();
    assert_eq!(order, vec![1, 2, 3]);
    assert_eq!(v["assignment"].as_array().unwrap().len(), 3);
    assert_eq!(v["params"]["oscillator"]["v_a"], 2.0);
}

#[test]
fn params_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("p.json"),
        r#"{"t_end": 0.006, "c_c": 2e-12, "oscillator": {"beta": 0.6}}"#,
    )
    .unwrap();
    ok(d, &["gen", "--named", "diamond", "--out", "d.col"]);
    ok(
        d,
        &[
            "sim", "--params", "p.json", "--graph", "d.col", "--cc", "7e-12", "--trace", "t.csv",
            "--report", "r.json",
        ],
    );
    let r = json(&d.join("r.json"));
    assert_eq!(r["params"]["t_end"], 0.006);
    assert_eq!(r["params"]["c_c"], 7e-12);
    assert_eq!(r["params"]["oscillator"]["beta"], 0.6);
    assert_eq!(r["params"]["oscillator"]["r_f"], 1e6);
    assert_eq!(r["sim_config"]["t_end"], 0.006);

    ok(
        d,
        &[
            "sim", "--params", "p.json", "--graph", "d.col", "--t-end", "0.004", "--trace",
            "t.csv", "--report", "r.json",
        ],
    );
    let r = json(&d.join("r.json"));
    assert_eq!(r["params"]["t_end"], 0.004);
    assert_eq!(r["params"]["c_c"], 2e-12);

    std::fs::write(d.join("bad.json"), r#"{"nonsense": 1}"#).unwrap();
    let out = noisesync(
        d,
        &[
            "sim", "--params", "bad.json", "--graph", "d.col", "--trace", "t.csv", "--report",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "json");
}

#[test]
fn sim_trace_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("one.col"), "p edge 1 0\n").unwrap();
    std::fs::write(d.join("p.json"), r#"{"c_noise": 0.0}"#).unwrap();
    ok(
        d,
        &[
            "sim", "--params", "p.json", "--graph", "one.col", "--t-end", "0.05", "--trace",
            "t.csv", "--report", "r.json", "--events", "e.csv",
        ],
    );
    let trace = std::fs::read_to_string(d.join("t.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t,v1,s1"));
    let row: Vec<&str> = lines.nth(5).unwrap().split(',').collect();
    let mantissa = row[0].split('e').next().unwrap().replace(['.', '-'], "");
    assert!(mantissa.len() >= 12);
    let events = std::fs::read_to_string(d.join("e.csv")).unwrap();
    assert!(events.starts_with("osc,t,direction\n"));
    assert!(events.contains(",rise") && events.contains(",fall"));

    ok(
        d,
        &[
            "spectrum", "--trace", "t.csv", "--osc", "1", "--window", "hann", "--out", "s.csv",
            "--peak", "pk.json",
        ],
    );
    let spec = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert!(spec.starts_with("freq_hz,power\n"));
    let pk = json(&d.join("pk.json"));
    let f = pk["peak"]["f_peak"].as_f64().unwrap();
    let f0 = 1.0 / (2.0 * 1e6 * 100e-12 * 3f64.ln());
    let bin = 1.0 / (0.05 * 4.0);
    assert!((f - f0).abs() <= 2.0 * bin, "{f} vs {f0}");

    let out = noisesync(
        d,
        &[
            "spectrum", "--trace", "t.csv", "--osc", "2", "--out", "s.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let out = noisesync(
        d,
        &[
            "spectrum", "--trace", "t.csv", "--window", "triangle", "--out", "s.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threshold_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "threshold",
            "--n",
            "2",
            "--detune",
            "0,0.02",
            "--v-max",
            "0.5",
            "--seeds",
            "3",
            "--out",
            "th.json",
            "--csv",
            "th.csv",
        ],
    );
    let th = json(&d.join("th.json"));
    assert!(th["result"]["status"].is_string());
    assert_eq!(th["result"]["seeds"].as_array().unwrap().len(), 3);
    assert!(std::fs::read_to_string(d.join("th.csv"))
        .unwrap()
        .starts_with("x,value,flag\n"));
    let out = noisesync(d, &["threshold", "--v-max", "0.5", "--out", "th.json"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        d.join("spec.json"),
        r#"{"named": "triangle", "noise_rms": [0.0], "seeds": 3}"#,
    )
    .unwrap();
    ok(
        d,
        &[
            "sweep",
            "--kind",
            "coupling",
            "--spec",
            "spec.json",
            "--out",
            "sw.json",
            "--csv",
            "sw.csv",
        ],
    );
    let sw = json(&d.join("sw.json"));
    assert_eq!(sw["result"]["points"][0]["status"], "found");
    let csv = std::fs::read_to_string(d.join("sw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn identical_invocations_identical_files() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let runs: [&[&str]; 4] = [
        &[
            "color",
            "--graph",
            "d.col",
            "--noise-rms",
            "0.2",
            "--runs",
            "6",
            "--seed",
            "3",
            "--out",
            "c.json",
        ],
        &[
            "sim",
            "--graph",
            "d.col",
            "--noise-rms",
            "0.2",
            "--seed",
            "5",
            "--t-end",
            "0.004",
            "--trace",
            "t.csv",
            "--report",
            "r.json",
        ],
        &[
            "threshold",
            "--n",
            "3",
            "--v-max",
            "0.3",
            "--seeds",
            "3",
            "--out",
            "th.json",
        ],
        &[
            "spectrum", "--trace", "t.csv", "--osc", "2", "--out", "s.csv", "--peak", "p.json",
        ],
    ];
    for d in &dirs {
        ok(d.path(), &["gen", "--named", "diamond", "--out", "d.col"]);
        for args in runs {
            ok(d.path(), args);
        }
    }
    for name in ["c.json", "t.csv", "r.json", "th.json", "s.csv", "p.json"] {
        let a = std::fs::read_to_string(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read_to_string(dirs[1].path().join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}
