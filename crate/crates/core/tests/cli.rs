use std::fs;
use std::process::{Command, Output};

use aoi_core::policy::average_aoi_pair;
use aoi_core::report::{parse_csv, CSV_HEADER};
use aoi_core::{jain_index, AnalyticMethod, LoadPoint, PolicyId};

fn aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi"))
        .args(args)
        .env_clear()
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).filter(|r| r.starts_with(' ')))
        .and_then(|r| r.split_whitespace().next())
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn analytic_output_matches_library() {
    for (policy, method, lib_method) in [
        ("p1", "closed-form", AnalyticMethod::ClosedForm),
        ("p2", "shs", AnalyticMethod::ShsEngine),
        ("p3", "closed-form", AnalyticMethod::ClosedForm),
    ] {
        let o = aoi(&["analytic", "--policy", policy, "--rho1", "0.7", "--rho2", "1.9", "--mu", "2", "--method", method]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let loads = LoadPoint::from_loads(0.7, 1.9, 2.0).unwrap();
        let (d1, d2) = average_aoi_pair(policy.parse::<PolicyId>().unwrap(), &loads, lib_method).unwrap();
        for (key, want) in [("delta1", d1), ("delta2", d2), ("sum", d1 + d2), ("jain", jain_index(d1, d2).unwrap())] {
            assert!((field(&text, key) - want).abs() <= 1e-12 * want.max(1.0), "{key}");
        }
    }
}

#[test]
fn analytic_methods_agree_at_symmetric_point() {
    let base = ["analytic", "--policy", "p2", "--rho1", "1", "--rho2", "1", "--mu", "1"];
    let closed = field(&stdout(&aoi(&base)), "delta1");
    let shs = field(&stdout(&aoi(&[&base[..], &["--method", "shs"]].concat())), "delta1");
    assert!((closed - 73.0 / 30.0).abs() < 1e-12);
    assert!((closed - shs).abs() / closed < 1e-9);
}

#[test]
fn exit_codes() {
    let o = aoi(&["analytic", "--policy", "lcfs-s", "--rho1", "1", "--rho2", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no closed form in scope; use simulate"));
    assert_eq!(aoi(&["analytic", "--rho1", "1"]).status.code(), Some(2));
    assert_eq!(aoi(&["simulate", "--policy", "p1", "--rho1", "0", "--rho2", "1"]).status.code(), Some(2));
    assert_eq!(aoi(&["sweep", "--grid", "0.5,0.2"]).status.code(), Some(2));
    assert_eq!(aoi(&["validate"]).status.code(), Some(0));
}

#[test]
fn validate_prints_per_policy_errors() {
    let text = stdout(&aoi(&["validate"]));
    for p in ["policy1", "policy2", "policy3"] {
        assert!(text.contains(&format!("{p} max rel err")), "{text}");
    }
    assert!(text.trim_end().ends_with("all checks passed"));
    assert_eq!(text, stdout(&aoi(&["validate"])));
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = aoi(&[
        "sweep",
        "--policies",
        "p1,p2,p3",
        "--rho",
        "1",
        "--points",
        "9",
        "--output",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 27);
    assert_eq!(rows[0].policy, PolicyId::Policy1);
    assert!(rows.windows(2).all(|w| w[0].policy < w[1].policy || w[0].rho1 < w[1].rho1));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, "# fixed total load\npolicies = p2\nrho = 2\ngrid = 0.5, 1.0, 1.5\nmu = 3\n").unwrap();
    let o = aoi(&["--config", cfg.to_str().unwrap(), "sweep", "--mu", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.mu == 1.0 && (r.rho1 + r.rho2 - 2.0).abs() < 1e-12));
    assert_eq!(rows[1].jain, 1.0);

    fs::write(&cfg, "rhoo = 2\n").unwrap();
    assert_eq!(aoi(&["--config", cfg.to_str().unwrap(), "sweep"]).status.code(), Some(2));
}

#[test]
fn tradeoff_curve_is_symmetric() {
    let o = aoi(&["tradeoff", "--policies", "p2", "--rho", "1", "--points", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_csv(&stdout(&o)).unwrap();
    for (a, b) in rows.iter().zip(rows.iter().rev()) {
        assert!((a.delta1 - b.delta2).abs() / a.delta1 < 1e-12);
    }
    assert_eq!(aoi(&["tradeoff", "--policies", "pp-nw"]).status.code(), Some(2));
}

#[test]
fn simulate_trace_is_a_sawtooth() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = aoi(&[
        "simulate", "--policy", "p1", "--rho1", "0.5", "--rho2", "0.5", "--events", "10000", "--replications", "2",
        "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replication,policy,source,generated,delivered"));
    let mut last = [[f64::NEG_INFINITY; 2]; 2];
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let rep: usize = f[0].parse().unwrap();
        let src: usize = f[2].parse::<usize>().unwrap() - 1;
        let (g, d): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        assert!(g <= d);
        // Ages only drop at deliveries: each delivery carries a fresher packet.
        assert!(g > last[rep][src]);
        last[rep][src] = g;
        count += 1;
    }
    assert!(count > 1000);
}
