//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::{Command, ExitCode};
use std::time::Instant;

use aoi_core::closed_form::{theorem1_aoi, theorem2_aoi, theorem3_aoi};
use aoi_core::jain_index;
use aoi_core::policy::{average_aoi_for, closed_form_aoi, closed_form_vq0};
use aoi_core::scalar::ratio;
use aoi_core::sim::{self, SimConfig, SimResult};
use aoi_core::{AnalyticMethod, Exact, LoadPoint, PolicyId, SourceView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 8] = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
const MUS: [f64; 3] = [0.5, 1.0, 2.0];

const ENGINE_TOL: f64 = 1e-9;
const SUM_TOL: f64 = 1e-12;
const LIMIT_TOL: f64 = 1e-12;
const SE_MULT: f64 = 3.0;
const HALF_WIDTH_TARGET: f64 = 0.01;
const JAIN_EQ_TOL: f64 = 1e-12;
const CLOSED_TIE_TOL: f64 = 1e-12;

const SIM_EVENTS: u64 = 1_000_000;
const SIM_REPS: usize = 16;
const SIM_SEED: u64 = 20_240_601;

const BASELINES: [PolicyId; 4] = [PolicyId::LcfsS, PolicyId::LcfsW, PolicyId::PpNw, PolicyId::PpWw];

struct Outcome {
    passed: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sum_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

fn simulate(policy: PolicyId, rho1: f64, rho2: f64) -> SimResult {
    let config = SimConfig {
        policy,
        loads: LoadPoint::from_loads(rho1, rho2, 1.0).unwrap(),
        horizon_events: SIM_EVENTS,
        warmup_fraction: sim::DEFAULT_WARMUP_FRACTION,
        seed: SIM_SEED,
        replications: SIM_REPS,
    };
    sim::simulate(&config).unwrap()
}

fn jain_stat(r: &SimResult) -> (f64, f64) {
    r.statistic(|rep| jain_index(rep.mean_aoi[0], rep.mean_aoi[1]).unwrap())
}

fn criterion1() -> Outcome {
    let mut worst = 0.0_f64;
    let mut points = 0;
    for policy in PolicyId::SOURCE_AWARE {
        for &r1 in &GRID {
            for &r2 in &GRID {
                for &mu in &MUS {
                    let loads = LoadPoint::from_loads(r1, r2, mu).unwrap();
                    let engine =
                        average_aoi_for(policy, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
                    let theorem = closed_form_aoi(policy, r1, r2, mu).unwrap();
                    worst = worst.max(rel(engine, theorem));
                    points += 1;
                }
            }
        }
    }
    // Exact agreement in rational arithmetic at a few points.
    let mut exact_ok = true;
    for policy in PolicyId::SOURCE_AWARE {
        for (a, b) in [(1, 1), (1, 3), (7, 2), (5, 10)] {
            let loads = LoadPoint::from_loads(ratio(a, 2), ratio(b, 2), ratio(3, 2)).unwrap();
            let engine: Exact =
                average_aoi_for(policy, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
            let theorem = closed_form_aoi(policy, ratio(a, 2), ratio(b, 2), ratio(3, 2)).unwrap();
            exact_ok &= engine == theorem;
        }
    }
    Outcome {
        passed: worst <= ENGINE_TOL && exact_ok,
        detail: format!(
            "{points} points, max rel err {worst:.2e} (tol {ENGINE_TOL:.0e}); exact rational agreement {exact_ok}"
        ),
    }
}

fn criterion2() -> Outcome {
    let mut worst = 0.0_f64;
    for policy in PolicyId::SOURCE_AWARE {
        for &r1 in &GRID {
            for &r2 in &GRID {
                for &mu in &MUS {
                    let states: f64 = closed_form_vq0(policy, r1, r2, mu).unwrap().iter().sum();
                    worst = worst.max(rel(states, closed_form_aoi(policy, r1, r2, mu).unwrap()));
                }
            }
        }
    }
    Outcome {
        passed: worst <= SUM_TOL,
        detail: format!("max rel err {worst:.2e} (tol {SUM_TOL:.0e})"),
    }
}

fn criterion3() -> Outcome {
    let mut worst = 0.0_f64;
    let mut engine_worst = 0.0_f64;
    for r1 in [0.5, 1.0, 2.0, 5.0] {
        for mu in MUS {
            let want = (1.0 + r1) / (mu * r1);
            worst = worst.max(rel(theorem2_aoi(r1, 0.0, mu).unwrap(), want));
            let loads = LoadPoint::from_loads(r1, 1e-10, mu).unwrap();
            let engine =
                average_aoi_for(PolicyId::Policy2, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
            engine_worst = engine_worst.max(rel(engine, want));
        }
    }
    worst = worst.max(rel(theorem3_aoi(1.0, 0.0, 1.0).unwrap(), 2.5));
    worst = worst.max(rel(theorem1_aoi(1.0, 0.0, 1.0).unwrap(), 116.0 / 48.0));
    let exact = theorem1_aoi(ratio(1, 1), ratio(0, 1), ratio(1, 1)).unwrap() == ratio(116, 48)
        && theorem3_aoi(ratio(1, 1), ratio(0, 1), ratio(1, 1)).unwrap() == ratio(5, 2);
    for (policy, want) in [(PolicyId::Policy1, 116.0 / 48.0), (PolicyId::Policy3, 2.5)] {
        let loads = LoadPoint::from_loads(1.0, 1e-10, 1.0).unwrap();
        let engine = average_aoi_for(policy, SourceView::Source1, &loads, AnalyticMethod::ShsEngine).unwrap();
        engine_worst = engine_worst.max(rel(engine, want));
    }
    Outcome {
        passed: worst <= LIMIT_TOL && exact && engine_worst <= 1e-8,
        detail: format!(
            "max rel err {worst:.2e} (tol {LIMIT_TOL:.0e}); exact {exact}; engine at rho2=1e-10 {engine_worst:.2e}"
        ),
    }
}

fn criterion4() -> Outcome {
    let points = [(0.5, 0.5), (1.0, 1.0), (0.3, 1.7), (3.0, 3.0)];
    let mut covered = 0;
    let mut total = 0;
    let mut worst_hw = 0.0_f64;
    let mut misses = Vec::new();
    for policy in PolicyId::SOURCE_AWARE {
        for (r1, r2) in points {
            let result = simulate(policy, r1, r2);
            let truth = [
                closed_form_aoi(policy, r1, r2, 1.0).unwrap(),
                closed_form_aoi(policy, r2, r1, 1.0).unwrap(),
            ];
            for (i, src) in [sim::Source::S1, sim::Source::S2].into_iter().enumerate() {
                let (lo, hi) = result.interval(src, SE_MULT);
                total += 1;
                if lo <= truth[i] && truth[i] <= hi {
                    covered += 1;
                } else {
                    misses.push(format!("{policy} ({r1},{r2}) src{}", i + 1));
                }
                worst_hw = worst_hw.max(SE_MULT * result.std_error[i] / truth[i]);
            }
        }
    }
    Outcome {
        passed: covered == total && worst_hw <= HALF_WIDTH_TARGET,
        detail: format!(
            "{covered}/{total} 3-SE intervals cover; max rel half-width {:.3}% (target {:.0}%){}",
            worst_hw * 100.0,
            HALF_WIDTH_TARGET * 100.0,
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    }
}

/// Simulations over the fractional grid at total load `rho`, indexed `[policy][point]`.
fn baseline_runs(rho: f64, policies: &[PolicyId]) -> Vec<Vec<SimResult>> {
    policies
        .iter()
        .map(|&p| sum_grid().iter().map(|&f| simulate(p, f * rho, rho - f * rho)).collect())
        .collect()
}

fn criterion5(runs: &[Vec<SimResult>]) -> Outcome {
    let mut violations = Vec::new();
    for (k, &f) in sum_grid().iter().enumerate() {
        let (r1, r2) = (f, 1.0 - f);
        let sum = |p| closed_form_aoi(p, r1, r2, 1.0).unwrap() + closed_form_aoi(p, r2, r1, 1.0).unwrap();
        let p2 = sum(PolicyId::Policy2);
        for p in [PolicyId::Policy1, PolicyId::Policy3] {
            if !(p2 < sum(p) - CLOSED_TIE_TOL) {
                violations.push(format!("{p} at rho1={r1:.1}"));
            }
        }
        for (b, &policy) in BASELINES.iter().enumerate() {
            let r = &runs[b][k];
            let low = r.sum_aoi() - SE_MULT * r.sum_std_error;
            if !(p2 < low) {
                violations.push(format!(
                    "{policy} at rho1={r1:.1}: p2 {p2:.4} vs {:.4} +- {:.4}",
                    r.sum_aoi(),
                    SE_MULT * r.sum_std_error
                ));
            }
        }
    }
    Outcome {
        passed: violations.is_empty(),
        detail: if violations.is_empty() {
            "policy 2 lowest at all 9 points against 6 competitors".into()
        } else {
            format!("policy 2 not lowest: {}", violations.join("; "))
        },
    }
}

/// Width, as a count of grid points, of the region where Jain >= 0.9.
fn fair_width(runs: &[SimResult]) -> usize {
    runs.iter().filter(|r| jain_stat(r).0 >= 0.9).count()
}

fn criterion6(runs: &[Vec<SimResult>], high_load: &[Vec<SimResult>]) -> Outcome {
    let mut violations = Vec::new();
    for (k, &r1) in sum_grid().iter().enumerate() {
        let r2 = 1.0 - r1;
        let jain = |p| {
            jain_index(closed_form_aoi(p, r1, r2, 1.0).unwrap(), closed_form_aoi(p, r2, r1, 1.0).unwrap()).unwrap()
        };
        let j3 = jain(PolicyId::Policy3);
        for p in [PolicyId::Policy1, PolicyId::Policy2] {
            if !(j3 >= jain(p) - CLOSED_TIE_TOL) {
                violations.push(format!("{p} at rho1={r1:.1}"));
            }
        }
        for b in [0, 1] {
            let (mean, se) = jain_stat(&runs[b][k]);
            if !(j3 >= mean - SE_MULT * se) {
                violations.push(format!("{} at rho1={r1:.1}: {j3:.5} vs {mean:.5} +- {:.5}", BASELINES[b], SE_MULT * se));
            }
        }
    }
    // Priority baselines: the fair region narrows as the load grows.
    let mut shape = Vec::new();
    for (i, b) in [2, 3].into_iter().enumerate() {
        let (low, high) = (fair_width(&runs[b]), fair_width(&high_load[i]));
        shape.push(format!("{} {low}->{high}", BASELINES[b]));
        if !(high < low) {
            violations.push(format!("{} fair region does not narrow ({low} -> {high})", BASELINES[b]));
        }
    }
    Outcome {
        passed: violations.is_empty(),
        detail: if violations.is_empty() {
            format!("policy 3 fairest at all 9 points; fair-region width rho=1->6: {}", shape.join(", "))
        } else {
            format!("violations: {}", violations.join("; "))
        },
    }
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for i in 0..100_000 {
        let d1 = 10f64.powf(rng.random_range(-6.0..6.0));
        let d2 = if i % 10 == 0 { d1 } else { 10f64.powf(rng.random_range(-6.0..6.0)) };
        let j = jain_index(d1, d2).unwrap();
        let in_bounds = (0.5..=1.0).contains(&j);
        let is_one = (j - 1.0).abs() <= JAIN_EQ_TOL;
        if !in_bounds || is_one != (d1 == d2) {
            bad += 1;
        }
    }
    Outcome {
        passed: bad == 0,
        detail: format!("100000 pairs, {bad} violations"),
    }
}

fn criterion8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_aoi"))
            .args(["simulate", "--policy", "pp-ww", "--rho1", "0.4", "--rho2", "0.6", "--mu", "1"])
            .args(["--events", "100000", "--replications", "4", "--seed", seed, "--output"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "11");
    let b = run("b.csv", "11");
    let c = run("c.csv", "12");
    Outcome {
        passed: a == b && a != c && !a.is_empty(),
        detail: format!("{} bytes, identical {}, other seed differs {}", a.len(), a == b, a != c),
    }
}

fn report(n: usize, name: &str, start: Instant, outcome: &Outcome) {
    println!(
        "criterion {n} {name}: {} ({}) [{:.1}s]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut record = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        report(n, name, start, &outcome);
        if !outcome.passed {
            failed.push(n);
        }
    };
    record(1, "engine-theorem equivalence", &mut criterion1);
    record(2, "appendix-sum identity", &mut criterion2);
    record(3, "limit reductions", &mut criterion3);
    record(4, "simulation concordance", &mut criterion4);

    let start = Instant::now();
    let runs = baseline_runs(1.0, &BASELINES);
    let high = baseline_runs(6.0, &[PolicyId::PpNw, PolicyId::PpWw]);
    println!("baseline simulations [{:.1}s]", start.elapsed().as_secs_f64());
    record(5, "lowest sum AoI for policy 2", &mut || criterion5(&runs));
    record(6, "policy 3 fairest", &mut || criterion6(&runs, &high));
    record(7, "jain bounds", &mut criterion7);
    record(8, "determinism", &mut criterion8);

    if failed.is_empty() {
        println!("acceptance: all 8 criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL {failed:?}");
        ExitCode::FAILURE
    }
}
