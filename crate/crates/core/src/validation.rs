//! Cross-checks between the SHS engine and the closed forms over a fixed grid.

use std::fmt;

use crate::closed_form::{self, theorem1_aoi, theorem2_aoi, theorem3_aoi};
use crate::error::Error;
use crate::policy::{build_model, closed_form_aoi, closed_form_vq0, PolicyId};
use crate::shs::{self, LoadPoint};

pub const LOAD_GRID: [f64; 8] = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
pub const MU_GRID: [f64; 3] = [0.5, 1.0, 2.0];

pub const ENGINE_TOLERANCE: f64 = 1e-9;
pub const STATE_SUM_TOLERANCE: f64 = 1e-12;
pub const STATIONARY_TOLERANCE: f64 = 1e-12;
pub const LIMIT_TOLERANCE: f64 = 1e-12;

pub type AoiFn = fn(PolicyId, f64, f64, f64) -> Result<f64, Error>;
pub type StateFn = fn(PolicyId, f64, f64, f64) -> Result<Vec<f64>, Error>;

/// Closed-form functions under test. Swappable so corrupted variants can be
/// shown to fail.
#[derive(Clone, Copy)]
pub struct Backends {
    pub aoi: AoiFn,
    pub vq0: StateFn,
}

impl Default for Backends {
    fn default() -> Self {
        Self {
            aoi: closed_form_aoi::<f64>,
            vq0: closed_form_vq0::<f64>,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub points: usize,
    /// Relative for AoI checks, absolute for probabilities.
    pub max_error: f64,
    pub tolerance: f64,
    /// First evaluation error, if any point could not be computed.
    pub failure: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.max_error <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "ok" } else { "FAIL" };
        write!(
            f,
            "{:<32} points={:<4} max err {:.3e} (tol {:.0e}) {verdict}",
            self.name, self.points, self.max_error, self.tolerance
        )?;
        if let Some(msg) = &self.failure {
            write!(f, ": {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    /// Largest relative AoI error of `policy` across its checks.
    pub fn max_relative_error(&self, policy: PolicyId) -> f64 {
        let prefix = format!("{} ", policy_label(policy));
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(&prefix) && !c.name.ends_with("stationary"))
            .map(|c| c.max_error)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for p in PolicyId::SOURCE_AWARE {
            writeln!(
                f,
                "{} max rel err {:.3e} (tol {:.0e})",
                policy_label(p),
                self.max_relative_error(p),
                ENGINE_TOLERANCE
            )?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "validation FAILED" })
    }
}

fn policy_label(policy: PolicyId) -> &'static str {
    match policy {
        PolicyId::Policy1 => "policy1",
        PolicyId::Policy2 => "policy2",
        PolicyId::Policy3 => "policy3",
        other => other.name(),
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got.is_nan() || want.is_nan() {
        return f64::INFINITY;
    }
    (got - want).abs() / want.abs()
}

struct Accumulator {
    result: CheckResult,
}

impl Accumulator {
    fn new(name: String, tolerance: f64) -> Self {
        Self {
            result: CheckResult {
                name,
                points: 0,
                max_error: 0.0,
                tolerance,
                failure: None,
            },
        }
    }

    fn record(&mut self, outcome: Result<f64, String>) {
        self.result.points += 1;
        match outcome {
            Ok(e) => self.result.max_error = self.result.max_error.max(if e.is_nan() { f64::INFINITY } else { e }),
            Err(msg) => {
                if self.result.failure.is_none() {
                    self.result.failure = Some(msg);
                }
            }
        }
    }
}

fn grid() -> impl Iterator<Item = (f64, f64, f64)> {
    LOAD_GRID
        .iter()
        .flat_map(|&r1| LOAD_GRID.iter().flat_map(move |&r2| MU_GRID.iter().map(move |&mu| (r1, r2, mu))))
}

fn check_policy(policy: PolicyId, backends: &Backends) -> Vec<CheckResult> {
    let label = policy_label(policy);
    let mut engine = Accumulator::new(format!("{label} engine vs closed form"), ENGINE_TOLERANCE);
    let mut sum = Accumulator::new(format!("{label} state sum vs closed form"), STATE_SUM_TOLERANCE);
    let mut states = Accumulator::new(format!("{label} state values vs engine"), ENGINE_TOLERANCE);
    let mut stationary = Accumulator::new(format!("{label} stationary"), STATIONARY_TOLERANCE);

    let model = match build_model(policy) {
        Ok(m) => m,
        Err(e) => {
            engine.record(Err(e.to_string()));
            return vec![engine.result];
        }
    };

    for (r1, r2, mu) in grid() {
        let at = |e: &dyn fmt::Display| format!("rho1={r1} rho2={r2} mu={mu}: {e}");
        let loads = match LoadPoint::from_loads(r1, r2, mu) {
            Ok(l) => l,
            Err(e) => {
                engine.record(Err(at(&e)));
                continue;
            }
        };
        let solution = match shs::solve(&model, &loads) {
            Ok(s) => s,
            Err(e) => {
                engine.record(Err(at(&e)));
                continue;
            }
        };
        let engine_states = solution.correlation.first_column();
        let engine_aoi = solution.correlation.average_aoi();
        let closed = (backends.aoi)(policy, r1, r2, mu);

        engine.record(closed.as_ref().map(|&c| rel_err(engine_aoi, c)).map_err(|e| at(e)));

        let vq0 = (backends.vq0)(policy, r1, r2, mu);
        sum.record(match (&vq0, &closed) {
            (Ok(v), Ok(c)) => Ok(rel_err(v.iter().sum(), *c)),
            (Err(e), _) | (_, Err(e)) => Err(at(e)),
        });
        states.record(match &vq0 {
            Ok(v) if v.len() != engine_states.len() => Err(at(&format!(
                "{} closed-form states, engine has {}",
                v.len(),
                engine_states.len()
            ))),
            Ok(v) => Ok(v
                .iter()
                .zip(&engine_states)
                .map(|(&c, &e)| rel_err(e, c))
                .fold(0.0, f64::max)),
            Err(e) => Err(at(e)),
        });

        let pi_closed = match policy {
            PolicyId::Policy1 => closed_form::policy1_stationary(r1, r2),
            _ => closed_form::policy23_stationary(r1, r2),
        };
        stationary.record(match pi_closed {
            Ok(p) => Ok(p
                .probabilities()
                .iter()
                .zip(solution.stationary.probabilities())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)),
            Err(e) => Err(at(&e)),
        });
    }
    vec![engine.result, sum.result, states.result, stationary.result]
}

fn check_limits(backends: &Backends) -> CheckResult {
    let mut acc = Accumulator::new("limits at rho2 = 0".to_string(), LIMIT_TOLERANCE);
    for r1 in [0.5, 1.0, 2.0, 5.0] {
        for mu in MU_GRID {
            let want = (1.0 + r1) / (mu * r1);
            acc.record(
                (backends.aoi)(PolicyId::Policy2, r1, 0.0, mu)
                    .map(|v| rel_err(v, want))
                    .map_err(|e| e.to_string()),
            );
        }
    }
    for (policy, want) in [(PolicyId::Policy1, 116.0 / 48.0), (PolicyId::Policy3, 2.5)] {
        acc.record(
            (backends.aoi)(policy, 1.0, 0.0, 1.0)
                .map(|v| rel_err(v, want))
                .map_err(|e| e.to_string()),
        );
    }
    // Direct theorem evaluation agrees with the dispatch used above.
    for (f, policy) in [
        (theorem1_aoi::<f64> as fn(f64, f64, f64) -> _, PolicyId::Policy1),
        (theorem2_aoi::<f64>, PolicyId::Policy2),
        (theorem3_aoi::<f64>, PolicyId::Policy3),
    ] {
        acc.record(match (f(1.0, 0.0, 1.0), (backends.aoi)(policy, 1.0, 0.0, 1.0)) {
            (Ok(a), Ok(b)) => Ok(rel_err(b, a)),
            (Err(e), _) => Err(e.to_string()),
            (_, Err(e)) => Err(e.to_string()),
        });
    }
    acc.result
}

/// Runs every check. Never panics; failures are reported in the result.
pub fn run_validation(backends: &Backends) -> ValidationReport {
    let mut checks: Vec<CheckResult> = PolicyId::SOURCE_AWARE
        .iter()
        .flat_map(|&p| check_policy(p, backends))
        .collect();
    checks.push(check_limits(backends));
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes() {
        let report = run_validation(&Backends::default());
        assert!(report.passed(), "{report}");
        for p in PolicyId::SOURCE_AWARE {
            assert!(report.max_relative_error(p) <= ENGINE_TOLERANCE);
        }
        assert_eq!(report.checks[0].points, 192);
        let text = report.to_string();
        assert!(text.contains("policy1 max rel err"));
        assert!(text.ends_with("all checks passed"));
    }

    fn corrupted_aoi(policy: PolicyId, r1: f64, r2: f64, mu: f64) -> Result<f64, Error> {
        let v = closed_form_aoi(policy, r1, r2, mu)?;
        Ok(if policy == PolicyId::Policy1 { v * (1.0 + 1e-6) } else { v })
    }

    fn corrupted_states(policy: PolicyId, r1: f64, r2: f64, mu: f64) -> Result<Vec<f64>, Error> {
        let mut v = closed_form_vq0(policy, r1, r2, mu)?;
        if policy == PolicyId::Policy3 {
            v[2] *= 1.0 + 1e-10;
        }
        Ok(v)
    }

    #[test]
    fn corrupted_coefficient_fails() {
        let report = run_validation(&Backends {
            aoi: corrupted_aoi,
            ..Backends::default()
        });
        assert!(!report.passed());
        assert!(report.max_relative_error(PolicyId::Policy1) > 1e-7);
        assert!(report.max_relative_error(PolicyId::Policy2) <= ENGINE_TOLERANCE);

        let report = run_validation(&Backends {
            vq0: corrupted_states,
            ..Backends::default()
        });
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["policy3 state sum vs closed form"]);
    }

    #[test]
    fn erroring_backend_is_reported_not_panicked() {
        fn broken(_: PolicyId, _: f64, _: f64, _: f64) -> Result<f64, Error> {
            Err(Error::Parse("broken".into()))
        }
        let report = run_validation(&Backends {
            aoi: broken,
            ..Backends::default()
        });
        assert!(!report.passed());
        assert!(report.to_string().contains("broken"));
    }
}
