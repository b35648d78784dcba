//! Parameter sweeps over `ρ1` and the `(Δ1, Δ2)` trade-off curves.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::Error;
use crate::metrics::jain_index;
use crate::policy::{average_aoi_pair, AnalyticMethod, PolicyId};
use crate::shs::LoadPoint;
use crate::sim::{self, SimConfig};

/// Width of simulation confidence bands, in standard errors.
pub const CI_SIGMAS: f64 = 3.0;

/// Relative distance of default grid endpoints from 0 and from the total load.
pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ClosedForm,
    Shs,
    Simulate,
}

impl Method {
    /// Closed form where one exists, simulation otherwise.
    pub fn default_for(policy: PolicyId) -> Self {
        if policy.has_analytic_model() {
            Method::ClosedForm
        } else {
            Method::Simulate
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Shs => "shs",
            Method::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closed-form" | "closed" | "closedform" => Ok(Method::ClosedForm),
            "shs" | "engine" => Ok(Method::Shs),
            "simulate" | "sim" => Ok(Method::Simulate),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

/// How `ρ2` follows the swept `ρ1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadAxis {
    /// `ρ2 = ρ − ρ1`.
    FixedTotal { rho: f64 },
    FixedRho2 { rho2: f64 },
}

impl LoadAxis {
    pub fn rho2_at(&self, rho1: f64) -> f64 {
        match *self {
            LoadAxis::FixedTotal { rho } => rho - rho1,
            LoadAxis::FixedRho2 { rho2 } => rho2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub horizon_events: u64,
    pub replications: usize,
    pub seed: u64,
    pub warmup_fraction: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            horizon_events: 1_000_000,
            replications: 16,
            seed: 1,
            warmup_fraction: sim::DEFAULT_WARMUP_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub policies: Vec<(PolicyId, Method)>,
    pub axis: LoadAxis,
    pub rho1_grid: Vec<f64>,
    pub mu: f64,
    pub sim: SimSettings,
}

impl SweepSpec {
    /// Sweep at fixed total load over the default grid.
    pub fn fixed_total(policies: &[PolicyId], rho: f64, mu: f64, num_points: usize) -> Self {
        Self {
            policies: policies.iter().map(|&p| (p, Method::default_for(p))).collect(),
            axis: LoadAxis::FixedTotal { rho },
            rho1_grid: default_grid(rho, num_points),
            mu,
            sim: SimSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidSweep(msg));
        if self.policies.is_empty() {
            return bad("no policies".into());
        }
        if self.rho1_grid.is_empty() {
            return Err(Error::EmptySweep);
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if self.rho1_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("rho1 grid must be strictly increasing".into());
        }
        if !(self.rho1_grid[0] > 0.0) {
            return bad("rho1 grid must be positive".into());
        }
        match self.axis {
            LoadAxis::FixedTotal { rho } => {
                if let Some(&last) = self.rho1_grid.last() {
                    if !(last < rho) {
                        return bad(format!("rho1 grid must stay below the total load {rho}"));
                    }
                }
            }
            LoadAxis::FixedRho2 { rho2 } => {
                if !(rho2 > 0.0) {
                    return bad(format!("rho2 must be positive, got {rho2}"));
                }
            }
        }
        for &(policy, method) in &self.policies {
            if !policy.has_analytic_model() && method != Method::Simulate {
                return Err(Error::UnsupportedPolicy(policy));
            }
        }
        Ok(())
    }
}

/// `num_points` evenly spaced values over `[m, ρ − m]` with `m = 0.01 ρ`.
/// The grid is symmetric about `ρ / 2`.
pub fn default_grid(rho: f64, num_points: usize) -> Vec<f64> {
    let margin = DEFAULT_MARGIN * rho;
    match num_points {
        0 => Vec::new(),
        1 => vec![rho / 2.0],
        n => {
            let step = (rho - 2.0 * margin) / (n - 1) as f64;
            (0..n).map(|i| margin + step * i as f64).collect()
        }
    }
}

/// One evaluated (policy, load point).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyId,
    pub rho1: f64,
    pub rho2: f64,
    pub mu: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub sum_aoi: f64,
    pub jain: f64,
    pub method: Method,
    /// Band on `sum_aoi` for simulated rows, `± CI_SIGMAS` standard errors.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub policy: PolicyId,
    pub rho1: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// Evaluates one point with the chosen backend.
pub fn evaluate_point(
    policy: PolicyId,
    method: Method,
    rho1: f64,
    rho2: f64,
    mu: f64,
    sim_settings: &SimSettings,
) -> Result<SweepRow, Error> {
    let loads = LoadPoint::from_loads(rho1, rho2, mu)?;
    let (delta1, delta2, ci, seed) = match method {
        Method::ClosedForm | Method::Shs => {
            let backend = if method == Method::Shs {
                AnalyticMethod::ShsEngine
            } else {
                AnalyticMethod::ClosedForm
            };
            let (d1, d2) = average_aoi_pair(policy, &loads, backend)?;
            (d1, d2, None, None)
        }
        Method::Simulate => {
            let config = SimConfig {
                policy,
                loads,
                horizon_events: sim_settings.horizon_events,
                warmup_fraction: sim_settings.warmup_fraction,
                seed: sim_settings.seed,
                replications: sim_settings.replications,
            };
            let result = sim::simulate(&config)?;
            let half = CI_SIGMAS * result.sum_std_error;
            let sum = result.sum_aoi();
            (
                result.mean_aoi[0],
                result.mean_aoi[1],
                Some((sum - half, sum + half)),
                Some(sim_settings.seed),
            )
        }
    };
    Ok(SweepRow {
        policy,
        rho1,
        rho2,
        mu,
        delta1,
        delta2,
        sum_aoi: delta1 + delta2,
        jain: jain_index(delta1, delta2)?,
        method,
        ci_low: ci.map(|c| c.0),
        ci_high: ci.map(|c| c.1),
        seed,
    })
}

/// Evaluates every (policy, grid point). Point failures are collected in the
/// report rather than aborting the sweep. Rows are sorted by `(policy, ρ1)`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport, Error> {
    spec.validate()?;
    let tasks: Vec<(PolicyId, Method, f64)> = spec
        .policies
        .iter()
        .flat_map(|&(p, m)| spec.rho1_grid.iter().map(move |&r| (p, m, r)))
        .collect();
    let results: Vec<_> = tasks
        .par_iter()
        .map(|&(policy, method, rho1)| {
            let rho2 = spec.axis.rho2_at(rho1);
            (policy, rho1, evaluate_point(policy, method, rho1, rho2, spec.mu, &spec.sim))
        })
        .collect();

    let mut report = SweepReport::default();
    for (policy, rho1, result) in results {
        match result {
            Ok(row) => report.rows.push(row),
            Err(e) => report.failures.push(SweepFailure {
                policy,
                rho1,
                message: e.to_string(),
            }),
        }
    }
    report.rows.sort_by(|a, b| {
        a.policy
            .cmp(&b.policy)
            .then(a.method.cmp(&b.method))
            .then(a.rho1.partial_cmp(&b.rho1).unwrap_or(Ordering::Equal))
    });
    Ok(report)
}

/// Achievable `(Δ1, Δ2)` pairs at fixed total load, sweeping `ρ1` over the
/// default grid. Closed form only; baselines have none.
pub fn tradeoff_curve(policy: PolicyId, total_rho: f64, mu: f64, num_points: usize) -> Result<Vec<(f64, f64)>, Error> {
    if !policy.has_analytic_model() {
        return Err(Error::UnsupportedPolicy(policy));
    }
    if !(total_rho > 0.0) {
        return Err(Error::InvalidSweep(format!("total load must be positive, got {total_rho}")));
    }
    let spec = SweepSpec {
        policies: vec![(policy, Method::ClosedForm)],
        ..SweepSpec::fixed_total(&[policy], total_rho, mu, num_points)
    };
    let report = run_sweep(&spec)?;
    if let Some(f) = report.failures.first() {
        return Err(Error::InvalidSweep(format!("rho1={}: {}", f.rho1, f.message)));
    }
    Ok(report.rows.iter().map(|r| (r.delta1, r.delta2)).collect())
}
