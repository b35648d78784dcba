//! Event-driven simulation of the two-source queue under all seven policies.
//!
//! Arrivals of each source are Poisson and service times exponential. The
//! age of each source is integrated exactly as a piecewise-linear sawtooth.
//! Each replication owns a ChaCha8 stream selected by `(seed, replication)`,
//! so results are bit-reproducible across runs and platforms.

mod state;

pub use state::{Delivery, Event, Packet, Source, StepEffects, SystemState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::policy::PolicyId;
use crate::shs::LoadPoint;

/// Smallest accepted event horizon per replication.
pub const MIN_HORIZON_EVENTS: u64 = 10_000;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("illegal event: {0}")]
    IllegalEvent(String),
    #[error("negative elapsed time {0}")]
    NegativeElapsed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub policy: PolicyId,
    pub loads: LoadPoint<f64>,
    /// Arrivals plus service completions processed per replication.
    pub horizon_events: u64,
    /// Leading fraction of simulated time excluded from the averages.
    pub warmup_fraction: f64,
    pub seed: u64,
    pub replications: usize,
}

impl SimConfig {
    pub fn new(policy: PolicyId, loads: LoadPoint<f64>) -> Self {
        Self {
            policy,
            loads,
            horizon_events: 1_000_000,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            seed: 1,
            replications: 16,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon_events < MIN_HORIZON_EVENTS {
            return Err(SimError::InvalidConfig(format!(
                "horizon_events must be at least {MIN_HORIZON_EVENTS}, got {}",
                self.horizon_events
            )));
        }
        if self.replications == 0 {
            return Err(SimError::InvalidConfig("replications must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(SimError::InvalidConfig(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

/// Time-average ages measured in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationResult {
    pub mean_aoi: [f64; 2],
    /// Length of the measurement window (after warmup).
    pub measured_time: f64,
    pub deliveries: [u64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Mean over replications of the per-source time-average age.
    pub mean_aoi: [f64; 2],
    /// Standard error across replications; zero when only one replication ran.
    pub std_error: [f64; 2],
    /// Standard error of the per-replication sum `Δ1 + Δ2`.
    pub sum_std_error: f64,
    pub replications: usize,
    /// Total measured simulated time over all replications.
    pub simulated_time: f64,
    pub per_replication: Vec<ReplicationResult>,
}

impl SimResult {
    pub fn sum_aoi(&self) -> f64 {
        self.mean_aoi[0] + self.mean_aoi[1]
    }

    /// `mean ± k·SE` for one source.
    pub fn interval(&self, source: Source, k: f64) -> (f64, f64) {
        let i = source.index();
        (self.mean_aoi[i] - k * self.std_error[i], self.mean_aoi[i] + k * self.std_error[i])
    }

    /// Mean and standard error over replications of any per-replication statistic.
    pub fn statistic(&self, f: impl Fn(&ReplicationResult) -> f64) -> (f64, f64) {
        let values: Vec<f64> = self.per_replication.iter().map(f).collect();
        mean_and_std_error(&values)
    }

    fn from_replications(per_replication: Vec<ReplicationResult>) -> Self {
        let col = |i: usize| per_replication.iter().map(|r| r.mean_aoi[i]).collect::<Vec<_>>();
        let (m1, se1) = mean_and_std_error(&col(0));
        let (m2, se2) = mean_and_std_error(&col(1));
        let sums: Vec<f64> = per_replication.iter().map(|r| r.mean_aoi[0] + r.mean_aoi[1]).collect();
        let (_, sum_se) = mean_and_std_error(&sums);
        Self {
            mean_aoi: [m1, m2],
            std_error: [se1, se2],
            sum_std_error: sum_se,
            replications: per_replication.len(),
            simulated_time: per_replication.iter().map(|r| r.measured_time).sum(),
            per_replication,
        }
    }
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Area under a unit-slope age curve starting at `prev_aoi` over `elapsed`.
pub fn aoi_area_increment(prev_aoi: f64, elapsed: f64) -> Result<f64, SimError> {
    if elapsed < 0.0 {
        return Err(SimError::NegativeElapsed(elapsed));
    }
    Ok(area(prev_aoi, elapsed))
}

#[inline]
fn area(prev_aoi: f64, elapsed: f64) -> f64 {
    prev_aoi * elapsed + 0.5 * elapsed * elapsed
}

/// Random stream of replication `index` under `seed`.
pub fn replication_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Exponential variate by inverse transform.
#[inline]
fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

struct Outcome {
    end_time: f64,
    area: [f64; 2],
    deliveries: [u64; 2],
}

/// Runs one replication. Ages are integrated from `window_start` on; pass
/// `f64::INFINITY` to skip integration entirely.
fn run_replication(
    config: &SimConfig,
    index: usize,
    window_start: f64,
    mut on_delivery: Option<&mut dyn FnMut(&Delivery)>,
) -> Outcome {
    let mut rng = replication_rng(config.seed, index);
    let rates = [*config.loads.lambda1(), *config.loads.lambda2()];
    let mu = *config.loads.mu();

    let mut state = SystemState::new(config.policy);
    let mut now = 0.0_f64;
    let mut next_arrival = [exponential(&mut rng, rates[0]), exponential(&mut rng, rates[1])];
    let mut next_completion = f64::INFINITY;
    let mut area_acc = [0.0; 2];
    let mut deliveries = [0u64; 2];

    for _ in 0..config.horizon_events {
        // Completions win ties, then source 1 before source 2.
        let event = if next_completion <= next_arrival[0] && next_completion <= next_arrival[1] {
            Event::ServiceCompletion { time: next_completion }
        } else if next_arrival[0] <= next_arrival[1] {
            Event::Arrival {
                source: Source::S1,
                time: next_arrival[0],
            }
        } else {
            Event::Arrival {
                source: Source::S2,
                time: next_arrival[1],
            }
        };
        let t = event.time();

        if t > window_start {
            let start = now.max(window_start);
            for source in Source::BOTH {
                area_acc[source.index()] += area(state.age(source, start), t - start);
            }
        }

        let effects = state.apply(event).expect("scheduled events are consistent with the state");
        if let Event::Arrival { source, .. } = event {
            next_arrival[source.index()] = t + exponential(&mut rng, rates[source.index()]);
        }
        if effects.service_started {
            next_completion = t + exponential(&mut rng, mu);
        } else if state.server().is_none() {
            next_completion = f64::INFINITY;
        }
        if let Some(d) = effects.delivered {
            if t >= window_start {
                deliveries[d.source.index()] += 1;
            }
            if let Some(cb) = on_delivery.as_deref_mut() {
                cb(&d);
            }
        }
        now = t;
    }

    Outcome {
        end_time: now,
        area: area_acc,
        deliveries,
    }
}

fn replicate(
    config: &SimConfig,
    index: usize,
    on_delivery: Option<&mut dyn FnMut(&Delivery)>,
) -> ReplicationResult {
    // The warmup is a fraction of simulated time, which is only known after
    // the horizon is reached: a first pass finds the end time, a second pass
    // on the same stream integrates the window.
    let window_start = if config.warmup_fraction > 0.0 {
        config.warmup_fraction * run_replication(config, index, f64::INFINITY, None).end_time
    } else {
        0.0
    };
    let out = run_replication(config, index, window_start, on_delivery);
    let measured_time = out.end_time - window_start;
    ReplicationResult {
        mean_aoi: [out.area[0] / measured_time, out.area[1] / measured_time],
        measured_time,
        deliveries: out.deliveries,
    }
}

/// Runs all replications (in parallel) and merges them in replication order.
pub fn simulate(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let per_replication: Vec<ReplicationResult> = (0..config.replications)
        .into_par_iter()
        .map(|i| replicate(config, i, None))
        .collect();
    Ok(SimResult::from_replications(per_replication))
}

/// As [`simulate`], running replications sequentially and reporting every
/// delivery as `(replication, delivery)`.
pub fn simulate_traced(
    config: &SimConfig,
    mut sink: impl FnMut(usize, &Delivery),
) -> Result<SimResult, SimError> {
    config.validate()?;
    let mut per_replication = Vec::with_capacity(config.replications);
    for i in 0..config.replications {
        let mut cb = |d: &Delivery| sink(i, d);
        per_replication.push(replicate(config, i, Some(&mut cb)));
    }
    Ok(SimResult::from_replications(per_replication))
}
