//! Occupancy state of the queue and the per-policy event rules.

use std::fmt;

use crate::policy::PolicyId;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    S1,
    S2,
}

impl Source {
    pub const BOTH: [Source; 2] = [Source::S1, Source::S2];

    pub fn index(self) -> usize {
        match self {
            Source::S1 => 0,
            Source::S2 => 1,
        }
    }

    /// Priority used by the PP-NW and PP-WW baselines: source 2 is higher.
    pub fn priority(self) -> u8 {
        match self {
            Source::S1 => 0,
            Source::S2 => 1,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub source: Source,
    pub generated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Arrival { source: Source, time: f64 },
    ServiceCompletion { time: f64 },
}

impl Event {
    pub fn time(&self) -> f64 {
        match *self {
            Event::Arrival { time, .. } | Event::ServiceCompletion { time } => time,
        }
    }
}

/// A packet handed to the sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub source: Source,
    pub generated: f64,
    pub delivered: f64,
}

/// What an event did to the system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepEffects {
    pub delivered: Option<Delivery>,
    /// A packet entered service (fresh service time needed).
    pub service_started: bool,
    /// A packet left the system without delivery (discarded arrival or
    /// replaced/preempted packet).
    pub dropped: Option<Packet>,
}

/// Server, waiting room (head first) and per-source last delivered
/// generation time `U_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    policy: PolicyId,
    server: Option<Packet>,
    waiting: Vec<Packet>,
    last_delivered: [f64; 2],
    now: f64,
}

impl SystemState {
    pub fn new(policy: PolicyId) -> Self {
        Self {
            policy,
            server: None,
            waiting: Vec::with_capacity(2),
            last_delivered: [0.0; 2],
            now: 0.0,
        }
    }

    /// Builds a state directly, mainly for tests. The result is checked
    /// against the policy's occupancy rules.
    pub fn from_parts(policy: PolicyId, server: Option<Packet>, waiting: Vec<Packet>) -> Result<Self, SimError> {
        let state = Self {
            policy,
            server,
            waiting,
            last_delivered: [0.0; 2],
            now: 0.0,
        };
        state.check_invariants().map_err(SimError::IllegalEvent)?;
        Ok(state)
    }

    pub fn policy(&self) -> PolicyId {
        self.policy
    }

    pub fn server(&self) -> Option<&Packet> {
        self.server.as_ref()
    }

    pub fn waiting(&self) -> &[Packet] {
        &self.waiting
    }

    pub fn last_delivered(&self, source: Source) -> f64 {
        self.last_delivered[source.index()]
    }

    /// Current age `t − U_c` at time `t`.
    pub fn age(&self, source: Source, time: f64) -> f64 {
        time - self.last_delivered[source.index()]
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn occupancy(&self) -> usize {
        usize::from(self.server.is_some()) + self.waiting.len()
    }

    /// Waiting-room capacity of the policy.
    pub fn capacity(policy: PolicyId) -> usize {
        match policy {
            PolicyId::Policy1 => 2,
            PolicyId::Policy2 | PolicyId::Policy3 | PolicyId::LcfsW | PolicyId::PpWw => 1,
            PolicyId::LcfsS | PolicyId::PpNw => 0,
        }
    }

    /// Verifies occupancy rules; returns a description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.server.is_none() && !self.waiting.is_empty() {
            return Err("server idle while packets wait".into());
        }
        let cap = Self::capacity(self.policy);
        if self.waiting.len() > cap {
            return Err(format!("{} waiting packets exceed capacity {cap}", self.waiting.len()));
        }
        let same_source_waiting = self.waiting.len() == 2 && self.waiting[0].source == self.waiting[1].source;
        if same_source_waiting {
            return Err("two waiting packets of the same source".into());
        }
        if matches!(self.policy, PolicyId::Policy2 | PolicyId::Policy3) {
            if let (Some(s), Some(w)) = (self.server, self.waiting.first()) {
                if s.source == w.source {
                    return Err("two packets of the same source in the system".into());
                }
            }
        }
        Ok(())
    }

    /// Applies one event in place.
    pub fn apply(&mut self, event: Event) -> Result<StepEffects, SimError> {
        let time = event.time();
        if !(time >= self.now) {
            return Err(SimError::IllegalEvent(format!(
                "event at {time} precedes current time {}",
                self.now
            )));
        }
        self.now = time;
        match event {
            Event::Arrival { source, time } => Ok(self.arrive(Packet { source, generated: time })),
            Event::ServiceCompletion { time } => self.complete(time),
        }
    }

    /// Pure form of [`SystemState::apply`].
    pub fn step(&self, event: Event) -> Result<(SystemState, StepEffects), SimError> {
        let mut next = self.clone();
        let effects = next.apply(event)?;
        Ok((next, effects))
    }

    fn complete(&mut self, time: f64) -> Result<StepEffects, SimError> {
        let done = self
            .server
            .take()
            .ok_or_else(|| SimError::IllegalEvent("service completion while idle".into()))?;
        let slot = &mut self.last_delivered[done.source.index()];
        if done.generated > *slot {
            *slot = done.generated;
        }
        let mut effects = StepEffects {
            delivered: Some(Delivery {
                source: done.source,
                generated: done.generated,
                delivered: time,
            }),
            ..StepEffects::default()
        };
        if !self.waiting.is_empty() {
            self.server = Some(self.waiting.remove(0));
            effects.service_started = true;
        }
        Ok(effects)
    }

    fn arrive(&mut self, packet: Packet) -> StepEffects {
        let mut effects = StepEffects::default();
        let Some(serving) = self.server else {
            self.server = Some(packet);
            effects.service_started = true;
            return effects;
        };
        match self.policy {
            PolicyId::Policy1 => {
                effects.dropped = self.replace_or_enqueue_same_source(packet);
            }
            PolicyId::Policy2 => {
                if serving.source == packet.source {
                    effects.dropped = self.server.replace(packet);
                    effects.service_started = true;
                } else {
                    effects.dropped = self.replace_or_enqueue_same_source(packet);
                }
            }
            PolicyId::Policy3 => {
                if serving.source == packet.source {
                    effects.dropped = Some(packet);
                } else {
                    effects.dropped = self.replace_or_enqueue_same_source(packet);
                }
            }
            PolicyId::LcfsS => {
                effects.dropped = self.server.replace(packet);
                effects.service_started = true;
            }
            PolicyId::LcfsW => {
                effects.dropped = self.waiting.pop();
                self.waiting.push(packet);
            }
            PolicyId::PpNw => {
                if packet.source.priority() >= serving.source.priority() {
                    effects.dropped = self.server.replace(packet);
                    effects.service_started = true;
                } else {
                    effects.dropped = Some(packet);
                }
            }
            PolicyId::PpWw => match self.waiting.first().copied() {
                None => self.waiting.push(packet),
                Some(w) if packet.source.priority() >= w.source.priority() => {
                    self.waiting[0] = packet;
                    effects.dropped = Some(w);
                }
                Some(_) => effects.dropped = Some(packet),
            },
        }
        effects
    }

    /// Replaces the waiting packet of the same source in place, or appends.
    fn replace_or_enqueue_same_source(&mut self, packet: Packet) -> Option<Packet> {
        match self.waiting.iter_mut().find(|w| w.source == packet.source) {
            Some(slot) => Some(std::mem::replace(slot, packet)),
            None => {
                self.waiting.push(packet);
                None
            }
        }
    }
}
