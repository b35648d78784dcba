//! SHS models of the three source-aware packet management policies and the
//! dispatch that evaluates either source with either analytic backend.
//!
//! The models track the age of source 1 only. Source 2 is evaluated by
//! swapping the two arrival rates and reusing the same model.

use std::fmt;
use std::str::FromStr;

use crate::closed_form;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::shs::{self, LoadPoint, RateSymbol, ResetMap, ShsModel, Transition};

/// Packet management policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyId {
    /// Waiting room with one slot per source; same-source waiting packet replaced.
    Policy1,
    /// At most one packet per source in the system; self-preemption in service.
    Policy2,
    /// As Policy 2, but a same-source arrival during service is discarded.
    Policy3,
    /// Any arrival preempts the packet in service.
    LcfsS,
    /// One waiting slot; any arrival replaces the waiting packet.
    LcfsW,
    /// No waiting room; preemption in service by equal or higher priority.
    PpNw,
    /// One waiting slot with priority replacement; no preemption in service.
    PpWw,
}

impl PolicyId {
    pub const ALL: [PolicyId; 7] = [
        PolicyId::Policy1,
        PolicyId::Policy2,
        PolicyId::Policy3,
        PolicyId::LcfsS,
        PolicyId::LcfsW,
        PolicyId::PpNw,
        PolicyId::PpWw,
    ];

    pub const SOURCE_AWARE: [PolicyId; 3] = [PolicyId::Policy1, PolicyId::Policy2, PolicyId::Policy3];

    /// Whether an SHS model and closed form exist for this policy.
    pub fn has_analytic_model(self) -> bool {
        matches!(self, PolicyId::Policy1 | PolicyId::Policy2 | PolicyId::Policy3)
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Policy1 => "p1",
            PolicyId::Policy2 => "p2",
            PolicyId::Policy3 => "p3",
            PolicyId::LcfsS => "lcfs-s",
            PolicyId::LcfsW => "lcfs-w",
            PolicyId::PpNw => "pp-nw",
            PolicyId::PpWw => "pp-ww",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let id = match norm.as_str() {
            "p1" | "policy1" => PolicyId::Policy1,
            "p2" | "policy2" => PolicyId::Policy2,
            "p3" | "policy3" => PolicyId::Policy3,
            "lcfs-s" => PolicyId::LcfsS,
            "lcfs-w" => PolicyId::LcfsW,
            "pp-nw" => PolicyId::PpNw,
            "pp-ww" => PolicyId::PpWw,
            _ => return Err(Error::Parse(format!("unknown policy '{s}'"))),
        };
        Ok(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceView {
    Source1,
    Source2,
}

/// Analytic backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyticMethod {
    ShsEngine,
    ClosedForm,
}

fn reset(sources: &[Option<usize>]) -> ResetMap {
    ResetMap::from_sources(sources)
}

/// Policy 1: states (server, first waiting, second waiting) are
/// 0 idle, 1 busy, 2 busy+[s1], 3 busy+[s2], 4 busy+[s1,s2], 5 busy+[s2,s1].
///
/// Age vector: `[Δ1, age if in-service delivered, first waiting, second waiting]`.
pub fn build_policy1_model() -> ShsModel {
    use RateSymbol::{Lambda1 as L1, Lambda2 as L2, Mu};
    const N: Option<usize> = None;
    let (x0, x1, x2, x3) = (Some(0), Some(1), Some(2), Some(3));
    let transitions = vec![
        Transition::new(1, 0, 1, L1, reset(&[x0, N, x2, x3])),
        Transition::new(2, 0, 1, L2, reset(&[x0, x0, x2, x3])),
        Transition::new(3, 1, 0, Mu, reset(&[x1, x1, x2, x3])),
        Transition::new(4, 1, 2, L1, reset(&[x0, x1, N, x3])),
        Transition::new(5, 1, 3, L2, reset(&[x0, x1, x1, x3])),
        Transition::new(6, 2, 1, Mu, reset(&[x1, x2, x2, x3])),
        Transition::new(7, 3, 1, Mu, reset(&[x1, x1, x2, x3])),
        Transition::new(8, 2, 2, L1, reset(&[x0, x1, N, x3])),
        Transition::new(9, 2, 4, L2, reset(&[x0, x1, x2, x2])),
        Transition::new(10, 3, 5, L1, reset(&[x0, x1, x1, N])),
        Transition::new(11, 4, 4, L1, reset(&[x0, x1, N, N])),
        Transition::new(12, 5, 5, L1, reset(&[x0, x1, x1, N])),
        Transition::new(13, 4, 3, Mu, reset(&[x1, x2, x2, x3])),
        Transition::new(14, 5, 2, Mu, reset(&[x1, x1, x3, x3])),
    ];
    ShsModel::with_unit_growth(6, 4, transitions)
}

/// Policy 2: states 0 idle, 1 s1 in service, 2 s2 in service,
/// 3 s1 in service + s2 waiting, 4 s2 in service + s1 waiting.
///
/// Age vector: `[Δ1, age if in-service delivered, age if waiting delivered]`.
pub fn build_policy2_model() -> ShsModel {
    use RateSymbol::{Lambda1 as L1, Lambda2 as L2, Mu};
    const N: Option<usize> = None;
    let (x0, x1, x2) = (Some(0), Some(1), Some(2));
    let transitions = vec![
        Transition::new(1, 0, 1, L1, reset(&[x0, N, x2])),
        Transition::new(2, 0, 2, L2, reset(&[x0, x0, x2])),
        Transition::new(3, 1, 1, L1, reset(&[x0, N, x2])),
        Transition::new(4, 1, 3, L2, reset(&[x0, x1, x1])),
        Transition::new(5, 2, 4, L1, reset(&[x0, x0, N])),
        Transition::new(6, 3, 3, L1, reset(&[x0, N, N])),
        Transition::new(7, 4, 4, L1, reset(&[x0, x0, N])),
        Transition::new(8, 1, 0, Mu, reset(&[x1, x1, x2])),
        Transition::new(9, 2, 0, Mu, reset(&[x0, x1, x2])),
        Transition::new(10, 3, 2, Mu, reset(&[x1, x1, x2])),
        Transition::new(11, 4, 1, Mu, reset(&[x0, x2, x2])),
    ];
    ShsModel::with_unit_growth(5, 3, transitions)
}

/// Policy 3: the Policy 2 chain where a source-1 arrival during source-1
/// service is discarded (transitions 3 and 6 leave the ages untouched).
pub fn build_policy3_model() -> ShsModel {
    let (x0, x1, x2) = (Some(0), Some(1), Some(2));
    build_policy2_model()
        .with_transition(Transition::new(3, 1, 1, RateSymbol::Lambda1, reset(&[x0, x1, x2])))
        .with_transition(Transition::new(6, 3, 3, RateSymbol::Lambda1, reset(&[x0, x1, x1])))
}

/// SHS model of a source-aware policy; baselines have none.
pub fn build_model(policy: PolicyId) -> Result<ShsModel, Error> {
    match policy {
        PolicyId::Policy1 => Ok(build_policy1_model()),
        PolicyId::Policy2 => Ok(build_policy2_model()),
        PolicyId::Policy3 => Ok(build_policy3_model()),
        other => Err(Error::UnsupportedPolicy(other)),
    }
}

/// Closed-form average AoI of source 1 for a source-aware policy.
pub fn closed_form_aoi<T: Scalar>(policy: PolicyId, rho1: T, rho2: T, mu: T) -> Result<T, Error> {
    let value = match policy {
        PolicyId::Policy1 => closed_form::theorem1_aoi(rho1, rho2, mu)?,
        PolicyId::Policy2 => closed_form::theorem2_aoi(rho1, rho2, mu)?,
        PolicyId::Policy3 => closed_form::theorem3_aoi(rho1, rho2, mu)?,
        other => return Err(Error::UnsupportedPolicy(other)),
    };
    Ok(value)
}

/// Closed-form per-state `v_q[0]` values for a source-aware policy.
pub fn closed_form_vq0<T: Scalar>(policy: PolicyId, rho1: T, rho2: T, mu: T) -> Result<Vec<T>, Error> {
    let value = match policy {
        PolicyId::Policy1 => closed_form::policy1_vq0(rho1, rho2, mu)?,
        PolicyId::Policy2 => closed_form::policy2_vq0(rho1, rho2, mu)?,
        PolicyId::Policy3 => closed_form::policy3_vq0(rho1, rho2, mu)?,
        other => return Err(Error::UnsupportedPolicy(other)),
    };
    Ok(value)
}

/// Average AoI of the chosen source.
pub fn average_aoi_for<T: Scalar>(
    policy: PolicyId,
    view: SourceView,
    loads: &LoadPoint<T>,
    method: AnalyticMethod,
) -> Result<T, Error> {
    let model = build_model(policy)?;
    let loads = match view {
        SourceView::Source1 => loads.clone(),
        SourceView::Source2 => loads.swapped(),
    };
    match method {
        AnalyticMethod::ShsEngine => Ok(shs::average_aoi(&model, &loads)?),
        AnalyticMethod::ClosedForm => closed_form_aoi(policy, loads.rho1(), loads.rho2(), loads.mu().clone()),
    }
}

/// `(Δ1, Δ2)` for one load point.
pub fn average_aoi_pair<T: Scalar>(
    policy: PolicyId,
    loads: &LoadPoint<T>,
    method: AnalyticMethod,
) -> Result<(T, T), Error> {
    Ok((
        average_aoi_for(policy, SourceView::Source1, loads, method)?,
        average_aoi_for(policy, SourceView::Source2, loads, method)?,
    ))
}
