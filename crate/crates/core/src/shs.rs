//! Generic stochastic hybrid system (SHS) engine for average age of information.
//!
//! A model couples a finite continuous-time Markov chain over discrete states
//! with a continuous age vector `x`. Each transition fires at one of three
//! symbolic rates and resets the age vector through a binary matrix,
//! `x' = x · A`. Between transitions component `j` of `x` grows at rate
//! `b_q[j] ∈ {0, 1}`.
//!
//! Solving proceeds in two linear stages:
//!
//! 1. the stationary distribution `π` from the balance equations
//!    `π_q Σ_{out} λ = Σ_{in} λ π_from`, with the state-0 equation replaced by
//!    `Σ π = 1`;
//! 2. the correlation vectors `v_q` from
//!    `v_q Σ_{out} λ = b_q π_q + Σ_{in} λ v_from A`.
//!
//! The average age of the tracked source is then `Σ_q v_q[0]`.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::linalg::{self, DenseMatrix};
use crate::scalar::Scalar;

/// Absolute slack allowed below zero before a solution is rejected as negative.
pub const NONNEGATIVE_SLACK: f64 = 1e-9;

/// The three rates a transition may fire at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateSymbol {
    Lambda1,
    Lambda2,
    Mu,
}

impl RateSymbol {
    pub const ALL: [RateSymbol; 3] = [RateSymbol::Lambda1, RateSymbol::Lambda2, RateSymbol::Mu];
}

impl fmt::Display for RateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateSymbol::Lambda1 => "lambda1",
            RateSymbol::Lambda2 => "lambda2",
            RateSymbol::Mu => "mu",
        })
    }
}

#[derive(Debug, Error)]
pub enum ShsError {
    #[error("rate {rate} must be strictly positive, got {value}")]
    NonPositiveRate { rate: RateSymbol, value: String },
    #[error("invalid model: {}", join_diagnostics(.0))]
    InvalidModel(Vec<Diagnostic>),
    #[error("singular {stage} system (no pivot in column {column}); the model is not ergodic or not solvable")]
    SingularSystem { stage: &'static str, column: usize },
    #[error("negative {stage} solution at state {state}, component {component}: {value:e}")]
    NegativeSolution {
        stage: &'static str,
        state: usize,
        component: usize,
        value: f64,
    },
    #[error("stationary distribution has {got} entries, model has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Binary reset map `A` acting on row vectors, `x' = x · A`.
///
/// Entries are stored as raw bytes so that malformed maps can be represented
/// and reported by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResetMap {
    dim: usize,
    entries: Vec<u8>,
}

impl ResetMap {
    /// Builds the map from the assignment form `x'_j = x_{sources[j]}`,
    /// where `None` means `x'_j = 0`.
    pub fn from_sources(sources: &[Option<usize>]) -> Self {
        let dim = sources.len();
        let mut entries = vec![0u8; dim * dim];
        for (col, src) in sources.iter().enumerate() {
            if let Some(row) = src {
                assert!(*row < dim, "reset source index out of range");
                entries[row * dim + col] = 1;
            }
        }
        Self { dim, entries }
    }

    /// Builds the map from explicit matrix rows. Rows must have equal length
    /// equal to the row count; entry values are not checked here.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "reset map must be square");
            entries.extend_from_slice(row);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.dim.max(1)).map(<[u8]>::to_vec).collect()
    }

    /// Applies the map to a row vector.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|col| {
                (0..self.dim).fold(T::zero(), |acc, row| match self.entry(row, col) {
                    0 => acc,
                    e => acc + x[row].clone() * T::int(i64::from(e)),
                })
            })
            .collect()
    }
}

/// One rate-labelled transition of the discrete chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    /// Row index `l` in the originating transition table.
    pub label: usize,
    pub from: usize,
    pub to: usize,
    pub rate: RateSymbol,
    pub reset: ResetMap,
}

impl Transition {
    pub fn new(label: usize, from: usize, to: usize, rate: RateSymbol, reset: ResetMap) -> Self {
        Self {
            label,
            from,
            to,
            rate,
            reset,
        }
    }
}

/// A finite SHS model. Construction does not validate; see [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShsModel {
    num_states: usize,
    age_dim: usize,
    transitions: Vec<Transition>,
    growth: Vec<Vec<u8>>,
}

impl ShsModel {
    pub fn new(
        num_states: usize,
        age_dim: usize,
        transitions: Vec<Transition>,
        growth: Vec<Vec<u8>>,
    ) -> Self {
        Self {
            num_states,
            age_dim,
            transitions,
            growth,
        }
    }

    /// Model where every age component grows at unit rate in every state.
    pub fn with_unit_growth(num_states: usize, age_dim: usize, transitions: Vec<Transition>) -> Self {
        let growth = vec![vec![1u8; age_dim]; num_states];
        Self::new(num_states, age_dim, transitions, growth)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn age_dim(&self) -> usize {
        self.age_dim
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn growth(&self) -> &[Vec<u8>] {
        &self.growth
    }

    pub fn transition(&self, label: usize) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.label == label)
    }

    /// Copy of the model without the transitions for which `keep` is false.
    pub fn retain_transitions(&self, keep: impl Fn(&Transition) -> bool) -> Self {
        Self {
            transitions: self.transitions.iter().filter(|t| keep(t)).cloned().collect(),
            ..self.clone()
        }
    }

    /// Copy of the model with a transition replaced (matched by label).
    pub fn with_transition(&self, replacement: Transition) -> Self {
        let mut out = self.clone();
        for t in &mut out.transitions {
            if t.label == replacement.label {
                *t = replacement.clone();
            }
        }
        out
    }

    fn outgoing_rate<T: Scalar>(&self, state: usize, loads: &LoadPoint<T>) -> T {
        self.transitions
            .iter()
            .filter(|t| t.from == state)
            .fold(T::zero(), |acc, t| acc + loads.rate(t.rate))
    }
}

/// Arrival rates of both sources and the service rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadPoint<T> {
    lambda1: T,
    lambda2: T,
    mu: T,
}

impl<T: Scalar> LoadPoint<T> {
    pub fn new(lambda1: T, lambda2: T, mu: T) -> Result<Self, ShsError> {
        for (rate, value) in [
            (RateSymbol::Lambda1, &lambda1),
            (RateSymbol::Lambda2, &lambda2),
            (RateSymbol::Mu, &mu),
        ] {
            if *value <= T::zero() {
                return Err(ShsError::NonPositiveRate {
                    rate,
                    value: value.to_string(),
                });
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            mu,
        })
    }

    /// Builds the load point from per-source loads `ρ_c = λ_c / μ`.
    pub fn from_loads(rho1: T, rho2: T, mu: T) -> Result<Self, ShsError> {
        Self::new(rho1 * mu.clone(), rho2 * mu.clone(), mu)
    }

    pub fn lambda1(&self) -> &T {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &T {
        &self.lambda2
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    pub fn rho1(&self) -> T {
        self.lambda1.clone() / self.mu.clone()
    }

    pub fn rho2(&self) -> T {
        self.lambda2.clone() / self.mu.clone()
    }

    pub fn rho(&self) -> T {
        self.rho1() + self.rho2()
    }

    pub fn rate(&self, symbol: RateSymbol) -> T {
        match symbol {
            RateSymbol::Lambda1 => self.lambda1.clone(),
            RateSymbol::Lambda2 => self.lambda2.clone(),
            RateSymbol::Mu => self.mu.clone(),
        }
    }

    /// Exchanges the roles of the two sources.
    pub fn swapped(&self) -> Self {
        Self {
            lambda1: self.lambda2.clone(),
            lambda2: self.lambda1.clone(),
            mu: self.mu.clone(),
        }
    }

    /// Multiplies every rate by `factor` (> 0).
    pub fn scaled(&self, factor: T) -> Result<Self, ShsError> {
        Self::new(
            self.lambda1.clone() * factor.clone(),
            self.lambda2.clone() * factor.clone(),
            self.mu.clone() * factor,
        )
    }
}

/// Stationary probabilities of the discrete chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution<T> {
    probabilities: Vec<T>,
}

impl<T: Scalar> StationaryDistribution<T> {
    pub fn new(probabilities: Vec<T>) -> Self {
        Self { probabilities }
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// Relative residual of each balance equation, `|out − in| / max term`.
    pub fn balance_residuals(&self, model: &ShsModel, loads: &LoadPoint<T>) -> Vec<T> {
        (0..model.num_states())
            .map(|q| {
                let outflow = self.probabilities[q].clone() * model.outgoing_rate(q, loads);
                let mut scale = outflow.abs();
                let mut inflow = T::zero();
                for t in model.transitions().iter().filter(|t| t.to == q) {
                    let term = loads.rate(t.rate) * self.probabilities[t.from].clone();
                    if term.abs() > scale {
                        scale = term.abs();
                    }
                    inflow = inflow + term;
                }
                let diff = (outflow - inflow).abs();
                if scale.is_zero() {
                    diff
                } else {
                    diff / scale
                }
            })
            .collect()
    }
}

/// Stationary correlation vectors `v_q = E[x · 1{q(t) = q}]`, one row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    age_dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn num_states(&self) -> usize {
        self.values.len() / self.age_dim.max(1)
    }

    pub fn age_dim(&self) -> usize {
        self.age_dim
    }

    pub fn row(&self, state: usize) -> &[T] {
        &self.values[state * self.age_dim..(state + 1) * self.age_dim]
    }

    pub fn get(&self, state: usize, component: usize) -> &T {
        &self.values[state * self.age_dim + component]
    }

    /// `v_q[0]` for every state.
    pub fn first_column(&self) -> Vec<T> {
        (0..self.num_states()).map(|q| self.get(q, 0).clone()).collect()
    }

    /// `Σ_q v_q[0]`, the average age of the tracked source.
    pub fn average_aoi(&self) -> T {
        self.first_column().into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Relative residual of every correlation equation (row-major by state,
    /// then age component).
    pub fn residuals(
        &self,
        model: &ShsModel,
        loads: &LoadPoint<T>,
        pi: &StationaryDistribution<T>,
    ) -> Vec<T> {
        let dim = self.age_dim;
        let mut out = Vec::with_capacity(self.values.len());
        for q in 0..model.num_states() {
            let outflow = model.outgoing_rate(q, loads);
            let incoming: Vec<(T, Vec<T>)> = model
                .transitions()
                .iter()
                .filter(|t| t.to == q)
                .map(|t| (loads.rate(t.rate), t.reset.apply(self.row(t.from))))
                .collect();
            for j in 0..dim {
                let lhs = self.get(q, j).clone() * outflow.clone();
                let source = T::int(i64::from(model.growth()[q][j])) * pi.probabilities()[q].clone();
                let mut scale = lhs.abs();
                if source.abs() > scale {
                    scale = source.abs();
                }
                let mut rhs = source;
                for (rate, mapped) in &incoming {
                    let term = rate.clone() * mapped[j].clone();
                    if term.abs() > scale {
                        scale = term.abs();
                    }
                    rhs = rhs + term;
                }
                let diff = (lhs - rhs).abs();
                out.push(if scale.is_zero() { diff } else { diff / scale });
            }
        }
        out
    }
}

/// Structural problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    EmptyModel,
    StateOutOfRange { label: usize, state: usize },
    ResetDimension { label: usize, dim: usize, expected: usize },
    NonBinaryReset { label: usize, row: usize, col: usize, value: u8 },
    GrowthCount { expected: usize, found: usize },
    GrowthDimension { state: usize, len: usize, expected: usize },
    NonBinaryGrowth { state: usize, component: usize, value: u8 },
    Unreachable { target: usize, from: usize },
    UnusedRate(RateSymbol),
}

impl Diagnostic {
    /// Whether the problem prevents solving the model.
    pub fn is_error(&self) -> bool {
        !matches!(self, Diagnostic::UnusedRate(_))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyModel => write!(f, "model has no states or no age components"),
            Diagnostic::StateOutOfRange { label, state } => {
                write!(f, "transition l={label} references state {state} out of range")
            }
            Diagnostic::ResetDimension {
                label,
                dim,
                expected,
            } => write!(f, "transition l={label} reset map is {dim}x{dim}, expected {expected}x{expected}"),
            Diagnostic::NonBinaryReset {
                label,
                row,
                col,
                value,
            } => write!(f, "non-binary reset map in transition l={label}: entry ({row},{col}) = {value}"),
            Diagnostic::GrowthCount { expected, found } => {
                write!(f, "expected {expected} growth vectors, found {found}")
            }
            Diagnostic::GrowthDimension {
                state,
                len,
                expected,
            } => write!(f, "growth vector of state {state} has length {len}, expected {expected}"),
            Diagnostic::NonBinaryGrowth {
                state,
                component,
                value,
            } => write!(f, "non-binary growth rate in state {state}, component {component}: {value}"),
            Diagnostic::Unreachable { target, from } => {
                write!(f, "state {target} unreachable from state {from}")
            }
            Diagnostic::UnusedRate(rate) => write!(f, "rate symbol {rate} is never used"),
        }
    }
}

/// Reports structural problems: out-of-range states, malformed or non-binary
/// reset maps and growth vectors, unreachable states (the chain must be
/// strongly connected) and unused rate symbols.
pub fn validate_model(model: &ShsModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let n = model.num_states();
    let dim = model.age_dim();
    if n == 0 || dim == 0 {
        diags.push(Diagnostic::EmptyModel);
        return diags;
    }

    let mut edges_ok = true;
    for t in model.transitions() {
        for state in [t.from, t.to] {
            if state >= n {
                diags.push(Diagnostic::StateOutOfRange {
                    label: t.label,
                    state,
                });
                edges_ok = false;
            }
        }
        if t.reset.dim() != dim {
            diags.push(Diagnostic::ResetDimension {
                label: t.label,
                dim: t.reset.dim(),
                expected: dim,
            });
            continue;
        }
        for row in 0..dim {
            for col in 0..dim {
                let value = t.reset.entry(row, col);
                if value > 1 {
                    diags.push(Diagnostic::NonBinaryReset {
                        label: t.label,
                        row,
                        col,
                        value,
                    });
                }
            }
        }
    }

    if model.growth().len() != n {
        diags.push(Diagnostic::GrowthCount {
            expected: n,
            found: model.growth().len(),
        });
    }
    for (state, b) in model.growth().iter().enumerate() {
        if b.len() != dim {
            diags.push(Diagnostic::GrowthDimension {
                state,
                len: b.len(),
                expected: dim,
            });
        }
        for (component, &value) in b.iter().enumerate() {
            if value > 1 {
                diags.push(Diagnostic::NonBinaryGrowth {
                    state,
                    component,
                    value,
                });
            }
        }
    }

    if edges_ok {
        let reach: Vec<Vec<bool>> = (0..n).map(|s| reachable_from(model, s)).collect();
        for target in 0..n {
            if let Some(from) = (0..n).find(|&i| i != target && !reach[i][target]) {
                diags.push(Diagnostic::Unreachable { target, from });
            }
        }
    }

    for rate in RateSymbol::ALL {
        if !model.transitions().iter().any(|t| t.rate == rate) {
            diags.push(Diagnostic::UnusedRate(rate));
        }
    }
    diags
}

fn reachable_from(model: &ShsModel, start: usize) -> Vec<bool> {
    let mut seen = vec![false; model.num_states()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(s) = queue.pop_front() {
        for t in model.transitions().iter().filter(|t| t.from == s) {
            if !seen[t.to] {
                seen[t.to] = true;
                queue.push_back(t.to);
            }
        }
    }
    seen
}

fn ensure_valid(model: &ShsModel) -> Result<(), ShsError> {
    let errors: Vec<Diagnostic> = validate_model(model)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ShsError::InvalidModel(errors))
    }
}

/// Clamps round-off negatives to zero; rejects anything below the slack.
fn clamp_nonnegative<T: Scalar>(
    value: T,
    stage: &'static str,
    state: usize,
    component: usize,
) -> Result<T, ShsError> {
    if value >= T::zero() {
        Ok(value)
    } else if value >= -T::lit(NONNEGATIVE_SLACK) {
        Ok(T::zero())
    } else {
        Err(ShsError::NegativeSolution {
            stage,
            state,
            component,
            value: value.to_f64_lossy(),
        })
    }
}

/// Solves the balance equations together with the normalization condition.
pub fn stationary_distribution<T: Scalar>(
    model: &ShsModel,
    loads: &LoadPoint<T>,
) -> Result<StationaryDistribution<T>, ShsError> {
    ensure_valid(model)?;
    let n = model.num_states();
    let mut a = DenseMatrix::zeros(n);
    for q in 1..n {
        a.add_to(q, q, model.outgoing_rate(q, loads));
    }
    for t in model.transitions().iter().filter(|t| t.to != 0) {
        a.add_to(t.to, t.from, -loads.rate(t.rate));
    }
    for col in 0..n {
        a.set(0, col, T::one());
    }
    let mut rhs = vec![T::zero(); n];
    rhs[0] = T::one();

    let solution = linalg::solve(&a, &rhs).map_err(|s| ShsError::SingularSystem {
        stage: "balance",
        column: s.column,
    })?;
    let probabilities = solution
        .into_iter()
        .enumerate()
        .map(|(q, p)| clamp_nonnegative(p, "stationary", q, 0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StationaryDistribution { probabilities })
}

/// Solves for the correlation vectors given the stationary distribution.
///
/// Unknowns are ordered row-major by state, then age component.
pub fn correlation_vectors<T: Scalar>(
    model: &ShsModel,
    loads: &LoadPoint<T>,
    pi: &StationaryDistribution<T>,
) -> Result<CorrelationMatrix<T>, ShsError> {
    ensure_valid(model)?;
    let n = model.num_states();
    if pi.len() != n {
        return Err(ShsError::DimensionMismatch {
            expected: n,
            got: pi.len(),
        });
    }
    let dim = model.age_dim();
    let size = n * dim;
    let mut a = DenseMatrix::zeros(size);
    let mut rhs = vec![T::zero(); size];

    for q in 0..n {
        let outflow = model.outgoing_rate(q, loads);
        for j in 0..dim {
            let row = q * dim + j;
            a.add_to(row, row, outflow.clone());
            if model.growth()[q][j] != 0 {
                rhs[row] = pi.probabilities()[q].clone();
            }
        }
    }
    for t in model.transitions() {
        let rate = loads.rate(t.rate);
        for j in 0..dim {
            let row = t.to * dim + j;
            for i in 0..dim {
                let entry = t.reset.entry(i, j);
                if entry != 0 {
                    a.add_to(row, t.from * dim + i, -(rate.clone() * T::int(i64::from(entry))));
                }
            }
        }
    }

    let solution = linalg::solve(&a, &rhs).map_err(|s| ShsError::SingularSystem {
        stage: "correlation",
        column: s.column,
    })?;
    let values = solution
        .into_iter()
        .enumerate()
        .map(|(idx, v)| clamp_nonnegative(v, "correlation", idx / dim, idx % dim))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationMatrix {
        age_dim: dim,
        values,
    })
}

/// Both solution stages for one model and load point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShsSolution<T> {
    pub stationary: StationaryDistribution<T>,
    pub correlation: CorrelationMatrix<T>,
}

pub fn solve<T: Scalar>(model: &ShsModel, loads: &LoadPoint<T>) -> Result<ShsSolution<T>, ShsError> {
    let stationary = stationary_distribution(model, loads)?;
    let correlation = correlation_vectors(model, loads, &stationary)?;
    Ok(ShsSolution {
        stationary,
        correlation,
    })
}

/// Average age of information of the tracked source (age component 0).
pub fn average_aoi<T: Scalar>(model: &ShsModel, loads: &LoadPoint<T>) -> Result<T, ShsError> {
    Ok(solve(model, loads)?.correlation.average_aoi())
}
