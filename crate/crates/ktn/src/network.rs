//! Stochastic networks over energy landscapes: states are local minima, edges are
//! saddles, and pairwise rates follow the Arrhenius form
//! `L_ij = (k_ij/k_i) * exp(-(V_ij - V_i)/T)`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// 1-based state identifier, matching the ids used in input files.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct StateId(pub u32);

impl StateId {
    /// 0-based index into per-state arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> StateId {
        StateId(i as u32 + 1)
    }
}

impl std::fmt::Display for StateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 0-based edge identifier (index into the edge list).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A local minimum: potential `V_i` and temperature-independent prefactor `k_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateRecord {
    pub id: StateId,
    pub potential: f64,
    pub prefactor: f64,
}

impl StateRecord {
    pub fn new(id: u32, potential: f64) -> Self {
        StateRecord {
            id: StateId(id),
            potential,
            prefactor: 1.0,
        }
    }
}

/// A saddle between minima `a` and `b` (stored with `a < b`): potential `V_ij` and a
/// single prefactor `k_ij` shared by both directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRecord {
    pub a: StateId,
    pub b: StateId,
    pub saddle: f64,
    pub prefactor: f64,
}

impl EdgeRecord {
    pub fn new(a: u32, b: u32, saddle: f64) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        EdgeRecord {
            a: StateId(a),
            b: StateId(b),
            saddle,
            prefactor: 1.0,
        }
    }

    pub fn other(&self, s: StateId) -> StateId {
        if s == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, s: StateId) -> bool {
        s == self.a || s == self.b
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network must contain at least one state")]
    Empty,
    #[error("duplicate state id {0}")]
    DuplicateStateId(u32),
    #[error("state ids must be contiguous 1..{n}: missing id {missing}")]
    NonContiguousIds { n: usize, missing: u32 },
    #[error("edge ({0}, {1}) references unknown state id")]
    UnknownStateId(u32, u32),
    #[error("self-loop on state {0}")]
    SelfLoop(u32),
    #[error("duplicate edge between states {0} and {1}")]
    DuplicateEdge(u32, u32),
    #[error("non-finite potential on state {0}")]
    NonFinitePotential(u32),
    #[error("non-finite saddle potential on edge ({0}, {1})")]
    NonFiniteSaddle(u32, u32),
    #[error("prefactor must be positive and finite (state {0})")]
    BadStatePrefactor(u32),
    #[error("prefactor must be positive and finite (edge ({0}, {1}))")]
    BadEdgePrefactor(u32, u32),
    #[error(
        "saddle of edge ({a}, {b}) lies at {saddle} which is not above both minima \
         ({va} and {vb})"
    )]
    SaddleBelowMinimum {
        a: u32,
        b: u32,
        saddle: f64,
        va: f64,
        vb: f64,
    },
    #[error(
        "network is disconnected ({components} components); extract the component of \
         interest with connected_component first"
    )]
    Disconnected { components: usize },
    #[error("invalid state id {0} (network has {1} states)")]
    InvalidStateId(u32, usize),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("full-triple genericness check is O(n*m) = {0} values, above the guard; use the incident check")]
    TripleCheckTooLarge(usize),
}

/// Where a compared value came from, for genericness diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueLocus {
    State(StateId),
    Saddle(StateId, StateId),
    /// `V_ij - V_k`: saddle of `edge` minus potential of `state`.
    Difference {
        edge: (StateId, StateId),
        state: StateId,
    },
}

impl std::fmt::Display for ValueLocus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueLocus::State(s) => write!(f, "V({s})"),
            ValueLocus::Saddle(a, b) => write!(f, "V({a},{b})"),
            ValueLocus::Difference {
                edge: (a, b),
                state,
            } => write!(f, "V({a},{b})-V({state})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OffendingPair {
    pub value_a: f64,
    pub value_b: f64,
    pub locus_a: ValueLocus,
    pub locus_b: ValueLocus,
}

/// Outcome of the distinctness checks that the spectrum construction relies on:
/// state potentials, saddle potentials, and barrier differences must be pairwise
/// distinct for the optimal picks to be unique.
#[derive(Clone, Debug)]
pub struct GenericnessReport {
    pub distinct_state_potentials: bool,
    pub distinct_saddle_potentials: bool,
    pub distinct_differences: bool,
    pub offending_pairs: Vec<OffendingPair>,
    pub rel_tol: f64,
}

impl GenericnessReport {
    pub fn is_generic(&self) -> bool {
        self.distinct_state_potentials
            && self.distinct_saddle_potentials
            && self.distinct_differences
    }
}

/// Parsed and structurally validated network that may still be disconnected.
///
/// This is what file readers produce; `Network` (guaranteed connected) is obtained via
/// `TryFrom` or by taking a `connected_component`.
#[derive(Clone, Debug)]
pub struct NetworkData {
    states: Vec<StateRecord>,
    edges: Vec<EdgeRecord>,
    adjacency: Vec<Vec<EdgeId>>,
}

/// Old-id to new-id correspondence produced by sub-network extraction.
#[derive(Clone, Debug)]
pub struct IdRemap {
    /// Indexed by old state index; `None` if the state was dropped.
    pub old_to_new: Vec<Option<StateId>>,
    /// Indexed by new state index.
    pub new_to_old: Vec<StateId>,
}

impl IdRemap {
    pub fn identity(n: usize) -> IdRemap {
        IdRemap {
            old_to_new: (0..n).map(|i| Some(StateId::from_index(i))).collect(),
            new_to_old: (0..n).map(StateId::from_index).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.old_to_new.len() == self.new_to_old.len()
            && self
                .new_to_old
                .iter()
                .enumerate()
                .all(|(i, s)| s.index() == i)
    }
}

impl NetworkData {
    pub fn new(mut states: Vec<StateRecord>, edges: Vec<EdgeRecord>) -> Result<Self, NetworkError> {
        if states.is_empty() {
            return Err(NetworkError::Empty);
        }
        states.sort_by_key(|s| s.id);
        let n = states.len();
        for (i, s) in states.iter().enumerate() {
            let expected = StateId::from_index(i);
            if s.id == expected {
                continue;
            }
            if i > 0 && states[i - 1].id == s.id {
                return Err(NetworkError::DuplicateStateId(s.id.0));
            }
            return Err(NetworkError::NonContiguousIds {
                n,
                missing: expected.0,
            });
        }
        for s in &states {
            if !s.potential.is_finite() {
                return Err(NetworkError::NonFinitePotential(s.id.0));
            }
            if !(s.prefactor.is_finite() && s.prefactor > 0.0) {
                return Err(NetworkError::BadStatePrefactor(s.id.0));
            }
        }

        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen: HashMap<(u32, u32), ()> = HashMap::with_capacity(edges.len());
        for e in edges {
            let (a, b) = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
            if a == b {
                return Err(NetworkError::SelfLoop(a.0));
            }
            if a.0 < 1 || b.0 as usize > n {
                return Err(NetworkError::UnknownStateId(e.a.0, e.b.0));
            }
            if seen.insert((a.0, b.0), ()).is_some() {
                return Err(NetworkError::DuplicateEdge(a.0, b.0));
            }
            if !e.saddle.is_finite() {
                return Err(NetworkError::NonFiniteSaddle(a.0, b.0));
            }
            if !(e.prefactor.is_finite() && e.prefactor > 0.0) {
                return Err(NetworkError::BadEdgePrefactor(a.0, b.0));
            }
            let va = states[a.index()].potential;
            let vb = states[b.index()].potential;
            if !(e.saddle > va && e.saddle > vb) {
                return Err(NetworkError::SaddleBelowMinimum {
                    a: a.0,
                    b: b.0,
                    saddle: e.saddle,
                    va,
                    vb,
                });
            }
            canonical.push(EdgeRecord {
                a,
                b,
                saddle: e.saddle,
                prefactor: e.prefactor,
            });
        }

        let mut adjacency = vec![Vec::new(); n];
        for (idx, e) in canonical.iter().enumerate() {
            adjacency[e.a.index()].push(EdgeId(idx as u32));
            adjacency[e.b.index()].push(EdgeId(idx as u32));
        }
        Ok(NetworkData {
            states,
            edges: canonical,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[StateRecord] {
        &self.states
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn state(&self, s: StateId) -> &StateRecord {
        &self.states[s.index()]
    }

    pub fn potential(&self, s: StateId) -> f64 {
        self.states[s.index()].potential
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeRecord {
        &self.edges[e.index()]
    }

    pub fn saddle(&self, e: EdgeId) -> f64 {
        self.edges[e.index()].saddle
    }

    pub fn incident_edges(&self, s: StateId) -> &[EdgeId] {
        &self.adjacency[s.index()]
    }

    pub fn edge_between(&self, a: StateId, b: StateId) -> Option<EdgeId> {
        self.adjacency[a.index()]
            .iter()
            .copied()
            .find(|&e| self.edges[e.index()].touches(b))
    }

    pub fn check_state(&self, s: StateId) -> Result<(), NetworkError> {
        if s.0 >= 1 && s.index() < self.n() {
            Ok(())
        } else {
            Err(NetworkError::InvalidStateId(s.0, self.n()))
        }
    }

    /// The state with the globally smallest potential (smallest id on ties).
    pub fn global_minimum(&self) -> StateId {
        let mut best = 0usize;
        for i in 1..self.n() {
            if self.states[i].potential < self.states[best].potential {
                best = i;
            }
        }
        StateId::from_index(best)
    }

    fn component_indices(&self, start: usize) -> Vec<bool> {
        let mut in_comp = vec![false; self.n()];
        let mut stack = vec![start];
        in_comp[start] = true;
        while let Some(i) = stack.pop() {
            for &e in &self.adjacency[i] {
                let j = self.edges[e.index()].other(StateId::from_index(i)).index();
                if !in_comp[j] {
                    in_comp[j] = true;
                    stack.push(j);
                }
            }
        }
        in_comp
    }

    pub fn is_connected(&self) -> bool {
        self.component_indices(0).iter().all(|&c| c)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut count = 0;
        for i in 0..self.n() {
            if seen[i] {
                continue;
            }
            count += 1;
            let comp = self.component_indices(i);
            for (j, &c) in comp.iter().enumerate() {
                if c {
                    seen[j] = true;
                }
            }
        }
        count
    }

    /// Maximal connected induced sub-network containing `s`, with the id remap.
    pub fn connected_component(&self, s: StateId) -> Result<(Network, IdRemap), NetworkError> {
        self.check_state(s)?;
        let in_comp = self.component_indices(s.index());
        let mut old_to_new = vec![None; self.n()];
        let mut new_to_old = Vec::new();
        for (i, &keep) in in_comp.iter().enumerate() {
            if keep {
                old_to_new[i] = Some(StateId::from_index(new_to_old.len()));
                new_to_old.push(StateId::from_index(i));
            }
        }
        let states = new_to_old
            .iter()
            .enumerate()
            .map(|(new_idx, &old)| StateRecord {
                id: StateId::from_index(new_idx),
                ..self.states[old.index()]
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| in_comp[e.a.index()])
            .map(|e| EdgeRecord {
                a: old_to_new[e.a.index()].unwrap(),
                b: old_to_new[e.b.index()].unwrap(),
                saddle: e.saddle,
                prefactor: e.prefactor,
            })
            .collect();
        let data = NetworkData::new(states, edges)?;
        let net = Network::try_from(data).expect("component is connected by construction");
        Ok((
            net,
            IdRemap {
                old_to_new,
                new_to_old,
            },
        ))
    }

    /// Distinctness report over state potentials, saddle potentials, and the 2m
    /// incident differences `V_ij - V_i`, `V_ij - V_j`.
    pub fn genericness(&self, rel_tol: f64) -> GenericnessReport {
        let diffs = self.incident_differences();
        self.genericness_over(rel_tol, diffs)
    }

    /// Like `genericness`, but the difference family covers all `V_ij - V_k` triples
    /// (the full assumption). O(n*m); guarded.
    pub fn genericness_full(&self, rel_tol: f64) -> Result<GenericnessReport, NetworkError> {
        let count = self.n() * self.m();
        if count > 50_000_000 {
            return Err(NetworkError::TripleCheckTooLarge(count));
        }
        let mut diffs = Vec::with_capacity(count);
        for e in &self.edges {
            for s in &self.states {
                diffs.push((
                    e.saddle - s.potential,
                    ValueLocus::Difference {
                        edge: (e.a, e.b),
                        state: s.id,
                    },
                ));
            }
        }
        Ok(self.genericness_over(rel_tol, diffs))
    }

    fn incident_differences(&self) -> Vec<(f64, ValueLocus)> {
        let mut diffs = Vec::with_capacity(2 * self.m());
        for e in &self.edges {
            for s in [e.a, e.b] {
                diffs.push((
                    e.saddle - self.potential(s),
                    ValueLocus::Difference {
                        edge: (e.a, e.b),
                        state: s,
                    },
                ));
            }
        }
        diffs
    }

    fn genericness_over(&self, rel_tol: f64, diffs: Vec<(f64, ValueLocus)>) -> GenericnessReport {
        let states: Vec<(f64, ValueLocus)> = self
            .states
            .iter()
            .map(|s| (s.potential, ValueLocus::State(s.id)))
            .collect();
        let saddles: Vec<(f64, ValueLocus)> = self
            .edges
            .iter()
            .map(|e| (e.saddle, ValueLocus::Saddle(e.a, e.b)))
            .collect();

        let mut offending = Vec::new();
        let distinct_state_potentials = distinct_family(states, rel_tol, &mut offending);
        let distinct_saddle_potentials = distinct_family(saddles, rel_tol, &mut offending);
        let distinct_differences = distinct_family(diffs, rel_tol, &mut offending);
        GenericnessReport {
            distinct_state_potentials,
            distinct_saddle_potentials,
            distinct_differences,
            offending_pairs: offending,
            rel_tol,
        }
    }
}

/// Sort-and-scan detection of value collisions within one family.
fn distinct_family(
    mut values: Vec<(f64, ValueLocus)>,
    rel_tol: f64,
    offending: &mut Vec<OffendingPair>,
) -> bool {
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ok = true;
    for w in values.windows(2) {
        let (x, lx) = w[0];
        let (y, ly) = w[1];
        if values_close(x, y, rel_tol) {
            ok = false;
            offending.push(OffendingPair {
                value_a: x,
                value_b: y,
                locus_a: lx,
                locus_b: ly,
            });
        }
    }
    ok
}

fn values_close(x: f64, y: f64, rel_tol: f64) -> bool {
    let scale = x.abs().max(y.abs());
    (x - y).abs() <= rel_tol * scale
}

/// A validated, connected stochastic network. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Network {
    data: NetworkData,
}

impl TryFrom<NetworkData> for Network {
    type Error = NetworkError;

    fn try_from(data: NetworkData) -> Result<Self, NetworkError> {
        if !data.is_connected() {
            return Err(NetworkError::Disconnected {
                components: data.component_count(),
            });
        }
        Ok(Network { data })
    }
}

impl std::ops::Deref for Network {
    type Target = NetworkData;

    fn deref(&self) -> &NetworkData {
        &self.data
    }
}

fn check_temperature(t: f64) -> Result<(), NetworkError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(NetworkError::NonPositiveTemperature(t))
    }
}

impl Network {
    pub fn new(states: Vec<StateRecord>, edges: Vec<EdgeRecord>) -> Result<Self, NetworkError> {
        Network::try_from(NetworkData::new(states, edges)?)
    }

    pub fn as_data(&self) -> &NetworkData {
        &self.data
    }

    pub fn into_data(self) -> NetworkData {
        self.data
    }

    /// Generator matrix at temperature `T`, assembled in log space.
    pub fn generator(&self, temperature: f64) -> Result<GeneratorMatrix, NetworkError> {
        check_temperature(temperature)?;
        let n = self.n();
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for e in &self.data.edges {
            let ia = e.a.index();
            let ib = e.b.index();
            let log_kij = e.prefactor.ln();
            let rate_ab = (log_kij
                - self.data.states[ia].prefactor.ln()
                - (e.saddle - self.data.states[ia].potential) / temperature)
                .exp();
            let rate_ba = (log_kij
                - self.data.states[ib].prefactor.ln()
                - (e.saddle - self.data.states[ib].potential) / temperature)
                .exp();
            rows[ia].push((ib as u32, rate_ab));
            rows[ib].push((ia as u32, rate_ba));
        }
        let mut diag = vec![0.0; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            diag[i] = -row.iter().map(|&(_, r)| r).sum::<f64>();
        }
        Ok(GeneratorMatrix {
            n,
            temperature,
            rows,
            diag,
        })
    }

    /// Equilibrium distribution `pi_i` proportional to `k_i * exp(-V_i/T)`. Potentials
    /// are referenced to the global minimum before dividing by T, so only potential
    /// differences ever meet the exponential.
    pub fn equilibrium(&self, temperature: f64) -> Result<Vec<f64>, NetworkError> {
        check_temperature(temperature)?;
        let v_min = self.potential(self.global_minimum());
        Ok(log_softmax_weights(self.data.states.iter().map(|s| {
            s.prefactor.ln() - (s.potential - v_min) / temperature
        })))
    }

    /// Log-weights of the equilibrium distribution up to a common constant,
    /// `ln k_i - V_i/T`. Used where `pi` itself would underflow.
    pub fn equilibrium_log_weights(&self, temperature: f64) -> Result<Vec<f64>, NetworkError> {
        check_temperature(temperature)?;
        Ok(self
            .data
            .states
            .iter()
            .map(|s| s.prefactor.ln() - s.potential / temperature)
            .collect())
    }

    /// Detailed-balance check of the assembled generator against the equilibrium
    /// distribution.
    pub fn detailed_balance(
        &self,
        temperature: f64,
        tol: f64,
    ) -> Result<BalanceReport, NetworkError> {
        let gen = self.generator(temperature)?;
        let pi = self.equilibrium(temperature)?;
        Ok(detailed_balance_of(&gen, &pi, &self.data, tol))
    }
}

/// Normalize `exp(log_w)` stably.
pub(crate) fn log_softmax_weights(log_w: impl Iterator<Item = f64>) -> Vec<f64> {
    let logs: Vec<f64> = log_w.collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

#[derive(Clone, Copy, Debug)]
pub struct BalanceReport {
    pub max_violation: f64,
    pub within_tol: bool,
}

/// Max relative violation of `pi_i L_ij = pi_j L_ji` over edges. Exposed separately so a
/// hand-perturbed matrix can be checked against the same statistic.
pub fn detailed_balance_of(
    gen: &GeneratorMatrix,
    pi: &[f64],
    data: &NetworkData,
    tol: f64,
) -> BalanceReport {
    let mut max_violation: f64 = 0.0;
    for e in data.edges() {
        let fwd = pi[e.a.index()] * gen.rate(e.a, e.b);
        let bwd = pi[e.b.index()] * gen.rate(e.b, e.a);
        let scale = fwd.max(bwd);
        if scale > 0.0 {
            max_violation = max_violation.max((fwd - bwd).abs() / scale);
        }
    }
    BalanceReport {
        max_violation,
        within_tol: max_violation <= tol,
    }
}

/// Sparse generator matrix at a fixed temperature; rows sum to zero by construction.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    n: usize,
    temperature: f64,
    /// Off-diagonal entries per row, sorted by column index (0-based).
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `L_ij` for `i != j`; zero when not adjacent.
    pub fn rate(&self, i: StateId, j: StateId) -> f64 {
        let row = &self.rows[i.index()];
        let target = j.index() as u32;
        row.binary_search_by_key(&target, |&(c, _)| c)
            .map(|pos| row[pos].1)
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self, i: StateId) -> f64 {
        self.diag[i.index()]
    }

    pub fn off_diagonal_row(&self, i: StateId) -> &[(u32, f64)] {
        &self.rows[i.index()]
    }

    /// Largest absolute row sum (should be at rounding level).
    pub fn row_sum_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let s: f64 = self.rows[i].iter().map(|&(_, r)| r).sum::<f64>() + self.diag[i];
            worst = worst.max(s.abs());
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = self.diag[i];
            for &(j, r) in &self.rows[i] {
                m[(i, j as usize)] = r;
            }
        }
        m
    }

    #[cfg(test)]
    pub(crate) fn perturb_rate(&mut self, i: StateId, j: StateId, factor: f64) {
        let row = &mut self.rows[i.index()];
        let target = j.index() as u32;
        if let Ok(pos) = row.binary_search_by_key(&target, |&(c, _)| c) {
            row[pos].1 *= factor;
        }
    }
}
