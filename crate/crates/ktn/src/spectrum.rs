//! The asymptotic-spectrum construction: repeated surgery on the minimum spanning tree
//! yields, for k = 1..n-1, a new sink s*_{k+1}, a cut edge (p*_k, q*_k), the exponent
//! Delta_k = V_{p*q*} - V_{s*_{k+1}} with lambda_k ~ exp(-Delta_k/T), the eigenvector
//! support S_k, and the Freidlin cycle C_k.
//!
//! The state of the surgery is the barrier function u (smallest maximal saddle on the
//! forest path from a state to its component's sink) and the escape function v = u - V.
//! The next sink is argmax v; the cut edge is the unique edge on the path toward the
//! current sink where u drops below u(s*_{k+1}).

use crate::mstree::{kruskal, SpanningForest};
use crate::network::{EdgeId, Network, StateId};
use std::collections::BinaryHeap;
use thiserror::Error;

const ROOT: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(
        "network fails the genericness check ({0}); rerun with the symbolic tie-break if intended"
    )]
    NotGeneric(String),
    #[error("escape-function tie at v = {value} between states {a} and {b}; enable tie-break to proceed")]
    RealizedTie { value: f64, a: u32, b: u32 },
    #[error("internal inconsistency: {0}")]
    Inconsistency(&'static str),
    #[error("no non-sink states remain")]
    NoStepsRemaining,
    #[error("record k = {k} out of range (run produced {available})")]
    RecordOutOfRange { k: usize, available: usize },
    #[error("operation requires a full run; this result was truncated by the threshold")]
    IncompleteRun,
    #[error(
        "cycle cross-check mismatch at k = {k}: recomputed cycle differs from the u-decrease set"
    )]
    CycleMismatch { k: usize },
    #[error("V^(k) cross-check mismatch at k = {k}: recurrence {recurrence} vs direct {direct}")]
    VkMismatch {
        k: usize,
        recurrence: f64,
        direct: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunMode {
    /// All n-1 records.
    Full,
    /// Stop before the first record with Delta_k below the threshold.
    Threshold(f64),
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub mode: RunMode,
    /// Store full S_k / C_k member lists inside the records (desk scale).
    pub capture_sets: bool,
    /// Deterministic symbolic tie-break (by smaller state id) instead of rejecting
    /// degenerate data. Flagged in the result.
    pub tie_break: bool,
    /// Relative tolerance for the genericness gate.
    pub genericness_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            mode: RunMode::Full,
            capture_sets: false,
            tie_break: false,
            genericness_tol: 1e-9,
        }
    }
}

impl SpectrumOptions {
    pub fn capturing() -> Self {
        SpectrumOptions {
            capture_sets: true,
            ..Default::default()
        }
    }
}

/// Max-heap entry over the escape function; stale entries are discarded at pop time by
/// comparing against the live table. Equal values order by smaller state id.
#[derive(PartialEq)]
struct HeapEntry {
    v: f64,
    state: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.v
            .total_cmp(&other.v)
            .then(other.state.cmp(&self.state))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One emitted step: the k-th eigenvalue exponent and its sets.
#[derive(Clone, Debug)]
pub struct SpectrumRecord {
    /// 1-based step index; the sink is s*_{k+1}.
    pub k: usize,
    pub sink: StateId,
    pub cut_edge: EdgeId,
    /// Cut-edge endpoint on the old-sink side: u(p*) < u(s*_{k+1}).
    pub cut_p: StateId,
    /// Cut-edge endpoint on the new-sink side: u(q*) = u(s*_{k+1}).
    pub cut_q: StateId,
    /// Delta_k = V_{p*q*} - V_{s*_{k+1}}, exactly.
    pub delta: f64,
    pub s_size: usize,
    pub c_size: usize,
    /// Record index (0-based) of the enclosing set in the laminar hierarchy; `None`
    /// when the parent is the root component of s*_1.
    pub parent: Option<usize>,
    pub s_states: Option<Vec<StateId>>,
    pub c_states: Option<Vec<StateId>>,
}

/// Output of a run: records in k-order (eigenvalues from smallest magnitude), plus the
/// bookkeeping needed to reconstruct any S_k / C_k without storing every member list.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    n: usize,
    first_sink: StateId,
    records: Vec<SpectrumRecord>,
    /// MST edges in Kruskal acceptance order.
    tree_edges: Vec<EdgeId>,
    /// Edge index -> 1-based step at which it was cut; 0 = never cut.
    cut_step: Vec<u32>,
    /// State index -> record(0-based) of the last S_k containing it; ROOT = never left
    /// the component of s*_1.
    final_owner: Vec<u32>,
    /// State index -> record (0-based) in which it became the sink; ROOT for s*_1 and
    /// for states never reached by a truncated run.
    sink_record: Vec<u32>,
    tie_break_enabled: bool,
    ties_broken: usize,
    complete: bool,
}

/// The running surgery state (barrier/escape tables, rooted forest, lazy max-heap).
pub struct Algorithm1<'n> {
    net: &'n Network,
    forest: SpanningForest,
    u: Vec<f64>,
    v: Vec<f64>,
    is_sink: Vec<bool>,
    /// Next state toward the component's sink; ROOT at sinks.
    parent: Vec<u32>,
    parent_edge: Vec<u32>,
    /// Record index whose S-set the state's component currently belongs to.
    owner: Vec<u32>,
    heap: BinaryHeap<HeapEntry>,
    first_sink: StateId,
    steps_done: usize,
    pending: Option<(f64, u32)>,
    records: Vec<SpectrumRecord>,
    capture_sets: bool,
    tie_break: bool,
    ties_broken: usize,
}

impl<'n> Algorithm1<'n> {
    /// Initialize on a spanning forest of `net` (normally the MST from `kruskal`):
    /// s*_1 is the global potential minimizer and u(i) is the maximal saddle on the
    /// tree path from s*_1 to i.
    pub fn init(
        net: &'n Network,
        forest: SpanningForest,
        options: &SpectrumOptions,
    ) -> Result<Self, SpectrumError> {
        assert!(
            forest.is_spanning(),
            "Algorithm 1 must start from a spanning tree"
        );
        if !options.tie_break {
            let report = net.genericness(options.genericness_tol);
            if !report.is_generic() {
                let detail = report
                    .offending_pairs
                    .first()
                    .map(|p| {
                        format!(
                            "{} = {} vs {} = {}",
                            p.locus_a, p.value_a, p.locus_b, p.value_b
                        )
                    })
                    .unwrap_or_else(|| "no offending pair recorded".to_string());
                return Err(SpectrumError::NotGeneric(detail));
            }
        }

        let n = net.n();
        let s1 = net.global_minimum();
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut is_sink = vec![false; n];
        let mut parent = vec![ROOT; n];
        let mut parent_edge = vec![u32::MAX; n];
        is_sink[s1.index()] = true;

        let mut heap = BinaryHeap::with_capacity(2 * n);
        let mut stack: Vec<(StateId, u32, u32, f64)> = forest
            .neighbors(s1)
            .map(|(t, e)| (t, s1.index() as u32, e.0, net.saddle(e)))
            .collect();
        while let Some((x, from, via, carried)) = stack.pop() {
            let xi = x.index();
            u[xi] = carried;
            let esc = carried - net.potential(x);
            v[xi] = esc;
            parent[xi] = from;
            parent_edge[xi] = via;
            heap.push(HeapEntry {
                v: esc,
                state: xi as u32,
            });
            for (t, e) in forest.neighbors(x) {
                if t.index() as u32 != from {
                    stack.push((t, xi as u32, e.0, carried.max(net.saddle(e))));
                }
            }
        }

        Ok(Algorithm1 {
            net,
            forest,
            u,
            v,
            is_sink,
            parent,
            parent_edge,
            owner: vec![ROOT; n],
            heap,
            first_sink: s1,
            steps_done: 0,
            pending: None,
            records: Vec::new(),
            capture_sets: options.capture_sets,
            tie_break: options.tie_break,
            ties_broken: 0,
        })
    }

    pub fn first_sink(&self) -> StateId {
        self.first_sink
    }

    /// Barrier function u(i) for the current sink set (0 at sinks).
    pub fn barrier(&self, s: StateId) -> f64 {
        self.u[s.index()]
    }

    /// Escape function v(i) = u(i) - V_i (0 at sinks).
    pub fn escape(&self, s: StateId) -> f64 {
        self.v[s.index()]
    }

    pub fn forest(&self) -> &SpanningForest {
        &self.forest
    }

    pub fn steps_remaining(&self) -> usize {
        self.net.n() - 1 - self.steps_done
    }

    /// Pop the valid argmax of v, detecting realized escape-value ties.
    fn pop_argmax(&mut self) -> Result<Option<(f64, u32)>, SpectrumError> {
        if let Some(p) = self.pending.take() {
            return Ok(Some(p));
        }
        while let Some(top) = self.heap.pop() {
            let s = top.state as usize;
            if self.is_sink[s] || self.v[s] != top.v {
                continue; // stale entry
            }
            // Equal-valued valid entries signal an Assumption-1 violation the static
            // check could not see (non-incident differences).
            let mut equal_pool: Vec<HeapEntry> = Vec::new();
            let mut rival: Option<u32> = None;
            while let Some(next) = self.heap.peek() {
                if next.v != top.v {
                    break;
                }
                let next = self.heap.pop().unwrap();
                let t = next.state as usize;
                if !self.is_sink[t] && self.v[t] == next.v && next.state != top.state {
                    rival.get_or_insert(next.state);
                    equal_pool.push(next);
                } // stale duplicates are dropped
            }
            if let Some(r) = rival {
                if !self.tie_break {
                    return Err(SpectrumError::RealizedTie {
                        value: top.v,
                        a: top.state,
                        b: r,
                    });
                }
                self.ties_broken += 1;
                // heap ordering already placed the smaller state id first
                for entry in equal_pool {
                    self.heap.push(entry);
                }
            }
            return Ok(Some((top.v, top.state)));
        }
        Ok(None)
    }

    /// Delta of the upcoming record without mutating the surgery state.
    pub fn peek_delta(&mut self) -> Result<Option<f64>, SpectrumError> {
        match self.pop_argmax()? {
            Some(p) => {
                let d = p.0;
                self.pending = Some(p);
                Ok(Some(d))
            }
            None => Ok(None),
        }
    }

    /// One surgery step: new sink, cut edge, Delta_k, S_k, C_k, barrier updates.
    pub fn step(&mut self) -> Result<SpectrumRecord, SpectrumError> {
        if self.steps_remaining() == 0 {
            return Err(SpectrumError::NoStepsRemaining);
        }
        let (popped_v, new_sink) = self.pop_argmax()?.ok_or(SpectrumError::Inconsistency(
            "escape heap exhausted before the run finished",
        ))?;
        let s_new = new_sink as usize;
        let u_star = self.u[s_new];

        // Walk toward the current sink; the cut edge is where u first drops below
        // u(s*_{k+1}). Sinks count as u = -infinity here (their stored 0 is a sentinel).
        let (cut_edge, p_star, q_star) = {
            let mut cur = s_new;
            loop {
                let par = self.parent[cur];
                if par == ROOT {
                    return Err(SpectrumError::Inconsistency(
                        "no edge on the sink path satisfies the barrier conditions",
                    ));
                }
                let pu = par as usize;
                if self.is_sink[pu] || self.u[pu] < u_star {
                    break (EdgeId(self.parent_edge[cur]), pu, cur);
                }
                if self.u[pu] != u_star {
                    return Err(SpectrumError::Inconsistency(
                        "barrier function increases toward the sink",
                    ));
                }
                cur = pu;
            }
        };

        let v_cut = self.net.saddle(cut_edge);
        if v_cut != u_star {
            return Err(SpectrumError::Inconsistency(
                "barrier at the new sink does not equal the cut-edge saddle",
            ));
        }
        let sink_id = StateId::from_index(s_new);
        let delta = v_cut - self.net.potential(sink_id);
        debug_assert_eq!(delta.to_bits(), popped_v.to_bits());

        let parent_owner = self.owner[s_new];
        self.forest
            .kill_edge(cut_edge)
            .map_err(|_| SpectrumError::Inconsistency("cut edge was not alive"))?;

        let record_index = self.steps_done as u32;
        self.is_sink[s_new] = true;
        self.u[s_new] = 0.0;
        self.v[s_new] = 0.0;
        self.parent[s_new] = ROOT;
        self.owner[s_new] = record_index;

        // Full traversal of the new component: collect S_k, re-root parents at the new
        // sink, relabel owners, and lower u/v where the new sink improves the barrier.
        // The u-decrease set (plus the sink) is the Freidlin cycle C_k.
        let mut s_members: Vec<u32> = vec![new_sink];
        let mut c_members: Vec<u32> = vec![new_sink];
        let mut stack: Vec<(u32, u32, u32, f64)> = Vec::new();
        for (t, e) in self.forest.neighbors(sink_id) {
            stack.push((t.index() as u32, new_sink, e.0, self.net.saddle(e)));
        }
        while let Some((x, from, via, carried)) = stack.pop() {
            let xi = x as usize;
            s_members.push(x);
            self.owner[xi] = record_index;
            self.parent[xi] = from;
            self.parent_edge[xi] = via;
            if carried < self.u[xi] {
                self.u[xi] = carried;
                let esc = carried - self.net.potential(StateId::from_index(xi));
                self.v[xi] = esc;
                self.heap.push(HeapEntry { v: esc, state: x });
                c_members.push(x);
            }
            for (t, e) in self.forest.neighbors(StateId::from_index(xi)) {
                if t.index() as u32 != from {
                    stack.push((t.index() as u32, x, e.0, carried.max(self.net.saddle(e))));
                }
            }
        }

        s_members.sort_unstable();
        c_members.sort_unstable();
        let to_ids = |v: &[u32]| v.iter().map(|&i| StateId::from_index(i as usize)).collect();
        let record = SpectrumRecord {
            k: self.steps_done + 1,
            sink: sink_id,
            cut_edge,
            cut_p: StateId::from_index(p_star),
            cut_q: StateId::from_index(q_star),
            delta,
            s_size: s_members.len(),
            c_size: c_members.len(),
            parent: (parent_owner != ROOT).then_some(parent_owner as usize),
            s_states: self.capture_sets.then(|| to_ids(&s_members)),
            c_states: self.capture_sets.then(|| to_ids(&c_members)),
        };
        self.steps_done += 1;
        self.records.push(record.clone());
        Ok(record)
    }

    /// Package the records produced so far.
    pub fn finish(self) -> SpectrumResult {
        let n = self.net.n();
        let mut cut_step = vec![0u32; self.net.m()];
        let mut sink_record = vec![ROOT; n];
        for rec in &self.records {
            cut_step[rec.cut_edge.index()] = rec.k as u32;
            sink_record[rec.sink.index()] = rec.k as u32 - 1;
        }
        let complete = self.records.len() == n - 1;
        SpectrumResult {
            n,
            first_sink: self.first_sink,
            records: self.records,
            tree_edges: self.forest.tree_edges().to_vec(),
            cut_step,
            final_owner: self.owner,
            sink_record,
            tie_break_enabled: self.tie_break,
            ties_broken: self.ties_broken,
            complete,
        }
    }
}

/// Build the MST and run the surgery to completion or threshold.
pub fn run(net: &Network, options: &SpectrumOptions) -> Result<SpectrumResult, SpectrumError> {
    let forest = kruskal(net);
    let mut alg = Algorithm1::init(net, forest, options)?;
    while alg.steps_remaining() > 0 {
        if let RunMode::Threshold(dmin) = options.mode {
            match alg.peek_delta()? {
                Some(d) if d >= dmin => {}
                _ => break,
            }
        }
        alg.step()?;
    }
    Ok(alg.finish())
}

impl SpectrumResult {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first_sink(&self) -> StateId {
        self.first_sink
    }

    pub fn records(&self) -> &[SpectrumRecord] {
        &self.records
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn tie_break_enabled(&self) -> bool {
        self.tie_break_enabled
    }

    pub fn ties_broken(&self) -> usize {
        self.ties_broken
    }

    pub fn record(&self, k: usize) -> Result<&SpectrumRecord, SpectrumError> {
        if k >= 1 && k <= self.records.len() {
            Ok(&self.records[k - 1])
        } else {
            Err(SpectrumError::RecordOutOfRange {
                k,
                available: self.records.len(),
            })
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.delta).collect()
    }

    /// s*_1, s*_2, ... in emission order.
    pub fn sink_sequence(&self) -> Vec<StateId> {
        std::iter::once(self.first_sink)
            .chain(self.records.iter().map(|r| r.sink))
            .collect()
    }

    /// 0-based position of a state in the sink sequence (0 = s*_1); `None` if the run
    /// stopped before the state became a sink.
    pub fn sink_index(&self, s: StateId) -> Option<usize> {
        if s == self.first_sink {
            return Some(0);
        }
        let rec = self.sink_record[s.index()];
        (rec != ROOT).then_some(rec as usize + 1)
    }

    /// Record (1-based k) in which `s` became the sink.
    pub fn record_of_sink(&self, s: StateId) -> Option<usize> {
        let rec = self.sink_record[s.index()];
        (rec != ROOT).then_some(rec as usize + 1)
    }

    pub fn tree_edges(&self) -> &[EdgeId] {
        &self.tree_edges
    }

    /// 1-based step at which `e` was cut; `None` if never cut.
    pub fn cut_step(&self, e: EdgeId) -> Option<usize> {
        let s = self.cut_step[e.index()];
        (s != 0).then_some(s as usize)
    }

    /// Rebuild the full (uncut) minimum spanning tree of the run.
    pub fn rebuild_mst(&self, net: &Network) -> SpanningForest {
        SpanningForest::from_tree_edges(net, self.tree_edges.clone())
    }

    /// The forest T*_k (before step k): tree edges not yet cut at steps < k.
    pub fn forest_at(&self, net: &Network, k: usize) -> SpanningForest {
        let mut forest = self.rebuild_mst(net);
        for rec in &self.records {
            if rec.k < k {
                forest
                    .kill_edge(rec.cut_edge)
                    .expect("recorded cut edges are distinct");
            }
        }
        forest
    }

    /// S_k: the component of s*_{k+1} in the post-cut forest T*_{k+1}, sorted by id.
    pub fn s_set(&self, net: &Network, k: usize) -> Result<Vec<StateId>, SpectrumError> {
        let rec = self.record(k)?;
        let forest = self.forest_at(net, k + 1);
        let mut comp = forest.component_of(rec.sink);
        comp.sort_unstable();
        Ok(comp)
    }

    /// C_k: states of S_k whose maximal saddle on the tree path from s*_{k+1} stays
    /// below the cut saddle. Cross-checked against the u-decrease set captured during
    /// the run when that set is available.
    pub fn c_set(&self, net: &Network, k: usize) -> Result<Vec<StateId>, SpectrumError> {
        let rec = self.record(k)?;
        let threshold = net.saddle(rec.cut_edge);
        let forest = self.forest_at(net, k + 1);
        let mut members = vec![rec.sink];
        let mut stack: Vec<(StateId, u32, f64)> = forest
            .neighbors(rec.sink)
            .map(|(t, e)| (t, rec.sink.index() as u32, net.saddle(e)))
            .collect();
        while let Some((x, from, carried)) = stack.pop() {
            if carried >= threshold {
                continue; // path maxima only grow deeper in
            }
            members.push(x);
            for (t, e) in forest.neighbors(x) {
                if t.index() as u32 != from {
                    stack.push((t, x.index() as u32, carried.max(net.saddle(e))));
                }
            }
        }
        members.sort_unstable();
        if let Some(captured) = &rec.c_states {
            if captured != &members {
                return Err(SpectrumError::CycleMismatch { k });
            }
        }
        if members.len() != rec.c_size {
            return Err(SpectrumError::CycleMismatch { k });
        }
        Ok(members)
    }

    /// Indicator eigenvector: k = 0 gives the all-ones equilibrium eigenvector, k >= 1
    /// the indicator of S_k.
    pub fn eigenvector_indicator(
        &self,
        net: &Network,
        k: usize,
    ) -> Result<Vec<f64>, SpectrumError> {
        if k == 0 {
            return Ok(vec![1.0; self.n]);
        }
        let members = self.s_set(net, k)?;
        let mut phi = vec![0.0; self.n];
        for s in members {
            phi[s.index()] = 1.0;
        }
        Ok(phi)
    }

    /// V^(1) >= V^(2) >= ... >= V^(n) = 0 via the recurrence V^(k+1) = V^(k) - Delta_k,
    /// cross-checked against fresh compensated evaluation over forest snapshots.
    /// Requires a full run.
    pub fn vk_sequence(&self, net: &Network) -> Result<Vec<f64>, SpectrumError> {
        if !self.complete {
            return Err(SpectrumError::IncompleteRun);
        }
        let n = self.n;
        let total_potential = neumaier(net.states().iter().map(|s| s.potential));
        let tree_saddles = neumaier(self.tree_edges.iter().map(|&e| net.saddle(e)));
        let v_min = net.potential(self.first_sink);
        let v1 = tree_saddles + v_min - total_potential;

        let mut vk = Vec::with_capacity(n);
        vk.push(v1);
        for rec in &self.records {
            vk.push(vk[rec.k - 1] - rec.delta);
        }

        for &k in &self.vk_check_points() {
            let alive = neumaier(
                self.tree_edges
                    .iter()
                    .filter(|&&e| {
                        let step = self.cut_step[e.index()];
                        step == 0 || step as usize >= k
                    })
                    .map(|&e| net.saddle(e)),
            );
            let sinks = neumaier(
                self.sink_sequence()
                    .iter()
                    .take(k)
                    .map(|&s| net.potential(s)),
            );
            let direct = alive + sinks - total_potential;
            if (vk[k - 1] - direct).abs() > 1e-9 {
                return Err(SpectrumError::VkMismatch {
                    k,
                    recurrence: vk[k - 1],
                    direct,
                });
            }
        }
        Ok(vk)
    }

    fn vk_check_points(&self) -> Vec<usize> {
        let n = self.n;
        if n <= 4096 {
            (1..=n).collect()
        } else {
            let mut ks: Vec<usize> = (0..128).map(|i| 1 + i * (n - 1) / 127).collect();
            ks.extend([1, 2, n - 1, n]);
            ks.sort_unstable();
            ks.dedup();
            ks
        }
    }

    pub(crate) fn final_owner_record(&self, s: StateId) -> Option<usize> {
        let o = self.final_owner[s.index()];
        (o != ROOT).then_some(o as usize)
    }
}

/// Neumaier compensated summation.
pub(crate) fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Freidlin cycle of `s` at threshold `a`: states reachable from `s` along MST paths
/// whose maximal saddle stays strictly below `a`. Pass the full (uncut) MST.
pub fn freidlin_cycle(net: &Network, forest: &SpanningForest, s: StateId, a: f64) -> Vec<StateId> {
    let mut members = vec![s];
    let mut stack: Vec<(StateId, u32, f64)> = forest
        .neighbors(s)
        .map(|(t, e)| (t, s.index() as u32, net.saddle(e)))
        .collect();
    while let Some((x, from, carried)) = stack.pop() {
        if carried >= a {
            continue;
        }
        members.push(x);
        for (t, e) in forest.neighbors(x) {
            if t.index() as u32 != from {
                stack.push((t, x.index() as u32, carried.max(net.saddle(e))));
            }
        }
    }
    members.sort_unstable();
    members
}

// ---------------------------------------------------------------------------
// Metastability diagnostics
// ---------------------------------------------------------------------------

/// Gap between consecutive entries of the Delta sequence sorted descending.
#[derive(Clone, Copy, Debug)]
pub struct DeltaGap {
    /// 1-based record index of the larger Delta.
    pub k: usize,
    pub delta: f64,
    pub next_delta: f64,
    pub gap: f64,
}

/// Ergodicity-style metastability of one Freidlin cycle: every interior state must
/// escape its own cycle much faster than the sink escapes this one.
#[derive(Clone, Debug)]
pub struct CycleMetastability {
    pub k: usize,
    pub sink: StateId,
    pub delta: f64,
    pub interior_size: usize,
    /// Largest Delta over interior states; `None` when the cycle has no interior.
    pub max_interior_delta: Option<f64>,
    /// `exp(-Delta(i)/T) >= factor * exp(-Delta_k/T)` for all interior i.
    /// `None` when a truncated run left an interior state without a Delta.
    pub metastable: Option<bool>,
}

/// Hitting-time ratio for a chosen sink set (computed by the oracle).
#[derive(Clone, Copy, Debug)]
pub struct BovierRatio {
    /// sup_{i not in M} E_i[tau_M] / inf_{s in M} E_s[tau_{M minus s}]; metastability
    /// asks for 1/rho >> 1.
    pub rho: f64,
    pub min_return_time: f64,
    pub max_approach_time: f64,
    pub sink_count: usize,
}

#[derive(Clone, Debug)]
pub struct MetastabilityReport {
    pub temperature: f64,
    pub rate_factor: f64,
    pub gaps: Vec<DeltaGap>,
    pub cycles: Vec<CycleMetastability>,
    pub bovier: Option<BovierRatio>,
}

/// Metastability diagnostics at temperature `T`: sorted-Delta gap table, per-cycle
/// ergodicity flags (rate separation `factor`, default 10), and optionally a Bovier
/// ratio computed from oracle hitting times.
pub fn metastability_report(
    res: &SpectrumResult,
    net: &Network,
    temperature: f64,
    rate_factor: f64,
    bovier: Option<BovierRatio>,
) -> Result<MetastabilityReport, SpectrumError> {
    let mut order: Vec<usize> = (0..res.records.len()).collect();
    order.sort_by(|&a, &b| res.records[b].delta.total_cmp(&res.records[a].delta));
    let gaps = order
        .windows(2)
        .map(|w| {
            let (hi, lo) = (&res.records[w[0]], &res.records[w[1]]);
            DeltaGap {
                k: hi.k,
                delta: hi.delta,
                next_delta: lo.delta,
                gap: hi.delta - lo.delta,
            }
        })
        .collect();

    let margin = temperature * rate_factor.ln();
    let mut cycles = Vec::with_capacity(res.records.len());
    for rec in &res.records {
        let cycle = res.c_set(net, rec.k)?;
        let mut max_interior: Option<f64> = None;
        let mut undetermined = false;
        for &i in cycle.iter().filter(|&&i| i != rec.sink) {
            match res.record_of_sink(i) {
                Some(kk) => {
                    let d = res.records[kk - 1].delta;
                    max_interior = Some(max_interior.map_or(d, |m: f64| m.max(d)));
                }
                None => undetermined = true,
            }
        }
        let metastable = if cycle.len() == 1 {
            Some(true)
        } else if undetermined {
            None
        } else {
            Some(max_interior.unwrap() <= rec.delta - margin)
        };
        cycles.push(CycleMetastability {
            k: rec.k,
            sink: rec.sink,
            delta: rec.delta,
            interior_size: cycle.len() - 1,
            max_interior_delta: max_interior,
            metastable,
        });
    }

    Ok(MetastabilityReport {
        temperature,
        rate_factor,
        gaps,
        cycles,
        bovier,
    })
}
