//! Brute-force and finite-temperature verification tools, independent of the spanning
//! tree surgery: exhaustive optimization over sink-graphs, dense spectral analysis of
//! the generator, committor and hitting-time solves, distribution propagation, and
//! absorbing exit rates.

mod jacobi;

use crate::network::{EdgeId, Network, StateId};
use crate::spectrum::BovierRatio;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Exhaustive sink-graph optimization refuses networks above this size.
pub const ENUMERATION_CAP: usize = 10;
/// Dense linear algebra refuses networks above this size.
pub const DENSE_CAP: usize = 2000;
/// Above this size the eigensolve falls back from the high-relative-accuracy Jacobi
/// path to a standard symmetric solver (adequate at moderate temperatures only).
const JACOBI_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("network size {n} exceeds the cap {cap} for this oracle operation")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("invalid subset: {0}")]
    BadSubset(&'static str),
    #[error("invalid input: {0}")]
    BadInput(&'static str),
    #[error("linear system unexpectedly singular")]
    Singular,
}

fn check_temperature(t: f64) -> Result<(), OracleError> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(OracleError::NonPositiveTemperature(t))
    }
}

// ---------------------------------------------------------------------------
// W-graphs and exhaustive V^(k)
// ---------------------------------------------------------------------------

/// A directed sink-graph: every non-sink state has exactly one outgoing arrow to a
/// network neighbor and every arrow chain ends in a sink.
#[derive(Clone, Debug, PartialEq)]
pub struct WGraph {
    /// Sorted sink states.
    pub sinks: Vec<StateId>,
    /// Arrow target per state index; `None` exactly at sinks.
    pub arrows: Vec<Option<StateId>>,
}

impl WGraph {
    /// Sum of `V_ij - V_i` over arrows `i -> j`.
    pub fn cost(&self, net: &Network) -> f64 {
        self.arrows
            .iter()
            .enumerate()
            .filter_map(|(i, target)| {
                target.map(|j| {
                    let from = StateId::from_index(i);
                    let e = net
                        .edge_between(from, j)
                        .expect("arrow follows a network edge");
                    net.saddle(e) - net.potential(from)
                })
            })
            .sum()
    }

    /// Undirected edge set of the graph (the forest of the optimal graph).
    pub fn forest_edges(&self, net: &Network) -> Vec<EdgeId> {
        let mut edges: Vec<EdgeId> = self
            .arrows
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|j| net.edge_between(StateId::from_index(i), j).unwrap()))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Structural validity: arrows only at non-sinks, along edges, all chains
    /// reaching a sink without cycles.
    pub fn is_valid(&self, net: &Network) -> bool {
        let n = net.n();
        if self.arrows.len() != n {
            return false;
        }
        let is_sink: Vec<bool> = {
            let mut f = vec![false; n];
            for s in &self.sinks {
                f[s.index()] = true;
            }
            f
        };
        for (i, t) in self.arrows.iter().enumerate() {
            match (is_sink[i], t) {
                (true, None) => {}
                (false, Some(j)) => {
                    if net.edge_between(StateId::from_index(i), *j).is_none() {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        reaches_sinks(&self.arrows, &is_sink)
    }
}

fn reaches_sinks(arrows: &[Option<StateId>], is_sink: &[bool]) -> bool {
    let n = arrows.len();
    // 0 = unknown, 1 = on current chain, 2 = leads to a sink
    let mut mark = vec![0u8; n];
    for start in 0..n {
        if mark[start] != 0 || is_sink[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        loop {
            if is_sink[cur] || mark[cur] == 2 {
                break;
            }
            if mark[cur] == 1 {
                return false; // cycle
            }
            mark[cur] = 1;
            chain.push(cur);
            cur = match arrows[cur] {
                Some(j) => j.index(),
                None => return false,
            };
        }
        for c in chain {
            mark[c] = 2;
        }
    }
    true
}

/// Result of the exhaustive minimization over k-sink graphs.
#[derive(Clone, Debug)]
pub struct VkOptimum {
    pub value: f64,
    pub graph: WGraph,
    /// Number of optimal graphs within 1e-12; 1 under genericness.
    pub optima_count: usize,
}

/// Exhaustive minimum of the sink-graph cost over all graphs with `k` sinks,
/// branch-and-bound over sink subsets and arrow assignments.
pub fn enumerate_vk(net: &Network, k: usize) -> Result<(f64, WGraph), OracleError> {
    enumerate_vk_full(net, k).map(|opt| (opt.value, opt.graph))
}

pub fn enumerate_vk_full(net: &Network, k: usize) -> Result<VkOptimum, OracleError> {
    let n = net.n();
    if n > ENUMERATION_CAP {
        return Err(OracleError::SizeCapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    if k < 1 || k > n {
        return Err(OracleError::BadInput("sink count must be within 1..=n"));
    }

    // arrow choices per state, cheapest first for effective pruning
    let choices: Vec<Vec<(StateId, f64)>> = (0..n)
        .map(|i| {
            let s = StateId::from_index(i);
            let mut c: Vec<(StateId, f64)> = net
                .incident_edges(s)
                .iter()
                .map(|&e| {
                    let rec = net.edge(e);
                    (rec.other(s), rec.saddle - net.potential(s))
                })
                .collect();
            c.sort_by(|a, b| a.1.total_cmp(&b.1));
            c
        })
        .collect();

    let mut best: Option<VkOptimum> = None;
    let mut sinks = Vec::with_capacity(k);
    subsets(n, k, &mut sinks, &mut |sink_set| {
        let mut is_sink = vec![false; n];
        for &s in sink_set {
            is_sink[s] = true;
        }
        let non_sinks: Vec<usize> = (0..n).filter(|&i| !is_sink[i]).collect();
        let mut arrows: Vec<Option<StateId>> = vec![None; n];
        assign(
            &non_sinks,
            0,
            0.0,
            &choices,
            &is_sink,
            sink_set,
            &mut arrows,
            &mut best,
        );
    });

    best.ok_or(OracleError::BadInput(
        "no acyclic sink-graph exists for this sink set count",
    ))
}

fn subsets(n: usize, k: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    fn rec(
        n: usize,
        k: usize,
        start: usize,
        current: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if current.len() == k {
            visit(current);
            return;
        }
        let needed = k - current.len();
        for i in start..=n - needed {
            current.push(i);
            rec(n, k, i + 1, current, visit);
            current.pop();
        }
    }
    rec(n, k, 0, current, visit);
}

/// Depth-first arrow assignment with branch-and-bound: every arrow cost is positive
/// (saddles lie above minima), so any partial cost strictly above the running best
/// (plus a tie margin, to keep exact ties countable) can be abandoned.
#[allow(clippy::too_many_arguments)]
fn assign(
    non_sinks: &[usize],
    pos: usize,
    partial: f64,
    choices: &[Vec<(StateId, f64)>],
    is_sink: &[bool],
    sink_set: &[usize],
    arrows: &mut Vec<Option<StateId>>,
    best: &mut Option<VkOptimum>,
) {
    if let Some(b) = best.as_ref() {
        if partial > b.value + 1e-12 * (1.0 + b.value.abs()) {
            return;
        }
    }
    if pos == non_sinks.len() {
        if !reaches_sinks(arrows, is_sink) {
            return;
        }
        let tie_eps = 1e-12 * (1.0 + partial.abs());
        match best {
            Some(b) if partial > b.value + tie_eps => {}
            Some(b) if (partial - b.value).abs() <= tie_eps => b.optima_count += 1,
            _ => {
                *best = Some(VkOptimum {
                    value: partial,
                    graph: WGraph {
                        sinks: sink_set.iter().map(|&i| StateId::from_index(i)).collect(),
                        arrows: arrows.to_vec(),
                    },
                    optima_count: 1,
                });
            }
        }
        return;
    }
    let i = non_sinks[pos];
    for c in 0..choices[i].len() {
        let (target, cost) = choices[i][c];
        arrows[i] = Some(target);
        assign(
            non_sinks,
            pos + 1,
            partial + cost,
            choices,
            is_sink,
            sink_set,
            arrows,
            best,
        );
    }
    arrows[i] = None;
}

// ---------------------------------------------------------------------------
// Dense spectral analysis
// ---------------------------------------------------------------------------

/// Finite-temperature eigen-decomposition of the generator. Eigenvalues are reported
/// as magnitudes of the spectrum of -L; eigenvectors are P-orthonormal with the first
/// equal to all-ones.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub temperature: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub equilibrium: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.equilibrium.len()
    }

    /// Eigenvector index (>= 1) with maximal overlap with the indicator of `support`.
    /// Used to pair numerical eigenvectors with predicted supports when near-degenerate
    /// eigenvalues make index-based pairing ill-conditioned.
    pub fn match_support(&self, support: &[StateId]) -> usize {
        let mut ind = vec![0.0; self.n()];
        for s in support {
            ind[s.index()] = 1.0;
        }
        let mut best = 1;
        let mut best_cos = -1.0;
        for j in 1..self.eigenvectors.len() {
            let c = cosine(&self.eigenvectors[j], &ind);
            if c > best_cos {
                best_cos = c;
                best = j;
            }
        }
        best
    }
}

/// |cos| of the angle between two vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).abs()
}

/// Square-root-rate factor G with -P^(1/2) L P^(-1/2) = G G^T: column per edge,
/// +sqrt(L_ij) at i and -sqrt(L_ji) at j, assembled in log space.
fn sqrt_rate_factor(net: &Network, temperature: f64) -> Vec<Vec<f64>> {
    let n = net.n();
    net.edges()
        .iter()
        .map(|rec| {
            let mut col = vec![0.0; n];
            let lk = rec.prefactor.ln();
            col[rec.a.index()] = (0.5
                * (lk
                    - net.state(rec.a).prefactor.ln()
                    - (rec.saddle - net.potential(rec.a)) / temperature))
                .exp();
            col[rec.b.index()] = -(0.5
                * (lk
                    - net.state(rec.b).prefactor.ln()
                    - (rec.saddle - net.potential(rec.b)) / temperature))
                .exp();
            col
        })
        .collect()
}

/// Stable sqrt of the equilibrium weights, exp((ln k_i - (V_i - V_ref)/T - ln Z)/2).
fn sqrt_equilibrium(net: &Network, temperature: f64) -> Vec<f64> {
    let v_min = net.potential(net.global_minimum());
    let logs: Vec<f64> = net
        .states()
        .iter()
        .map(|s| s.prefactor.ln() - (s.potential - v_min) / temperature)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logs.iter().map(|&l| (0.5 * (l - log_z)).exp()).collect()
}

/// Dense eigen-decomposition after symmetrization. Networks up to `JACOBI_CAP` states
/// use the one-sided Jacobi factor path (high relative accuracy down to very small
/// temperatures); larger ones use a standard symmetric solver.
pub fn dense_spectrum(
    net: &Network,
    temperature: f64,
) -> Result<SpectralDecomposition, OracleError> {
    check_temperature(temperature)?;
    let n = net.n();
    if n > DENSE_CAP {
        return Err(OracleError::SizeCapExceeded { n, cap: DENSE_CAP });
    }
    let equilibrium = net.equilibrium(temperature).expect("temperature checked");
    let sqrt_pi = sqrt_equilibrium(net, temperature);

    let mut eigenvalues = vec![0.0];
    let mut eigenvectors = vec![vec![1.0; n]];
    if n == 1 {
        return Ok(SpectralDecomposition {
            temperature,
            eigenvalues,
            eigenvectors,
            equilibrium,
        });
    }

    // Entries of a unit symmetrized eigenvector below a few eps are numerical void;
    // mapping them back through 1/sqrt(pi_i) would manufacture arbitrarily large junk
    // on high-potential states, so they are zeroed instead (their true values are
    // unresolvable in double precision and immaterial to the supports).
    let unsymmetrize = |u: &[f64], sqrt_pi: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(sqrt_pi)
            .map(|(&x, w)| {
                if x.abs() < 16.0 * f64::EPSILON {
                    0.0
                } else {
                    x / w
                }
            })
            .collect()
    };

    if n <= JACOBI_CAP {
        let pairs = jacobi::singular_pairs(sqrt_rate_factor(net, temperature));
        // n-1 genuine eigenpairs; anything beyond is numerically null
        let mut lam: Vec<(f64, &Vec<f64>)> =
            pairs.iter().take(n - 1).map(|(l, u)| (*l, u)).collect();
        lam.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (l, u) in lam {
            eigenvalues.push(l);
            eigenvectors.push(unsymmetrize(u, &sqrt_pi));
        }
    } else {
        let mut a = DMatrix::zeros(n, n);
        for rec in net.edges() {
            let (i, j) = (rec.a.index(), rec.b.index());
            let lk = rec.prefactor.ln();
            let off = (lk
                - 0.5 * (net.states()[i].prefactor.ln() + net.states()[j].prefactor.ln())
                - (rec.saddle - 0.5 * (net.states()[i].potential + net.states()[j].potential))
                    / temperature)
                .exp();
            a[(i, j)] = off;
            a[(j, i)] = off;
        }
        let gen = net.generator(temperature).expect("temperature checked");
        for i in 0..n {
            a[(i, i)] = gen.diagonal(StateId::from_index(i));
        }
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            eig.eigenvalues[x]
                .abs()
                .total_cmp(&eig.eigenvalues[y].abs())
        });
        for &idx in order.iter().skip(1) {
            eigenvalues.push(eig.eigenvalues[idx].abs());
            let col: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            eigenvectors.push(unsymmetrize(&col, &sqrt_pi));
        }
    }
    Ok(SpectralDecomposition {
        temperature,
        eigenvalues,
        eigenvectors,
        equilibrium,
    })
}

// ---------------------------------------------------------------------------
// Linear solves
// ---------------------------------------------------------------------------

fn dense_generator(net: &Network, temperature: f64) -> Result<DMatrix<f64>, OracleError> {
    check_temperature(temperature)?;
    if net.n() > DENSE_CAP {
        return Err(OracleError::SizeCapExceeded {
            n: net.n(),
            cap: DENSE_CAP,
        });
    }
    Ok(net
        .generator(temperature)
        .expect("temperature checked")
        .to_dense())
}

/// Committor ("capacitor") toward `source` against the sink set: h(source) = 1,
/// h = 0 on `sinks`, and (L h)(i) = 0 on interior states.
pub fn committor(
    net: &Network,
    temperature: f64,
    source: StateId,
    sinks: &[StateId],
) -> Result<Vec<f64>, OracleError> {
    if sinks.is_empty() {
        return Err(OracleError::BadSubset("sink set is empty"));
    }
    if sinks.contains(&source) {
        return Err(OracleError::BadSubset(
            "source must not belong to the sink set",
        ));
    }
    let n = net.n();
    let l = dense_generator(net, temperature)?;
    let mut fixed = vec![None::<f64>; n];
    fixed[source.index()] = Some(1.0);
    for s in sinks {
        fixed[s.index()] = Some(0.0);
    }
    let interior: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut h: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    if interior.is_empty() {
        return Ok(h);
    }
    let dim = interior.len();
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    for (r, &i) in interior.iter().enumerate() {
        for (c, &j) in interior.iter().enumerate() {
            a[(r, c)] = l[(i, j)];
        }
        b[r] = -l[(i, source.index())];
    }
    let sol = a.lu().solve(&b).ok_or(OracleError::Singular)?;
    for (r, &i) in interior.iter().enumerate() {
        h[i] = sol[r];
    }
    Ok(h)
}

/// Expected hitting times of the target set: t = 0 on targets, (L t)(i) = -1 elsewhere.
pub fn mean_hitting_times(
    net: &Network,
    temperature: f64,
    targets: &[StateId],
) -> Result<Vec<f64>, OracleError> {
    if targets.is_empty() {
        return Err(OracleError::BadSubset("target set is empty"));
    }
    let n = net.n();
    let l = dense_generator(net, temperature)?;
    let mut on_target = vec![false; n];
    for s in targets {
        on_target[s.index()] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !on_target[i]).collect();
    let mut t = vec![0.0; n];
    if free.is_empty() {
        return Ok(t);
    }
    let dim = free.len();
    let mut a = DMatrix::zeros(dim, dim);
    let b = DVector::from_element(dim, -1.0);
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            a[(r, c)] = l[(i, j)];
        }
    }
    let sol = a.lu().solve(&b).ok_or(OracleError::Singular)?;
    for (r, &i) in free.iter().enumerate() {
        t[i] = sol[r];
    }
    Ok(t)
}

/// Evolve a probability distribution: p(t) = pi + sum_j (phi_j^T p0) P phi_j e^(-lambda_j t).
pub fn propagate(
    net: &Network,
    temperature: f64,
    p0: &[f64],
    time: f64,
) -> Result<Vec<f64>, OracleError> {
    if p0.len() != net.n() {
        return Err(OracleError::BadInput(
            "initial distribution has wrong length",
        ));
    }
    if p0.iter().any(|&x| x < -1e-12) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(OracleError::BadInput(
            "initial distribution must be a probability vector",
        ));
    }
    if time < 0.0 {
        return Err(OracleError::BadInput("time must be nonnegative"));
    }
    let dec = dense_spectrum(net, temperature)?;
    let n = net.n();
    let mut p = dec.equilibrium.clone();
    for j in 1..dec.eigenvalues.len() {
        let phi = &dec.eigenvectors[j];
        let coeff: f64 = phi.iter().zip(p0).map(|(x, y)| x * y).sum();
        let decay = (-dec.eigenvalues[j] * time).exp();
        for i in 0..n {
            p[i] += coeff * dec.equilibrium[i] * phi[i] * decay;
        }
    }
    Ok(p)
}

/// Asymptotic exit rate from a proper subset: smallest eigenvalue magnitude of the
/// sub-generator with the complement absorbing.
pub fn exit_rate(net: &Network, temperature: f64, subset: &[StateId]) -> Result<f64, OracleError> {
    check_temperature(temperature)?;
    let n = net.n();
    if subset.is_empty() || subset.len() >= n {
        return Err(OracleError::BadSubset("subset must be proper and nonempty"));
    }
    if subset.len() > DENSE_CAP {
        return Err(OracleError::SizeCapExceeded {
            n: subset.len(),
            cap: DENSE_CAP,
        });
    }
    let mut in_subset = vec![false; n];
    for s in subset {
        in_subset[s.index()] = true;
    }
    let k = subset.len();
    if k <= JACOBI_CAP {
        // rows of the factor restricted to the subset; keep any column touching it
        let mut pos = vec![usize::MAX; n];
        for (r, s) in subset.iter().enumerate() {
            pos[s.index()] = r;
        }
        let full = sqrt_rate_factor(net, temperature);
        let cols: Vec<Vec<f64>> = full
            .iter()
            .zip(net.edges())
            .filter(|(_, rec)| in_subset[rec.a.index()] || in_subset[rec.b.index()])
            .map(|(col, _)| {
                let mut sub = vec![0.0; k];
                for (i, &x) in col.iter().enumerate() {
                    if pos[i] != usize::MAX {
                        sub[pos[i]] = x;
                    }
                }
                sub
            })
            .collect();
        let pairs = jacobi::singular_pairs(cols);
        pairs
            .get(k - 1)
            .map(|(l, _)| *l)
            .ok_or(OracleError::BadSubset("subset has no outgoing edges"))
    } else {
        let l = dense_generator(net, temperature)?;
        let idx: Vec<usize> = subset.iter().map(|s| s.index()).collect();
        let sqrt_pi = sqrt_equilibrium(net, temperature);
        let mut a = DMatrix::zeros(k, k);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[(r, c)] = if r == c {
                    l[(i, i)]
                } else {
                    sqrt_pi[i] / sqrt_pi[j] * l[(i, j)]
                };
            }
        }
        let a = 0.5 * (&a + a.transpose());
        let eig = a.symmetric_eigen();
        Ok(eig
            .eigenvalues
            .iter()
            .map(|x| x.abs())
            .fold(f64::INFINITY, f64::min))
    }
}

/// Hitting-time ratio for a sink set M: rho = sup_{i not in M} E_i[tau_M] divided by
/// inf_{s in M} E_s[tau_{M minus s}].
pub fn bovier_ratio(
    net: &Network,
    temperature: f64,
    sinks: &[StateId],
) -> Result<BovierRatio, OracleError> {
    if sinks.len() < 2 {
        return Err(OracleError::BadSubset(
            "Bovier ratio needs at least two sinks",
        ));
    }
    let mut min_return = f64::INFINITY;
    for (pos, &s) in sinks.iter().enumerate() {
        let others: Vec<StateId> = sinks
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != pos)
            .map(|(_, &x)| x)
            .collect();
        let t = mean_hitting_times(net, temperature, &others)?;
        min_return = min_return.min(t[s.index()]);
    }
    let approach = mean_hitting_times(net, temperature, sinks)?;
    let in_m: Vec<bool> = {
        let mut f = vec![false; net.n()];
        for s in sinks {
            f[s.index()] = true;
        }
        f
    };
    let max_approach = approach
        .iter()
        .enumerate()
        .filter(|&(i, _)| !in_m[i])
        .map(|(_, &t)| t)
        .fold(0.0, f64::max);
    Ok(BovierRatio {
        rho: max_approach / min_return,
        min_return_time: min_return,
        max_approach_time: max_approach,
        sink_count: sinks.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven_well, three_chain, two_state};

    #[test]
    fn enumerate_chain_vk() {
        let net = three_chain();
        // k = 2: sinks {1,3}, arrow 2 -> 1 beats 2 -> 3 (2.0 vs 2.5... costs: V_12-V_2=2
        // vs V_23-V_2=3.5; totals 2.0 vs 3.5)
        let (v2, g2) = enumerate_vk(&net, 2).unwrap();
        assert!((v2 - 2.0).abs() < 1e-15);
        assert_eq!(g2.sinks, vec![StateId(1), StateId(3)]);
        assert_eq!(g2.arrows[1], Some(StateId(1)));
        assert!(g2.is_valid(&net));

        let (v1, g1) = enumerate_vk(&net, 1).unwrap();
        assert!((v1 - 4.5).abs() < 1e-15);
        assert_eq!(g1.sinks, vec![StateId(1)]);

        let (v3, g3) = enumerate_vk(&net, 3).unwrap();
        assert_eq!(v3, 0.0);
        assert!(g3.arrows.iter().all(|a| a.is_none()));
    }

    #[test]
    fn enumeration_cap() {
        let states = (1..=11)
            .map(|i| crate::network::StateRecord::new(i, i as f64 * 0.11))
            .collect();
        let edges = (1..=10)
            .map(|i| crate::network::EdgeRecord::new(i, i + 1, 2.0 + 0.13 * i as f64))
            .collect();
        let net = Network::new(states, edges).unwrap();
        assert!(matches!(
            enumerate_vk(&net, 1),
            Err(OracleError::SizeCapExceeded { .. })
        ));
    }

    #[test]
    fn two_state_spectrum_exact() {
        let net = two_state();
        let t = 0.7;
        let dec = dense_spectrum(&net, t).unwrap();
        let gen = net.generator(t).unwrap();
        let expected = gen.rate(StateId(1), StateId(2)) + gen.rate(StateId(2), StateId(1));
        assert_eq!(dec.eigenvalues[0], 0.0);
        assert!((dec.eigenvalues[1] - expected).abs() <= 1e-15 * expected);
        assert_eq!(dec.eigenvectors[0], vec![1.0, 1.0]);
    }

    #[test]
    fn chain_asymptotics_at_low_temperature() {
        let net = three_chain();
        let dec = dense_spectrum(&net, 0.05).unwrap();
        let estimate = -0.05 * dec.eigenvalues[1].ln();
        assert!((estimate - 2.5).abs() < 0.1, "estimate {estimate}");
    }

    #[test]
    fn p_orthonormal_eigenvectors() {
        let net = seven_well();
        let dec = dense_spectrum(&net, 0.3).unwrap();
        for a in 0..dec.eigenvectors.len() {
            for b in a..dec.eigenvectors.len() {
                let dot: f64 = dec.eigenvectors[a]
                    .iter()
                    .zip(&dec.eigenvectors[b])
                    .zip(&dec.equilibrium)
                    .map(|((x, y), p)| x * y * p)
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "phi_{a}^T P phi_{b} = {dot}");
            }
        }
    }

    #[test]
    fn committor_cases() {
        let net = two_state();
        let h = committor(&net, 0.5, StateId(2), &[StateId(1)]).unwrap();
        assert_eq!(h, vec![0.0, 1.0]);

        // mirror-symmetric 3-chain: interior state sits at 1/2
        let sym = Network::new(
            vec![
                crate::network::StateRecord::new(1, 0.0),
                crate::network::StateRecord::new(2, 1.0),
                crate::network::StateRecord::new(3, 0.0),
            ],
            vec![
                crate::network::EdgeRecord::new(1, 2, 3.0),
                crate::network::EdgeRecord::new(2, 3, 3.0),
            ],
        )
        .unwrap();
        let h = committor(&sym, 0.4, StateId(3), &[StateId(1)]).unwrap();
        assert!((h[1] - 0.5).abs() < 1e-12);

        // asymmetric chain: h(2) = L_23 / (L_21 + L_23)
        let net = three_chain();
        let t = 0.05;
        let gen = net.generator(t).unwrap();
        let expected = gen.rate(StateId(2), StateId(3))
            / (gen.rate(StateId(2), StateId(1)) + gen.rate(StateId(2), StateId(3)));
        let h = committor(&net, t, StateId(3), &[StateId(1)]).unwrap();
        assert!((h[1] - expected).abs() <= 1e-12 * expected.max(1e-30));
        assert!(h[1] < 0.05);
    }

    #[test]
    fn committor_rejects_source_in_sinks() {
        let net = two_state();
        assert!(matches!(
            committor(&net, 0.5, StateId(1), &[StateId(1)]),
            Err(OracleError::BadSubset(_))
        ));
    }

    #[test]
    fn hitting_time_cases() {
        let net = two_state();
        let t = mean_hitting_times(&net, 0.5, &[StateId(1)]).unwrap();
        assert_eq!(t[0], 0.0);
        let gen = net.generator(0.5).unwrap();
        let expected = 1.0 / gen.rate(StateId(2), StateId(1));
        assert!((t[1] - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn hitting_time_log_slope_tracks_barrier() {
        // E_3[tau_{1}] ~ exp(Delta/T) with Delta ~ 2.5
        let net = three_chain();
        let sweep = [0.2, 0.1, 0.05];
        let times: Vec<f64> = sweep
            .iter()
            .map(|&t| mean_hitting_times(&net, t, &[StateId(1)]).unwrap()[StateId(3).index()])
            .collect();
        for w in sweep.windows(2).zip(times.windows(2)) {
            let (ts, vals) = w;
            let slope = (vals[1].ln() - vals[0].ln()) / (1.0 / ts[1] - 1.0 / ts[0]);
            assert!((slope - 2.5).abs() < 0.15 * 2.5, "slope {slope}");
        }
    }

    #[test]
    fn propagate_limits() {
        let net = three_chain();
        let t = 0.4;
        let p0 = vec![0.0, 0.0, 1.0];
        let at_zero = propagate(&net, t, &p0, 0.0).unwrap();
        assert!(at_zero.iter().zip(&p0).all(|(a, b)| (a - b).abs() < 1e-9));
        let dec = dense_spectrum(&net, t).unwrap();
        let horizon = 100.0 / dec.eigenvalues[1];
        let p = propagate(&net, t, &p0, horizon).unwrap();
        let pi = net.equilibrium(t).unwrap();
        let tv: f64 = p.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-8, "total variation {tv}");
    }

    #[test]
    fn propagate_conserves_probability() {
        let net = seven_well();
        let mut p0 = vec![0.0; 7];
        p0[3] = 0.25;
        p0[6] = 0.75;
        for time in [0.0, 1.0, 1e6] {
            let p = propagate(&net, 0.25, &p0, time).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(p.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn eigenpairs_satisfy_generator_equation() {
        let net = seven_well();
        let t = 0.3;
        let dec = dense_spectrum(&net, t).unwrap();
        let l = net.generator(t).unwrap().to_dense();
        let scale = l.amax();
        for (lambda, phi) in dec.eigenvalues.iter().zip(&dec.eigenvectors) {
            let v = nalgebra::DVector::from_column_slice(phi);
            let residual = (&l * &v + &v * *lambda).amax();
            assert!(
                residual <= 1e-10 * scale * v.amax().max(1.0),
                "residual {residual} at lambda {lambda}"
            );
        }
    }

    #[test]
    fn propagate_two_state_closed_form() {
        let net = two_state();
        let t = 0.6;
        let gen = net.generator(t).unwrap();
        let rate = gen.rate(StateId(1), StateId(2)) + gen.rate(StateId(2), StateId(1));
        let pi = net.equilibrium(t).unwrap();
        let p0 = vec![1.0, 0.0];
        for time in [0.0, 0.5 / rate, 2.0 / rate] {
            let p = propagate(&net, t, &p0, time).unwrap();
            for i in 0..2 {
                let expected = pi[i] + (p0[i] - pi[i]) * (-rate * time).exp();
                assert!((p[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exit_rate_cases() {
        let net = two_state();
        let t = 0.5;
        let gen = net.generator(t).unwrap();
        let r = exit_rate(&net, t, &[StateId(2)]).unwrap();
        let expected = gen.rate(StateId(2), StateId(1));
        assert!((r - expected).abs() <= 1e-12 * expected);

        let net = three_chain();
        let t = 0.05;
        let r = exit_rate(&net, t, &[StateId(3)]).unwrap();
        let expected = net.generator(t).unwrap().rate(StateId(3), StateId(2));
        assert!((r - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn exit_rate_rejects_improper_subsets() {
        let net = two_state();
        assert!(exit_rate(&net, 0.5, &[]).is_err());
        assert!(exit_rate(&net, 0.5, &[StateId(1), StateId(2)]).is_err());
    }

    #[test]
    fn bovier_ratio_small_on_metastable_chain() {
        let net = seven_well();
        let sinks = [StateId(1), StateId(2), StateId(7)];
        let b = bovier_ratio(&net, 0.15, &sinks).unwrap();
        assert!(b.rho < 1.0, "rho {}", b.rho);
        assert!(b.min_return_time > b.max_approach_time);
    }
}
