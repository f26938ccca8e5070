//! Shared test harness: seeded random generic networks and brute-force references
//! (exhaustive spanning trees, exhaustive simple-path minimax) that stay independent
//! of the library's own algorithms.

// Each integration-test binary compiles this module; not every binary uses every
// reference implementation.
#![allow(dead_code)]

use ktn::network::{EdgeId, EdgeRecord, Network, StateId, StateRecord};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random connected network with `n` states and `n - 1 + extra` edges, resampled
/// until the genericness report passes.
pub fn random_generic_network(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Network {
    loop {
        let states: Vec<StateRecord> = (1..=n)
            .map(|i| StateRecord::new(i as u32, rng.gen_range(-1.0..1.0)))
            .collect();
        let mut pairs: Vec<(u32, u32)> = (2..=n as u32).map(|i| (rng.gen_range(1..i), i)).collect();
        let mut candidates: Vec<(u32, u32)> = (1..=n as u32)
            .flat_map(|a| ((a + 1)..=n as u32).map(move |b| (a, b)))
            .filter(|p| !pairs.contains(p))
            .collect();
        candidates.shuffle(rng);
        pairs.extend(candidates.into_iter().take(extra));

        let edges: Vec<EdgeRecord> = pairs
            .iter()
            .map(|&(a, b)| {
                let floor = states[a as usize - 1]
                    .potential
                    .max(states[b as usize - 1].potential);
                EdgeRecord::new(a, b, floor + rng.gen_range(0.05..2.0))
            })
            .collect();
        let net = Network::new(states, edges).expect("construction is valid");
        if net.genericness(1e-9).is_generic() {
            return net;
        }
    }
}

/// Maximum number of extra (non-tree) edges for an n-state network.
pub fn max_extra(n: usize) -> usize {
    n * (n - 1) / 2 - (n - 1)
}

/// All spanning trees by exhaustive edge-subset enumeration; returns (total cost,
/// sorted edge ids) sorted by cost ascending.
pub fn all_spanning_trees(net: &Network) -> Vec<(f64, Vec<EdgeId>)> {
    let n = net.n();
    let m = net.m();
    assert!(m <= 20, "exhaustive enumeration guard");
    let mut out = Vec::new();
    let mut subset: Vec<usize> = Vec::new();
    fn rec(
        net: &Network,
        start: usize,
        need: usize,
        subset: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<EdgeId>)>,
    ) {
        if subset.len() == need {
            // spanning + acyclic via union-find
            let n = net.n();
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            let mut joined = 0;
            for &e in subset.iter() {
                let rec = net.edge(EdgeId(e as u32));
                let (ra, rb) = (
                    find(&mut parent, rec.a.index()),
                    find(&mut parent, rec.b.index()),
                );
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
                joined += 1;
            }
            if joined == n - 1 {
                let cost = subset.iter().map(|&e| net.saddle(EdgeId(e as u32))).sum();
                out.push((cost, subset.iter().map(|&e| EdgeId(e as u32)).collect()));
            }
            return;
        }
        if start >= net.m() || net.m() - start < need - subset.len() {
            return;
        }
        for e in start..net.m() {
            subset.push(e);
            rec(net, e + 1, need, subset, out);
            subset.pop();
        }
    }
    rec(net, 0, n - 1, &mut subset, &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Minimax value over all simple paths from `a` to `b` by exhaustive DFS.
pub fn brute_minimax(net: &Network, a: StateId, b: StateId) -> f64 {
    fn dfs(
        net: &Network,
        cur: StateId,
        b: StateId,
        seen: &mut Vec<bool>,
        carried: f64,
        best: &mut f64,
    ) {
        if cur == b {
            *best = best.min(carried);
            return;
        }
        for &e in net.incident_edges(cur) {
            let next = net.edge(e).other(cur);
            if !seen[next.index()] {
                seen[next.index()] = true;
                dfs(net, next, b, seen, carried.max(net.saddle(e)), best);
                seen[next.index()] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut seen = vec![false; net.n()];
    seen[a.index()] = true;
    dfs(net, a, b, &mut seen, f64::NEG_INFINITY, &mut best);
    best
}
