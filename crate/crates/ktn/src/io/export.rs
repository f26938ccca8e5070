//! Deterministic table and graph exports. Floats use Rust's shortest round-trip
//! formatting so identical inputs produce byte-identical files.

use super::{Dendrogram, DendrogramNode, LumpedNetwork};
use crate::network::Network;
use crate::spectrum::SpectrumResult;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::{self, Write};

const TIE_BREAK_BANNER: &str =
    "# warning: symbolic tie-break was enabled; orderings at exact ties are conventional";

fn banner(res: &SpectrumResult, w: &mut impl Write) -> io::Result<()> {
    if res.tie_break_enabled() {
        writeln!(w, "{TIE_BREAK_BANNER}")?;
    }
    Ok(())
}

/// `k,sink,V_cut,Delta,C_size,S_size` in k-order.
pub fn write_delta_csv(res: &SpectrumResult, net: &Network, w: &mut impl Write) -> io::Result<()> {
    banner(res, w)?;
    writeln!(w, "k,sink,V_cut,Delta,C_size,S_size")?;
    for r in res.records() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k,
            r.sink,
            net.saddle(r.cut_edge),
            r.delta,
            r.c_size,
            r.s_size
        )?;
    }
    Ok(())
}

/// Sink sequence: `index,state` with index 0 for s*_1.
pub fn write_sinks_csv(res: &SpectrumResult, w: &mut impl Write) -> io::Result<()> {
    banner(res, w)?;
    writeln!(w, "index,state")?;
    for (i, s) in res.sink_sequence().iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    Ok(())
}

/// Member lists `S k: ...` / `C k: ...`, reconstructed per record.
pub fn write_sets_txt(
    res: &SpectrumResult,
    net: &Network,
    w: &mut impl Write,
) -> Result<(), super::IoError> {
    banner(res, w)?;
    for r in res.records() {
        let s = res.s_set(net, r.k)?;
        let c = res.c_set(net, r.k)?;
        writeln!(w, "S {}: {}", r.k, join_ids(&s))?;
        writeln!(w, "C {}: {}", r.k, join_ids(&c))?;
    }
    Ok(())
}

fn join_ids(states: &[crate::network::StateId]) -> String {
    states
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// `k,V_k` for k = 1..n (V^(n) = 0). Full runs only.
pub fn write_vk_csv(
    res: &SpectrumResult,
    net: &Network,
    w: &mut impl Write,
) -> Result<(), super::IoError> {
    let vk = res.vk_sequence(net)?;
    banner(res, w)?;
    writeln!(w, "k,V_k")?;
    for (i, v) in vk.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, v)?;
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum JsonNode {
    Leaf {
        state: u32,
        potential: f64,
    },
    Merge {
        level: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Serialize)]
struct JsonDendrogram {
    root: usize,
    leaf_order: Vec<u32>,
    nodes: Vec<JsonNode>,
}

/// Flat node-array JSON (no recursion, safe for very deep trees).
pub fn write_dendrogram_json(d: &Dendrogram, w: &mut impl Write) -> io::Result<()> {
    let doc = JsonDendrogram {
        root: d.root,
        leaf_order: d.leaf_order.iter().map(|s| s.0).collect(),
        nodes: d
            .nodes
            .iter()
            .map(|n| match n {
                DendrogramNode::Leaf { state, potential } => JsonNode::Leaf {
                    state: state.0,
                    potential: *potential,
                },
                DendrogramNode::Merge {
                    level, left, right, ..
                } => JsonNode::Merge {
                    level: *level,
                    left: *left,
                    right: *right,
                },
            })
            .collect(),
    };
    serde_json::to_writer(&mut *w, &doc)?;
    writeln!(w)
}

/// Graphviz description: leaves labeled by state id, merges by level.
pub fn write_dendrogram_dot(d: &Dendrogram, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "digraph disconnectivity {{")?;
    writeln!(w, "  rankdir=BT;")?;
    for (i, node) in d.nodes.iter().enumerate() {
        match node {
            DendrogramNode::Leaf { state, potential } => {
                writeln!(w, "  n{i} [shape=box,label=\"{state} ({potential})\"];")?;
            }
            DendrogramNode::Merge {
                level, left, right, ..
            } => {
                writeln!(w, "  n{i} [shape=point,xlabel=\"{level}\"];")?;
                writeln!(w, "  n{left} -> n{i};")?;
                writeln!(w, "  n{right} -> n{i};")?;
            }
        }
    }
    writeln!(w, "}}")
}

/// Distribution of cycle sizes |C(i)| over all states (the first sink's cycle is the
/// whole network): `size,count` sorted by size descending. Full runs only.
pub fn write_cycle_size_histogram(
    res: &SpectrumResult,
    w: &mut impl Write,
) -> Result<(), super::IoError> {
    if !res.is_complete() {
        return Err(crate::spectrum::SpectrumError::IncompleteRun.into());
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    *counts.entry(res.n()).or_default() += 1; // C(s*_1) = S
    for r in res.records() {
        *counts.entry(r.c_size).or_default() += 1;
    }
    banner(res, w)?;
    writeln!(w, "size,count")?;
    for (size, count) in counts.iter().rev() {
        writeln!(w, "{size},{count}")?;
    }
    Ok(())
}

/// Distribution of |S_k| over the top-level disjoint sets (those cut directly off the
/// first sink's component): `size,count,sinks` sorted by size descending. Together
/// with the first sink these sets partition the state space. Full runs only.
pub fn write_set_size_histogram(
    res: &SpectrumResult,
    w: &mut impl Write,
) -> Result<(), super::IoError> {
    if !res.is_complete() {
        return Err(crate::spectrum::SpectrumError::IncompleteRun.into());
    }
    let mut rows: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for r in res.records() {
        if r.parent.is_none() {
            rows.entry(r.s_size).or_default().push(r.sink.0);
        }
    }
    banner(res, w)?;
    writeln!(w, "size,count,sinks")?;
    for (size, mut sinks) in rows.into_iter().rev() {
        sinks.sort_unstable();
        let list = sinks
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(w, "{size},{},{list}", sinks.len())?;
    }
    Ok(())
}

/// Selected-set table in the layout of the factored-network data: one row per set,
/// `k,sink,V_cut,Delta,C_size,S_size`, ordered by k.
pub fn write_lumped_csv(l: &LumpedNetwork, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "k,sink,V_cut,Delta,C_size,S_size")?;
    for s in &l.sets {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.k, s.sink, s.cut_saddle, s.delta, s.c_size, s.s_size
        )?;
    }
    Ok(())
}
