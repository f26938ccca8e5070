//! Disconnectivity graph: the single-linkage merge tree of the MST edges taken in
//! ascending saddle order. Leaves are states; each internal node records the saddle
//! level at which two sub-landscapes merge.

use super::IoError;
use crate::mstree::SpanningForest;
use crate::network::{EdgeId, Network, StateId};
use crate::spectrum::SpectrumResult;

#[derive(Clone, Debug)]
pub enum DendrogramNode {
    Leaf {
        state: StateId,
        potential: f64,
    },
    Merge {
        level: f64,
        edge: EdgeId,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Dendrogram {
    /// First n entries are the leaves (index = state index), then the n-1 merges in
    /// ascending level order.
    pub nodes: Vec<DendrogramNode>,
    pub root: usize,
    /// States sorted by the ordering key: these are the x-axis positions. The merge
    /// tree is independent of this assignment, and connecting lines may cross it.
    pub leaf_order: Vec<StateId>,
}

/// How states are arranged along the x-axis.
#[derive(Clone, Copy)]
pub enum LeafOrdering<'a> {
    ById,
    /// By position in the sink sequence of a full spectrum run.
    BySink(&'a SpectrumResult),
    Explicit(&'a [StateId]),
}

pub fn dendrogram(
    net: &Network,
    forest: &SpanningForest,
    ordering: LeafOrdering<'_>,
) -> Result<Dendrogram, IoError> {
    assert!(
        forest.is_spanning(),
        "dendrogram requires the uncut spanning tree"
    );
    let n = net.n();
    let key: Vec<u64> = match ordering {
        LeafOrdering::ById => (0..n as u64).collect(),
        LeafOrdering::BySink(res) => {
            let mut keys = vec![0u64; n];
            for (i, key) in keys.iter_mut().enumerate() {
                let s = StateId::from_index(i);
                *key = res.sink_index(s).ok_or_else(|| {
                    IoError::OrderingUnavailable(format!(
                        "state {s} never became a sink (threshold-truncated run?)"
                    ))
                })? as u64;
            }
            keys
        }
        LeafOrdering::Explicit(order) => {
            if order.len() != n {
                return Err(IoError::OrderingUnavailable(format!(
                    "explicit ordering lists {} states, network has {n}",
                    order.len()
                )));
            }
            let mut keys = vec![u64::MAX; n];
            for (pos, s) in order.iter().enumerate() {
                keys[s.index()] = pos as u64;
            }
            if keys.contains(&u64::MAX) {
                return Err(IoError::OrderingUnavailable(
                    "explicit ordering does not cover every state".into(),
                ));
            }
            keys
        }
    };

    let mut nodes: Vec<DendrogramNode> = (0..n)
        .map(|i| DendrogramNode::Leaf {
            state: StateId::from_index(i),
            potential: net.potential(StateId::from_index(i)),
        })
        .collect();

    let mut edges: Vec<EdgeId> = forest.alive_edges().collect();
    edges.sort_by(|&a, &b| net.saddle(a).total_cmp(&net.saddle(b)).then(a.cmp(&b)));

    // union-find carrying the current node handle and minimal leaf key per root
    let mut parent: Vec<usize> = (0..n).collect();
    let mut handle: Vec<usize> = (0..n).collect();
    let mut min_key: Vec<u64> = key.clone();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for e in edges {
        let rec = net.edge(e);
        let ra = find(&mut parent, rec.a.index());
        let rb = find(&mut parent, rec.b.index());
        debug_assert_ne!(ra, rb, "spanning tree edges never close a cycle");
        let (first, second) = if min_key[ra] <= min_key[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let node = nodes.len();
        nodes.push(DendrogramNode::Merge {
            level: net.saddle(e),
            edge: e,
            left: handle[first],
            right: handle[second],
        });
        parent[second] = first;
        handle[first] = node;
        min_key[first] = min_key[first].min(min_key[second]);
    }

    let root = if n == 1 { 0 } else { nodes.len() - 1 };
    let mut leaf_order: Vec<StateId> = (0..n).map(StateId::from_index).collect();
    leaf_order.sort_by_key(|s| key[s.index()]);
    Ok(Dendrogram {
        nodes,
        root,
        leaf_order,
    })
}

impl Dendrogram {
    pub fn leaves(&self) -> usize {
        self.leaf_order.len()
    }

    pub fn merge_levels(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                DendrogramNode::Merge { level, .. } => Some(*level),
                DendrogramNode::Leaf { .. } => None,
            })
            .collect()
    }

    /// Every merge level must exceed the maximal leaf potential beneath it.
    pub fn levels_dominate_leaves(&self) -> bool {
        fn max_leaf(nodes: &[DendrogramNode], i: usize, ok: &mut bool) -> f64 {
            match &nodes[i] {
                DendrogramNode::Leaf { potential, .. } => *potential,
                DendrogramNode::Merge {
                    level, left, right, ..
                } => {
                    let m = max_leaf(nodes, *left, ok).max(max_leaf(nodes, *right, ok));
                    if *level <= m {
                        *ok = false;
                    }
                    m.max(*level)
                }
            }
        }
        let mut ok = true;
        max_leaf(&self.nodes, self.root, &mut ok);
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven_well, three_chain, two_state};
    use crate::mstree::kruskal;
    use crate::spectrum::{run, SpectrumOptions};

    #[test]
    fn chain_structure() {
        let net = three_chain();
        let forest = kruskal(&net);
        let d = dendrogram(&net, &forest, LeafOrdering::ById).unwrap();
        // root at 4.5 with children {leaf 3} and node(3.0: leaves 1, 2)
        match &d.nodes[d.root] {
            DendrogramNode::Merge {
                level, left, right, ..
            } => {
                assert_eq!(*level, 4.5);
                match (&d.nodes[*left], &d.nodes[*right]) {
                    (DendrogramNode::Merge { level, .. }, DendrogramNode::Leaf { state, .. }) => {
                        assert_eq!(*level, 3.0);
                        assert_eq!(*state, StateId(3));
                    }
                    other => panic!("unexpected children {other:?}"),
                }
            }
            other => panic!("root is not a merge: {other:?}"),
        }
        assert_eq!(d.leaf_order, vec![StateId(1), StateId(2), StateId(3)]);
        assert!(d.levels_dominate_leaves());
    }

    #[test]
    fn two_state_single_merge() {
        let net = two_state();
        let d = dendrogram(&net, &kruskal(&net), LeafOrdering::ById).unwrap();
        assert_eq!(d.merge_levels(), vec![2.0]);
    }

    #[test]
    fn seven_well_by_sink_leaf_order() {
        let net = seven_well();
        let res = run(&net, &SpectrumOptions::default()).unwrap();
        let d = dendrogram(&net, &kruskal(&net), LeafOrdering::BySink(&res)).unwrap();
        let expected: Vec<StateId> = [1u32, 2, 7, 5, 6, 3, 4]
            .iter()
            .map(|&i| StateId(i))
            .collect();
        assert_eq!(d.leaf_order, expected);
    }

    #[test]
    fn merge_levels_match_mst_costs() {
        let net = seven_well();
        let forest = kruskal(&net);
        let d = dendrogram(&net, &forest, LeafOrdering::ById).unwrap();
        let mut levels = d.merge_levels();
        let mut costs: Vec<f64> = forest.alive_edges().map(|e| net.saddle(e)).collect();
        levels.sort_by(f64::total_cmp);
        costs.sort_by(f64::total_cmp);
        assert_eq!(levels, costs);
        assert!(d.levels_dominate_leaves());
    }

    #[test]
    fn ordering_errors() {
        let net = three_chain();
        let forest = kruskal(&net);
        let res = run(
            &net,
            &SpectrumOptions {
                mode: crate::spectrum::RunMode::Threshold(2.2),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            dendrogram(&net, &forest, LeafOrdering::BySink(&res)),
            Err(IoError::OrderingUnavailable(_))
        ));
        assert!(dendrogram(&net, &forest, LeafOrdering::Explicit(&[StateId(1)])).is_err());
    }
}
