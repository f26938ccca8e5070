//! Minimum spanning tree under the saddle-potential cost `c_ij = V_ij`, plus the
//! path/minimax and cut machinery the spectrum surgery runs on.

use crate::network::{EdgeId, Network, StateId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("states {0} and {1} are in different components")]
    DifferentComponents(u32, u32),
    #[error("edge {0:?} is not part of the spanning forest")]
    NotTreeEdge(EdgeId),
    #[error("edge {0:?} has already been cut")]
    DeadEdge(EdgeId),
}

/// A spanning tree of the network that spectrum surgery progressively cuts into a
/// forest. Acyclic at all times; after k cuts it has exactly k+1 components.
#[derive(Clone, Debug)]
pub struct SpanningForest {
    n: usize,
    /// The n-1 tree edges in the order Kruskal accepted them.
    tree_edges: Vec<EdgeId>,
    /// Alive flag per tree position.
    alive: Vec<bool>,
    /// EdgeId index -> position in `tree_edges` (u32::MAX for non-tree edges).
    tree_pos: Vec<u32>,
    /// Per state: (neighbor state, tree position) over all tree edges, dead or alive.
    adjacency: Vec<Vec<(StateId, u32)>>,
    alive_count: usize,
}

const NOT_TREE: u32 = u32::MAX;

/// Union-find with path halving and union by rank.
struct DisjointSets {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
        true
    }
}

/// Kruskal's algorithm with cost `V_ij`. The network type guarantees connectivity, so
/// this always yields a spanning tree; uniqueness needs distinct saddle values (ties
/// are broken by edge id for determinism).
pub fn kruskal(net: &Network) -> SpanningForest {
    let n = net.n();
    let mut order: Vec<u32> = (0..net.m() as u32).collect();
    order.sort_by(|&a, &b| {
        net.saddle(EdgeId(a))
            .total_cmp(&net.saddle(EdgeId(b)))
            .then(a.cmp(&b))
    });
    let mut sets = DisjointSets::new(n);
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    for idx in order {
        let e = net.edge(EdgeId(idx));
        if sets.union(e.a.index() as u32, e.b.index() as u32) {
            tree_edges.push(EdgeId(idx));
            if tree_edges.len() == n - 1 {
                break;
            }
        }
    }
    debug_assert_eq!(tree_edges.len(), n.saturating_sub(1));
    SpanningForest::from_tree_edges(net, tree_edges)
}

/// Simple path between two states in the forest, with its bottleneck edge.
#[derive(Clone, Debug)]
pub struct MinimaxPath {
    /// Ordered state sequence from `a` to `b` inclusive.
    pub states: Vec<StateId>,
    /// Edge achieving the maximum saddle, `None` for the empty path `a == b`.
    pub max_edge: Option<EdgeId>,
    /// Max saddle value along the path; `-inf` sentinel for `a == b`.
    pub max_saddle: f64,
}

impl SpanningForest {
    /// Rebuild a forest from an explicit tree edge list (all alive). Used to re-create
    /// the MST for cycle queries after a spectrum run consumed the original.
    pub fn from_tree_edges(net: &Network, tree_edges: Vec<EdgeId>) -> SpanningForest {
        let n = net.n();
        let mut tree_pos = vec![NOT_TREE; net.m()];
        let mut adjacency: Vec<Vec<(StateId, u32)>> = vec![Vec::new(); n];
        for (pos, &e) in tree_edges.iter().enumerate() {
            tree_pos[e.index()] = pos as u32;
            let rec = net.edge(e);
            adjacency[rec.a.index()].push((rec.b, pos as u32));
            adjacency[rec.b.index()].push((rec.a, pos as u32));
        }
        let alive_count = tree_edges.len();
        SpanningForest {
            n,
            alive: vec![true; tree_edges.len()],
            tree_edges,
            tree_pos,
            adjacency,
            alive_count,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tree_edges(&self) -> &[EdgeId] {
        &self.tree_edges
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.tree_edges
            .iter()
            .zip(&self.alive)
            .filter(|&(_, &a)| a)
            .map(|(&e, _)| e)
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.tree_pos[e.index()] != NOT_TREE
    }

    pub fn is_alive(&self, e: EdgeId) -> Result<bool, ForestError> {
        let pos = self.tree_pos[e.index()];
        if pos == NOT_TREE {
            return Err(ForestError::NotTreeEdge(e));
        }
        Ok(self.alive[pos as usize])
    }

    pub fn alive_edge_count(&self) -> usize {
        self.alive_count
    }

    /// Components = n - alive edges (forest invariant).
    pub fn component_count(&self) -> usize {
        self.n - self.alive_count
    }

    pub fn is_spanning(&self) -> bool {
        self.alive_count + 1 == self.n
    }

    /// Alive neighbors of `s` with the connecting edge.
    pub fn neighbors(&self, s: StateId) -> impl Iterator<Item = (StateId, EdgeId)> + '_ {
        self.adjacency[s.index()]
            .iter()
            .filter(|&&(_, pos)| self.alive[pos as usize])
            .map(|&(t, pos)| (t, self.tree_edges[pos as usize]))
    }

    /// States of the alive component containing `s`, in DFS discovery order.
    pub fn component_of(&self, s: StateId) -> Vec<StateId> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut stack = vec![s];
        seen[s.index()] = true;
        while let Some(x) = stack.pop() {
            out.push(x);
            for (t, _) in self.neighbors(x) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    stack.push(t);
                }
            }
        }
        out
    }

    pub fn same_component(&self, a: StateId, b: StateId) -> bool {
        if a == b {
            return true;
        }
        self.path_between(a, b).is_some()
    }

    /// DFS path from `a` to `b` over alive edges; `None` if separated.
    fn path_between(&self, a: StateId, b: StateId) -> Option<Vec<(StateId, Option<EdgeId>)>> {
        // entries: (state, edge used to enter it)
        let mut prev: Vec<Option<(StateId, EdgeId)>> = vec![None; self.n];
        let mut seen = vec![false; self.n];
        seen[a.index()] = true;
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            if x == b {
                let mut rev = vec![(b, prev[b.index()].map(|(_, e)| e))];
                let mut cur = b;
                while cur != a {
                    let (p, _) = prev[cur.index()].unwrap();
                    rev.push((p, prev[p.index()].map(|(_, e)| e)));
                    cur = p;
                }
                rev.reverse();
                return Some(rev);
            }
            for (t, e) in self.neighbors(x) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    prev[t.index()] = Some((x, e));
                    stack.push(t);
                }
            }
        }
        None
    }

    /// The unique simple path from `a` to `b` with its bottleneck. In a minimum
    /// spanning tree the reported max is the minimax value over all network paths.
    pub fn minimax_path(
        &self,
        net: &Network,
        a: StateId,
        b: StateId,
    ) -> Result<MinimaxPath, ForestError> {
        if a == b {
            return Ok(MinimaxPath {
                states: vec![a],
                max_edge: None,
                max_saddle: f64::NEG_INFINITY,
            });
        }
        let path = self
            .path_between(a, b)
            .ok_or(ForestError::DifferentComponents(a.0, b.0))?;
        let mut max_saddle = f64::NEG_INFINITY;
        let mut max_edge = None;
        let states: Vec<StateId> = path
            .iter()
            .map(|&(s, e)| {
                if let Some(e) = e {
                    let v = net.saddle(e);
                    if v > max_saddle {
                        max_saddle = v;
                        max_edge = Some(e);
                    }
                }
                s
            })
            .collect();
        Ok(MinimaxPath {
            states,
            max_edge,
            max_saddle,
        })
    }

    /// Mark a tree edge dead without collecting components (surgery fast path).
    pub fn kill_edge(&mut self, e: EdgeId) -> Result<(), ForestError> {
        let pos = self.tree_pos[e.index()];
        if pos == NOT_TREE {
            return Err(ForestError::NotTreeEdge(e));
        }
        if !self.alive[pos as usize] {
            return Err(ForestError::DeadEdge(e));
        }
        self.alive[pos as usize] = false;
        self.alive_count -= 1;
        Ok(())
    }

    /// Cut a tree edge and return the two resulting component state sets
    /// (side of the edge's `a` endpoint first), each sorted by id.
    pub fn cut_edge(
        &mut self,
        net: &Network,
        e: EdgeId,
    ) -> Result<(Vec<StateId>, Vec<StateId>), ForestError> {
        self.kill_edge(e)?;
        let rec = net.edge(e);
        let mut side_a = self.component_of(rec.a);
        let mut side_b = self.component_of(rec.b);
        side_a.sort();
        side_b.sort();
        Ok((side_a, side_b))
    }

    /// Path optimality: every non-tree edge must be at least as costly as every tree
    /// edge on the path between its endpoints. Requires an uncut spanning tree.
    pub fn verify_optimality(&self, net: &Network) -> bool {
        assert!(
            self.is_spanning(),
            "optimality check requires an uncut spanning tree"
        );
        for idx in 0..net.m() {
            let e = EdgeId(idx as u32);
            if self.contains(e) {
                continue;
            }
            let rec = net.edge(e);
            let path = self
                .minimax_path(net, rec.a, rec.b)
                .expect("spanning tree connects all states");
            if rec.saddle < path.max_saddle {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeRecord, StateRecord};

    fn triangle() -> Network {
        // V_12 = 3, V_23 = 4.5, V_13 = 5
        Network::new(
            vec![
                StateRecord::new(1, 0.0),
                StateRecord::new(2, 1.0),
                StateRecord::new(3, 2.0),
            ],
            vec![
                EdgeRecord::new(1, 2, 3.0),
                EdgeRecord::new(2, 3, 4.5),
                EdgeRecord::new(1, 3, 5.0),
            ],
        )
        .unwrap()
    }

    pub(crate) fn seven_well() -> Network {
        crate::fixtures::seven_well()
    }

    #[test]
    fn kruskal_on_triangle() {
        let net = triangle();
        let forest = kruskal(&net);
        let edges: Vec<EdgeId> = forest.alive_edges().collect();
        assert_eq!(edges, vec![EdgeId(0), EdgeId(1)]); // (1,2) and (2,3)
    }

    #[test]
    fn kruskal_on_tree_network_returns_all_edges() {
        let net = Network::new(
            vec![
                StateRecord::new(1, 0.0),
                StateRecord::new(2, 1.0),
                StateRecord::new(3, 2.0),
            ],
            vec![EdgeRecord::new(1, 2, 3.0), EdgeRecord::new(2, 3, 4.5)],
        )
        .unwrap();
        let forest = kruskal(&net);
        assert_eq!(forest.alive_edge_count(), 2);
        assert!(forest.is_spanning());
    }

    #[test]
    fn kruskal_seven_well_topology() {
        let net = seven_well();
        let forest = kruskal(&net);
        let mut pairs: Vec<(u32, u32)> = forest
            .alive_edges()
            .map(|e| {
                let r = net.edge(e);
                (r.a.0, r.b.0)
            })
            .collect();
        pairs.sort();
        assert_eq!(pairs, vec![(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (5, 6)]);
    }

    #[test]
    fn minimax_path_cases() {
        let net = triangle();
        let forest = kruskal(&net);
        let same = forest.minimax_path(&net, StateId(2), StateId(2)).unwrap();
        assert_eq!(same.states, vec![StateId(2)]);
        assert!(same.max_edge.is_none());
        assert_eq!(same.max_saddle, f64::NEG_INFINITY);

        let path = forest.minimax_path(&net, StateId(1), StateId(3)).unwrap();
        assert_eq!(path.states, vec![StateId(1), StateId(2), StateId(3)]);
        assert_eq!(path.max_saddle, 4.5);
        assert!(path.max_saddle < 5.0); // better than the direct edge
    }

    #[test]
    fn cut_edge_examples() {
        // chain 1-2-3, cut (2,3)
        let net = Network::new(
            vec![
                StateRecord::new(1, 0.0),
                StateRecord::new(2, 1.0),
                StateRecord::new(3, 2.0),
            ],
            vec![EdgeRecord::new(1, 2, 3.0), EdgeRecord::new(2, 3, 4.5)],
        )
        .unwrap();
        let mut forest = kruskal(&net);
        let (a, b) = forest.cut_edge(&net, EdgeId(1)).unwrap();
        assert_eq!(a, vec![StateId(1), StateId(2)]);
        assert_eq!(b, vec![StateId(3)]);
        assert_eq!(forest.component_count(), 2);
        assert!(matches!(
            forest.kill_edge(EdgeId(1)),
            Err(ForestError::DeadEdge(_))
        ));

        // star center 1 with leaves 2..=4, cut (1,3)
        let star = Network::new(
            (1..=4)
                .map(|i| StateRecord::new(i, 0.1 * i as f64))
                .collect(),
            vec![
                EdgeRecord::new(1, 2, 1.0),
                EdgeRecord::new(1, 3, 1.1),
                EdgeRecord::new(1, 4, 1.2),
            ],
        )
        .unwrap();
        let mut forest = kruskal(&star);
        let (a, b) = forest.cut_edge(&star, EdgeId(1)).unwrap();
        assert_eq!(a, vec![StateId(1), StateId(2), StateId(4)]);
        assert_eq!(b, vec![StateId(3)]);

        // seven-well: cut (1,2)
        let net = seven_well();
        let mut forest = kruskal(&net);
        let e12 = net.edge_between(StateId(1), StateId(2)).unwrap();
        let (a, b) = forest.cut_edge(&net, e12).unwrap();
        assert_eq!(a, vec![StateId(1)]);
        assert_eq!(b, (2..=7).map(StateId).collect::<Vec<_>>());
    }

    #[test]
    fn different_components_error() {
        let net = triangle();
        let mut forest = kruskal(&net);
        forest.kill_edge(EdgeId(1)).unwrap();
        assert!(matches!(
            forest.minimax_path(&net, StateId(1), StateId(3)),
            Err(ForestError::DifferentComponents(1, 3))
        ));
    }

    #[test]
    fn optimality_checks() {
        let net = triangle();
        assert!(kruskal(&net).verify_optimality(&net));

        // spanning tree using the (1,3) edge instead of (2,3): violates path optimality
        let bad = SpanningForest::from_tree_edges(&net, vec![EdgeId(0), EdgeId(2)]);
        assert!(!bad.verify_optimality(&net));

        // tree-shaped network: vacuously optimal
        let tree = Network::new(
            vec![StateRecord::new(1, 0.0), StateRecord::new(2, 1.0)],
            vec![EdgeRecord::new(1, 2, 2.0)],
        )
        .unwrap();
        assert!(kruskal(&tree).verify_optimality(&tree));
    }
}
