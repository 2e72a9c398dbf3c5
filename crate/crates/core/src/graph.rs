//! Social graph (undirected, simple) and negative-feedback graph (directed,
//! simple) over a shared dense node index space.

use std::fmt;

use crate::{Error, Result};

/// Dense node index. Valid ids for a graph are `0..node_count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

fn check_node(v: NodeId, node_count: usize) -> Result<()> {
    if v.index() < node_count {
        Ok(())
    } else {
        Err(Error::OutOfRange { node: v, node_count })
    }
}

/// Inserts `x` into a sorted vector; returns false if already present.
fn sorted_insert(list: &mut Vec<u32>, x: u32) -> bool {
    match list.binary_search(&x) {
        Ok(_) => false,
        Err(pos) => {
            list.insert(pos, x);
            true
        }
    }
}

/// Undirected simple graph of accepted friendships.
///
/// Neighbor lists are kept sorted, which makes iteration order (and so every
/// floating-point accumulation over neighbors) deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl SocialGraph {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidSize);
        }
        Ok(SocialGraph { adjacency: vec![Vec::new(); node_count], edge_count: 0 })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Adds the undirected edge `{u, v}`. Returns whether it was new.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool> {
        let n = self.node_count();
        check_node(u, n)?;
        check_node(v, n)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !sorted_insert(&mut self.adjacency[u.index()], v.0) {
            return Ok(false);
        }
        sorted_insert(&mut self.adjacency[v.index()], u.0);
        self.edge_count += 1;
        Ok(true)
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        check_node(v, self.node_count())?;
        Ok(self.adjacency[v.index()].len())
    }

    /// Sorted neighbor indices of `v`. Panics if `v` is out of range.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[u32] {
        &self.adjacency[v.index()]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u.index())
            .is_some_and(|adj| adj.binary_search(&v.0).is_ok())
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::new)
    }

    /// Every edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, adj)| {
            let u = u as u32;
            adj.iter().filter(move |&&v| v > u).map(move |&v| (NodeId(u), NodeId(v)))
        })
    }

    /// Grows the node set by `extra` isolated nodes. Existing ids are kept.
    pub fn extend_nodes(&mut self, extra: usize) {
        self.adjacency.resize(self.adjacency.len() + extra, Vec::new());
    }
}

/// Directed simple graph of negative feedback: an edge `from -> to` means
/// `from` rejected or flagged `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackGraph {
    out_edges: Vec<Vec<u32>>,
    in_degree: Vec<u32>,
    edge_count: usize,
}

impl FeedbackGraph {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidSize);
        }
        Ok(FeedbackGraph {
            out_edges: vec![Vec::new(); node_count],
            in_degree: vec![0; node_count],
            edge_count: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.out_edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Records that `from` gave negative feedback to `to`. Returns whether the
    /// edge was new; at most one edge exists per ordered pair.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> Result<bool> {
        let n = self.node_count();
        check_node(from, n)?;
        check_node(to, n)?;
        if from == to {
            return Err(Error::SelfLoop(from));
        }
        if !sorted_insert(&mut self.out_edges[from.index()], to.0) {
            return Ok(false);
        }
        self.in_degree[to.index()] += 1;
        self.edge_count += 1;
        Ok(true)
    }

    /// Number of feedback edges received by `v`.
    pub fn in_degree(&self, v: NodeId) -> Result<usize> {
        check_node(v, self.node_count())?;
        Ok(self.in_degree[v.index()] as usize)
    }

    #[inline]
    pub(crate) fn in_degree_unchecked(&self, v: usize) -> usize {
        self.in_degree[v] as usize
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.out_edges
            .get(from.index())
            .is_some_and(|out| out.binary_search(&to.0).is_ok())
    }

    /// Every edge as `(from, to)`, ordered by `from` then `to`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_edges.iter().enumerate().flat_map(|(u, out)| {
            out.iter().map(move |&v| (NodeId(u as u32), NodeId(v)))
        })
    }

    pub fn extend_nodes(&mut self, extra: usize) {
        let n = self.out_edges.len() + extra;
        self.out_edges.resize(n, Vec::new());
        self.in_degree.resize(n, 0);
    }
}

/// Empty social and feedback graphs over the same `node_count` nodes.
pub fn new_graphs(node_count: usize) -> Result<(SocialGraph, FeedbackGraph)> {
    Ok((SocialGraph::new(node_count)?, FeedbackGraph::new(node_count)?))
}

pub fn social_degree(g: &SocialGraph, v: NodeId) -> Result<usize> {
    g.degree(v)
}

pub fn feedback_in_degree(f: &FeedbackGraph, v: NodeId) -> Result<usize> {
    f.in_degree(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    #[test]
    fn empty_construction() {
        let (g, f) = new_graphs(3).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(f.node_count(), 3);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(f.edge_count(), 0);

        let (g, _) = new_graphs(15_000).unwrap();
        assert_eq!(g.node_count(), 15_000);

        assert!(matches!(new_graphs(0), Err(Error::InvalidSize)));
    }

    #[test]
    fn single_edge_and_repeat() {
        let mut g = SocialGraph::new(4).unwrap();
        assert!(g.add_edge(n(0), n(2)).unwrap());
        assert_eq!(g.degree(n(0)).unwrap(), 1);
        assert_eq!(g.degree(n(2)).unwrap(), 1);
        assert!(!g.add_edge(n(2), n(0)).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(n(0)).unwrap(), 1);
    }

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        let (mut g, mut f) = new_graphs(3).unwrap();
        assert!(matches!(g.add_edge(n(1), n(1)), Err(Error::SelfLoop(_))));
        assert!(matches!(g.add_edge(n(1), n(3)), Err(Error::OutOfRange { .. })));
        assert!(matches!(f.add_edge(n(2), n(2)), Err(Error::SelfLoop(_))));
        assert!(matches!(f.add_edge(n(7), n(0)), Err(Error::OutOfRange { .. })));
        assert!(g.degree(n(3)).is_err());
        assert!(f.in_degree(n(3)).is_err());
    }

    #[test]
    fn feedback_direction_and_dedup() {
        let mut f = FeedbackGraph::new(2).unwrap();
        let (r, s) = (n(0), n(1));
        assert!(f.add_edge(r, s).unwrap());
        assert_eq!(f.in_degree(s).unwrap(), 1);
        assert_eq!(f.in_degree(r).unwrap(), 0);
        assert!(!f.add_edge(r, s).unwrap());
        assert_eq!(f.in_degree(s).unwrap(), 1);
        // the reverse direction is a distinct ordered pair
        assert!(f.add_edge(s, r).unwrap());
        assert_eq!(f.edge_count(), 2);
    }

    #[test]
    fn degree_queries() {
        let (g, f) = new_graphs(1).unwrap();
        assert_eq!(social_degree(&g, n(0)).unwrap(), 0);
        assert_eq!(feedback_in_degree(&f, n(0)).unwrap(), 0);

        let mut tri = SocialGraph::new(3).unwrap();
        tri.add_edge(n(0), n(1)).unwrap();
        tri.add_edge(n(1), n(2)).unwrap();
        tri.add_edge(n(2), n(0)).unwrap();
        for v in tri.nodes() {
            assert_eq!(tri.degree(v).unwrap(), 2);
        }

        let mut star = SocialGraph::new(85).unwrap();
        for leaf in 1..85 {
            star.add_edge(n(0), n(leaf)).unwrap();
        }
        assert_eq!(star.degree(n(0)).unwrap(), 84);
    }

    proptest! {
        #[test]
        fn graph_invariants(n_nodes in 2usize..30, pairs in prop::collection::vec((0u32..30, 0u32..30), 0..120)) {
            let (mut g, mut f) = new_graphs(n_nodes).unwrap();
            for (a, b) in pairs {
                let (a, b) = (n(a % n_nodes as u32), n(b % n_nodes as u32));
                let before: Vec<usize> = g.nodes().map(|v| g.degree(v).unwrap()).collect();
                match g.add_edge(a, b) {
                    Ok(false) => {
                        let after: Vec<usize> = g.nodes().map(|v| g.degree(v).unwrap()).collect();
                        prop_assert_eq!(before, after);
                    }
                    Ok(true) => {}
                    Err(_) => prop_assert_eq!(a, b),
                }
                let _ = f.add_edge(a, b);
            }
            for u in g.nodes() {
                prop_assert!(!g.has_edge(u, u));
                for &v in g.neighbors(u) {
                    prop_assert!(g.has_edge(NodeId(v), u));
                }
            }
            let deg_sum: usize = g.nodes().map(|v| g.degree(v).unwrap()).sum();
            prop_assert_eq!(deg_sum, 2 * g.edge_count());
            prop_assert_eq!(g.edges().count(), g.edge_count());
            let in_sum: usize = (0..n_nodes).map(|v| f.in_degree(NodeId::new(v)).unwrap()).sum();
            prop_assert_eq!(in_sum, f.edge_count());
            prop_assert!(f.edges().all(|(a, b)| a != b));
        }
    }
}
