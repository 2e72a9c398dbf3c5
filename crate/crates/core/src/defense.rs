//! Defense graph: the social graph with edges discounted by the negative
//! feedback their endpoints received.
//!
//! For a node `v` with social degree `d+` and feedback in-degree `d-`:
//!
//! ```text
//! net(v) = max(0, d+ - alpha * d-)
//! w(v)   = net(v) / d+            (1 for isolated nodes)
//! w(u,v) = min(w(u), w(v))
//! ```

use std::io::Write;

use crate::graph::{FeedbackGraph, NodeId, SocialGraph};
use crate::{Error, Result};

/// Penalty multiplier applied to each received feedback edge.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct OffsetFactor(f64);

impl OffsetFactor {
    /// Disables discounting; the defense graph degenerates to unit weights.
    pub const ZERO: OffsetFactor = OffsetFactor(0.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha >= 0.0 {
            Ok(OffsetFactor(alpha))
        } else {
            Err(Error::InvalidParameter(format!("offset factor must be finite and >= 0, got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[inline]
fn net_degree(social_degree: usize, feedback_degree: usize, alpha: f64) -> f64 {
    (social_degree as f64 - alpha * feedback_degree as f64).max(0.0)
}

#[inline]
fn weight_of(social_degree: usize, net: f64) -> f64 {
    if social_degree == 0 {
        1.0
    } else {
        net / social_degree as f64
    }
}

pub fn net_social_degree(g: &SocialGraph, f: &FeedbackGraph, v: NodeId, alpha: OffsetFactor) -> Result<f64> {
    Ok(net_degree(g.degree(v)?, f.in_degree(v)?, alpha.0))
}

pub fn node_weight(g: &SocialGraph, f: &FeedbackGraph, v: NodeId, alpha: OffsetFactor) -> Result<f64> {
    let d = g.degree(v)?;
    Ok(weight_of(d, net_degree(d, f.in_degree(v)?, alpha.0)))
}

/// Weighted undirected graph `(V, E+, w)` consumed by the ranker.
#[derive(Clone, Debug)]
pub struct DefenseGraph<'g> {
    social: &'g SocialGraph,
    node_weight: Vec<f64>,
    weighted_degree: Vec<f64>,
}

impl<'g> DefenseGraph<'g> {
    /// Every edge weighs 1: the unweighted SybilRank setting.
    pub fn unweighted(social: &'g SocialGraph) -> Self {
        Self::from_weights_unchecked(social, vec![1.0; social.node_count()])
    }

    /// Builds a defense graph from explicit node weights in `[0, 1]`.
    pub fn from_node_weights(social: &'g SocialGraph, node_weight: Vec<f64>) -> Result<Self> {
        if node_weight.len() != social.node_count() {
            return Err(Error::InvalidParameter(format!(
                "{} node weights for a graph of {} nodes",
                node_weight.len(),
                social.node_count()
            )));
        }
        if let Some(bad) = node_weight.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!("node weight {bad} outside [0, 1]")));
        }
        Ok(Self::from_weights_unchecked(social, node_weight))
    }

    fn from_weights_unchecked(social: &'g SocialGraph, node_weight: Vec<f64>) -> Self {
        let weighted_degree = (0..social.node_count())
            .map(|v| {
                let wv = node_weight[v];
                social.neighbors(NodeId::new(v)).iter().map(|&u| wv.min(node_weight[u as usize])).sum()
            })
            .collect();
        DefenseGraph { social, node_weight, weighted_degree }
    }

    pub fn social(&self) -> &'g SocialGraph {
        self.social
    }

    pub fn node_count(&self) -> usize {
        self.social.node_count()
    }

    pub fn node_weight(&self, v: NodeId) -> f64 {
        self.node_weight[v.index()]
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weight
    }

    /// Sum of the weights of the edges incident to `v`.
    pub fn weighted_degree(&self, v: NodeId) -> f64 {
        self.weighted_degree[v.index()]
    }

    pub(crate) fn weighted_degrees(&self) -> &[f64] {
        &self.weighted_degree
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Result<f64> {
        if !self.social.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        Ok(self.node_weight[u.index()].min(self.node_weight[v.index()]))
    }

    /// Tab-separated `node_id deg+ deg- net weight` lines, one per node.
    pub fn write_debug_tsv<W: Write>(&self, feedback: &FeedbackGraph, mut out: W) -> std::io::Result<()> {
        for v in self.social.nodes() {
            let d = self.social.neighbors(v).len();
            let dm = feedback.in_degree_unchecked(v.index());
            let w = self.node_weight[v.index()];
            writeln!(out, "{}\t{}\t{}\t{}\t{}", v, d, dm, w * d as f64, w)?;
        }
        Ok(())
    }
}

/// Discounts `g` by the feedback in `f` with offset factor `alpha`.
pub fn build_defense_graph<'g>(g: &'g SocialGraph, f: &FeedbackGraph, alpha: OffsetFactor) -> Result<DefenseGraph<'g>> {
    if g.node_count() != f.node_count() {
        return Err(Error::IncompatibleGraphs { social: g.node_count(), feedback: f.node_count() });
    }
    let weights = (0..g.node_count())
        .map(|v| {
            let d = g.neighbors(NodeId::new(v)).len();
            weight_of(d, net_degree(d, f.in_degree_unchecked(v), alpha.0))
        })
        .collect();
    Ok(DefenseGraph::from_weights_unchecked(g, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::new_graphs;
    use proptest::prelude::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    /// Node 0 with `social` friends (1..=social) and `feedback` rejectors after them.
    fn hub(social: u32, feedback: u32) -> (SocialGraph, FeedbackGraph) {
        let (mut g, mut f) = new_graphs((1 + social + feedback) as usize).unwrap();
        for i in 1..=social {
            g.add_edge(n(0), n(i)).unwrap();
        }
        for j in 0..feedback {
            f.add_edge(n(1 + social + j), n(0)).unwrap();
        }
        (g, f)
    }

    fn alpha(a: f64) -> OffsetFactor {
        OffsetFactor::new(a).unwrap()
    }

    #[test]
    fn offset_factor_validation() {
        assert!(OffsetFactor::new(-0.1).is_err());
        assert!(OffsetFactor::new(f64::NAN).is_err());
        assert_eq!(OffsetFactor::new(0.0).unwrap(), OffsetFactor::ZERO);
    }

    #[test]
    fn net_degree_examples() {
        let (g, f) = hub(10, 0);
        for a in [0.0, 1.0, 3.0] {
            assert_eq!(net_social_degree(&g, &f, n(0), alpha(a)).unwrap(), 10.0);
        }
        let (g, f) = hub(10, 6);
        assert_eq!(net_social_degree(&g, &f, n(0), alpha(1.0)).unwrap(), 4.0);
        assert_eq!(net_social_degree(&g, &f, n(0), alpha(3.0)).unwrap(), 0.0);
        assert!(net_social_degree(&g, &f, n(99), alpha(1.0)).is_err());
    }

    #[test]
    fn node_weight_examples() {
        let (g, f) = hub(10, 0);
        assert_eq!(node_weight(&g, &f, n(0), alpha(2.0)).unwrap(), 1.0);
        let (g, f) = hub(10, 6);
        assert!((node_weight(&g, &f, n(0), alpha(1.0)).unwrap() - 0.4).abs() < 1e-15);
        let (g, f) = new_graphs(1).unwrap();
        assert_eq!(node_weight(&g, &f, n(0), alpha(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn min_rule_edge_weights() {
        let mut g = SocialGraph::new(4).unwrap();
        g.add_edge(n(0), n(1)).unwrap();
        g.add_edge(n(1), n(2)).unwrap();
        g.add_edge(n(2), n(3)).unwrap();
        let dg = DefenseGraph::from_node_weights(&g, vec![1.0, 1.0, 0.4, 0.0]).unwrap();
        assert_eq!(dg.edge_weight(n(0), n(1)).unwrap(), 1.0);
        assert_eq!(dg.edge_weight(n(1), n(2)).unwrap(), 0.4);
        assert_eq!(dg.edge_weight(n(2), n(1)).unwrap(), 0.4);
        assert_eq!(dg.edge_weight(n(3), n(2)).unwrap(), 0.0);
        assert!(matches!(dg.edge_weight(n(0), n(3)), Err(Error::MissingEdge(..))));
        assert!(DefenseGraph::from_node_weights(&g, vec![1.0, 1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn path_with_discounted_middle() {
        // a-b-c-d plus an outside rejector x that flagged b
        let (mut g, mut f) = new_graphs(5).unwrap();
        let (a, b, c, d, x) = (n(0), n(1), n(2), n(3), n(4));
        g.add_edge(a, b).unwrap();
        g.add_edge(b, c).unwrap();
        g.add_edge(c, d).unwrap();
        f.add_edge(x, b).unwrap();
        let dg = build_defense_graph(&g, &f, alpha(2.0)).unwrap();
        assert_eq!(dg.node_weight(b), 0.0);
        assert_eq!(dg.edge_weight(a, b).unwrap(), 0.0);
        assert_eq!(dg.edge_weight(b, c).unwrap(), 0.0);
        assert_eq!(dg.edge_weight(c, d).unwrap(), 1.0);
        assert_eq!(dg.weighted_degree(c), 1.0);
    }

    #[test]
    fn zero_alpha_is_unit_weights() {
        let (g, f) = hub(10, 6);
        let dg = build_defense_graph(&g, &f, OffsetFactor::ZERO).unwrap();
        for (u, v) in g.edges() {
            assert_eq!(dg.edge_weight(u, v).unwrap(), 1.0);
        }
        for v in g.nodes() {
            assert_eq!(dg.weighted_degree(v), g.degree(v).unwrap() as f64);
        }
    }

    #[test]
    fn incompatible_graphs() {
        let g = SocialGraph::new(3).unwrap();
        let f = FeedbackGraph::new(4).unwrap();
        assert!(matches!(build_defense_graph(&g, &f, alpha(1.0)), Err(Error::IncompatibleGraphs { .. })));
    }

    #[test]
    fn debug_dump() {
        let (g, f) = hub(10, 6);
        let dg = build_defense_graph(&g, &f, alpha(1.0)).unwrap();
        let mut out = Vec::new();
        dg.write_debug_tsv(&f, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "0\t10\t6\t4\t0.4");
        assert_eq!(text.lines().count(), g.node_count());
    }

    proptest! {
        #[test]
        fn weights_in_range_and_monotone(
            social in 0u32..40, fb in 0u32..40, a in 0.0f64..5.0, extra in 0.0f64..2.0
        ) {
            let (g, f) = hub(social, fb);
            let w = node_weight(&g, &f, n(0), alpha(a)).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
            // non-increasing in alpha
            let w2 = node_weight(&g, &f, n(0), alpha(a + extra)).unwrap();
            prop_assert!(w2 <= w);
            // non-increasing in received feedback
            let (g3, f3) = hub(social, fb + 1);
            prop_assert!(node_weight(&g3, &f3, n(0), alpha(a)).unwrap() <= w);
        }

        #[test]
        fn edge_weights_symmetric_and_bounded(
            n_nodes in 2usize..20,
            social in prop::collection::vec((0u32..20, 0u32..20), 0..60),
            feedback in prop::collection::vec((0u32..20, 0u32..20), 0..60),
            a in 0.0f64..4.0,
        ) {
            let (mut g, mut f) = new_graphs(n_nodes).unwrap();
            let m = n_nodes as u32;
            for (u, v) in social { let _ = g.add_edge(n(u % m), n(v % m)); }
            for (u, v) in feedback { let _ = f.add_edge(n(u % m), n(v % m)); }
            let dg = build_defense_graph(&g, &f, alpha(a)).unwrap();
            for (u, v) in g.edges() {
                let w = dg.edge_weight(u, v).unwrap();
                prop_assert_eq!(w, dg.edge_weight(v, u).unwrap());
                prop_assert!((0.0..=1.0).contains(&w));
            }
            for v in g.nodes() {
                prop_assert!(dg.weighted_degree(v) <= g.degree(v).unwrap() as f64);
                if f.in_degree(v).unwrap() == 0 {
                    prop_assert_eq!(dg.node_weight(v), 1.0);
                }
            }
            // without feedback the graph is unit-weighted for every alpha
            let empty = FeedbackGraph::new(n_nodes).unwrap();
            let plain = build_defense_graph(&g, &empty, alpha(a)).unwrap();
            prop_assert!(plain.node_weights().iter().all(|&w| w == 1.0));
        }
    }
}
