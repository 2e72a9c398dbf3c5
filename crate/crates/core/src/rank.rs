//! Trust propagation ranking (SybilRank adapted to weighted edges).
//!
//! Three stages: an early-terminated power iteration that spreads trust from
//! honest seeds along edges in proportion to edge weight, normalization of
//! each node's trust by its *raw* social degree, and a descending sort.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::attack::LabeledPopulation;
use crate::defense::{build_defense_graph, DefenseGraph, OffsetFactor};
use crate::graph::{FeedbackGraph, NodeId, SocialGraph};
use crate::{Error, Result};

/// `ceil(log2(node_count))`, and at least 1.
pub fn iteration_count(node_count: usize) -> usize {
    if node_count <= 2 {
        return 1;
    }
    (usize::BITS - (node_count - 1).leading_zeros()) as usize
}

/// Trust seeds; initial trust is split evenly among them.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSet {
    seeds: Vec<NodeId>,
    total_trust: f64,
}

impl SeedSet {
    pub fn new(seeds: Vec<NodeId>, total_trust: f64) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::InvalidParameter("seed set is empty".into()));
        }
        if !(total_trust.is_finite() && total_trust > 0.0) {
            return Err(Error::InvalidParameter(format!("total trust must be positive, got {total_trust}")));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate seed".into()));
        }
        Ok(SeedSet { seeds, total_trust })
    }

    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn total_trust(&self) -> f64 {
        self.total_trust
    }

    pub fn trust_per_seed(&self) -> f64 {
        self.total_trust / self.seeds.len() as f64
    }
}

/// Samples `k` distinct honest nodes uniformly; total trust is `|V|`.
pub fn select_seeds<R: Rng + ?Sized>(pop: &LabeledPopulation, k: usize, rng: &mut R) -> Result<SeedSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("seed count must be at least 1".into()));
    }
    let honest: Vec<NodeId> = pop.honest_nodes().collect();
    if k > honest.len() {
        return Err(Error::InsufficientSeeds { requested: k, available: honest.len() });
    }
    let seeds = index::sample(rng, honest.len(), k).into_iter().map(|i| honest[i]).collect();
    SeedSet::new(seeds, pop.node_count() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrustVector {
    values: Vec<f64>,
    iteration: usize,
}

impl TrustVector {
    pub fn from_seeds(node_count: usize, seeds: &SeedSet) -> Result<Self> {
        let mut values = vec![0.0; node_count];
        let share = seeds.trust_per_seed();
        for &s in seeds.seeds() {
            let slot = values
                .get_mut(s.index())
                .ok_or(Error::OutOfRange { node: s, node_count })?;
            *slot = share;
        }
        Ok(TrustVector { values, iteration: 0 })
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        TrustVector { values, iteration: 0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.values[v.index()]
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// One synchronous update. Each node hands all of its trust to its
/// neighbors in proportion to edge weight; a node whose incident weight sums
/// to zero keeps its trust.
pub fn propagate_step(dg: &DefenseGraph<'_>, t: &TrustVector) -> TrustVector {
    let g = dg.social();
    let w = dg.node_weights();
    let wdeg = dg.weighted_degrees();
    let prev = &t.values;

    // trust emitted per unit of edge weight, or retained in place
    let mut per_weight = vec![0.0; prev.len()];
    let mut retained = vec![0.0; prev.len()];
    for v in 0..prev.len() {
        if wdeg[v] > 0.0 {
            per_weight[v] = prev[v] / wdeg[v];
        } else {
            retained[v] = prev[v];
        }
    }

    let pull = |u: usize| -> f64 {
        let wu = w[u];
        let mut acc = retained[u];
        for &v in g.neighbors(NodeId::new(u)) {
            let v = v as usize;
            acc += wu.min(w[v]) * per_weight[v];
        }
        acc
    };

    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        (0..prev.len()).into_par_iter().map(pull).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = (0..prev.len()).map(pull).collect();

    TrustVector { values, iteration: t.iteration + 1 }
}

/// Result of the propagation stage, with the worst relative deviation of
/// total trust observed over all steps.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub trust: TrustVector,
    pub max_relative_drift: f64,
}

pub fn run_trust_propagation(dg: &DefenseGraph<'_>, seeds: &SeedSet, h: usize) -> Result<Propagation> {
    if h == 0 {
        return Err(Error::ZeroIterations);
    }
    let total = seeds.total_trust();
    let mut trust = TrustVector::from_seeds(dg.node_count(), seeds)?;
    let mut max_relative_drift: f64 = 0.0;
    for _ in 0..h {
        trust = propagate_step(dg, &trust);
        max_relative_drift = max_relative_drift.max((trust.total() - total).abs() / total);
    }
    Ok(Propagation { trust, max_relative_drift })
}

/// Trust divided by raw social degree; isolated nodes get 0.
pub fn degree_normalize(g: &SocialGraph, t: &TrustVector) -> Vec<f64> {
    t.values
        .iter()
        .enumerate()
        .map(|(v, &x)| {
            let d = g.neighbors(NodeId::new(v)).len();
            if d == 0 {
                0.0
            } else {
                x / d as f64
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankedEntry {
    pub node: NodeId,
    pub trust_hat: f64,
}

/// Nodes in descending order of degree-normalized trust.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Wraps entries that are already in non-increasing `trust_hat` order.
    pub fn from_sorted(entries: Vec<RankedEntry>) -> Result<Self> {
        if entries.windows(2).any(|p| p[0].trust_hat < p[1].trust_hat) {
            return Err(Error::InvalidParameter("ranked list is not in descending order".into()));
        }
        Ok(RankedList { entries })
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.node)
    }
}

/// Sorts by descending `t_hat`. Equal values are ordered by a shuffle drawn
/// from `tie_rng`, so ties never favor low node ids.
pub fn rank_nodes<R: Rng + ?Sized>(t_hat: &[f64], tie_rng: &mut R) -> RankedList {
    let mut order: Vec<u32> = (0..t_hat.len() as u32).collect();
    order.shuffle(tie_rng);
    order.sort_by(|&a, &b| t_hat[b as usize].total_cmp(&t_hat[a as usize]));
    RankedList {
        entries: order
            .into_iter()
            .map(|v| RankedEntry { node: NodeId(v), trust_hat: t_hat[v as usize] })
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub struct RankOutcome {
    pub ranked: RankedList,
    pub max_relative_drift: f64,
}

/// Full pipeline on an arbitrary defense graph with `h` iterations.
pub fn rank_defense_graph<R: Rng + ?Sized>(
    dg: &DefenseGraph<'_>,
    seeds: &SeedSet,
    h: usize,
    tie_rng: &mut R,
) -> Result<RankOutcome> {
    let prop = run_trust_propagation(dg, seeds, h)?;
    let t_hat = degree_normalize(dg.social(), &prop.trust);
    Ok(RankOutcome { ranked: rank_nodes(&t_hat, tie_rng), max_relative_drift: prop.max_relative_drift })
}

/// Unweighted SybilRank with `ceil(log2 |V|)` iterations.
pub fn sybilrank<R: Rng + ?Sized>(g: &SocialGraph, seeds: &SeedSet, tie_rng: &mut R) -> Result<RankedList> {
    let dg = DefenseGraph::unweighted(g);
    Ok(rank_defense_graph(&dg, seeds, iteration_count(g.node_count()), tie_rng)?.ranked)
}

/// SybilRank on the feedback-discounted defense graph.
pub fn sybilfence<R: Rng + ?Sized>(
    g: &SocialGraph,
    f: &FeedbackGraph,
    alpha: OffsetFactor,
    seeds: &SeedSet,
    tie_rng: &mut R,
) -> Result<RankedList> {
    let dg = build_defense_graph(g, f, alpha)?;
    Ok(rank_defense_graph(&dg, seeds, iteration_count(g.node_count()), tie_rng)?.ranked)
}
