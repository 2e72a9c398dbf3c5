//! Sybil attack simulation.
//!
//! A Sybil region grows by sequential arrival (each new Sybil befriends a few
//! earlier ones), then every Sybil sends friend requests to random honest
//! users. Accepted requests become attack edges; rejected ones become
//! feedback edges pointing at the sender. Honest users also receive a number
//! of rejections inferred from their degree and an honest rejection rate.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::defense::OffsetFactor;
use crate::graph::{FeedbackGraph, NodeId, SocialGraph};
use crate::rng::{self, SimRng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Honest,
    EntranceSybil,
    LatentSybil,
}

impl Role {
    pub fn is_sybil(self) -> bool {
        !matches!(self, Role::Honest)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Honest => "honest",
            Role::EntranceSybil => "entrance_sybil",
            Role::LatentSybil => "latent_sybil",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(Role::Honest),
            "entrance_sybil" => Ok(Role::EntranceSybil),
            "latent_sybil" => Ok(Role::LatentSybil),
            other => Err(Error::InvalidParameter(format!("unknown label `{other}`"))),
        }
    }
}

/// How entrance Sybils are picked out of the region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntranceSelection {
    Random,
    FirstArrivals,
}

impl EntranceSelection {
    pub fn as_str(self) -> &'static str {
        match self {
            EntranceSelection::Random => "random",
            EntranceSelection::FirstArrivals => "first",
        }
    }
}

impl FromStr for EntranceSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(EntranceSelection::Random),
            "first" => Ok(EntranceSelection::FirstArrivals),
            other => Err(Error::InvalidParameter(format!("entrance selection must be `random` or `first`, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackConfig {
    pub num_sybils: usize,
    pub sybil_arrival_links: usize,
    pub num_entrance: usize,
    pub entrance_requests: usize,
    pub latent_requests: usize,
    pub rej_entrance: f64,
    pub rej_latent: f64,
    pub rej_honest: f64,
    pub alpha: OffsetFactor,
    pub entrance_selection: EntranceSelection,
    pub rng_seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            num_sybils: 5000,
            sybil_arrival_links: 5,
            num_entrance: 200,
            entrance_requests: 25,
            latent_requests: 2,
            rej_entrance: 0.60,
            rej_latent: 0.98,
            rej_honest: 0.01,
            alpha: OffsetFactor::new(1.0).expect("valid"),
            entrance_selection: EntranceSelection::Random,
            rng_seed: 0,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {p}")))
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        check_probability("entrance rejection rate", self.rej_entrance)?;
        check_probability("latent rejection rate", self.rej_latent)?;
        check_probability("honest rejection rate", self.rej_honest)?;
        if self.num_entrance > self.num_sybils {
            return Err(Error::InvalidParameter(format!(
                "{} entrance Sybils exceed {} Sybils",
                self.num_entrance, self.num_sybils
            )));
        }
        Ok(())
    }

    pub fn num_latent(&self) -> usize {
        self.num_sybils - self.num_entrance
    }

    /// Closed-form expected number of attack edges.
    pub fn expected_attack_edges(&self) -> f64 {
        self.num_entrance as f64 * self.entrance_requests as f64 * (1.0 - self.rej_entrance)
            + self.num_latent() as f64 * self.latent_requests as f64 * (1.0 - self.rej_latent)
    }
}

/// Sybil subgraph in local indices `0..num_sybils`, plus the role of each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SybilRegion {
    pub edges: Vec<(u32, u32)>,
    pub roles: Vec<Role>,
}

pub fn build_sybil_region<R: Rng + ?Sized>(cfg: &AttackConfig, rng: &mut R) -> Result<SybilRegion> {
    if cfg.num_sybils < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 Sybils, got {}", cfg.num_sybils)));
    }
    cfg.validate()?;
    let mut edges = Vec::new();
    for i in 1..cfg.num_sybils {
        let k = cfg.sybil_arrival_links.min(i);
        for j in index::sample(rng, i, k) {
            edges.push((j as u32, i as u32));
        }
    }
    let mut roles = vec![Role::LatentSybil; cfg.num_sybils];
    let entrance: Vec<usize> = match cfg.entrance_selection {
        EntranceSelection::Random => index::sample(rng, cfg.num_sybils, cfg.num_entrance).into_vec(),
        EntranceSelection::FirstArrivals => (0..cfg.num_entrance).collect(),
    };
    for i in entrance {
        roles[i] = Role::EntranceSybil;
    }
    Ok(SybilRegion { edges, roles })
}

/// Host graph plus Sybil region, with ground-truth roles.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPopulation {
    pub social: SocialGraph,
    pub feedback: FeedbackGraph,
    pub labels: Vec<Role>,
    pub honest_count: usize,
    pub sybil_count: usize,
}

impl LabeledPopulation {
    /// Validates that graphs and labels agree and that honest nodes occupy
    /// the leading ids.
    pub fn new(social: SocialGraph, feedback: FeedbackGraph, labels: Vec<Role>) -> Result<Self> {
        if social.node_count() != feedback.node_count() {
            return Err(Error::IncompatibleGraphs { social: social.node_count(), feedback: feedback.node_count() });
        }
        if labels.len() != social.node_count() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} nodes",
                labels.len(),
                social.node_count()
            )));
        }
        let honest_count = labels.iter().take_while(|r| !r.is_sybil()).count();
        if labels[honest_count..].iter().any(|r| !r.is_sybil()) {
            return Err(Error::InvalidParameter("honest nodes must precede Sybils".into()));
        }
        let sybil_count = labels.len() - honest_count;
        Ok(LabeledPopulation { social, feedback, labels, honest_count, sybil_count })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: NodeId) -> Role {
        self.labels[v.index()]
    }

    pub fn is_sybil(&self, v: NodeId) -> bool {
        self.labels[v.index()].is_sybil()
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.honest_count).map(NodeId::new)
    }

    /// Social edges with exactly one Sybil endpoint.
    pub fn attack_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.social.edges().filter(|&(u, v)| self.is_sybil(u) != self.is_sybil(v))
    }

    pub fn attack_edge_count(&self) -> usize {
        self.attack_edges().count()
    }

    /// Latent Sybils that nonetheless hold an attack edge. Latent Sybils send
    /// requests too, so a few of their requests are accepted.
    pub fn latent_with_attack_edges(&self) -> usize {
        (self.honest_count..self.node_count())
            .map(NodeId::new)
            .filter(|&s| {
                self.label(s) == Role::LatentSybil
                    && self.social.neighbors(s).iter().any(|&u| !self.is_sybil(NodeId(u)))
            })
            .count()
    }
}

/// Appends a Sybil region to `host` and simulates the Sybils' friend
/// requests toward honest users. Honest rejections are not added here; see
/// [`inject_honest_rejections`].
pub fn attach_and_simulate_requests<R: Rng + ?Sized>(
    host: &SocialGraph,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<LabeledPopulation> {
    cfg.validate()?;
    let honest = host.node_count();
    let budget = cfg.entrance_requests.max(if cfg.num_latent() > 0 { cfg.latent_requests } else { 0 });
    if budget > honest {
        return Err(Error::TooManyRequests { requested: budget, honest });
    }
    let region = build_sybil_region(cfg, rng)?;

    let mut social = host.clone();
    social.extend_nodes(cfg.num_sybils);
    let mut feedback = FeedbackGraph::new(social.node_count())?;
    let offset = honest as u32;
    for &(a, b) in &region.edges {
        social.add_edge(NodeId(offset + a), NodeId(offset + b))?;
    }

    for (i, &role) in region.roles.iter().enumerate() {
        let sybil = NodeId(offset + i as u32);
        let (requests, rejection) = match role {
            Role::EntranceSybil => (cfg.entrance_requests, cfg.rej_entrance),
            _ => (cfg.latent_requests, cfg.rej_latent),
        };
        for target in index::sample(rng, honest, requests) {
            let target = NodeId::new(target);
            if rng.random_bool(1.0 - rejection) {
                social.add_edge(sybil, target)?;
            } else {
                feedback.add_edge(target, sybil)?;
            }
        }
    }

    let mut labels = vec![Role::Honest; honest];
    labels.extend(region.roles);
    LabeledPopulation::new(social, feedback, labels)
}

/// Rejections inferred for one honest user with `degree` accepted
/// friendships: `round(d * r / (1 - r))`.
pub fn inferred_rejections(degree: usize, rej_honest: f64) -> usize {
    (degree as f64 * rej_honest / (1.0 - rej_honest)).round() as usize
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InjectionReport {
    pub added: usize,
    /// Honest nodes whose inferred count exceeded their non-neighbors.
    pub capped: usize,
}

/// Adds feedback edges toward every honest node from distinct random honest
/// non-neighbors, as many as [`inferred_rejections`] of its honest degree.
pub fn inject_honest_rejections<R: Rng + ?Sized>(
    pop: &mut LabeledPopulation,
    rej_honest: f64,
    rng: &mut R,
) -> Result<InjectionReport> {
    if !(0.0..1.0).contains(&rej_honest) {
        return Err(Error::InvalidParameter(format!("honest rejection rate must be in [0, 1), got {rej_honest}")));
    }
    let honest = pop.honest_count;
    let mut report = InjectionReport::default();
    if rej_honest == 0.0 {
        return Ok(report);
    }
    let mut chosen: Vec<u32> = Vec::new();
    for v in 0..honest {
        let node = NodeId::new(v);
        let nbrs = pop.social.neighbors(node);
        let honest_degree = nbrs.iter().take_while(|&&u| (u as usize) < honest).count();
        let mut k = inferred_rejections(honest_degree, rej_honest);
        let available = honest - 1 - honest_degree;
        if k > available {
            log::warn!("node {v}: {k} inferred rejections capped at {available} non-neighbors");
            k = available;
            report.capped += 1;
        }
        if k == 0 {
            continue;
        }
        chosen.clear();
        if 2 * k <= available {
            while chosen.len() < k {
                let u = rng.random_range(0..honest) as u32;
                if u as usize != v && nbrs.binary_search(&u).is_err() && !chosen.contains(&u) {
                    chosen.push(u);
                }
            }
        } else {
            let pool: Vec<u32> = (0..honest as u32)
                .filter(|&u| u as usize != v && nbrs.binary_search(&u).is_err())
                .collect();
            chosen.extend(index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]));
        }
        for &u in &chosen {
            if pop.feedback.add_edge(NodeId(u), node)? {
                report.added += 1;
            }
        }
    }
    Ok(report)
}

/// Full world for one run: Sybil region, requests and honest rejections,
/// each drawn from its own stream of `cfg.rng_seed`.
pub fn simulate(host: &SocialGraph, cfg: &AttackConfig) -> Result<LabeledPopulation> {
    let mut region_rng: SimRng = rng::stream(cfg.rng_seed, rng::STREAM_REQUESTS);
    let mut pop = attach_and_simulate_requests(host, cfg, &mut region_rng)?;
    let mut rej_rng = rng::stream(cfg.rng_seed, rng::STREAM_HONEST_REJECTIONS);
    inject_honest_rejections(&mut pop, cfg.rej_honest, &mut rej_rng)?;
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::barabasi_albert;

    fn small_cfg() -> AttackConfig {
        AttackConfig {
            num_sybils: 50,
            num_entrance: 10,
            entrance_requests: 6,
            latent_requests: 2,
            ..AttackConfig::default()
        }
    }

    fn host(n: usize) -> SocialGraph {
        barabasi_albert(n, 3, &mut rng::stream(11, rng::STREAM_HOST_GRAPH)).unwrap()
    }

    #[test]
    fn region_edge_count_follows_arrivals() {
        let cfg = AttackConfig::default();
        let region = build_sybil_region(&cfg, &mut rng::stream(1, 1)).unwrap();
        assert_eq!(region.edges.len(), 24_985);
        assert_eq!(region.roles.iter().filter(|r| **r == Role::EntranceSybil).count(), 200);
        let mut g = SocialGraph::new(cfg.num_sybils).unwrap();
        for &(a, b) in &region.edges {
            assert!(g.add_edge(NodeId(a), NodeId(b)).unwrap(), "duplicate Sybil edge");
        }

        let two = AttackConfig { num_sybils: 2, num_entrance: 1, ..AttackConfig::default() };
        assert_eq!(build_sybil_region(&two, &mut rng::stream(1, 1)).unwrap().edges.len(), 1);

        let one = AttackConfig { num_sybils: 1, num_entrance: 1, ..AttackConfig::default() };
        assert!(build_sybil_region(&one, &mut rng::stream(1, 1)).is_err());
    }

    #[test]
    fn region_is_deterministic() {
        let cfg = small_cfg();
        let a = build_sybil_region(&cfg, &mut rng::stream(5, 1)).unwrap();
        let b = build_sybil_region(&cfg, &mut rng::stream(5, 1)).unwrap();
        assert_eq!(a, b);
        let first = AttackConfig { entrance_selection: EntranceSelection::FirstArrivals, ..cfg };
        let r = build_sybil_region(&first, &mut rng::stream(5, 1)).unwrap();
        assert!(r.roles[..10].iter().all(|&x| x == Role::EntranceSybil));
        assert!(r.roles[10..].iter().all(|&x| x == Role::LatentSybil));
    }

    #[test]
    fn requests_produce_attack_and_feedback_edges() {
        let g = host(300);
        let cfg = small_cfg();
        let pop = attach_and_simulate_requests(&g, &cfg, &mut rng::stream(2, 2)).unwrap();
        assert_eq!(pop.honest_count, 300);
        assert_eq!(pop.sybil_count, 50);
        // every feedback edge points from an honest target to a Sybil sender
        for (from, to) in pop.feedback.edges() {
            assert!(!pop.is_sybil(from));
            assert!(pop.is_sybil(to));
        }
        // each request either became an attack edge or a feedback edge
        let requests = 10 * 6 + 40 * 2;
        assert_eq!(pop.attack_edge_count() + pop.feedback.edge_count(), requests);
        // honest subgraph untouched
        for (u, v) in g.edges() {
            assert!(pop.social.has_edge(u, v));
        }
        assert!(pop.latent_with_attack_edges() <= 40);
    }

    #[test]
    fn total_rejection_yields_no_entrance_attack_edges() {
        let g = host(200);
        let cfg = AttackConfig { rej_entrance: 1.0, rej_latent: 1.0, ..small_cfg() };
        let pop = attach_and_simulate_requests(&g, &cfg, &mut rng::stream(3, 2)).unwrap();
        assert_eq!(pop.attack_edge_count(), 0);
        assert_eq!(pop.feedback.edge_count(), 10 * 6 + 40 * 2);
    }

    #[test]
    fn request_budget_exceeding_honest_count_is_rejected() {
        let g = host(20);
        let cfg = AttackConfig { entrance_requests: 21, ..small_cfg() };
        assert!(matches!(
            attach_and_simulate_requests(&g, &cfg, &mut rng::stream(3, 2)),
            Err(Error::TooManyRequests { .. })
        ));
    }

    #[test]
    fn entrance_feedback_expectation() {
        // 25 requests at 60% rejection: 15 expected rejections per entrance Sybil
        let g = host(100);
        let cfg = AttackConfig {
            num_sybils: 2,
            num_entrance: 1,
            entrance_requests: 25,
            latent_requests: 0,
            entrance_selection: EntranceSelection::FirstArrivals,
            ..AttackConfig::default()
        };
        let seeds = 1000u64;
        let total: usize = (0..seeds)
            .map(|s| {
                let pop = attach_and_simulate_requests(&g, &cfg, &mut rng::stream(s, 2)).unwrap();
                pop.feedback.in_degree(NodeId(100)).unwrap()
            })
            .sum();
        let mean = total as f64 / seeds as f64;
        assert!((mean - 15.0).abs() / 15.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn expected_attack_edge_arithmetic() {
        let base = AttackConfig::default();
        let c = |agg, rej| AttackConfig { entrance_requests: agg, rej_entrance: rej, ..base.clone() };
        assert!((c(25, 0.5).expected_attack_edges() - 2692.0).abs() < 1e-9);
        assert!((c(4, 0.6).expected_attack_edges() - 512.0).abs() < 1e-9);
        assert!((c(36, 0.6).expected_attack_edges() - 3072.0).abs() < 1e-9);
        assert!((c(25, 0.95).expected_attack_edges() - 442.0).abs() < 1e-9);
    }

    #[test]
    fn inferred_rejection_counts() {
        assert_eq!(inferred_rejections(100, 0.01), 1);
        assert_eq!(inferred_rejections(100, 0.0), 0);
        assert_eq!(inferred_rejections(20, 0.45), 16);
        assert_eq!(inferred_rejections(8, 0.25), 3);
    }

    #[test]
    fn honest_rejections() {
        let g = host(400);
        let cfg = small_cfg();
        let mut pop = attach_and_simulate_requests(&g, &cfg, &mut rng::stream(4, 2)).unwrap();
        let before = pop.feedback.clone();
        let report = inject_honest_rejections(&mut pop, 0.0, &mut rng::stream(4, 3)).unwrap();
        assert_eq!(report.added, 0);
        assert_eq!(pop.feedback, before);

        let report = inject_honest_rejections(&mut pop, 0.45, &mut rng::stream(4, 3)).unwrap();
        let expected: usize = (0..400).map(|v| inferred_rejections(g.degree(NodeId::new(v)).unwrap(), 0.45)).sum();
        assert_eq!(report.added, expected);
        assert_eq!(report.capped, 0);
        for (from, to) in pop.feedback.edges() {
            if !pop.is_sybil(to) {
                assert!(!pop.is_sybil(from));
                assert!(!pop.social.has_edge(from, to), "rejector must be a non-friend");
            }
        }
        for v in 0..400 {
            let v = NodeId::new(v);
            assert_eq!(pop.feedback.in_degree(v).unwrap(), inferred_rejections(g.degree(v).unwrap(), 0.45));
        }

        assert!(inject_honest_rejections(&mut pop, 1.0, &mut rng::stream(4, 3)).is_err());
    }

    #[test]
    fn rejections_capped_on_dense_host() {
        // complete graph: nobody has a non-neighbor
        let mut g = SocialGraph::new(6).unwrap();
        for u in 0..6 {
            for v in u + 1..6 {
                g.add_edge(NodeId(u), NodeId(v)).unwrap();
            }
        }
        let cfg = AttackConfig { num_sybils: 2, num_entrance: 1, entrance_requests: 1, latent_requests: 1, ..AttackConfig::default() };
        let mut pop = attach_and_simulate_requests(&g, &cfg, &mut rng::stream(1, 2)).unwrap();
        let report = inject_honest_rejections(&mut pop, 0.5, &mut rng::stream(1, 3)).unwrap();
        assert_eq!(report.added, 0);
        assert_eq!(report.capped, 6);
    }

    #[test]
    fn simulation_is_deterministic() {
        let g = host(300);
        let cfg = AttackConfig { rng_seed: 42, ..small_cfg() };
        assert_eq!(simulate(&g, &cfg).unwrap(), simulate(&g, &cfg).unwrap());
        let other = AttackConfig { rng_seed: 43, ..small_cfg() };
        assert_ne!(simulate(&g, &cfg).unwrap(), simulate(&g, &other).unwrap());
    }

    #[test]
    fn population_validation() {
        let (g, f) = crate::graph::new_graphs(3).unwrap();
        assert!(LabeledPopulation::new(g.clone(), f.clone(), vec![Role::Honest; 2]).is_err());
        assert!(LabeledPopulation::new(g.clone(), f.clone(), vec![Role::LatentSybil, Role::Honest, Role::Honest]).is_err());
        let p = LabeledPopulation::new(g, f, vec![Role::Honest, Role::Honest, Role::EntranceSybil]).unwrap();
        assert_eq!((p.honest_count, p.sybil_count), (2, 1));
    }
}
