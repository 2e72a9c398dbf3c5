//! Ranking quality (ROC AUC) and parameter sweeps.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::attack::{simulate, LabeledPopulation, Role};
use crate::config::SimConfig;
use crate::defense::{build_defense_graph, DefenseGraph, OffsetFactor};
use crate::gen::barabasi_albert;
use crate::graph::SocialGraph;
use crate::io::{load_edge_list, ComponentPolicy};
use crate::rank::{iteration_count, rank_defense_graph, select_seeds, RankedList};
use crate::rng;
use crate::{Error, Result};

fn class_counts(ranked: &RankedList, labels: &[Role]) -> Result<(usize, usize)> {
    let sybil = ranked.nodes().filter(|v| labels[v.index()].is_sybil()).count();
    let honest = ranked.len() - sybil;
    if honest == 0 || sybil == 0 {
        return Err(Error::UndefinedAuc { honest, sybil });
    }
    Ok((honest, sybil))
}

/// Probability that a random honest node has higher trust than a random
/// Sybil, ties counting one half. Computed as a Mann–Whitney rank sum with
/// average ranks over tied values.
pub fn auc(ranked: &RankedList, labels: &[Role]) -> Result<f64> {
    let (nh, ns) = class_counts(ranked, labels)?;
    // the list is descending; walk it from the bottom for ascending ranks
    let entries = ranked.entries();
    let mut rank_sum_honest = 0.0;
    let mut pos = 0usize;
    let mut i = entries.len();
    while i > 0 {
        let value = entries[i - 1].trust_hat;
        let mut j = i;
        let mut honest_in_group = 0usize;
        while j > 0 && entries[j - 1].trust_hat == value {
            if !labels[entries[j - 1].node.index()].is_sybil() {
                honest_in_group += 1;
            }
            j -= 1;
        }
        let size = i - j;
        // ranks pos+1 ..= pos+size share their mean
        let mean_rank = pos as f64 + (size as f64 + 1.0) / 2.0;
        rank_sum_honest += honest_in_group as f64 * mean_rank;
        pos += size;
        i = j;
    }
    let u = rank_sum_honest - (nh as f64 * (nh as f64 + 1.0)) / 2.0;
    Ok(u / (nh as f64 * ns as f64))
}

/// ROC points `(false positive rate, true positive rate)` treating honest
/// nodes as positives, from `(0, 0)` to `(1, 1)`. A run of tied values is a
/// single diagonal step.
pub fn roc_curve(ranked: &RankedList, labels: &[Role]) -> Result<Vec<(f64, f64)>> {
    let (nh, ns) = class_counts(ranked, labels)?;
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let entries = ranked.entries();
    let mut i = 0;
    while i < entries.len() {
        let value = entries[i].trust_hat;
        while i < entries.len() && entries[i].trust_hat == value {
            if labels[entries[i].node.index()].is_sybil() {
                fp += 1;
            } else {
                tp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / ns as f64, tp as f64 / nh as f64));
    }
    Ok(points)
}

pub fn trapezoid_area(curve: &[(f64, f64)]) -> f64 {
    curve.windows(2).map(|p| (p[1].0 - p[0].0) * (p[1].1 + p[0].1) / 2.0).sum()
}

/// Both rankers run on one simulated world.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub sybilrank: RankedList,
    pub sybilfence: RankedList,
    pub auc_sybilrank: f64,
    pub auc_sybilfence: f64,
    pub attack_edges: usize,
    pub max_trust_drift: f64,
}

/// Ranks `pop` with SybilRank and SybilFence using the same seeds, iteration
/// count and tie-breaking stream, all derived from `seed`.
pub fn compare(pop: &LabeledPopulation, cfg: &SimConfig, seed: u64) -> Result<Comparison> {
    let seeds = select_seeds(pop, cfg.num_seeds, &mut rng::stream(seed, rng::STREAM_SEEDS))?;
    let h = cfg.iterations.unwrap_or_else(|| iteration_count(pop.node_count()));

    let plain = DefenseGraph::unweighted(&pop.social);
    let base = rank_defense_graph(&plain, &seeds, h, &mut rng::stream(seed, rng::STREAM_TIES))?;
    let weighted = build_defense_graph(&pop.social, &pop.feedback, cfg.attack.alpha)?;
    let fence = rank_defense_graph(&weighted, &seeds, h, &mut rng::stream(seed, rng::STREAM_TIES))?;

    Ok(Comparison {
        auc_sybilrank: auc(&base.ranked, &pop.labels)?,
        auc_sybilfence: auc(&fence.ranked, &pop.labels)?,
        attack_edges: pop.attack_edge_count(),
        max_trust_drift: base.max_relative_drift.max(fence.max_relative_drift),
        sybilrank: base.ranked,
        sybilfence: fence.ranked,
    })
}

/// Where a host graph comes from: `ba:<n>:<m>`, `file:<path>` (all
/// components) or `lcc:<path>` (largest component only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSource {
    BarabasiAlbert { n: usize, m: usize },
    File { path: PathBuf, policy: ComponentPolicy },
}

impl GraphSource {
    /// Generated graphs draw from their own stream of `seed`.
    pub fn build(&self, seed: u64) -> Result<SocialGraph> {
        match self {
            GraphSource::BarabasiAlbert { n, m } => {
                barabasi_albert(*n, *m, &mut rng::stream(seed, rng::STREAM_HOST_GRAPH))
            }
            GraphSource::File { path, policy } => Ok(load_edge_list(path, *policy)?.graph),
        }
    }
}

impl FromStr for GraphSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("graph source must be ba:<n>:<m>, file:<path> or lcc:<path>, got `{s}`"));
        match s.split_once(':') {
            Some(("ba", rest)) => {
                let (n, m) = rest.split_once(':').ok_or_else(bad)?;
                Ok(GraphSource::BarabasiAlbert { n: n.parse().map_err(|_| bad())?, m: m.parse().map_err(|_| bad())? })
            }
            Some(("file", p)) if !p.is_empty() => Ok(GraphSource::File { path: p.into(), policy: ComponentPolicy::All }),
            Some(("lcc", p)) if !p.is_empty() => Ok(GraphSource::File { path: p.into(), policy: ComponentPolicy::Largest }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::BarabasiAlbert { n, m } => write!(f, "ba:{n}:{m}"),
            GraphSource::File { path, policy: ComponentPolicy::All } => write!(f, "file:{}", path.display()),
            GraphSource::File { path, policy: ComponentPolicy::Largest } => write!(f, "lcc:{}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    PenaltyFactor,
    AggProbes,
    SybilRej,
    NonSybilRej,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] =
        [SweepParam::PenaltyFactor, SweepParam::AggProbes, SweepParam::SybilRej, SweepParam::NonSybilRej];

    pub fn key(self) -> &'static str {
        match self {
            SweepParam::PenaltyFactor => "penalty_factor",
            SweepParam::AggProbes => "aggProbes",
            SweepParam::SybilRej => "sybilRej",
            SweepParam::NonSybilRej => "nonSybilRej",
        }
    }

    /// Grids matching the published figure axes.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepParam::PenaltyFactor => (0..=8).map(|i| i as f64 * 0.5).collect(),
            SweepParam::AggProbes => (1..=9).map(|i| (4 * i) as f64).collect(),
            SweepParam::SybilRej => (10..=19).map(|i| i as f64 / 20.0).collect(),
            SweepParam::NonSybilRej => (1..=9).map(|i| i as f64 / 20.0).collect(),
        }
    }

    pub fn apply(self, cfg: &mut SimConfig, x: f64) -> Result<()> {
        let a = &mut cfg.attack;
        match self {
            SweepParam::PenaltyFactor => a.alpha = OffsetFactor::new(x)?,
            SweepParam::AggProbes => {
                if x < 0.0 || x.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!("aggProbes must be a whole number, got {x}")));
                }
                a.entrance_requests = x as usize;
            }
            SweepParam::SybilRej => a.rej_entrance = x,
            SweepParam::NonSybilRej => a.rej_honest = x,
        }
        a.validate()
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL.into_iter().find(|p| p.key() == s).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "sweep parameter must be one of penalty_factor, aggProbes, sybilRej, nonSybilRej; got `{s}`"
            ))
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub graph: GraphSource,
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub base: SimConfig,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn new(graph: GraphSource, param: SweepParam, base: SimConfig, master_seed: u64) -> Self {
        SweepSpec { graph, param, grid: param.default_grid(), replicates: 5, base, master_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("sweep needs at least one replicate".into()));
        }
        Ok(())
    }

    /// Seed of replicate `r`. Shared by every grid value so that grid points
    /// differ only in the swept parameter.
    pub fn replicate_seed(&self, r: usize) -> u64 {
        rng::mix(self.master_seed, r as u64)
    }

    pub fn host_seed(&self) -> u64 {
        rng::mix(self.master_seed, u64::MAX)
    }
}

pub const SWEEP_HEADER: [&str; 5] = ["x", "auc_sybilrank", "auc_sybilfence", "attack_edges", "seed"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub auc_sybilrank: f64,
    pub auc_sybilfence: f64,
    pub attack_edges: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Worst relative deviation of total trust over every propagation step
    /// of every run.
    pub max_trust_drift: f64,
}

fn run_cell(host: &SocialGraph, spec: &SweepSpec, x: f64, seed: u64) -> Result<(SweepRow, f64)> {
    let mut cfg = spec.base.clone();
    spec.param.apply(&mut cfg, x)?;
    cfg.attack.rng_seed = seed;
    let pop = simulate(host, &cfg.attack)?;
    let c = compare(&pop, &cfg, seed)?;
    let row = SweepRow {
        x,
        auc_sybilrank: c.auc_sybilrank,
        auc_sybilfence: c.auc_sybilfence,
        attack_edges: c.attack_edges,
        seed,
    };
    Ok((row, c.max_trust_drift))
}

/// Runs every `(grid value, replicate)` cell on `host` and hands rows to
/// `sink` in grid-major order. Cells may run in parallel; if one fails, the
/// rows before it are still delivered.
pub fn run_sweep_streaming<F>(host: &SocialGraph, spec: &SweepSpec, mut sink: F) -> Result<f64>
where
    F: FnMut(&SweepRow) -> Result<()>,
{
    spec.validate()?;
    let cells: Vec<(f64, u64)> = spec
        .grid
        .iter()
        .flat_map(|&x| (0..spec.replicates).map(move |r| (x, r)))
        .map(|(x, r)| (x, spec.replicate_seed(r)))
        .collect();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(SweepRow, f64)>> = {
        use rayon::prelude::*;
        cells.par_iter().map(|&(x, seed)| run_cell(host, spec, x, seed)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(SweepRow, f64)>> =
        cells.iter().map(|&(x, seed)| run_cell(host, spec, x, seed)).collect();

    let mut drift: f64 = 0.0;
    for result in results {
        let (row, d) = result?;
        drift = drift.max(d);
        sink(&row)?;
    }
    Ok(drift)
}

pub fn run_sweep_on(host: &SocialGraph, spec: &SweepSpec) -> Result<SweepOutcome> {
    let mut rows = Vec::new();
    let max_trust_drift = run_sweep_streaming(host, spec, |r| {
        rows.push(r.clone());
        Ok(())
    })?;
    Ok(SweepOutcome { rows, max_trust_drift })
}

/// Builds the host graph from `spec.graph` and runs the sweep on it.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let host = spec.graph.build(spec.host_seed())?;
    run_sweep_on(&host, spec)
}

/// Replicate means at one grid value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub auc_sybilrank: f64,
    pub auc_sybilfence: f64,
    pub attack_edges: f64,
}

/// Averages rows by `x`, in order of first appearance.
pub fn mean_by_x(rows: &[SweepRow]) -> Vec<SweepPoint> {
    let mut out: Vec<(SweepPoint, usize)> = Vec::new();
    for r in rows {
        let slot = match out.iter().position(|(p, _)| p.x == r.x) {
            Some(i) => i,
            None => {
                out.push((SweepPoint { x: r.x, auc_sybilrank: 0.0, auc_sybilfence: 0.0, attack_edges: 0.0 }, 0));
                out.len() - 1
            }
        };
        let (p, n) = &mut out[slot];
        p.auc_sybilrank += r.auc_sybilrank;
        p.auc_sybilfence += r.auc_sybilfence;
        p.attack_edges += r.attack_edges as f64;
        *n += 1;
    }
    out.into_iter()
        .map(|(mut p, n)| {
            let n = n as f64;
            p.auc_sybilrank /= n;
            p.auc_sybilfence /= n;
            p.attack_edges /= n;
            p
        })
        .collect()
}
