//! Browser bindings. Every export takes a `key=value` config string plus the
//! size of a generated host graph and returns a JSON document.

use serde::Serialize;
use sybilfence_core::attack::{simulate, LabeledPopulation, Role};
use sybilfence_core::defense::build_defense_graph;
use sybilfence_core::eval::{compare, mean_by_x, run_sweep_on, GraphSource};
use sybilfence_core::{config::parse_pairs, roc_curve, SimConfig, SweepParam, SweepSpec};
use wasm_bindgen::prelude::*;

const MAX_ROC_POINTS: usize = 256;
const MAX_NODES: usize = 50_000;

fn setup(config: &str, nodes: u32, links: u32, seed: u32) -> Result<(SimConfig, GraphSource), String> {
    if nodes as usize > MAX_NODES {
        return Err(format!("at most {MAX_NODES} host nodes in the browser"));
    }
    let mut cfg = SimConfig::default();
    cfg.apply(&parse_pairs(config).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    cfg.attack.rng_seed = seed as u64;
    Ok((cfg, GraphSource::BarabasiAlbert { n: nodes as usize, m: links as usize }))
}

fn population(cfg: &SimConfig, graph: &GraphSource) -> Result<LabeledPopulation, String> {
    let host = graph.build(cfg.attack.rng_seed).map_err(|e| e.to_string())?;
    simulate(&host, &cfg.attack).map_err(|e| e.to_string())
}

// Keeps every `k`-th vertex plus the last one.
fn thin(curve: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if curve.len() <= MAX_ROC_POINTS {
        return curve;
    }
    let k = curve.len().div_ceil(MAX_ROC_POINTS);
    let last = *curve.last().unwrap();
    let mut out: Vec<_> = curve.into_iter().step_by(k).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub nodes: usize,
    pub attack_edges: usize,
    pub feedback_edges: usize,
    pub auc_sybilrank: f64,
    pub auc_sybilfence: f64,
    pub roc_sybilrank: Vec<(f64, f64)>,
    pub roc_sybilfence: Vec<(f64, f64)>,
}

pub fn run_comparison(config: &str, nodes: u32, links: u32, seed: u32) -> Result<Comparison, String> {
    let (cfg, graph) = setup(config, nodes, links, seed)?;
    let pop = population(&cfg, &graph)?;
    let c = compare(&pop, &cfg, cfg.attack.rng_seed).map_err(|e| e.to_string())?;
    let roc = |list| roc_curve(list, &pop.labels).map(thin).map_err(|e| e.to_string());
    Ok(Comparison {
        nodes: pop.node_count(),
        attack_edges: c.attack_edges,
        feedback_edges: pop.feedback.edge_count(),
        auc_sybilrank: c.auc_sybilrank,
        auc_sybilfence: c.auc_sybilfence,
        roc_sybilrank: roc(&c.sybilrank)?,
        roc_sybilfence: roc(&c.sybilfence)?,
    })
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub auc_sybilrank: f64,
    pub auc_sybilfence: f64,
    pub attack_edges: f64,
}

pub fn run_sweep_curve(
    param: &str,
    config: &str,
    nodes: u32,
    links: u32,
    seed: u32,
    replicates: u32,
) -> Result<Vec<CurvePoint>, String> {
    let param: SweepParam = param.parse().map_err(|e: sybilfence_core::Error| e.to_string())?;
    let (cfg, graph) = setup(config, nodes, links, seed)?;
    let mut spec = SweepSpec::new(graph, param, cfg, seed as u64);
    spec.replicates = replicates.max(1) as usize;
    let host = spec.graph.build(spec.host_seed()).map_err(|e| e.to_string())?;
    let out = run_sweep_on(&host, &spec).map_err(|e| e.to_string())?;
    Ok(mean_by_x(&out.rows)
        .into_iter()
        .map(|p| CurvePoint {
            x: p.x,
            auc_sybilrank: p.auc_sybilrank,
            auc_sybilfence: p.auc_sybilfence,
            attack_edges: p.attack_edges,
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct WeightHistogram {
    /// Left edge of each bin over `[0, 1]`; the last bin includes 1.
    pub bins: Vec<f64>,
    pub honest: Vec<usize>,
    pub entrance_sybil: Vec<usize>,
    pub latent_sybil: Vec<usize>,
}

pub fn run_weight_histogram(config: &str, nodes: u32, links: u32, seed: u32, bins: u32) -> Result<WeightHistogram, String> {
    let bins = bins.clamp(1, 100) as usize;
    let (cfg, graph) = setup(config, nodes, links, seed)?;
    let pop = population(&cfg, &graph)?;
    let dg = build_defense_graph(&pop.social, &pop.feedback, cfg.attack.alpha).map_err(|e| e.to_string())?;
    let mut h = WeightHistogram {
        bins: (0..bins).map(|i| i as f64 / bins as f64).collect(),
        honest: vec![0; bins],
        entrance_sybil: vec![0; bins],
        latent_sybil: vec![0; bins],
    };
    for (v, &w) in dg.node_weights().iter().enumerate() {
        let b = ((w * bins as f64) as usize).min(bins - 1);
        match pop.labels[v] {
            Role::Honest => h.honest[b] += 1,
            Role::EntranceSybil => h.entrance_sybil[b] += 1,
            Role::LatentSybil => h.latent_sybil[b] += 1,
        }
    }
    Ok(h)
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Simulates one attack and ranks it with both schemes: AUCs and ROC curves.
#[wasm_bindgen]
pub fn compare_rankers(config: &str, nodes: u32, links: u32, seed: u32) -> Result<String, JsError> {
    to_json(run_comparison(config, nodes, links, seed))
}

/// Mean AUC of both schemes over the standard grid of `param`.
#[wasm_bindgen]
pub fn sweep_curve(param: &str, config: &str, nodes: u32, links: u32, seed: u32, replicates: u32) -> Result<String, JsError> {
    to_json(run_sweep_curve(param, config, nodes, links, seed, replicates))
}

/// Histogram of defense-graph node weights split by role.
#[wasm_bindgen]
pub fn weight_histogram(config: &str, nodes: u32, links: u32, seed: u32, bins: u32) -> Result<String, JsError> {
    to_json(run_weight_histogram(config, nodes, links, seed, bins))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "numSybils=400 numAggSybil=40";

    #[test]
    fn comparison_is_deterministic_and_well_formed() {
        let a = run_comparison(SMALL, 1500, 4, 3).unwrap();
        assert_eq!(a.nodes, 1900);
        assert!(a.attack_edges > 0);
        for roc in [&a.roc_sybilrank, &a.roc_sybilfence] {
            assert!(roc.len() <= MAX_ROC_POINTS + 1);
            assert_eq!(roc[0], (0.0, 0.0));
            assert_eq!(*roc.last().unwrap(), (1.0, 1.0));
        }
        let b = run_comparison(SMALL, 1500, 4, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn zero_penalty_gives_equal_auc() {
        let c = run_comparison(&format!("{SMALL} penalty_factor=0"), 1000, 3, 1).unwrap();
        assert_eq!(c.auc_sybilrank, c.auc_sybilfence);
        assert_eq!(c.roc_sybilrank, c.roc_sybilfence);
    }

    #[test]
    fn sweep_curve_covers_default_grid() {
        let pts = run_sweep_curve("sybilRej", SMALL, 800, 3, 2, 1).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        assert_eq!(xs, SweepParam::SybilRej.default_grid());
        // fewer accepted requests as the rejection rate grows
        assert!(pts[0].attack_edges > pts[pts.len() - 1].attack_edges);
    }

    #[test]
    fn histogram_counts_every_node() {
        let h = run_weight_histogram(SMALL, 1000, 3, 5, 10).unwrap();
        let count = |v: &[usize]| v.iter().sum::<usize>();
        assert_eq!(count(&h.honest), 1000);
        assert_eq!(count(&h.entrance_sybil), 40);
        assert_eq!(count(&h.latent_sybil), 360);
        // entrance Sybils collect far more rejections than honest users
        let mean = |v: &[usize]| v.iter().enumerate().map(|(i, &c)| i * c).sum::<usize>() as f64 / count(v) as f64;
        assert!(mean(&h.entrance_sybil) < mean(&h.honest));
        assert_eq!(h.honest[9] + h.honest[8], 1000);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(run_comparison("bogus=1", 500, 3, 0).unwrap_err().contains("penalty_factor"));
        assert!(run_comparison(SMALL, 100_000, 3, 0).is_err());
        assert!(run_sweep_curve("iterations", SMALL, 500, 3, 0, 1).is_err());
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let curve: Vec<(f64, f64)> = (0..=1000).map(|i| (i as f64 / 1000.0, i as f64 / 1000.0)).collect();
        let t = thin(curve);
        assert!(t.len() <= MAX_ROC_POINTS + 1);
        assert_eq!(t[0], (0.0, 0.0));
        assert_eq!(*t.last().unwrap(), (1.0, 1.0));
    }
}
