//! File formats: whitespace edge lists (SNAP style), saved populations,
//! ranked lists and CSV results.
//!
//! A population is a directory holding `social.txt`, `feedback.txt` (one
//! `u v` pair per line, dense ids) and `labels.csv` (`node_id,label`).

use std::collections::{BTreeMap, VecDeque};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::{LabeledPopulation, Role};
use crate::graph::{FeedbackGraph, NodeId, SocialGraph};
use crate::rank::{RankedEntry, RankedList};
use crate::{Error, Result};

pub const SOCIAL_FILE: &str = "social.txt";
pub const FEEDBACK_FILE: &str = "feedback.txt";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ComponentPolicy {
    /// Keep every node that appears in an edge.
    #[default]
    All,
    /// Keep only the largest connected component.
    Largest,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub edge_lines: usize,
    pub self_loops_dropped: usize,
    /// Repeated pairs in either orientation.
    pub duplicates_collapsed: usize,
    pub nodes_before_component_filter: usize,
    pub edges_before_component_filter: usize,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: SocialGraph,
    /// Original id of each dense node.
    pub ids: Vec<String>,
    pub stats: LoadStats,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Reads an undirected edge list. Lines starting with `#` are comments; the
/// first two whitespace-separated tokens of every other line name an edge.
/// Ids are remapped densely in ascending numeric order (lexicographic if any
/// id is not an integer), so a file written by [`write_edge_list`] loads back
/// unchanged.
pub fn load_edge_list(path: &Path, policy: ComponentPolicy) -> Result<LoadedGraph> {
    let reader = open(path)?;
    let mut raw: Vec<(String, String)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => raw.push((a.to_owned(), b.to_owned())),
            _ => {
                return Err(Error::Parse { path: path.into(), line: i + 1, msg: format!("expected two node ids, got `{line}`") })
            }
        }
    }

    let mut stats = LoadStats { edge_lines: raw.len(), ..LoadStats::default() };
    let mut names: Vec<&str> = Vec::new();
    for (a, b) in &raw {
        if a != b {
            names.push(a);
            names.push(b);
        }
    }
    let numeric: Option<Vec<u64>> = names.iter().map(|s| s.parse::<u64>().ok()).collect();
    let mut index: BTreeMap<(u64, &str), u32> = BTreeMap::new();
    for (k, name) in names.iter().enumerate() {
        let key = numeric.as_ref().map_or(0, |v| v[k]);
        index.entry((key, name)).or_insert(0);
    }
    let mut ids = Vec::with_capacity(index.len());
    for (dense, ((_, name), slot)) in index.iter_mut().enumerate() {
        *slot = dense as u32;
        ids.push(name.to_string());
    }
    if ids.is_empty() {
        return Err(Error::EmptyGraph(path.into()));
    }
    let lookup = |s: &str| -> u32 {
        let key = s.parse::<u64>().ok().filter(|_| numeric.is_some()).unwrap_or(0);
        index[&(key, s)]
    };

    let mut graph = SocialGraph::new(ids.len())?;
    for (a, b) in &raw {
        if a == b {
            stats.self_loops_dropped += 1;
            continue;
        }
        if !graph.add_edge(NodeId(lookup(a)), NodeId(lookup(b)))? {
            stats.duplicates_collapsed += 1;
        }
    }
    stats.nodes_before_component_filter = graph.node_count();
    stats.edges_before_component_filter = graph.edge_count();

    if policy == ComponentPolicy::Largest {
        let keep = largest_component(&graph);
        let (sub, remap) = induced_subgraph(&graph, &keep)?;
        ids = remap.into_iter().map(|old| ids[old as usize].clone()).collect();
        graph = sub;
    }
    stats.nodes = graph.node_count();
    stats.edges = graph.edge_count();
    Ok(LoadedGraph { graph, ids, stats })
}

/// Membership mask of the largest connected component (ties go to the
/// component containing the lowest node id).
pub fn largest_component(g: &SocialGraph) -> Vec<bool> {
    let n = g.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut best = (0usize, 0u32);
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let mut size = 0;
        comp[start] = next;
        queue.push_back(start as u32);
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(NodeId(u)) {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = next;
                    queue.push_back(v);
                }
            }
        }
        if size > best.0 {
            best = (size, next);
        }
        next += 1;
    }
    comp.into_iter().map(|c| c == best.1).collect()
}

/// Subgraph on the nodes with `keep[v]`, ids compacted in ascending order.
/// Returns the subgraph and the old id of every new node.
pub fn induced_subgraph(g: &SocialGraph, keep: &[bool]) -> Result<(SocialGraph, Vec<u32>)> {
    let old_ids: Vec<u32> = (0..g.node_count() as u32).filter(|&v| keep[v as usize]).collect();
    let mut new_id = vec![u32::MAX; g.node_count()];
    for (i, &old) in old_ids.iter().enumerate() {
        new_id[old as usize] = i as u32;
    }
    let mut sub = SocialGraph::new(old_ids.len())?;
    for (u, v) in g.edges() {
        let (a, b) = (new_id[u.index()], new_id[v.index()]);
        if a != u32::MAX && b != u32::MAX {
            sub.add_edge(NodeId(a), NodeId(b))?;
        }
    }
    Ok((sub, old_ids))
}

fn write_pairs<W: Write>(mut out: W, header: &str, pairs: impl Iterator<Item = (NodeId, NodeId)>) -> std::io::Result<()> {
    writeln!(out, "# {header}")?;
    for (u, v) in pairs {
        writeln!(out, "{u}\t{v}")?;
    }
    out.flush()
}

pub fn write_edge_list(g: &SocialGraph, path: &Path) -> Result<()> {
    let header = format!("undirected edge list: {} nodes, {} edges", g.node_count(), g.edge_count());
    write_pairs(create(path)?, &header, g.edges()).map_err(|e| Error::io(path, e))
}

fn read_pairs(path: &Path, node_count: usize) -> Result<Vec<(NodeId, NodeId)>> {
    let mut pairs = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { path: path.into(), line: i + 1, msg };
        let mut it = line.split_whitespace().map(|t| {
            t.parse::<u32>()
                .ok()
                .filter(|&v| (v as usize) < node_count)
                .ok_or_else(|| parse_err(format!("`{t}` is not a node id below {node_count}")))
        });
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => pairs.push((NodeId(a?), NodeId(b?))),
            _ => return Err(parse_err(format!("expected two node ids, got `{line}`"))),
        }
    }
    Ok(pairs)
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    node_id: u32,
    label: String,
}

pub fn write_labels(labels: &[Role], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for (v, role) in labels.iter().enumerate() {
        w.serialize(LabelRow { node_id: v as u32, label: role.as_str().to_owned() })
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Labels indexed by node id. Every id in `0..n` must appear exactly once.
pub fn read_labels(path: &Path) -> Result<Vec<Role>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut rows: Vec<(u32, Role)> = Vec::new();
    for rec in r.deserialize::<LabelRow>() {
        let row = rec.map_err(|e| Error::csv(path, e))?;
        rows.push((row.node_id, row.label.parse()?));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 as usize != i) {
        return Err(Error::Parse { path: path.into(), line: 0, msg: "label ids must cover 0..n exactly once".into() });
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub fn write_population(pop: &LabeledPopulation, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_edge_list(&pop.social, &dir.join(SOCIAL_FILE))?;
    let fb = dir.join(FEEDBACK_FILE);
    let header = format!("directed feedback edges (rejector rejected): {} edges", pop.feedback.edge_count());
    write_pairs(create(&fb)?, &header, pop.feedback.edges()).map_err(|e| Error::io(&fb, e))?;
    write_labels(&pop.labels, &dir.join(LABELS_FILE))
}

pub fn load_population(dir: &Path) -> Result<LabeledPopulation> {
    let labels = read_labels(&dir.join(LABELS_FILE))?;
    let n = labels.len();
    let mut social = SocialGraph::new(n)?;
    for (u, v) in read_pairs(&dir.join(SOCIAL_FILE), n)? {
        social.add_edge(u, v)?;
    }
    let mut feedback = FeedbackGraph::new(n)?;
    for (u, v) in read_pairs(&dir.join(FEEDBACK_FILE), n)? {
        feedback.add_edge(u, v)?;
    }
    LabeledPopulation::new(social, feedback, labels)
}

#[derive(Debug, Serialize, Deserialize)]
struct RankRow {
    rank: usize,
    node_id: u32,
    trust_hat: f64,
    label: String,
}

/// `rank,node_id,trust_hat,label` with 1-based ranks.
pub fn write_ranking(list: &RankedList, labels: &[Role], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for (i, e) in list.entries().iter().enumerate() {
        let label = labels.get(e.node.index()).map_or("", |r| r.as_str()).to_owned();
        w.serialize(RankRow { rank: i + 1, node_id: e.node.0, trust_hat: e.trust_hat, label })
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_ranking(path: &Path) -> Result<RankedList> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut rows: Vec<RankRow> = Vec::new();
    for rec in r.deserialize::<RankRow>() {
        rows.push(rec.map_err(|e| Error::csv(path, e))?);
    }
    rows.sort_by_key(|r| r.rank);
    RankedList::from_sorted(rows.into_iter().map(|r| RankedEntry { node: NodeId(r.node_id), trust_hat: r.trust_hat }).collect())
}

/// Writes `rows` under an explicit header, so an empty slice still yields
/// the header line.
pub fn write_csv<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    let file = create(path)?;
    write_csv_to(rows, header, file).map_err(|e| Error::csv(path, e))
}

pub fn write_csv_to<T: Serialize, W: Write>(rows: &[T], header: &[&str], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Path of the sidecar file that records the resolved config of a run.
pub fn config_sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".config");
    PathBuf::from(s)
}
