use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use sybilfence_core::config::{parse_pairs, KEYS};
use sybilfence_core::eval::{compare, run_sweep_streaming, trapezoid_area, GraphSource, SWEEP_HEADER};
use sybilfence_core::io::{
    config_sidecar, load_population, read_labels, read_ranking, write_csv, write_edge_list, write_population, write_ranking,
};
use sybilfence_core::{attack, auc, roc_curve, Error, SimConfig, SweepParam, SweepSpec};

const CONFIG_FILE: &str = "config.txt";

fn key_help() -> String {
    let mut s = String::from("Config keys (key=value, in a --config file or via --set):\n");
    for (key, meaning, default) in KEYS {
        s.push_str(&format!("  {key:<18} {meaning} [default: {default}]\n"));
    }
    s.push_str("\nGraph sources: ba:<n>:<m> (Barabasi-Albert), file:<path> (edge list), lcc:<path> (largest component)");
    s
}

#[derive(Parser)]
#[command(name = "sybilfence", version, about = "Feedback-weighted Sybil ranking and attack simulation")]
#[command(after_help = key_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a host graph as an edge list.
    Generate {
        #[arg(long)]
        graph: GraphSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach a Sybil region to a host graph, simulate friend requests and
    /// save the labeled population.
    Attack {
        #[arg(long)]
        graph: GraphSource,
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed for the host graph and the simulation; overrides rngSeed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank a saved population with SybilRank and SybilFence.
    Rank {
        #[arg(long)]
        population: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the population directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write ROC curves as `fpr,tpr`.
        #[arg(long)]
        roc: bool,
    },
    /// Sweep one parameter over a grid and write per-replicate AUC rows.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        graph: GraphSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated values or `start:end:step`; defaults to the
        /// standard grid of the parameter.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 5)]
        replicates: usize,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a saved ranking against labels.
    Auc {
        #[arg(long)]
        ranking: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// File of key=value pairs.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable, applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self, mut cfg: SimConfig) -> Result<SimConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply(&parse_pairs(&text)?).with_context(|| format!("in {}", path.display()))?;
        }
        cfg.apply(&parse_pairs(&self.overrides.join("\n"))?)?;
        Ok(cfg)
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if let [start, end, step] = parts[..] {
        let (start, end, step): (f64, f64, f64) = (start.parse()?, end.parse()?, step.parse()?);
        if step.is_nan() || step <= 0.0 || end < start {
            bail!("grid `{s}` needs start <= end and a positive step");
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').map(|v| v.trim().parse().with_context(|| format!("bad grid value `{v}`"))).collect()
}

fn write_config(path: &Path, preamble: &[String], cfg: &SimConfig) -> Result<()> {
    let mut text: String = preamble.iter().map(|l| format!("# {l}\n")).collect();
    text.push_str(&cfg.to_config_string());
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { graph, seed, out } => {
            let g = graph.build(seed)?;
            write_edge_list(&g, &out)?;
            info!("{graph}: {} nodes, {} edges", g.node_count(), g.edge_count());
        }
        Command::Attack { graph, config, seed, out } => {
            let mut cfg = config.resolve(SimConfig::default())?;
            if let Some(seed) = seed {
                cfg.attack.rng_seed = seed;
            }
            let host = graph.build(cfg.attack.rng_seed)?;
            let pop = attack::simulate(&host, &cfg.attack)?;
            write_population(&pop, &out)?;
            write_config(&out.join(CONFIG_FILE), &[format!("graph={graph}")], &cfg)?;
            println!(
                "nodes={}\nhonest={}\nsybils={}\nattack_edges={}\nfeedback_edges={}",
                pop.node_count(),
                pop.honest_count,
                pop.sybil_count,
                pop.attack_edge_count(),
                pop.feedback.edge_count()
            );
        }
        Command::Rank { population, config, seed, out, roc } => {
            let saved = population.join(CONFIG_FILE);
            let base = if saved.is_file() {
                SimConfig::parse(&fs::read_to_string(&saved).with_context(|| format!("reading {}", saved.display()))?)?
            } else {
                SimConfig::default()
            };
            let mut cfg = config.resolve(base)?;
            if let Some(seed) = seed {
                cfg.attack.rng_seed = seed;
            }
            let pop = load_population(&population)?;
            let c = compare(&pop, &cfg, cfg.attack.rng_seed)?;
            let out = out.unwrap_or_else(|| population.clone());
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (name, list) in [("sybilrank", &c.sybilrank), ("sybilfence", &c.sybilfence)] {
                write_ranking(list, &pop.labels, &out.join(format!("ranking_{name}.csv")))?;
                if roc {
                    let curve = roc_curve(list, &pop.labels)?;
                    write_csv(&curve, &["fpr", "tpr"], &out.join(format!("roc_{name}.csv")))?;
                    info!("{name}: ROC area {}", trapezoid_area(&curve));
                }
            }
            write_config(&out.join("rank.config"), &[format!("population={}", population.display())], &cfg)?;
            println!("auc_sybilrank={}", c.auc_sybilrank);
            println!("auc_sybilfence={}", c.auc_sybilfence);
            println!("attack_edges={}", c.attack_edges);
        }
        Command::Sweep { param, graph, seed, grid, replicates, jobs, config, out } => {
            let base = config.resolve(SimConfig::default())?;
            let mut spec = SweepSpec::new(graph, param, base, seed);
            if let Some(grid) = grid {
                spec.grid = parse_grid(&grid)?;
            }
            spec.replicates = replicates;
            spec.validate()?;
            rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;

            let host = spec.graph.build(spec.host_seed())?;
            info!("{}: {} nodes, {} edges", spec.graph, host.node_count(), host.edge_count());
            let sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
                None => Box::new(io::stdout().lock()),
            };
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
            w.write_record(SWEEP_HEADER)?;
            let target = out.clone().unwrap_or_else(|| PathBuf::from("-"));
            let drift = run_sweep_streaming(&host, &spec, |row| {
                w.serialize(row).map_err(|source| Error::Csv { path: target.clone(), source })
            })?;
            w.flush()?;
            info!("max relative trust drift {drift:e}");
            if let Some(path) = &out {
                let grid: Vec<String> = spec.grid.iter().map(f64::to_string).collect();
                let preamble = [
                    format!("graph={}", spec.graph),
                    format!("param={}", param.key()),
                    format!("grid={}", grid.join(",")),
                    format!("replicates={replicates}"),
                    format!("seed={seed}"),
                ];
                write_config(&config_sidecar(path), &preamble, &spec.base)?;
            }
        }
        Command::Auc { ranking, labels } => {
            let list = read_ranking(&ranking)?;
            let labels = read_labels(&labels)?;
            println!("{}", auc(&list, &labels)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_grid;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:4:0.5").unwrap(), (0..=8).map(|i| i as f64 * 0.5).collect::<Vec<_>>());
        assert_eq!(parse_grid("4, 8,12").unwrap(), vec![4.0, 8.0, 12.0]);
        assert_eq!(parse_grid("0.05:0.45:0.05").unwrap().len(), 9);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
