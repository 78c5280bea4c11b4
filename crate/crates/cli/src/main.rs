//! Command-line front end: fragment, build, train, generate, extract rules,
//! evaluate and predict.

mod io;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use motifwalk::evalkit::{
    bag_of_motifs, evaluate_generations, membership_patterns, run_protocol, GbtConfig, Task, DEFAULT_MEMBERSHIP,
};
use motifwalk::fixtures::{expert_rows, linear_property_dataset, toy_annotations};
use motifwalk::grammar::{
    extract_hard_rules, generate, train, DegreeMode, GenerateConfig, RuleConfig, SignConvention, Strategy, TrainConfig,
    UpdateMode,
};
use motifwalk::molgraph::{parse_smiles, write_smiles};
use motifwalk::motifgraph::save_motif_graph;
use motifwalk::pipeline::{build, extract_on, WalkRecord};
use rayon::prelude::*;

use crate::io::*;

#[derive(Parser)]
#[command(name = "motifwalk", version, about = "Motif-graph grammars for molecule generation")]
struct Cli {
    /// Worker threads for parallel stages; 0 uses all cores.
    #[arg(long, global = true, env = "MOTIFWALK_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fragment a dataset and build its duplicate-augmented motif graph.
    BuildGraph {
        /// Annotations (`.json`) or a SMILES file segmented heuristically.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Extract the walk of every molecule on an existing motif graph.
    ExtractWalks {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit grammar parameters to a walk corpus.
    Train(TrainArgs),
    /// Sample molecules from a trained grammar.
    Generate(GenerateArgs),
    /// Extract hard rules from a trained grammar.
    Rules {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        theta_min: f64,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 20_000)]
        max_states: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated molecules against a training set.
    Evaluate {
        /// Generation output (`.json`) or a SMILES file.
        #[arg(long)]
        generated: PathBuf,
        /// Training molecules as a dataset or SMILES file.
        #[arg(long)]
        training: PathBuf,
        /// Membership patterns as SMILES; defaults to thiophene and alkyl halides.
        #[arg(long, value_delimiter = ',')]
        membership: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bag-of-motifs property prediction over repeated hold-out splits.
    Predict(PredictArgs),
    /// Write the bundled datasets.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Forcing,
    Split,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Regression,
    Classification,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    walks: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// JSON training configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the structural in-degree instead of the weighted one.
    #[arg(long)]
    structural_degree: bool,
    /// Use the heat-equation sign `x - s L x`.
    #[arg(long)]
    heat_sign: bool,
    /// Backpropagate through whole trajectories.
    #[arg(long)]
    trajectory: bool,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss as CSV.
    #[arg(long)]
    loss: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(short, long, default_value_t = 100)]
    n: usize,
    /// Molecule `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Root motif id.
    #[arg(long)]
    start: Option<String>,
    /// Stop when the walk returns to its root.
    #[arg(long)]
    loop_back: bool,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Walk corpus from `extract-walks`.
    #[arg(long)]
    walks: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// `id,value` CSV.
    #[arg(long)]
    properties: PathBuf,
    #[arg(long, value_enum, default_value = "regression")]
    task: TaskArg,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    /// JSON booster configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("configuring thread pool")?;
    }
    match cli.command {
        Command::BuildGraph { input, out, dot } => build_graph(&input, &out, dot.as_deref()),
        Command::ExtractWalks { input, graph, out } => extract_walks(&input, &graph, &out),
        Command::Train(args) => train_cmd(args),
        Command::Generate(args) => generate_cmd(args),
        Command::Rules { params, graph, theta_min, max_depth, max_states, out } => {
            let g = load_graph(&graph)?;
            let params = load_params(&params, &g)?;
            let rules = extract_hard_rules(&params, &g, &RuleConfig { theta_min, max_depth, max_states })?;
            eprintln!("{} hard rules", rules.len());
            write_json(&out, &rules)
        }
        Command::Evaluate { generated, training, membership, out } => {
            let gen = load_molecules(&generated)?;
            let train = load_training(&training)?;
            let patterns = if membership.is_empty() {
                membership_patterns(&DEFAULT_MEMBERSHIP)?
            } else {
                membership_patterns(&membership).context("membership pattern")?
            };
            let report = evaluate_generations(&gen, &train, &patterns)?;
            write_json(&out, &report)
        }
        Command::Predict(args) => predict_cmd(args),
        Command::Fixtures { out, samples, seed } => fixtures_cmd(&out, samples, seed),
    }
}

fn build_graph(input: &Path, out: &Path, dot: Option<&Path>) -> Result<()> {
    let segs = load_dataset(input)?;
    let built = build(&segs);
    let failed = built.walks.iter().filter(|w| w.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} molecules have no walk; their motifs get no duplicates");
    }
    if built.graph.incomplete {
        eprintln!("warning: isomorphism enumeration hit its cap; some edges may be missing");
    }
    write_text(out, &save_motif_graph(&built.graph)?)?;
    if let Some(path) = dot {
        write_text(path, &built.graph.to_dot())?;
    }
    println!("(|V|, |E|) = ({}, {})", built.graph.num_motifs(), built.graph.edges.len());
    println!("augmented nodes: {}", built.graph.num_nodes());
    Ok(())
}

fn extract_walks(input: &Path, graph: &Path, out: &Path) -> Result<()> {
    let segs = load_dataset(input)?;
    let g = load_graph(graph)?;
    let mut corpus = WalkCorpus { walks: Vec::new(), failures: Vec::new() };
    for (seg, walk) in segs.iter().zip(extract_on(&g, &segs)) {
        match walk {
            Ok(dag) => corpus.walks.push(WalkRecord::new(&g, seg, dag)),
            Err(e) => {
                eprintln!("warning: `{}`: {e}", seg.molecule_id);
                corpus.failures.push(Failure { molecule_id: seg.molecule_id.clone(), error: e.to_string() });
            }
        }
    }
    write_json(out, &corpus)?;
    println!("{} walks, {} failures", corpus.walks.len(), corpus.failures.len());
    if corpus.walks.is_empty() {
        bail!("no walk could be extracted");
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let corpus: WalkCorpus = read_json(&a.walks)?;
    let mut cfg: TrainConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = a.strategy {
        cfg.strategy = match s {
            StrategyArg::Forcing => Strategy::Forcing,
            StrategyArg::Split => Strategy::Split,
        };
    }
    cfg.epochs = a.epochs.unwrap_or(cfg.epochs);
    cfg.lr = a.lr.unwrap_or(cfg.lr);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    if a.structural_degree {
        cfg.degree = DegreeMode::Structural;
    }
    if a.heat_sign {
        cfg.sign = SignConvention::Heat;
    }
    if a.trajectory {
        cfg.update = UpdateMode::Trajectory;
    }
    eprintln!("seed {}", cfg.seed);
    let walks: Vec<_> = corpus.walks.into_iter().map(|r| r.dag).collect();
    let report = train(&g, &walks, &cfg)?;
    write_json(&a.out, &report.params)?;
    if let Some(path) = &a.loss {
        let mut csv = String::from("epoch,loss\n");
        for (e, l) in report.epoch_loss.iter().enumerate() {
            csv.push_str(&format!("{},{l:e}\n", e + 1));
        }
        write_text(path, &csv)?;
    }
    if let (Some(first), Some(last)) = (report.epoch_loss.first(), report.epoch_loss.last()) {
        println!("loss {first:.6e} -> {last:.6e} over {} epochs", report.epoch_loss.len());
    }
    Ok(())
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let params = load_params(&a.params, &g)?;
    eprintln!("seed {}", a.seed);
    let records: Vec<GeneratedRecord> = (0..a.n)
        .into_par_iter()
        .map(|index| {
            let seed = a.seed.wrapping_add(index as u64);
            let cfg = GenerateConfig {
                loop_back: a.loop_back,
                max_steps: a.max_steps,
                seed,
                start: a.start.clone(),
                ..Default::default()
            };
            let gen = generate(&params, &g, &cfg)?;
            Ok(GeneratedRecord {
                index,
                seed,
                smiles: write_smiles(&gen.molecule).context("writing generated molecule")?,
                walk: gen.walk,
                valid: gen.valid,
            })
        })
        .collect::<Result<_>>()?;
    let valid = records.iter().filter(|r| r.valid).count();
    write_json(&a.out, &records)?;
    println!("{valid}/{} valid", records.len());
    Ok(())
}

/// Training molecules from a dataset or a SMILES file.
fn load_training(path: &Path) -> Result<Vec<motifwalk::molgraph::MolecularGraph>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Ok(load_dataset(path)?.into_iter().map(|s| s.molecule).collect())
    } else {
        load_molecules(path)
    }
}

fn predict_cmd(a: PredictArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let corpus: WalkCorpus = read_json(&a.walks)?;
    let props: HashMap<String, f64> = read_properties(&a.properties)?.into_iter().collect();
    let mut cfg: GbtConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => GbtConfig::default(),
    };
    cfg.task = match a.task {
        TaskArg::Regression => Task::Regression,
        TaskArg::Classification => Task::Classification,
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    for rec in &corpus.walks {
        let Some(&value) = props.get(&rec.molecule_id) else {
            eprintln!("warning: no property for `{}`", rec.molecule_id);
            continue;
        };
        let m = parse_smiles(&rec.smiles).with_context(|| format!("molecule `{}`", rec.molecule_id))?;
        x.push(bag_of_motifs(&rec.dag, &m, &g).to_vec());
        y.push(value);
    }
    eprintln!("seeds {:?}", a.seeds);
    let report = run_protocol(&x, &y, &cfg, &a.seeds, a.train_frac)?;
    write_json(&a.out, &report)?;
    let show = |name: &str, m: Option<f64>, s: Option<f64>| {
        if let (Some(m), Some(s)) = (m, s) {
            println!("{name} {m:.4} ± {s:.4}");
        }
    };
    show("mae", report.mean.mae, report.std.mae);
    show("r2", report.mean.r2, report.std.r2);
    show("accuracy", report.mean.accuracy, report.std.accuracy);
    show("auc", report.mean.auc, report.std.auc);
    Ok(())
}

fn fixtures_cmd(out: &Path, samples: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write_json(&out.join("toy.json"), &toy_annotations())?;
    write_json(&out.join("expert.json"), &expert_rows())?;
    let rows = linear_property_dataset(samples, seed);
    let mut smi = String::new();
    let mut csv = String::from("molecule_id,value\n");
    for r in &rows {
        smi.push_str(&format!("{} {}\n", r.smiles, r.molecule_id));
        csv.push_str(&format!("{},{}\n", r.molecule_id, r.value));
    }
    write_text(&out.join("chains.smi"), &smi)?;
    write_text(&out.join("chains.csv"), &csv)?;
    println!("wrote toy.json, expert.json, chains.smi, chains.csv to {}", out.display());
    Ok(())
}
