use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use netshape::baselines::{baseline_policy, PolicyKind};
use netshape::cascade::{
    influence_samples, run_rng, select_influencers, simulate_ctic, write_run_csv,
    InfluenceEstimate,
};
use netshape::experiment::{
    build_hazard, cell_seed, load_graph, run_sweep, write_sweep_outputs,
    EvalMeasure, ExperimentConfig, Method,
};
use netshape::graph::probabilities_from_hazard;
use netshape::shaping::{
    apply_policy, netshape_ascent, netshape_edge, netshape_node, ActionMode, FeasibleSetSpec,
    ShapingOptions,
};
use netshape::spectral::{hazard_radius, influence_upper_bound, RadiusOptions};
use netshape::{Error, Result};

#[derive(Parser)]
#[command(name = "netshape", version, about = "Spectral activity shaping for information cascades")]
struct Cli {
    /// Experiment configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set eps=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true, value_parser = parse_pair)]
    set: Vec<(String, String)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct GraphArgs {
    /// Edge-list file.
    graph: Option<PathBuf>,
    /// Input carries a third weight column.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    undirected: bool,
    /// trivalency, native, hazard, sir or uniform.
    #[arg(long)]
    weighting: Option<String>,
    /// Rescale hazards so the radius equals this value.
    #[arg(long)]
    target_radius: Option<f64>,
}

#[derive(Args, Default)]
struct ShapeArgs {
    /// node or edge.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, value_delimiter = ',')]
    budget: Vec<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t_cap: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the hazard radius and the influence upper bound.
    Radius {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        n0: Option<usize>,
    },
    /// Run NetShape for one budget and write the allocation, trace and shaped hazards.
    Shape {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Estimate the expected cascade size.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        /// Seed nodes; selected by greedy influence maximization when omitted.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<usize>,
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        /// Use the event-driven continuous-time simulator.
        #[arg(long)]
        temporal: bool,
        /// Write per-run sizes to `runs.csv`.
        #[arg(long)]
        dump: bool,
    },
    /// Sweep methods over budgets and write `sweep.csv`.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
        #[arg(long)]
        plot: bool,
    },
    /// Compute one baseline policy.
    Baseline {
        #[command(flatten)]
        graph: GraphArgs,
        /// rand, degree, wdegree or netshield.
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long)]
        budget: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

fn push(pairs: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    pairs.push((key.to_string(), value.to_string()));
}

impl GraphArgs {
    fn pairs(&self, pairs: &mut Vec<(String, String)>) {
        if let Some(g) = &self.graph {
            push(pairs, "graph", g.display());
        }
        if self.weighted {
            push(pairs, "format", "weighted");
        }
        if self.undirected {
            push(pairs, "undirected", true);
        }
        if let Some(w) = &self.weighting {
            push(pairs, "weighting", w);
        }
        if let Some(t) = self.target_radius {
            push(pairs, "target_radius", t);
        }
    }
}

impl ShapeArgs {
    fn pairs(&self, pairs: &mut Vec<(String, String)>) {
        if let Some(m) = &self.mode {
            push(pairs, "mode", m);
        }
        for k in &self.budget {
            push(pairs, "budget", k);
        }
        if let Some(e) = self.eps {
            push(pairs, "eps", e);
        }
        if let Some(t) = self.t_cap {
            push(pairs, "t_cap", t);
        }
    }
}

fn configure(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_text(&fs::read_to_string(path)?)?;
    }
    let mut pairs = Vec::new();
    if let Some(s) = cli.seed {
        push(&mut pairs, "seed", s);
    }
    if let Some(t) = cli.threads {
        push(&mut pairs, "threads", t);
    }
    if let Some(o) = &cli.out {
        push(&mut pairs, "out", o.display());
    }
    match &cli.command {
        Command::Radius { graph, n0 } => {
            graph.pairs(&mut pairs);
            if let Some(n0) = n0 {
                push(&mut pairs, "n0", n0);
            }
        }
        Command::Shape { graph, shape } => {
            graph.pairs(&mut pairs);
            shape.pairs(&mut pairs);
        }
        Command::Simulate { graph, n0, runs, .. } => {
            graph.pairs(&mut pairs);
            if let Some(n0) = n0 {
                push(&mut pairs, "n0", n0);
            }
            if let Some(r) = runs {
                push(&mut pairs, "runs", r);
            }
        }
        Command::Sweep {
            graph,
            shape,
            method,
            plot,
        } => {
            graph.pairs(&mut pairs);
            shape.pairs(&mut pairs);
            for m in method {
                push(&mut pairs, "method", m);
            }
            if *plot {
                push(&mut pairs, "plot", true);
            }
        }
        Command::Baseline { graph, budget, .. } => {
            graph.pairs(&mut pairs);
            push(&mut pairs, "budget", budget);
        }
    }
    pairs.extend(cli.set.iter().cloned());
    cfg.apply_pairs(&pairs)?;
    match &cli.command {
        Command::Sweep { .. } => {}
        Command::Baseline { policy, .. } => {
            cfg.mode = ActionMode::Node;
            cfg.methods = vec![Method::Baseline(*policy)];
            cfg.eval = vec![EvalMeasure::Radius];
        }
        _ => {
            cfg.methods = vec![Method::NetShape];
            cfg.eval = vec![EvalMeasure::Radius];
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn single_budget(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.budgets[..] {
        [k] => Ok(k),
        _ => Err(Error::Config(vec![format!(
            "budget: exactly one budget is required, got {}",
            cfg.budgets.len()
        )])),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = configure(&cli)?;
    let loaded = load_graph(&cfg)?;
    let h = build_hazard(&cfg, &loaded)?;
    let graph = h.graph().clone();
    let (n, edges) = (graph.node_count(), graph.edge_count());
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::Domain(format!("cannot start the worker pool: {e}")))?;
    }

    match cli.command {
        Command::Radius { .. } => {
            let r = hazard_radius(&h, RadiusOptions::default())?;
            println!("nodes = {n}\nedges = {edges}\nrho = {}\niterations = {}", r.rho, r.iterations);
            if cfg.n0 < n {
                let b = influence_upper_bound(r.rho, n, cfg.n0)?;
                println!("n0 = {}\ngamma = {}\nbound = {}", cfg.n0, b.gamma, b.bound);
            }
        }
        Command::Shape { .. } => {
            let k = single_budget(&cfg)?;
            cfg.validate_for(n, edges)?;
            let spec = FeasibleSetSpec::scaled(h.clone(), cfg.after_scale, k, cfg.mode)?;
            let opts = ShapingOptions {
                eps: cfg.eps,
                t_cap: cfg.t_cap,
                radius: RadiusOptions::default(),
            };
            let result = if !spec.is_suppressive() {
                netshape_ascent(&spec, &opts)?
            } else if cfg.mode == ActionMode::Edge {
                netshape_edge(&spec, &opts)?
            } else {
                netshape_node(&spec, &opts)?
            };
            result.averaged.write_tsv(create(&cfg.out, "allocation.tsv")?)?;
            result.best.write_tsv(create(&cfg.out, "allocation_best.tsv")?)?;
            result.write_trace_csv(create(&cfg.out, "trace.csv")?)?;
            result.shaped.write_tsv(create(&cfg.out, "shaped_hazard.tsv")?)?;
            let before = hazard_radius(&h, RadiusOptions::default())?.rho;
            println!(
                "rho_before = {before}\nrho_averaged = {}\nrho_best = {}\niterations = {}",
                result.averaged_rho, result.best_rho, result.iterations
            );
        }
        Command::Simulate {
            seeds,
            temporal,
            dump,
            ..
        } => {
            let p = probabilities_from_hazard(&h);
            let seeds = if seeds.is_empty() {
                if cfg.n0 > n {
                    return Err(Error::Config(vec![format!("n0: {} exceeds the node count {n}", cfg.n0)]));
                }
                select_influencers(&p, cfg.n0, cfg.selection_samples, cfg.seed)
            } else {
                seeds
            };
            let sizes = if temporal {
                (0..cfg.runs as u64)
                    .into_par_iter()
                    .map(|run| {
                        simulate_ctic(&h, &seeds, f64::INFINITY, &mut run_rng(cfg.seed, run))
                            .map(|o| o.infected.len())
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                influence_samples(&p, &seeds, cfg.runs, cfg.seed)?
            };
            if dump {
                write_run_csv(&sizes, create(&cfg.out, "runs.csv")?)?;
            }
            let est = InfluenceEstimate::from_sizes(&sizes);
            let list: Vec<String> = seeds.iter().map(usize::to_string).collect();
            println!(
                "seeds = {}\nruns = {}\nsigma_mean = {}\nsigma_stderr = {}\nfraction = {}",
                list.join(","),
                est.runs,
                est.mean,
                est.std_error,
                est.mean / n as f64
            );
        }
        Command::Sweep { .. } => {
            let outcome = run_sweep(&cfg, &h)?;
            write_sweep_outputs(&cfg, &h, &outcome)?;
            let failed = outcome.rows.iter().filter(|r| r.error.is_some()).count();
            println!(
                "rows = {}\nfailed = {failed}\noutput = {}",
                outcome.rows.len(),
                cfg.out.join("sweep.csv").display()
            );
        }
        Command::Baseline { policy, budget, .. } => {
            cfg.validate_for(n, edges)?;
            let spec = FeasibleSetSpec::scaled(h.clone(), cfg.after_scale, budget, ActionMode::Node)?;
            let seed = cell_seed(cfg.seed, Method::Baseline(policy), budget);
            let picked = baseline_policy(policy, &h, budget, seed)?;
            let alloc = picked.allocation;
            alloc.write_tsv(create(&cfg.out, &format!("baseline_{policy}.tsv"))?)?;
            let after = hazard_radius(&apply_policy(&spec, &alloc)?, RadiusOptions::default())?.rho;
            let list: Vec<String> = picked.order.iter().map(usize::to_string).collect();
            println!("policy = {policy}\npicked = {}\nrho_after = {after}", list.join(","));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
