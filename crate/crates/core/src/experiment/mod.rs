//! Experiment harness: configuration, graph preparation and budget sweeps.

mod config;
mod plot;

pub use config::{EvalMeasure, ExperimentConfig, Iterate, Method, Weighting};
pub use plot::{write_line_chart, Series};

use std::fs;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::baseline_policy;
use crate::cascade::{estimate_influence, mix64, select_influencers, InfluenceEstimate};
use crate::error::{Error, Result};
use crate::graph::{
    assign_trivalency, hazard_from_probabilities, probabilities_from_hazard,
    probabilities_from_weights, read_edge_list_file, sir_hazard, HazardMatrix, LoadOptions,
    LoadedGraph, ProbabilityMatrix,
};
use crate::shaping::{
    apply_policy, netshape_ascent, netshape_edge, netshape_node, ActionAllocation, ActionMode,
    FeasibleSetSpec, ShapingOptions,
};
use crate::spectral::{hazard_radius, RadiusOptions};

pub const SWEEP_HEADER: &str = "method,k,rho,sigma_mean,sigma_stderr,wall_time_ms,seed,error";

/// Reads the configured edge list.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<LoadedGraph> {
    let path = cfg
        .graph
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["graph: no input graph given".to_string()]))?;
    let loaded = read_edge_list_file(
        path,
        LoadOptions {
            format: cfg.format,
            undirected: cfg.undirected,
        },
    )?;
    if loaded.report.self_loops > 0 {
        log::warn!("skipped {} self-loop line(s)", loaded.report.self_loops);
    }
    Ok(loaded)
}

/// Turns a loaded graph into integrated hazards per the configured weighting, then
/// rescales to the target radius if one is set.
pub fn build_hazard(cfg: &ExperimentConfig, loaded: &LoadedGraph) -> Result<HazardMatrix> {
    let graph = &loaded.graph;
    let weights = || {
        loaded
            .weights
            .as_deref()
            .ok_or_else(|| Error::Config(vec!["weighting: the input graph has no weights".to_string()]))
    };
    let h = match cfg.weighting {
        Weighting::Trivalency { levels, seed } => {
            hazard_from_probabilities(&assign_trivalency(graph, levels, seed)?)?
        }
        Weighting::Native => hazard_from_probabilities(&probabilities_from_weights(graph, weights()?)?)?,
        Weighting::Hazard => HazardMatrix::new(graph.clone(), weights()?.to_vec())?,
        Weighting::Sir { beta, recovery } => sir_hazard(graph, beta, recovery)?,
        Weighting::Uniform { probability } => {
            hazard_from_probabilities(&ProbabilityMatrix::uniform(graph.clone(), probability)?)?
        }
    };
    match cfg.target_radius {
        Some(target) => {
            let rho = hazard_radius(&h, RadiusOptions::default())?.rho;
            if rho > 0.0 {
                h.scaled(target / rho)
            } else {
                Ok(h)
            }
        }
        None => Ok(h),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub k: f64,
    pub rho: Option<f64>,
    pub sigma_mean: Option<f64>,
    pub sigma_stderr: Option<f64>,
    /// Zero unless timing is enabled.
    pub wall_time_ms: f64,
    pub seed: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub budgets: Vec<f64>,
    /// Radius of the unshaped matrix.
    pub base_rho: f64,
    /// Influencers chosen on the unshaped matrix, when influence is evaluated.
    pub influencers: Option<Vec<usize>>,
}

fn method_tag(m: Method) -> u64 {
    m.name()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of one sweep cell; a pure function of the global seed, method and budget.
pub fn cell_seed(seed: u64, method: Method, k: f64) -> u64 {
    mix64(seed ^ mix64(method_tag(method) ^ mix64(k.to_bits())))
}

fn selection_seed(seed: u64) -> u64 {
    mix64(seed ^ 0x243F_6A88_85A3_08D3)
}

fn evaluation_seed(seed: u64) -> u64 {
    mix64(seed ^ 0x1319_8A2E_0370_7344)
}

/// The policy a method produces for one budget.
pub fn method_allocation(
    cfg: &ExperimentConfig,
    spec: &FeasibleSetSpec,
    method: Method,
    seed: u64,
) -> Result<ActionAllocation> {
    match method {
        Method::NetShape => {
            let opts = ShapingOptions {
                eps: cfg.eps,
                t_cap: cfg.t_cap,
                radius: RadiusOptions::default(),
            };
            let result = if spec.is_suppressive() {
                match spec.mode() {
                    ActionMode::Edge => netshape_edge(spec, &opts)?,
                    ActionMode::Node => netshape_node(spec, &opts)?,
                }
            } else {
                netshape_ascent(spec, &opts)?
            };
            Ok(match cfg.iterate {
                Iterate::Averaged => result.averaged,
                Iterate::Best => result.best,
            })
        }
        Method::Baseline(kind) => {
            if spec.mode() != ActionMode::Node {
                return Err(Error::domain(format!("{kind} acts on nodes only")));
            }
            Ok(baseline_policy(kind, spec.before(), spec.budget(), seed)?.allocation)
        }
    }
}

struct CellResult {
    rho: Option<f64>,
    influence: Option<InfluenceEstimate>,
}

fn evaluate_cell(
    cfg: &ExperimentConfig,
    h: &HazardMatrix,
    method: Method,
    k: f64,
    seed: u64,
    influencers: Option<&[usize]>,
) -> Result<CellResult> {
    let spec = FeasibleSetSpec::scaled(h.clone(), cfg.after_scale, k, cfg.mode)?;
    let alloc = method_allocation(cfg, &spec, method, seed)?;
    let shaped = apply_policy(&spec, &alloc)?;
    let rho = if cfg.wants(EvalMeasure::Radius) {
        Some(hazard_radius(&shaped, RadiusOptions::default())?.rho)
    } else {
        None
    };
    let influence = if cfg.wants(EvalMeasure::Influence) {
        let p = probabilities_from_hazard(&shaped);
        let reselected;
        let seeds = match influencers {
            Some(s) if !cfg.reselect => s,
            _ => {
                reselected =
                    select_influencers(&p, cfg.n0, cfg.selection_samples, selection_seed(cfg.seed));
                &reselected[..]
            }
        };
        Some(estimate_influence(&p, seeds, cfg.runs, evaluation_seed(cfg.seed))?)
    } else {
        None
    };
    Ok(CellResult { rho, influence })
}

fn sanitize(message: &str) -> String {
    message
        .chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' | '"' => ' ',
            c => c,
        })
        .collect()
}

/// Evaluates every (method, budget) cell. Cells run on a pool of `cfg.threads` workers
/// (all cores when 0); results do not depend on the thread count. A failing cell is
/// reported in its row and the sweep continues.
pub fn run_sweep(cfg: &ExperimentConfig, h: &HazardMatrix) -> Result<SweepOutcome> {
    let graph = h.graph();
    let size = match cfg.mode {
        ActionMode::Node => graph.node_count(),
        ActionMode::Edge => graph.edge_count(),
    };
    cfg.validate_for(graph.node_count(), graph.edge_count())?;
    let budgets = cfg.budget_grid(size);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot start the worker pool: {e}")))?;

    pool.install(|| {
        let base_rho = hazard_radius(h, RadiusOptions::default())?.rho;
        let influencers = if cfg.wants(EvalMeasure::Influence) {
            let p = probabilities_from_hazard(h);
            Some(select_influencers(
                &p,
                cfg.n0,
                cfg.selection_samples,
                selection_seed(cfg.seed),
            ))
        } else {
            None
        };
        let cells: Vec<(Method, f64)> = cfg
            .methods
            .iter()
            .flat_map(|&m| budgets.iter().map(move |&k| (m, k)))
            .collect();
        let rows = cells
            .par_iter()
            .map(|&(method, k)| {
                let seed = cell_seed(cfg.seed, method, k);
                let start = Instant::now();
                let result = evaluate_cell(cfg, h, method, k, seed, influencers.as_deref());
                let wall_time_ms = if cfg.timing {
                    start.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                };
                let mut row = SweepRow {
                    method,
                    k,
                    rho: None,
                    sigma_mean: None,
                    sigma_stderr: None,
                    wall_time_ms,
                    seed,
                    error: None,
                };
                match result {
                    Ok(cell) => {
                        row.rho = cell.rho;
                        row.sigma_mean = cell.influence.map(|i| i.mean);
                        row.sigma_stderr = cell.influence.map(|i| i.std_error);
                    }
                    Err(e) => {
                        log::warn!("cell {method} k={k} failed: {e}");
                        row.error = Some(sanitize(&e.to_string()));
                    }
                }
                row
            })
            .collect();
        Ok(SweepOutcome {
            rows,
            budgets,
            base_rho,
            influencers,
        })
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.k,
            opt(r.rho),
            opt(r.sigma_mean),
            opt(r.sigma_stderr),
            r.wall_time_ms,
            r.seed,
            r.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

/// Writes `sweep.csv`, `metadata.txt` and, if enabled, `rho.svg` / `influence.svg`
/// into the configured output directory.
pub fn write_sweep_outputs(
    cfg: &ExperimentConfig,
    h: &HazardMatrix,
    outcome: &SweepOutcome,
) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    let mut csv = Vec::new();
    write_sweep_csv(&outcome.rows, &mut csv)?;
    fs::write(cfg.out.join("sweep.csv"), csv)?;

    let mut meta = format!(
        "fingerprint = {:016x}\nnodes = {}\nedges = {}\nbase_rho = {}\n",
        cfg.fingerprint(),
        h.graph().node_count(),
        h.graph().edge_count(),
        outcome.base_rho
    );
    if let Some(s) = &outcome.influencers {
        let list: Vec<String> = s.iter().map(usize::to_string).collect();
        meta.push_str(&format!("influencers = {}\n", list.join(",")));
    }
    meta.push_str("\n# configuration\n");
    meta.push_str(&cfg.to_text());
    fs::write(cfg.out.join("metadata.txt"), meta)?;

    if cfg.plot {
        let n = h.graph().node_count() as f64;
        let series = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> Vec<Series> {
            cfg.methods
                .iter()
                .map(|&m| Series {
                    name: m.to_string(),
                    points: outcome
                        .rows
                        .iter()
                        .filter(|r| r.method == m)
                        .filter_map(|r| f(r).map(|y| (r.k, y)))
                        .collect(),
                })
                .collect()
        };
        if cfg.wants(EvalMeasure::Radius) {
            let mut svg = Vec::new();
            write_line_chart("hazard radius", "budget k", "rho", &series(&|r| r.rho), &mut svg)?;
            fs::write(cfg.out.join("rho.svg"), svg)?;
        }
        if cfg.wants(EvalMeasure::Influence) {
            let mut svg = Vec::new();
            write_line_chart(
                "expected infected fraction",
                "budget k",
                "sigma / n",
                &series(&|r| r.sigma_mean.map(|s| s / n)),
                &mut svg,
            )?;
            fs::write(cfg.out.join("influence.svg"), svg)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::PolicyKind;
    use crate::graph::Graph;
    use std::sync::Arc;

    fn cycle_hazard() -> HazardMatrix {
        let g = Arc::new(Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6)).collect()).unwrap());
        HazardMatrix::uniform(g, 0.7).unwrap()
    }

    #[test]
    fn zero_budget_rand_measures_the_unmodified_graph() {
        let h = cycle_hazard();
        let cfg = ExperimentConfig::parse_str(
            "method = rand\nbudget = 0\nruns = 200\nselection_samples = 50\n",
        )
        .unwrap();
        let out = run_sweep(&cfg, &h).unwrap();
        assert_eq!(out.rows.len(), 1);
        let row = &out.rows[0];
        assert!(row.error.is_none(), "{row:?}");
        assert!((row.rho.unwrap() - out.base_rho).abs() < 1e-12);
        let p = probabilities_from_hazard(&h);
        let seeds = out.influencers.as_ref().unwrap();
        let direct = estimate_influence(&p, seeds, 200, evaluation_seed(cfg.seed)).unwrap();
        assert_eq!(row.sigma_mean, Some(direct.mean));
    }

    #[test]
    fn invalid_config_is_rejected_before_cells_run() {
        let mut cfg = ExperimentConfig::parse_str("method = netshape\nbudget = 1\neval = radius\n").unwrap();
        let g = Arc::new(Graph::new(2, vec![(0, 1)]).unwrap());
        let h = HazardMatrix::uniform(g, 1.0).unwrap();
        assert!(run_sweep(&cfg, &h).unwrap().rows[0].error.is_none());
        cfg.eps = f64::NAN;
        assert!(matches!(run_sweep(&cfg, &h), Err(Error::Config(_))));
        assert_eq!(sanitize("a,b\nc"), "a;b c");
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SweepRow {
            method: Method::Baseline(PolicyKind::Degree),
            k: 2.5,
            rho: Some(0.25),
            sigma_mean: None,
            sigma_stderr: None,
            wall_time_ms: 0.0,
            seed: 7,
            error: Some("boom".into()),
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{SWEEP_HEADER}\ndegree,2.5,0.25,,,0,7,boom\n")
        );
    }

    #[test]
    fn cell_seeds_depend_on_method_and_budget() {
        let a = cell_seed(1, Method::NetShape, 1.0);
        assert_eq!(a, cell_seed(1, Method::NetShape, 1.0));
        assert_ne!(a, cell_seed(1, Method::NetShape, 2.0));
        assert_ne!(a, cell_seed(1, Method::Baseline(PolicyKind::Rand), 1.0));
        assert_ne!(a, cell_seed(2, Method::NetShape, 1.0));
    }

    #[test]
    fn target_radius_rescales() {
        let g = Arc::new(Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        let loaded = LoadedGraph {
            graph: g,
            weights: None,
            report: Default::default(),
        };
        let cfg = ExperimentConfig::parse_str("weighting = uniform\nprobability = 0.3\ntarget_radius = 2\n").unwrap();
        let h = build_hazard(&cfg, &loaded).unwrap();
        let rho = hazard_radius(&h, RadiusOptions::default()).unwrap().rho;
        assert!((rho - 2.0).abs() < 1e-8, "{rho}");
        let cfg = ExperimentConfig::parse_str("weighting = native\nformat = weighted\n").unwrap();
        assert!(build_hazard(&cfg, &loaded).is_err());
    }
}
