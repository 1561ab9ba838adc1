//! Flat `key = value` experiment configuration. List-valued keys may repeat or take
//! comma-separated values; `#` starts a comment.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::baselines::PolicyKind;
use crate::error::{Error, Result};
use crate::graph::EdgeListFormat;
use crate::shaping::ActionMode;

#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Trivalency probabilities drawn with their own seed.
    Trivalency { levels: [f64; 3], seed: u64 },
    /// Min-max normalized input weights read as probabilities.
    Native,
    /// Input weights used directly as integrated hazards.
    Hazard,
    /// `ln(1 + beta / recovery)` on every edge.
    Sir { beta: f64, recovery: f64 },
    /// The same probability on every edge.
    Uniform { probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    NetShape,
    Baseline(PolicyKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NetShape => "netshape",
            Method::Baseline(p) => p.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "netshape" {
            Ok(Method::NetShape)
        } else {
            s.parse().map(Method::Baseline).map_err(|_| {
                Error::domain(format!(
                    "unknown method {s:?} (expected netshape, rand, degree, wdegree or netshield)"
                ))
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMeasure {
    Radius,
    Influence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Iterate {
    #[default]
    Averaged,
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: Option<PathBuf>,
    pub format: EdgeListFormat,
    pub undirected: bool,
    pub weighting: Weighting,
    /// Rescale hazards uniformly so the hazard radius equals this value.
    pub target_radius: Option<f64>,
    pub mode: ActionMode,
    /// `F̂ = after_scale · F`.
    pub after_scale: f64,
    /// Empty means the default log-spaced grid.
    pub budgets: Vec<f64>,
    pub budget_count: usize,
    pub budget_max_fraction: f64,
    pub methods: Vec<Method>,
    pub eval: Vec<EvalMeasure>,
    pub runs: usize,
    pub n0: usize,
    pub selection_samples: usize,
    /// Re-select the influencers on every shaped matrix instead of once on the original.
    pub reselect: bool,
    pub seed: u64,
    pub eps: f64,
    pub t_cap: usize,
    pub iterate: Iterate,
    pub threads: usize,
    pub out: PathBuf,
    pub plot: bool,
    /// Record wall-clock times in the sweep CSV (makes it non-reproducible).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: None,
            format: EdgeListFormat::Unweighted,
            undirected: false,
            weighting: Weighting::Trivalency {
                levels: [0.0001, 0.001, 0.01],
                seed: 0,
            },
            target_radius: None,
            mode: ActionMode::Node,
            after_scale: 0.0,
            budgets: Vec::new(),
            budget_count: 16,
            budget_max_fraction: 0.1,
            methods: vec![
                Method::NetShape,
                Method::Baseline(PolicyKind::Rand),
                Method::Baseline(PolicyKind::Degree),
                Method::Baseline(PolicyKind::WDegree),
                Method::Baseline(PolicyKind::NetShield),
            ],
            eval: vec![EvalMeasure::Radius, EvalMeasure::Influence],
            runs: 1000,
            n0: 1,
            selection_samples: 1000,
            reselect: false,
            seed: 0,
            eps: 0.01,
            t_cap: 2000,
            iterate: Iterate::Averaged,
            threads: 0,
            out: PathBuf::from("out"),
            plot: false,
            timing: false,
        }
    }
}

const LIST_KEYS: [&str; 3] = ["budget", "method", "eval"];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(vec![format!("{key}: cannot parse {value:?}")]))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(vec![format!("{key}: expected a boolean, got {value:?}")])),
    }
}

fn items(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies a config file on top of `self`; repeated list keys accumulate.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        self.apply_pairs(&pairs)
    }

    /// Applies overrides: the first occurrence of a list key replaces the current list,
    /// later occurrences in the same batch append.
    pub fn apply_pairs(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut touched = HashSet::new();
        let mut errors = Vec::new();
        for (key, value) in pairs {
            if LIST_KEYS.contains(&key.as_str()) && touched.insert(key.clone()) {
                match key.as_str() {
                    "budget" => self.budgets.clear(),
                    "method" => self.methods.clear(),
                    _ => self.eval.clear(),
                }
            }
            if let Err(e) = self.set(key, value) {
                match e {
                    Error::Config(mut list) => errors.append(&mut list),
                    other => errors.push(other.to_string()),
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    fn trivalency_parts(&self) -> ([f64; 3], u64) {
        match self.weighting {
            Weighting::Trivalency { levels, seed } => (levels, seed),
            _ => ([0.0001, 0.001, 0.01], 0),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "graph" => self.graph = Some(PathBuf::from(value)),
            "format" => {
                self.format = match value {
                    "unweighted" => EdgeListFormat::Unweighted,
                    "weighted" => EdgeListFormat::Weighted,
                    _ => {
                        return Err(Error::Config(vec![format!(
                            "format: expected unweighted or weighted, got {value:?}"
                        )]))
                    }
                }
            }
            "undirected" => self.undirected = parse_bool(key, value)?,
            "weighting" => {
                self.weighting = match value {
                    "trivalency" => {
                        let (levels, seed) = self.trivalency_parts();
                        Weighting::Trivalency { levels, seed }
                    }
                    "native" => Weighting::Native,
                    "hazard" => Weighting::Hazard,
                    "sir" => Weighting::Sir {
                        beta: 1.0,
                        recovery: 1.0,
                    },
                    "uniform" => Weighting::Uniform { probability: 0.1 },
                    _ => {
                        return Err(Error::Config(vec![format!(
                            "weighting: expected trivalency, native, hazard, sir or uniform, got {value:?}"
                        )]))
                    }
                }
            }
            "levels" => {
                let parsed: Vec<f64> = items(value)
                    .map(|v| parse_num(key, v))
                    .collect::<Result<_>>()?;
                let levels: [f64; 3] = parsed.try_into().map_err(|_| {
                    Error::Config(vec![format!("levels: expected three values, got {value:?}")])
                })?;
                let (_, seed) = self.trivalency_parts();
                self.weighting = Weighting::Trivalency { levels, seed };
            }
            "weight_seed" => {
                let (levels, _) = self.trivalency_parts();
                self.weighting = Weighting::Trivalency {
                    levels,
                    seed: parse_num(key, value)?,
                };
            }
            "beta" | "recovery" => {
                let (mut beta, mut recovery) = match self.weighting {
                    Weighting::Sir { beta, recovery } => (beta, recovery),
                    _ => (1.0, 1.0),
                };
                let v = parse_num(key, value)?;
                if key == "beta" {
                    beta = v;
                } else {
                    recovery = v;
                }
                self.weighting = Weighting::Sir { beta, recovery };
            }
            "probability" => {
                self.weighting = Weighting::Uniform {
                    probability: parse_num(key, value)?,
                }
            }
            "target_radius" => {
                self.target_radius = match value {
                    "" | "none" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "mode" => {
                self.mode = value
                    .parse()
                    .map_err(|e: Error| Error::Config(vec![format!("mode: {e}")]))?
            }
            "after_scale" => self.after_scale = parse_num(key, value)?,
            "budget" => {
                for v in items(value) {
                    self.budgets.push(parse_num(key, v)?);
                }
            }
            "budget_count" => self.budget_count = parse_num(key, value)?,
            "budget_max_fraction" => self.budget_max_fraction = parse_num(key, value)?,
            "method" => {
                for v in items(value) {
                    let m = v
                        .parse()
                        .map_err(|e: Error| Error::Config(vec![format!("method: {e}")]))?;
                    if !self.methods.contains(&m) {
                        self.methods.push(m);
                    }
                }
            }
            "eval" => {
                for v in items(value) {
                    let m = match v {
                        "radius" => EvalMeasure::Radius,
                        "influence" => EvalMeasure::Influence,
                        _ => {
                            return Err(Error::Config(vec![format!(
                                "eval: expected radius or influence, got {v:?}"
                            )]))
                        }
                    };
                    if !self.eval.contains(&m) {
                        self.eval.push(m);
                    }
                }
            }
            "runs" => self.runs = parse_num(key, value)?,
            "n0" => self.n0 = parse_num(key, value)?,
            "selection_samples" => self.selection_samples = parse_num(key, value)?,
            "reselect" => self.reselect = parse_bool(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "t_cap" => self.t_cap = parse_num(key, value)?,
            "iterate" => {
                self.iterate = match value {
                    "averaged" => Iterate::Averaged,
                    "best" => Iterate::Best,
                    _ => {
                        return Err(Error::Config(vec![format!(
                            "iterate: expected averaged or best, got {value:?}"
                        )]))
                    }
                }
            }
            "threads" => self.threads = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "plot" => self.plot = parse_bool(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            _ => return Err(Error::Config(vec![format!("unknown key {key:?}")])),
        }
        Ok(())
    }

    pub fn wants(&self, measure: EvalMeasure) -> bool {
        self.eval.contains(&measure)
    }

    /// Checks everything that does not depend on the loaded graph.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.methods.is_empty() {
            errors.push("method: at least one method is required".to_string());
        }
        if self.eval.is_empty() {
            errors.push("eval: at least one evaluation measure is required".to_string());
        }
        if self.budgets.iter().any(|k| !k.is_finite() || *k < 0.0) {
            errors.push("budget: budgets must be finite and nonnegative".to_string());
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            errors.push("budget: budgets must be strictly increasing".to_string());
        }
        if self.budgets.is_empty() && self.budget_count == 0 {
            errors.push("budget_count: must be positive when no budgets are listed".to_string());
        }
        if !(self.budget_max_fraction > 0.0 && self.budget_max_fraction <= 1.0) {
            errors.push("budget_max_fraction: must lie in (0,1]".to_string());
        }
        if self.mode == ActionMode::Edge
            && self.methods.iter().any(|m| matches!(m, Method::Baseline(_)))
        {
            errors.push("method: baseline policies act on nodes and need mode = node".to_string());
        }
        if !(self.eps > 0.0) {
            errors.push("eps: must be positive".to_string());
        }
        if self.t_cap == 0 {
            errors.push("t_cap: must be at least 1".to_string());
        }
        if self.runs == 0 {
            errors.push("runs: must be at least 1".to_string());
        }
        if self.n0 == 0 {
            errors.push("n0: must be at least 1".to_string());
        }
        if self.selection_samples == 0 {
            errors.push("selection_samples: must be at least 1".to_string());
        }
        if !(self.after_scale >= 0.0) || !self.after_scale.is_finite() {
            errors.push("after_scale: must be finite and nonnegative".to_string());
        }
        if let Some(t) = self.target_radius {
            if !(t >= 0.0) || !t.is_finite() {
                errors.push("target_radius: must be finite and nonnegative".to_string());
            }
        }
        match self.weighting {
            Weighting::Trivalency { levels, .. } => {
                if levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
                    errors.push("levels: every level must lie in (0,1)".to_string());
                }
            }
            Weighting::Native | Weighting::Hazard => {
                if self.format != EdgeListFormat::Weighted {
                    errors.push("weighting: native/hazard weighting needs format = weighted".to_string());
                }
            }
            Weighting::Sir { beta, recovery } => {
                if !(recovery > 0.0) {
                    errors.push("recovery: must be positive".to_string());
                }
                if !(beta >= 0.0) {
                    errors.push("beta: must be nonnegative".to_string());
                }
            }
            Weighting::Uniform { probability } => {
                if !(0.0..1.0).contains(&probability) {
                    errors.push("probability: must lie in [0,1)".to_string());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Checks that depend on the graph size.
    pub fn validate_for(&self, nodes: usize, edges: usize) -> Result<()> {
        self.validate()?;
        let mut errors = Vec::new();
        let (limit, what) = match self.mode {
            ActionMode::Node => (nodes, "node count"),
            ActionMode::Edge => (edges, "edge count"),
        };
        if let Some(k) = self.budgets.iter().find(|&&k| k > limit as f64) {
            errors.push(format!("budget: {k} exceeds the {what} {limit}"));
        }
        if self.wants(EvalMeasure::Influence) && self.n0 >= nodes {
            errors.push(format!("n0: {} must be below the node count {nodes}", self.n0));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    /// The configured budgets, or `budget_count` log-spaced budgets from 1 up to
    /// `budget_max_fraction · size` (linear when that is below 1).
    pub fn budget_grid(&self, size: usize) -> Vec<f64> {
        if !self.budgets.is_empty() {
            return self.budgets.clone();
        }
        let top = self.budget_max_fraction * size as f64;
        let count = self.budget_count.max(1);
        if count == 1 {
            return vec![top];
        }
        let mut grid: Vec<f64> = if top > 1.0 {
            (0..count)
                .map(|i| top.powf(i as f64 / (count - 1) as f64))
                .collect()
        } else {
            (1..=count).map(|i| top * i as f64 / count as f64).collect()
        };
        grid.dedup();
        grid
    }

    /// Canonical `key = value` rendering; parsing it reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(g) = &self.graph {
            let _ = writeln!(s, "graph = {}", g.display());
        }
        let format = match self.format {
            EdgeListFormat::Unweighted => "unweighted",
            EdgeListFormat::Weighted => "weighted",
        };
        let _ = writeln!(s, "format = {format}");
        let _ = writeln!(s, "undirected = {}", self.undirected);
        match self.weighting {
            Weighting::Trivalency { levels, seed } => {
                let _ = writeln!(s, "weighting = trivalency");
                let _ = writeln!(s, "levels = {},{},{}", levels[0], levels[1], levels[2]);
                let _ = writeln!(s, "weight_seed = {seed}");
            }
            Weighting::Native => {
                let _ = writeln!(s, "weighting = native");
            }
            Weighting::Hazard => {
                let _ = writeln!(s, "weighting = hazard");
            }
            Weighting::Sir { beta, recovery } => {
                let _ = writeln!(s, "weighting = sir\nbeta = {beta}\nrecovery = {recovery}");
            }
            Weighting::Uniform { probability } => {
                let _ = writeln!(s, "weighting = uniform\nprobability = {probability}");
            }
        }
        if let Some(t) = self.target_radius {
            let _ = writeln!(s, "target_radius = {t}");
        }
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "after_scale = {}", self.after_scale);
        for k in &self.budgets {
            let _ = writeln!(s, "budget = {k}");
        }
        let _ = writeln!(s, "budget_count = {}", self.budget_count);
        let _ = writeln!(s, "budget_max_fraction = {}", self.budget_max_fraction);
        for m in &self.methods {
            let _ = writeln!(s, "method = {m}");
        }
        for e in &self.eval {
            let name = match e {
                EvalMeasure::Radius => "radius",
                EvalMeasure::Influence => "influence",
            };
            let _ = writeln!(s, "eval = {name}");
        }
        let iterate = match self.iterate {
            Iterate::Averaged => "averaged",
            Iterate::Best => "best",
        };
        let _ = write!(
            s,
            "runs = {}\nn0 = {}\nselection_samples = {}\nreselect = {}\nseed = {}\neps = {}\n\
             t_cap = {}\niterate = {iterate}\nthreads = {}\nout = {}\nplot = {}\ntiming = {}\n",
            self.runs,
            self.n0,
            self.selection_samples,
            self.reselect,
            self.seed,
            self.eps,
            self.t_cap,
            self.threads,
            self.out.display(),
            self.plot,
            self.timing
        );
        s
    }

    /// FNV-1a hash of the canonical text, excluding the thread count and output path,
    /// which do not affect results.
    pub fn fingerprint(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.threads = 0;
        canonical.out = PathBuf::new();
        canonical
            .to_text()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_repeated_keys_and_comments() {
        let cfg = ExperimentConfig::parse_str(
            "# sweep\ngraph = data/g.txt\nmode = node\nbudget = 1\nbudget = 2, 4\n\
             method = netshape\nmethod = degree # inline\neval = radius\nlevels = .1,.3,.6\n",
        )
        .unwrap();
        assert_eq!(cfg.budgets, vec![1.0, 2.0, 4.0]);
        assert_eq!(
            cfg.methods,
            vec![Method::NetShape, Method::Baseline(PolicyKind::Degree)]
        );
        assert_eq!(cfg.eval, vec![EvalMeasure::Radius]);
        assert_eq!(
            cfg.weighting,
            Weighting::Trivalency {
                levels: [0.1, 0.3, 0.6],
                seed: 0
            }
        );
        cfg.validate().unwrap();
    }

    #[test]
    fn overrides_replace_lists() {
        let mut cfg = ExperimentConfig::parse_str("budget = 1\nbudget = 2\n").unwrap();
        cfg.apply_pairs(&[
            ("budget".into(), "5".into()),
            ("budget".into(), "6".into()),
            ("seed".into(), "9".into()),
        ])
        .unwrap();
        assert_eq!(cfg.budgets, vec![5.0, 6.0]);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn validation_lists_offending_fields() {
        let cfg = ExperimentConfig::parse_str("budget = 3\nbudget = 2\neps = 0\nmode = edge\n").unwrap();
        match cfg.validate() {
            Err(Error::Config(list)) => {
                let text = list.join("\n");
                assert!(text.contains("strictly increasing"));
                assert!(text.contains("eps"));
                assert!(text.contains("mode = node"));
            }
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::parse_str("bogus = 1").is_err());
        assert!(ExperimentConfig::parse_str("no equals sign").is_err());
    }

    #[test]
    fn node_budget_above_node_count_is_rejected() {
        let cfg = ExperimentConfig::parse_str("budget = 11\n").unwrap();
        assert!(cfg.validate_for(10, 100).is_err());
        assert!(cfg.validate_for(11, 100).is_ok());
    }

    #[test]
    fn default_budget_grid() {
        let cfg = ExperimentConfig::default();
        let grid = cfg.budget_grid(1000);
        assert_eq!(grid.len(), 16);
        assert!((grid[0] - 1.0).abs() < 1e-12);
        assert!((grid[15] - 100.0).abs() < 1e-9);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = ExperimentConfig::parse_str(
            "graph = a.txt\nweighting = sir\nbeta = 0.5\nrecovery = 2\nbudget = 1.5\n\
             method = rand\neval = influence\ntarget_radius = 1\niterate = best\n",
        )
        .unwrap();
        let back = ExperimentConfig::parse_str(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        let mut other = cfg.clone();
        other.threads = 8;
        assert_eq!(other.fingerprint(), cfg.fingerprint());
        other.seed = 1;
        assert_ne!(other.fingerprint(), cfg.fingerprint());
    }
}
