//! Experiment specification and its `key = value` text format.
//!
//! Lines are `key = value`; `#` starts a comment. Node numbers (`target`,
//! `corrupted`) are 1-based in the text and 0-based in memory. `sigma_sq`
//! accepts a comma list or `log:<lo>:<hi>:<count>`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{connected_geometric_graph, default_radius_sq, Graph};
use crate::info::DEFAULT_K;
use crate::pdmm::{DEFAULT_C, DEFAULT_ITERATIONS};
use crate::perturbation::{MechanismKind, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Convergence,
    DpTradeoff,
    Topology,
    Calibration,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::DpTradeoff => "tradeoff",
            Self::Topology => "topology",
            Self::Calibration => "calibration",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "convergence" => Ok(Self::Convergence),
            "tradeoff" | "dp_tradeoff" | "dp-tradeoff" => Ok(Self::DpTradeoff),
            "topology" => Ok(Self::Topology),
            "calibration" | "calibrate" => Ok(Self::Calibration),
            other => Err(Error::Parse(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// Random geometric graph, resampled until connected.
    Generated { n: usize, radius_sq: Option<f64>, seed: u64 },
    /// Edge-list file (header `n m`, 0-based endpoints).
    File(PathBuf),
    /// The two shipped topology graphs `G` and `G'`.
    Bundled,
}

pub const TOPOLOGY_G: &str = include_str!("../../data/topology_g.edges");
pub const TOPOLOGY_G_PRIME: &str = include_str!("../../data/topology_g_prime.edges");
/// Corrupted nodes of the bundled topology graphs (0-based).
pub const TOPOLOGY_CORRUPTED: [usize; 2] = [4, 7];

/// Bundled graphs with their labels.
pub fn bundled_graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("G", Graph::parse_edge_list(TOPOLOGY_G).expect("bundled graph G")),
        ("G'", Graph::parse_edge_list(TOPOLOGY_G_PRIME).expect("bundled graph G'")),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub graph: GraphSource,
    pub mechanisms: Vec<MechanismKind>,
    pub sigma_sq: Vec<f64>,
    pub trials: usize,
    pub iterations: usize,
    /// 0-based target node.
    pub target: usize,
    /// 0-based corrupted nodes; `None` uses the experiment default.
    pub corrupted: Option<Vec<usize>>,
    pub k: usize,
    pub seed: u64,
    pub c: f64,
    /// `None` picks the experiment default per mechanism.
    pub solver: Option<SolverKind>,
    /// Variance of the Gaussian private data.
    pub sigma_s_sq: f64,
    pub parallel: bool,
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| {
            let e = a + (b - a) * i as f64 / (count - 1) as f64;
            let v = 10f64.powf(e);
            let rounded = format!("{v:.6e}").parse::<f64>().unwrap_or(v);
            rounded
        })
        .collect()
}

impl ExperimentSpec {
    pub fn default_for(experiment: ExperimentKind) -> Self {
        let base = Self {
            experiment,
            graph: GraphSource::Generated { n: 10, radius_sq: None, seed: 1 },
            mechanisms: vec![MechanismKind::None, MechanismKind::Dp, MechanismKind::Smpc, MechanismKind::Dosp],
            sigma_sq: vec![0.0, 1.0, 100.0],
            trials: 10_000,
            iterations: DEFAULT_ITERATIONS,
            target: 0,
            corrupted: None,
            k: DEFAULT_K,
            seed: 1,
            c: DEFAULT_C,
            solver: None,
            sigma_s_sq: 1.0,
            parallel: true,
        };
        match experiment {
            ExperimentKind::Convergence => Self { trials: 1_000, ..base },
            ExperimentKind::DpTradeoff => Self {
                mechanisms: vec![MechanismKind::Dp],
                sigma_sq: log_grid(1e-3, 1e3, 13),
                ..base
            },
            ExperimentKind::Topology => Self {
                graph: GraphSource::Bundled,
                mechanisms: vec![MechanismKind::Smpc, MechanismKind::Dosp],
                sigma_sq: log_grid(1e-2, 1e3, 6),
                ..base
            },
            ExperimentKind::Calibration => Self { mechanisms: Vec::new(), sigma_sq: Vec::new(), ..base },
        }
    }

    /// Parses spec text on top of the defaults for `experiment` (or for the
    /// experiment named in the text).
    pub fn parse(text: &str, experiment: Option<ExperimentKind>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut named = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| spec_err(no + 1, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim().to_string());
            if key == "experiment" {
                named = Some(value.parse::<ExperimentKind>().map_err(|e| spec_err(no + 1, e.to_string()))?);
            } else {
                pairs.push((no + 1, key, value));
            }
        }
        let kind = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(spec_err(0, format!("spec is for `{b}` but `{a}` was requested")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(spec_err(0, "no experiment given".into())),
        };
        let mut spec = Self::default_for(kind);
        for (line, key, value) in pairs {
            spec.set(&key, &value).map_err(|e| spec_err(line, e.to_string()))?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => match &mut self.graph {
                GraphSource::Generated { n, .. } => *n = parse_num(key, value)?,
                other => *other = GraphSource::Generated { n: parse_num(key, value)?, radius_sq: None, seed: 1 },
            },
            "radius_sq" => {
                let r = parse_num::<f64>(key, value)?;
                match &mut self.graph {
                    GraphSource::Generated { radius_sq, .. } => *radius_sq = Some(r),
                    other => *other = GraphSource::Generated { n: 10, radius_sq: Some(r), seed: 1 },
                }
            }
            "graph_seed" => {
                let s = parse_num::<u64>(key, value)?;
                match &mut self.graph {
                    GraphSource::Generated { seed, .. } => *seed = s,
                    other => *other = GraphSource::Generated { n: 10, radius_sq: None, seed: s },
                }
            }
            "graph_file" => self.graph = GraphSource::File(PathBuf::from(value)),
            "graph" => match value.to_ascii_lowercase().as_str() {
                "bundled" => self.graph = GraphSource::Bundled,
                "generated" => self.graph = GraphSource::Generated { n: 10, radius_sq: None, seed: 1 },
                _ => return Err(Error::Parse(format!("graph must be `bundled` or `generated`, got `{value}`"))),
            },
            "mechanisms" => {
                self.mechanisms = split_list(value).map(str::parse).collect::<Result<Vec<_>>>()?;
            }
            "sigma_sq" => self.sigma_sq = parse_grid(value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "iterations" | "t" => self.iterations = parse_num(key, value)?,
            "target" => self.target = parse_node(value)?,
            "corrupted" => {
                self.corrupted = Some(split_list(value).map(parse_node).collect::<Result<Vec<_>>>()?);
            }
            "k" => self.k = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "c" => self.c = parse_num(key, value)?,
            "solver" => {
                self.solver = match value.to_ascii_lowercase().as_str() {
                    "auto" | "default" => None,
                    v => Some(v.parse()?),
                }
            }
            "sigma_s_sq" => self.sigma_s_sq = parse_num(key, value)?,
            "parallel" => self.parallel = parse_num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(spec_err(0, m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(s) = self.sigma_sq.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return bad(format!("sigma_sq entries must be finite and ≥ 0, got {s}"));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.c > 0.0) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.sigma_s_sq > 0.0) {
            return bad(format!("sigma_s_sq must be positive, got {}", self.sigma_s_sq));
        }
        if let GraphSource::Generated { n, radius_sq, .. } = &self.graph {
            if *n < 2 {
                return bad(format!("n must be at least 2, got {n}"));
            }
            if radius_sq.is_some_and(|r| !(r > 0.0)) {
                return bad("radius_sq must be positive".into());
            }
        }
        if self.solver == Some(SolverKind::Linear) && self.mechanisms.contains(&MechanismKind::Dosp) {
            return Err(Error::DospRequiresPdmm);
        }
        Ok(())
    }

    /// Solver used for `kind` in this experiment.
    pub fn solver_for(&self, kind: MechanismKind) -> SolverKind {
        if let Some(s) = self.solver {
            return s;
        }
        match (self.experiment, kind) {
            (_, MechanismKind::Dosp) | (ExperimentKind::Convergence, _) => SolverKind::Pdmm,
            _ => SolverKind::Linear,
        }
    }

    /// Graph for generated or file sources, plus a description of it.
    pub fn load_graph(&self) -> Result<(Graph, String)> {
        match &self.graph {
            GraphSource::Generated { n, radius_sq, seed } => {
                let r2 = radius_sq.unwrap_or_else(|| default_radius_sq(*n));
                let (g, used) = connected_geometric_graph(*n, r2, *seed)?;
                Ok((g, format!("geometric n={n} radius_sq={r2} seed={used}")))
            }
            GraphSource::File(p) => Ok((Graph::read_edge_list(p)?, format!("file {}", p.display()))),
            GraphSource::Bundled => {
                let (name, g) = bundled_graphs().into_iter().next().expect("bundled graphs");
                Ok((g, format!("bundled {name}")))
            }
        }
    }

    /// Canonical text form of the fully resolved spec.
    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        out.push(format!("experiment = {}", self.experiment));
        match &self.graph {
            GraphSource::Generated { n, radius_sq, seed } => {
                out.push(format!("n = {n}"));
                out.push(format!("radius_sq = {}", radius_sq.unwrap_or_else(|| default_radius_sq(*n))));
                out.push(format!("graph_seed = {seed}"));
            }
            GraphSource::File(p) => out.push(format!("graph_file = {}", p.display())),
            GraphSource::Bundled => out.push("graph = bundled".into()),
        }
        let mechs: Vec<String> = self.mechanisms.iter().map(|m| m.to_string()).collect();
        out.push(format!("mechanisms = {}", mechs.join(",")));
        let sig: Vec<String> = self.sigma_sq.iter().map(|s| s.to_string()).collect();
        out.push(format!("sigma_sq = {}", sig.join(",")));
        out.push(format!("trials = {}", self.trials));
        out.push(format!("iterations = {}", self.iterations));
        out.push(format!("target = {}", self.target + 1));
        if let Some(c) = &self.corrupted {
            let v: Vec<String> = c.iter().map(|j| (j + 1).to_string()).collect();
            out.push(format!("corrupted = {}", v.join(",")));
        }
        out.push(format!("k = {}", self.k));
        out.push(format!("seed = {}", self.seed));
        out.push(format!("c = {}", self.c));
        out.push(format!("solver = {}", self.solver.map_or("auto".to_string(), |s| s.to_string())));
        out.push(format!("sigma_s_sq = {}", self.sigma_s_sq));
        let mut text = out.join("\n");
        text.push('\n');
        text
    }
}

fn spec_err(line: usize, message: String) -> Error {
    Error::Spec { line, message }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse(format!("invalid value `{value}` for `{key}`")))
}

fn parse_node(value: &str) -> Result<usize> {
    match parse_num::<usize>("node", value)? {
        0 => Err(Error::Parse("node numbers are 1-based".into())),
        v => Ok(v - 1),
    }
}

/// Comma list of values or `log:<lo>:<hi>:<count>`.
pub fn parse_grid(value: &str) -> Result<Vec<f64>> {
    if let Some(rest) = value.trim().strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected log:<lo>:<hi>:<count>, got `{value}`")));
        }
        let lo: f64 = parse_num("sigma_sq", parts[0])?;
        let hi: f64 = parse_num("sigma_sq", parts[1])?;
        let count: usize = parse_num("sigma_sq", parts[2])?;
        if !(lo > 0.0 && hi > 0.0) || count == 0 {
            return Err(Error::Parse("log grid needs positive bounds and count".into()));
        }
        return Ok(log_grid(lo, hi, count));
    }
    split_list(value).map(|v| parse_num("sigma_sq", v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for kind in [
            ExperimentKind::Convergence,
            ExperimentKind::DpTradeoff,
            ExperimentKind::Topology,
            ExperimentKind::Calibration,
        ] {
            let spec = ExperimentSpec::default_for(kind);
            let again = ExperimentSpec::parse(&spec.to_text(), None).unwrap();
            assert_eq!(again.to_text(), spec.to_text());
        }
    }

    #[test]
    fn parses_keys_and_comments() {
        let text = "# quick run\nexperiment = topology\ntrials = 500  # small\ncorrupted = 5, 8\ntarget = 1\nsigma_sq = log:1e-2:1e2:5\nsolver = pdmm\n";
        let spec = ExperimentSpec::parse(text, None).unwrap();
        assert_eq!(spec.trials, 500);
        assert_eq!(spec.corrupted, Some(vec![4, 7]));
        assert_eq!(spec.target, 0);
        assert_eq!(spec.sigma_sq, vec![0.01, 0.1, 1.0, 10.0, 100.0]);
        assert_eq!(spec.solver, Some(SolverKind::Pdmm));
    }

    #[test]
    fn reports_line_numbers() {
        match ExperimentSpec::parse("experiment = convergence\n\ntrials = many\n", None) {
            Err(Error::Spec { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(ExperimentSpec::parse("bogus = 1", Some(ExperimentKind::Convergence)), Err(Error::Spec { line: 1, .. })));
        assert!(ExperimentSpec::parse("experiment = topology", Some(ExperimentKind::Convergence)).is_err());
        assert!(ExperimentSpec::parse("target = 0", Some(ExperimentKind::Convergence)).is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(ExperimentSpec::parse("trials = 0", Some(ExperimentKind::Convergence)).is_err());
        assert!(ExperimentSpec::parse("sigma_sq = 1,-2", Some(ExperimentKind::Convergence)).is_err());
        assert!(matches!(
            ExperimentSpec::parse("solver = linear\nmechanisms = dosp", Some(ExperimentKind::Convergence)),
            Err(Error::DospRequiresPdmm)
        ));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 13);
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1.0);
        assert_eq!(g[12], 1e3);
    }

    #[test]
    fn bundled_graphs_have_documented_structure() {
        let gs = bundled_graphs();
        assert_eq!(gs[0].1.m(), 20);
        assert_eq!(gs[1].1.m(), 19);
        assert!(gs[0].1.has_edge(3, 5) && !gs[1].1.has_edge(3, 5));
    }
}
