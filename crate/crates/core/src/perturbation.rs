//! Noise-insertion mechanisms: one-shot DP initialisation, SMPC zero-sum
//! pairwise noise, and DOSP random dual initialisation.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{is_connected, pdmm_edge_matrices, Graph, PdmmEdgeMatrices};
use crate::linear::{metropolis_weights, run_linear, WeightMatrix};
use crate::pdmm::{run_pdmm, subspace_projector, SubspaceProjector, DEFAULT_C, DEFAULT_ITERATIONS};
use crate::rng::{gaussian_vec, std_normal};
use crate::run::ConsensusRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum MechanismKind {
    #[default]
    None,
    Dp,
    Smpc,
    Dosp,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [Self::None, Self::Dp, Self::Smpc, Self::Dosp];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Dp => "dp",
            Self::Smpc => "smpc",
            Self::Dosp => "dosp",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "dp" => Ok(Self::Dp),
            "smpc" => Ok(Self::Smpc),
            "dosp" => Ok(Self::Dosp),
            other => Err(Error::Parse(format!("unknown mechanism `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverKind {
    #[default]
    Linear,
    Pdmm,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Pdmm => "pdmm",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "pdmm" => Ok(Self::Pdmm),
            other => Err(Error::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismConfig {
    pub kind: MechanismKind,
    /// Noise variance σ².
    pub sigma_sq: f64,
    pub solver: SolverKind,
    /// PDMM penalty constant.
    pub c: f64,
    pub iterations: usize,
}

impl MechanismConfig {
    pub fn new(kind: MechanismKind, sigma_sq: f64) -> Self {
        let solver = if kind == MechanismKind::Dosp { SolverKind::Pdmm } else { SolverKind::Linear };
        Self { kind, sigma_sq, solver, c: DEFAULT_C, iterations: DEFAULT_ITERATIONS }
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_sq >= 0.0) || !self.sigma_sq.is_finite() {
            return Err(Error::InvalidArgument(format!("σ² must be finite and ≥ 0, got {}", self.sigma_sq)));
        }
        if self.kind == MechanismKind::Dosp && self.solver != SolverKind::Pdmm {
            return Err(Error::DospRequiresPdmm);
        }
        if self.solver == SolverKind::Pdmm && !(self.c > 0.0) {
            return Err(Error::InvalidArgument(format!("penalty c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// SMPC pairwise randoms. For edge `l = (a, b)`, `a < b`, `forward[l]` is
/// `r_a^b` (sent by `a` to `b`) and `backward[l]` is `r_b^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmpcShares {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
}

impl SmpcShares {
    /// `r_i^j`, the random node `i` sent to neighbor `j`.
    pub fn sent(&self, g: &Graph, i: usize, j: usize) -> f64 {
        let l = g.edge_index(i, j).expect("not an edge");
        if i < j {
            self.forward[l]
        } else {
            self.backward[l]
        }
    }

    /// `r_{i|j} = r_j^i − r_i^j`.
    pub fn pairwise(&self, g: &Graph, i: usize, j: usize) -> f64 {
        self.sent(g, j, i) - self.sent(g, i, j)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseRecord {
    /// Per-node noise `r_i` added to the private data (DP, SMPC).
    pub node_noise: Option<DVector<f64>>,
    /// SMPC pairwise randoms.
    pub shares: Option<SmpcShares>,
    /// DOSP dual initialisation `λ^{(0)}`.
    pub dual_init: Option<DVector<f64>>,
    /// DOSP subspace noise `(I − Π)λ^{(0)}`.
    pub subspace_noise: Option<DVector<f64>>,
    /// Set when `m < n`, so the subspace noise may be empty.
    pub subspace_warning: bool,
}

/// Smallest Gaussian noise variance with `I(S; S + R) ≤ ε` bits:
/// `σ_S² / (2^{2ε} − 1)`.
pub fn gaussian_noise_floor(sigma_s_sq: f64, epsilon: f64) -> Result<f64> {
    if !(sigma_s_sq > 0.0) {
        return Err(Error::InvalidArgument(format!("σ_S² must be positive, got {sigma_s_sq}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    Ok(sigma_s_sq / ((2.0 * epsilon).exp2() - 1.0))
}

/// `x^{(0)} = s + r`, `r_i ~ N(0, σ²)` i.i.d.
pub fn dp_init<R: Rng + ?Sized>(s: &DVector<f64>, sigma_sq: f64, rng: &mut R) -> (DVector<f64>, NoiseRecord) {
    let r = DVector::from_vec(gaussian_vec(rng, s.len(), sigma_sq));
    let x0 = s + &r;
    (x0, NoiseRecord { node_noise: Some(r), ..NoiseRecord::default() })
}

/// One Gaussian draw per directed edge, in edge order with the `a → b`
/// direction first; `r_i = Σ_{j ∈ N_i} r_{i|j}`.
pub fn smpc_noise<R: Rng + ?Sized>(g: &Graph, sigma_sq: f64, rng: &mut R) -> NoiseRecord {
    let sd = sigma_sq.sqrt();
    let mut forward = Vec::with_capacity(g.m());
    let mut backward = Vec::with_capacity(g.m());
    for _ in g.edges() {
        forward.push(sd * std_normal(rng));
        backward.push(sd * std_normal(rng));
    }
    let shares = SmpcShares { forward, backward };
    let r = DVector::from_fn(g.n(), |i, _| g.neighbors(i).map(|j| shares.pairwise(g, i, j)).sum());
    NoiseRecord { node_noise: Some(r), shares: Some(shares), ..NoiseRecord::default() }
}

/// Random dual initialisation `λ^{(0)}_{i|j} ~ N(0, σ²)` in dual-index order.
pub fn dosp_init<R: Rng + ?Sized>(
    g: &Graph,
    sigma_sq: f64,
    rng: &mut R,
    proj: &SubspaceProjector,
) -> (DVector<f64>, NoiseRecord) {
    let lambda0 = DVector::from_vec(gaussian_vec(rng, 2 * g.m(), sigma_sq));
    let warning = g.m() < g.n();
    if warning {
        log::warn!(
            "m = {} < n = {}: the non-convergent dual subspace may be empty and offer no privacy",
            g.m(),
            g.n()
        );
    }
    let record = NoiseRecord {
        subspace_noise: Some(proj.complement(&lambda0)),
        dual_init: Some(lambda0.clone()),
        subspace_warning: warning,
        ..NoiseRecord::default()
    };
    (lambda0, record)
}

/// A graph together with the solver operators every run on it needs.
#[derive(Debug, Clone)]
pub struct Network {
    graph: Graph,
    weights: Option<WeightMatrix>,
    mats: Option<PdmmEdgeMatrices>,
    projector: Option<SubspaceProjector>,
}

impl Network {
    /// Prepares Metropolis weights and the PDMM projector. The graph must be
    /// connected.
    pub fn new(graph: Graph) -> Result<Self> {
        if !is_connected(&graph) {
            return Err(Error::Disconnected);
        }
        let weights = Some(metropolis_weights(&graph)?);
        let mats = pdmm_edge_matrices(&graph).ok();
        let projector = mats.as_ref().map(subspace_projector);
        Ok(Self { graph, weights, mats, projector })
    }

    pub fn with_weights(mut self, w: WeightMatrix) -> Result<Self> {
        if w.n() != self.graph.n() {
            return Err(Error::DimensionMismatch { context: "weights", expected: self.graph.n(), actual: w.n() });
        }
        self.weights = Some(w);
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> Option<&WeightMatrix> {
        self.weights.as_ref()
    }

    pub fn edge_matrices(&self) -> Option<&PdmmEdgeMatrices> {
        self.mats.as_ref()
    }

    pub fn projector(&self) -> Option<&SubspaceProjector> {
        self.projector.as_ref()
    }
}

/// Inserts noise according to `cfg` and runs the configured solver on `s`.
pub fn apply_mechanism<R: Rng + ?Sized>(
    cfg: &MechanismConfig,
    net: &Network,
    s: &DVector<f64>,
    rng: &mut R,
) -> Result<ConsensusRun> {
    cfg.validate()?;
    let g = net.graph();
    if s.len() != g.n() {
        return Err(Error::DimensionMismatch { context: "private data", expected: g.n(), actual: s.len() });
    }
    let (inputs, lambda0, noise) = match cfg.kind {
        MechanismKind::None => (s.clone(), None, NoiseRecord::default()),
        MechanismKind::Dp => {
            let (x0, noise) = dp_init(s, cfg.sigma_sq, rng);
            (x0, None, noise)
        }
        MechanismKind::Smpc => {
            let noise = smpc_noise(g, cfg.sigma_sq, rng);
            let x0 = s + noise.node_noise.as_ref().expect("smpc sets node noise");
            (x0, None, noise)
        }
        MechanismKind::Dosp => {
            let proj = net.projector().ok_or(Error::EmptyEdgeSet)?;
            let (lambda0, noise) = dosp_init(g, cfg.sigma_sq, rng, proj);
            (s.clone(), Some(lambda0), noise)
        }
    };
    let mut run = match cfg.solver {
        SolverKind::Linear => {
            let w = net.weights().ok_or(Error::Disconnected)?;
            run_linear(w, &inputs, cfg.iterations)?
        }
        SolverKind::Pdmm => {
            let lambda0 = lambda0.unwrap_or_else(|| DVector::zeros(2 * g.m()));
            run_pdmm(&inputs, cfg.c, &lambda0, cfg.iterations, g)?
        }
    };
    run.mechanism = cfg.kind;
    run.private_data = Some(s.clone());
    run.noise = noise;
    Ok(run)
}
