//! The passive adversary's knowledge set: what the corrupted nodes pool,
//! its reduction to sufficient statistics, and closed-form privacy values.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::{honest_component, CorruptionModel, Graph};
use crate::info::{gaussian_mi, MIEstimate};
use crate::perturbation::{MechanismKind, SolverKind};
use crate::run::ConsensusRun;

/// Everything the corrupted nodes jointly observe in one run, typed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observation {
    pub solver: SolverKind,
    pub c: Option<f64>,
    /// Recorded iteration indices.
    pub iterations: Vec<usize>,
    /// `X^{(t)}` for each recorded `t`.
    pub states: Vec<DVector<f64>>,
    /// `s_j` for `j ∈ N_c`, in node order.
    pub corrupted_data: Vec<f64>,
    /// `Σ_j s_j`, known from the (exact) output under SMPC and DOSP.
    pub total: Option<f64>,
    /// DP: `ŷ_j`, `j ∈ N_c`.
    pub corrupted_estimates: Vec<f64>,
    /// DP: `r_j`, `j ∈ N_c`.
    pub corrupted_noise: Vec<f64>,
    /// SMPC: `(l, r_a^b, r_b^a)` for each edge `l = (a, b)` in `ℰ_c`.
    pub shares: Vec<(usize, f64, f64)>,
    /// DOSP: sorted dual indices of both directions of every edge in `ℰ_c`.
    pub dual_indices: Vec<usize>,
    /// DOSP: `λ^{(t)}` at `dual_indices`, per recorded `t`.
    pub duals: Vec<Vec<f64>>,
}

impl Observation {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for x in &self.states {
            out.extend(x.iter());
        }
        out.extend(&self.corrupted_data);
        out.extend(self.total);
        out.extend(&self.corrupted_estimates);
        out.extend(&self.corrupted_noise);
        for &(_, f, b) in &self.shares {
            out.push(f);
            out.push(b);
        }
        for d in &self.duals {
            out.extend(d);
        }
        out
    }

    fn state(&self, t: usize) -> Result<&DVector<f64>> {
        self.iterations
            .iter()
            .position(|&u| u == t)
            .map(|p| &self.states[p])
            .ok_or_else(|| Error::InvalidArgument(format!("iteration {t} was not recorded")))
    }

    fn dual(&self, t: usize, index: usize) -> Result<f64> {
        let p = self.iterations.iter().position(|&u| u == t);
        let q = self.dual_indices.binary_search(&index).ok();
        match (p, q) {
            (Some(p), Some(q)) => Ok(self.duals[p][q]),
            _ => Err(Error::InvalidArgument(format!("dual {index} at iteration {t} is not observed"))),
        }
    }

    /// `r_a^b`, the random `a` sent to `b`.
    fn share(&self, g: &Graph, a: usize, b: usize) -> Result<f64> {
        let l = g.edge_index(a, b).ok_or_else(|| Error::InvalidArgument(format!("({a}, {b}) is not an edge")))?;
        let &(_, f, bw) = self
            .shares
            .iter()
            .find(|s| s.0 == l)
            .ok_or_else(|| Error::InvalidArgument(format!("edge {l} is not observed")))?;
        Ok(if a < b { f } else { bw })
    }

    /// The perturbed input `s_j + r_j` as visible in the transcript.
    fn effective_input(&self, g: &Graph, j: usize) -> Result<f64> {
        match self.solver {
            SolverKind::Linear => Ok(self.state(0)?[j]),
            SolverKind::Pdmm => {
                let c = self.c.ok_or_else(|| Error::InvalidArgument("missing PDMM constant".into()))?;
                Ok((1.0 + c * g.degree(j) as f64) * self.state(1)?[j])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryView {
    pub target: usize,
    pub mechanism: MechanismKind,
    pub observation: Observation,
    /// Flattened observation.
    pub raw: Vec<f64>,
    /// Sufficient statistic; empty until [`reduce_view`] runs.
    pub reduced: Vec<f64>,
    /// Lowest-dimensional sufficient statistic for `s_i`.
    pub compact: Vec<f64>,
    /// `N_h'`, the honest component of the target.
    pub honest_component: Vec<usize>,
    /// First honest node without a corrupted neighbour, if any.
    pub unobserved_honest: Option<usize>,
    pub seed: Option<u64>,
}

/// Assembles the raw view of target `i`. `iterations` restricts which
/// `X^{(t)}` (and dual) snapshots are kept; `None` keeps all of them.
pub fn collect_view(
    run: &ConsensusRun,
    g: &Graph,
    cm: &CorruptionModel,
    i: usize,
    iterations: Option<&[usize]>,
) -> Result<AdversaryView> {
    let component = honest_component(g, cm, i)?;
    if cm.corrupted().is_empty() {
        return Err(Error::NoCorruptedNodes);
    }
    let s = run
        .private_data
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("run carries no private data".into()))?;
    let ts: Vec<usize> = match iterations {
        Some(ts) => ts.to_vec(),
        None => (0..=run.iterations()).collect(),
    };
    if let Some(&t) = ts.iter().find(|&&t| t > run.iterations()) {
        return Err(Error::InvalidArgument(format!("iteration {t} exceeds T = {}", run.iterations())));
    }
    let mut obs = Observation {
        solver: run.solver,
        c: run.c,
        states: ts.iter().map(|&t| run.x[t].clone()).collect(),
        iterations: ts,
        corrupted_data: cm.corrupted().iter().map(|&j| s[j]).collect(),
        ..Observation::default()
    };
    match run.mechanism {
        MechanismKind::None | MechanismKind::Dp => {
            obs.corrupted_estimates = cm.corrupted().iter().map(|&j| run.estimate(j)).collect();
            if let Some(r) = &run.noise.node_noise {
                obs.corrupted_noise = cm.corrupted().iter().map(|&j| r[j]).collect();
            }
        }
        MechanismKind::Smpc => {
            obs.total = Some(s.sum());
            let sh = run
                .noise
                .shares
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("SMPC run without shares".into()))?;
            obs.shares = cm.corrupted_edges().iter().map(|&l| (l, sh.forward[l], sh.backward[l])).collect();
        }
        MechanismKind::Dosp => {
            obs.total = Some(s.sum());
            let lams = run.lambda.as_ref().ok_or(Error::DospRequiresPdmm)?;
            let m = g.m();
            let mut idx: Vec<usize> = cm.corrupted_edges().iter().flat_map(|&l| [l, l + m]).collect();
            idx.sort_unstable();
            obs.duals = obs.iterations.iter().map(|&t| idx.iter().map(|&k| lams[t][k]).collect()).collect();
            obs.dual_indices = idx;
        }
    }
    let unobserved_honest = match run.mechanism {
        MechanismKind::Smpc | MechanismKind::Dosp => cm.check_observed(g).err().and_then(|e| match e {
            Error::HonestNodeUnobserved(j) => Some(j),
            _ => None,
        }),
        _ => None,
    };
    Ok(AdversaryView {
        target: i,
        mechanism: run.mechanism,
        raw: obs.flatten(),
        observation: obs,
        reduced: Vec::new(),
        compact: Vec::new(),
        honest_component: component,
        unobserved_honest,
        seed: run.seed,
    })
}

/// Fills `reduced` and `compact` from the observation alone.
pub fn reduce_view(mut view: AdversaryView, g: &Graph, cm: &CorruptionModel) -> Result<AdversaryView> {
    let obs = &view.observation;
    let (reduced, compact) = match view.mechanism {
        MechanismKind::None | MechanismKind::Dp => {
            let v = vec![obs.effective_input(g, view.target)?];
            (v.clone(), v)
        }
        MechanismKind::Smpc => {
            let mut v = Vec::with_capacity(view.honest_component.len());
            for &j in &view.honest_component {
                let mut acc = obs.effective_input(g, j)?;
                for k in cm.corrupted_neighbors(g, j) {
                    acc -= obs.share(g, k, j)? - obs.share(g, j, k)?;
                }
                v.push(acc);
            }
            (v.clone(), v)
        }
        MechanismKind::Dosp => dosp_statistics(obs, g, cm, &view.honest_component)?,
    };
    view.reduced = reduced;
    view.compact = compact;
    Ok(view)
}

/// `s_j − Σ_{k ∈ N_{j,h}} B_{j|k} λ^{(t)}_{k|j}` rebuilt from the x-update.
fn dosp_term(obs: &Observation, g: &Graph, cm: &CorruptionModel, c: f64, j: usize, t: usize) -> Result<f64> {
    let next = obs.state(t + 1)?;
    let cur = obs.state(t)?;
    let mut v = (1.0 + c * g.degree(j) as f64) * next[j] - c * g.neighbors(j).map(|k| cur[k]).sum::<f64>();
    for k in cm.corrupted_neighbors(g, j) {
        let idx = g.dual_index(k, j).expect("neighbor");
        v += Graph::sign(j, k) * obs.dual(t, idx)?;
    }
    Ok(v)
}

fn dosp_statistics(
    obs: &Observation,
    g: &Graph,
    cm: &CorruptionModel,
    component: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if obs.solver != SolverKind::Pdmm {
        return Err(Error::DospRequiresPdmm);
    }
    let c = obs.c.ok_or_else(|| Error::InvalidArgument("missing PDMM constant".into()))?;
    let mut reduced = Vec::new();
    for &j in cm.honest() {
        for t in 0..2 {
            reduced.push(dosp_term(obs, g, cm, c, j, t)?);
        }
    }
    reduced.extend(&obs.corrupted_data);
    let p0 = obs
        .iterations
        .iter()
        .position(|&t| t == 0)
        .ok_or_else(|| Error::InvalidArgument("iteration 0 was not recorded".into()))?;
    reduced.extend(&obs.duals[p0]);
    let x1 = obs.state(1)?;
    let mut compact = Vec::with_capacity(component.len());
    for &j in component {
        let own = dosp_term(obs, g, cm, c, j, 0)? + dosp_term(obs, g, cm, c, j, 1)?;
        compact.push(own - c * cm.honest_neighbors(g, j).map(|k| x1[k]).sum::<f64>());
    }
    Ok((reduced, compact))
}

/// `collect_view` followed by `reduce_view`.
pub fn observe(
    run: &ConsensusRun,
    g: &Graph,
    cm: &CorruptionModel,
    i: usize,
    iterations: Option<&[usize]>,
) -> Result<AdversaryView> {
    reduce_view(collect_view(run, g, cm, i, iterations)?, g, cm)
}

/// `Σ_{j ∈ N_h'} s_j` recovered from the reduced view (SMPC, DOSP).
pub fn partial_sum(view: &AdversaryView) -> Option<f64> {
    match view.mechanism {
        MechanismKind::Smpc => Some(view.compact.iter().sum()),
        MechanismKind::Dosp => Some(0.5 * view.compact.iter().sum::<f64>()),
        _ => None,
    }
}

/// The lower-bound view `n·ŷ − Σ_{j ∈ N_c} s_j`, taking `ŷ` at the first
/// corrupted node.
pub fn lower_bound_statistic(run: &ConsensusRun, cm: &CorruptionModel) -> Result<f64> {
    let &j = cm.corrupted().first().ok_or(Error::NoCorruptedNodes)?;
    let s = run
        .private_data
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("run carries no private data".into()))?;
    let known: f64 = cm.corrupted().iter().map(|&k| s[k]).sum();
    Ok(run.n() as f64 * run.estimate(j) - known)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub n: usize,
    pub sigma_sq: f64,
    pub sigma_s_sq: f64,
    /// `|N_h'|`.
    pub h: usize,
    /// `|N_h|`.
    pub n_h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPrivacy {
    pub utility_bits: f64,
    pub privacy_bits: f64,
    pub lower_bound_bits: f64,
}

fn partial_sum_mi(size: usize) -> f64 {
    if size <= 1 {
        f64::INFINITY
    } else {
        0.5 * (size as f64 / (size - 1) as f64).log2()
    }
}

fn snr_mi(signal: f64, noise: f64) -> f64 {
    if noise == 0.0 {
        f64::INFINITY
    } else {
        gaussian_mi(signal / noise).unwrap_or(f64::NAN)
    }
}

/// Closed-form `(u_i, ρ_i, ρ_{i,min})` for Gaussian private data; `+∞` marks
/// full utility or full disclosure.
pub fn analytic_privacy(kind: MechanismKind, p: &PrivacyParams) -> Result<AnalyticPrivacy> {
    if !(p.sigma_sq >= 0.0) || !(p.sigma_s_sq > 0.0) || p.n == 0 {
        return Err(Error::InvalidArgument(format!("invalid privacy parameters {p:?}")));
    }
    if p.h == 0 || p.h > p.n_h || p.n_h > p.n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ h ≤ n_h ≤ n, got h = {}, n_h = {}", p.h, p.n_h)));
    }
    let n = p.n as f64;
    Ok(match kind {
        MechanismKind::Dp => AnalyticPrivacy {
            utility_bits: snr_mi(p.sigma_s_sq / n, p.sigma_sq / n),
            privacy_bits: snr_mi(p.sigma_s_sq, p.sigma_sq),
            lower_bound_bits: snr_mi(p.sigma_s_sq, n * p.sigma_sq),
        },
        MechanismKind::Smpc | MechanismKind::Dosp => AnalyticPrivacy {
            utility_bits: f64::INFINITY,
            privacy_bits: partial_sum_mi(p.h),
            lower_bound_bits: partial_sum_mi(p.n_h),
        },
        MechanismKind::None => AnalyticPrivacy {
            utility_bits: f64::INFINITY,
            privacy_bits: f64::INFINITY,
            lower_bound_bits: partial_sum_mi(p.n_h),
        },
    })
}

/// Largest number of corrupted nodes tolerated before `s_i` is exposed.
pub fn robustness(kind: MechanismKind, g: &Graph, i: usize) -> usize {
    match kind {
        MechanismKind::Dp => g.n().saturating_sub(1),
        MechanismKind::Smpc | MechanismKind::Dosp => g.degree(i).saturating_sub(1),
        MechanismKind::None => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReport {
    pub mechanism: MechanismKind,
    pub sigma_sq: f64,
    pub utility: MIEstimate,
    pub privacy: MIEstimate,
    pub lower_bound: MIEstimate,
    pub robustness: usize,
    pub unobserved_honest: Option<usize>,
}

impl PrivacyReport {
    pub fn analytic(kind: MechanismKind, p: &PrivacyParams, g: &Graph, i: usize) -> Result<Self> {
        let a = analytic_privacy(kind, p)?;
        Ok(Self {
            mechanism: kind,
            sigma_sq: p.sigma_sq,
            utility: MIEstimate::analytic(a.utility_bits),
            privacy: MIEstimate::analytic(a.privacy_bits),
            lower_bound: MIEstimate::analytic(a.lower_bound_bits),
            robustness: robustness(kind, g, i),
            unobserved_honest: None,
        })
    }

    pub const CSV_HEADER: &'static str =
        "mechanism,sigma_sq,u_bits,u_nmi,rho_bits,rho_nmi,rho_min_bits,rho_min_nmi,k_i,method,estimator_k,trials,seed";

    pub fn csv_row(&self) -> String {
        let seed = self.privacy.seed.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{}",
            self.mechanism,
            self.sigma_sq,
            self.utility.value_bits,
            self.utility.nmi,
            self.privacy.value_bits,
            self.privacy.nmi,
            self.lower_bound.value_bits,
            self.lower_bound.nmi,
            self.robustness,
            self.privacy.method,
            self.privacy.k,
            self.privacy.trials,
            seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_geometric_graph, default_radius_sq, fixtures::*};
    use crate::perturbation::{apply_mechanism, MechanismConfig, Network};
    use crate::rng::{gaussian_vec, seeded};
    use approx::assert_relative_eq;

    fn five_node() -> (Graph, CorruptionModel) {
        let g = Graph::new(5, [(0, 1), (1, 2), (0, 3), (1, 3), (2, 4)]).unwrap();
        let cm = CorruptionModel::new(&g, [3, 4]).unwrap();
        (g, cm)
    }

    fn run(kind: MechanismKind, g: &Graph, sigma_sq: f64, seed: u64) -> ConsensusRun {
        run_for(kind, g, sigma_sq, seed, 60)
    }

    fn run_for(kind: MechanismKind, g: &Graph, sigma_sq: f64, seed: u64, iterations: usize) -> ConsensusRun {
        let net = Network::new(g.clone()).unwrap();
        let s = DVector::from_vec(gaussian_vec(&mut seeded(seed), g.n(), 1.0));
        let cfg = MechanismConfig::new(kind, sigma_sq).with_iterations(iterations);
        apply_mechanism(&cfg, &net, &s, &mut seeded(seed + 1000)).unwrap()
    }

    #[test]
    fn dp_analytic_values() {
        let p = PrivacyParams { n: 10, sigma_sq: 1.0, sigma_s_sq: 1.0, h: 1, n_h: 1 };
        let a = analytic_privacy(MechanismKind::Dp, &p).unwrap();
        assert_relative_eq!(a.privacy_bits, 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.lower_bound_bits, 0.5 * 1.1_f64.log2(), epsilon = 1e-15);
        assert_relative_eq!(a.lower_bound_bits, 0.068_751_761, epsilon = 1e-8);
        assert_relative_eq!(a.utility_bits, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn smpc_analytic_values() {
        let p = PrivacyParams { n: 10, sigma_sq: 1.0, sigma_s_sq: 1.0, h: 5, n_h: 5 };
        let a = analytic_privacy(MechanismKind::Smpc, &p).unwrap();
        assert_relative_eq!(a.privacy_bits, 0.160_964_047, epsilon = 1e-8);
        assert_eq!(a.privacy_bits, a.lower_bound_bits);
        assert!(a.utility_bits.is_infinite());
        let one = PrivacyParams { h: 1, ..p };
        assert!(analytic_privacy(MechanismKind::Smpc, &one).unwrap().privacy_bits.is_infinite());
        let zero = PrivacyParams { h: 0, ..p };
        assert!(analytic_privacy(MechanismKind::Smpc, &zero).is_err());
    }

    #[test]
    fn robustness_rows() {
        let (g, _) = connected_geometric_graph(10, default_radius_sq(10), 1).unwrap();
        assert_eq!(robustness(MechanismKind::Dp, &g, 0), 9);
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(robustness(MechanismKind::Smpc, &star, 0), 3);
        let k5 = Graph::new(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j)))).unwrap();
        assert_eq!(robustness(MechanismKind::Dosp, &k5, 2), 3);
    }

    #[test]
    fn dp_view_with_all_but_target() {
        let (g, _) = connected_geometric_graph(10, default_radius_sq(10), 2).unwrap();
        let cm = CorruptionModel::all_but(&g, 0).unwrap();
        let r = run(MechanismKind::Dp, &g, 1.0, 3);
        let v = observe(&r, &g, &cm, 0, None).unwrap();
        assert_eq!(v.observation.corrupted_data.len(), 9);
        assert_eq!(v.observation.corrupted_noise.len(), 9);
        assert_eq!(v.observation.states.len(), 61);
        assert_eq!(v.reduced, vec![r.x[0][0]]);
    }

    #[test]
    fn dp_without_noise_leaks_exactly() {
        let (g, _) = connected_geometric_graph(10, default_radius_sq(10), 2).unwrap();
        let cm = CorruptionModel::all_but(&g, 0).unwrap();
        let r = run(MechanismKind::Dp, &g, 0.0, 4);
        let v = observe(&r, &g, &cm, 0, None).unwrap();
        assert_eq!(v.reduced[0], r.private_data.as_ref().unwrap()[0]);
    }

    #[test]
    fn corrupted_target_rejected() {
        let (g, cm) = five_node();
        let r = run(MechanismKind::Smpc, &g, 1.0, 1);
        assert!(matches!(collect_view(&r, &g, &cm, 3, None), Err(Error::CorruptedTarget(3))));
    }

    #[test]
    fn no_corrupted_nodes_rejected() {
        let (g, _) = five_node();
        let cm = CorruptionModel::new(&g, []).unwrap();
        let r = run(MechanismKind::Smpc, &g, 1.0, 1);
        assert!(matches!(collect_view(&r, &g, &cm, 0, None), Err(Error::NoCorruptedNodes)));
    }

    #[test]
    fn smpc_partial_sum_identity() {
        let (g, cm) = five_node();
        for seed in 0..20 {
            let r = run(MechanismKind::Smpc, &g, 10.0, seed);
            let v = observe(&r, &g, &cm, 0, Some(&[0])).unwrap();
            let s = r.private_data.as_ref().unwrap();
            let truth: f64 = v.honest_component.iter().map(|&j| s[j]).sum();
            assert!((partial_sum(&v).unwrap() - truth).abs() < 1e-10);
        }
    }

    #[test]
    fn smpc_isolated_target_fully_leaks() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let cm = CorruptionModel::new(&g, [1]).unwrap();
        let r = run(MechanismKind::Smpc, &g, 5.0, 7);
        let v = observe(&r, &g, &cm, 0, None).unwrap();
        assert_eq!(v.honest_component, vec![0]);
        assert!((v.reduced[0] - r.private_data.as_ref().unwrap()[0]).abs() < 1e-12);
    }

    #[test]
    fn dosp_view_contains_both_directions() {
        let g = path3();
        let cm = CorruptionModel::new(&g, [1]).unwrap();
        let r = run(MechanismKind::Dosp, &g, 1.0, 2);
        let v = collect_view(&r, &g, &cm, 0, Some(&[0, 1, 2])).unwrap();
        assert_eq!(v.observation.dual_indices, vec![0, 1, 2, 3]);
        assert_eq!(v.observation.duals.len(), 3);
        let lam = &r.lambda.as_ref().unwrap()[1];
        assert_eq!(v.observation.duals[1][g.dual_index(0, 1).unwrap()], lam[g.dual_index(0, 1).unwrap()]);
    }

    #[test]
    fn dosp_partial_sum_identity() {
        let (g, cm) = five_node();
        for seed in 0..20 {
            let r = run(MechanismKind::Dosp, &g, 10.0, seed);
            let v = observe(&r, &g, &cm, 0, Some(&[0, 1, 2])).unwrap();
            let s = r.private_data.as_ref().unwrap();
            let truth: f64 = v.honest_component.iter().map(|&j| s[j]).sum();
            assert!((partial_sum(&v).unwrap() - truth).abs() < 1e-10, "seed {seed}");
            assert_eq!(v.reduced.len(), 2 * 3 + 2 + 2 * cm.corrupted_edges().len());
        }
    }

    #[test]
    fn dosp_reduced_terms_match_definition() {
        let (g, cm) = five_node();
        let r = run(MechanismKind::Dosp, &g, 3.0, 5);
        let v = observe(&r, &g, &cm, 0, Some(&[0, 1, 2])).unwrap();
        let s = r.private_data.as_ref().unwrap();
        let lam = r.lambda.as_ref().unwrap();
        for (p, &j) in cm.honest().iter().enumerate() {
            for t in 0..2 {
                let want = s[j]
                    - cm.honest_neighbors(&g, j)
                        .map(|k| Graph::sign(j, k) * lam[t][g.dual_index(k, j).unwrap()])
                        .sum::<f64>();
                assert!((v.reduced[2 * p + t] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn assumption_violation_is_flagged() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let cm = CorruptionModel::new(&g, [3]).unwrap();
        let r = run(MechanismKind::Smpc, &g, 1.0, 1);
        let v = collect_view(&r, &g, &cm, 0, Some(&[0])).unwrap();
        assert_eq!(v.unobserved_honest, Some(0));
    }

    #[test]
    fn lower_bound_statistic_is_honest_sum() {
        let (g, cm) = five_node();
        let r = run_for(MechanismKind::Smpc, &g, 100.0, 9, 1000);
        let s = r.private_data.as_ref().unwrap();
        let truth: f64 = cm.honest().iter().map(|&j| s[j]).sum();
        assert!((lower_bound_statistic(&r, &cm).unwrap() - truth).abs() < 1e-8);
    }

    #[test]
    fn report_row_has_all_columns() {
        let (g, _) = five_node();
        let p = PrivacyParams { n: 5, sigma_sq: 1.0, sigma_s_sq: 1.0, h: 3, n_h: 3 };
        let rep = PrivacyReport::analytic(MechanismKind::Smpc, &p, &g, 0).unwrap();
        assert_eq!(rep.csv_row().split(',').count(), PrivacyReport::CSV_HEADER.split(',').count());
        assert_eq!(rep.utility.nmi, 1.0);
    }
}
