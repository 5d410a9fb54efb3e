//! Utility and privacy of the DP mechanism against the noise level.

use nalgebra::DVector;

use super::estimate::{estimate, push_rows, RowContext};
use super::harness::montecarlo;
use super::spec::{ExperimentKind, ExperimentSpec};
use super::table::ResultTable;
use crate::adversary::{analytic_privacy, lower_bound_statistic, observe, PrivacyParams};
use crate::error::{Error, Result};
use crate::graph::CorruptionModel;
use crate::info::KnnConfig;
use crate::perturbation::{apply_mechanism, MechanismConfig, MechanismKind, Network};
use crate::rng::{derive_seed, gaussian_vec, Purpose};

/// For each σ²: `u_i`, `ρ_i` and `ρ_{i,min}` under DP with every node but
/// the target corrupted, analytic and estimated.
pub fn run_dp_tradeoff(spec: &ExperimentSpec) -> Result<ResultTable> {
    let bad = |m: String| Err(Error::Spec { line: 0, message: m });
    if spec.experiment != ExperimentKind::DpTradeoff {
        return bad(format!("expected a tradeoff spec, got {}", spec.experiment));
    }
    if spec.mechanisms != [MechanismKind::Dp] {
        return bad("the trade-off experiment runs the DP mechanism only".into());
    }
    spec.validate()?;
    let (g, desc) = spec.load_graph()?;
    let cm = CorruptionModel::all_but(&g, spec.target)?;
    if let Some(c) = &spec.corrupted {
        if c.as_slice() != cm.corrupted() {
            return bad("the trade-off experiment corrupts every node except the target".into());
        }
    }
    let n = g.n();
    let net = Network::new(g)?;
    let mut table = ResultTable::for_spec(&spec.to_text());
    table.comments.push(format!("graph: {desc}"));
    let i = spec.target;
    for (p, &sigma_sq) in spec.sigma_sq.iter().enumerate() {
        let cfg = MechanismConfig::new(MechanismKind::Dp, sigma_sq)
            .with_solver(spec.solver_for(MechanismKind::Dp))
            .with_c(spec.c)
            .with_iterations(spec.iterations);
        let subset: &[usize] = &[0, 1];
        let samples = montecarlo(spec.trials, spec.seed, spec.parallel, |trial| {
            let s = DVector::from_vec(gaussian_vec(&mut trial.stream(Purpose::PrivateData), n, spec.sigma_s_sq));
            let run = apply_mechanism(&cfg, &net, &s, &mut trial.stream(Purpose::Noise))?;
            let view = observe(&run, net.graph(), &cm, i, Some(&subset[..subset.len().min(run.iterations() + 1)]))?;
            let mut row = vec![s[i]];
            row.extend(&view.compact);
            row.push(lower_bound_statistic(&run, &cm)?);
            row.push(s.mean());
            row.push(run.estimate(i));
            Ok(row)
        })?;
        let knn = KnnConfig::default()
            .with_k(spec.k)
            .with_seed(derive_seed(spec.seed, p as u64, Purpose::Jitter));
        let est = estimate(&samples, 1..2, &knn)?;
        let params = PrivacyParams { n, sigma_sq, sigma_s_sq: spec.sigma_s_sq, h: 1, n_h: 1 };
        let analytic = analytic_privacy(MechanismKind::Dp, &params)?;
        let ctx = RowContext { experiment: spec.experiment.as_str(), mechanism: "dp", sigma_sq, node: i, seed: spec.seed };
        push_rows(&mut table, &ctx, &analytic, &est);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_has_expected_rows() {
        let spec = ExperimentSpec {
            trials: 400,
            iterations: 100,
            sigma_sq: vec![0.01, 100.0],
            ..ExperimentSpec::default_for(ExperimentKind::DpTradeoff)
        };
        let t = run_dp_tradeoff(&spec).unwrap();
        assert_eq!(t.len(), 2 * 3 * 5);
        let lo = t.value("tradeoff", "dp", 0.01, "rho_nmi", "knn").unwrap();
        let hi = t.value("tradeoff", "dp", 100.0, "rho_nmi", "knn").unwrap();
        assert!(lo > hi);
    }

    #[test]
    fn rejects_other_mechanisms() {
        let spec = ExperimentSpec {
            mechanisms: vec![MechanismKind::Smpc],
            ..ExperimentSpec::default_for(ExperimentKind::DpTradeoff)
        };
        assert!(matches!(run_dp_tradeoff(&spec), Err(Error::Spec { .. })));
    }
}
