//! Error trajectories of every mechanism under several noise levels.

use nalgebra::DVector;

use super::harness::{column_means, column_std, montecarlo};
use super::spec::{ExperimentKind, ExperimentSpec};
use super::table::{ResultRow, ResultTable};
use crate::error::{Error, Result};
use crate::perturbation::{apply_mechanism, MechanismConfig, MechanismKind, Network};
use crate::rng::{gaussian_vec, Purpose};

/// Mean over trials of `‖x^{(t)} − s_ave·1‖₂` for every mechanism, σ² and
/// `t`, plus the spread of the target's final error.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ResultTable> {
    if spec.experiment != ExperimentKind::Convergence {
        return Err(Error::Spec { line: 0, message: format!("expected a convergence spec, got {}", spec.experiment) });
    }
    spec.validate()?;
    let (g, desc) = spec.load_graph()?;
    if spec.target >= g.n() {
        return Err(Error::NodeOutOfRange { node: spec.target, n: g.n() });
    }
    let net = Network::new(g)?;
    let mut table = ResultTable::for_spec(&spec.to_text());
    table.comments.push(format!("graph: {desc}"));
    let n = net.graph().n();
    let name = spec.experiment.as_str();
    for &kind in &spec.mechanisms {
        let grid: &[f64] = if kind == MechanismKind::None { &[0.0] } else { &spec.sigma_sq };
        for &sigma_sq in grid {
            let cfg = MechanismConfig::new(kind, sigma_sq)
                .with_solver(spec.solver_for(kind))
                .with_c(spec.c)
                .with_iterations(spec.iterations);
            let samples = montecarlo(spec.trials, spec.seed, spec.parallel, |trial| {
                let s = DVector::from_vec(gaussian_vec(&mut trial.stream(Purpose::PrivateData), n, spec.sigma_s_sq));
                let run = apply_mechanism(&cfg, &net, &s, &mut trial.stream(Purpose::Noise))?;
                let avg = s.mean();
                let mut row = run.error_trajectory(avg);
                row.push(run.estimate(spec.target) - avg);
                Ok(row)
            })?;
            let means = column_means(&samples);
            let row = |metric: &str, node, t, value, method: &str| ResultRow {
                experiment: name.into(),
                mechanism: kind.to_string(),
                sigma_sq: Some(sigma_sq),
                metric: metric.into(),
                node,
                t,
                value,
                method: method.into(),
                seed: spec.seed,
            };
            for (t, &v) in means[..=spec.iterations].iter().enumerate() {
                table.push(row("error", None, Some(t), v, "mean"));
            }
            let last = spec.iterations + 1;
            let spread = if spec.trials > 1 { column_std(&samples, last) } else { 0.0 };
            table.push(row("final_error_std", Some(spec.target), None, spread, "std"));
            table.push(row("final_error_mean", Some(spec.target), None, means[last], "mean"));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentSpec {
        ExperimentSpec { trials: 20, iterations: 200, ..ExperimentSpec::default_for(ExperimentKind::Convergence) }
    }

    #[test]
    fn noiseless_curves_match_baseline() {
        let spec = ExperimentSpec { sigma_sq: vec![0.0], ..quick() };
        let t = run_convergence(&spec).unwrap();
        let base: Vec<f64> = t.select(None, Some("none"), Some("error"), None).map(|r| r.value).collect();
        for m in ["dp", "smpc", "dosp"] {
            let curve: Vec<f64> = t.select(None, Some(m), Some("error"), None).map(|r| r.value).collect();
            assert_eq!(curve.len(), base.len());
            assert!(curve.iter().zip(&base).all(|(a, b)| (a - b).abs() <= 1e-10), "{m}");
        }
    }

    #[test]
    fn row_count_is_deterministic() {
        let spec = quick();
        let t = run_convergence(&spec).unwrap();
        assert_eq!(t.len(), (1 + 3 * 3) * (spec.iterations + 1 + 2));
    }

    #[test]
    fn rejects_wrong_experiment() {
        let spec = ExperimentSpec::default_for(ExperimentKind::Topology);
        assert!(run_convergence(&spec).is_err());
    }
}
