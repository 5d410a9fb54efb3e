//! Privacy of SMPC and DOSP on two graphs that differ in one edge.

use nalgebra::DVector;

use super::estimate::{estimate, push_rows, RowContext};
use super::harness::montecarlo;
use super::spec::{bundled_graphs, ExperimentKind, ExperimentSpec, GraphSource, TOPOLOGY_CORRUPTED};
use super::table::{ResultRow, ResultTable};
use crate::adversary::{analytic_privacy, lower_bound_statistic, observe, PrivacyParams};
use crate::error::{Error, Result};
use crate::graph::{honest_component, CorruptionModel, Graph};
use crate::info::KnnConfig;
use crate::perturbation::{apply_mechanism, MechanismConfig, MechanismKind, Network, SolverKind};
use crate::rng::{derive_seed, gaussian_vec, label_hash, Purpose};

/// Experiment label for a topology graph.
pub fn topology_label(graph: &str) -> String {
    match graph {
        "G" => "topology-g".into(),
        "G'" => "topology-g-prime".into(),
        other => format!("topology-{}", other.to_ascii_lowercase()),
    }
}

/// Per graph, mechanism and σ²: `u_1`, `ρ_1`, `ρ_{1,min}`, analytic and
/// estimated from the compact sufficient statistic.
pub fn run_topology(spec: &ExperimentSpec) -> Result<ResultTable> {
    let bad = |m: String| Err(Error::Spec { line: 0, message: m });
    if spec.experiment != ExperimentKind::Topology {
        return bad(format!("expected a topology spec, got {}", spec.experiment));
    }
    if let Some(k) = spec.mechanisms.iter().find(|k| !matches!(k, MechanismKind::Smpc | MechanismKind::Dosp)) {
        return bad(format!("the topology experiment compares smpc and dosp, got {k}"));
    }
    spec.validate()?;
    let graphs: Vec<(String, Graph)> = match &spec.graph {
        GraphSource::Bundled => bundled_graphs().into_iter().map(|(n, g)| (n.to_string(), g)).collect(),
        _ => {
            if spec.corrupted.is_none() {
                return bad("a custom topology graph needs an explicit corrupted set".into());
            }
            let (g, _) = spec.load_graph()?;
            vec![("custom".to_string(), g)]
        }
    };
    let corrupted = spec.corrupted.clone().unwrap_or_else(|| TOPOLOGY_CORRUPTED.to_vec());
    let mut table = ResultTable::for_spec(&spec.to_text());
    for (name, g) in graphs {
        let cm = CorruptionModel::new(&g, corrupted.iter().copied())?;
        if cm.corrupted().is_empty() {
            return Err(Error::NoCorruptedNodes);
        }
        let component = honest_component(&g, &cm, spec.target)?;
        cm.check_observed(&g)?;
        let (h, n_h) = (component.len(), cm.honest().len());
        let label = topology_label(&name);
        table.comments.push(format!(
            "graph {name}: n={} m={} honest component of node {} has {h} of {n_h} honest nodes",
            g.n(),
            g.m(),
            spec.target + 1
        ));
        for (metric, value) in [("honest_component_size", h), ("honest_count", n_h)] {
            table.push(ResultRow {
                experiment: label.clone(),
                mechanism: "none".into(),
                sigma_sq: None,
                metric: metric.into(),
                node: Some(spec.target),
                t: None,
                value: value as f64,
                method: "analytic".into(),
                seed: spec.seed,
            });
        }
        let n = g.n();
        let net = Network::new(g)?;
        for &kind in &spec.mechanisms {
            let solver = spec.solver_for(kind);
            let subset: &[usize] = match solver {
                SolverKind::Linear => &[0],
                SolverKind::Pdmm => &[0, 1, 2],
            };
            if spec.iterations + 1 < subset.len() {
                return bad(format!("{kind} needs at least {} iterations", subset.len() - 1));
            }
            for (p, &sigma_sq) in spec.sigma_sq.iter().enumerate() {
                let cfg = MechanismConfig::new(kind, sigma_sq)
                    .with_solver(solver)
                    .with_c(spec.c)
                    .with_iterations(spec.iterations);
                let samples = montecarlo(spec.trials, spec.seed, spec.parallel, |trial| {
                    let s = DVector::from_vec(gaussian_vec(&mut trial.stream(Purpose::PrivateData), n, spec.sigma_s_sq));
                    let run = apply_mechanism(&cfg, &net, &s, &mut trial.stream(Purpose::Noise))?;
                    let view = observe(&run, net.graph(), &cm, spec.target, Some(subset))?;
                    let mut row = vec![s[spec.target]];
                    row.extend(&view.compact);
                    row.push(lower_bound_statistic(&run, &cm)?);
                    row.push(s.mean());
                    row.push(run.estimate(spec.target));
                    Ok(row)
                })?;
                let jitter = derive_seed(spec.seed ^ label_hash(&format!("{label}/{kind}")), p as u64, Purpose::Jitter);
                let knn = KnnConfig::default().with_k(spec.k).with_seed(jitter);
                let est = estimate(&samples, 1..1 + h, &knn)?;
                let params = PrivacyParams { n, sigma_sq, sigma_s_sq: spec.sigma_s_sq, h, n_h };
                let analytic = analytic_privacy(kind, &params)?;
                let mech = kind.to_string();
                let ctx = RowContext { experiment: &label, mechanism: &mech, sigma_sq, node: spec.target, seed: spec.seed };
                push_rows(&mut table, &ctx, &analytic, &est);
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_graphs_satisfy_the_model() {
        let gs = bundled_graphs();
        let (g, gp) = (&gs[0].1, &gs[1].1);
        let cm = CorruptionModel::new(g, TOPOLOGY_CORRUPTED).unwrap();
        cm.check_observed(g).unwrap();
        assert_eq!(honest_component(g, &cm, 0).unwrap(), cm.honest().to_vec());
        let cmp = CorruptionModel::new(gp, TOPOLOGY_CORRUPTED).unwrap();
        cmp.check_observed(gp).unwrap();
        let comp = honest_component(gp, &cmp, 0).unwrap();
        assert_eq!(comp, vec![0, 1, 2, 3]);
        assert!(comp.len() < cmp.honest().len());
    }

    #[test]
    fn unobserved_honest_node_is_rejected() {
        let spec = ExperimentSpec {
            corrupted: Some(vec![4]),
            trials: 50,
            ..ExperimentSpec::default_for(ExperimentKind::Topology)
        };
        assert!(matches!(run_topology(&spec), Err(Error::HonestNodeUnobserved(_))));
    }

    #[test]
    fn small_run_reports_full_utility() {
        let spec = ExperimentSpec {
            trials: 200,
            iterations: 300,
            sigma_sq: vec![10.0],
            ..ExperimentSpec::default_for(ExperimentKind::Topology)
        };
        let t = run_topology(&spec).unwrap();
        for label in ["topology-g", "topology-g-prime"] {
            for m in ["smpc", "dosp"] {
                assert_eq!(t.value(label, m, 10.0, "u_nmi", "knn"), Some(1.0), "{label} {m}");
            }
        }
    }
}
