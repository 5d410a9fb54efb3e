//! Transcript of one consensus execution.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::graph::Graph;
use crate::perturbation::{MechanismKind, NoiseRecord, SolverKind};

/// Everything one run produced: the primal (and, for PDMM, dual)
/// trajectory, the data the solver consumed and the inserted noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRun {
    pub solver: SolverKind,
    pub mechanism: MechanismKind,
    /// `x^{(0)} … x^{(T)}`.
    pub x: Vec<DVector<f64>>,
    /// `λ^{(0)} … λ^{(T)}`, PDMM only.
    pub lambda: Option<Vec<DVector<f64>>>,
    /// PDMM penalty constant.
    pub c: Option<f64>,
    /// Data vector the PDMM x-update consumed (`s`, or `s + r` under DP/SMPC).
    pub solver_data: Option<DVector<f64>>,
    /// The nodes' private data, when known to the caller.
    pub private_data: Option<DVector<f64>>,
    pub noise: NoiseRecord,
    pub seed: Option<u64>,
}

impl ConsensusRun {
    pub(crate) fn linear(x: Vec<DVector<f64>>) -> Self {
        Self {
            solver: SolverKind::Linear,
            mechanism: MechanismKind::None,
            x,
            lambda: None,
            c: None,
            solver_data: None,
            private_data: None,
            noise: NoiseRecord::default(),
            seed: None,
        }
    }

    pub(crate) fn pdmm(x: Vec<DVector<f64>>, lambda: Vec<DVector<f64>>, c: f64, data: DVector<f64>) -> Self {
        Self {
            solver: SolverKind::Pdmm,
            mechanism: MechanismKind::None,
            x,
            lambda: Some(lambda),
            c: Some(c),
            solver_data: Some(data),
            private_data: None,
            noise: NoiseRecord::default(),
            seed: None,
        }
    }

    /// `T`.
    pub fn iterations(&self) -> usize {
        self.x.len() - 1
    }

    pub fn n(&self) -> usize {
        self.x[0].len()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.x.last().expect("trajectory is never empty")
    }

    /// `ŷ_i = x_i^{(T)}`.
    pub fn estimate(&self, i: usize) -> f64 {
        self.final_state()[i]
    }

    /// The perturbed inputs `s + r` each node fed into the averaging
    /// algorithm, recovered from the transcript: `x^{(0)}` for linear
    /// iterations, `(1 + c d_i) x_i^{(1)}` for zero-initialised PDMM.
    pub fn effective_inputs(&self, g: &Graph) -> Option<DVector<f64>> {
        match self.solver {
            SolverKind::Linear => Some(self.x[0].clone()),
            SolverKind::Pdmm => {
                let c = self.c?;
                let lambda0 = &self.lambda.as_ref()?[0];
                if lambda0.iter().any(|&v| v != 0.0) || self.x.len() < 2 {
                    return None;
                }
                Some(DVector::from_fn(g.n(), |i, _| {
                    (1.0 + c * g.degree(i) as f64) * self.x[1][i]
                }))
            }
        }
    }

    /// `‖x^{(t)} − target·1‖₂` for every recorded `t`.
    pub fn error_trajectory(&self, target: f64) -> Vec<f64> {
        self.x
            .iter()
            .map(|x| x.iter().map(|v| (v - target).powi(2)).sum::<f64>().sqrt())
            .collect()
    }

    /// `‖x^{(t)} − target·1‖∞` for every recorded `t`.
    pub fn max_error_trajectory(&self, target: f64) -> Vec<f64> {
        self.x
            .iter()
            .map(|x| x.iter().fold(0.0_f64, |m, v| m.max((v - target).abs())))
            .collect()
    }

    /// CSV export: `t, x_0..x_{n−1}`, then `lambda_*` columns for PDMM and
    /// the noise record (`r_*` per node, `share_i_j` per directed edge for
    /// SMPC) repeated on every row.
    pub fn to_csv(&self, g: &Graph) -> String {
        let n = self.n();
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((0..n).map(|i| format!("x_{i}")));
        if let Some(l) = &self.lambda {
            header.extend((0..l[0].len()).map(|k| format!("lambda_{k}")));
        }
        let node_noise = self.noise.node_noise.as_ref();
        if node_noise.is_some() {
            header.extend((0..n).map(|i| format!("r_{i}")));
        }
        let shares = self.noise.shares.as_ref();
        if shares.is_some() {
            for &(a, b) in g.edges() {
                header.push(format!("share_{a}_{b}"));
                header.push(format!("share_{b}_{a}"));
            }
        }
        let mut out = String::new();
        if let Some(seed) = self.seed {
            writeln!(out, "# seed={seed} solver={} mechanism={}", self.solver, self.mechanism).unwrap();
        }
        writeln!(out, "{}", header.join(",")).unwrap();
        for (t, x) in self.x.iter().enumerate() {
            let mut row: Vec<String> = vec![t.to_string()];
            row.extend(x.iter().map(|v| format!("{v:e}")));
            if let Some(l) = &self.lambda {
                row.extend(l[t].iter().map(|v| format!("{v:e}")));
            }
            if let Some(r) = node_noise {
                row.extend(r.iter().map(|v| format!("{v:e}")));
            }
            if let Some(sh) = shares {
                for (l, _) in g.edges().iter().enumerate() {
                    row.push(format!("{:e}", sh.forward[l]));
                    row.push(format!("{:e}", sh.backward[l]));
                }
            }
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}
