//! Synchronous linear-iteration consensus `x ← W x`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{is_connected, Graph};
use crate::linalg;
use crate::run::ConsensusRun;

/// Absolute tolerance for the stochasticity conditions (i) and (ii).
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// Square weight matrix whose off-diagonal support lies on graph edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    /// Wraps `w` after checking it is square and respects the sparsity of `g`.
    pub fn for_graph(g: &Graph, w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::InvalidArgument(format!(
                "weight matrix must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.nrows() != g.n() {
            return Err(Error::DimensionMismatch {
                context: "weight matrix",
                expected: g.n(),
                actual: w.nrows(),
            });
        }
        for i in 0..g.n() {
            for j in 0..g.n() {
                if i != j && w[(i, j)] != 0.0 && !g.has_edge(i, j) {
                    return Err(Error::InvalidArgument(format!(
                        "W[{},{}] is nonzero but ({}, {}) is not an edge",
                        i + 1,
                        j + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self(w))
    }

    /// Wraps a square matrix without a sparsity check.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::InvalidArgument(format!(
                "weight matrix must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        Ok(Self(w))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

/// Metropolis–Hastings weights: `W_ij = 1 / (1 + max(d_i, d_j))` on edges,
/// diagonal fills each row to one.
pub fn metropolis_weights(g: &Graph) -> Result<WeightMatrix> {
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        let v = 1.0 / (1.0 + g.degree(i).max(g.degree(j)) as f64);
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    for i in 0..n {
        let off: f64 = g.neighbors(i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    Ok(WeightMatrix(w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusReport {
    /// `1ᵀW = 1ᵀ`
    pub cond_i: bool,
    /// `W1 = 1`
    pub cond_ii: bool,
    /// `α(W − 11ᵀ/n) < 1`
    pub cond_iii: bool,
    pub rho: f64,
}

impl ConsensusReport {
    pub fn all(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii
    }
}

pub fn check_consensus_conditions(w: &WeightMatrix) -> ConsensusReport {
    let m = w.matrix();
    let n = m.nrows();
    let col_ok = (0..n).all(|j| (m.column(j).sum() - 1.0).abs() <= STOCHASTIC_TOL);
    let row_ok = (0..n).all(|i| (m.row(i).sum() - 1.0).abs() <= STOCHASTIC_TOL);
    let centered = m - DMatrix::from_element(n, n, 1.0 / n as f64);
    let rho = linalg::spectral_radius(&centered);
    ConsensusReport { cond_i: col_ok, cond_ii: row_ok, cond_iii: rho < 1.0, rho }
}

/// Runs `iterations` synchronous steps from `x0`.
pub fn run_linear(w: &WeightMatrix, x0: &DVector<f64>, iterations: usize) -> Result<ConsensusRun> {
    if x0.len() != w.n() {
        return Err(Error::DimensionMismatch {
            context: "run_linear initial state",
            expected: w.n(),
            actual: x0.len(),
        });
    }
    let mut traj = Vec::with_capacity(iterations + 1);
    traj.push(x0.clone());
    for t in 0..iterations {
        let next = w.matrix() * &traj[t];
        traj.push(next);
    }
    Ok(ConsensusRun::linear(traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use approx::assert_relative_eq;

    fn averaging(n: usize) -> WeightMatrix {
        WeightMatrix::from_matrix(DMatrix::from_element(n, n, 1.0 / n as f64)).unwrap()
    }

    #[test]
    fn metropolis_k2() {
        let w = metropolis_weights(&k2()).unwrap();
        assert_eq!(w.matrix(), &DMatrix::from_element(2, 2, 0.5));
    }

    #[test]
    fn metropolis_path() {
        let w = metropolis_weights(&path3()).unwrap();
        let third = 1.0 / 3.0;
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[2.0 * third, third, 0.0, third, third, third, 0.0, third, 2.0 * third],
        );
        assert!((w.matrix() - expected).abs().max() < 1e-15);
    }

    #[test]
    fn metropolis_rejects_disconnected() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(metropolis_weights(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn averaging_matrix_conditions() {
        let r = check_consensus_conditions(&averaging(4));
        assert!(r.all());
        assert!(r.rho.abs() < 1e-12);
    }

    #[test]
    fn identity_fails_mixing() {
        let r = check_consensus_conditions(&WeightMatrix::from_matrix(DMatrix::identity(3, 3)).unwrap());
        assert!(r.cond_i && r.cond_ii && !r.cond_iii);
        assert_relative_eq!(r.rho, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn metropolis_path_rho_from_eigenvalues() {
        // Eigenvalues of the path Metropolis matrix are {1, 2/3, 0}: the
        // vector (1, 0, −1) is an eigenvector for 2/3 and the trace is 5/3.
        let w = metropolis_weights(&path3()).unwrap();
        let v = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        assert!((w.matrix() * &v - &v * (2.0 / 3.0)).norm() < 1e-15);
        let r = check_consensus_conditions(&w);
        assert!(r.all());
        assert_relative_eq!(r.rho, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn one_step_averaging() {
        let x0 = DVector::from_vec(vec![3.0, -1.0, 4.0, 2.0]);
        let run = run_linear(&averaging(4), &x0, 1).unwrap();
        for v in run.x[1].iter() {
            assert_relative_eq!(*v, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_state_is_fixed() {
        let w = metropolis_weights(&path3()).unwrap();
        let x0 = DVector::from_element(3, 1.5);
        let run = run_linear(&w, &x0, 20).unwrap();
        assert!(run.x.iter().all(|x| (x - &x0).abs().max() < 1e-14));
    }

    #[test]
    fn path_contraction_bound() {
        let w = metropolis_weights(&path3()).unwrap();
        let rho = check_consensus_conditions(&w).rho;
        let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let avg = DVector::from_element(3, 1.0 / 3.0);
        let run = run_linear(&w, &x0, 50).unwrap();
        let bound = rho.powi(50) * (&x0 - &avg).norm();
        assert!((&run.x[50] - &avg).norm() <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn dimension_mismatch() {
        let w = metropolis_weights(&path3()).unwrap();
        assert!(run_linear(&w, &DVector::zeros(2), 3).is_err());
    }

    #[test]
    fn sparsity_is_enforced() {
        let g = path3();
        let mut m = DMatrix::identity(3, 3);
        m[(0, 2)] = 0.1;
        assert!(WeightMatrix::for_graph(&g, m).is_err());
        assert!(WeightMatrix::from_matrix(DMatrix::zeros(2, 3)).is_err());
    }
}
