//! PDMM solver for the averaging problem `min Σ ½(x_i − s_i)²  s.t. x_i = x_j`.
//!
//! Each edge `(i, j)` carries two duals, `λ_{i|j}` and `λ_{j|i}`, laid out as
//! described in [`Graph::dual_index`]. The updates are synchronous: every
//! node computes its new primal from the previous iterate, then each directed
//! dual is refreshed from the new primal of its owner and the old primal of
//! the neighbor.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, PdmmEdgeMatrices};
use crate::linalg;
use crate::run::ConsensusRun;

/// Default penalty constant.
pub const DEFAULT_C: f64 = 0.4;

/// Default fixed iteration count.
pub const DEFAULT_ITERATIONS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct PdmmState {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub t: usize,
    pub c: f64,
}

impl PdmmState {
    /// Zero primal, given dual.
    pub fn new(n: usize, lambda: DVector<f64>, c: f64) -> Self {
        Self { x: DVector::zeros(n), lambda, t: 0, c }
    }
}

fn check_dims(state: &PdmmState, s: &DVector<f64>, n: usize, m: usize) -> Result<()> {
    if !(state.c > 0.0) {
        return Err(Error::InvalidArgument(format!("penalty c must be positive, got {}", state.c)));
    }
    if s.len() != n {
        return Err(Error::DimensionMismatch { context: "pdmm data", expected: n, actual: s.len() });
    }
    if state.x.len() != n {
        return Err(Error::DimensionMismatch { context: "pdmm primal", expected: n, actual: state.x.len() });
    }
    if state.lambda.len() != 2 * m {
        return Err(Error::DimensionMismatch {
            context: "pdmm dual",
            expected: 2 * m,
            actual: state.lambda.len(),
        });
    }
    Ok(())
}

/// One iteration in per-node form.
pub fn pdmm_step(state: &PdmmState, s: &DVector<f64>, g: &Graph) -> Result<PdmmState> {
    check_dims(state, s, g.n(), g.m())?;
    let c = state.c;
    let lam = &state.lambda;
    let x_old = &state.x;
    let mut x = DVector::zeros(g.n());
    for i in 0..g.n() {
        let mut acc = s[i];
        for &(j, _) in g.incident(i) {
            let lam_ji = lam[g.dual_index(j, i).expect("edge exists")];
            acc += c * x_old[j] - Graph::sign(i, j) * lam_ji;
        }
        x[i] = acc / (1.0 + c * g.degree(i) as f64);
    }
    let mut lambda = DVector::zeros(lam.len());
    for &(a, b) in g.edges() {
        for (i, j) in [(a, b), (b, a)] {
            let ij = g.dual_index(i, j).expect("edge exists");
            let ji = g.dual_index(j, i).expect("edge exists");
            lambda[ij] = lam[ji] + c * (Graph::sign(i, j) * x[i] + Graph::sign(j, i) * x_old[j]);
        }
    }
    Ok(PdmmState { x, lambda, t: state.t + 1, c })
}

/// One iteration in matrix form:
/// `x ← (I + cCᵀC)⁻¹(s − cCᵀPCx − CᵀPλ)`, `λ ← Pλ + c(Cx_new + PCx_old)`.
pub fn pdmm_step_matrix(state: &PdmmState, s: &DVector<f64>, mats: &PdmmEdgeMatrices) -> Result<PdmmState> {
    check_dims(state, s, mats.n(), mats.m())?;
    let c = state.c;
    let ct = mats.c.transpose();
    let pc = mats.pc();
    let lhs = DMatrix::identity(mats.n(), mats.n()) + &ct * &mats.c * c;
    let rhs = s - &ct * &pc * &state.x * c - &ct * &mats.p * &state.lambda;
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular PDMM system".into()))?;
    let lambda = &mats.p * &state.lambda + (&mats.c * &x + &pc * &state.x) * c;
    Ok(PdmmState { x, lambda, t: state.t + 1, c })
}

/// Runs `iterations` steps from `x = 0`, `λ = lambda0`, recording both
/// trajectories.
pub fn run_pdmm(
    s: &DVector<f64>,
    c: f64,
    lambda0: &DVector<f64>,
    iterations: usize,
    g: &Graph,
) -> Result<ConsensusRun> {
    let mut state = PdmmState::new(g.n(), lambda0.clone(), c);
    check_dims(&state, s, g.n(), g.m())?;
    let mut xs = Vec::with_capacity(iterations + 1);
    let mut lams = Vec::with_capacity(iterations + 1);
    xs.push(state.x.clone());
    lams.push(state.lambda.clone());
    for _ in 0..iterations {
        state = pdmm_step(&state, s, g)?;
        xs.push(state.x.clone());
        lams.push(state.lambda.clone());
    }
    Ok(ConsensusRun::pdmm(xs, lams, c, s.clone()))
}

/// Orthogonal projector onto `H̄ = span(C) + span(PC)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProjector {
    pi: DMatrix<f64>,
    rank: usize,
}

impl SubspaceProjector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.pi
    }

    /// `dim(H̄)`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `dim(H̄⊥)`.
    pub fn complement_dim(&self) -> usize {
        self.pi.nrows() - self.rank
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.pi * v
    }

    /// `(I − Π)v`.
    pub fn complement(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project(v)
    }
}

pub fn subspace_projector(mats: &PdmmEdgeMatrices) -> SubspaceProjector {
    let basis = linalg::column_basis(&linalg::hstack(&mats.c, &mats.pc()));
    let pi = &basis * basis.transpose();
    SubspaceProjector { pi, rank: basis.ncols() }
}

/// Dual optimum for data `s`:
/// `λ* = −[Cᵀ; (PC)ᵀ]† [x* − s + cCᵀCx*; x* − s + cCᵀPCx*] + cCx*`, `x* = s_ave·1`.
pub fn dual_optimum(s: &DVector<f64>, c: f64, mats: &PdmmEdgeMatrices) -> Result<DVector<f64>> {
    let n = mats.n();
    if s.len() != n {
        return Err(Error::DimensionMismatch { context: "dual_optimum data", expected: n, actual: s.len() });
    }
    let x_star = DVector::from_element(n, s.mean());
    let ct = mats.c.transpose();
    let pc = mats.pc();
    let stacked = linalg::vstack(&ct, &pc.transpose());
    let top = &x_star - s + &ct * &mats.c * &x_star * c;
    let bottom = &x_star - s + &ct * &pc * &x_star * c;
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(&top);
    rhs.rows_mut(n, n).copy_from(&bottom);
    Ok(-(linalg::pseudo_inverse(&stacked) * rhs) + &mats.c * &x_star * c)
}

/// Splits a dual vector into its convergent part `Πλ` and the remainder.
pub fn decompose_dual(lambda: &DVector<f64>, proj: &SubspaceProjector) -> Result<(DVector<f64>, DVector<f64>)> {
    if lambda.len() != proj.pi.nrows() {
        return Err(Error::DimensionMismatch {
            context: "decompose_dual",
            expected: proj.pi.nrows(),
            actual: lambda.len(),
        });
    }
    let conv = proj.project(lambda);
    let nonconv = lambda - &conv;
    Ok((conv, nonconv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures::*, pdmm_edge_matrices};
    use approx::assert_relative_eq;

    #[test]
    fn zero_is_fixed_point() {
        let g = k2();
        let st = PdmmState::new(2, DVector::zeros(2), 1.0);
        let next = pdmm_step(&st, &DVector::zeros(2), &g).unwrap();
        assert_eq!(next.x, DVector::zeros(2));
        assert_eq!(next.lambda, DVector::zeros(2));
        assert_eq!(next.t, 1);
    }

    #[test]
    fn single_edge_first_step() {
        let g = k2();
        let s = DVector::from_vec(vec![1.0, -1.0]);
        let st = PdmmState::new(2, DVector::zeros(2), 1.0);
        let next = pdmm_step(&st, &s, &g).unwrap();
        assert_relative_eq!(next.x[0], 0.5);
        assert_relative_eq!(next.x[1], -0.5);
        assert_relative_eq!(next.lambda[0], 0.5);
        assert_relative_eq!(next.lambda[1], 0.5);
    }

    #[test]
    fn local_and_matrix_forms_agree() {
        let g = cycle3();
        let mats = pdmm_edge_matrices(&g).unwrap();
        let st = PdmmState {
            x: DVector::from_vec(vec![0.3, -1.2, 2.0]),
            lambda: DVector::from_vec(vec![0.1, -0.4, 0.9, 1.3, -0.2, 0.05]),
            t: 4,
            c: 0.7,
        };
        let s = DVector::from_vec(vec![1.0, 2.0, -0.5]);
        let a = pdmm_step(&st, &s, &g).unwrap();
        let b = pdmm_step_matrix(&st, &s, &mats).unwrap();
        assert!((&a.x - &b.x).abs().max() < 1e-12);
        assert!((&a.lambda - &b.lambda).abs().max() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = k2();
        let bad_c = PdmmState::new(2, DVector::zeros(2), 0.0);
        assert!(pdmm_step(&bad_c, &DVector::zeros(2), &g).is_err());
        let bad_dual = PdmmState::new(2, DVector::zeros(3), 1.0);
        assert!(pdmm_step(&bad_dual, &DVector::zeros(2), &g).is_err());
    }

    #[test]
    fn constant_data_converges_to_constant() {
        let g = cycle3();
        let s = DVector::from_element(3, 2.5);
        let run = run_pdmm(&s, DEFAULT_C, &DVector::zeros(6), 200, &g).unwrap();
        assert!((run.x.last().unwrap() - &s).abs().max() < 1e-10);
    }

    #[test]
    fn single_edge_projector_is_identity() {
        let mats = pdmm_edge_matrices(&k2()).unwrap();
        let proj = subspace_projector(&mats);
        assert_eq!(proj.rank(), 2);
        assert_eq!(proj.complement_dim(), 0);
        assert!((proj.matrix() - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn triangle_has_subspace_noise_room() {
        let mats = pdmm_edge_matrices(&cycle3()).unwrap();
        let proj = subspace_projector(&mats);
        assert!(proj.rank() <= 5);
        assert!(proj.complement_dim() >= 1);
        let pi = proj.matrix();
        assert!((pi - pi.transpose()).abs().max() < 1e-10);
        assert!((pi * pi - pi).abs().max() < 1e-10);
        assert!((pi * &mats.c - &mats.c).abs().max() < 1e-10);
        assert!((pi * mats.pc() - mats.pc()).abs().max() < 1e-10);
    }

    #[test]
    fn constant_data_has_zero_dual_optimum() {
        let mats = pdmm_edge_matrices(&cycle3()).unwrap();
        let lam = dual_optimum(&DVector::from_element(3, 1.7), 0.4, &mats).unwrap();
        assert!(lam.abs().max() < 1e-10);
    }

    #[test]
    fn single_edge_dual_optimum_matches_run() {
        let g = k2();
        let mats = pdmm_edge_matrices(&g).unwrap();
        let s = DVector::from_vec(vec![1.0, -1.0]);
        let lam_star = dual_optimum(&s, 1.0, &mats).unwrap();
        let run = run_pdmm(&s, 1.0, &DVector::zeros(2), 200, &g).unwrap();
        let proj = subspace_projector(&mats);
        let lam_t = proj.project(run.lambda.as_ref().unwrap().last().unwrap());
        assert!((lam_t - &lam_star).abs().max() < 1e-6);
    }

    #[test]
    fn decomposition_edge_cases() {
        let mats = pdmm_edge_matrices(&cycle3()).unwrap();
        let proj = subspace_projector(&mats);
        let in_c = mats.c.column(1).into_owned();
        let (conv, nonconv) = decompose_dual(&in_c, &proj).unwrap();
        assert!(nonconv.abs().max() < 1e-12);
        assert!((&conv + &nonconv - &in_c).abs().max() < 1e-15);
        let perp = proj.complement(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        let (conv, _) = decompose_dual(&perp, &proj).unwrap();
        assert!(conv.abs().max() < 1e-10);
        assert!(decompose_dual(&DVector::zeros(3), &proj).is_err());
    }

    #[test]
    fn first_iterate_leaks_data() {
        let g = cycle3();
        let s = DVector::from_vec(vec![0.37, -1.91, 4.2]);
        let c = DEFAULT_C;
        let run = run_pdmm(&s, c, &DVector::zeros(6), 1, &g).unwrap();
        for i in 0..3 {
            let rebuilt = run.x[1][i] * (1.0 + c * g.degree(i) as f64);
            assert!((rebuilt - s[i]).abs() <= 2.0 * f64::EPSILON * s[i].abs());
        }
    }
}
