//! Mutual information: closed-form Gaussian values, the Kraskov kNN
//! estimator, normalisation to `[0, 1]` and the utility metric.

mod kdtree;

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::seeded;
use kdtree::{chebyshev, KdTree};

/// Default neighbour count.
pub const DEFAULT_K: usize = 3;
/// Default tie-breaking jitter amplitude.
pub const DEFAULT_JITTER: f64 = 1e-10;
/// `max |y − ŷ|` at or below which utility is reported as full.
pub const FULL_UTILITY_TOL: f64 = 1e-6;
/// Joint dimensions above this use brute-force neighbour search.
pub const KDTREE_MAX_DIM: usize = 8;
/// Eigenvalues below this fraction of the largest are dropped when whitening.
pub const WHITEN_RTOL: f64 = 1e-10;

/// `½ log₂(1 + snr)`.
pub fn gaussian_mi(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::InvalidArgument(format!("snr must be ≥ 0, got {snr}")));
    }
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

/// MI of a bivariate Gaussian with correlation `r`: `−½ log₂(1 − r²)`.
pub fn gaussian_mi_from_correlation(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        f64::INFINITY
    } else {
        0.5 * (1.0 - r * r).log2().abs()
    }
}

/// `1 − 2^{−2I}`; `+∞ ↦ 1`, negative values clamp to 0.
pub fn normalize(value_bits: f64) -> f64 {
    if value_bits == f64::INFINITY {
        1.0
    } else {
        1.0 - (-2.0 * value_bits.max(0.0)).exp2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    Knn,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::Knn => "knn",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MIEstimate {
    /// Clamped at 0; `+∞` marks full disclosure.
    pub value_bits: f64,
    /// Unclamped estimator output.
    pub raw_bits: f64,
    pub nmi: f64,
    pub method: Method,
    /// Neighbour count, 0 for analytic values.
    pub k: usize,
    pub trials: usize,
    pub seed: Option<u64>,
    pub std_error: Option<f64>,
}

impl MIEstimate {
    pub fn analytic(bits: f64) -> Self {
        Self {
            value_bits: bits.max(0.0),
            raw_bits: bits,
            nmi: normalize(bits),
            method: Method::Analytic,
            k: 0,
            trials: 0,
            seed: None,
            std_error: None,
        }
    }

    fn knn(bits: f64, k: usize, trials: usize, seed: u64) -> Self {
        Self {
            value_bits: bits.max(0.0),
            raw_bits: bits,
            nmi: normalize(bits),
            method: Method::Knn,
            k,
            trials,
            seed: Some(seed),
            std_error: None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value_bits == f64::INFINITY
    }

    /// Standard error expressed on the NMI scale (delta method).
    pub fn nmi_std_error(&self) -> Option<f64> {
        let se = self.std_error?;
        if self.is_infinite() {
            return Some(0.0);
        }
        Some(2.0 * std::f64::consts::LN_2 * (-2.0 * self.value_bits).exp2() * se)
    }
}

/// Trials × variables, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { context: "sample matrix", expected: rows * cols, actual: data.len() });
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample at trial {}, column {}",
                p / cols.max(1),
                p % cols.max(1)
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { context: "sample row", expected: cols, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch { context: "sample column", expected: rows, actual: c.len() });
        }
        let cols = columns.len();
        let data = (0..rows * cols).map(|p| columns[p % cols][p / cols]).collect();
        Self::new(rows, cols, data)
    }

    pub fn trials(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Contiguous block of trials `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self { data: self.data[start * self.cols..end * self.cols].to_vec(), rows: end - start, cols: self.cols }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preprocess {
    None,
    /// Zero mean, unit variance per column; constant columns dropped.
    Standardize,
    /// Standardize every column, then map multi-column blocks through the
    /// symmetric inverse square root of their correlation matrix, dropping
    /// numerically null directions.
    #[default]
    Whiten,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub jitter: f64,
    pub seed: u64,
    pub preprocess: Preprocess,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K, jitter: DEFAULT_JITTER, seed: 0, preprocess: Preprocess::Whiten }
    }
}

impl KnnConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

/// Kraskov (algorithm 1) estimate of `I(target; view)` in bits.
pub fn knn_mi(samples: &SampleMatrix, target_cols: &[usize], view_cols: &[usize], cfg: &KnnConfig) -> Result<MIEstimate> {
    let n = samples.trials();
    if cfg.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if n <= 10 * cfg.k {
        return Err(Error::InsufficientSamples { trials: n, k: cfg.k });
    }
    if target_cols.is_empty() || view_cols.is_empty() {
        return Err(Error::InvalidArgument("target and view need at least one column each".into()));
    }
    if let Some(&c) = target_cols.iter().chain(view_cols).find(|&&c| c >= samples.cols()) {
        return Err(Error::InvalidArgument(format!("column {c} out of range ({} columns)", samples.cols())));
    }
    let (mut x, dx) = preprocess(samples, target_cols, cfg.preprocess);
    let (mut y, dy) = preprocess(samples, view_cols, cfg.preprocess);
    if dx == 0 || dy == 0 {
        return Ok(MIEstimate::knn(0.0, cfg.k, n, cfg.seed));
    }
    let mut rng = seeded(cfg.seed);
    for v in x.iter_mut().chain(y.iter_mut()) {
        *v += cfg.jitter * rng.random_range(-1.0..1.0);
    }
    let nats = ksg(&x, dx, &y, dy, cfg.k);
    Ok(MIEstimate::knn(nats / std::f64::consts::LN_2, cfg.k, n, cfg.seed))
}

/// `knn_mi` plus a standard error from `batches` contiguous sub-samples.
pub fn knn_mi_with_error(
    samples: &SampleMatrix,
    target_cols: &[usize],
    view_cols: &[usize],
    cfg: &KnnConfig,
    batches: usize,
) -> Result<MIEstimate> {
    let mut est = knn_mi(samples, target_cols, view_cols, cfg)?;
    if batches < 2 {
        return Ok(est);
    }
    let size = samples.trials() / batches;
    let vals = (0..batches)
        .map(|b| knn_mi(&samples.slice_rows(b * size, (b + 1) * size), target_cols, view_cols, cfg).map(|e| e.raw_bits))
        .collect::<Result<Vec<_>>>()?;
    let mean = vals.iter().sum::<f64>() / batches as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    est.std_error = Some((var / batches as f64).sqrt());
    Ok(est)
}

/// Convenience wrapper for two scalar sample vectors.
pub fn knn_mi_pair(x: &[f64], y: &[f64], cfg: &KnnConfig) -> Result<MIEstimate> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { context: "paired samples", expected: x.len(), actual: y.len() });
    }
    let m = SampleMatrix::from_columns(&[x.to_vec(), y.to_vec()])?;
    knn_mi(&m, &[0], &[1], cfg)
}

/// `u = I(Y; Ŷ)`; returns the full-utility sentinel when `ŷ = y` up to
/// [`FULL_UTILITY_TOL`].
pub fn utility(y: &[f64], yhat: &[f64], cfg: &KnnConfig) -> Result<MIEstimate> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch { context: "utility samples", expected: y.len(), actual: yhat.len() });
    }
    let gap = y.iter().zip(yhat).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if gap <= FULL_UTILITY_TOL {
        let mut est = MIEstimate::knn(f64::INFINITY, cfg.k, y.len(), cfg.seed);
        est.std_error = Some(0.0);
        return Ok(est);
    }
    knn_mi_pair(y, yhat, cfg)
}

fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut psi = vec![0.0; n + 2];
    psi[1] = -EULER_GAMMA;
    for m in 2..psi.len() {
        psi[m] = psi[m - 1] + 1.0 / (m - 1) as f64;
    }
    psi
}

enum Search<'a> {
    Tree(KdTree<'a>),
    Brute { pts: &'a [f64], dim: usize },
}

impl<'a> Search<'a> {
    fn new(pts: &'a [f64], dim: usize) -> Self {
        if dim <= KDTREE_MAX_DIM {
            Search::Tree(KdTree::new(pts, dim))
        } else {
            Search::Brute { pts, dim }
        }
    }

    fn kth_distance(&self, i: usize, k: usize) -> f64 {
        match self {
            Search::Tree(t) => t.kth_distance(i, k),
            Search::Brute { pts, dim } => {
                let q = &pts[i * dim..(i + 1) * dim];
                let mut best = vec![f64::INFINITY; k];
                for (j, p) in pts.chunks_exact(*dim).enumerate() {
                    if j == i {
                        continue;
                    }
                    let d = chebyshev(q, p);
                    if d < best[k - 1] {
                        let mut pos = k - 1;
                        while pos > 0 && best[pos - 1] > d {
                            best[pos] = best[pos - 1];
                            pos -= 1;
                        }
                        best[pos] = d;
                    }
                }
                best[k - 1]
            }
        }
    }

    fn count_within(&self, i: usize, r: f64) -> usize {
        match self {
            Search::Tree(t) => t.count_within(i, r),
            Search::Brute { pts, dim } => {
                let q = &pts[i * dim..(i + 1) * dim];
                pts.chunks_exact(*dim).enumerate().filter(|&(j, p)| j != i && chebyshev(q, p) < r).count()
            }
        }
    }
}

/// KSG estimator in nats over row-major blocks.
fn ksg(x: &[f64], dx: usize, y: &[f64], dy: usize, k: usize) -> f64 {
    let n = x.len() / dx;
    let dz = dx + dy;
    let mut joint = Vec::with_capacity(n * dz);
    for i in 0..n {
        joint.extend_from_slice(&x[i * dx..(i + 1) * dx]);
        joint.extend_from_slice(&y[i * dy..(i + 1) * dy]);
    }
    let zs = Search::new(&joint, dz);
    let eps: Vec<f64> = (0..n).into_par_iter().map(|i| zs.kth_distance(i, k)).collect();
    let xs = Search::new(x, dx);
    let ys = Search::new(y, dy);
    let counts: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| (xs.count_within(i, eps[i]), ys.count_within(i, eps[i])))
        .collect();
    let psi = digamma_table(n + 1);
    let mean = counts.iter().map(|&(a, b)| psi[a + 1] + psi[b + 1]).sum::<f64>() / n as f64;
    psi[k] + psi[n] - mean
}

/// Applies `mode` to the selected columns and returns a row-major block.
fn preprocess(samples: &SampleMatrix, cols: &[usize], mode: Preprocess) -> (Vec<f64>, usize) {
    let n = samples.trials();
    let columns: Vec<Vec<f64>> = cols.iter().map(|&c| samples.column(c)).collect();
    let out_cols: Vec<Vec<f64>> = match mode {
        Preprocess::None => columns,
        Preprocess::Standardize => columns.iter().filter_map(|c| standardize(c)).collect(),
        Preprocess::Whiten if columns.len() == 1 => columns.iter().filter_map(|c| standardize(c)).collect(),
        Preprocess::Whiten => whiten(&columns, n),
    };
    let d = out_cols.len();
    let mut block = Vec::with_capacity(n * d);
    for r in 0..n {
        block.extend(out_cols.iter().map(|c| c[r]));
    }
    (block, d)
}

fn standardize(col: &[f64]) -> Option<Vec<f64>> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 1e-300) || sd <= 1e-12 * mean.abs() {
        return None;
    }
    Some(col.iter().map(|v| (v - mean) / sd).collect())
}

fn whiten(columns: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let scaled: Vec<Vec<f64>> = columns.iter().filter_map(|c| standardize(c)).collect();
    let d = scaled.len();
    if d <= 1 {
        return scaled;
    }
    let x = DMatrix::from_fn(n, d, |r, c| scaled[c][r]);
    let corr = (x.transpose() * &x) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(corr);
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let mut root = DMatrix::zeros(d, d);
    for j in (0..d).filter(|&j| eig.eigenvalues[j] > WHITEN_RTOL * top) {
        let v = eig.eigenvectors.column(j);
        root += v * v.transpose() / eig.eigenvalues[j].sqrt();
    }
    let z = x * root;
    (0..d).map(|c| z.column(c).iter().copied().collect()).collect()
}
