//! Estimator trust suite: bivariate Gaussians, independence, affine
//! invariance and the Gaussian noise floor.

use rand::Rng;

use super::spec::{ExperimentKind, ExperimentSpec};
use super::table::{ResultRow, ResultTable};
use crate::error::{Error, Result};
use crate::info::{gaussian_mi, gaussian_mi_from_correlation, knn_mi_pair, KnnConfig};
use crate::perturbation::gaussian_noise_floor;
use crate::rng::{derive_seed, std_normal, stream, Purpose};

pub const CALIBRATION_CORRELATIONS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];
pub const CALIBRATION_REPEATS: u64 = 20;
pub const NOISE_FLOOR_EPSILONS: [f64; 3] = [0.25, 0.5, 1.0];

/// `n` draws of a standard bivariate Gaussian with correlation `r`.
pub fn bivariate_gaussian<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let q = (1.0 - r * r).sqrt();
    for _ in 0..n {
        let a = std_normal(rng);
        let b = std_normal(rng);
        x.push(a);
        y.push(r * a + q * b);
    }
    (x, y)
}

/// `n` pairs `(S, S + R)` with `S ~ N(0, σ_S²)`, `R ~ N(0, σ_R²)`.
pub fn additive_pair<R: Rng + ?Sized>(n: usize, sigma_s_sq: f64, sigma_r_sq: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (sigma_s_sq.sqrt(), sigma_r_sq.sqrt());
    let mut s = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let x = a * std_normal(rng);
        s.push(x);
        v.push(x + b * std_normal(rng));
    }
    (s, v)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, sd)
}

/// `trials` is the number of samples per estimate.
pub fn run_calibration(spec: &ExperimentSpec) -> Result<ResultTable> {
    if spec.experiment != ExperimentKind::Calibration {
        return Err(Error::Spec { line: 0, message: format!("expected a calibration spec, got {}", spec.experiment) });
    }
    spec.validate()?;
    let n = spec.trials;
    let mut table = ResultTable::for_spec(&spec.to_text());
    let name = spec.experiment.as_str();
    let push = |table: &mut ResultTable, metric: String, sigma_sq: Option<f64>, value: f64, method: &str| {
        table.push(ResultRow {
            experiment: name.into(),
            mechanism: "none".into(),
            sigma_sq,
            metric,
            node: None,
            t: None,
            value,
            method: method.into(),
            seed: spec.seed,
        })
    };
    let cfg = |tag: u64, rep: u64| {
        KnnConfig::default().with_k(spec.k).with_seed(derive_seed(spec.seed ^ tag, rep, Purpose::Jitter))
    };
    for (ci, &r) in CALIBRATION_CORRELATIONS.iter().enumerate() {
        let tag = 100 + ci as u64;
        let estimates = (0..CALIBRATION_REPEATS)
            .map(|rep| {
                let (x, y) = bivariate_gaussian(n, r, &mut stream(spec.seed, rep, Purpose::Custom(tag)));
                knn_mi_pair(&x, &y, &cfg(tag, rep)).map(|e| e.raw_bits)
            })
            .collect::<Result<Vec<_>>>()?;
        let (m, sd) = mean_std(&estimates);
        let metric = format!("bivariate_r{r}");
        push(&mut table, metric.clone(), None, gaussian_mi_from_correlation(r), "analytic");
        push(&mut table, metric.clone(), None, m, "knn");
        push(&mut table, format!("{metric}_std"), None, sd, "knn");
    }
    {
        let tag = 200;
        let (x, y) = bivariate_gaussian(n, 0.6, &mut stream(spec.seed, 0, Purpose::Custom(tag)));
        let base = knn_mi_pair(&x, &y, &cfg(tag, 0))?.raw_bits;
        let xs: Vec<f64> = x.iter().map(|v| -3.0 * v + 5.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| 0.01 * v - 2.0).collect();
        let scaled = knn_mi_pair(&xs, &ys, &cfg(tag, 0))?.raw_bits;
        push(&mut table, "affine_invariance_gap".into(), None, (scaled - base).abs(), "knn");
    }
    {
        let tag = 300;
        let mut rng = stream(spec.seed, 0, Purpose::Custom(tag));
        let x: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
        push(&mut table, "independent".into(), None, 0.0, "analytic");
        push(&mut table, "independent".into(), None, knn_mi_pair(&x, &y, &cfg(tag, 0))?.raw_bits, "knn");
    }
    for (ei, &eps) in NOISE_FLOOR_EPSILONS.iter().enumerate() {
        let tag = 400 + ei as u64;
        let floor = gaussian_noise_floor(spec.sigma_s_sq, eps)?;
        let (s, v) = additive_pair(n, spec.sigma_s_sq, floor, &mut stream(spec.seed, 0, Purpose::Custom(tag)));
        let metric = format!("noise_floor_eps{eps}");
        push(&mut table, metric.clone(), Some(floor), gaussian_mi(spec.sigma_s_sq / floor)?, "analytic");
        push(&mut table, metric, Some(floor), knn_mi_pair(&s, &v, &cfg(tag, 0))?.raw_bits, "knn");
    }
    Ok(table)
}
