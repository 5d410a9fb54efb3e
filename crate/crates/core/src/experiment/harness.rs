//! Deterministic Monte-Carlo trials.

use rayon::prelude::*;

use crate::error::Result;
use crate::info::SampleMatrix;
use crate::rng::{stream, Purpose, Stream};

/// Identity of one trial; every random draw of the trial comes from a
/// stream derived from `(master, index, purpose)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trial {
    pub master: u64,
    pub index: u64,
}

impl Trial {
    pub fn stream(&self, purpose: Purpose) -> Stream {
        stream(self.master, self.index, purpose)
    }
}

/// Runs `per_trial` for trials `0..trials` and stacks the returned rows in
/// trial order. Parallel and sequential execution give identical matrices.
pub fn montecarlo<F>(trials: usize, master: u64, parallel: bool, per_trial: F) -> Result<SampleMatrix>
where
    F: Fn(&Trial) -> Result<Vec<f64>> + Sync,
{
    let run = |index: usize| per_trial(&Trial { master, index: index as u64 });
    let rows: Vec<Vec<f64>> = if parallel {
        (0..trials).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..trials).map(run).collect::<Result<_>>()?
    };
    SampleMatrix::from_rows(&rows)
}

/// Column means in row order.
pub fn column_means(m: &SampleMatrix) -> Vec<f64> {
    let mut acc = vec![0.0; m.cols()];
    for r in 0..m.trials() {
        for (a, v) in acc.iter_mut().zip(m.row(r)) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / m.trials() as f64).collect()
}

/// Sample standard deviation of one column.
pub fn column_std(m: &SampleMatrix, col: usize) -> f64 {
    let c = m.column(col);
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::std_normal;

    fn draw(t: &Trial) -> Result<Vec<f64>> {
        let mut rng = t.stream(Purpose::Noise);
        Ok(vec![t.index as f64, std_normal(&mut rng), std_normal(&mut rng)])
    }

    #[test]
    fn parallel_matches_sequential() {
        let a = montecarlo(200, 5, true, draw).unwrap();
        let b = montecarlo(200, 5, false, draw).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(17, 0), 17.0);
    }

    #[test]
    fn single_trial_single_row() {
        assert_eq!(montecarlo(1, 5, true, draw).unwrap().trials(), 1);
    }

    #[test]
    fn different_masters_differ() {
        let a = montecarlo(10, 1, true, draw).unwrap();
        let b = montecarlo(10, 2, true, draw).unwrap();
        assert_ne!(a.column(1), b.column(1));
    }

    #[test]
    fn moments() {
        let m = SampleMatrix::from_columns(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(column_means(&m), vec![2.0]);
        assert_eq!(column_std(&m, 0), 1.0);
    }
}
