//! Long-format result tables, their CSV form and gnuplot data files.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CSV_HEADER: &str = "experiment,mechanism,sigma_sq,metric,node,t,value,method,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub mechanism: String,
    pub sigma_sq: Option<f64>,
    pub metric: String,
    /// 0-based; written 1-based.
    pub node: Option<usize>,
    pub t: Option<usize>,
    pub value: f64,
    pub method: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    /// Lines echoed as `#` comments above the header.
    pub comments: Vec<String>,
    pub spec_hash: String,
    pub rows: Vec<ResultRow>,
}

/// Hex SHA-256 of `text`.
pub fn spec_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultTable {
    /// A table whose provenance is the canonical spec text.
    pub fn for_spec(spec_text: &str) -> Self {
        Self {
            comments: spec_text.lines().map(str::to_string).collect(),
            spec_hash: spec_hash(spec_text),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows matching every given field.
    pub fn select<'a>(
        &'a self,
        experiment: Option<&'a str>,
        mechanism: Option<&'a str>,
        metric: Option<&'a str>,
        method: Option<&'a str>,
    ) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| {
            experiment.is_none_or(|e| r.experiment == e)
                && mechanism.is_none_or(|m| r.mechanism == m)
                && metric.is_none_or(|m| r.metric == m)
                && method.is_none_or(|m| r.method == m)
        })
    }

    /// First value matching the fields and `sigma_sq`.
    pub fn value(&self, experiment: &str, mechanism: &str, sigma_sq: f64, metric: &str, method: &str) -> Option<f64> {
        self.select(Some(experiment), Some(mechanism), Some(metric), Some(method))
            .find(|r| r.sigma_sq == Some(sigma_sq))
            .map(|r| r.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "# spec_sha256 = {}", self.spec_hash).unwrap();
        writeln!(out, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.mechanism,
                fmt_opt(r.sigma_sq),
                r.metric,
                fmt_opt(r.node.map(|n| n + 1)),
                fmt_opt(r.t),
                r.value,
                r.method,
                r.seed
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Pivot for gnuplot: one row per x value (`t` when any row has one,
    /// otherwise `sigma_sq`), one column per series.
    pub fn to_gnuplot(&self) -> String {
        let by_t = self.rows.iter().any(|r| r.t.is_some());
        let series_key = |r: &ResultRow| {
            let mut k = format!("{}:{}:{}:{}", r.experiment, r.mechanism, r.metric, r.method);
            if by_t {
                k.push_str(&format!(":sigma_sq={}", fmt_opt(r.sigma_sq)));
            }
            k
        };
        let x_of = |r: &ResultRow| if by_t { r.t.map(|t| t as f64) } else { r.sigma_sq };
        let mut series: Vec<String> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for r in &self.rows {
            if let Some(x) = x_of(r) {
                let k = series_key(r);
                if !series.contains(&k) {
                    series.push(k);
                }
                if !xs.iter().any(|v| v.to_bits() == x.to_bits()) {
                    xs.push(x);
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut grid = vec![vec![f64::NAN; series.len()]; xs.len()];
        let mut labels: Vec<(String, Vec<f64>)> = Vec::new();
        for r in &self.rows {
            match x_of(r) {
                Some(x) => {
                    let col = series.iter().position(|s| *s == series_key(r)).expect("series");
                    let row = xs.iter().position(|v| v.to_bits() == x.to_bits()).expect("x");
                    grid[row][col] = r.value;
                }
                None => {
                    let key = series_key(r);
                    match labels.iter_mut().find(|(m, _)| *m == key) {
                        Some((_, vals)) => vals.push(r.value),
                        None => labels.push((key, vec![r.value])),
                    }
                }
            }
        }
        let mut out = String::new();
        writeln!(out, "# spec_sha256 = {}", self.spec_hash).unwrap();
        writeln!(out, "# {} {}", if by_t { "t" } else { "sigma_sq" }, series.join(" ")).unwrap();
        for (x, row) in xs.iter().zip(&grid) {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{x} {}", vals.join(" ")).unwrap();
        }
        if !labels.is_empty() {
            out.push_str("\n\n# metric values...\n");
            for (m, vals) in labels {
                let vals: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{m} {}", vals.join(" ")).unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(metric: &str, sigma_sq: Option<f64>, t: Option<usize>, value: f64) -> ResultRow {
        ResultRow {
            experiment: "x".into(),
            mechanism: "dp".into(),
            sigma_sq,
            metric: metric.into(),
            node: Some(0),
            t,
            value,
            method: "knn".into(),
            seed: 7,
        }
    }

    #[test]
    fn known_hash() {
        assert_eq!(spec_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::for_spec("experiment = x\n");
        t.push(row("rho_nmi", Some(1.0), None, 0.5));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment = x");
        assert!(lines[1].starts_with("# spec_sha256 = "));
        assert_eq!(lines[2], CSV_HEADER);
        assert_eq!(lines[3], "x,dp,1,rho_nmi,1,,0.5,knn,7");
    }

    #[test]
    fn gnuplot_pivots_on_sigma() {
        let mut t = ResultTable::default();
        t.push(row("u", Some(1.0), None, 0.1));
        t.push(row("rho", Some(1.0), None, 0.2));
        t.push(row("u", Some(0.1), None, 0.3));
        let dat = t.to_gnuplot();
        let lines: Vec<&str> = dat.lines().collect();
        assert_eq!(lines[1], "# sigma_sq x:dp:u:knn x:dp:rho:knn");
        assert_eq!(lines[2], "0.1 0.3 NaN");
        assert_eq!(lines[3], "1 0.1 0.2");
    }

    #[test]
    fn gnuplot_pivots_on_t() {
        let mut t = ResultTable::default();
        t.push(row("error", Some(0.0), Some(0), 1.0));
        t.push(row("error", Some(0.0), Some(1), 0.5));
        let dat = t.to_gnuplot();
        assert!(dat.contains("# t x:dp:error:knn:sigma_sq=0"));
        assert!(dat.contains("\n1 0.5\n"));
    }
}
