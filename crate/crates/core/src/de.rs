//! Differential-metabolite calls by two-sample t-test plus fold change.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{format_value, LabelVector, MetaboliteMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub alpha: f64,
    /// Minimal fold change on the raw (ratio) scale.
    pub fc_threshold: f64,
    /// Welch's unequal-variance test; pooled-variance Student test otherwise.
    pub use_welch: bool,
    /// Report log2 fold changes.
    pub log_fc: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            alpha: 0.05,
            fc_threshold: 1.5,
            use_welch: true,
            log_fc: false,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.fc_threshold >= 1.0) {
            return Err(Error::Config(format!(
                "fold-change threshold must be ≥ 1, got {}",
                self.fc_threshold
            )));
        }
        Ok(())
    }

    /// Header comment describing the configuration.
    pub fn describe(&self) -> String {
        format!(
            "alpha={} fc_threshold={} test={} log_fc={}",
            self.alpha,
            self.fc_threshold,
            if self.use_welch { "welch" } else { "pooled" },
            self.log_fc
        )
    }
}

/// Result of a two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Two-sided two-sample t-test of `a` against `b`.
pub fn t_test(a: &[f64], b: &[f64], welch: bool) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Domain(
            "t-test needs at least 2 samples per group".into(),
        ));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    let (se2, df) = if welch {
        let (q1, q2) = (v1 / n1, v2 / n2);
        let se2 = q1 + q2;
        let den = q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0);
        (
            se2,
            if den > 0.0 {
                se2 * se2 / den
            } else {
                n1 + n2 - 2.0
            },
        )
    } else {
        let sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
        (sp2 * (1.0 / n1 + 1.0 / n2), n1 + n2 - 2.0)
    };
    let diff = m1 - m2;
    if se2 == 0.0 {
        return Ok(if diff == 0.0 {
            TTest { t: 0.0, df, p: 1.0 }
        } else {
            TTest {
                t: diff.signum() * f64::INFINITY,
                df,
                p: 0.0,
            }
        });
    }
    let t = diff / se2.sqrt();
    Ok(TTest {
        t,
        df,
        p: two_sided_p(t, df)?,
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Numeric(format!("t distribution with df={df}: {e}")))?;
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeRow {
    pub metabolite_id: String,
    pub t: f64,
    pub p: f64,
    /// Case mean over control mean (log2 of it when `log_fc` is on).
    pub fc: f64,
    pub de: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeResult {
    pub rows: Vec<DeRow>,
    pub config: DeConfig,
}

impl DeResult {
    pub fn flagged_ids(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.de)
            .map(|r| r.metabolite_id.as_str())
            .collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "# {}", self.config.describe()).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metabolite_id", "t", "p", "fc", "de_flag"])
            .map_err(|e| Error::csv(path, e))?;
        for r in &self.rows {
            w.write_record([
                r.metabolite_id.clone(),
                format_value(r.t),
                format_value(r.p),
                format_value(r.fc),
                r.de.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Flags metabolites with `p < alpha` and a fold change of at least
/// `fc_threshold` in either direction.
pub fn de_call(m: &MetaboliteMatrix, y: &LabelVector, cfg: &DeConfig) -> Result<DeResult> {
    cfg.validate()?;
    if y.len() != m.n_samples() {
        return Err(Error::Schema(format!(
            "{} labels for {} samples",
            y.len(),
            m.n_samples()
        )));
    }
    if y.n_case() < 2 || y.n_control() < 2 {
        return Err(Error::Domain("need at least 2 samples per class".into()));
    }
    let mut rows = Vec::with_capacity(m.n_metabolites());
    let mut non_positive = 0usize;
    for (id, row) in m.metabolite_ids().iter().zip(m.values().rows()) {
        let (mut case, mut ctrl) = (Vec::new(), Vec::new());
        for (v, l) in row.iter().zip(y.iter()) {
            if l.is_case() {
                case.push(*v);
            } else {
                ctrl.push(*v);
            }
        }
        let test = t_test(&case, &ctrl, cfg.use_welch)?;
        let case_mean = case.iter().sum::<f64>() / case.len() as f64;
        let ctrl_mean = ctrl.iter().sum::<f64>() / ctrl.len() as f64;
        if case_mean <= 0.0 || ctrl_mean <= 0.0 {
            non_positive += 1;
        }
        let significant = test.p < cfg.alpha;
        let (fc, de) = if ctrl_mean == 0.0 {
            log::warn!("metabolite `{id}` has zero control mean; fold change reported as +inf");
            (f64::INFINITY, significant)
        } else {
            let ratio = case_mean / ctrl_mean;
            let large = ratio.max(1.0 / ratio) >= cfg.fc_threshold;
            let fc = if cfg.log_fc { ratio.log2() } else { ratio };
            (fc, significant && large)
        };
        rows.push(DeRow {
            metabolite_id: id.clone(),
            t: test.t,
            p: test.p,
            fc,
            de,
        });
    }
    if non_positive > 0 {
        log::warn!(
            "{non_positive} metabolites have a non-positive group mean; fold changes are not meaningful on centred data, consider raw-scale fold changes"
        );
    }
    Ok(DeResult { rows, config: *cfg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;
    use ndarray::Array2;

    #[test]
    fn identical_groups() {
        let row = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
        let m = MetaboliteMatrix::from_array(Array2::from_shape_vec((1, 8), row.to_vec()).unwrap())
            .unwrap();
        let y = LabelVector::new(
            (0..8)
                .map(|j| if j < 4 { Label::Case } else { Label::Control })
                .collect(),
        )
        .unwrap();
        let r = de_call(&m, &y, &DeConfig::default()).unwrap();
        assert_eq!(r.rows[0].t, 0.0);
        assert_eq!(r.rows[0].p, 1.0);
        assert_eq!(r.rows[0].fc, 1.0);
        assert!(!r.rows[0].de);
    }

    #[test]
    fn planted_row() {
        let jitter = [0.01, -0.02, 0.015, -0.005, 0.0];
        let mut row: Vec<f64> = jitter.iter().map(|j| 100.0 + j).collect();
        row.extend(jitter.iter().map(|j| 10.0 - j));
        let m =
            MetaboliteMatrix::from_array(Array2::from_shape_vec((1, 10), row).unwrap()).unwrap();
        let y = LabelVector::new(
            (0..10)
                .map(|j| if j < 5 { Label::Case } else { Label::Control })
                .collect(),
        )
        .unwrap();
        let r = de_call(&m, &y, &DeConfig::default()).unwrap();
        assert!(r.rows[0].p < 1e-6);
        assert!((r.rows[0].fc - 10.0).abs() < 1e-12);
        assert!(r.rows[0].de);
        let log = de_call(
            &m,
            &y,
            &DeConfig {
                log_fc: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((log.rows[0].fc - 10f64.log2()).abs() < 1e-12);
        assert!(log.rows[0].de);
    }

    #[test]
    fn zero_control_mean_gives_infinite_fc() {
        let row = vec![5.0, 6.0, 7.0, 0.0, 0.0, 0.0];
        let m = MetaboliteMatrix::from_array(Array2::from_shape_vec((1, 6), row).unwrap()).unwrap();
        let y = LabelVector::new(
            (0..6)
                .map(|j| if j < 3 { Label::Case } else { Label::Control })
                .collect(),
        )
        .unwrap();
        let r = de_call(&m, &y, &DeConfig::default()).unwrap();
        assert_eq!(r.rows[0].fc, f64::INFINITY);
        assert_eq!(r.rows[0].de, r.rows[0].p < 0.05);
    }

    #[test]
    fn pooled_matches_textbook() {
        // a = [1,2,3], b = [4,5,6]: sp² = 1, se = sqrt(2/3), t = -3/sqrt(2/3)
        let t = t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], false).unwrap();
        assert!((t.t + 3.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(t.df, 4.0);
        let w = t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], true).unwrap();
        assert!((w.df - 4.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(DeConfig {
            alpha: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DeConfig {
            fc_threshold: 0.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
