//! Row-wise scaling transforms.
//!
//! Five conventional scalings (auto, range, Pareto, vast, level) and the
//! outlier-robust weighted scaling. Every method is split into a fit step
//! that summarises a row ([`RowTransform`]) and an apply step, so the same
//! row statistics can be applied to held-out samples.
//!
//! Rows whose denominator vanishes (zero sd, zero range, zero mean) come out
//! as all zeros and are reported in [`ScaledMatrix::flagged_rows`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{digest_table, write_matrix_csv, MetaboliteMatrix};
use crate::error::{Error, Result};
use crate::robust::{RobustParams, RowCenter, RowWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    Auto,
    Range,
    Pareto,
    Vast,
    Level,
    Weighted,
}

impl ScalingKind {
    pub const ALL: [ScalingKind; 6] = [
        ScalingKind::Auto,
        ScalingKind::Range,
        ScalingKind::Pareto,
        ScalingKind::Vast,
        ScalingKind::Level,
        ScalingKind::Weighted,
    ];

    /// The five non-robust methods.
    pub const CONVENTIONAL: [ScalingKind; 5] = [
        ScalingKind::Auto,
        ScalingKind::Range,
        ScalingKind::Pareto,
        ScalingKind::Vast,
        ScalingKind::Level,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalingKind::Auto => "auto",
            ScalingKind::Range => "range",
            ScalingKind::Pareto => "pareto",
            ScalingKind::Vast => "vast",
            ScalingKind::Level => "level",
            ScalingKind::Weighted => "weighted",
        }
    }
}

impl fmt::Display for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalingKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scaling method `{s}` (expected one of auto, range, pareto, vast, level, weighted)"
                ))
            })
    }
}

/// A scaling method plus the weight-function parameters (weighted only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMethod {
    pub kind: ScalingKind,
    pub params: RobustParams,
}

impl ScalingMethod {
    pub fn new(kind: ScalingKind) -> Self {
        ScalingMethod {
            kind,
            params: RobustParams::default(),
        }
    }

    pub fn with_params(kind: ScalingKind, params: RobustParams) -> Self {
        ScalingMethod { kind, params }
    }

    /// Text for the `# method=` comment line of a scaled CSV.
    pub fn describe(&self) -> String {
        match self.kind {
            ScalingKind::Weighted => format!(
                "method=weighted mad_constant={} alpha={}",
                self.params.mad_constant(),
                self.params.alpha()
            ),
            k => format!("method={k}"),
        }
    }
}

impl From<ScalingKind> for ScalingMethod {
    fn from(kind: ScalingKind) -> Self {
        ScalingMethod::new(kind)
    }
}

/// Summary statistics of one row, ready to transform any value of it.
#[derive(Debug, Clone, PartialEq)]
pub enum RowTransform {
    /// Degenerate denominator: every value maps to 0.
    Constant,
    /// `(x - center) / divisor * factor`.
    Affine {
        center: f64,
        divisor: f64,
        factor: f64,
    },
    /// Piecewise weighted transform anchored at the row median/MAD.
    Weighted {
        center: f64,
        divisor: f64,
        anchor: RowCenter,
        params: RobustParams,
    },
}

impl RowTransform {
    pub fn is_constant(&self) -> bool {
        matches!(self, RowTransform::Constant)
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            RowTransform::Constant => 0.0,
            RowTransform::Affine {
                center,
                divisor,
                factor,
            } => {
                if factor == 1.0 {
                    (x - center) / divisor
                } else {
                    (x - center) / divisor * factor
                }
            }
            RowTransform::Weighted {
                center,
                divisor,
                anchor,
                ref params,
            } => {
                let w = anchor.weight(x, params);
                let numerator = if w == 1.0 { x } else { w * x };
                (numerator - center) / divisor
            }
        }
    }
}

/// Output of a single-row scaler.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRow {
    pub values: Vec<f64>,
    /// Denominator vanished; `values` are all zero.
    pub constant: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
fn sample_sd(x: &[f64], m: f64) -> f64 {
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

fn affine(center: f64, divisor: f64) -> RowTransform {
    if divisor == 0.0 || !divisor.is_finite() {
        RowTransform::Constant
    } else {
        RowTransform::Affine {
            center,
            divisor,
            factor: 1.0,
        }
    }
}

/// Fits the row statistics `method` needs.
pub fn fit_row(x: &[f64], method: &ScalingMethod) -> Result<RowTransform> {
    if x.len() < 2 {
        return Err(Error::Domain(format!(
            "a row needs at least 2 samples to scale, got {}",
            x.len()
        )));
    }
    let m = mean(x);
    Ok(match method.kind {
        ScalingKind::Auto => affine(m, sample_sd(x, m)),
        ScalingKind::Range => {
            let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = x.iter().copied().fold(f64::INFINITY, f64::min);
            affine(m, max - min)
        }
        ScalingKind::Pareto => affine(m, sample_sd(x, m).sqrt()),
        ScalingKind::Vast => {
            let sd = sample_sd(x, m);
            if sd == 0.0 {
                RowTransform::Constant
            } else {
                RowTransform::Affine {
                    center: m,
                    divisor: sd,
                    factor: m / sd,
                }
            }
        }
        ScalingKind::Level => affine(m, m),
        ScalingKind::Weighted => fit_weighted(x, &method.params)?,
    })
}

fn fit_weighted(x: &[f64], params: &RobustParams) -> Result<RowTransform> {
    let anchor = RowCenter::of(x, params)?;
    // mad == 0 makes every weight 1, which reduces the weighted sd to the
    // population sd of the row
    let weights = RowWeights::new(x.iter().map(|&v| anchor.weight(v, params)).collect())?;
    let center = crate::robust::weighted_mean(x, &weights)?;
    let divisor = crate::robust::weighted_sd(x, &weights)?;
    if divisor == 0.0 || !divisor.is_finite() {
        return Ok(RowTransform::Constant);
    }
    Ok(RowTransform::Weighted {
        center,
        divisor,
        anchor,
        params: *params,
    })
}

fn scale_row(x: &[f64], method: &ScalingMethod) -> ScaledRow {
    let t = fit_row(x, method).expect("row length checked by caller");
    ScaledRow {
        values: x.iter().map(|&v| t.apply(v)).collect(),
        constant: t.is_constant(),
    }
}

pub fn auto_scale_row(x: &[f64]) -> ScaledRow {
    scale_row(x, &ScalingKind::Auto.into())
}

pub fn range_scale_row(x: &[f64]) -> ScaledRow {
    scale_row(x, &ScalingKind::Range.into())
}

pub fn pareto_scale_row(x: &[f64]) -> ScaledRow {
    scale_row(x, &ScalingKind::Pareto.into())
}

pub fn vast_scale_row(x: &[f64]) -> ScaledRow {
    scale_row(x, &ScalingKind::Vast.into())
}

pub fn level_scale_row(x: &[f64]) -> ScaledRow {
    scale_row(x, &ScalingKind::Level.into())
}

pub fn weighted_scale_row(x: &[f64], params: &RobustParams) -> ScaledRow {
    scale_row(
        x,
        &ScalingMethod::with_params(ScalingKind::Weighted, *params),
    )
}

/// Per-row transforms fitted on one set of samples.
#[derive(Debug, Clone)]
pub struct FittedScaler {
    method: ScalingMethod,
    rows: Vec<RowTransform>,
}

impl FittedScaler {
    pub fn fit(values: &Array2<f64>, method: &ScalingMethod) -> Result<Self> {
        let rows = values
            .axis_iter(Axis(0))
            .map(|row| fit_row(&row_vec(row), method))
            .collect::<Result<Vec<_>>>()?;
        Ok(FittedScaler {
            method: *method,
            rows,
        })
    }

    pub fn method(&self) -> &ScalingMethod {
        &self.method
    }

    pub fn rows(&self) -> &[RowTransform] {
        &self.rows
    }

    pub fn flagged_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_constant())
            .map(|(i, _)| i)
            .collect()
    }

    /// Transforms `values` (same metabolite rows, any samples).
    pub fn transform(&self, values: &Array2<f64>) -> Result<Array2<f64>> {
        if values.nrows() != self.rows.len() {
            return Err(Error::Domain(format!(
                "scaler fitted on {} rows, got {}",
                self.rows.len(),
                values.nrows()
            )));
        }
        let mut out = values.clone();
        for (mut row, t) in out.axis_iter_mut(Axis(0)).zip(&self.rows) {
            row.mapv_inplace(|v| t.apply(v));
        }
        Ok(out)
    }
}

fn row_vec(row: ArrayView1<f64>) -> Vec<f64> {
    row.iter().copied().collect()
}

/// A scaled matrix with the method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub values: Array2<f64>,
    pub metabolite_ids: Vec<String>,
    pub sample_ids: Vec<String>,
    pub method: ScalingMethod,
    /// Rows whose denominator vanished (emitted as zeros).
    pub flagged_rows: Vec<usize>,
    /// Digest of the source matrix.
    pub source_digest: String,
}

impl ScaledMatrix {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_matrix_csv(
            path.as_ref(),
            &[self.method.describe()],
            &self.values,
            &self.metabolite_ids,
            &self.sample_ids,
        )
    }

    /// Writes the ids of flagged rows, one per line under a header.
    pub fn write_flagged_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["metabolite_id"])
            .map_err(|e| Error::csv(path, e))?;
        for &i in &self.flagged_rows {
            w.write_record([&self.metabolite_ids[i]])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn digest(&self) -> String {
        digest_table(&self.values, &self.metabolite_ids, &self.sample_ids)
    }

    /// Reinterprets the scaled values as a plain matrix.
    pub fn to_matrix(&self) -> Result<MetaboliteMatrix> {
        MetaboliteMatrix::new(
            self.values.clone(),
            self.metabolite_ids.clone(),
            self.sample_ids.clone(),
        )
    }
}

/// Scales every row of `m` by its own statistics.
pub fn scale(m: &MetaboliteMatrix, method: &ScalingMethod) -> ScaledMatrix {
    let scaler = FittedScaler::fit(m.values(), method)
        .expect("MetaboliteMatrix guarantees at least 2 samples");
    let values = scaler.transform(m.values()).expect("same row count");
    ScaledMatrix {
        values,
        metabolite_ids: m.metabolite_ids().to_vec(),
        sample_ids: m.sample_ids().to_vec(),
        method: *method,
        flagged_rows: scaler.flagged_rows(),
        source_digest: m.digest(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn auto_examples() {
        let r = auto_scale_row(&[1.0, 2.0, 3.0]);
        close(&r.values, &[-1.0, 0.0, 1.0], 1e-15);
        assert!(!r.constant);
        close(
            &auto_scale_row(&[2.0, 4.0, 6.0]).values,
            &[-1.0, 0.0, 1.0],
            1e-15,
        );
        let r = auto_scale_row(&[5.0, 5.0, 5.0]);
        assert_eq!(r.values, vec![0.0; 3]);
        assert!(r.constant);
    }

    #[test]
    fn range_examples() {
        close(
            &range_scale_row(&[2.0, 4.0, 6.0]).values,
            &[-0.5, 0.0, 0.5],
            1e-15,
        );
        close(&range_scale_row(&[0.0, 1.0]).values, &[-0.5, 0.5], 1e-15);
        let r = range_scale_row(&[9.0, 9.0]);
        assert_eq!(r.values, vec![0.0, 0.0]);
        assert!(r.constant);
    }

    #[test]
    fn pareto_examples() {
        close(
            &pareto_scale_row(&[1.0, 2.0, 3.0]).values,
            &[-1.0, 0.0, 1.0],
            1e-15,
        );
        let s = std::f64::consts::SQRT_2;
        close(
            &pareto_scale_row(&[2.0, 4.0, 6.0]).values,
            &[-s, 0.0, s],
            1e-14,
        );
        assert!(pareto_scale_row(&[5.0, 5.0, 5.0]).constant);
    }

    #[test]
    fn vast_examples() {
        close(
            &vast_scale_row(&[1.0, 2.0, 3.0]).values,
            &[-2.0, 0.0, 2.0],
            1e-15,
        );
        close(
            &vast_scale_row(&[2.0, 4.0, 6.0]).values,
            &[-2.0, 0.0, 2.0],
            1e-15,
        );
        let r = vast_scale_row(&[-3.0, 0.0, 3.0]);
        assert!(r.values.iter().all(|v| *v == 0.0));
        assert!(!r.constant);
    }

    #[test]
    fn level_examples() {
        close(
            &level_scale_row(&[2.0, 4.0, 6.0]).values,
            &[-0.5, 0.0, 0.5],
            1e-15,
        );
        let r = level_scale_row(&[3.0, 3.0, 3.0]);
        assert_eq!(r.values, vec![0.0; 3]);
        assert!(!r.constant);
        let r = level_scale_row(&[-1.0, 1.0]);
        assert_eq!(r.values, vec![0.0, 0.0]);
        assert!(r.constant);
    }

    #[test]
    fn weighted_clean_row_is_rescaled_auto() {
        let p = RobustParams::default();
        let w = weighted_scale_row(&[1.0, 2.0, 3.0], &p);
        let a = auto_scale_row(&[1.0, 2.0, 3.0]);
        let factor = (3.0f64 / 2.0).sqrt();
        for (x, y) in w.values.iter().zip(&a.values) {
            assert_relative_eq!(*x, y * factor, epsilon = 1e-12);
        }
    }

    #[test]
    fn weighted_outlier_lands_near_bulk() {
        let p = RobustParams::default();
        let row = [1.0, 2.0, 3.0, 4.0, 100.0];
        let r = weighted_scale_row(&row, &p);
        assert!(r.values[4].abs() < 5.0, "{:?}", r.values);
        // auto scaling leaves the outlier ~1.8 sd out but crushes the bulk
        let a = auto_scale_row(&row);
        assert!(a.values[..4].iter().all(|v| v.abs() < 0.6));
        assert!(r.values[..4].iter().any(|v| v.abs() > 0.8));
    }

    #[test]
    fn weighted_constant_row_flagged() {
        let r = weighted_scale_row(&[4.0, 4.0, 4.0, 4.0], &RobustParams::default());
        assert!(r.constant);
        assert_eq!(r.values, vec![0.0; 4]);
    }

    #[test]
    fn weighted_mad_zero_falls_back_to_population_sd() {
        // >50% identical: mad is 0, all weights 1
        let x = [2.0, 2.0, 2.0, 5.0, 8.0];
        let r = weighted_scale_row(&x, &RobustParams::default());
        let m = 19.0 / 5.0;
        let sd = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 5.0).sqrt();
        let expected: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
        close(&r.values, &expected, 1e-14);
    }

    #[test]
    fn scale_matrix_flags_rows() {
        let m = MetaboliteMatrix::from_array(array![[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]).unwrap();
        let s = scale(&m, &ScalingKind::Auto.into());
        assert_eq!(s.flagged_rows, vec![1]);
        assert_eq!(s.values.dim(), (2, 3));
        let single = MetaboliteMatrix::from_array(array![[1.0, 2.0, 3.0]]).unwrap();
        let s1 = scale(&single, &ScalingKind::Auto.into());
        assert_eq!(s1.values.row(0), s.values.row(0));
    }

    #[test]
    fn parse_methods() {
        assert_eq!(
            "Weighted".parse::<ScalingKind>().unwrap(),
            ScalingKind::Weighted
        );
        assert!("zscore".parse::<ScalingKind>().is_err());
    }

    #[test]
    fn fitted_scaler_applies_training_statistics() {
        let train = array![[1.0, 2.0, 3.0]];
        let s = FittedScaler::fit(&train, &ScalingKind::Auto.into()).unwrap();
        let out = s.transform(&array![[4.0, 0.0]]).unwrap();
        assert_eq!(out, array![[2.0, -2.0]]);
        assert!(s.transform(&array![[1.0], [2.0]]).is_err());
    }
}
