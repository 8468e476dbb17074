//! Median, MAD and the MAD-standardised cell weight used by weighted scaling.
//!
//! A cell's weight is `min(1, z² / d²)` where `d` is its distance from the
//! row median in MAD units and `z` is the upper-`alpha` standard-normal
//! critical value. Cells within `z` MADs of the median keep weight 1; the
//! weight decays quadratically beyond that.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Consistency constant in `mad = median|x - median(x)| / constant`.
pub const DEFAULT_MAD_CONSTANT: f64 = 0.6754;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Parameters of the weight function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct RobustParams {
    mad_constant: f64,
    alpha: f64,
    z_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    mad_constant: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for RobustParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        RobustParams::new(r.mad_constant, r.alpha)
    }
}

impl From<RobustParams> for RawParams {
    fn from(p: RobustParams) -> Self {
        RawParams {
            mad_constant: p.mad_constant,
            alpha: p.alpha,
        }
    }
}

impl Default for RobustParams {
    fn default() -> Self {
        RobustParams::new(DEFAULT_MAD_CONSTANT, DEFAULT_ALPHA).expect("defaults are valid")
    }
}

impl RobustParams {
    pub fn new(mad_constant: f64, alpha: f64) -> Result<Self> {
        if !(mad_constant > 0.0 && mad_constant.is_finite()) {
            return Err(Error::Config(format!(
                "mad constant must be positive, got {mad_constant}"
            )));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 0.5), got {alpha}"
            )));
        }
        Ok(RobustParams {
            mad_constant,
            alpha,
            z_alpha: upper_normal_quantile(alpha),
        })
    }

    pub fn mad_constant(&self) -> f64 {
        self.mad_constant
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(1 - alpha)` quantile of the standard normal.
    pub fn z_alpha(&self) -> f64 {
        self.z_alpha
    }
}

/// Upper-tail standard normal critical value: `Φ⁻¹(1 - alpha)`.
pub fn upper_normal_quantile(alpha: f64) -> f64 {
    // Φ⁻¹(1-α) = -Φ⁻¹(α); the lower tail is the better-conditioned side for small α
    -Normal::standard().inverse_cdf(alpha)
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Middle order statistic; mean of the two middle values for even length.
pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Domain("median of an empty vector".into()));
    }
    Ok(median_of_sorted(&sorted(x)))
}

/// Scaled median absolute deviation, `median|x - median(x)| / mad_constant`.
pub fn mad(x: &[f64], params: &RobustParams) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::Domain(format!(
            "mad needs at least 2 values, got {}",
            x.len()
        )));
    }
    let med = median(x)?;
    Ok(raw_mad(x, med) / params.mad_constant)
}

fn raw_mad(x: &[f64], med: f64) -> f64 {
    let dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    median_of_sorted(&sorted(&dev))
}

/// Weight of one cell given its row's median and MAD.
///
/// Exactly 1 at the median, within `z_alpha` MADs of it, and for rows whose
/// MAD is zero. Always strictly positive.
pub fn cell_weight(x: f64, row_median: f64, row_mad: f64, params: &RobustParams) -> f64 {
    let dist = (x - row_median).abs();
    if row_mad == 0.0 || dist == 0.0 {
        return 1.0;
    }
    // (z / d)² with d = dist / mad, arranged so the ratio is affine-invariant
    let ratio = params.z_alpha * row_mad / dist;
    if ratio >= 1.0 {
        1.0
    } else {
        (ratio * ratio).max(f64::MIN_POSITIVE)
    }
}

/// Weights of a whole row in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RowWeights(Vec<f64>);

impl RowWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(bad) = w.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::Domain(format!("weight {bad} outside (0, 1]")));
        }
        Ok(RowWeights(w))
    }

    pub fn ones(n: usize) -> Self {
        RowWeights(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Location and spread the weight function is anchored to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowCenter {
    pub median: f64,
    pub mad: f64,
}

impl RowCenter {
    pub fn of(x: &[f64], params: &RobustParams) -> Result<Self> {
        let med = median(x)?;
        if x.len() < 2 {
            return Err(Error::Domain("row needs at least 2 values".into()));
        }
        Ok(RowCenter {
            median: med,
            mad: raw_mad(x, med) / params.mad_constant,
        })
    }

    pub fn weight(&self, x: f64, params: &RobustParams) -> f64 {
        cell_weight(x, self.median, self.mad, params)
    }
}

pub fn row_weights(x: &[f64], params: &RobustParams) -> Result<RowWeights> {
    let c = RowCenter::of(x, params)?;
    Ok(RowWeights(x.iter().map(|&v| c.weight(v, params)).collect()))
}

fn check_len(x: &[f64], w: &RowWeights) -> Result<()> {
    if x.len() != w.len() {
        return Err(Error::Domain(format!(
            "{} values but {} weights",
            x.len(),
            w.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Domain("empty row".into()));
    }
    Ok(())
}

/// `Σ w x / Σ w`.
pub fn weighted_mean(x: &[f64], w: &RowWeights) -> Result<f64> {
    check_len(x, w)?;
    let num: f64 = x.iter().zip(w.as_slice()).map(|(x, w)| w * x).sum();
    Ok(num / w.sum())
}

/// `sqrt(Σ (w x - x̄_w)² / Σ w)`, with the weight applied to the value
/// inside the square and `Σ w` as the denominator.
pub fn weighted_sd(x: &[f64], w: &RowWeights) -> Result<f64> {
    let m = weighted_mean(x, w)?;
    let ss: f64 = x
        .iter()
        .zip(w.as_slice())
        .map(|(x, w)| {
            let d = w * x - m;
            d * d
        })
        .sum();
    Ok((ss / w.sum()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p() -> RobustParams {
        RobustParams::default()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median(&[5.0]).unwrap(), 5.0);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn mad_examples() {
        let m = mad(&[1.0, 2.0, 3.0, 4.0, 100.0], &p()).unwrap();
        assert_relative_eq!(m, 1.0 / 0.6754, max_relative = 1e-15);
        assert_relative_eq!(m, 1.48060, epsilon = 1e-5);
        assert_eq!(mad(&[7.0, 7.0, 7.0], &p()).unwrap(), 0.0);
        assert_relative_eq!(mad(&[0.0, 1.0], &p()).unwrap(), 0.5 / 0.6754);
        assert!(mad(&[1.0], &p()).is_err());
        assert!(mad(&[], &p()).is_err());
    }

    #[test]
    fn default_critical_value() {
        assert_relative_eq!(p().z_alpha(), 1.6448536269514722, epsilon = 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(RobustParams::new(0.0, 0.05).is_err());
        assert!(RobustParams::new(0.6745, 0.5).is_err());
        assert!(RobustParams::new(0.6745, 0.0).is_err());
        assert!(RobustParams::new(0.6745, 0.01).is_ok());
    }

    #[test]
    fn weight_examples() {
        let params = p();
        assert_eq!(cell_weight(3.0, 3.0, 1.5, &params), 1.0);
        // exactly z_alpha MADs away
        let mad = 2.0;
        let x = 10.0 + params.z_alpha() * mad;
        assert_eq!(cell_weight(x, 10.0, mad, &params), 1.0);
        assert_eq!(cell_weight(1e9, 10.0, 0.0, &params), 1.0);
    }

    #[test]
    fn outlier_weight_fixture() {
        let params = p();
        let row = [1.0, 2.0, 3.0, 4.0, 100.0];
        let c = RowCenter::of(&row, &params).unwrap();
        let d = 97.0 / (1.0 / 0.6754);
        let expected = params.z_alpha().powi(2) / (d * d);
        let w = c.weight(100.0, &params);
        assert_relative_eq!(w, expected, max_relative = 1e-12);
        assert_relative_eq!(w, 6.304e-4, max_relative = 1e-3);
    }

    #[test]
    fn weighted_mean_examples() {
        let x = [0.0, 10.0];
        let w = RowWeights::new(vec![1.0, 0.25]).unwrap();
        assert_relative_eq!(weighted_mean(&x, &w).unwrap(), 2.0);
        assert_relative_eq!(
            weighted_mean(
                &[4.0, 4.0, 4.0],
                &RowWeights::new(vec![0.3, 1.0, 0.9]).unwrap()
            )
            .unwrap(),
            4.0,
            epsilon = 1e-15
        );
        assert!(weighted_mean(&[1.0], &RowWeights::ones(2)).is_err());
    }

    #[test]
    fn weighted_sd_examples() {
        assert_relative_eq!(
            weighted_sd(&[1.0, 2.0, 3.0], &RowWeights::ones(3)).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(weighted_sd(&[5.0, 5.0], &RowWeights::ones(2)).unwrap(), 0.0);
        let w = RowWeights::new(vec![1.0, 0.25]).unwrap();
        assert_relative_eq!(
            weighted_sd(&[0.0, 10.0], &w).unwrap(),
            3.4f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn row_weights_rejects_out_of_range() {
        assert!(RowWeights::new(vec![0.0]).is_err());
        assert!(RowWeights::new(vec![1.5]).is_err());
    }

    proptest! {
        #[test]
        fn median_and_mad_permutation_invariant(
            mut x in prop::collection::vec(-1e3f64..1e3, 2..40),
            seed in any::<u64>(),
        ) {
            let params = p();
            let m0 = median(&x).unwrap();
            let d0 = mad(&x, &params).unwrap();
            // deterministic shuffle
            let n = x.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                x.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(median(&x).unwrap(), m0);
            prop_assert_eq!(mad(&x, &params).unwrap(), d0);
        }

        #[test]
        fn mad_shift_invariant(
            x in prop::collection::vec(-1e2f64..1e2, 2..40),
            c in -1e2f64..1e2,
        ) {
            let params = p();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let a = mad(&x, &params).unwrap();
            let b = mad(&shifted, &params).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn weight_bounded_and_monotone(
            med in -1e3f64..1e3,
            mad in 0.0f64..1e2,
            d1 in 0.0f64..1e6,
            d2 in 0.0f64..1e6,
        ) {
            let params = p();
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let w_lo = cell_weight(med + lo, med, mad, &params);
            let w_hi = cell_weight(med - hi, med, mad, &params);
            prop_assert!(w_lo > 0.0 && w_lo <= 1.0);
            prop_assert!(w_hi > 0.0 && w_hi <= 1.0);
            prop_assert!(w_hi <= w_lo);
        }

        #[test]
        fn unit_weights_give_arithmetic_mean(x in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let w = RowWeights::ones(x.len());
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            prop_assert!((weighted_mean(&x, &w).unwrap() - mean).abs() <= 1e-12);
        }
    }
}
