//! PLS-DA: partial least squares regression on a 0/1 response.
//!
//! NIPALS-style deflation on column-centred data. For each component the
//! weight vector is `w = Eᵀu`, the score `t = Ew / ‖Ew‖`, loadings
//! `p = Eᵀt` and `c = uᵀt`, and both residuals are deflated by `t`. The
//! regression vector is `β = W(PᵀW)⁻¹c`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Relative size under which a weight vector counts as zero.
const ZERO_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PlsFit {
    pub x_mean: Array1<f64>,
    pub y_mean: f64,
    /// p × h weight vectors.
    pub weights: Array2<f64>,
    /// n × h normalised training scores.
    pub scores: Array2<f64>,
    /// p × h X loadings.
    pub x_loadings: Array2<f64>,
    /// h Y loadings.
    pub y_loadings: Array1<f64>,
    pub beta: Array1<f64>,
    pub requested: usize,
    /// Components actually extracted; smaller than `requested` when a
    /// weight vector vanished.
    pub components: usize,
}

impl PlsFit {
    pub fn truncated(&self) -> bool {
        self.components < self.requested
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    /// Continuous prediction `ȳ + (x - x̄)·β`.
    pub fn predict(&self, x: ArrayView1<f64>) -> f64 {
        self.y_mean
            + x.iter()
                .zip(self.x_mean.iter())
                .zip(self.beta.iter())
                .map(|((x, m), b)| (x - m) * b)
                .sum::<f64>()
    }
}

/// Fits up to `q` components on `x` (samples × features) and response `y`.
pub fn fit_plsda(x: ArrayView2<f64>, y: &[f64], q: usize) -> Result<PlsFit> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::Domain(format!(
            "{n} samples but {} responses",
            y.len()
        )));
    }
    if q == 0 || n < 2 {
        return Err(Error::Config(
            "PLS needs q ≥ 1 and at least 2 samples".into(),
        ));
    }
    let x_mean = x.mean_axis(Axis(0)).expect("n ≥ 2");
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut e = &x - &x_mean;
    let mut u: Array1<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut weights = Vec::new();
    let mut scores = Vec::new();
    let mut xl = Vec::new();
    let mut yl = Vec::new();
    let mut first_norm = None;
    for h in 0..q {
        let w = e.t().dot(&u);
        let norm = w.dot(&w).sqrt();
        let reference = *first_norm.get_or_insert(norm);
        if !(norm > ZERO_WEIGHT * reference.max(f64::MIN_POSITIVE)) || norm == 0.0 {
            log::debug!(
                "PLS stopped at component {} of {q}: weight vector vanished",
                h + 1
            );
            break;
        }
        let ew = e.dot(&w);
        let scale = ew.dot(&ew).sqrt();
        if scale == 0.0 {
            break;
        }
        let t = ew / scale;
        let px = e.t().dot(&t);
        let cy = u.dot(&t);
        // deflate
        for (mut row, ti) in e.axis_iter_mut(Axis(0)).zip(t.iter()) {
            row.scaled_add(-ti, &px);
        }
        u.scaled_add(-cy, &t);
        weights.push(w);
        scores.push(t);
        xl.push(px);
        yl.push(cy);
    }

    let h = weights.len();
    let stack = |cols: &[Array1<f64>], rows: usize| -> Array2<f64> {
        let mut m = Array2::zeros((rows, cols.len()));
        for (k, c) in cols.iter().enumerate() {
            m.column_mut(k).assign(c);
        }
        m
    };
    let weights = stack(&weights, p);
    let scores = stack(&scores, n);
    let x_loadings = stack(&xl, p);
    let y_loadings = Array1::from(yl);

    let beta = if h == 0 {
        Array1::zeros(p)
    } else {
        // β = W (PᵀW)⁻¹ c, via a solve on the h × h system
        let ptw = x_loadings.t().dot(&weights);
        let a = DMatrix::from_fn(h, h, |i, j| ptw[(i, j)]);
        let b = DVector::from_iterator(h, y_loadings.iter().copied());
        let z = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numeric("singular PᵀW in PLS regression".into()))?;
        weights.dot(&Array1::from_iter(z.iter().copied()))
    };

    Ok(PlsFit {
        x_mean,
        y_mean,
        weights,
        scores,
        x_loadings,
        y_loadings,
        beta,
        requested: q,
        components: h,
    })
}
