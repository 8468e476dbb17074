use ndarray::{ArrayView1, ArrayView2};

use crate::data::Label;

/// Gaussian naive Bayes with per-class, per-feature variances.
///
/// Index 0 holds control statistics, index 1 case.
#[derive(Debug, Clone)]
pub struct NbModel {
    log_prior: [f64; 2],
    means: [Vec<f64>; 2],
    vars: [Vec<f64>; 2],
}

impl NbModel {
    pub(crate) fn fit(x: ArrayView2<f64>, y: &[Label], var_floor: f64) -> Self {
        let n = y.len() as f64;
        let p = x.ncols();
        let mut means = [vec![0.0; p], vec![0.0; p]];
        let mut vars = [vec![0.0; p], vec![0.0; p]];
        let mut counts = [0usize; 2];
        for (row, l) in x.rows().into_iter().zip(y) {
            let c = l.is_case() as usize;
            counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
        for (row, l) in x.rows().into_iter().zip(y) {
            let c = l.is_case() as usize;
            for ((s, v), m) in vars[c].iter_mut().zip(row.iter()).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            let nc = counts[c] as f64;
            vars[c]
                .iter_mut()
                .for_each(|s| *s = (*s / nc).max(var_floor));
        }
        NbModel {
            log_prior: [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()],
            means,
            vars,
        }
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    pub fn means(&self, label: Label) -> &[f64] {
        &self.means[label.is_case() as usize]
    }

    pub fn variances(&self, label: Label) -> &[f64] {
        &self.vars[label.is_case() as usize]
    }

    fn log_joint(&self, c: usize, x: ArrayView1<f64>) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(&self.means[c])
            .zip(&self.vars[c])
            .map(|((x, m), v)| {
                -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m).powi(2) / (2.0 * v)
            })
            .sum();
        self.log_prior[c] + ll
    }

    /// `(P(control | x), P(case | x))`.
    pub fn posteriors(&self, x: ArrayView1<f64>) -> (f64, f64) {
        let l0 = self.log_joint(0, x);
        let l1 = self.log_joint(1, x);
        let top = l0.max(l1);
        let (e0, e1) = ((l0 - top).exp(), (l1 - top).exp());
        let z = e0 + e1;
        (e0 / z, e1 / z)
    }

    pub fn posterior_case(&self, x: ArrayView1<f64>) -> f64 {
        self.posteriors(x).1
    }
}
