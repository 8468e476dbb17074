//! Soft-margin SVM trained on the dual by sequential minimal optimisation.
//!
//! The solver maximises `Σα - ½ ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ)` subject to `Σ yᵢαᵢ = 0`
//! and `0 ≤ αᵢ ≤ C`. Each step picks the maximal violating index `i` and the
//! partner `j` with the largest second-order gain, then solves the
//! two-variable subproblem analytically. It stops when the KKT gap
//! `max_{I_up} -yG - min_{I_low} -yG` falls to `tol`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::sq_dist;
use crate::data::Label;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" | "radial" => Ok(KernelKind::Rbf),
            "linear" => Ok(KernelKind::Linear),
            _ => Err(Error::Config(format!(
                "unknown kernel `{s}` (expected rbf or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub gamma: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, gamma: f64) -> Self {
        Kernel { kind, gamma }
    }

    pub fn rbf(gamma: f64) -> Self {
        Kernel::new(KernelKind::Rbf, gamma)
    }

    pub fn linear() -> Self {
        Kernel::new(KernelKind::Linear, 0.0)
    }

    pub fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match self.kind {
            KernelKind::Rbf => (-self.gamma * sq_dist(a, b)).exp(),
            KernelKind::Linear => a.dot(&b),
        }
    }

    pub fn matrix(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SmoSolution {
    /// `Σα - ½ αᵀQα` with `Q = yyᵀ∘K`.
    pub fn dual_objective(&self, k: &Array2<f64>, y: &[f64]) -> f64 {
        dual_objective(&self.alpha, k, y)
    }
}

pub(crate) fn dual_objective(alpha: &[f64], k: &Array2<f64>, y: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Solves the dual for kernel matrix `k` and labels `y ∈ {-1, +1}`.
///
/// Gives up after `10·n²` pair updates (at least 100 000) and returns the
/// current iterate with `converged = false`.
pub fn smo_solve(k: &Array2<f64>, y: &[f64], c: f64, tol: f64) -> Result<SmoSolution> {
    let n = y.len();
    if k.dim() != (n, n) {
        return Err(Error::Domain(format!(
            "kernel matrix is {:?}, expected {n}×{n}",
            k.dim()
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Domain("labels must be ±1".into()));
    }
    let max_iter = (10 * n * n).max(100_000);
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα - Σα
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // maximal violating i
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 {
                !upper(alpha[t])
            } else {
                !lower(alpha[t])
            };
            if in_up && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        // partner j by second-order gain
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let in_low = if y[t] > 0.0 {
                !lower(alpha[t])
            } else {
                !upper(alpha[t])
            };
            if !in_low {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            let diff = gmax - v;
            if diff > 0.0 {
                let mut quad = k[(i, i)] + k[(t, t)] - 2.0 * k[(i, t)];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let gain = -(diff * diff) / quad;
                if gain < best {
                    best = gain;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel.filter(|_| gmax - gmin > tol) else {
            converged = true;
            break;
        };

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = k[(i, i)] + k[(j, j)] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[(i, i)] + k[(j, j)] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
        iterations += 1;
    }

    let bias = -rho(&alpha, &grad, y, c);
    Ok(SmoSolution {
        alpha,
        bias,
        converged,
        iterations,
    })
}

/// Offset from the KKT conditions: the mean of `yG` over free vectors, or the
/// midpoint of the feasible interval when none are free.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Fitted SVM: support vectors, their `αᵢyᵢ` and the bias.
#[derive(Debug, Clone)]
pub struct SvmModel {
    support: Array2<f64>,
    coef: Array1<f64>,
    bias: f64,
    kernel: Kernel,
    converged: bool,
}

impl SvmModel {
    pub(crate) fn fit(
        x: ArrayView2<f64>,
        labels: &[Label],
        kernel: Kernel,
        c: f64,
        tol: f64,
    ) -> Self {
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let k = kernel.matrix(x);
        let sol = smo_solve(&k, &y, c, tol).expect("kernel matrix built from x");
        if !sol.converged {
            log::warn!(
                "SMO stopped after {} updates without meeting tol {tol}",
                sol.iterations
            );
        }
        let sv: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
        SvmModel {
            support: x.select(ndarray::Axis(0), &sv),
            coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
            bias: sol.bias,
            kernel,
            converged: sol.converged,
        }
    }

    pub fn n_features(&self) -> usize {
        self.support.ncols()
    }

    pub fn n_support(&self) -> usize {
        self.coef.len()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// `f(x) = Σ αᵢyᵢ K(x, xᵢ) + b`.
    pub fn decision_value(&self, x: ArrayView1<f64>) -> f64 {
        self.support
            .rows()
            .into_iter()
            .zip(self.coef.iter())
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }
}
