//! Binary classifiers behind one fit/predict interface.
//!
//! Every model exposes a continuous score (larger means more case-like) for
//! ROC analysis and a hard label obtained by thresholding that score:
//! 0.5 for k-NN, naive Bayes and PLS-DA, 0 for the SVM decision value.

mod knn;
mod nb;
mod plsda;
mod svm;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

pub use knn::KnnModel;
pub use nb::NbModel;
pub use plsda::{fit_plsda, PlsFit};
pub use svm::{smo_solve, Kernel, KernelKind, SmoSolution, SvmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Knn,
    Nb,
    Svm,
    Plsda,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Knn, Family::Nb, Family::Svm, Family::Plsda];

    pub fn name(self) -> &'static str {
        match self {
            Family::Knn => "knn",
            Family::Nb => "nb",
            Family::Svm => "svm",
            Family::Plsda => "plsda",
        }
    }

    /// Score at or above which a sample is labelled case.
    pub fn threshold(self) -> f64 {
        match self {
            Family::Svm => 0.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown classifier `{s}` (expected one of knn, nb, svm, plsda)"
                ))
            })
    }
}

/// Classifier family and every hyperparameter, all with declared defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub family: Family,
    pub knn_k: usize,
    pub svm_c: f64,
    /// RBF width; `None` means `1 / n_features`.
    pub svm_gamma: Option<f64>,
    pub svm_kernel: KernelKind,
    pub svm_tol: f64,
    pub plsda_components: usize,
    pub nb_var_floor: f64,
}

impl ClassifierSpec {
    pub fn new(family: Family) -> Self {
        ClassifierSpec {
            family,
            knn_k: 5,
            svm_c: 1.0,
            svm_gamma: None,
            svm_kernel: KernelKind::Rbf,
            svm_tol: 1e-3,
            plsda_components: 2,
            nb_var_floor: 1e-9,
        }
    }

    /// Checks hyperparameters against a training set of `n` samples × `p` features.
    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        match self.family {
            Family::Knn => {
                if self.knn_k == 0 || self.knn_k.is_multiple_of(2) {
                    return Err(Error::Config(format!("k must be odd, got {}", self.knn_k)));
                }
                if self.knn_k > n {
                    return Err(Error::Config(format!(
                        "k = {} exceeds the {n} training samples",
                        self.knn_k
                    )));
                }
            }
            Family::Nb => {
                if !(self.nb_var_floor > 0.0) {
                    return Err(Error::Config("variance floor must be positive".into()));
                }
            }
            Family::Svm => {
                if !(self.svm_c > 0.0) || !(self.svm_tol > 0.0) {
                    return Err(Error::Config("svm C and tolerance must be positive".into()));
                }
                if matches!(self.svm_gamma, Some(g) if !(g > 0.0)) {
                    return Err(Error::Config("svm gamma must be positive".into()));
                }
            }
            Family::Plsda => {
                let q = self.plsda_components;
                if q == 0 || q > (n.saturating_sub(1)).min(p) {
                    return Err(Error::Config(format!(
                        "PLS-DA components must lie in 1..={}, got {q}",
                        (n.saturating_sub(1)).min(p)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Knn(KnnModel),
    Nb(NbModel),
    Svm(SvmModel),
    Plsda(PlsFit),
}

/// Fits `spec` on a sample-major feature table.
pub fn fit(spec: &ClassifierSpec, x: ArrayView2<f64>, y: &[Label]) -> Result<TrainedClassifier> {
    let (n, p) = x.dim();
    if n != y.len() {
        return Err(Error::Domain(format!("{n} samples but {} labels", y.len())));
    }
    if p == 0 {
        return Err(Error::Domain("feature table has no columns".into()));
    }
    let cases = y.iter().filter(|l| l.is_case()).count();
    if cases == 0 || cases == n {
        return Err(Error::Fit("training labels contain a single class".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite feature value".into()));
    }
    spec.validate(n, p)?;
    Ok(match spec.family {
        Family::Knn => TrainedClassifier::Knn(KnnModel::fit(x, y, spec.knn_k)),
        Family::Nb => TrainedClassifier::Nb(NbModel::fit(x, y, spec.nb_var_floor)),
        Family::Svm => {
            let gamma = spec.svm_gamma.unwrap_or(1.0 / p as f64);
            let kernel = Kernel::new(spec.svm_kernel, gamma);
            TrainedClassifier::Svm(SvmModel::fit(x, y, kernel, spec.svm_c, spec.svm_tol))
        }
        Family::Plsda => {
            let y01: Vec<f64> = y.iter().map(|l| l.indicator()).collect();
            TrainedClassifier::Plsda(fit_plsda(x, &y01, spec.plsda_components)?)
        }
    })
}

impl TrainedClassifier {
    pub fn family(&self) -> Family {
        match self {
            TrainedClassifier::Knn(_) => Family::Knn,
            TrainedClassifier::Nb(_) => Family::Nb,
            TrainedClassifier::Svm(_) => Family::Svm,
            TrainedClassifier::Plsda(_) => Family::Plsda,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedClassifier::Knn(m) => m.n_features(),
            TrainedClassifier::Nb(m) => m.n_features(),
            TrainedClassifier::Svm(m) => m.n_features(),
            TrainedClassifier::Plsda(m) => m.n_features(),
        }
    }

    /// Continuous score; larger means more case-like.
    pub fn predict_score(&self, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Domain(format!(
                "query has {} features, model was trained on {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(match self {
            TrainedClassifier::Knn(m) => m.score(x),
            TrainedClassifier::Nb(m) => m.posterior_case(x),
            TrainedClassifier::Svm(m) => m.decision_value(x),
            TrainedClassifier::Plsda(m) => m.predict(x),
        })
    }

    pub fn predict_label(&self, x: ArrayView1<f64>) -> Result<Label> {
        let s = self.predict_score(x)?;
        Ok(self.label_for(s))
    }

    pub fn label_for(&self, score: f64) -> Label {
        if score >= self.family().threshold() {
            Label::Case
        } else {
            Label::Control
        }
    }

    /// Scores every row of a sample-major table.
    pub fn predict_scores(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        x.rows()
            .into_iter()
            .map(|r| self.predict_score(r))
            .collect()
    }
}

pub(crate) fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_class_is_a_fit_error() {
        let x = array![[0.0], [1.0]];
        let err = fit(
            &ClassifierSpec::new(Family::Nb),
            x.view(),
            &[Label::Case, Label::Case],
        );
        assert!(matches!(err, Err(Error::Fit(_))));
    }

    #[test]
    fn k_larger_than_training_set() {
        let x = array![[0.0], [1.0], [2.0]];
        let y = [Label::Case, Label::Control, Label::Case];
        let spec = ClassifierSpec {
            knn_k: 5,
            ..ClassifierSpec::new(Family::Knn)
        };
        assert!(matches!(fit(&spec, x.view(), &y), Err(Error::Config(_))));
        let spec = ClassifierSpec {
            knn_k: 2,
            ..ClassifierSpec::new(Family::Knn)
        };
        assert!(matches!(fit(&spec, x.view(), &y), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let m = fit(
            &ClassifierSpec {
                knn_k: 1,
                ..ClassifierSpec::new(Family::Knn)
            },
            x.view(),
            &[Label::Case, Label::Control],
        )
        .unwrap();
        assert!(m.predict_score(array![1.0].view()).is_err());
    }

    #[test]
    fn plsda_component_bounds() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]];
        let y = [Label::Case, Label::Control, Label::Case];
        let spec = ClassifierSpec {
            plsda_components: 3,
            ..ClassifierSpec::new(Family::Plsda)
        };
        assert!(fit(&spec, x.view(), &y).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("PLSDA".parse::<Family>().unwrap(), Family::Plsda);
        assert!("lda".parse::<Family>().is_err());
    }
}
