use std::ops::Range;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion_metrics, roc_auc, vertical_average, ConfusionCounts};
use crate::classify::{fit, ClassifierSpec};
use crate::data::{transpose_for_classification, Label, LabelVector, MetaboliteMatrix};
use crate::error::{Error, Result};
use crate::rng::StreamSeed;
use crate::scaling::{scale, FittedScaler, ScalingMethod};

/// FPR grid used for vertical ROC averaging: 0, 0.01, …, 1.
pub const ROC_GRID_STEPS: usize = 100;
const MAX_FOLD_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: usize,
    pub iterations: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Fit scaling statistics on training folds only, instead of scaling the
    /// whole matrix once before splitting.
    pub scaling_inside_folds: bool,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan {
            folds: 5,
            iterations: 100,
            seed: 1,
            stratified: true,
            scaling_inside_folds: false,
        }
    }
}

impl CvPlan {
    fn validate(&self, y: &LabelVector) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("need at least 1 iteration".into()));
        }
        let smallest = y.n_case().min(y.n_control());
        if self.stratified && smallest < self.folds {
            return Err(Error::Config(format!(
                "stratified {}-fold CV needs at least {} samples per class, smallest class has {smallest}",
                self.folds, self.folds
            )));
        }
        if y.len() < self.folds {
            return Err(Error::Config(format!(
                "{} samples cannot fill {} folds",
                y.len(),
                self.folds
            )));
        }
        Ok(())
    }
}

/// Fold index per sample for one iteration.
///
/// Stratified: each class is shuffled and dealt round-robin, the control
/// deal continuing where the case deal stopped so fold sizes differ by at
/// most one. Otherwise all samples are shuffled and dealt, redrawing while
/// any fold holds a single class.
pub fn assign_folds<R: Rng + ?Sized>(
    labels: &[Label],
    folds: usize,
    stratified: bool,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut assignment = vec![0; labels.len()];
    if stratified {
        let mut offset = 0;
        for class in [Label::Case, Label::Control] {
            let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            idx.shuffle(rng);
            for (pos, i) in idx.iter().enumerate() {
                assignment[*i] = (offset + pos) % folds;
            }
            offset = (offset + idx.len()) % folds;
        }
        return Ok(assignment);
    }
    for _ in 0..=MAX_FOLD_RETRIES {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(rng);
        for (pos, i) in idx.iter().enumerate() {
            assignment[*i] = pos % folds;
        }
        let mixed = (0..folds).all(|f| {
            let mut seen = [false; 2];
            for (i, &a) in assignment.iter().enumerate() {
                if a == f {
                    seen[labels[i].is_case() as usize] = true;
                }
            }
            seen[0] && seen[1]
        });
        if mixed {
            return Ok(assignment);
        }
    }
    Err(Error::Numeric(format!(
        "could not draw {folds} folds with both classes after {MAX_FOLD_RETRIES} retries"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub accuracy_pct: f64,
    pub f1: f64,
    pub auc: f64,
    pub mcc: f64,
}

/// Pooled held-out results of one CV repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationResult {
    pub metrics: IterationMetrics,
    pub counts: ConfusionCounts,
    pub roc_points: Vec<(f64, f64)>,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub classifier: ClassifierSpec,
    pub scaling: ScalingMethod,
    pub contamination_rate: Option<f64>,
    pub cv: CvPlan,
}

/// Metrics averaged over iterations, with the per-iteration values kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy_pct: f64,
    pub f1: f64,
    pub auc: f64,
    pub mcc: f64,
    /// Vertically averaged ROC.
    pub roc_points: Vec<(f64, f64)>,
    pub config: ReportConfig,
    pub per_iteration: Vec<IterationMetrics>,
}

impl MetricReport {
    /// Two-column `fpr,tpr` CSV of the averaged curve.
    pub fn write_roc_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["fpr", "tpr"])
            .map_err(|e| Error::csv(path, e))?;
        for (f, t) in &self.roc_points {
            w.write_record([crate::data::format_value(*f), crate::data::format_value(*t)])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

struct Prepared {
    /// Samples × metabolites, already scaled when scaling happens up front.
    features: Array2<f64>,
    /// Raw metabolites × samples, kept when scaling is fitted per fold.
    raw: Option<Array2<f64>>,
}

fn prepare(m: &MetaboliteMatrix, method: &ScalingMethod, plan: &CvPlan) -> Prepared {
    if plan.scaling_inside_folds {
        Prepared {
            features: Array2::zeros((0, 0)),
            raw: Some(m.values().clone()),
        }
    } else {
        let scaled = scale(m, method);
        Prepared {
            features: transpose_for_classification(&scaled.values),
            raw: None,
        }
    }
}

fn run_iteration(
    prep: &Prepared,
    y: &[Label],
    method: &ScalingMethod,
    spec: &ClassifierSpec,
    plan: &CvPlan,
    iteration: usize,
) -> Result<IterationResult> {
    let mut rng = StreamSeed::new(plan.seed).stream("cv/folds", iteration as u64);
    let assignment = assign_folds(y, plan.folds, plan.stratified, &mut rng)?;
    let n = y.len();
    let mut scores = vec![0.0; n];
    let mut predicted = vec![Label::Control; n];

    for fold in 0..plan.folds {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        let (x_train, x_test) = match &prep.raw {
            None => (
                prep.features.select(Axis(0), &train),
                prep.features.select(Axis(0), &test),
            ),
            Some(raw) => {
                let train_cols = raw.select(Axis(1), &train);
                let scaler = FittedScaler::fit(&train_cols, method)?;
                let tr = scaler.transform(&train_cols)?;
                let te = scaler.transform(&raw.select(Axis(1), &test))?;
                (
                    transpose_for_classification(&tr),
                    transpose_for_classification(&te),
                )
            }
        };
        let y_train: Vec<Label> = train.iter().map(|&i| y[i]).collect();
        let model = fit(spec, x_train.view(), &y_train)?;
        for (row, &i) in x_test.rows().into_iter().zip(&test) {
            let s = model.predict_score(row)?;
            scores[i] = s;
            predicted[i] = model.label_for(s);
        }
    }

    let counts = ConfusionCounts::from_predictions(y, &predicted);
    let cm = confusion_metrics(&counts)?;
    let roc = roc_auc(&scores, y)?;
    Ok(IterationResult {
        metrics: IterationMetrics {
            accuracy_pct: cm.accuracy_pct,
            f1: cm.f1,
            auc: roc.auc,
            mcc: cm.mcc,
        },
        counts,
        roc_points: roc.points,
    })
}

/// Runs the iterations in `range`; each draws its folds from its own stream,
/// so any split of the range gives the same per-iteration results.
pub fn run_cv_iterations(
    m: &MetaboliteMatrix,
    y: &LabelVector,
    method: &ScalingMethod,
    spec: &ClassifierSpec,
    plan: &CvPlan,
    range: Range<usize>,
) -> Result<Vec<IterationResult>> {
    if y.len() != m.n_samples() {
        return Err(Error::Schema(format!(
            "{} labels for {} samples",
            y.len(),
            m.n_samples()
        )));
    }
    plan.validate(y)?;
    let prep = prepare(m, method, plan);
    range
        .into_par_iter()
        .map(|it| run_iteration(&prep, y.as_slice(), method, spec, plan, it))
        .collect()
}

/// Averages per-iteration results in index order.
pub fn summarize(results: &[IterationResult], config: ReportConfig) -> MetricReport {
    let n = results.len() as f64;
    let mean =
        |f: fn(&IterationMetrics) -> f64| results.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let curves: Vec<Vec<(f64, f64)>> = results.iter().map(|r| r.roc_points.clone()).collect();
    MetricReport {
        accuracy_pct: mean(|m| m.accuracy_pct),
        f1: mean(|m| m.f1),
        auc: mean(|m| m.auc),
        mcc: mean(|m| m.mcc),
        roc_points: vertical_average(&curves, ROC_GRID_STEPS),
        config,
        per_iteration: results.iter().map(|r| r.metrics).collect(),
    }
}

/// Repeated k-fold cross-validation of `spec` on `m` scaled by `method`.
pub fn run_cv(
    m: &MetaboliteMatrix,
    y: &LabelVector,
    method: &ScalingMethod,
    spec: &ClassifierSpec,
    plan: &CvPlan,
) -> Result<MetricReport> {
    let results = run_cv_iterations(m, y, method, spec, plan, 0..plan.iterations)?;
    Ok(summarize(
        &results,
        ReportConfig {
            classifier: spec.clone(),
            scaling: *method,
            contamination_rate: None,
            cv: plan.clone(),
        },
    ))
}
