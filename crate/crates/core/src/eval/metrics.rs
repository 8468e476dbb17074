//! Confusion-matrix metrics and ROC curves. Case is the positive class.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut c = ConfusionCounts::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t.is_case(), p.is_case()) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub accuracy_pct: f64,
    pub f1: f64,
    pub mcc: f64,
}

/// Accuracy (%), F1 and MCC. F1 and MCC are 0 when their denominators vanish.
pub fn confusion_metrics(c: &ConfusionCounts) -> Result<ConfusionMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Domain("no predictions to score".into()));
    }
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let accuracy_pct = 100.0 * (tp + tn) / total as f64;
    let f1_den = 2.0 * tp + fp + fn_;
    let f1 = if f1_den == 0.0 {
        0.0
    } else {
        2.0 * tp / f1_den
    };
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let mcc = if factors.contains(&0.0) {
        0.0
    } else {
        (tp * tn - fp * fn_) / factors.iter().product::<f64>().sqrt()
    };
    Ok(ConfusionMetrics {
        accuracy_pct,
        f1,
        mcc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from (0,0) to (1,1), both coordinates nondecreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC by sweeping a threshold down the distinct scores (tied scores enter
/// together), AUC by the trapezoid rule.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Domain(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let pos = labels.iter().filter(|l| l.is_case()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Domain("ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]].is_case() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let (x0, y0) = *points.last().expect("non-empty");
        let (x1, y1) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x1 - x0) * (y0 + y1) / 2.0;
        points.push((x1, y1));
    }
    Ok(RocCurve { points, auc })
}

/// TPR of a curve at a given FPR, interpolating linearly between vertices.
/// At an FPR shared by several vertices the highest TPR is used.
pub fn tpr_at(points: &[(f64, f64)], fpr: f64) -> f64 {
    let idx = points.partition_point(|p| p.0 <= fpr);
    if idx == 0 {
        return 0.0;
    }
    let (x0, y0) = points[idx - 1];
    if x0 == fpr || idx == points.len() {
        return y0;
    }
    let (x1, y1) = points[idx];
    y0 + (y1 - y0) * (fpr - x0) / (x1 - x0)
}

/// Vertical average of several curves on a grid of `steps + 1` FPR values,
/// with the (0, 0) origin prepended.
pub fn vertical_average(curves: &[Vec<(f64, f64)>], steps: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0)];
    if curves.is_empty() {
        out.push((1.0, 1.0));
        return out;
    }
    for g in 0..=steps {
        let f = g as f64 / steps as f64;
        let mean = curves.iter().map(|c| tpr_at(c, f)).sum::<f64>() / curves.len() as f64;
        out.push((f, mean));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Case, Control};

    #[test]
    fn hand_cases() {
        let m = confusion_metrics(&ConfusionCounts {
            tp: 5,
            tn: 5,
            fp: 0,
            fn_: 0,
        })
        .unwrap();
        assert_eq!((m.accuracy_pct, m.f1, m.mcc), (100.0, 1.0, 1.0));
        let m = confusion_metrics(&ConfusionCounts {
            tp: 0,
            tn: 0,
            fp: 5,
            fn_: 5,
        })
        .unwrap();
        assert_eq!((m.accuracy_pct, m.f1, m.mcc), (0.0, 0.0, -1.0));
        let m = confusion_metrics(&ConfusionCounts {
            tp: 4,
            fp: 1,
            tn: 3,
            fn_: 2,
        })
        .unwrap();
        assert_eq!(m.accuracy_pct, 70.0);
        assert_eq!(m.f1, 8.0 / 11.0);
        assert_eq!(m.mcc, 10.0 / 600f64.sqrt());
    }

    #[test]
    fn mcc_zero_denominator() {
        let m = confusion_metrics(&ConfusionCounts {
            tp: 6,
            fp: 4,
            tn: 0,
            fn_: 0,
        })
        .unwrap();
        assert_eq!(m.mcc, 0.0);
        assert_eq!(m.accuracy_pct, 60.0);
        assert!(confusion_metrics(&ConfusionCounts::default()).is_err());
    }

    #[test]
    fn perfect_and_tied_scores() {
        let labels = [Case, Control, Case, Control];
        let r = roc_auc(&[1.0, 0.0, 1.0, 0.0], &labels).unwrap();
        assert_eq!(r.auc, 1.0);
        let r = roc_auc(&[0.3; 4], &labels).unwrap();
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[Case, Case]).is_err());
    }

    #[test]
    fn interpolation() {
        let pts = vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (1.0, 1.0)];
        assert_eq!(tpr_at(&pts, 0.0), 0.5);
        assert_eq!(tpr_at(&pts, 0.25), 0.5);
        assert_eq!(tpr_at(&pts, 0.75), 0.75);
        assert_eq!(tpr_at(&pts, 1.0), 1.0);
        let avg = vertical_average(&[pts.clone(), vec![(0.0, 0.0), (1.0, 1.0)]], 4);
        assert_eq!(avg[0], (0.0, 0.0));
        assert_eq!(avg[1], (0.0, 0.25));
        assert_eq!(*avg.last().unwrap(), (1.0, 1.0));
    }
}
