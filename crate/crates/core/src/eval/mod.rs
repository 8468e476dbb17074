//! Repeated k-fold cross-validation and the metrics reported for it.

mod cv;
mod metrics;

pub use cv::{
    assign_folds, run_cv, run_cv_iterations, summarize, CvPlan, IterationMetrics, IterationResult,
    MetricReport, ReportConfig, ROC_GRID_STEPS,
};
pub use metrics::{
    confusion_metrics, roc_auc, tpr_at, vertical_average, ConfusionCounts, ConfusionMetrics,
    RocCurve,
};
