use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use metascale::classify::{Family, KernelKind};
use metascale::ScalingKind;
use serde::{Deserialize, Serialize};

const METHODS: &str = "auto|range|pareto|vast|level|weighted";

#[derive(Debug, Parser)]
#[command(
    name = "metascale",
    version,
    about = "Outlier-robust scaling and benchmarking for metabolomics matrices"
)]
pub struct Cli {
    /// Replay a run from its manifest and verify the outputs.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Scale every row of a metabolite-by-sample matrix.
    Scale(ScaleArgs),
    /// Draw a negative-binomial case/control matrix with planted DE rows.
    Simulate(SimulateArgs),
    /// Replace random cells with Gaussian outliers at one or more rates.
    Contaminate(ContaminateArgs),
    /// Repeated k-fold cross-validation of a classifier on a scaled matrix.
    Evaluate(EvaluateArgs),
    /// Draw ROC curves from `fpr,tpr` CSV files as an SVG.
    RocPlot(RocPlotArgs),
    /// Call differential metabolites by t-test and fold change.
    De(DeArgs),
}

impl Command {
    /// Copy with paired on/off flags collapsed to their effective value.
    pub fn resolved(&self) -> Command {
        let mut c = self.clone();
        match &mut c {
            Command::Contaminate(a) => a.cumulative = !a.no_cumulative,
            Command::Evaluate(a) => a.stratify = !a.no_stratify,
            Command::De(a) => a.welch = !a.pooled,
            _ => {}
        }
        c
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Scale(_) => "scale",
            Command::Simulate(_) => "simulate",
            Command::Contaminate(_) => "contaminate",
            Command::Evaluate(_) => "evaluate",
            Command::RocPlot(_) => "roc-plot",
            Command::De(_) => "de",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScaleArgs {
    #[arg(long, value_name = METHODS)]
    pub method: ScalingKind,
    #[arg(long)]
    pub input: PathBuf,
    /// Sample labels; checked against the matrix columns.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Where to list rows with a zero denominator [default: <output>.flagged.csv]
    #[arg(long)]
    pub flagged: Option<PathBuf>,
    /// Consistency constant dividing the median absolute deviation.
    #[arg(long, default_value_t = metascale::robust::DEFAULT_MAD_CONSTANT)]
    pub mad_constant: f64,
    /// Upper-tail probability whose normal quantile bounds unit weights.
    #[arg(long, default_value_t = metascale::robust::DEFAULT_ALPHA)]
    pub z_alpha: f64,
    /// Input rows are samples and columns metabolites.
    #[arg(long)]
    pub transpose_input: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 106)]
    pub subjects_case: usize,
    #[arg(long, default_value_t = 91)]
    pub subjects_control: usize,
    #[arg(long, default_value_t = 236)]
    pub metabolites: usize,
    /// Number of differentially abundant rows.
    #[arg(long, default_value_t = 118)]
    pub de: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Negative-binomial size for control cells and all non-DE rows.
    #[arg(long, default_value_t = 10.0)]
    pub control_r: f64,
    #[arg(long, default_value_t = 0.5)]
    pub control_p: f64,
    /// Negative-binomial size for case cells of DE rows.
    #[arg(long, default_value_t = 30.0)]
    pub case_r: f64,
    #[arg(long, default_value_t = 0.5)]
    pub case_p: f64,
    /// Directory for matrix.csv, labels.csv, truth.json and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ContaminateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.03,0.05,0.07")]
    pub rates: Vec<f64>,
    /// Outlier mean [default: 5 × matrix maximum]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Outlier sd [default: sample sd of all cells]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Each rate extends the previous rate's cells (the default).
    #[arg(long, overrides_with = "no_cumulative")]
    pub cumulative: bool,
    /// Draw each rate's cells independently.
    #[arg(long)]
    pub no_cumulative: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Ground truth from `simulate`; its DE ids are carried into the new truth file.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for contaminated_<rate>.csv, truth.json and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_name = "knn|nb|svm|plsda", default_value = "knn")]
    pub classifier: Family,
    #[arg(long, value_name = METHODS)]
    pub scaling: ScalingKind,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Stratify folds by class (the default).
    #[arg(long, overrides_with = "no_stratify")]
    pub stratify: bool,
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    /// RBF width [default: 1 / number of metabolites]
    #[arg(long)]
    pub svm_gamma: Option<f64>,
    #[arg(long, value_name = "rbf|linear", default_value = "rbf")]
    pub svm_kernel: KernelKind,
    #[arg(long, default_value_t = 1e-3)]
    pub svm_tol: f64,
    #[arg(long, default_value_t = 2)]
    pub plsda_q: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub nb_var_floor: f64,
    #[arg(long, default_value_t = metascale::robust::DEFAULT_MAD_CONSTANT)]
    pub mad_constant: f64,
    #[arg(long, default_value_t = metascale::robust::DEFAULT_ALPHA)]
    pub z_alpha: f64,
    /// Fit scaling statistics on the training folds only.
    #[arg(long)]
    pub scale_inside_folds: bool,
    /// Outlier rate of the input, echoed into the report.
    #[arg(long)]
    pub contamination_rate: Option<f64>,
    #[arg(long)]
    pub transpose_input: bool,
    /// Report JSON.
    #[arg(long)]
    pub output: PathBuf,
    /// Averaged ROC as `fpr,tpr` CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RocPlotArgs {
    /// ROC CSV files; the legend uses their file stems.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Minimal fold change (either direction) on the ratio scale.
    #[arg(long, default_value_t = 1.5)]
    pub fc: f64,
    /// Welch's unequal-variance test (the default).
    #[arg(long, overrides_with = "pooled")]
    pub welch: bool,
    /// Pooled-variance Student test.
    #[arg(long)]
    pub pooled: bool,
    /// Report log2 fold changes.
    #[arg(long)]
    pub log_fc: bool,
    #[arg(long)]
    pub transpose_input: bool,
    #[arg(long)]
    pub output: PathBuf,
}
