use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use metascale::classify::{ClassifierSpec, Family};
use metascale::data::{align_labels, read_labels_csv, write_labels_csv};
use metascale::de::{de_call, DeConfig};
use metascale::eval::{run_cv, CvPlan};
use metascale::synth::{
    contaminate, generate, rate_key, ContaminationPlan, GroundTruth, NbParams, SynthConfig,
};
use metascale::{ingest_csv, scale, MetaboliteMatrix, RobustParams, ScalingMethod};

use crate::args::{ContaminateArgs, DeArgs, EvaluateArgs, RocPlotArgs, ScaleArgs, SimulateArgs};
use crate::manifest::Outcome;
use crate::svg::{self, Curve};
use crate::Failure;

/// `<path>` with `suffix` appended to the file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn manifest_for(output: &Path) -> PathBuf {
    sibling(output, ".manifest.json")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Schema(format!("{}: {e}", path.display())).into())
}

/// The `method=...` comment of a scaled matrix, if the file has one.
fn scaling_comment(path: &Path) -> Result<Option<String>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    for line in BufReader::new(file).lines() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        match line.strip_prefix('#') {
            Some(c) if c.trim_start().starts_with("method=") => {
                return Ok(Some(c.trim().to_string()))
            }
            Some(_) => continue,
            None => break,
        }
    }
    Ok(None)
}

pub fn scale_cmd(a: &ScaleArgs) -> Result<Outcome> {
    let m = MetaboliteMatrix::read_csv(&a.input, a.transpose_input)?;
    let mut inputs = vec![a.input.clone()];
    if let Some(labels) = &a.labels {
        align_labels(&m, &read_labels_csv(labels)?)?;
        inputs.push(labels.clone());
    }
    let method =
        ScalingMethod::with_params(a.method, RobustParams::new(a.mad_constant, a.z_alpha)?);
    let scaled = scale(&m, &method);
    if !scaled.flagged_rows.is_empty() {
        log::warn!(
            "{} rows have a zero denominator and were set to 0",
            scaled.flagged_rows.len()
        );
    }
    let flagged = a
        .flagged
        .clone()
        .unwrap_or_else(|| sibling(&a.output, ".flagged.csv"));
    scaled.write_csv(&a.output)?;
    scaled.write_flagged_csv(&flagged)?;
    Ok(Outcome {
        inputs,
        outputs: vec![a.output.clone(), flagged],
        seed: None,
        derived: BTreeMap::new(),
        manifest_path: manifest_for(&a.output),
    })
}

pub fn simulate_cmd(a: &SimulateArgs) -> Result<Outcome> {
    let cfg = SynthConfig {
        n_case: a.subjects_case,
        n_control: a.subjects_control,
        n_metabolites: a.metabolites,
        n_de: a.de,
        nb_control: NbParams::new(a.control_r, a.control_p)?,
        nb_case_de: NbParams::new(a.case_r, a.case_p)?,
        seed: a.seed,
    };
    let (m, y, truth) = generate(&cfg)?;
    create_dir(&a.out_dir)?;
    let matrix = a.out_dir.join("matrix.csv");
    let labels = a.out_dir.join("labels.csv");
    let truth_path = a.out_dir.join("truth.json");
    m.write_csv(&matrix)?;
    write_labels_csv(&labels, m.sample_ids(), &y)?;
    write_json(&truth_path, &truth)?;
    Ok(Outcome {
        inputs: vec![],
        outputs: vec![matrix, labels, truth_path],
        seed: Some(a.seed),
        derived: BTreeMap::new(),
        manifest_path: a.out_dir.join("manifest.json"),
    })
}

pub fn contaminate_cmd(a: &ContaminateArgs) -> Result<Outcome> {
    let m = MetaboliteMatrix::read_csv(&a.input, false)?;
    let mut inputs = vec![a.input.clone()];
    let mut truth = match &a.truth {
        Some(p) => {
            inputs.push(p.clone());
            read_json::<GroundTruth>(p)?
        }
        None => GroundTruth::default(),
    };
    let plan = ContaminationPlan {
        rates: a.rates.clone(),
        mu: a.mu,
        sigma: a.sigma,
        seed: a.seed,
        cumulative: !a.no_cumulative,
    };
    let dist = plan.resolve(&m)?;
    let results = contaminate(&m, &plan)?;
    create_dir(&a.out_dir)?;
    let mut outputs = Vec::new();
    truth.outlier_cells.clear();
    for r in &results {
        let key = rate_key(r.rate);
        let path = a.out_dir.join(format!("contaminated_{key}.csv"));
        r.matrix.write_csv(&path)?;
        outputs.push(path);
        truth.outlier_cells.insert(key, r.outlier_cells.clone());
    }
    let truth_path = a.out_dir.join("truth.json");
    write_json(&truth_path, &truth)?;
    outputs.push(truth_path);
    Ok(Outcome {
        inputs,
        outputs,
        seed: Some(a.seed),
        derived: BTreeMap::from([("mu".into(), dist.mu), ("sigma".into(), dist.sigma)]),
        manifest_path: a.out_dir.join("manifest.json"),
    })
}

pub fn evaluate_cmd(a: &EvaluateArgs) -> Result<Outcome> {
    let (m, y) = ingest_csv(&a.input, &a.labels, a.transpose_input)?;
    if let Some(c) = scaling_comment(&a.input)? {
        log::warn!(
            "input is already scaled ({c}); it will be scaled again with {}",
            a.scaling
        );
    }
    let method =
        ScalingMethod::with_params(a.scaling, RobustParams::new(a.mad_constant, a.z_alpha)?);
    let spec = ClassifierSpec {
        family: a.classifier,
        knn_k: a.knn_k,
        svm_c: a.svm_c,
        svm_gamma: a.svm_gamma,
        svm_kernel: a.svm_kernel,
        svm_tol: a.svm_tol,
        plsda_components: a.plsda_q,
        nb_var_floor: a.nb_var_floor,
    };
    let plan = CvPlan {
        folds: a.folds,
        iterations: a.iterations,
        seed: a.seed,
        stratified: !a.no_stratify,
        scaling_inside_folds: a.scale_inside_folds,
    };
    let mut derived = BTreeMap::new();
    if spec.family == Family::Svm {
        derived.insert(
            "svm_gamma".into(),
            a.svm_gamma.unwrap_or(1.0 / m.n_metabolites() as f64),
        );
    }
    let mut report = run_cv(&m, &y, &method, &spec, &plan)?;
    report.config.contamination_rate = a.contamination_rate;
    write_json(&a.output, &report)?;
    let mut outputs = vec![a.output.clone()];
    if let Some(roc) = &a.roc {
        report.write_roc_csv(roc)?;
        outputs.push(roc.clone());
    }
    Ok(Outcome {
        inputs: vec![a.input.clone(), a.labels.clone()],
        outputs,
        seed: Some(a.seed),
        derived,
        manifest_path: manifest_for(&a.output),
    })
}

/// Reads an `fpr,tpr` file; errors name the offending line.
pub fn read_roc_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let bad = |line: usize, why: String| -> anyhow::Error {
        Failure::Schema(format!("{} line {line}: {why}", path.display())).into()
    };
    let mut points = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            seen_header = true;
            if line.replace(' ', "") != "fpr,tpr" {
                return Err(bad(
                    i + 1,
                    format!("expected header `fpr,tpr`, found `{line}`"),
                ));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(bad(
                i + 1,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let mut xy = [0.0; 2];
        for (slot, f) in xy.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| bad(i + 1, format!("`{f}` is not a rate in [0, 1]")))?;
        }
        points.push((xy[0], xy[1]));
    }
    if points.is_empty() {
        return Err(Failure::Schema(format!("{}: no ROC points", path.display())).into());
    }
    Ok(points)
}

pub fn roc_plot_cmd(a: &RocPlotArgs) -> Result<Outcome> {
    let curves = a
        .inputs
        .iter()
        .map(|p| {
            Ok(Curve {
                name: p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                points: read_roc_csv(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let svg = svg::render(&curves, a.title.as_deref());
    fs::write(&a.output, svg).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(Outcome {
        inputs: a.inputs.clone(),
        outputs: vec![a.output.clone()],
        seed: None,
        derived: BTreeMap::new(),
        manifest_path: manifest_for(&a.output),
    })
}

pub fn de_cmd(a: &DeArgs) -> Result<Outcome> {
    let (m, y) = ingest_csv(&a.input, &a.labels, a.transpose_input)?;
    if let Some(c) = scaling_comment(&a.input)? {
        log::warn!(
            "input is a scaled matrix ({c}); fold changes of scaled values can cross zero, \
             consider fold changes from the raw matrix"
        );
    }
    let cfg = DeConfig {
        alpha: a.alpha,
        fc_threshold: a.fc,
        use_welch: !a.pooled,
        log_fc: a.log_fc,
    };
    let result = de_call(&m, &y, &cfg)?;
    result.write_csv(&a.output)?;
    Ok(Outcome {
        inputs: vec![a.input.clone(), a.labels.clone()],
        outputs: vec![a.output.clone()],
        seed: None,
        derived: BTreeMap::new(),
        manifest_path: manifest_for(&a.output),
    })
}
