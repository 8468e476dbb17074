//! Matrix and label containers plus their CSV schema.
//!
//! The canonical in-memory layout is metabolites-as-rows: row `i` holds one
//! metabolite across every sample, so every scaler reads row statistics.
//! Classifiers take the transposed, sample-major view from
//! [`transpose_for_classification`].
//!
//! Matrix CSV: first row is `metabolite_id,<sample ids...>`, then one row per
//! metabolite. Lines starting with `#` are comments. Labels CSV has the header
//! `sample_id,label` with labels `case`/`control` (case-insensitive).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Binary class of a sample. `Case` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Case,
    Control,
}

impl Label {
    pub fn is_case(self) -> bool {
        self == Label::Case
    }

    /// 1 for case, 0 for control.
    pub fn indicator(self) -> f64 {
        if self.is_case() {
            1.0
        } else {
            0.0
        }
    }

    /// +1 for case, -1 for control.
    pub fn sign(self) -> f64 {
        if self.is_case() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Case => Label::Control,
            Label::Control => Label::Case,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Case => "case",
            Label::Control => "control",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case" => Ok(Label::Case),
            "control" => Ok(Label::Control),
            other => Err(Error::Schema(format!(
                "label `{other}` is neither `case` nor `control`"
            ))),
        }
    }
}

/// Per-sample labels aligned to matrix columns; both classes are present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Label>", into = "Vec<Label>")]
pub struct LabelVector(Vec<Label>);

impl LabelVector {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        let cases = labels.iter().filter(|l| l.is_case()).count();
        if cases == 0 || cases == labels.len() {
            return Err(Error::Schema(
                "labels must contain both case and control samples".into(),
            ));
        }
        Ok(LabelVector(labels))
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_case(&self) -> usize {
        self.0.iter().filter(|l| l.is_case()).count()
    }

    pub fn n_control(&self) -> usize {
        self.len() - self.n_case()
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.0.iter().copied()
    }
}

impl TryFrom<Vec<Label>> for LabelVector {
    type Error = Error;

    fn try_from(v: Vec<Label>) -> Result<Self> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<Label> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for LabelVector {
    type Output = Label;

    fn index(&self, i: usize) -> &Label {
        &self.0[i]
    }
}

/// Dense metabolites × samples matrix of finite concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaboliteMatrix {
    values: Array2<f64>,
    metabolite_ids: Vec<String>,
    sample_ids: Vec<String>,
}

impl MetaboliteMatrix {
    pub fn new(
        values: Array2<f64>,
        metabolite_ids: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows < 1 || cols < 2 {
            return Err(Error::Schema(format!(
                "matrix must have at least 1 metabolite and 2 samples, got {rows}×{cols}"
            )));
        }
        if metabolite_ids.len() != rows || sample_ids.len() != cols {
            return Err(Error::Schema(format!(
                "id lists ({} metabolites, {} samples) do not match matrix shape {rows}×{cols}",
                metabolite_ids.len(),
                sample_ids.len()
            )));
        }
        ensure_unique("metabolite", &metabolite_ids)?;
        ensure_unique("sample", &sample_ids)?;
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Parse {
                row: metabolite_ids[i].clone(),
                column: sample_ids[j].clone(),
                value: v.to_string(),
            });
        }
        Ok(MetaboliteMatrix {
            values,
            metabolite_ids,
            sample_ids,
        })
    }

    /// Builds a matrix with generated ids `M1..` and `S1..`.
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        let m = (1..=rows).map(|i| format!("M{i}")).collect();
        let s = (1..=cols).map(|j| format!("S{j}")).collect();
        MetaboliteMatrix::new(values, m, s)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn metabolite_ids(&self) -> &[String] {
        &self.metabolite_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_metabolites(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    /// Same ids, new values. Values must keep the shape and stay finite.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        MetaboliteMatrix::new(values, self.metabolite_ids.clone(), self.sample_ids.clone())
    }

    /// Keeps the listed sample columns, in the given order.
    pub fn select_samples(&self, columns: &[usize]) -> Result<Self> {
        let values = self.values.select(ndarray::Axis(1), columns);
        let ids = columns
            .iter()
            .map(|&j| self.sample_ids[j].clone())
            .collect();
        MetaboliteMatrix::new(values, self.metabolite_ids.clone(), ids)
    }

    /// SHA-256 over ids and the bit patterns of every cell.
    pub fn digest(&self) -> String {
        digest_table(&self.values, &self.metabolite_ids, &self.sample_ids)
    }

    pub fn read_csv(path: impl AsRef<Path>, transpose: bool) -> Result<Self> {
        read_matrix_csv(path.as_ref(), transpose)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_matrix_csv(
            path.as_ref(),
            &[],
            &self.values,
            &self.metabolite_ids,
            &self.sample_ids,
        )
    }
}

pub(crate) fn digest_table(values: &Array2<f64>, rows: &[String], cols: &[String]) -> String {
    let mut h = Sha256::new();
    for id in rows.iter().chain(cols) {
        h.update(id.as_bytes());
        h.update([0u8]);
    }
    h.update((values.nrows() as u64).to_le_bytes());
    h.update((values.ncols() as u64).to_le_bytes());
    for v in values.iter() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn ensure_unique(kind: &str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Schema(format!("duplicate {kind} id `{id}`")));
        }
    }
    Ok(())
}

fn parse_cell(raw: &str, row: &str, column: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            row: row.to_string(),
            column: column.to_string(),
            value: raw.to_string(),
        })
}

fn read_matrix_csv(path: &Path, transpose: bool) -> Result<MetaboliteMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();

    let mut row_ids = Vec::new();
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let id = record.get(0).unwrap_or_default().to_string();
        if record.len() != header.len() + 1 {
            return Err(Error::Schema(format!(
                "row `{id}` has {} values, header names {} columns",
                record.len().saturating_sub(1),
                header.len()
            )));
        }
        for (raw, col) in record.iter().skip(1).zip(&header) {
            // ids are reported in metabolite/sample terms regardless of file orientation
            let (m, s) = if transpose { (col, &id) } else { (&id, col) };
            cells.push(parse_cell(raw, m, s)?);
        }
        row_ids.push(id);
    }

    let file_shape = (row_ids.len(), header.len());
    let values = Array2::from_shape_vec(file_shape, cells)
        .map_err(|e| Error::Schema(format!("ragged matrix: {e}")))?;
    if transpose {
        MetaboliteMatrix::new(
            values.reversed_axes().as_standard_layout().to_owned(),
            header,
            row_ids,
        )
    } else {
        MetaboliteMatrix::new(values, row_ids, header)
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn write_matrix_csv(
    path: &Path,
    comments: &[String],
    values: &Array2<f64>,
    row_ids: &[String],
    col_ids: &[String],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| Error::io(path, e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["metabolite_id".to_string()];
    header.extend(col_ids.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (id, row) in row_ids.iter().zip(values.rows()) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(id.clone());
        rec.extend(row.iter().map(|&v| format_value(v)));
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a `sample_id,label` file into a map.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<HashMap<String, Label>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut map = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        if record.len() != 2 {
            return Err(Error::Schema(format!(
                "labels file must have two columns, found {}",
                record.len()
            )));
        }
        let id = record[0].to_string();
        let label: Label = record[1].parse()?;
        if map.insert(id.clone(), label).is_some() {
            return Err(Error::Schema(format!(
                "duplicate sample id `{id}` in labels"
            )));
        }
    }
    Ok(map)
}

/// Orders labels to match the matrix columns.
pub fn align_labels(
    matrix: &MetaboliteMatrix,
    labels: &HashMap<String, Label>,
) -> Result<LabelVector> {
    let aligned = matrix
        .sample_ids()
        .iter()
        .map(|id| {
            labels
                .get(id)
                .copied()
                .ok_or_else(|| Error::Alignment(id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    LabelVector::new(aligned)
}

pub fn write_labels_csv(
    path: impl AsRef<Path>,
    sample_ids: &[String],
    labels: &LabelVector,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["sample_id", "label"])
        .map_err(|e| Error::csv(path, e))?;
    for (id, l) in sample_ids.iter().zip(labels.iter()) {
        w.write_record([id.as_str(), &l.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a matrix CSV and its labels, aligned to the matrix column order.
pub fn ingest_csv(
    matrix_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    transpose: bool,
) -> Result<(MetaboliteMatrix, LabelVector)> {
    let matrix = MetaboliteMatrix::read_csv(matrix_path, transpose)?;
    let labels = read_labels_csv(labels_path)?;
    let aligned = align_labels(&matrix, &labels)?;
    Ok((matrix, aligned))
}

/// Sample-major copy: output row `k` is input column `k`.
pub fn transpose_for_classification(values: &Array2<f64>) -> Array2<f64> {
    values.t().as_standard_layout().into_owned()
}
