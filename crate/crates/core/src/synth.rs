//! Synthetic case/control count matrices and outlier contamination.
//!
//! Counts are negative-binomial, drawn as a gamma–Poisson mixture. A subset
//! of metabolites is differentially expressed: their case cells come from a
//! second NB distribution. Contamination replaces a fraction of cells with
//! draws from a normal located above the matrix maximum; by default each
//! rate's cell set extends the previous one.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{Label, LabelVector, MetaboliteMatrix};
use crate::error::{Error, Result};
use crate::rng::StreamSeed;

/// Negative binomial `NB(r, p)`: failures before the `r`-th success with
/// success probability `p`. Mean `r(1-p)/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub r: f64,
    pub p: f64,
}

impl NbParams {
    pub fn new(r: f64, p: f64) -> Result<Self> {
        let nb = NbParams { r, p };
        nb.validate()?;
        Ok(nb)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) || !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!(
                "negative binomial needs r > 0 and 0 < p < 1, got r={}, p={}",
                self.r, self.p
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.r * (1.0 - self.p) / self.p
    }

    pub fn variance(&self) -> f64 {
        self.mean() / self.p
    }

    fn sampler(&self) -> Result<NbSampler> {
        self.validate()?;
        let gamma = Gamma::new(self.r, (1.0 - self.p) / self.p)
            .map_err(|e| Error::Config(format!("gamma({}, ·): {e}", self.r)))?;
        Ok(NbSampler { gamma })
    }
}

struct NbSampler {
    gamma: Gamma<f64>,
}

impl NbSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lambda = self.gamma.sample(rng);
        if lambda <= 0.0 {
            return 0.0;
        }
        match Poisson::new(lambda) {
            Ok(p) => p.sample(rng),
            // only reachable for absurd λ; the mixture mean is the best stand-in
            Err(_) => lambda.round(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_case: usize,
    pub n_control: usize,
    pub n_metabolites: usize,
    pub n_de: usize,
    /// Control cells, and every cell of non-DE metabolites.
    pub nb_control: NbParams,
    /// Case cells of DE metabolites.
    pub nb_case_de: NbParams,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_case: 106,
            n_control: 91,
            n_metabolites: 236,
            n_de: 118,
            nb_control: NbParams { r: 10.0, p: 0.5 },
            nb_case_de: NbParams { r: 30.0, p: 0.5 },
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_case == 0 || self.n_control == 0 {
            return Err(Error::Config(
                "need at least one case and one control".into(),
            ));
        }
        if self.n_metabolites == 0 {
            return Err(Error::Config("need at least one metabolite".into()));
        }
        if self.n_de > self.n_metabolites {
            return Err(Error::Config(format!(
                "{} DE metabolites requested but only {} metabolites",
                self.n_de, self.n_metabolites
            )));
        }
        self.nb_control.validate()?;
        self.nb_case_de.validate()
    }
}

/// Known structure of a simulated dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(rename = "de_ids")]
    pub de_metabolite_ids: Vec<String>,
    /// Keyed by the rate as written (`"0.01"`), cells as `[row, column]`.
    pub outlier_cells: BTreeMap<String, Vec<(usize, usize)>>,
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(3);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Draws a case/control matrix. Cases occupy the first `n_case` columns.
pub fn generate(cfg: &SynthConfig) -> Result<(MetaboliteMatrix, LabelVector, GroundTruth)> {
    cfg.validate()?;
    let seed = StreamSeed::new(cfg.seed);
    let n_samples = cfg.n_case + cfg.n_control;

    let mut de_rows = index::sample(
        &mut seed.stream("synth/de-rows", 0),
        cfg.n_metabolites,
        cfg.n_de,
    )
    .into_vec();
    de_rows.sort_unstable();
    let mut is_de = vec![false; cfg.n_metabolites];
    for &i in &de_rows {
        is_de[i] = true;
    }

    let control = cfg.nb_control.sampler()?;
    let case_de = cfg.nb_case_de.sampler()?;
    let mut values = Array2::zeros((cfg.n_metabolites, n_samples));
    for (i, mut row) in values.rows_mut().into_iter().enumerate() {
        let mut rng = seed.stream("synth/row", i as u64);
        for (j, cell) in row.iter_mut().enumerate() {
            let dist = if is_de[i] && j < cfg.n_case {
                &case_de
            } else {
                &control
            };
            *cell = dist.sample(&mut rng);
        }
    }

    let metabolite_ids = ids("M", cfg.n_metabolites);
    let sample_ids = ids("S", n_samples);
    let labels = (0..n_samples)
        .map(|j| {
            if j < cfg.n_case {
                Label::Case
            } else {
                Label::Control
            }
        })
        .collect();
    let truth = GroundTruth {
        de_metabolite_ids: de_rows.iter().map(|&i| metabolite_ids[i].clone()).collect(),
        outlier_cells: BTreeMap::new(),
    };
    let matrix = MetaboliteMatrix::new(values, metabolite_ids, sample_ids)?;
    Ok((matrix, LabelVector::new(labels)?, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationPlan {
    pub rates: Vec<f64>,
    /// Outlier location; defaults to [`DEFAULT_MU_FACTOR`] × the matrix maximum.
    pub mu: Option<f64>,
    /// Outlier scale; defaults to the sample sd over all cells.
    pub sigma: Option<f64>,
    pub seed: u64,
    pub cumulative: bool,
}

impl Default for ContaminationPlan {
    fn default() -> Self {
        ContaminationPlan {
            rates: vec![0.01, 0.03, 0.05, 0.07],
            mu: None,
            sigma: None,
            seed: 1,
            cumulative: true,
        }
    }
}

/// Default outlier location as a multiple of the matrix maximum.
pub const DEFAULT_MU_FACTOR: f64 = 5.0;

/// `floor(rate × n_cells)`, robust to products like `0.07 × 100 = 7.000000000000001`.
pub fn outlier_count(rate: f64, n_cells: usize) -> usize {
    (rate * n_cells as f64 + 1e-9).floor() as usize
}

pub fn rate_key(rate: f64) -> String {
    format!("{rate}")
}

/// Outlier location and scale after defaults are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierDistribution {
    pub mu: f64,
    pub sigma: f64,
}

impl ContaminationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::Config("no contamination rates given".into()));
        }
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::Config(format!("rate {r} outside (0, 1)")));
        }
        if self.rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("rates must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, m: &MetaboliteMatrix) -> Result<OutlierDistribution> {
        let v = m.values();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mu = self.mu.unwrap_or(DEFAULT_MU_FACTOR * max);
        if !(mu > max) {
            return Err(Error::Config(format!(
                "outlier location {mu} must exceed the matrix maximum {max}"
            )));
        }
        let sigma = match self.sigma {
            Some(s) => s,
            None => {
                let n = v.len() as f64;
                let mean = v.sum() / n;
                (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            }
        };
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!(
                "outlier sd must be positive, got {sigma}"
            )));
        }
        Ok(OutlierDistribution { mu, sigma })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedMatrix {
    pub rate: f64,
    pub matrix: MetaboliteMatrix,
    /// Replaced cells as `(row, column)`, sorted.
    pub outlier_cells: Vec<(usize, usize)>,
}

/// Replaces `floor(rate × n_cells)` uniformly chosen cells per rate.
pub fn contaminate(
    m: &MetaboliteMatrix,
    plan: &ContaminationPlan,
) -> Result<Vec<ContaminatedMatrix>> {
    plan.validate()?;
    let dist = plan.resolve(m)?;
    let normal = Normal::new(dist.mu, dist.sigma)
        .map_err(|e| Error::Config(format!("outlier distribution: {e}")))?;
    let n_cols = m.n_samples();
    let n_cells = m.values().len();
    let seed = StreamSeed::new(plan.seed);

    // cells in pick order with their replacement values
    let draw = |stream: u64, count: usize| -> Vec<(usize, f64)> {
        let mut pick_rng = seed.stream("contaminate/cells", stream);
        let mut value_rng = seed.stream("contaminate/values", stream);
        index::sample(&mut pick_rng, n_cells, count)
            .into_iter()
            .map(|c| (c, normal.sample(&mut value_rng)))
            .collect()
    };

    let counts: Vec<usize> = plan
        .rates
        .iter()
        .map(|&r| outlier_count(r, n_cells))
        .collect();
    let shared = if plan.cumulative {
        Some(draw(0, *counts.last().expect("rates non-empty")))
    } else {
        None
    };

    let mut out = Vec::with_capacity(plan.rates.len());
    for (k, (&rate, &count)) in plan.rates.iter().zip(&counts).enumerate() {
        if count == 0 {
            log::warn!("rate {rate} × {n_cells} cells is below one cell; nothing replaced");
        }
        let picks = match &shared {
            Some(all) => all[..count].to_vec(),
            None => draw(k as u64, count),
        };
        let mut values = m.values().clone();
        let mut cells = Vec::with_capacity(count);
        for (flat, v) in picks {
            let (i, j) = (flat / n_cols, flat % n_cols);
            values[(i, j)] = v;
            cells.push((i, j));
        }
        cells.sort_unstable();
        out.push(ContaminatedMatrix {
            rate,
            matrix: m.with_values(values)?,
            outlier_cells: cells,
        });
    }
    Ok(out)
}
