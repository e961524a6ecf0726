//! Per-meta-domain loss regression and mixture search.
//!
//! One regressor `f_i` per meta-domain maps a mixed domain vector `V r` to the
//! validation loss on meta-domain `i`. The loss on any validation set with domain
//! vector `q` is predicted as `sum_i q_i f_i(V r)`. The regressors see only domain
//! vectors, so adding a training dataset (a column of `V`) needs no refit.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::open_reader;
use crate::da2::{check_dims, CandidateSet};
use crate::error::{Error, Result};
use crate::eval::spearman;
use crate::gbdt::{self, GbdtModel, GbdtParams};
use crate::search::{self, SearchOutcome};
use crate::{DatasetMatrix, DomainVector, MixtureRatio};

/// Where a sample's domain vector comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleInput {
    #[serde(rename = "ratio")]
    Ratio(MixtureRatio),
    #[serde(rename = "v")]
    Vector(DomainVector),
}

/// One observed training run: a mixture and its per-meta-domain validation losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    #[serde(flatten)]
    pub input: SampleInput,
    pub losses: Vec<f64>,
}

impl FitSample {
    fn vector(&self, matrix: Option<&DatasetMatrix>) -> Result<Vec<f64>> {
        match &self.input {
            SampleInput::Vector(v) => Ok(v.as_slice().to_vec()),
            SampleInput::Ratio(r) => {
                let m =
                    matrix.ok_or_else(|| Error::InvalidArgument("samples with ratios need a dataset matrix".into()))?;
                m.mix_raw(r.as_slice())
            }
        }
    }
}

/// Reads JSON Lines `{"ratio": [...]} | {"v": [...]}` with `"losses": [...]`.
pub fn read_samples(path: &Path) -> Result<Vec<FitSample>> {
    let mut out = Vec::new();
    for (i, line) in open_reader(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Gbdt,
    Ridge,
}

impl std::str::FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbdt" => Ok(Self::Gbdt),
            "ridge" => Ok(Self::Ridge),
            other => Err(Error::InvalidArgument(format!("unknown regressor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorParams {
    pub kind: RegressorKind,
    pub gbdt: GbdtParams,
    pub ridge_lambda: f64,
}

impl RegressorParams {
    pub fn gbdt() -> Self {
        Self {
            kind: RegressorKind::Gbdt,
            gbdt: GbdtParams::default(),
            ridge_lambda: 1e-3,
        }
    }

    pub fn ridge(lambda: f64) -> Self {
        Self {
            kind: RegressorKind::Ridge,
            ridge_lambda: lambda,
            ..Self::gbdt()
        }
    }
}

/// L2-regularized least squares with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

impl RidgeModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument("ridge lambda must be non-negative".into()));
        }
        let (n, d) = (x.len(), x[0].len());
        let nf = n as f64;
        let x_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
        let y_mean = y.iter().sum::<f64>() / nf;
        let xc = DMatrix::from_fn(n, d, |i, j| x[i][j] - x_mean[j]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let gram = xc.transpose() * &xc + DMatrix::identity(d, d) * lambda;
        let rhs = xc.transpose() * yc;
        let coef = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            // Singular without regularization: minimum-norm least squares.
            None => {
                gram.pseudo_inverse(1e-12)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?
                    * rhs
            }
        };
        let intercept = y_mean - coef.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();
        Ok(Self {
            coef: coef.iter().copied().collect(),
            intercept,
            lambda,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regressor {
    Gbdt(GbdtModel),
    Ridge(RidgeModel),
}

impl Regressor {
    pub fn predict(&self, v: &[f64]) -> f64 {
        match self {
            Regressor::Gbdt(m) => m.predict(v),
            Regressor::Ridge(m) => m.predict(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub sample_count: usize,
    pub train_count: usize,
    pub holdout_count: usize,
    /// Held-out Spearman per meta-domain; `None` when undefined (constant target or
    /// prediction, or fewer than two held-out samples).
    pub holdout_spearman: Vec<Option<f64>>,
}

impl FitMetadata {
    /// Median of the defined per-meta-domain holdout correlations.
    pub fn median_spearman(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.holdout_spearman.iter().flatten().copied().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        Some(if v.len() % 2 == 1 {
            v[mid]
        } else {
            0.5 * (v[mid - 1] + v[mid])
        })
    }
}

/// One fitted regressor per meta-domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossModelSet {
    pub kind: RegressorKind,
    pub params: RegressorParams,
    pub models: Vec<Regressor>,
    pub metadata: FitMetadata,
}

impl LossModelSet {
    pub fn n(&self) -> usize {
        self.models.len()
    }

    /// Predicted loss on every meta-domain for a mixed domain vector.
    pub fn predict_losses(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(self.models.iter().map(|f| f.predict(v)).collect())
    }
}

pub struct FitOptions {
    pub params: RegressorParams,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl FitOptions {
    pub fn new(params: RegressorParams) -> Self {
        Self {
            params,
            holdout_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Fits `f_i` on `(V r, loss_i)` for every meta-domain `i`.
///
/// Rows are split by a seeded shuffle; the models are fitted on the training part
/// and the held-out part yields the per-meta-domain Spearman diagnostic.
pub fn fit_regressors(
    samples: &[FitSample],
    matrix: Option<&DatasetMatrix>,
    options: &FitOptions,
) -> Result<LossModelSet> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(0.0..1.0).contains(&options.holdout_fraction) {
        return Err(Error::InvalidArgument("holdout_fraction must be in [0, 1)".into()));
    }
    let n = samples[0].losses.len();
    let mut inputs = Vec::with_capacity(samples.len());
    for s in samples {
        if s.losses.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.losses.len(),
            });
        }
        if s.losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("losses must be finite".into()));
        }
        let v = s.vector(matrix)?;
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        inputs.push(v);
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(options.seed));
    let holdout_count = ((samples.len() as f64 * options.holdout_fraction).round() as usize).min(samples.len() - 1);
    let (train_idx, hold_idx) = order.split_at(samples.len() - holdout_count);
    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| inputs[i].clone()).collect();

    let params = options.params;
    let fitted: Vec<(Regressor, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let y: Vec<f64> = train_idx.iter().map(|&r| samples[r].losses[i]).collect();
            let model = match params.kind {
                RegressorKind::Gbdt => Regressor::Gbdt(gbdt::fit(&train_x, &y, &params.gbdt)?.0),
                RegressorKind::Ridge => Regressor::Ridge(RidgeModel::fit(&train_x, &y, params.ridge_lambda)?),
            };
            let rho = if hold_idx.len() >= 2 {
                let pred: Vec<f64> = hold_idx.iter().map(|&r| model.predict(&inputs[r])).collect();
                let actual: Vec<f64> = hold_idx.iter().map(|&r| samples[r].losses[i]).collect();
                spearman(&pred, &actual).ok()
            } else {
                None
            };
            Ok((model, rho))
        })
        .collect::<Result<_>>()?;
    let (models, holdout_spearman) = fitted.into_iter().unzip();
    Ok(LossModelSet {
        kind: params.kind,
        params,
        models,
        metadata: FitMetadata {
            sample_count: samples.len(),
            train_count: train_idx.len(),
            holdout_count,
            holdout_spearman,
        },
    })
}

/// `sum_i q_i f_i(V r)` with `q = v_valid`.
pub fn predict_valid_loss(
    ratio: &MixtureRatio,
    matrix: &DatasetMatrix,
    valid: &DomainVector,
    models: &LossModelSet,
) -> Result<f64> {
    if valid.len() != models.n() || matrix.n() != models.n() {
        return Err(Error::DimensionMismatch {
            expected: models.n(),
            found: if valid.len() != models.n() {
                valid.len()
            } else {
                matrix.n()
            },
        });
    }
    let v = matrix.mix_raw(ratio.as_slice())?;
    Ok(weighted_loss(valid.as_slice(), &models.predict_losses(&v)?))
}

/// `sum_i q_i l_i`, accumulated in index order.
pub fn weighted_loss(q: &[f64], losses: &[f64]) -> f64 {
    q.iter().zip(losses).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressOutcome {
    #[serde(flatten)]
    pub search: SearchOutcome,
    pub budget_feasible: Option<bool>,
}

/// Candidate with the lowest predicted validation loss, averaged over the best `top_k`.
pub fn search_regress(
    matrix: &DatasetMatrix,
    valid: &DomainVector,
    models: &LossModelSet,
    candidates: &CandidateSet,
    top_k: usize,
) -> Result<RegressOutcome> {
    check_dims(matrix, valid, candidates)?;
    if models.n() != matrix.n() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n(),
            found: models.n(),
        });
    }
    let search = search::search(&candidates.candidates, top_k, |r| {
        predict_valid_loss(r, matrix, valid, models)
    })?;
    let budget_feasible = candidates.budget.as_ref().map(|b| b.admits(search.ratio.as_slice()));
    Ok(RegressOutcome {
        search,
        budget_feasible,
    })
}
