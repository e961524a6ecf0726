//! Training-free mixture search by distribution alignment.
//!
//! Candidates are drawn from `Dirichlet(gamma * m * a)`, where `a` is the token
//! share of each training dataset, and filtered by the token budget. Each
//! candidate `r` is scored by `distance(V r, v_valid)`; the best `top_k` are averaged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{distance_unchecked, DistanceSpec};
use crate::error::{Error, Result};
use crate::search::{self, SearchOutcome};
use crate::simplex::TokenBudget;
use crate::{DatasetMatrix, DomainVector, MixtureRatio};

/// Normalized token shares of the training datasets; all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenDistribution {
    shares: Vec<f64>,
}

impl TokenDistribution {
    /// Normalizes positive weights to shares.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "token share {i} must be positive and finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        Ok(Self {
            shares: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::new(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(&vec![1.0; m])
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn m(&self) -> usize {
        self.shares.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Number of candidates to accept.
    pub count: usize,
    pub gamma: f64,
    pub seed: u64,
    /// Maximum draws before giving up; `None` means `100 * count`.
    pub retry_ceiling: Option<usize>,
    /// Draw in parallel blocks. Results are identical either way.
    pub parallel: bool,
}

impl SamplerConfig {
    pub fn new(count: usize, gamma: f64, seed: u64) -> Self {
        Self {
            count,
            gamma,
            seed,
            retry_ceiling: None,
            parallel: true,
        }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Accepted Dirichlet candidates and how they were drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    #[serde(skip)]
    pub candidates: Vec<MixtureRatio>,
    pub accepted: usize,
    pub concentration: Vec<f64>,
    pub gamma: f64,
    pub seed: u64,
    pub draws: usize,
    pub rejected_count: usize,
    pub budget: Option<TokenBudget>,
}

impl CandidateSet {
    /// Wraps explicit candidates, for searches over a fixed grid.
    pub fn from_ratios(candidates: Vec<MixtureRatio>) -> Result<Self> {
        let m = candidates.first().ok_or(Error::EmptyVector)?.len();
        if let Some(c) = candidates.iter().find(|c| c.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.len(),
            });
        }
        Ok(Self {
            accepted: candidates.len(),
            draws: candidates.len(),
            candidates,
            concentration: Vec::new(),
            gamma: f64::NAN,
            seed: 0,
            rejected_count: 0,
            budget: None,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn m(&self) -> usize {
        self.candidates.first().map_or(0, |c| c.len())
    }
}

const BLOCK: usize = 4096;

fn draw(gammas: &[Gamma<f64>], seed: u64, index: usize) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let g: Vec<f64> = gammas.iter().map(|d| d.sample(&mut rng)).collect();
    let sum: f64 = g.iter().sum();
    (sum > 0.0 && sum.is_finite()).then(|| g.into_iter().map(|x| x / sum).collect())
}

/// Draws Dirichlet candidates, rejecting any that exceed the token budget.
///
/// Draw `i` uses its own ChaCha stream, so the accepted set does not depend on
/// whether blocks are drawn in parallel.
pub fn sample_candidates(
    tokens: &TokenDistribution,
    config: &SamplerConfig,
    budget: Option<&TokenBudget>,
) -> Result<CandidateSet> {
    let m = tokens.m();
    if config.count == 0 {
        return Err(Error::InvalidArgument("candidate count must be at least 1".into()));
    }
    if !(config.gamma > 0.0 && config.gamma.is_finite()) {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    if let Some(b) = budget {
        if b.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.m(),
            });
        }
        b.check_feasible()?;
    }
    let concentration: Vec<f64> = tokens.shares().iter().map(|&a| config.gamma * a * m as f64).collect();
    let gammas = concentration
        .iter()
        .map(|&alpha| Gamma::new(alpha, 1.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidArgument(format!("dirichlet concentration: {e}")))?;
    let ceiling = config.retry_ceiling.unwrap_or(100 * config.count);

    let mut candidates = Vec::with_capacity(config.count);
    let mut draws = 0usize;
    let mut rejected = 0usize;
    'outer: while draws < ceiling {
        let block = BLOCK.min(ceiling - draws);
        let results: Vec<Option<Vec<f64>>> = if config.parallel {
            (draws..draws + block)
                .into_par_iter()
                .map(|i| draw(&gammas, config.seed, i))
                .collect()
        } else {
            (draws..draws + block).map(|i| draw(&gammas, config.seed, i)).collect()
        };
        for r in results {
            draws += 1;
            match r {
                Some(r) if budget.is_none_or(|b| b.admits(&r)) => candidates.push(MixtureRatio::from_internal(&r)?),
                _ => rejected += 1,
            }
            if candidates.len() == config.count {
                break 'outer;
            }
        }
    }
    if candidates.len() < config.count {
        return Err(Error::RetryCeilingExceeded {
            draws,
            accepted: candidates.len(),
            acceptance_rate: candidates.len() as f64 / draws.max(1) as f64,
        });
    }
    Ok(CandidateSet {
        accepted: candidates.len(),
        candidates,
        concentration,
        gamma: config.gamma,
        seed: config.seed,
        draws,
        rejected_count: rejected,
        budget: budget.cloned(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Da2Outcome {
    #[serde(flatten)]
    pub search: SearchOutcome,
    pub spec: DistanceSpec,
    /// Whether the returned ratio satisfies the candidate set's budget, if it had one.
    pub budget_feasible: Option<bool>,
}

pub(crate) fn check_dims(matrix: &DatasetMatrix, valid: &DomainVector, candidates: &CandidateSet) -> Result<()> {
    if valid.len() != matrix.n() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n(),
            found: valid.len(),
        });
    }
    if let Some(c) = candidates.candidates.iter().find(|c| c.len() != matrix.m()) {
        return Err(Error::DimensionMismatch {
            expected: matrix.m(),
            found: c.len(),
        });
    }
    Ok(())
}

/// `argmin_r distance(V r, v_valid)` over the candidates, averaged over the best `top_k`.
pub fn optimize_da2(
    matrix: &DatasetMatrix,
    valid: &DomainVector,
    candidates: &CandidateSet,
    spec: &DistanceSpec,
    top_k: usize,
) -> Result<Da2Outcome> {
    spec.validate()?;
    check_dims(matrix, valid, candidates)?;
    let target = valid.as_slice();
    let search = search::search(&candidates.candidates, top_k, |r| {
        let mixed = matrix.mix_raw(r.as_slice())?;
        Ok(distance_unchecked(&mixed, target, spec))
    })?;
    let budget_feasible = candidates.budget.as_ref().map(|b| b.admits(search.ratio.as_slice()));
    Ok(Da2Outcome {
        search,
        spec: *spec,
        budget_feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{distance, DistanceKind, Reduction};

    #[test]
    fn dirichlet_mean_matches_closed_form() {
        // Mean of Dirichlet(alpha) is alpha_i / sum(alpha) = 0.5; sd of the sample
        // mean is sqrt(1/12 / 10000) ~ 0.0029, so 0.02 is ~7 sigma.
        let a = TokenDistribution::new(&[0.5, 0.5]).unwrap();
        let set = sample_candidates(&a, &SamplerConfig::new(10_000, 1.0, 3), None).unwrap();
        assert_eq!(set.len(), 10_000);
        assert_eq!(set.concentration, vec![1.0, 1.0]);
        for j in 0..2 {
            let mean = set.candidates.iter().map(|c| c[j]).sum::<f64>() / 10_000.0;
            assert!((mean - 0.5).abs() < 0.02, "{mean}");
        }
    }

    #[test]
    fn concentration_shrinks_variance() {
        let a = TokenDistribution::new(&[1.0, 2.0, 3.0]).unwrap();
        let var = |gamma: f64| {
            let set = sample_candidates(&a, &SamplerConfig::new(10_000, gamma, 17), None).unwrap();
            (0..3)
                .map(|j| {
                    let xs: Vec<f64> = set.candidates.iter().map(|c| c[j]).collect();
                    let m = xs.iter().sum::<f64>() / xs.len() as f64;
                    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
                })
                .collect::<Vec<_>>()
        };
        let (v1, v10) = (var(1.0), var(10.0));
        for j in 0..3 {
            assert!(v10[j] < v1[j]);
        }
    }

    #[test]
    fn infeasible_budget() {
        let a = TokenDistribution::uniform(2).unwrap();
        let b = TokenBudget::new(100, vec![10, 10]).unwrap();
        assert!(matches!(
            sample_candidates(&a, &SamplerConfig::new(10, 1.0, 0), Some(&b)),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn retry_ceiling_trips() {
        // Feasible only near r = [0.5, 0.5] exactly.
        let a = TokenDistribution::uniform(2).unwrap();
        let b = TokenBudget::new(1000, vec![500, 500]).unwrap();
        let err = sample_candidates(&a, &SamplerConfig::new(5, 1.0, 0), Some(&b)).unwrap_err();
        match err {
            Error::RetryCeilingExceeded { draws, .. } => assert_eq!(draws, 500),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = TokenDistribution::new(&[3.0, 1.0, 1.0, 5.0]).unwrap();
        let b = TokenBudget::new(1000, vec![400, 900, 300, 800]).unwrap();
        let cfg = SamplerConfig::new(5000, 2.0, 99);
        let par = sample_candidates(&a, &cfg, Some(&b)).unwrap();
        let seq = sample_candidates(&a, &cfg.sequential(), Some(&b)).unwrap();
        assert_eq!(par, seq);
        assert_eq!(par.draws, par.accepted + par.rejected_count);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let one = pool.install(|| sample_candidates(&a, &cfg, Some(&b)).unwrap());
        assert_eq!(one, par);
    }

    #[test]
    fn identity_matrix_recovers_exact_candidate() {
        let v = DomainVector::from_input(&[0.2, 0.5, 0.3]).unwrap();
        let ratios = vec![
            MixtureRatio::from_input(&[0.6, 0.2, 0.2]).unwrap(),
            MixtureRatio::from_input(&[0.2, 0.5, 0.3]).unwrap(),
            MixtureRatio::from_input(&[0.1, 0.1, 0.8]).unwrap(),
        ];
        let set = CandidateSet::from_ratios(ratios).unwrap();
        let id = DatasetMatrix::identity(3).unwrap();
        let out = optimize_da2(&id, &v, &set, &DistanceSpec::default(), 1).unwrap();
        assert_eq!(out.search.ratio.as_slice(), v.as_slice());
        assert_eq!(out.search.score, 0.0);
        assert_eq!(out.budget_feasible, None);
    }

    #[test]
    fn equal_scores_keep_lower_index_first() {
        let v = DomainVector::from_input(&[0.5, 0.5]).unwrap();
        let ratios = vec![
            MixtureRatio::from_input(&[0.9, 0.1]).unwrap(),
            MixtureRatio::from_input(&[0.3, 0.7]).unwrap(),
            MixtureRatio::from_input(&[0.7, 0.3]).unwrap(),
        ];
        let set = CandidateSet::from_ratios(ratios).unwrap();
        let id = DatasetMatrix::identity(2).unwrap();
        let out = optimize_da2(&id, &v, &set, &DistanceSpec::new(DistanceKind::L1), 1).unwrap();
        assert_eq!(out.search.table[0].index, 1);
        assert_eq!(out.search.table[1].index, 2);
        assert_eq!(out.search.table[0].score, out.search.table[1].score);
    }

    #[test]
    fn reduction_does_not_change_ranking() {
        let a = TokenDistribution::uniform(3).unwrap();
        let set = sample_candidates(&a, &SamplerConfig::new(500, 1.0, 4), None).unwrap();
        let m = DatasetMatrix::new(vec![
            DomainVector::from_input(&[0.7, 0.2, 0.1, 0.0]).unwrap(),
            DomainVector::from_input(&[0.1, 0.1, 0.4, 0.4]).unwrap(),
            DomainVector::from_input(&[0.25, 0.25, 0.25, 0.25]).unwrap(),
        ])
        .unwrap();
        let v = DomainVector::from_input(&[0.3, 0.3, 0.2, 0.2]).unwrap();
        let mean = optimize_da2(&m, &v, &set, &DistanceSpec::huber(0.005), 1).unwrap();
        let sum = optimize_da2(
            &m,
            &v,
            &set,
            &DistanceSpec::huber(0.005).with_reduction(Reduction::Sum),
            1,
        )
        .unwrap();
        let order = |o: &Da2Outcome| o.search.table.iter().map(|c| c.index).collect::<Vec<_>>();
        assert_eq!(order(&mean), order(&sum));
    }

    #[test]
    fn top1_matches_bruteforce() {
        let a = TokenDistribution::new(&[1.0, 4.0, 2.0]).unwrap();
        let set = sample_candidates(&a, &SamplerConfig::new(2000, 1.0, 8), None).unwrap();
        let m = DatasetMatrix::new(vec![
            DomainVector::from_input(&[0.6, 0.3, 0.1]).unwrap(),
            DomainVector::from_input(&[0.0, 0.2, 0.8]).unwrap(),
            DomainVector::from_input(&[0.3, 0.4, 0.3]).unwrap(),
        ])
        .unwrap();
        let v = DomainVector::from_input(&[0.35, 0.3, 0.35]).unwrap();
        for kind in [
            DistanceKind::Huber,
            DistanceKind::L1,
            DistanceKind::L2,
            DistanceKind::Js,
        ] {
            let spec = DistanceSpec::new(kind);
            let out = optimize_da2(&m, &v, &set, &spec, 1).unwrap();
            let mut best = (0, f64::INFINITY);
            for (i, r) in set.candidates.iter().enumerate() {
                let mixed: Vec<f64> = (0..3).map(|row| (0..3).map(|c| m.get(row, c) * r[c]).sum()).collect();
                let d = distance(&mixed, v.as_slice(), &spec).unwrap();
                if d < best.1 {
                    best = (i, d);
                }
            }
            assert_eq!(out.search.table[0].index, best.0);
        }
    }

    #[test]
    fn dimension_errors() {
        let set = CandidateSet::from_ratios(vec![MixtureRatio::from_input(&[0.5, 0.5]).unwrap()]).unwrap();
        let id = DatasetMatrix::identity(3).unwrap();
        let v3 = DomainVector::uniform(3).unwrap();
        assert!(matches!(
            optimize_da2(&id, &v3, &set, &DistanceSpec::default(), 1),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        let v2 = DomainVector::uniform(2).unwrap();
        assert!(optimize_da2(&id, &v2, &set, &DistanceSpec::default(), 1).is_err());
    }
}
