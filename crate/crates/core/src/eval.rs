//! Ranking metrics and baselines for judging predicted mixture orderings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::DomainVector;
use crate::vocab::{squared_l2, EmbeddingSet};

fn check_pair<T>(xs: &[T], ys: &[T]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    check_pair(xs, ys)?;
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut out = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share rank (i + j) / 2 + 1.
        let r = T::of((i + j) as f64 / 2.0 + 1.0);
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    check_pair(xs, ys)?;
    pearson(&ranks(xs), &ranks(ys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub label: String,
    pub predicted: f64,
    pub actual: f64,
    pub predicted_rank: f64,
    pub actual_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub spearman: f64,
    pub pearson: f64,
    pub n: usize,
    pub table: Vec<RankRow>,
}

impl RankReport {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("label,predicted,actual,predicted_rank,actual_rank\n");
        for r in &self.table {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.label, r.predicted, r.actual, r.predicted_rank, r.actual_rank
            ));
        }
        out
    }
}

/// Correlations between predicted and actual scores over a set of mixtures.
pub fn rank_mixtures(labels: &[String], predicted: &[f64], actual: &[f64]) -> Result<RankReport> {
    check_pair(predicted, actual)?;
    if labels.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predicted.len(),
        });
    }
    let spearman = spearman(predicted, actual)?;
    let pearson = pearson(predicted, actual)?;
    let (pr, ar) = (ranks(predicted), ranks(actual));
    let table = (0..predicted.len())
        .map(|i| RankRow {
            label: labels[i].clone(),
            predicted: predicted[i],
            actual: actual[i],
            predicted_rank: pr[i],
            actual_rank: ar[i],
        })
        .collect();
    Ok(RankReport {
        spearman,
        pearson,
        n: predicted.len(),
        table,
    })
}

/// Uniform random scores in `[0, 1)`.
pub fn random_baseline(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random::<f64>()).collect()
}

/// Indices of the `k` nearest centroids, closest first, ties to the lowest index.
pub fn k_nearest<T: Scalar>(centroids: &[Vec<T>], point: &[T], k: usize) -> Vec<usize> {
    let mut d: Vec<(T, usize)> = centroids
        .iter()
        .enumerate()
        .map(|(j, c)| (squared_l2(c, point), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

fn check_knn<T: Scalar>(embeddings: &EmbeddingSet<T>, centroids: &[Vec<T>], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > centroids.len() {
        return Err(Error::KTooLarge {
            k,
            available: centroids.len(),
        });
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != embeddings.dim()) {
        return Err(Error::DimensionMismatch {
            expected: embeddings.dim(),
            found: c.len(),
        });
    }
    Ok(())
}

/// Embedding kNN baseline: every document gives `1/k` to each of its `k`
/// nearest centroids; the votes are averaged over documents.
pub fn knn_domain_vector<T: Scalar>(
    embeddings: &EmbeddingSet<T>,
    centroids: &[Vec<T>],
    k: usize,
) -> Result<DomainVector<T>> {
    check_knn(embeddings, centroids, k)?;
    let votes: Vec<u64> = embeddings
        .vectors()
        .par_iter()
        .map(|e| {
            let mut v = vec![0u64; centroids.len()];
            for j in k_nearest(centroids, e, k) {
                v[j] += 1;
            }
            v
        })
        .reduce(
            || vec![0u64; centroids.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    // Integer vote counts keep the aggregation exact and order independent.
    let total = (embeddings.len() * k) as f64;
    let v: Vec<T> = votes.iter().map(|&c| T::of(c as f64 / total)).collect();
    DomainVector::from_internal(&v)
}

/// Mean-pooled variant: one dataset embedding, softmax of negative L2 distances
/// (temperature 1) over its `k` nearest centroids.
pub fn knn_pooled_domain_vector<T: Scalar>(
    embeddings: &EmbeddingSet<T>,
    centroids: &[Vec<T>],
    k: usize,
) -> Result<DomainVector<T>> {
    check_knn(embeddings, centroids, k)?;
    let d = embeddings.dim();
    let n = T::of_usize(embeddings.len());
    let pooled: Vec<T> = (0..d)
        .map(|j| embeddings.vectors().iter().map(|v| v[j]).sum::<T>() / n)
        .collect();
    let near = k_nearest(centroids, &pooled, k);
    let neg: Vec<T> = near
        .iter()
        .map(|&j| -squared_l2(&centroids[j], &pooled).sqrt())
        .collect();
    let max = neg.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = neg.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    let mut out = vec![T::zero(); centroids.len()];
    for (&j, e) in near.iter().zip(exps) {
        out[j] = e / sum;
    }
    DomainVector::from_internal(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_cases() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        // cov = 0.5 * ... : deviations (-1,0,1) vs (-1,1,0) give 1 / 2 = 0.5.
        assert!((pearson::<f64>(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // 1 - 6 * 2 / (4 * 15) = 0.8
        let r: f64 = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
        assert!(matches!(
            spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn average_ranks_for_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn rank_report() {
        let labels: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
        let a = [0.3, 0.1, 0.4, 0.2];
        let rep = rank_mixtures(&labels, &a, &a).unwrap();
        assert_eq!((rep.spearman, rep.pearson), (1.0, 1.0));
        let mut pr: Vec<f64> = rep.table.iter().map(|r| r.predicted_rank).collect();
        pr.sort_by(f64::total_cmp);
        assert_eq!(pr, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(rep
            .table_csv()
            .starts_with("label,predicted,actual,predicted_rank,actual_rank\nm0,"));
        assert!(matches!(
            rank_mixtures(&labels, &[1.0; 4], &a),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn random_baseline_contract() {
        assert_eq!(random_baseline(6, 3), random_baseline(6, 3));
        assert_eq!(random_baseline(2, 0).len(), 2);
        let actual = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mean: f64 = (0..1000)
            .map(|s| spearman(&random_baseline(6, s), &actual).unwrap())
            .sum::<f64>()
            / 1000.0;
        assert!(mean.abs() < 0.05, "{mean}");
    }

    fn centroids() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![0.0, 4.0],
            vec![4.0, 4.0],
            vec![2.0, 2.0],
        ]
    }

    #[test]
    fn knn_exact_hits_and_all_centroids() {
        let emb = EmbeddingSet::from_vectors(vec![vec![0.0, 4.0]; 7]).unwrap();
        let v = knn_domain_vector(&emb, &centroids(), 1).unwrap();
        assert_eq!(v.as_slice(), DomainVector::<f64>::one_hot(2, 5).unwrap().as_slice());
        let emb = EmbeddingSet::from_vectors(vec![vec![0.3, 1.0], vec![3.0, -2.0], vec![9.0, 9.0]]).unwrap();
        let v = knn_domain_vector(&emb, &centroids(), 5).unwrap();
        for x in v.as_slice() {
            assert!((x - 0.2).abs() < 1e-15);
        }
        assert!(matches!(
            knn_domain_vector(&emb, &centroids(), 6),
            Err(Error::KTooLarge { k: 6, available: 5 })
        ));
        assert!(matches!(
            knn_domain_vector(&emb, &[vec![1.0]], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn knn_matches_bruteforce_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.random_range(-1.0..5.0), rng.random_range(-1.0..5.0)])
            .collect();
        let emb = EmbeddingSet::from_vectors(pts.clone()).unwrap();
        let c = centroids();
        let v = knn_domain_vector(&emb, &c, 3).unwrap();
        // Oracle: for each point, repeatedly take the closest unused centroid.
        let mut mass = vec![0.0; c.len()];
        for p in &pts {
            let mut used = vec![false; c.len()];
            for _ in 0..3 {
                let mut best = usize::MAX;
                for j in 0..c.len() {
                    let d = (p[0] - c[j][0]).powi(2) + (p[1] - c[j][1]).powi(2);
                    if !used[j] && (best == usize::MAX || d < (p[0] - c[best][0]).powi(2) + (p[1] - c[best][1]).powi(2))
                    {
                        best = j;
                    }
                }
                used[best] = true;
                mass[best] += 1.0 / 3.0;
            }
        }
        for (a, m) in v.as_slice().iter().zip(&mass) {
            assert!((a - m / 200.0).abs() < 1e-12);
        }
        let s: f64 = v.as_slice().iter().sum();
        assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pooled_variant() {
        let emb = EmbeddingSet::from_vectors(vec![vec![0.0, 0.0], vec![0.2, 0.0]]).unwrap();
        let v = knn_pooled_domain_vector(&emb, &centroids(), 5).unwrap();
        assert!(v[0] > v[4] && v[4] > v[1]);
        let one = knn_pooled_domain_vector(&emb, &centroids(), 1).unwrap();
        assert_eq!(one.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn monotone_invariance_f32() {
        let xs: [f32; 5] = [0.3, -1.0, 2.0, 0.1, 5.0];
        let ys: [f32; 5] = [1.0, 0.5, 0.2, 0.9, 0.0];
        let a = spearman(&xs, &ys).unwrap();
        let t: Vec<f32> = xs.iter().map(|x| x.powi(3) + x).collect();
        assert_eq!(a, spearman(&t, &ys).unwrap());
    }
}
