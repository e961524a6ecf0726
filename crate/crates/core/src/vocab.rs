//! Meta-domain vocabulary construction by k-means over document embeddings.
//!
//! Lloyd iterations from k-means++ seeding, best of several restarts. Ties in
//! nearest-centroid search always resolve to the lowest index.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{open_reader, Document};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Document embeddings of a common dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T = f64> {
    ids: Vec<String>,
    vectors: Vec<Vec<T>>,
    d: usize,
}

impl<T: Scalar> EmbeddingSet<T> {
    pub fn new(ids: Vec<String>, vectors: Vec<Vec<T>>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: vectors.len(),
            });
        }
        let d = vectors.first().map_or(0, Vec::len);
        if vectors.is_empty() || d == 0 {
            return Err(Error::EmptyVector);
        }
        for v in &vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { ids, vectors, d })
    }

    /// Builds a set with ids `"0"`, `"1"`, ...
    pub fn from_vectors(vectors: Vec<Vec<T>>) -> Result<Self> {
        let ids = (0..vectors.len()).map(|i| i.to_string()).collect();
        Self::new(ids, vectors)
    }

    /// Reads JSON Lines records `{"id": string, "vector": [floats]}`.
    pub fn read_jsonl(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            vector: Vec<f64>,
        }
        let mut ids = Vec::new();
        let mut vectors = Vec::new();
        for (i, line) in open_reader(path)?.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: i + 1,
                reason: e.to_string(),
            })?;
            ids.push(row.id);
            vectors.push(row.vector.into_iter().map(T::of).collect());
        }
        Self::new(ids, vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    fn distinct_count(&self) -> usize {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let cmp = |a: &usize, b: &usize| {
            self.vectors[*a]
                .iter()
                .zip(&self.vectors[*b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        };
        idx.sort_by(cmp);
        1 + idx.windows(2).filter(|w| cmp(&w[0], &w[1]).is_ne()).count()
    }
}

pub fn squared_l2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Index of the centroid nearest to `point`; ties go to the lowest index.
pub fn nearest<T: Scalar>(centroids: &[Vec<T>], point: &[T]) -> (usize, T) {
    let mut best = (0, squared_l2(&centroids[0], point));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_l2(c, point);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Where a vocabulary came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabSource {
    pub seed: u64,
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub iterations: usize,
    pub inertia: f64,
}

/// Centroids of the clustered meta-domains plus any pass-through partitions
/// appended after them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile<T>", into = "VocabularyFile<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MetaDomainVocabulary<T: Scalar = f64> {
    centroids: Vec<Vec<T>>,
    labels: Vec<String>,
    passthrough: Vec<String>,
    source: Option<VocabSource>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile<T> {
    n: usize,
    d: usize,
    centroids: Vec<Vec<T>>,
    labels: Vec<String>,
    #[serde(default)]
    passthrough: Vec<String>,
    #[serde(default)]
    source: Option<VocabSource>,
}

impl<T: Scalar> From<MetaDomainVocabulary<T>> for VocabularyFile<T> {
    fn from(v: MetaDomainVocabulary<T>) -> Self {
        Self {
            n: v.n(),
            d: v.dim(),
            centroids: v.centroids,
            labels: v.labels,
            passthrough: v.passthrough,
            source: v.source,
        }
    }
}

impl<T: Scalar> TryFrom<VocabularyFile<T>> for MetaDomainVocabulary<T> {
    type Error = Error;

    fn try_from(f: VocabularyFile<T>) -> Result<Self> {
        let mut v = MetaDomainVocabulary::new(f.centroids)?;
        if v.dim() != f.d {
            return Err(Error::DimensionMismatch {
                expected: f.d,
                found: v.dim(),
            });
        }
        v = v.with_passthrough(f.passthrough)?;
        if f.labels.len() != v.n() || f.n != v.n() {
            return Err(Error::DimensionMismatch {
                expected: v.n(),
                found: f.labels.len(),
            });
        }
        v.labels = f.labels;
        v.source = f.source;
        Ok(v)
    }
}

impl<T: Scalar> MetaDomainVocabulary<T> {
    /// Vocabulary from explicit centroids, labelled `cluster-0`, `cluster-1`, ...
    pub fn new(centroids: Vec<Vec<T>>) -> Result<Self> {
        let d = centroids.first().map_or(0, Vec::len);
        if centroids.is_empty() || d == 0 {
            return Err(Error::EmptyVector);
        }
        for c in &centroids {
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.len(),
                });
            }
        }
        for i in 0..centroids.len() {
            for j in i + 1..centroids.len() {
                if squared_l2(&centroids[i], &centroids[j]) <= T::zero() {
                    return Err(Error::InvalidArgument(format!("centroids {i} and {j} coincide")));
                }
            }
        }
        let labels = (0..centroids.len()).map(|i| format!("cluster-{i}")).collect();
        Ok(Self {
            centroids,
            labels,
            passthrough: Vec::new(),
            source: None,
        })
    }

    /// Appends pass-through partitions (already in their final order) as extra meta-domains.
    pub fn with_passthrough(mut self, values: Vec<String>) -> Result<Self> {
        let mut seen: BTreeSet<&str> = self.passthrough.iter().map(String::as_str).collect();
        for v in &values {
            if !seen.insert(v) {
                return Err(Error::InvalidArgument(format!("duplicate partition {v:?}")));
            }
        }
        self.labels.extend(values.iter().cloned());
        self.passthrough.extend(values);
        Ok(self)
    }

    /// Total meta-domain count: clusters plus pass-through partitions.
    pub fn n(&self) -> usize {
        self.centroids.len() + self.passthrough.len()
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn centroids(&self) -> &[Vec<T>] {
        &self.centroids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn passthrough(&self) -> &[String] {
        &self.passthrough
    }

    pub fn source(&self) -> Option<&VocabSource> {
        self.source.as_ref()
    }

    /// Meta-domain index of a pass-through value.
    pub fn passthrough_index(&self, value: &str) -> Option<usize> {
        self.passthrough.iter().position(|v| v == value).map(|p| self.k() + p)
    }

    /// Nearest cluster for an embedding vector.
    pub fn assign(&self, vector: &[T]) -> Result<usize> {
        assign(self, vector)
    }
}

/// Nearest centroid by L2, ties to the lowest index.
pub fn assign<T: Scalar>(vocab: &MetaDomainVocabulary<T>, vector: &[T]) -> Result<usize> {
    if vector.len() != vocab.dim() {
        return Err(Error::DimensionMismatch {
            expected: vocab.dim(),
            found: vector.len(),
        });
    }
    Ok(nearest(&vocab.centroids, vector).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl KMeansParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: 0,
            max_iter: 300,
            restarts: 10,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// One Lloyd run.
#[derive(Debug, Clone)]
pub struct LloydRun<T> {
    pub centroids: Vec<Vec<T>>,
    pub assignments: Vec<usize>,
    pub inertia: T,
    /// Inertia after every centroid update, then the final value.
    pub history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct KMeansFit<T: Scalar> {
    pub vocabulary: MetaDomainVocabulary<T>,
    pub assignments: Vec<usize>,
    pub inertia: T,
    /// Every restart in order; `best` indexes the returned one.
    pub runs: Vec<LloydRun<T>>,
    pub best: usize,
}

pub fn kmeans_fit<T: Scalar>(embeddings: &EmbeddingSet<T>, params: &KMeansParams) -> Result<KMeansFit<T>> {
    let k = params.k;
    if k == 0 || params.max_iter == 0 || params.restarts == 0 {
        return Err(Error::InvalidArgument(
            "k, max_iter and restarts must be at least 1".into(),
        ));
    }
    if embeddings.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: embeddings.len(),
        });
    }
    let distinct = embeddings.distinct_count();
    if distinct < k {
        return Err(Error::DegenerateEmbeddings { distinct, k });
    }

    let runs: Vec<LloydRun<T>> = (0..params.restarts)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(r as u64);
            let init = kmeans_plus_plus(embeddings.vectors(), k, &mut rng);
            lloyd(embeddings.vectors(), init, params.max_iter)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.inertia.total_cmp(&b.1.inertia).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let run = &runs[best];
    let mut vocabulary = MetaDomainVocabulary::new(run.centroids.clone())?;
    vocabulary.source = Some(VocabSource {
        seed: params.seed,
        k,
        restarts: params.restarts,
        max_iter: params.max_iter,
        iterations: run.iterations,
        inertia: run.inertia.as_f64(),
    });
    Ok(KMeansFit {
        vocabulary,
        assignments: run.assignments.clone(),
        inertia: run.inertia,
        best,
        runs,
    })
}

fn kmeans_plus_plus<T: Scalar>(points: &[Vec<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| squared_l2(p, &centroids[0]).as_f64()).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in dist.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            acc += d;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let pick = pick.expect("enough distinct points for k");
        let c = points[pick].clone();
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_l2(p, &c).as_f64());
        }
        centroids.push(c);
    }
    centroids
}

fn assign_all<T: Scalar>(points: &[Vec<T>], centroids: &[Vec<T>]) -> Vec<usize> {
    points
        .par_iter()
        .with_min_len(256)
        .map(|p| nearest(centroids, p).0)
        .collect()
}

fn inertia_of<T: Scalar>(points: &[Vec<T>], centroids: &[Vec<T>], assignments: &[usize]) -> T {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| squared_l2(p, &centroids[a]))
        .sum()
}

/// Lloyd iterations from the given centroids until the assignment is a fixpoint
/// or `max_iter` updates have been made.
pub fn lloyd<T: Scalar>(points: &[Vec<T>], mut centroids: Vec<Vec<T>>, max_iter: usize) -> LloydRun<T> {
    let k = centroids.len();
    let d = centroids[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = assign_all(points, &centroids);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        iterations += 1;

        let mut sums = vec![vec![T::zero(); d]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, &x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                let n = T::of_usize(n);
                *c = s.into_iter().map(|x| x / n).collect();
            }
        }
        // Empty clusters take the point farthest from its own centroid.
        let mut taken = vec![false; points.len()];
        for empty in (0..k).filter(|&j| counts[j] == 0) {
            let far = points
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, p)| (i, squared_l2(p, &centroids[assignments[i]])))
                .fold(None::<(usize, T)>, |best, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                })
                .map(|(i, _)| i)
                .expect("non-empty point set");
            taken[far] = true;
            centroids[empty] = points[far].clone();
            assignments[far] = empty;
        }
        history.push(inertia_of(points, &centroids, &assignments));
    }
    if !converged {
        assignments = assign_all(points, &centroids);
    }
    let inertia = inertia_of(points, &centroids, &assignments);
    history.push(inertia);
    LloydRun {
        centroids,
        assignments,
        inertia,
        history,
        iterations,
        converged,
    }
}

/// Best-of-restarts inertia for every `k` in `ks`, ordered by `k`.
pub fn inertia_curve<T: Scalar>(
    embeddings: &EmbeddingSet<T>,
    ks: &[usize],
    base: &KMeansParams,
) -> Result<Vec<(usize, T)>> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("ks must be non-empty".into()));
    }
    let ks: BTreeSet<usize> = ks.iter().copied().collect();
    ks.into_iter()
        .map(|k| {
            let fit = kmeans_fit(embeddings, &KMeansParams { k, ..*base })?;
            Ok((k, fit.inertia))
        })
        .collect()
}

/// Distinct values of a metadata key, in lexicographic order.
///
/// String values are used as-is; other JSON values by their compact serialization.
pub fn partition_passthrough(documents: &[Document], key: &str) -> Result<Vec<String>> {
    let mut values = BTreeSet::new();
    for (index, doc) in documents.iter().enumerate() {
        let v = doc.metadata.get(key).ok_or_else(|| Error::MissingMetadata {
            index,
            key: key.to_string(),
        })?;
        values.insert(metadata_string(v));
    }
    Ok(values.into_iter().collect())
}

pub fn metadata_string(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, [f64; 2], [f64; 2], f64) {
        let offsets = [[0.3, -0.2], [-0.4, 0.1], [0.1, 0.5], [0.0, -0.3], [-0.2, -0.1]];
        let mut pts = Vec::new();
        for o in &offsets {
            pts.push(vec![o[0], o[1]]);
        }
        for o in &offsets {
            pts.push(vec![10.0 + o[1], 10.0 - o[0]]);
        }
        // Oracle: cloud means and within-cloud scatter by direct summation.
        let mean = |pts: &[Vec<f64>]| {
            let n = pts.len() as f64;
            [
                pts.iter().map(|p| p[0]).sum::<f64>() / n,
                pts.iter().map(|p| p[1]).sum::<f64>() / n,
            ]
        };
        let (a, b) = pts.split_at(5);
        let (ma, mb) = (mean(a), mean(b));
        let scatter: f64 = a
            .iter()
            .map(|p| (p[0] - ma[0]).powi(2) + (p[1] - ma[1]).powi(2))
            .chain(b.iter().map(|p| (p[0] - mb[0]).powi(2) + (p[1] - mb[1]).powi(2)))
            .sum();
        (pts, ma, mb, scatter)
    }

    #[test]
    fn two_blobs_recover_cloud_means() {
        let (pts, ma, mb, scatter) = blobs();
        let set = EmbeddingSet::from_vectors(pts).unwrap();
        let fit = kmeans_fit(&set, &KMeansParams::new(2).seed(3)).unwrap();
        let mut cs = fit.vocabulary.centroids().to_vec();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for (c, m) in cs.iter().zip([ma, mb]) {
            assert!((c[0] - m[0]).abs() < 1e-6 && (c[1] - m[1]).abs() < 1e-6);
        }
        assert!((fit.inertia - scatter).abs() < 1e-9);
    }

    #[test]
    fn k_one_is_global_mean() {
        let (pts, ..) = blobs();
        let n = pts.len() as f64;
        let mean = [
            pts.iter().map(|p| p[0]).sum::<f64>() / n,
            pts.iter().map(|p| p[1]).sum::<f64>() / n,
        ];
        let total: f64 = pts
            .iter()
            .map(|p| (p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2))
            .sum();
        let set = EmbeddingSet::from_vectors(pts).unwrap();
        let fit = kmeans_fit(&set, &KMeansParams::new(1)).unwrap();
        assert!((fit.vocabulary.centroids()[0][0] - mean[0]).abs() < 1e-12);
        assert!((fit.inertia - total).abs() < 1e-9);
    }

    #[test]
    fn k_equal_to_points_has_zero_inertia() {
        let (pts, ..) = blobs();
        let set = EmbeddingSet::from_vectors(pts.clone()).unwrap();
        let fit = kmeans_fit(&set, &KMeansParams::new(pts.len()).restarts(3)).unwrap();
        assert_eq!(fit.inertia, 0.0);
        let curve = inertia_curve(&set, &[pts.len()], &KMeansParams::new(1)).unwrap();
        assert_eq!(curve, vec![(pts.len(), 0.0)]);
    }

    #[test]
    fn error_cases() {
        let set = EmbeddingSet::from_vectors(vec![vec![1.0, 1.0]; 4]).unwrap();
        assert!(matches!(
            kmeans_fit(&set, &KMeansParams::new(5)),
            Err(Error::TooFewPoints { needed: 5, got: 4 })
        ));
        assert!(matches!(
            kmeans_fit(&set, &KMeansParams::new(2)),
            Err(Error::DegenerateEmbeddings { distinct: 1, k: 2 })
        ));
        assert_eq!(kmeans_fit(&set, &KMeansParams::new(1)).unwrap().inertia, 0.0);
        assert!(EmbeddingSet::<f64>::from_vectors(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(EmbeddingSet::<f64>::from_vectors(vec![vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn assign_ties_and_exact_hits() {
        let vocab = MetaDomainVocabulary::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![5.0, 5.0],
            vec![-3.0, 2.0],
            vec![3.0, 0.0],
        ])
        .unwrap();
        assert_eq!(assign(&vocab, &[-3.0, 2.0]).unwrap(), 3);
        // Midway between centroid 1 and centroid 4.
        assert_eq!(assign(&vocab, &[2.0, 0.0]).unwrap(), 1);
        assert!(matches!(
            assign(&vocab, &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn passthrough_partitions() {
        let doc = |lang: Option<&str>| {
            let mut d = Document::new("x");
            if let Some(l) = lang {
                d.metadata.insert("lang".into(), l.into());
            }
            d
        };
        let docs = vec![doc(Some("rs")), doc(Some("py")), doc(Some("rs"))];
        assert_eq!(partition_passthrough(&docs, "lang").unwrap(), vec!["py", "rs"]);
        assert_eq!(partition_passthrough(&docs[..1], "lang").unwrap(), vec!["rs"]);
        let bad = vec![doc(Some("py")), doc(None)];
        assert!(matches!(
            partition_passthrough(&bad, "lang"),
            Err(Error::MissingMetadata { index: 1, .. })
        ));

        let vocab = MetaDomainVocabulary::new(vec![vec![0.0], vec![1.0]])
            .unwrap()
            .with_passthrough(partition_passthrough(&docs, "lang").unwrap())
            .unwrap();
        assert_eq!(vocab.n(), 4);
        assert_eq!(vocab.passthrough_index("py"), Some(2));
        assert_eq!(vocab.passthrough_index("rs"), Some(3));
        assert_eq!(vocab.labels()[3], "rs");
    }

    #[test]
    fn vocabulary_json_round_trip() {
        let (pts, ..) = blobs();
        let set = EmbeddingSet::from_vectors(pts).unwrap();
        let vocab = kmeans_fit(&set, &KMeansParams::new(2)).unwrap().vocabulary;
        let vocab = vocab.with_passthrough(vec!["py".into()]).unwrap();
        let json = serde_json::to_value(&vocab).unwrap();
        assert_eq!(json["n"], 3);
        assert_eq!(json["d"], 2);
        let back: MetaDomainVocabulary<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, vocab);
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // Centroid 2 starts far from every point and loses all of them.
        let pts = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let run = lloyd(&pts, vec![vec![0.0], vec![10.0], vec![100.0]], 50);
        let used: BTreeSet<usize> = run.assignments.iter().copied().collect();
        assert_eq!(used.len(), 3);
        for w in run.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn single_precision_fit() {
        let pts: Vec<Vec<f32>> = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![9.0, 9.0], vec![9.0, 10.0]];
        let set = EmbeddingSet::from_vectors(pts).unwrap();
        let fit = kmeans_fit(&set, &KMeansParams::new(2)).unwrap();
        assert!((fit.inertia - 1.0f32).abs() < 1e-6);
    }
}
