//! Built-in meta-domain classifier: hashed character n-grams fed to a multinomial
//! logistic regression, plus import/export of externally computed probabilities.
//!
//! Hashing is 64-bit FNV-1a over the UTF-8 bytes of each n-gram, with the offset
//! basis XOR-ed with the configured seed (seed 0 is plain FNV-1a). The bucket is
//! `hash % buckets`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{open_reader, Document};
use crate::error::{Error, Result};
use crate::DomainVector;

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET_BASIS ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Character n-gram orders.
    pub orders: Vec<usize>,
    pub buckets: usize,
    pub lowercase: bool,
    pub hash_seed: u64,
    /// Scale count vectors to unit L2 norm before the linear layer.
    pub normalize: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            orders: vec![2, 3, 4],
            buckets: 1 << 18,
            lowercase: true,
            hash_seed: 0,
            normalize: false,
        }
    }
}

/// Sparse n-gram bucket counts, sorted by bucket index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub buckets: usize,
    pub entries: Vec<(u32, u32)>,
}

impl FeatureVector {
    fn values(&self, normalize: bool) -> Vec<(u32, f64)> {
        let norm = if normalize {
            self.entries
                .iter()
                .map(|&(_, c)| f64::from(c) * f64::from(c))
                .sum::<f64>()
                .sqrt()
        } else {
            1.0
        };
        self.entries.iter().map(|&(i, c)| (i, f64::from(c) / norm)).collect()
    }
}

pub fn featurize(doc: &Document, config: &FeatureConfig) -> Result<FeatureVector> {
    featurize_text(&doc.text, config)
}

pub fn featurize_text(text: &str, config: &FeatureConfig) -> Result<FeatureVector> {
    if text.trim().is_empty() {
        return Err(Error::EmptyDocument);
    }
    if config.buckets == 0 || config.buckets > u32::MAX as usize {
        return Err(Error::InvalidArgument("buckets must be in [1, 2^32)".into()));
    }
    let text = if config.lowercase {
        text.to_lowercase()
    } else {
        text.to_string()
    };
    let starts: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let chars = starts.len() - 1;
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for &order in &config.orders {
        if order == 0 || order > chars {
            continue;
        }
        for s in 0..=chars - order {
            let gram = &text.as_bytes()[starts[s]..starts[s + order]];
            let bucket = (fnv1a64(config.hash_seed, gram) % config.buckets as u64) as u32;
            *counts.entry(bucket).or_default() += 1;
        }
    }
    let mut entries: Vec<(u32, u32)> = counts.into_iter().collect();
    entries.sort_unstable();
    Ok(FeatureVector {
        buckets: config.buckets,
        entries,
    })
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_classes: usize,
    pub features: FeatureConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial step size; step `t` (1-based) uses `learning_rate / sqrt(t)`.
    pub learning_rate: f64,
    pub l2: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            features: FeatureConfig::default(),
            epochs: 5,
            batch_size: 64,
            learning_rate: 0.1,
            l2: 1e-5,
            holdout_fraction: 0.1,
            seed: 0,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_size: usize,
    pub holdout_size: usize,
    pub holdout_accuracy: f64,
    /// Regularized cross-entropy on the training split after each epoch.
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRow {
    Dense(Vec<f64>),
    /// `{bucket index: weight}`; keys are decimal strings in JSON.
    Sparse(BTreeMap<String, f64>),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    config: TrainConfig,
    report: Option<TrainReport>,
    bias: Vec<f64>,
    weights: Vec<WeightRow>,
}

/// Multinomial logistic regression over hashed n-gram features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct LinearClassifierModel {
    config: TrainConfig,
    report: Option<TrainReport>,
    bias: Vec<f64>,
    /// Row-major `n_classes x buckets`.
    weights: Vec<f64>,
}

impl From<LinearClassifierModel> for ModelFile {
    fn from(m: LinearClassifierModel) -> Self {
        let b = m.config.features.buckets;
        let weights = m
            .weights
            .chunks(b)
            .map(|row| {
                let nonzero = row.iter().filter(|&&w| w != 0.0).count();
                if 2 * nonzero < row.len() {
                    WeightRow::Sparse(
                        row.iter()
                            .enumerate()
                            .filter(|(_, &w)| w != 0.0)
                            .map(|(i, &w)| (i.to_string(), w))
                            .collect(),
                    )
                } else {
                    WeightRow::Dense(row.to_vec())
                }
            })
            .collect();
        ModelFile {
            config: m.config,
            report: m.report,
            bias: m.bias,
            weights,
        }
    }
}

impl TryFrom<ModelFile> for LinearClassifierModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let n = f.config.n_classes;
        let b = f.config.features.buckets;
        if f.bias.len() != n || f.weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.weights.len().min(f.bias.len()),
            });
        }
        let mut weights = vec![0.0; n * b];
        for (row, dst) in f.weights.into_iter().zip(weights.chunks_mut(b)) {
            match row {
                WeightRow::Dense(v) => {
                    if v.len() != b {
                        return Err(Error::DimensionMismatch {
                            expected: b,
                            found: v.len(),
                        });
                    }
                    dst.copy_from_slice(&v);
                }
                WeightRow::Sparse(entries) => {
                    for (key, w) in entries {
                        let i: u32 = key.parse().map_err(|_| {
                            Error::InvalidArgument(format!("sparse weight key {key:?} is not an index"))
                        })?;
                        *dst.get_mut(i as usize).ok_or(Error::IndexOutOfRange {
                            index: i as usize,
                            len: b,
                        })? = w;
                    }
                }
            }
        }
        if weights.iter().chain(&f.bias).any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("model weights must be finite".into()));
        }
        Ok(Self {
            config: f.config,
            report: f.report,
            bias: f.bias,
            weights,
        })
    }
}

impl LinearClassifierModel {
    /// All-zero weights with the given bias.
    pub fn from_bias(config: TrainConfig, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != config.n_classes {
            return Err(Error::DimensionMismatch {
                expected: config.n_classes,
                found: bias.len(),
            });
        }
        let weights = vec![0.0; config.n_classes * config.features.buckets];
        Ok(Self {
            config,
            report: None,
            bias,
            weights,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.config.n_classes
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn report(&self) -> Option<&TrainReport> {
        self.report.as_ref()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn logits(&self, features: &FeatureVector) -> Vec<f64> {
        let b = self.config.features.buckets;
        let x = features.values(self.config.features.normalize);
        (0..self.n_classes())
            .map(|c| {
                let row = &self.weights[c * b..(c + 1) * b];
                self.bias[c] + x.iter().map(|&(i, v)| row[i as usize] * v).sum::<f64>()
            })
            .collect()
    }

    pub fn predict_proba(&self, doc: &Document) -> Result<DomainVector> {
        let f = featurize(doc, &self.config.features)?;
        DomainVector::from_internal(&softmax(&self.logits(&f)))
    }

    pub fn predict_label(&self, doc: &Document) -> Result<usize> {
        let f = featurize(doc, &self.config.features)?;
        Ok(argmax(&self.logits(&f)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// SHA-256 of the serialized model, hex encoded.
    pub fn content_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_json()?.as_bytes())))
    }
}

pub fn predict_proba(model: &LinearClassifierModel, doc: &Document) -> Result<DomainVector> {
    model.predict_proba(doc)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

struct Example {
    x: Vec<(u32, f64)>,
    y: usize,
}

/// Weights stored as `scale * raw`, so L2 decay costs O(1) per step.
struct ScaledWeights {
    raw: Vec<f64>,
    scale: f64,
    buckets: usize,
}

impl ScaledWeights {
    fn logits(&self, bias: &[f64], x: &[(u32, f64)]) -> Vec<f64> {
        bias.iter()
            .enumerate()
            .map(|(c, &b0)| {
                let row = &self.raw[c * self.buckets..(c + 1) * self.buckets];
                b0 + self.scale * x.iter().map(|&(i, v)| row[i as usize] * v).sum::<f64>()
            })
            .collect()
    }

    fn squared_norm(&self) -> f64 {
        self.scale * self.scale * self.raw.iter().map(|w| w * w).sum::<f64>()
    }

    fn fold(&mut self) {
        for w in &mut self.raw {
            *w *= self.scale;
        }
        self.scale = 1.0;
    }
}

fn objective(w: &ScaledWeights, bias: &[f64], data: &[Example], l2: f64) -> f64 {
    let ce: f64 = data
        .iter()
        .map(|e| {
            let z = w.logits(bias, &e.x);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - z[e.y]
        })
        .sum();
    ce / data.len() as f64 + 0.5 * l2 * w.squared_norm()
}

/// Fits the classifier by mini-batch SGD on a seeded 90/10 train/holdout split.
pub fn train(docs: &[Document], config: &TrainConfig) -> Result<LinearClassifierModel> {
    let n = config.n_classes;
    if config.batch_size == 0 || config.epochs == 0 || !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(Error::InvalidArgument(
            "batch_size and epochs must be positive, holdout_fraction in [0, 1)".into(),
        ));
    }
    let mut seen = vec![false; n];
    let mut examples = Vec::with_capacity(docs.len());
    for (index, doc) in docs.iter().enumerate() {
        let y = doc.label.ok_or(Error::MissingLabel { index })?;
        if y >= n {
            return Err(Error::LabelOutOfRange { label: y, n });
        }
        seen[y] = true;
        let f = featurize(doc, &config.features)?;
        examples.push(Example {
            x: f.values(config.features.normalize),
            y,
        });
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClassCorpus);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng);
    let holdout_size = ((examples.len() as f64 * config.holdout_fraction).round() as usize).min(examples.len() - 1);
    let split = examples.len() - holdout_size;
    let mut slots: Vec<Option<Example>> = examples.into_iter().map(Some).collect();
    let take = |slots: &mut Vec<Option<Example>>, idx: &[usize]| -> Vec<Example> {
        idx.iter().map(|&i| slots[i].take().expect("index used once")).collect()
    };
    let train_set = take(&mut slots, &order[..split]);
    let holdout = take(&mut slots, &order[split..]);

    let buckets = config.features.buckets;
    let mut w = ScaledWeights {
        raw: vec![0.0; n * buckets],
        scale: 1.0,
        buckets,
    };
    let mut bias = vec![0.0; n];
    let mut step = 0u64;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut idx: Vec<usize> = (0..train_set.len()).collect();
    for _ in 0..config.epochs {
        idx.shuffle(&mut rng);
        for batch in idx.chunks(config.batch_size) {
            step += 1;
            let lr = config.learning_rate / (step as f64).sqrt();
            let bs = batch.len() as f64;
            let residuals: Vec<Vec<f64>> = batch
                .iter()
                .map(|&i| {
                    let e = &train_set[i];
                    let mut p = softmax(&w.logits(&bias, &e.x));
                    p[e.y] -= 1.0;
                    p
                })
                .collect();
            w.scale *= 1.0 - lr * config.l2;
            for (&i, r) in batch.iter().zip(&residuals) {
                for (c, &g) in r.iter().enumerate() {
                    let coef = lr * g / bs / w.scale;
                    let row = &mut w.raw[c * buckets..(c + 1) * buckets];
                    for &(f, v) in &train_set[i].x {
                        row[f as usize] -= coef * v;
                    }
                }
            }
            for (c, b) in bias.iter_mut().enumerate() {
                *b -= lr * residuals.iter().map(|r| r[c]).sum::<f64>() / bs;
            }
            if w.scale < 1e-6 {
                w.fold();
            }
        }
        epoch_losses.push(objective(&w, &bias, &train_set, config.l2));
    }
    w.fold();

    let correct = holdout.iter().filter(|e| argmax(&w.logits(&bias, &e.x)) == e.y).count();
    let holdout_accuracy = if holdout.is_empty() {
        f64::NAN
    } else {
        correct as f64 / holdout.len() as f64
    };
    Ok(LinearClassifierModel {
        config: config.clone(),
        report: Some(TrainReport {
            train_size: train_set.len(),
            holdout_size: holdout.len(),
            holdout_accuracy,
            epoch_losses,
        }),
        bias,
        weights: w.raw,
    })
}

#[derive(Serialize, Deserialize)]
struct ProbaRow {
    id: String,
    proba: Vec<f64>,
}

/// Reads JSON Lines rows `{"id", "proba": [n floats]}`, validating each as a simplex point.
pub fn import_proba(path: &Path) -> Result<Vec<(String, DomainVector)>> {
    let mut out: Vec<(String, DomainVector)> = Vec::new();
    for (i, line) in open_reader(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ProbaRow = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if let Some((_, first)) = out.first() {
            if first.len() != row.proba.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: row.proba.len(),
                });
            }
        }
        out.push((row.id, DomainVector::from_input(&row.proba)?));
    }
    Ok(out)
}

pub fn export_proba<'a>(path: &Path, rows: impl IntoIterator<Item = (&'a str, &'a DomainVector)>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for (id, p) in rows {
        serde_json::to_writer(
            &mut w,
            &ProbaRow {
                id: id.to_string(),
                proba: p.as_slice().to_vec(),
            },
        )?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
