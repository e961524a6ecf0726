//! Synthetic world with known ground truth.
//!
//! Each meta-domain is a categorical distribution over an alphabet of symbol
//! words: 80% of its mass sits on a block of symbols owned by that meta-domain and
//! 20% on a background distribution shared by all of them. Datasets are generated
//! as known mixtures of meta-domains, and the "validation loss" of a training
//! mixture is the cross-entropy between a meta-domain's distribution and the
//! blended symbol distribution of the mixture.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusHandle;
use crate::error::{Error, Result};
use crate::regress::{FitSample, SampleInput};
use crate::{DatasetMatrix, DomainVector, MixtureRatio};

/// Mass each meta-domain puts on its own symbol block.
pub const DOMINANT_MASS: f64 = 0.8;
/// Minimum pairwise total-variation distance between meta-domains.
pub const MIN_SEPARATION: f64 = 0.3;
/// Additive smoothing on blended distributions.
pub const SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub n: usize,
    pub alphabet_size: usize,
    pub doc_length: usize,
    pub seed: u64,
    pub token_dists: Vec<Vec<f64>>,
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn random_weights(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.random_range(0.5..1.5)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn generate_world(n: usize, alphabet_size: usize, doc_length: usize, seed: u64) -> Result<SyntheticWorld> {
    if n < 2 {
        return Err(Error::InvalidArgument("a world needs at least 2 meta-domains".into()));
    }
    if alphabet_size < 10 * n {
        return Err(Error::AlphabetTooSmall {
            alphabet_size,
            n,
            needed: 10 * n,
        });
    }
    if doc_length == 0 {
        return Err(Error::InvalidArgument("doc_length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = random_weights(&mut rng, alphabet_size);
    let block = alphabet_size / n;
    let token_dists = (0..n)
        .map(|j| {
            let own = random_weights(&mut rng, block);
            let mut p: Vec<f64> = background.iter().map(|b| (1.0 - DOMINANT_MASS) * b).collect();
            for (k, w) in own.into_iter().enumerate() {
                p[j * block + k] += DOMINANT_MASS * w;
            }
            p
        })
        .collect();
    let world = SyntheticWorld {
        n,
        alphabet_size,
        doc_length,
        seed,
        token_dists,
    };
    world.validate()?;
    Ok(world)
}

impl SyntheticWorld {
    pub fn validate(&self) -> Result<()> {
        if self.token_dists.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.token_dists.len(),
            });
        }
        for p in &self.token_dists {
            if p.len() != self.alphabet_size {
                return Err(Error::DimensionMismatch {
                    expected: self.alphabet_size,
                    found: p.len(),
                });
            }
            crate::simplex::validate_simplex(p, 1e-9)?;
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                let tv = total_variation(&self.token_dists[i], &self.token_dists[j]);
                if tv < MIN_SEPARATION {
                    return Err(Error::InvalidArgument(format!(
                        "meta-domains {i} and {j} are only {tv:.3} apart in total variation"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let world: Self = serde_json::from_str(&text)?;
        world.validate()?;
        Ok(world)
    }

    /// Printable word for a symbol: fixed-width base-26 lowercase letters.
    pub fn symbol(&self, index: usize) -> String {
        let mut width = 2;
        while 26usize.pow(width as u32) < self.alphabet_size {
            width += 1;
        }
        let mut chars = vec![b'a'; width];
        let mut x = index;
        for c in chars.iter_mut().rev() {
            *c = b'a' + (x % 26) as u8;
            x /= 26;
        }
        String::from_utf8(chars).expect("ascii")
    }

    /// One document from meta-domain `domain`.
    pub fn sample_text(&self, domain: usize, rng: &mut impl Rng) -> String {
        let dist = WeightedIndex::new(&self.token_dists[domain]).expect("valid distribution");
        (0..self.doc_length)
            .map(|_| self.symbol(dist.sample(rng)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Symbol distribution of a meta-domain mixture: `sum_j v_j p_j`.
    pub fn blend(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        let mut q = vec![0.0; self.alphabet_size];
        for (w, p) in v.iter().zip(&self.token_dists) {
            for (a, b) in q.iter_mut().zip(p) {
                *a += w * b;
            }
        }
        Ok(q)
    }

    /// Cross-entropy (nats) of every meta-domain against the smoothed blend of `v`.
    pub fn losses_for_vector(&self, v: &[f64]) -> Result<Vec<f64>> {
        let q = self.blend(v)?;
        let z = 1.0 + SMOOTHING * self.alphabet_size as f64;
        let log_q: Vec<f64> = q.iter().map(|x| ((x + SMOOTHING) / z).ln()).collect();
        Ok(self
            .token_dists
            .iter()
            .map(|p| -p.iter().zip(&log_q).map(|(a, l)| a * l).sum::<f64>())
            .collect())
    }
}

/// Per-meta-domain oracle losses and their weighting by a target domain vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleLoss {
    pub per_domain: Vec<f64>,
    /// `sum_i target_i * per_domain_i`.
    pub weighted: f64,
    pub smoothing: f64,
}

/// Validation loss of training on mixture `ratio` of datasets with true vectors `v_true`.
pub fn oracle_loss(
    world: &SyntheticWorld,
    ratio: &MixtureRatio,
    v_true: &DatasetMatrix,
    target: &DomainVector,
) -> Result<OracleLoss> {
    if v_true.n() != world.n || target.len() != world.n {
        return Err(Error::DimensionMismatch {
            expected: world.n,
            found: if v_true.n() != world.n {
                v_true.n()
            } else {
                target.len()
            },
        });
    }
    let v = v_true.mix_raw(ratio.as_slice())?;
    let per_domain = world.losses_for_vector(&v)?;
    let weighted = target.as_slice().iter().zip(&per_domain).map(|(a, b)| a * b).sum();
    Ok(OracleLoss {
        per_domain,
        weighted,
        smoothing: SMOOTHING,
    })
}

/// Oracle fit samples for the regression path, one per candidate mixture.
pub fn oracle_fit_samples(
    world: &SyntheticWorld,
    v_true: &DatasetMatrix,
    ratios: &[MixtureRatio],
) -> Result<Vec<FitSample>> {
    ratios
        .iter()
        .map(|r| {
            let v = v_true.mix_raw(r.as_slice())?;
            Ok(FitSample {
                input: SampleInput::Ratio(r.clone()),
                losses: world.losses_for_vector(&v)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub doc_count: usize,
    pub seed: u64,
    /// Write each document's meta-domain as `"label"` in the corpus itself.
    pub include_labels: bool,
}

#[derive(Debug)]
pub struct GeneratedDataset {
    pub handle: CorpusHandle,
    pub truth_path: PathBuf,
    pub labels: Vec<usize>,
}

/// Sidecar truth path: `x.jsonl` -> `x.truth.jsonl`.
pub fn truth_path(corpus: &Path) -> PathBuf {
    let stem = corpus
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.strip_suffix(".jsonl").unwrap_or(s))
        .unwrap_or("corpus");
    corpus.with_file_name(format!("{stem}.truth.jsonl"))
}

/// Writes `doc_count` documents whose meta-domains are drawn from `weights`.
pub fn generate_dataset(
    world: &SyntheticWorld,
    weights: &DomainVector,
    options: &DatasetOptions,
    path: &Path,
) -> Result<GeneratedDataset> {
    if weights.len() != world.n {
        return Err(Error::DimensionMismatch {
            expected: world.n,
            found: weights.len(),
        });
    }
    #[derive(Serialize)]
    struct Row<'a> {
        id: &'a str,
        text: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        label: Option<usize>,
    }
    #[derive(Serialize)]
    struct Truth<'a> {
        id: &'a str,
        label: usize,
        weights: &'a [f64],
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let pick =
        WeightedIndex::new(weights.as_slice()).map_err(|e| Error::InvalidArgument(format!("mixing weights: {e}")))?;
    let tp = truth_path(path);
    let create = |p: &Path| {
        std::fs::File::create(p)
            .map(std::io::BufWriter::new)
            .map_err(|e| Error::io(p, e))
    };
    let (mut out, mut truth) = (create(path)?, create(&tp)?);
    let mut labels = Vec::with_capacity(options.doc_count);
    for i in 0..options.doc_count {
        let label = pick.sample(&mut rng);
        let text = world.sample_text(label, &mut rng);
        let id = format!("doc-{i:06}");
        serde_json::to_writer(
            &mut out,
            &Row {
                id: &id,
                text: &text,
                label: options.include_labels.then_some(label),
            },
        )?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(
            &mut truth,
            &Truth {
                id: &id,
                label,
                weights: weights.as_slice(),
            },
        )?;
        truth.write_all(b"\n").map_err(|e| Error::io(&tp, e))?;
        labels.push(label);
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    truth.flush().map_err(|e| Error::io(&tp, e))?;
    Ok(GeneratedDataset {
        handle: CorpusHandle::new(path),
        truth_path: tp,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sample_documents;

    #[test]
    fn worlds_are_separable_and_reproducible() {
        let w = generate_world(2, 100, 16, 1).unwrap();
        assert!(total_variation(&w.token_dists[0], &w.token_dists[1]) >= 0.3);
        assert_eq!(w, generate_world(2, 100, 16, 1).unwrap());
        assert_ne!(w, generate_world(2, 100, 16, 2).unwrap());
        let w6 = generate_world(6, 60, 16, 3).unwrap();
        assert_eq!(w6.token_dists.len(), 6);
        for p in &w6.token_dists {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x > 0.0));
        }
        assert!(matches!(
            generate_world(6, 59, 16, 0),
            Err(Error::AlphabetTooSmall { needed: 60, .. })
        ));
    }

    #[test]
    fn symbols_are_fixed_width_and_distinct() {
        let w = generate_world(3, 700, 4, 0).unwrap();
        assert_eq!(w.symbol(0), "aaa");
        assert_eq!(w.symbol(27), "abb");
        let all: std::collections::BTreeSet<String> = (0..700).map(|i| w.symbol(i)).collect();
        assert_eq!(all.len(), 700);
    }

    #[test]
    fn one_hot_weights_give_single_label() {
        let dir = tempfile::TempDir::new().unwrap();
        let w = generate_world(3, 30, 8, 0).unwrap();
        let g = generate_dataset(
            &w,
            &DomainVector::one_hot(0, 3).unwrap(),
            &DatasetOptions {
                doc_count: 50,
                seed: 1,
                include_labels: false,
            },
            &dir.path().join("d.jsonl"),
        )
        .unwrap();
        assert!(g.labels.iter().all(|&l| l == 0));
        let truth = std::fs::read_to_string(&g.truth_path).unwrap();
        assert_eq!(truth.lines().count(), 50);
        assert!(truth.lines().all(|l| l.contains("\"label\":0")));
    }

    #[test]
    fn label_frequencies_follow_weights() {
        // Binomial sd at p = 0.7, n = 10^4 is ~0.0046; 0.02 is > 4 sd.
        let dir = tempfile::TempDir::new().unwrap();
        let w = generate_world(2, 20, 2, 0).unwrap();
        let g = generate_dataset(
            &w,
            &DomainVector::from_input(&[0.7, 0.3]).unwrap(),
            &DatasetOptions {
                doc_count: 10_000,
                seed: 9,
                include_labels: true,
            },
            &dir.path().join("d.jsonl"),
        )
        .unwrap();
        let f0 = g.labels.iter().filter(|&&l| l == 0).count() as f64 / 10_000.0;
        assert!((f0 - 0.7).abs() < 0.02);
        let docs: Vec<_> = g.handle.stream().unwrap().map(|d| d.unwrap()).collect();
        assert_eq!(docs[3].label, Some(g.labels[3]));
    }

    #[test]
    fn empty_dataset_is_empty_corpus_downstream() {
        let dir = tempfile::TempDir::new().unwrap();
        let w = generate_world(2, 20, 2, 0).unwrap();
        let g = generate_dataset(
            &w,
            &DomainVector::uniform(2).unwrap(),
            &DatasetOptions {
                doc_count: 0,
                seed: 0,
                include_labels: false,
            },
            &dir.path().join("d.jsonl"),
        )
        .unwrap();
        assert!(matches!(sample_documents(&g.handle, 10, 0), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn loss_matches_direct_summation() {
        let w = generate_world(4, 40, 8, 5).unwrap();
        let v_true = DatasetMatrix::new(vec![
            DomainVector::from_input(&[0.5, 0.5, 0.0, 0.0]).unwrap(),
            DomainVector::from_input(&[0.1, 0.0, 0.2, 0.7]).unwrap(),
        ])
        .unwrap();
        let target = DomainVector::from_input(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let r = MixtureRatio::from_input(&[0.35, 0.65]).unwrap();
        let got = oracle_loss(&w, &r, &v_true, &target).unwrap();
        // Oracle: blend symbol by symbol, then sum p * ln(1 / q).
        let mut expect_weighted = 0.0;
        for i in 0..4 {
            let mut l = 0.0;
            for s in 0..40 {
                let mut q = 0.0;
                for j in 0..2 {
                    for d in 0..4 {
                        q += r[j] * v_true.get(d, j) * w.token_dists[d][s];
                    }
                }
                let q = (q + 1e-9) / (1.0 + 40.0 * 1e-9);
                l += w.token_dists[i][s] * (1.0 / q).ln();
            }
            assert!((got.per_domain[i] - l).abs() < 1e-12);
            expect_weighted += target[i] * l;
        }
        assert!((got.weighted - expect_weighted).abs() < 1e-12);
    }

    #[test]
    fn gibbs_bound() {
        let w = generate_world(3, 30, 8, 7).unwrap();
        for i in 0..3 {
            let h = entropy(&w.token_dists[i]);
            let exact = w
                .losses_for_vector(DomainVector::one_hot(i, 3).unwrap().as_slice())
                .unwrap();
            assert!((exact[i] - h).abs() < 1e-6);
            for v in [[0.2, 0.3, 0.5], [0.9, 0.05, 0.05], [0.0, 0.5, 0.5]] {
                assert!(w.losses_for_vector(&v).unwrap()[i] >= h - 1e-6);
            }
        }
    }

    #[test]
    fn zero_blend_mass_stays_finite() {
        let mut w = generate_world(2, 20, 4, 0).unwrap();
        // Make meta-domain 1 put no mass where meta-domain 0 does.
        w.token_dists[1] = (0..20).map(|s| if s >= 10 { 0.1 } else { 0.0 }).collect();
        let l = w.losses_for_vector(&[0.0, 1.0]).unwrap();
        assert!(l[0].is_finite() && l[0] > 15.0);
    }
}
