//! Dataset domain vectors: the mean classifier output over a document sample.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{import_proba, LinearClassifierModel};
use crate::corpus::{sample_documents, CorpusHandle, Document};
use crate::error::{Error, Result};
use crate::{DatasetMatrix, DomainVector};

/// Anything that maps a document to a distribution over meta-domains.
pub trait DocumentClassifier: Sync {
    fn n(&self) -> usize;
    fn classify(&self, doc: &Document) -> Result<DomainVector>;
    /// Content hash recorded in vector provenance.
    fn fingerprint(&self) -> Result<String>;
}

impl DocumentClassifier for LinearClassifierModel {
    fn n(&self) -> usize {
        self.n_classes()
    }

    fn classify(&self, doc: &Document) -> Result<DomainVector> {
        self.predict_proba(doc)
    }

    fn fingerprint(&self) -> Result<String> {
        self.content_hash()
    }
}

/// Externally computed probabilities, looked up by document id.
#[derive(Debug, Clone)]
pub struct ImportedProba {
    rows: HashMap<String, DomainVector>,
    n: usize,
    hash: String,
}

impl ImportedProba {
    pub fn new(rows: Vec<(String, DomainVector)>) -> Result<Self> {
        let n = rows.first().ok_or(Error::EmptyCorpus)?.1.len();
        let mut hasher = Sha256::new();
        for (id, p) in &rows {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
            hasher.update(id.as_bytes());
            for x in p.as_slice() {
                hasher.update(x.to_le_bytes());
            }
        }
        Ok(Self {
            hash: hex::encode(hasher.finalize()),
            rows: rows.into_iter().collect(),
            n,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::new(import_proba(path)?)
    }
}

impl DocumentClassifier for ImportedProba {
    fn n(&self) -> usize {
        self.n
    }

    fn classify(&self, doc: &Document) -> Result<DomainVector> {
        let id = doc.id.as_ref().ok_or(Error::MissingId { index: 0 })?;
        self.rows
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownDocument { id: id.clone() })
    }

    fn fingerprint(&self) -> Result<String> {
        Ok(self.hash.clone())
    }
}

/// A dataset's domain vector with the provenance needed to re-derive it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVectorRecord {
    pub dataset: String,
    pub n: usize,
    pub vector: DomainVector,
    pub num_sampled: usize,
    pub seed: u64,
    pub model_hash: String,
    /// Set when the corpus held fewer than the requested number of documents.
    #[serde(default)]
    pub undersized: bool,
}

/// Mean of `classifier(doc)` over `min(n_samples, corpus size)` sampled documents.
pub fn domain_vector(
    dataset: &str,
    handle: &CorpusHandle,
    classifier: &dyn DocumentClassifier,
    n_samples: usize,
    seed: u64,
) -> Result<DomainVectorRecord> {
    let sample = sample_documents(handle, n_samples, seed)?;
    let probs: Vec<DomainVector> = sample
        .documents
        .par_iter()
        .map(|d| classifier.classify(d))
        .collect::<Result<_>>()?;
    let n = classifier.n();
    let mut acc = vec![0.0; n];
    for p in &probs {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(p.as_slice()) {
            *a += x;
        }
    }
    let count = probs.len() as f64;
    let mean: Vec<f64> = acc.into_iter().map(|a| a / count).collect();
    Ok(DomainVectorRecord {
        dataset: dataset.to_string(),
        n,
        vector: DomainVector::from_internal(&mean)?,
        num_sampled: probs.len(),
        seed,
        model_hash: classifier.fingerprint()?,
        undersized: sample.undersized,
    })
}

/// Ordered domain-vector records forming the columns of a dataset matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecords {
    pub columns: Vec<DomainVectorRecord>,
}

impl MatrixRecords {
    pub fn matrix(&self) -> Result<DatasetMatrix> {
        DatasetMatrix::new(self.columns.iter().map(|r| r.vector.clone()).collect())
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.dataset.as_str()).collect()
    }
}

/// Column `j` is the domain vector of `datasets[j]`, sampled with seed `seed + j`.
pub fn dataset_matrix(
    datasets: &[(String, CorpusHandle)],
    classifier: &dyn DocumentClassifier,
    n_samples: usize,
    seed: u64,
) -> Result<MatrixRecords> {
    if datasets.is_empty() {
        return Err(Error::EmptyVector);
    }
    let columns = datasets
        .par_iter()
        .enumerate()
        .map(|(j, (name, handle))| domain_vector(name, handle, classifier, n_samples, seed.wrapping_add(j as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixRecords { columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_documents;
    use tempfile::TempDir;

    /// Reads the class straight from the document text.
    struct Oracle(usize);

    impl DocumentClassifier for Oracle {
        fn n(&self) -> usize {
            self.0
        }
        fn classify(&self, doc: &Document) -> Result<DomainVector> {
            DomainVector::one_hot(doc.text.trim().parse().unwrap(), self.0)
        }
        fn fingerprint(&self) -> Result<String> {
            Ok("oracle".into())
        }
    }

    fn corpus(dir: &TempDir, name: &str, labels: &[usize]) -> CorpusHandle {
        let docs: Vec<Document> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Document::new(l.to_string()).with_id(format!("{name}-{i}")))
            .collect();
        let p = dir.path().join(name);
        write_documents(&p, &docs).unwrap();
        CorpusHandle::new(p)
    }

    #[test]
    fn constant_classifier_output() {
        let dir = TempDir::new().unwrap();
        let h = corpus(&dir, "a", &[0; 20]);
        let r = domain_vector("a", &h, &Oracle(3), 1000, 0).unwrap();
        assert_eq!(r.vector.as_slice(), &[1.0, 0.0, 0.0]);
        assert!(r.undersized);
        assert_eq!(r.num_sampled, 20);
    }

    #[test]
    fn two_documents_average() {
        let dir = TempDir::new().unwrap();
        let h = corpus(&dir, "a", &[0, 1]);
        let r = domain_vector("a", &h, &Oracle(2), 2, 0).unwrap();
        assert_eq!(r.vector.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn imported_probabilities() {
        let dir = TempDir::new().unwrap();
        let h = corpus(&dir, "a", &[0, 1]);
        let imported = ImportedProba::new(vec![
            ("a-0".into(), DomainVector::from_input(&[0.2, 0.8]).unwrap()),
            ("a-1".into(), DomainVector::from_input(&[0.6, 0.4]).unwrap()),
        ])
        .unwrap();
        let r = domain_vector("a", &h, &imported, 10, 0).unwrap();
        assert!((r.vector[0] - 0.4).abs() < 1e-15);
        let missing = ImportedProba::new(vec![("zzz".into(), DomainVector::uniform(2).unwrap())]).unwrap();
        assert!(matches!(
            domain_vector("a", &h, &missing, 10, 0),
            Err(Error::UnknownDocument { .. })
        ));
    }

    #[test]
    fn column_order_follows_input_order() {
        let dir = TempDir::new().unwrap();
        let a = corpus(&dir, "a", &[0, 0, 1]);
        let b = corpus(&dir, "b", &[2, 2, 2, 1]);
        let fwd = dataset_matrix(
            &[
                ("a".into(), CorpusHandle::new(a.path())),
                ("b".into(), CorpusHandle::new(b.path())),
            ],
            &Oracle(3),
            100,
            5,
        )
        .unwrap();
        let rev = dataset_matrix(
            &[
                ("b".into(), CorpusHandle::new(b.path())),
                ("a".into(), CorpusHandle::new(a.path())),
            ],
            &Oracle(3),
            100,
            5,
        )
        .unwrap();
        assert_eq!(fwd.names(), vec!["a", "b"]);
        assert_eq!(rev.names(), vec!["b", "a"]);
        assert_eq!(fwd.columns[0].vector, rev.columns[1].vector);
        assert_eq!(fwd.columns[1].seed, 6);
        let single = dataset_matrix(&[("a".into(), CorpusHandle::new(a.path()))], &Oracle(3), 100, 5).unwrap();
        assert_eq!(single.columns[0], domain_vector("a", &a, &Oracle(3), 100, 5).unwrap());
    }

    #[test]
    fn empty_corpus_fails() {
        let dir = TempDir::new().unwrap();
        let h = corpus(&dir, "e", &[]);
        assert!(matches!(
            domain_vector("e", &h, &Oracle(2), 10, 0),
            Err(Error::EmptyCorpus)
        ));
    }
}
