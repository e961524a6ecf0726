//! Simplex-valued vectors: domain vectors, mixture ratios and the dataset matrix.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sum tolerance for vectors read from user input.
pub const INPUT_TOLERANCE: f64 = 1e-6;
/// Sum tolerance for vectors produced inside the crate.
pub const INTERNAL_TOLERANCE: f64 = 1e-9;
/// Entries at or above `-NEGATIVE_SLACK` are treated as zero instead of rejected.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// Validates `entries` as a point on the probability simplex.
///
/// Tiny negatives (down to `-1e-12`) are clamped to zero. When the sum is within
/// `tolerance` of one the entries are divided by their exact sum.
pub fn validate_simplex<T: Scalar>(entries: &[T], tolerance: T) -> Result<Vec<T>> {
    if entries.is_empty() {
        return Err(Error::EmptyVector);
    }
    let slack = T::of(NEGATIVE_SLACK);
    let mut out = Vec::with_capacity(entries.len());
    for (index, &value) in entries.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < -slack {
            return Err(Error::NegativeEntry {
                index,
                value: value.as_f64(),
            });
        }
        out.push(value.max(T::zero()));
    }
    let sum: T = out.iter().copied().sum();
    if (sum - T::one()).abs() > tolerance {
        return Err(Error::SumOutOfTolerance {
            sum: sum.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    // Sums within rounding of 1 are left alone so that re-validating is a no-op.
    if (sum - T::one()).abs() > T::epsilon() * T::of_usize(out.len()) {
        for v in &mut out {
            *v /= sum;
        }
    }
    Ok(out)
}

macro_rules! simplex_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize)]
        #[serde(transparent)]
        pub struct $name<T = f64>(Vec<T>);

        impl<T: Scalar> $name<T> {
            /// Validates and renormalizes `entries` under `tolerance`.
            pub fn new(entries: &[T], tolerance: T) -> Result<Self> {
                validate_simplex(entries, tolerance).map(Self)
            }

            /// Validates with the user-input tolerance.
            pub fn from_input(entries: &[T]) -> Result<Self> {
                Self::new(entries, T::of(INPUT_TOLERANCE))
            }

            /// Validates with the internal tolerance.
            pub fn from_internal(entries: &[T]) -> Result<Self> {
                Self::new(entries, T::of(INTERNAL_TOLERANCE))
            }

            pub fn one_hot(index: usize, len: usize) -> Result<Self> {
                one_hot_entries(index, len).map(Self)
            }

            pub fn uniform(len: usize) -> Result<Self> {
                if len == 0 {
                    return Err(Error::EmptyVector);
                }
                Ok(Self(vec![T::one() / T::of_usize(len); len]))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[T] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<T> {
                self.0
            }

            pub fn get(&self, index: usize) -> Option<T> {
                self.0.get(index).copied()
            }
        }

        impl<T> std::ops::Index<usize> for $name<T> {
            type Output = T;
            fn index(&self, index: usize) -> &T {
                &self.0[index]
            }
        }

        impl<'de, T> Deserialize<'de> for $name<T>
        where
            T: Scalar + Deserialize<'de>,
        {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let raw = Vec::<T>::deserialize(deserializer)?;
                Self::from_input(&raw).map_err(serde::de::Error::custom)
            }
        }
    };
}

simplex_newtype!(
    /// Probability distribution over the `n` meta-domains of a vocabulary.
    DomainVector
);

simplex_newtype!(
    /// Sampling proportions over `m` training datasets.
    MixtureRatio
);

impl<T: Scalar> MixtureRatio<T> {
    /// Appends a zero weight, for use after a column is appended to the matrix.
    pub fn extended_with_zero(&self) -> Self {
        let mut v = self.0.clone();
        v.push(T::zero());
        Self(v)
    }
}

fn one_hot_entries<T: Scalar>(index: usize, len: usize) -> Result<Vec<T>> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let mut v = vec![T::zero(); len];
    v[index] = T::one();
    Ok(v)
}

/// Column stack `[v_1, ..., v_m]` of training-dataset domain vectors, shape `n x m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DatasetMatrix<T = f64> {
    columns: Vec<DomainVector<T>>,
}

impl<T: Scalar> DatasetMatrix<T> {
    pub fn new(columns: Vec<DomainVector<T>>) -> Result<Self> {
        let first = columns.first().ok_or(Error::EmptyVector)?;
        let n = first.len();
        for col in &columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
        }
        Ok(Self { columns })
    }

    /// The `n x n` identity: column `j` is `one_hot(j, n)`.
    pub fn identity(n: usize) -> Result<Self> {
        let columns = (0..n)
            .map(|j| DomainVector::one_hot(j, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(columns)
    }

    /// Number of meta-domains (rows).
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    /// Number of datasets (columns).
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[DomainVector<T>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &DomainVector<T> {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.columns[j][i]
    }

    pub fn push_column(&mut self, column: DomainVector<T>) -> Result<()> {
        if column.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: column.len(),
            });
        }
        self.columns.push(column);
        Ok(())
    }

    /// `V * r`, accumulated column by column in index order.
    pub fn mix_raw(&self, ratio: &[T]) -> Result<Vec<T>> {
        if ratio.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: ratio.len(),
            });
        }
        let mut out = vec![T::zero(); self.n()];
        for (col, &w) in self.columns.iter().zip(ratio) {
            for (o, &x) in out.iter_mut().zip(col.as_slice()) {
                *o += x * w;
            }
        }
        Ok(out)
    }

    /// The domain vector of the mixture `ratio`.
    pub fn mix(&self, ratio: &MixtureRatio<T>) -> Result<DomainVector<T>> {
        let raw = self.mix_raw(ratio.as_slice())?;
        DomainVector::from_internal(&raw)
    }
}

impl<'de, T> Deserialize<'de> for DatasetMatrix<T>
where
    T: Scalar + Deserialize<'de>,
{
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let columns = Vec::<DomainVector<T>>::deserialize(deserializer)?;
        Self::new(columns).map_err(serde::de::Error::custom)
    }
}

/// Computes `V * r` for a matrix given by columns.
pub fn mix<T: Scalar>(matrix: &DatasetMatrix<T>, ratio: &MixtureRatio<T>) -> Result<DomainVector<T>> {
    matrix.mix(ratio)
}

/// One-hot domain vector `e_j`.
pub fn one_hot<T: Scalar>(j: usize, n: usize) -> Result<DomainVector<T>> {
    DomainVector::one_hot(j, n)
}

/// Training-token budget: `total_tokens * r_i <= dataset_tokens[i]` must hold for every dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub total_tokens: u64,
    pub dataset_tokens: Vec<u64>,
}

impl TokenBudget {
    pub fn new(total_tokens: u64, dataset_tokens: Vec<u64>) -> Result<Self> {
        if total_tokens == 0 {
            return Err(Error::InvalidArgument("total_tokens must be positive".into()));
        }
        if dataset_tokens.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = dataset_tokens.iter().position(|&s| s == 0) {
            return Err(Error::InvalidArgument(format!("dataset_tokens[{i}] must be positive")));
        }
        Ok(Self {
            total_tokens,
            dataset_tokens,
        })
    }

    pub fn m(&self) -> usize {
        self.dataset_tokens.len()
    }

    /// Greedy feasibility test: `sum_i min(|D_i| / total, 1) >= 1`.
    pub fn check_feasible(&self) -> Result<()> {
        let capped: u128 = self
            .dataset_tokens
            .iter()
            .map(|&s| u128::from(s.min(self.total_tokens)))
            .sum();
        if capped >= u128::from(self.total_tokens) {
            Ok(())
        } else {
            Err(Error::InfeasibleBudget {
                total: self.total_tokens,
                available: self.dataset_tokens.iter().sum(),
            })
        }
    }

    /// Whether every dataset can supply its share of the budget.
    pub fn admits(&self, ratio: &[f64]) -> bool {
        let total = self.total_tokens as f64;
        ratio.len() == self.m()
            && ratio
                .iter()
                .zip(&self.dataset_tokens)
                .all(|(&r, &size)| total * r <= size as f64)
    }

    /// Dataset token counts normalized to shares.
    pub fn token_shares(&self) -> Vec<f64> {
        let sum: f64 = self.dataset_tokens.iter().map(|&s| s as f64).sum();
        self.dataset_tokens.iter().map(|&s| s as f64 / sum).collect()
    }
}
