//! Distances between domain vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Huber,
    L1,
    L2,
    Js,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "huber" => Ok(Self::Huber),
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            "js" => Ok(Self::Js),
            other => Err(Error::InvalidArgument(format!("unknown distance {other:?}"))),
        }
    }
}

/// How per-component Huber terms are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    /// Huber threshold; ignored by the other kinds.
    pub huber_delta: f64,
    /// Applies to Huber only.
    pub reduction: Reduction,
}

impl Default for DistanceSpec {
    fn default() -> Self {
        Self::huber(0.005)
    }
}

impl DistanceSpec {
    pub fn new(kind: DistanceKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn huber(delta: f64) -> Self {
        Self {
            kind: DistanceKind::Huber,
            huber_delta: delta,
            reduction: Reduction::Mean,
        }
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.huber_delta > 0.0 && self.huber_delta.is_finite()) {
            return Err(Error::InvalidArgument("huber_delta must be positive".into()));
        }
        Ok(())
    }
}

/// Per-component Huber loss of residual `a`.
pub fn huber_term<T: Scalar>(a: T, delta: T) -> T {
    let half = T::of(0.5);
    let abs = a.abs();
    if abs <= delta {
        half * a * a
    } else {
        delta * (abs - half * delta)
    }
}

fn xlog2_ratio<T: Scalar>(p: T, m: T) -> T {
    if p <= T::zero() {
        T::zero()
    } else {
        p * (p / m).log2()
    }
}

/// Jensen-Shannon divergence in bits, in `[0, 1]`.
pub fn jensen_shannon<T: Scalar>(x: &[T], y: &[T]) -> T {
    let half = T::of(0.5);
    let mut kx = T::zero();
    let mut ky = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let m = half * (a + b);
        kx += xlog2_ratio(a, m);
        ky += xlog2_ratio(b, m);
    }
    (half * kx + half * ky).max(T::zero()).min(T::one())
}

pub fn distance<T: Scalar>(x: &[T], y: &[T], spec: &DistanceSpec) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(distance_unchecked(x, y, spec))
}

pub(crate) fn distance_unchecked<T: Scalar>(x: &[T], y: &[T], spec: &DistanceSpec) -> T {
    let residuals = x.iter().zip(y).map(|(&a, &b)| a - b);
    match spec.kind {
        DistanceKind::Huber => {
            let delta = T::of(spec.huber_delta);
            let total: T = residuals.map(|a| huber_term(a, delta)).sum();
            match spec.reduction {
                Reduction::Sum => total,
                Reduction::Mean => total / T::of_usize(x.len().max(1)),
            }
        }
        DistanceKind::L1 => residuals.map(|a| a.abs()).sum(),
        DistanceKind::L2 => residuals.map(|a| a * a).sum::<T>().sqrt(),
        DistanceKind::Js => jensen_shannon(x, y),
    }
}
