//! Meta-domain representations of text datasets and data-mixture search.
//!
//! A dataset is summarized as a probability vector over a fixed vocabulary of
//! meta-domains (a [`DomainVector`]). Stacking the vectors of the training
//! datasets gives a [`DatasetMatrix`]; any [`MixtureRatio`] over those datasets
//! then maps to a domain vector by a single matrix-vector product. On top of that
//! representation the crate offers two mixture searches:
//!
//! * [`da2`]: training-free search minimizing the distance between the mixed
//!   training distribution and the validation distribution.
//! * [`regress`]: per-meta-domain loss regressors composed additively through the
//!   validation vector.
//!
//! The numeric core ([`simplex`], [`distance`], [`eval`], [`vocab`]) is generic over
//! [`Scalar`]; the aliases below fix it to `f64`, which the rest of the pipeline uses.

pub mod classifier;
pub mod corpus;
pub mod da2;
pub mod distance;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod regress;
pub mod scalar;
pub mod search;
pub mod simplex;
pub mod synth;
pub mod vectorize;
pub mod vocab;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use simplex::TokenBudget;

/// Probability vector over meta-domains, 64-bit.
pub type DomainVector = simplex::DomainVector<f64>;
/// Mixture weights over training datasets, 64-bit.
pub type MixtureRatio = simplex::MixtureRatio<f64>;
/// Column stack of training-dataset domain vectors, 64-bit.
pub type DatasetMatrix = simplex::DatasetMatrix<f64>;
/// Document embeddings, 64-bit.
pub type EmbeddingSet = vocab::EmbeddingSet<f64>;
/// Meta-domain vocabulary with 64-bit centroids.
pub type MetaDomainVocabulary = vocab::MetaDomainVocabulary<f64>;

/// Single-precision variants, for callers holding `f32` embeddings.
pub type DomainVectorF32 = simplex::DomainVector<f32>;
pub type MixtureRatioF32 = simplex::MixtureRatio<f32>;
pub type DatasetMatrixF32 = simplex::DatasetMatrix<f32>;
pub type EmbeddingSetF32 = vocab::EmbeddingSet<f32>;
pub type MetaDomainVocabularyF32 = vocab::MetaDomainVocabulary<f32>;

/// Version string embedded in every output file.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
