//! Cross-platform user association toolkit.
//!
//! Learns a unified user representation from per-platform topic vectors and
//! predicts the missing platform's representation for downstream video
//! recommendation. The centerpiece is a partially-connected multi-modal
//! autoencoder whose hidden layer splits into platform-specific blocks and a
//! shared block, so platform-specific interests are kept out of the
//! cross-platform association path. Linear ridge mapping, latent-attribute
//! sparse coding, and an MLP mapper are included as reference models, along
//! with the association/recommendation metrics and a synthetic dataset
//! generator used by the test harness.
//!
//! All numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases at the crate root pin the `f64` instantiation used by the file
//! formats and the CLI.

pub mod error;
pub mod metrics;
pub mod models;
pub mod numerics;
pub mod pipeline;
pub mod recommend;
pub mod repr;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense `f64` matrix, the concrete type used by the shipped pipeline.
pub type Matrix64 = numerics::Matrix<f64>;
/// Adam optimizer state over `f64` parameters.
pub type AdamState64 = numerics::AdamState<f64>;
/// Partially-connected multi-modal autoencoder at `f64`.
pub type MaskedAutoencoder64 = models::MaskedAutoencoder<f64>;
/// Ridge transfer model at `f64`.
pub type RidgeTransfer64 = models::RidgeTransfer<f64>;
/// Latent-attribute sparse-coding model at `f64`.
pub type LatentAttribute64 = models::LatentAttribute<f64>;
/// MLP mapping model at `f64`.
pub type MlpMapper64 = models::MlpMapper<f64>;
