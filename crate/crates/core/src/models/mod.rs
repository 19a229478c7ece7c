//! Association models: the partially-connected multi-modal autoencoder (and
//! its fully-connected variant), ridge linear transfer, latent-attribute
//! sparse coding, and an MLP mapper.

mod autoencoder;
mod checkpoint;
mod latent;
mod mlp;
mod ridge;

pub use autoencoder::{
    build_mask, AeGradients, AutoencoderLayout, ForwardPass, MaskSet, MaskedAutoencoder,
};
pub use checkpoint::{
    Checkpoint, ModelKind, Substitution, TrainedModel, CHECKPOINT_FORMAT_VERSION,
};
pub use latent::{la_fit, lasso_coordinate_descent, LatentAttribute};
pub use mlp::{mlp_fit, MlpMapper};
pub use ridge::{ridge_fit, RidgeTransfer};

use serde::{Deserialize, Serialize};

use crate::numerics::AdamConfig;
use crate::scalar::Scalar;

/// Cross-platform prediction direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "t2y")]
    TwitterToYoutube,
    #[serde(rename = "y2t")]
    YoutubeToTwitter,
}

impl Direction {
    pub fn tag(self) -> &'static str {
        match self {
            Direction::TwitterToYoutube => "t2y",
            Direction::YoutubeToTwitter => "y2t",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t2y" => Ok(Direction::TwitterToYoutube),
            "y2t" => Ok(Direction::YoutubeToTwitter),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown direction {other}; expected t2y or y2t"
            ))),
        }
    }
}

/// Gradient-training hyperparameters shared by the autoencoder and the MLP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig<T>,
    /// Weight-decay coefficient on weight matrices (biases excluded).
    pub lambda: T,
    /// L1 sparsity coefficient on the hidden layer (autoencoder only).
    pub mu: T,
    /// Weights start uniform in `[-init_scale, init_scale]`; biases at zero.
    pub init_scale: T,
    pub seed: u64,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            adam: AdamConfig::default(),
            lambda: T::from_f64(0.005),
            mu: T::from_f64(0.0001),
            init_scale: T::from_f64(0.05),
            seed: 42,
        }
    }
}
