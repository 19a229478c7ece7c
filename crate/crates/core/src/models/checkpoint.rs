//! Versioned JSON model checkpoints.
//!
//! One schema covers every model kind:
//! `{"format_version": 1, "kind": "dca|ma|lr|la|mlp", "layout": {...},
//!   "weights": {name: {"rows": r, "cols": c, "data": [..]}},
//!   "masks": {...}, "hyper": {...}}`.
//! Floats use the shortest round-trip representation, so save -> load is
//! value-exact and re-saving reproduces identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::repr::Platform;
use crate::scalar::Scalar;

use super::{
    AutoencoderLayout, Direction, LatentAttribute, MaskSet, MaskedAutoencoder, MlpMapper,
    RidgeTransfer,
};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dca,
    Ma,
    Lr,
    La,
    Mlp,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Dca => "dca",
            ModelKind::Ma => "ma",
            ModelKind::Lr => "lr",
            ModelKind::La => "la",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dca" => Ok(ModelKind::Dca),
            "ma" => Ok(ModelKind::Ma),
            "lr" => Ok(ModelKind::Lr),
            "la" => Ok(ModelKind::La),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::InvalidConfig(format!(
                "unknown model kind {other}; expected dca|ma|lr|la|mlp"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixData<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> MatrixData<T> {
    fn from_matrix(m: &Matrix<T>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().to_vec(),
        }
    }

    fn from_vector(v: &[T]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    fn into_matrix(self) -> Result<Matrix<T>> {
        Matrix::from_vec(self.rows, self.cols, self.data)
    }

    fn into_vector(self) -> Result<Vec<T>> {
        if self.cols != 1 {
            return Err(Error::InvalidConfig(format!(
                "expected a column vector, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.data)
    }
}

/// On-disk checkpoint document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub format_version: u32,
    pub kind: ModelKind,
    pub layout: Value,
    weights: BTreeMap<String, MatrixData<T>>,
    masks: BTreeMap<String, MatrixData<T>>,
    pub hyper: BTreeMap<String, Value>,
}

/// How the unknown platform's input is filled at prediction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Substitution {
    /// Training-set platform mean (default).
    Mean,
    /// All zeros.
    Zeros,
}

impl std::str::FromStr for Substitution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Substitution::Mean),
            "zeros" => Ok(Substitution::Zeros),
            other => Err(Error::InvalidConfig(format!(
                "unknown substitution {other}; expected mean or zeros"
            ))),
        }
    }
}

/// A trained model of any kind, ready to predict in either direction.
#[derive(Debug, Clone)]
pub enum TrainedModel<T: Scalar> {
    Autoencoder {
        model: MaskedAutoencoder<T>,
        /// True for the disparity-preserving layout, false for the
        /// fully-connected variant.
        dca: bool,
        /// Training-set platform means used for input substitution.
        mean_t: Vec<T>,
        mean_y: Vec<T>,
    },
    Ridge {
        t2y: RidgeTransfer<T>,
        y2t: RidgeTransfer<T>,
    },
    Latent(LatentAttribute<T>),
    Mlp {
        t2y: MlpMapper<T>,
        y2t: MlpMapper<T>,
    },
}

impl<T: Scalar> TrainedModel<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Autoencoder { dca: true, .. } => ModelKind::Dca,
            TrainedModel::Autoencoder { dca: false, .. } => ModelKind::Ma,
            TrainedModel::Ridge { .. } => ModelKind::Lr,
            TrainedModel::Latent(_) => ModelKind::La,
            TrainedModel::Mlp { .. } => ModelKind::Mlp,
        }
    }

    /// Predicts the unknown platform's representation from the known one.
    /// `substitution` only matters for the autoencoder kinds.
    pub fn predict_cross(
        &self,
        known: &[T],
        direction: Direction,
        substitution: Substitution,
    ) -> Result<Vec<T>> {
        match self {
            TrainedModel::Autoencoder { model, mean_t, mean_y, .. } => {
                let substitute: Vec<T> = match (direction, substitution) {
                    (Direction::TwitterToYoutube, Substitution::Mean) => mean_y.clone(),
                    (Direction::TwitterToYoutube, Substitution::Zeros) => {
                        vec![T::zero(); model.layout.n_y]
                    }
                    (Direction::YoutubeToTwitter, Substitution::Mean) => mean_t.clone(),
                    (Direction::YoutubeToTwitter, Substitution::Zeros) => {
                        vec![T::zero(); model.layout.n_t]
                    }
                };
                model.predict_cross(known, direction, &substitute)
            }
            TrainedModel::Ridge { t2y, y2t } => match direction {
                Direction::TwitterToYoutube => t2y.predict(known),
                Direction::YoutubeToTwitter => y2t.predict(known),
            },
            TrainedModel::Latent(model) => match direction {
                Direction::TwitterToYoutube => model.predict(known, Platform::Twitter),
                Direction::YoutubeToTwitter => model.predict(known, Platform::Youtube),
            },
            TrainedModel::Mlp { t2y, y2t } => match direction {
                Direction::TwitterToYoutube => t2y.predict(known),
                Direction::YoutubeToTwitter => y2t.predict(known),
            },
        }
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint<T>> {
        let mut weights = BTreeMap::new();
        let mut masks = BTreeMap::new();
        let mut hyper = BTreeMap::new();
        let layout;

        match self {
            TrainedModel::Autoencoder { model, mean_t, mean_y, .. } => {
                layout = serde_json::to_value(model.layout)?;
                weights.insert("w1_t".into(), MatrixData::from_matrix(&model.w1_t));
                weights.insert("w1_y".into(), MatrixData::from_matrix(&model.w1_y));
                weights.insert("w2_t".into(), MatrixData::from_matrix(&model.w2_t));
                weights.insert("w2_y".into(), MatrixData::from_matrix(&model.w2_y));
                weights.insert("b1".into(), MatrixData::from_vector(&model.b1));
                weights.insert("b2_t".into(), MatrixData::from_vector(&model.b2_t));
                weights.insert("b2_y".into(), MatrixData::from_vector(&model.b2_y));
                weights.insert("mean_t".into(), MatrixData::from_vector(mean_t));
                weights.insert("mean_y".into(), MatrixData::from_vector(mean_y));
                masks.insert("w1_t".into(), MatrixData::from_matrix(&model.masks.w1_t));
                masks.insert("w1_y".into(), MatrixData::from_matrix(&model.masks.w1_y));
                masks.insert("w2_t".into(), MatrixData::from_matrix(&model.masks.w2_t));
                masks.insert("w2_y".into(), MatrixData::from_matrix(&model.masks.w2_y));
                hyper.insert("lambda".into(), serde_json::to_value(model.lambda)?);
                hyper.insert("mu".into(), serde_json::to_value(model.mu)?);
            }
            TrainedModel::Ridge { t2y, y2t } => {
                layout = serde_json::json!({
                    "dim_t": t2y.weights.cols(),
                    "dim_y": t2y.weights.rows(),
                });
                weights.insert("w_t2y".into(), MatrixData::from_matrix(&t2y.weights));
                weights.insert("w_y2t".into(), MatrixData::from_matrix(&y2t.weights));
                hyper.insert("lambda_t2y".into(), serde_json::to_value(t2y.lambda)?);
                hyper.insert("lambda_y2t".into(), serde_json::to_value(y2t.lambda)?);
            }
            TrainedModel::Latent(model) => {
                layout = serde_json::json!({
                    "dim_t": model.d_t.rows(),
                    "dim_y": model.d_y.rows(),
                    "m": model.m,
                });
                weights.insert("d_t".into(), MatrixData::from_matrix(&model.d_t));
                weights.insert("d_y".into(), MatrixData::from_matrix(&model.d_y));
                hyper.insert("lambda".into(), serde_json::to_value(model.lambda)?);
                hyper.insert("m".into(), serde_json::to_value(model.m)?);
            }
            TrainedModel::Mlp { t2y, y2t } => {
                layout = serde_json::json!({
                    "dim_t": t2y.input_dim(),
                    "dim_y": t2y.output_dim(),
                    "hidden": t2y.hidden_dim(),
                });
                weights.insert("t2y_w1".into(), MatrixData::from_matrix(&t2y.w1));
                weights.insert("t2y_b1".into(), MatrixData::from_vector(&t2y.b1));
                weights.insert("t2y_w2".into(), MatrixData::from_matrix(&t2y.w2));
                weights.insert("t2y_b2".into(), MatrixData::from_vector(&t2y.b2));
                weights.insert("y2t_w1".into(), MatrixData::from_matrix(&y2t.w1));
                weights.insert("y2t_b1".into(), MatrixData::from_vector(&y2t.b1));
                weights.insert("y2t_w2".into(), MatrixData::from_matrix(&y2t.w2));
                weights.insert("y2t_b2".into(), MatrixData::from_vector(&y2t.b2));
            }
        }

        Ok(Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            kind: self.kind(),
            layout,
            weights,
            masks,
            hyper,
        })
    }

    pub fn from_checkpoint(cp: Checkpoint<T>) -> Result<Self> {
        if cp.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "checkpoint format_version {} unsupported (expected {})",
                cp.format_version, CHECKPOINT_FORMAT_VERSION
            )));
        }
        let mut weights = cp.weights;
        let mut masks = cp.masks;
        let take = |map: &mut BTreeMap<String, MatrixData<T>>, name: &str| {
            map.remove(name)
                .ok_or_else(|| Error::InvalidConfig(format!("checkpoint missing entry {name}")))
        };
        let hyper_f64 = |hyper: &BTreeMap<String, Value>, name: &str| -> Result<T> {
            hyper
                .get(name)
                .and_then(Value::as_f64)
                .map(T::from_f64)
                .ok_or_else(|| Error::InvalidConfig(format!("checkpoint missing hyper {name}")))
        };

        match cp.kind {
            ModelKind::Dca | ModelKind::Ma => {
                let layout: AutoencoderLayout = serde_json::from_value(cp.layout)?;
                layout.validate()?;
                let mut model = MaskedAutoencoder {
                    layout,
                    w1_t: take(&mut weights, "w1_t")?.into_matrix()?,
                    w1_y: take(&mut weights, "w1_y")?.into_matrix()?,
                    w2_t: take(&mut weights, "w2_t")?.into_matrix()?,
                    w2_y: take(&mut weights, "w2_y")?.into_matrix()?,
                    b1: take(&mut weights, "b1")?.into_vector()?,
                    b2_t: take(&mut weights, "b2_t")?.into_vector()?,
                    b2_y: take(&mut weights, "b2_y")?.into_vector()?,
                    masks: MaskSet {
                        w1_t: take(&mut masks, "w1_t")?.into_matrix()?,
                        w1_y: take(&mut masks, "w1_y")?.into_matrix()?,
                        w2_t: take(&mut masks, "w2_t")?.into_matrix()?,
                        w2_y: take(&mut masks, "w2_y")?.into_matrix()?,
                    },
                    lambda: hyper_f64(&cp.hyper, "lambda")?,
                    mu: hyper_f64(&cp.hyper, "mu")?,
                    loss_trace: Vec::new(),
                };
                model.enforce_masks();
                Ok(TrainedModel::Autoencoder {
                    model,
                    dca: cp.kind == ModelKind::Dca,
                    mean_t: take(&mut weights, "mean_t")?.into_vector()?,
                    mean_y: take(&mut weights, "mean_y")?.into_vector()?,
                })
            }
            ModelKind::Lr => Ok(TrainedModel::Ridge {
                t2y: RidgeTransfer {
                    weights: take(&mut weights, "w_t2y")?.into_matrix()?,
                    lambda: hyper_f64(&cp.hyper, "lambda_t2y")?,
                },
                y2t: RidgeTransfer {
                    weights: take(&mut weights, "w_y2t")?.into_matrix()?,
                    lambda: hyper_f64(&cp.hyper, "lambda_y2t")?,
                },
            }),
            ModelKind::La => {
                let m = cp
                    .hyper
                    .get("m")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::InvalidConfig("checkpoint missing hyper m".into()))?;
                Ok(TrainedModel::Latent(LatentAttribute {
                    d_t: take(&mut weights, "d_t")?.into_matrix()?,
                    d_y: take(&mut weights, "d_y")?.into_matrix()?,
                    lambda: hyper_f64(&cp.hyper, "lambda")?,
                    m: m as usize,
                    objective_trace: Vec::new(),
                }))
            }
            ModelKind::Mlp => {
                let build = |weights: &mut BTreeMap<String, MatrixData<T>>,
                             prefix: &str|
                 -> Result<MlpMapper<T>> {
                    MlpMapper::from_parts(
                        weights
                            .remove(&format!("{prefix}_w1"))
                            .ok_or_else(|| {
                                Error::InvalidConfig(format!("checkpoint missing {prefix}_w1"))
                            })?
                            .into_matrix()?,
                        weights
                            .remove(&format!("{prefix}_b1"))
                            .ok_or_else(|| {
                                Error::InvalidConfig(format!("checkpoint missing {prefix}_b1"))
                            })?
                            .into_vector()?,
                        weights
                            .remove(&format!("{prefix}_w2"))
                            .ok_or_else(|| {
                                Error::InvalidConfig(format!("checkpoint missing {prefix}_w2"))
                            })?
                            .into_matrix()?,
                        weights
                            .remove(&format!("{prefix}_b2"))
                            .ok_or_else(|| {
                                Error::InvalidConfig(format!("checkpoint missing {prefix}_b2"))
                            })?
                            .into_vector()?,
                    )
                };
                Ok(TrainedModel::Mlp {
                    t2y: build(&mut weights, "t2y")?,
                    y2t: build(&mut weights, "y2t")?,
                })
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_with_extra_hyper(path, BTreeMap::new())
    }

    /// Saves with extra hyper entries (e.g. the split seed a CLI run used).
    pub fn save_with_extra_hyper(
        &self,
        path: &Path,
        extra: BTreeMap<String, Value>,
    ) -> Result<()> {
        let mut cp = self.to_checkpoint()?;
        cp.hyper.extend(extra);
        fs::write(path, serde_json::to_string_pretty(&cp)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, Checkpoint<T>)> {
        let text = fs::read_to_string(path)?;
        let cp: Checkpoint<T> = serde_json::from_str(&text)?;
        Ok((Self::from_checkpoint(cp.clone())?, cp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_mask, TrainConfig};
    use crate::numerics::RngStream;

    fn ae_model(dca: bool) -> TrainedModel<f64> {
        let layout = if dca {
            AutoencoderLayout { n_t: 3, n_y: 4, m_t: 1, m_c: 2, m_y: 1 }
        } else {
            AutoencoderLayout { n_t: 3, n_y: 4, m_t: 0, m_c: 4, m_y: 0 }
        };
        let mut rng = RngStream::new(12);
        let model = MaskedAutoencoder::init(layout, 0.005, 0.0001, 0.05, &mut rng).unwrap();
        TrainedModel::Autoencoder {
            model,
            dca,
            mean_t: vec![0.3, 0.3, 0.4],
            mean_y: vec![0.25; 4],
        }
    }

    #[test]
    fn autoencoder_round_trip_is_value_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let original = ae_model(true);
        original.save(&path).unwrap();
        let (loaded, cp) = TrainedModel::<f64>::load(&path).unwrap();
        assert_eq!(cp.kind, ModelKind::Dca);

        match (&original, &loaded) {
            (
                TrainedModel::Autoencoder { model: a, mean_t: mt_a, mean_y: my_a, .. },
                TrainedModel::Autoencoder { model: b, mean_t: mt_b, mean_y: my_b, .. },
            ) => {
                assert_eq!(a.params_flat(), b.params_flat());
                assert_eq!(a.masks, b.masks);
                assert_eq!(mt_a, mt_b);
                assert_eq!(my_a, my_b);
                assert!(b.masks_hold());
            }
            _ => panic!("kind changed in round trip"),
        }

        // Re-saving the loaded model reproduces identical bytes.
        let path2 = dir.path().join("model2.json");
        loaded.save(&path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn ma_kind_round_trips_with_all_ones_masks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ma.json");
        ae_model(false).save(&path).unwrap();
        let (loaded, cp) = TrainedModel::<f64>::load(&path).unwrap();
        assert_eq!(cp.kind, ModelKind::Ma);
        match loaded {
            TrainedModel::Autoencoder { model, dca, .. } => {
                assert!(!dca);
                let expect = build_mask::<f64>(&model.layout);
                assert_eq!(model.masks, expect);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn every_kind_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = RngStream::new(9);
        let u_t = Matrix::from_fn(3, 12, |_, _| rng.uniform(0.0, 1.0));
        let u_y = Matrix::from_fn(4, 12, |_, _| rng.uniform(0.0, 1.0));

        let ridge = TrainedModel::Ridge {
            t2y: crate::models::ridge_fit(&u_t, &u_y, 0.1).unwrap(),
            y2t: crate::models::ridge_fit(&u_y, &u_t, 0.1).unwrap(),
        };
        let latent = TrainedModel::Latent(
            crate::models::la_fit(&u_t, &u_y, 3, 0.05, 5, 2).unwrap(),
        );
        let cfg = TrainConfig { epochs: 3, batch_size: 4, ..TrainConfig::default() };
        let mlp = TrainedModel::Mlp {
            t2y: crate::models::mlp_fit(&u_t, &u_y, 4, &cfg).unwrap(),
            y2t: crate::models::mlp_fit(&u_y, &u_t, 4, &cfg).unwrap(),
        };

        for (name, model) in [("lr", ridge), ("la", latent), ("mlp", mlp)] {
            let path = dir.path().join(format!("{name}.json"));
            model.save(&path).unwrap();
            let (loaded, _) = TrainedModel::<f64>::load(&path).unwrap();
            let input = vec![0.3, 0.3, 0.4];
            let a = model
                .predict_cross(&input, Direction::TwitterToYoutube, Substitution::Mean)
                .unwrap();
            let b = loaded
                .predict_cross(&input, Direction::TwitterToYoutube, Substitution::Mean)
                .unwrap();
            assert_eq!(a, b, "{name} predictions changed across round trip");
        }
    }

    #[test]
    fn substitution_modes_differ_for_autoencoder() {
        let model = ae_model(true);
        let known = vec![0.2, 0.3, 0.5];
        let by_mean = model
            .predict_cross(&known, Direction::TwitterToYoutube, Substitution::Mean)
            .unwrap();
        let by_zeros = model
            .predict_cross(&known, Direction::TwitterToYoutube, Substitution::Zeros)
            .unwrap();
        assert_eq!(by_mean.len(), 4);
        assert_ne!(by_mean, by_zeros);
    }
}
