//! A unified handle over the three fitted model families, used by the
//! explainability tools and the CLI's model files.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureName, FeatureRow};
use crate::forest::{ForestError, ForestModel};
use crate::glm_linear::{GlmError, LinearModel};
use crate::glm_spline::{SplineError, SplineModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Glm(#[from] GlmError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// An opaque trained predictor exposing probability prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FittedModel {
    Linear(LinearModel),
    Spline(SplineModel),
    Forest(ForestModel),
}

impl FittedModel {
    /// Win probability of player 1 for one difference-encoded row.
    pub fn predict_prob(&self, row: &FeatureRow) -> Result<f64, ModelError> {
        match self {
            FittedModel::Linear(m) => Ok(m.predict_prob(row)?),
            FittedModel::Spline(m) => Ok(m.predict_prob(row)?),
            FittedModel::Forest(m) => Ok(m.predict_prob(row)?),
        }
    }

    /// The features the model was trained on, in canonical order.
    pub fn features(&self) -> Vec<FeatureName> {
        match self {
            FittedModel::Linear(m) => m.coefficients.keys().copied().collect(),
            FittedModel::Spline(m) => m.smooths.keys().copied().collect(),
            FittedModel::Forest(m) => m.features.clone(),
        }
    }
}
