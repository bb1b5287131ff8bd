//! Match-outcome prediction for knockout tournaments.
//!
//! The library builds win-probability models for head-to-head matches from
//! engineered covariates: chronological Elo ratings and two age transforms
//! (distance to age 30, distance to the [28, 32] interval), alongside the
//! conventional rank and ranking-points features. Three model families are
//! provided (linear logistic regression, P-spline additive logistic models,
//! and random forests), together with three chronological validation schemes
//! (expanding window, rolling window, leave-one-tournament-out) and
//! model-agnostic PDP/ICE explainability.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod dataset;
pub mod evaluation;
pub mod explain;
pub mod features;
pub mod forest;
pub mod glm_linear;
pub mod glm_spline;
pub mod model;
pub mod plot;

pub use dataset::{Dataset, MatchRecord};
pub use features::{EloTable, FeatureName, FeatureRow, Learner, ModelSpec};
pub use model::FittedModel;

/// Numerically stable logistic response function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::sigmoid;

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(10.0) - 1.0).abs() < 1e-4);
        assert!(sigmoid(-50.0) > 0.0);
        assert!((sigmoid(1.68) - 0.843).abs() < 1e-3);
    }

    #[test]
    fn sigmoid_complement() {
        for &x in &[-3.0, -0.7, 0.0, 0.2, 5.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }
}
