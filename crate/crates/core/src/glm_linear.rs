//! Binary logistic regression with linear effects, fitted by iteratively
//! reweighted least squares (Newton steps with step-halving).

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::features::{FeatureName, FeatureRow};
use crate::sigmoid;

pub const MAX_ITERATIONS: usize = 100;
pub const RELATIVE_DEVIANCE_TOL: f64 = 1e-10;
const MAX_STEP_HALVINGS: usize = 30;
const PROB_CLIP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GlmError {
    #[error("need at least {needed} rows for {p} features, got {got}")]
    TooFewRows { needed: usize, got: usize, p: usize },
    #[error("both outcome labels must be present")]
    OneClass,
    #[error("weighted design matrix is singular")]
    SingularDesign,
    #[error("row is missing feature `{0}`")]
    MissingFeature(FeatureName),
    #[error("rows have inconsistent feature sets")]
    InconsistentRows,
}

/// A fitted linear-logistic model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: BTreeMap<FeatureName, f64>,
    pub converged: bool,
    pub deviance: f64,
}

pub(crate) fn deviance_of(y: &[f64], eta: &DVector<f64>) -> f64 {
    let mut dev = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let p = sigmoid(eta[i]).clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        dev += yi * p.ln() + (1.0 - yi) * (1.0 - p).ln();
    }
    -2.0 * dev
}

/// Core IRLS loop on an explicit design matrix (first column need not be an
/// intercept; the caller owns the parameterization). Also returns the
/// (penalized) deviance after every accepted step, starting from the
/// all-zero coefficient vector.
pub(crate) fn irls_traced(
    x: &DMatrix<f64>,
    y: &[f64],
    penalty: Option<&DMatrix<f64>>,
) -> Result<(DVector<f64>, f64, bool, Vec<f64>), GlmError> {
    let n = x.nrows();
    let q = x.ncols();
    let mut beta = DVector::zeros(q);
    let mut eta = x * &beta;

    let objective = |eta: &DVector<f64>, beta: &DVector<f64>| -> f64 {
        let mut obj = deviance_of(y, eta);
        if let Some(s) = penalty {
            obj += (beta.transpose() * s * beta)[(0, 0)];
        }
        obj
    };

    let mut obj = objective(&eta, &beta);
    let mut converged = false;
    let mut trace = vec![obj];

    for _ in 0..MAX_ITERATIONS {
        // Weighted normal equations: (X'WX + S) b = X'W z
        let mut xtwx = DMatrix::zeros(q, q);
        let mut xtwz = DVector::zeros(q);
        for i in 0..n {
            let p = sigmoid(eta[i]);
            let w = (p * (1.0 - p)).max(1e-10);
            let z = eta[i] + (y[i] - p) / w;
            let xi = x.row(i);
            for a in 0..q {
                xtwz[a] += xi[a] * w * z;
                for b in a..q {
                    xtwx[(a, b)] += xi[a] * w * xi[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        if let Some(s) = penalty {
            xtwx += s;
        }
        let chol = Cholesky::new(xtwx).ok_or(GlmError::SingularDesign)?;
        let proposal = chol.solve(&xtwz);

        // Step-halving: back off along the Newton direction if the
        // (penalized) deviance would increase.
        let direction = &proposal - &beta;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_STEP_HALVINGS {
            let candidate = &beta + &direction * step;
            let cand_eta = x * &candidate;
            let cand_obj = objective(&cand_eta, &candidate);
            if cand_obj.is_finite() && cand_obj <= obj + 1e-14 {
                let rel_change = (obj - cand_obj).abs() / (obj.abs() + 1e-10);
                beta = candidate;
                eta = cand_eta;
                obj = cand_obj;
                trace.push(obj);
                accepted = true;
                if rel_change < RELATIVE_DEVIANCE_TOL {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            // No admissible step (separation-style divergence) keeps the last
            // stable iterate with converged=false.
            break;
        }
    }

    let deviance = deviance_of(y, &(x * &beta));
    Ok((beta, deviance, converged, trace))
}

pub(crate) fn feature_order(rows: &[FeatureRow]) -> Result<Vec<FeatureName>, GlmError> {
    let order: Vec<FeatureName> = rows[0].values.keys().copied().collect();
    for row in rows {
        if row.values.len() != order.len() || !order.iter().all(|f| row.values.contains_key(f)) {
            return Err(GlmError::InconsistentRows);
        }
    }
    Ok(order)
}

pub(crate) fn check_labels(rows: &[FeatureRow]) -> Result<(), GlmError> {
    let has0 = rows.iter().any(|r| r.label == 0);
    let has1 = rows.iter().any(|r| r.label == 1);
    if has0 && has1 {
        Ok(())
    } else {
        Err(GlmError::OneClass)
    }
}

/// Maximize the Bernoulli log-likelihood of a linear-logistic model.
pub fn fit_logistic(rows: &[FeatureRow]) -> Result<LinearModel, GlmError> {
    Ok(fit_logistic_traced(rows)?.0)
}

/// [`fit_logistic`] plus the deviance after every accepted IRLS step
/// (element 0 is the null-coefficient starting value). The trace is
/// non-increasing by construction; exposing it lets callers verify that.
pub fn fit_logistic_traced(rows: &[FeatureRow]) -> Result<(LinearModel, Vec<f64>), GlmError> {
    if rows.is_empty() {
        return Err(GlmError::TooFewRows { needed: 2, got: 0, p: 0 });
    }
    let order = feature_order(rows)?;
    let p = order.len();
    if rows.len() < p + 2 {
        return Err(GlmError::TooFewRows { needed: p + 2, got: rows.len(), p });
    }
    check_labels(rows)?;

    let n = rows.len();
    let mut x = DMatrix::zeros(n, p + 1);
    let mut y = vec![0.0; n];
    for (i, row) in rows.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, f) in order.iter().enumerate() {
            x[(i, j + 1)] = row.values[f];
        }
        y[i] = row.label as f64;
    }

    let (beta, deviance, converged, trace) = irls_traced(&x, &y, None)?;
    Ok((
        LinearModel {
            intercept: beta[0],
            coefficients: order.iter().enumerate().map(|(j, &f)| (f, beta[j + 1])).collect(),
            converged,
            deviance,
        },
        trace,
    ))
}

impl LinearModel {
    /// Linear predictor for one row.
    pub fn linear_predictor(&self, row: &FeatureRow) -> Result<f64, GlmError> {
        let mut eta = self.intercept;
        for (f, b) in &self.coefficients {
            let x = row.values.get(f).ok_or(GlmError::MissingFeature(*f))?;
            eta += b * x;
        }
        Ok(eta)
    }

    pub fn predict_prob(&self, row: &FeatureRow) -> Result<f64, GlmError> {
        Ok(sigmoid(self.linear_predictor(row)?))
    }

    /// Name/estimate rows in stable feature order, intercept first, as CSV.
    pub fn coefficient_report(&self) -> String {
        let mut out = String::from("variable,estimate\n");
        out.push_str(&format!("(Intercept),{}\n", self.intercept));
        for f in FeatureName::ALL {
            if let Some(b) = self.coefficients.get(&f) {
                out.push_str(&format!("{f},{b}\n"));
            }
        }
        out
    }
}

/// L∞ norm of the log-likelihood gradient at the fitted coefficients.
/// Useful as an optimality check for non-separated data.
pub fn gradient_inf_norm(model: &LinearModel, rows: &[FeatureRow]) -> f64 {
    let order: Vec<FeatureName> = model.coefficients.keys().copied().collect();
    let mut grad = vec![0.0; order.len() + 1];
    for row in rows {
        let eta = model.linear_predictor(row).expect("rows match model features");
        let resid = row.label as f64 - sigmoid(eta);
        grad[0] += resid;
        for (j, f) in order.iter().enumerate() {
            grad[j + 1] += resid * row.values[f];
        }
    }
    grad.iter().fold(0.0f64, |m, g| m.max(g.abs()))
}
