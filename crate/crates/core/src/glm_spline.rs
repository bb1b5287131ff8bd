//! Additive logistic regression with one penalized B-spline smooth per
//! covariate. Bases are cubic B-splines with equidistant-quantile interior
//! knots; smoothness comes from a squared difference penalty on adjacent
//! spline coefficients, with the penalty weight chosen by GCV over a grid.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::features::{FeatureName, FeatureRow};
use crate::glm_linear::{check_labels, feature_order, irls_traced, GlmError};
use crate::sigmoid;

pub const DEFAULT_N_BASIS: usize = 10;
pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_PENALTY_ORDER: usize = 2;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("basis needs at least degree+2 knot positions")]
    TooFewKnots,
    #[error("knots must be non-decreasing and finite")]
    InvalidKnots,
    #[error("penalty order {order} must satisfy 0 < order < n_basis = {n_basis}")]
    PenaltyOrder { order: usize, n_basis: usize },
    #[error("degenerate data range for smooth `{0}` (all values equal)")]
    DegenerateRange(FeatureName),
    #[error("lambda grid is empty")]
    EmptyLambdaGrid,
    #[error("lambda grid contains a negative value")]
    NegativeLambda,
    #[error("singular penalized system while fitting smooth `{0}`")]
    SingularSmooth(FeatureName),
    #[error("model has no smooth for feature `{0}`")]
    UnknownFeature(FeatureName),
    #[error("grid size must be at least 2")]
    GridTooSmall,
    #[error(transparent)]
    Glm(#[from] GlmError),
}

/// A clamped B-spline basis on a fixed knot vector.
///
/// The knot vector stores boundary knots with multiplicity `degree + 1`, so
/// `n_basis = interior_knots + degree + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub n_basis: usize,
}

impl SplineBasis {
    /// Build from explicit interior knots and boundary values.
    pub fn new(degree: usize, interior: &[f64], min: f64, max: f64) -> Result<Self, SplineError> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(SplineError::InvalidKnots);
        }
        let mut knots = Vec::with_capacity(interior.len() + 2 * (degree + 1));
        knots.extend(std::iter::repeat(min).take(degree + 1));
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat(max).take(degree + 1));
        if knots.windows(2).any(|w| w[0] > w[1]) || interior.iter().any(|k| *k < min || *k > max) {
            return Err(SplineError::InvalidKnots);
        }
        Ok(SplineBasis {
            degree,
            knots,
            n_basis: interior.len() + degree + 1,
        })
    }

    /// Place interior knots at equidistant quantiles of the data.
    pub fn from_data(xs: &[f64], n_basis: usize, degree: usize) -> Result<Self, SplineError> {
        if n_basis < degree + 1 {
            return Err(SplineError::TooFewKnots);
        }
        let mut sorted: Vec<f64> = xs.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        if min >= max {
            return Err(SplineError::InvalidKnots);
        }
        let m = n_basis - degree - 1;
        let interior: Vec<f64> = (1..=m)
            .map(|j| {
                let q = j as f64 / (m + 1) as f64;
                let pos = q * (sorted.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let frac = pos - lo as f64;
                if lo + 1 < sorted.len() {
                    sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
                } else {
                    sorted[lo]
                }
            })
            .collect();
        SplineBasis::new(degree, &interior, min, max)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Evaluate all basis functions at `x` via the Cox–de Boor recursion.
    /// Inputs outside the domain are clamped to the boundary.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let d = self.degree;
        let t = &self.knots;

        // Knot span: largest k with t[k] <= x < t[k+1] among valid spans.
        let mut span = self.n_basis - 1;
        if x < hi {
            for k in d..self.n_basis {
                if x >= t[k] && x < t[k + 1] {
                    span = k;
                    break;
                }
            }
        }

        // Triangular scheme: values of the d+1 basis functions that are
        // non-zero on this span.
        let mut local = vec![0.0; d + 1];
        local[0] = 1.0;
        let mut left = vec![0.0; d + 1];
        let mut right = vec![0.0; d + 1];
        for j in 1..=d {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom == 0.0 { 0.0 } else { local[r] / denom };
                local[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            local[j] = saved;
        }

        let mut out = vec![0.0; self.n_basis];
        for (j, v) in local.iter().enumerate() {
            out[span - d + j] = *v;
        }
        out
    }
}

/// `DᵀD` for the order-th difference operator on `d` coefficients.
pub fn difference_penalty(d: usize, order: usize) -> Result<DMatrix<f64>, SplineError> {
    if order == 0 || d <= order {
        return Err(SplineError::PenaltyOrder { order, n_basis: d });
    }
    let mut diff = DMatrix::<f64>::identity(d, d);
    let mut rows = d;
    for _ in 0..order {
        let mut next = DMatrix::zeros(rows - 1, d);
        for i in 0..rows - 1 {
            for j in 0..d {
                next[(i, j)] = diff[(i + 1, j)] - diff[(i, j)];
            }
        }
        diff = next;
        rows -= 1;
    }
    Ok(diff.transpose() * diff)
}

/// One fitted smooth: its basis, coefficients and selected penalty weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Smooth {
    pub basis: SplineBasis,
    pub gamma: Vec<f64>,
    pub lambda: f64,
}

impl Smooth {
    /// Centered effect value at `x` (clamped to the training range).
    pub fn value(&self, x: f64) -> f64 {
        self.basis
            .eval(x)
            .iter()
            .zip(&self.gamma)
            .map(|(b, g)| b * g)
            .sum()
    }
}

/// A fitted additive logistic model with penalized spline smooths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplineModel {
    pub intercept: f64,
    pub smooths: BTreeMap<FeatureName, Smooth>,
    pub converged: bool,
    pub deviance: f64,
}

/// The default log-spaced smoothing grid: 21 points from 1e−4 to 1e6.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..21).map(|i| 10f64.powf(-4.0 + 0.5 * i as f64)).collect()
}

struct SmoothDesign {
    feature: FeatureName,
    basis: SplineBasis,
    /// n × d raw basis evaluations at the training points.
    b: DMatrix<f64>,
    /// d × (d−1) null-space map enforcing the sum-to-zero constraint.
    z: DMatrix<f64>,
    /// (d−1) × (d−1) reparameterized difference penalty Zᵀ(DᵀD)Z.
    penalty: DMatrix<f64>,
}

/// Orthonormal basis of the null space of the row vector `c`, via the
/// Householder reflection mapping `c` onto a coordinate axis.
fn constraint_null_space(c: &DVector<f64>) -> DMatrix<f64> {
    let d = c.len();
    let mut v = c.clone();
    let norm = v.norm();
    v[0] += if v[0] >= 0.0 { norm } else { -norm };
    let vnorm2 = v.norm_squared();
    // H = I − 2 v vᵀ / |v|²; its columns 1..d span null(cᵀ).
    let mut z = DMatrix::zeros(d, d - 1);
    for j in 1..d {
        for i in 0..d {
            let h = f64::from(i == j) - 2.0 * v[i] * v[j] / vnorm2;
            z[(i, j - 1)] = h;
        }
    }
    z
}

fn build_designs(
    rows: &[FeatureRow],
    order: &[FeatureName],
    n_basis: usize,
    degree: usize,
    penalty_order: usize,
) -> Result<Vec<SmoothDesign>, SplineError> {
    let n = rows.len();
    let raw_penalty = difference_penalty(n_basis, penalty_order)?;
    order
        .iter()
        .map(|&feature| {
            let xs: Vec<f64> = rows.iter().map(|r| r.values[&feature]).collect();
            let basis = SplineBasis::from_data(&xs, n_basis, degree)
                .map_err(|_| SplineError::DegenerateRange(feature))?;
            let mut b = DMatrix::zeros(n, n_basis);
            for (i, &x) in xs.iter().enumerate() {
                for (j, v) in basis.eval(x).into_iter().enumerate() {
                    b[(i, j)] = v;
                }
            }
            let col_sums = DVector::from_iterator(n_basis, (0..n_basis).map(|j| b.column(j).sum()));
            let z = constraint_null_space(&col_sums);
            let penalty = z.transpose() * &raw_penalty * &z;
            Ok(SmoothDesign { feature, basis, b, z, penalty })
        })
        .collect()
}

struct FitResult {
    beta: DVector<f64>,
    deviance: f64,
    converged: bool,
    gcv: f64,
    /// Penalized deviance after every accepted IRLS step.
    trace: Vec<f64>,
}

fn fit_at_lambdas(
    designs: &[SmoothDesign],
    y: &[f64],
    lambdas: &[f64],
) -> Result<FitResult, SplineError> {
    let n = y.len();
    let q = 1 + designs.iter().map(|d| d.z.ncols()).sum::<usize>();
    let mut x = DMatrix::zeros(n, q);
    let mut s = DMatrix::zeros(q, q);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    let mut col = 1;
    for (design, &lambda) in designs.iter().zip(lambdas) {
        let bz = &design.b * &design.z;
        let w = bz.ncols();
        x.view_mut((0, col), (n, w)).copy_from(&bz);
        let mut block = s.view_mut((col, col), (w, w));
        block.copy_from(&design.penalty);
        block *= lambda;
        col += w;
    }

    let (beta, deviance, converged, trace) = irls_traced(&x, y, Some(&s)).map_err(|e| match e {
        GlmError::SingularDesign => SplineError::SingularSmooth(designs[0].feature),
        other => SplineError::Glm(other),
    })?;

    // GCV at the final iterate: n · Σ wᵢ(zᵢ − xᵢθ)² / (n − tr(H))², with
    // tr(H) = q − tr(A⁻¹S) for A = XᵀWX + S.
    let eta = &x * &beta;
    let mut xtwx = DMatrix::zeros(q, q);
    let mut rss_w = 0.0;
    for i in 0..n {
        let p = sigmoid(eta[i]);
        let w = (p * (1.0 - p)).max(1e-10);
        let resid = y[i] - p;
        rss_w += resid * resid / w;
        let xi = x.row(i);
        for a in 0..q {
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
    let a_mat = &xtwx + &s;
    let chol = Cholesky::new(a_mat).ok_or(SplineError::SingularSmooth(designs[0].feature))?;
    let edf = q as f64 - (chol.solve(&s)).trace();
    let denom = (n as f64 - edf).max(1e-8);
    let gcv = n as f64 * rss_w / (denom * denom);

    Ok(FitResult { beta, deviance, converged, gcv, trace })
}

/// Fit the additive model, choosing each smooth's penalty weight from
/// `lambda_grid` by GCV (one coordinate-wise pass in feature order).
pub fn fit_pspline_gam(rows: &[FeatureRow], lambda_grid: &[f64]) -> Result<SplineModel, SplineError> {
    fit_pspline_gam_with(rows, lambda_grid, DEFAULT_N_BASIS, DEFAULT_DEGREE, DEFAULT_PENALTY_ORDER)
}

/// [`fit_pspline_gam`] plus the penalized-deviance trace of the final fit
/// (after λ selection); the trace is non-increasing by construction.
pub fn fit_pspline_gam_traced(
    rows: &[FeatureRow],
    lambda_grid: &[f64],
) -> Result<(SplineModel, Vec<f64>), SplineError> {
    fit_traced(rows, lambda_grid, DEFAULT_N_BASIS, DEFAULT_DEGREE, DEFAULT_PENALTY_ORDER)
}

pub fn fit_pspline_gam_with(
    rows: &[FeatureRow],
    lambda_grid: &[f64],
    n_basis: usize,
    degree: usize,
    penalty_order: usize,
) -> Result<SplineModel, SplineError> {
    Ok(fit_traced(rows, lambda_grid, n_basis, degree, penalty_order)?.0)
}

fn fit_traced(
    rows: &[FeatureRow],
    lambda_grid: &[f64],
    n_basis: usize,
    degree: usize,
    penalty_order: usize,
) -> Result<(SplineModel, Vec<f64>), SplineError> {
    if lambda_grid.is_empty() {
        return Err(SplineError::EmptyLambdaGrid);
    }
    if lambda_grid.iter().any(|&l| l < 0.0) {
        return Err(SplineError::NegativeLambda);
    }
    if rows.is_empty() {
        return Err(GlmError::TooFewRows { needed: n_basis + 2, got: 0, p: 0 }.into());
    }
    let order = feature_order(rows)?;
    if rows.len() < n_basis + 2 {
        return Err(GlmError::TooFewRows {
            needed: n_basis + 2,
            got: rows.len(),
            p: order.len(),
        }
        .into());
    }
    check_labels(rows)?;

    let y: Vec<f64> = rows.iter().map(|r| r.label as f64).collect();
    let designs = build_designs(rows, &order, n_basis, degree, penalty_order)?;

    // Coordinate-wise λ selection, one pass. Start every smooth at the grid
    // midpoint, then fix each smooth's λ at its GCV minimizer in turn.
    let mid = lambda_grid[lambda_grid.len() / 2];
    let mut lambdas = vec![mid; designs.len()];
    if lambda_grid.len() > 1 {
        for i in 0..designs.len() {
            let mut best = (f64::INFINITY, lambdas[i]);
            for &cand in lambda_grid {
                lambdas[i] = cand;
                let fit = fit_at_lambdas(&designs, &y, &lambdas)?;
                if fit.gcv < best.0 {
                    best = (fit.gcv, cand);
                }
            }
            lambdas[i] = best.1;
        }
    } else {
        lambdas = vec![lambda_grid[0]; designs.len()];
    }

    let fit = fit_at_lambdas(&designs, &y, &lambdas)?;

    let mut smooths = BTreeMap::new();
    let mut col = 1;
    for (design, &lambda) in designs.iter().zip(&lambdas) {
        let w = design.z.ncols();
        let zcoef = fit.beta.rows(col, w).into_owned();
        let gamma = &design.z * zcoef;
        smooths.insert(
            design.feature,
            Smooth {
                basis: design.basis.clone(),
                gamma: gamma.iter().copied().collect(),
                lambda,
            },
        );
        col += w;
    }

    Ok((
        SplineModel {
            intercept: fit.beta[0],
            smooths,
            converged: fit.converged,
            deviance: fit.deviance,
        },
        fit.trace,
    ))
}

impl SplineModel {
    pub fn linear_predictor(&self, row: &FeatureRow) -> Result<f64, SplineError> {
        let mut eta = self.intercept;
        for (f, smooth) in &self.smooths {
            let x = row
                .values
                .get(f)
                .ok_or(SplineError::Glm(GlmError::MissingFeature(*f)))?;
            eta += smooth.value(*x);
        }
        Ok(eta)
    }

    pub fn predict_prob(&self, row: &FeatureRow) -> Result<f64, SplineError> {
        Ok(sigmoid(self.linear_predictor(row)?))
    }

    /// Sample one smooth's centered effect on an equidistant grid over the
    /// training range.
    pub fn effect_curve(
        &self,
        feature: FeatureName,
        grid_size: usize,
    ) -> Result<Vec<(f64, f64)>, SplineError> {
        if grid_size < 2 {
            return Err(SplineError::GridTooSmall);
        }
        let smooth = self
            .smooths
            .get(&feature)
            .ok_or(SplineError::UnknownFeature(feature))?;
        let (lo, hi) = smooth.basis.domain();
        let step = (hi - lo) / (grid_size - 1) as f64;
        Ok((0..grid_size)
            .map(|i| {
                let x = lo + step * i as f64;
                (x, smooth.value(x))
            })
            .collect())
    }
}

/// Effect curve as a two-column CSV.
pub fn effect_curve_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("x,effect\n");
    for (x, v) in curve {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}
