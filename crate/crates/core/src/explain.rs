//! Model-agnostic explainability: partial dependence curves, individual
//! conditional expectation bundles, and 2-D dependence surfaces.
//!
//! All outputs are on the probability scale. Per-row predictions are summed
//! in row order by a single accumulator, so results do not depend on how the
//! work is scheduled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureName, FeatureRow};
use crate::model::{FittedModel, ModelError};

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("model does not use feature `{0}`")]
    UnknownFeature(FeatureName),
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("no rows supplied")]
    NoRows,
    #[error("features must be distinct, got `{0}` twice")]
    DuplicateFeature(FeatureName),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Average model response as one feature sweeps its observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceCurve {
    pub feature: FeatureName,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Per-instance response curves; row i of `curves` tracks training row i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IceBundle {
    pub feature: FeatureName,
    pub grid: Vec<f64>,
    pub curves: Vec<Vec<f64>>,
}

impl IceBundle {
    /// Column-wise mean, which equals the PDP exactly (same summation order).
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.curves.len() as f64;
        (0..self.grid.len())
            .map(|j| self.curves.iter().map(|c| c[j]).sum::<f64>() / n)
            .collect()
    }
}

/// Average model response over a 2-D grid of two features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceSurface {
    pub features: (FeatureName, FeatureName),
    pub grid1: Vec<f64>,
    pub grid2: Vec<f64>,
    /// `values[i][j]` is the mean prediction at `(grid1[i], grid2[j])`.
    pub values: Vec<Vec<f64>>,
}

fn check_feature(model: &FittedModel, feature: FeatureName) -> Result<(), ExplainError> {
    if model.features().contains(&feature) {
        Ok(())
    } else {
        Err(ExplainError::UnknownFeature(feature))
    }
}

fn observed_grid(rows: &[FeatureRow], feature: FeatureName, grid_size: usize) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in rows {
        if let Some(&v) = r.values.get(&feature) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let step = (hi - lo) / (grid_size - 1) as f64;
    (0..grid_size).map(|i| lo + step * i as f64).collect()
}

/// Individual conditional expectation: one curve per row, the feature
/// overwritten grid point by grid point.
pub fn ice(
    model: &FittedModel,
    rows: &[FeatureRow],
    feature: FeatureName,
    grid_size: usize,
) -> Result<IceBundle, ExplainError> {
    check_feature(model, feature)?;
    if grid_size < 2 {
        return Err(ExplainError::GridTooSmall(grid_size));
    }
    if rows.is_empty() {
        return Err(ExplainError::NoRows);
    }
    let grid = observed_grid(rows, feature, grid_size);
    let mut curves = Vec::with_capacity(rows.len());
    for row in rows {
        let mut modified = row.clone();
        let mut curve = Vec::with_capacity(grid.len());
        for &x in &grid {
            modified.values.insert(feature, x);
            curve.push(model.predict_prob(&modified)?);
        }
        curves.push(curve);
    }
    Ok(IceBundle { feature, grid, curves })
}

/// Partial dependence: the column mean of the ICE bundle.
pub fn pdp(
    model: &FittedModel,
    rows: &[FeatureRow],
    feature: FeatureName,
    grid_size: usize,
) -> Result<DependenceCurve, ExplainError> {
    let bundle = ice(model, rows, feature, grid_size)?;
    Ok(DependenceCurve {
        feature,
        values: bundle.column_means(),
        grid: bundle.grid,
    })
}

/// 2-D partial dependence surface over two features.
pub fn pdp_2d(
    model: &FittedModel,
    rows: &[FeatureRow],
    f1: FeatureName,
    f2: FeatureName,
    grid1_size: usize,
    grid2_size: usize,
) -> Result<DependenceSurface, ExplainError> {
    if f1 == f2 {
        return Err(ExplainError::DuplicateFeature(f1));
    }
    check_feature(model, f1)?;
    check_feature(model, f2)?;
    if grid1_size < 2 || grid2_size < 2 {
        return Err(ExplainError::GridTooSmall(grid1_size.min(grid2_size)));
    }
    if rows.is_empty() {
        return Err(ExplainError::NoRows);
    }
    let grid1 = observed_grid(rows, f1, grid1_size);
    let grid2 = observed_grid(rows, f2, grid2_size);
    let n = rows.len() as f64;
    let mut values = vec![vec![0.0; grid2.len()]; grid1.len()];
    for (i, &x1) in grid1.iter().enumerate() {
        for (j, &x2) in grid2.iter().enumerate() {
            let mut acc = 0.0;
            for row in rows {
                let mut modified = row.clone();
                modified.values.insert(f1, x1);
                modified.values.insert(f2, x2);
                acc += model.predict_prob(&modified)?;
            }
            values[i][j] = acc / n;
        }
    }
    Ok(DependenceSurface { features: (f1, f2), grid1, grid2, values })
}

/// Seeded row subsample for readable ICE plots on large data. The grid is
/// computed by the caller from the full rows, so subsampling never moves it.
pub fn subsample_rows(rows: &[FeatureRow], k: usize, seed: u64) -> Vec<FeatureRow> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    if k >= rows.len() {
        return rows.to_vec();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(k);
    idx.sort_unstable();
    idx.into_iter().map(|i| rows[i].clone()).collect()
}

pub fn curve_csv(curve: &DependenceCurve) -> String {
    let mut out = String::from("x,pdp\n");
    for (x, v) in curve.grid.iter().zip(&curve.values) {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

pub fn ice_csv(bundle: &IceBundle) -> String {
    let mut out = String::from("x");
    for i in 0..bundle.curves.len() {
        out.push_str(&format!(",row{i}"));
    }
    out.push('\n');
    for (j, x) in bundle.grid.iter().enumerate() {
        out.push_str(&x.to_string());
        for curve in &bundle.curves {
            out.push_str(&format!(",{}", curve[j]));
        }
        out.push('\n');
    }
    out
}

pub fn surface_csv(surface: &DependenceSurface) -> String {
    let mut out = format!("{}\\{}", surface.features.0, surface.features.1);
    for x2 in &surface.grid2 {
        out.push_str(&format!(",{x2}"));
    }
    out.push('\n');
    for (i, x1) in surface.grid1.iter().enumerate() {
        out.push_str(&x1.to_string());
        for j in 0..surface.grid2.len() {
            out.push_str(&format!(",{}", surface.values[i][j]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm_linear::LinearModel;
    use std::collections::BTreeMap;

    fn linear_model(coefs: &[(FeatureName, f64)], intercept: f64) -> FittedModel {
        FittedModel::Linear(LinearModel {
            intercept,
            coefficients: coefs.iter().copied().collect(),
            converged: true,
            deviance: 0.0,
        })
    }

    fn rows_2d(n: usize) -> Vec<FeatureRow> {
        (0..n)
            .map(|i| FeatureRow {
                values: BTreeMap::from([
                    (FeatureName::Elo, i as f64 / n as f64 * 4.0 - 2.0),
                    (FeatureName::Rank, (n - i) as f64 / n as f64 * 2.0 - 1.0),
                ]),
                label: (i % 2) as u8,
            })
            .collect()
    }

    #[test]
    fn pdp_equals_ice_column_mean() {
        let model = linear_model(&[(FeatureName::Elo, 1.3), (FeatureName::Rank, -0.7)], 0.2);
        let rows = rows_2d(40);
        let curve = pdp(&model, &rows, FeatureName::Elo, 25).unwrap();
        let bundle = ice(&model, &rows, FeatureName::Elo, 25).unwrap();
        assert_eq!(bundle.curves.len(), 40);
        for (a, b) in curve.values.iter().zip(bundle.column_means()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn additive_model_has_parallel_ice_curves() {
        let model = linear_model(&[(FeatureName::Elo, 0.9), (FeatureName::Rank, -0.4)], 0.0);
        let rows = rows_2d(30);
        let bundle = ice(&model, &rows, FeatureName::Elo, 20).unwrap();
        // Parallel on the link scale: pairwise differences of logits constant.
        let logit = |p: f64| (p / (1.0 - p)).ln();
        for c in &bundle.curves[1..] {
            let d0 = logit(c[0]) - logit(bundle.curves[0][0]);
            for j in 1..bundle.grid.len() {
                let dj = logit(c[j]) - logit(bundle.curves[0][j]);
                assert!((dj - d0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ignored_feature_gives_flat_pdp() {
        let model = linear_model(&[(FeatureName::Elo, 0.0), (FeatureName::Rank, -0.4)], 0.1);
        let rows = rows_2d(20);
        let curve = pdp(&model, &rows, FeatureName::Elo, 15).unwrap();
        for v in &curve.values {
            assert!((v - curve.values[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_model_gives_monotone_pdp() {
        let model = linear_model(&[(FeatureName::Elo, 2.0), (FeatureName::Rank, 0.3)], 0.0);
        let rows = rows_2d(25);
        let curve = pdp(&model, &rows, FeatureName::Elo, 30).unwrap();
        for w in curve.values.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn single_row_pdp_is_its_ice_curve() {
        let model = linear_model(&[(FeatureName::Elo, 1.0), (FeatureName::Rank, 1.0)], 0.0);
        let rows = rows_2d(7);
        let one = &rows[3..4];
        let curve = pdp(&model, one, FeatureName::Elo, 10).unwrap();
        let bundle = ice(&model, one, FeatureName::Elo, 10).unwrap();
        assert_eq!(curve.values, bundle.curves[0]);
    }

    #[test]
    fn constant_model_constant_surface() {
        let model = linear_model(&[(FeatureName::Elo, 0.0), (FeatureName::Rank, 0.0)], 0.7f64.ln() - (0.3f64).ln());
        let rows = rows_2d(12);
        let surface = pdp_2d(&model, &rows, FeatureName::Elo, FeatureName::Rank, 5, 6).unwrap();
        assert_eq!(surface.values.len(), 5);
        assert_eq!(surface.values[0].len(), 6);
        for row in &surface.values {
            for v in row {
                assert!((v - 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn additive_surface_separates() {
        let model = linear_model(&[(FeatureName::Elo, 0.8), (FeatureName::Rank, -0.5)], 0.1);
        let rows = rows_2d(15);
        let s = pdp_2d(&model, &rows, FeatureName::Elo, FeatureName::Rank, 6, 6).unwrap();
        // On the link scale, row differences must not depend on the column.
        let logit = |p: f64| (p / (1.0 - p)).ln();
        for i in 1..s.grid1.len() {
            let d0 = logit(s.values[i][0]) - logit(s.values[i - 1][0]);
            for j in 1..s.grid2.len() {
                let dj = logit(s.values[i][j]) - logit(s.values[i - 1][j]);
                assert!((dj - d0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn errors_reported() {
        let model = linear_model(&[(FeatureName::Elo, 1.0)], 0.0);
        let rows = rows_2d(5);
        assert!(matches!(
            pdp(&model, &rows, FeatureName::Age30, 10),
            Err(ExplainError::UnknownFeature(FeatureName::Age30))
        ));
        assert!(matches!(pdp(&model, &rows, FeatureName::Elo, 1), Err(ExplainError::GridTooSmall(1))));
        assert!(matches!(pdp(&model, &[], FeatureName::Elo, 10), Err(ExplainError::NoRows)));
        let two = linear_model(&[(FeatureName::Elo, 1.0), (FeatureName::Rank, 1.0)], 0.0);
        assert!(matches!(
            pdp_2d(&two, &rows, FeatureName::Elo, FeatureName::Elo, 5, 5),
            Err(ExplainError::DuplicateFeature(FeatureName::Elo))
        ));
    }

    #[test]
    fn subsampling_keeps_grid() {
        let model = linear_model(&[(FeatureName::Elo, 1.0), (FeatureName::Rank, 0.2)], 0.0);
        let rows = rows_2d(50);
        let full_grid = ice(&model, &rows, FeatureName::Elo, 12).unwrap().grid;
        let sub = subsample_rows(&rows, 10, 3);
        assert_eq!(sub.len(), 10);
        // Caller computes the grid from the full rows; verify the helper
        // itself never shifts values outside the observed range.
        let sub_grid = observed_grid(&rows, FeatureName::Elo, 12);
        assert_eq!(full_grid, sub_grid);
    }

    #[test]
    fn csv_shapes() {
        let model = linear_model(&[(FeatureName::Elo, 1.0), (FeatureName::Rank, 0.0)], 0.0);
        let rows = rows_2d(4);
        let curve = pdp(&model, &rows, FeatureName::Elo, 50).unwrap();
        assert_eq!(curve_csv(&curve).trim().lines().count(), 51);
        let bundle = ice(&model, &rows, FeatureName::Elo, 8).unwrap();
        assert_eq!(ice_csv(&bundle).trim().lines().count(), 9);
        let surface = pdp_2d(&model, &rows, FeatureName::Elo, FeatureName::Rank, 4, 3).unwrap();
        assert_eq!(surface_csv(&surface).trim().lines().count(), 5);
    }
}
