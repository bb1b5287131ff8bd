//! Scoring rules and chronological validation schemes, producing reports over
//! the candidate feature subsets and learner families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::features::{
    annotate_pre_match_elo, build_rows, AnnotatedMatch, Learner, ModelSpec, DEFAULT_ELO_INITIAL,
    DEFAULT_ELO_K,
};
use crate::forest::{fit_forest, stream_seed, tune_mtry, ForestConfig, DEFAULT_MIN_NODE, DEFAULT_NTREE};
use crate::glm_linear::fit_logistic;
use crate::glm_spline::{default_lambda_grid, fit_pspline_gam};
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no predictions to score")]
    Empty,
    #[error("no tournaments precede the first test tournament of year {0}")]
    NoPriorTournaments(i32),
    #[error("dataset has {got} tournaments; the scheme needs more than {needed}")]
    TooFewTournaments { got: usize, needed: usize },
    #[error("no tournaments found for final year {0}")]
    NoFinalYear(i32),
    #[error("unknown report format `{0}` (expected csv or md)")]
    UnknownFormat(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One scored test match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub match_ref: usize,
    /// Predicted win probability of player 1.
    pub prob: f64,
    pub truth: u8,
}

/// The three performance measures over one pooled prediction set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub classification_rate: f64,
    pub predictive_likelihood: f64,
    pub brier: f64,
    pub n: usize,
}

/// Proportion of matches whose hard label (1 iff prob > 0.5) equals the truth.
pub fn classification_rate(preds: &[Prediction]) -> Result<f64, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = preds
        .iter()
        .filter(|p| u8::from(p.prob > 0.5) == p.truth)
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Mean probability assigned to the realized outcome.
pub fn predictive_likelihood(preds: &[Prediction]) -> Result<f64, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = preds
        .iter()
        .map(|p| if p.truth == 1 { p.prob } else { 1.0 - p.prob })
        .sum();
    Ok(sum / preds.len() as f64)
}

/// Mean squared distance between predicted probability and outcome.
pub fn brier_score(preds: &[Prediction]) -> Result<f64, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = preds
        .iter()
        .map(|p| {
            let d = p.prob - p.truth as f64;
            d * d
        })
        .sum();
    Ok(sum / preds.len() as f64)
}

pub fn score_all(preds: &[Prediction]) -> Result<Scores, EvalError> {
    Ok(Scores {
        classification_rate: classification_rate(preds)?,
        predictive_likelihood: predictive_likelihood(preds)?,
        brier: brier_score(preds)?,
        n: preds.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    ExpandingWindow,
    RollingWindow,
    LeaveOneTournamentOutCv,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::ExpandingWindow => "expanding",
            Scheme::RollingWindow => "rolling",
            Scheme::LeaveOneTournamentOutCv => "cv",
        };
        f.write_str(s)
    }
}

/// Tuning knobs shared by every scheme run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub elo_init: f64,
    pub elo_k: f64,
    pub lambda_grid: Vec<f64>,
    pub forest_ntree: usize,
    pub forest_min_node: usize,
    /// Fixed mtry; `None` re-tunes per training window by cross-validation.
    pub mtry: Option<usize>,
    /// Trees per forest during mtry tuning (smaller than the final fit).
    pub tune_ntree: usize,
    pub tune_folds: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            elo_init: DEFAULT_ELO_INITIAL,
            elo_k: DEFAULT_ELO_K,
            lambda_grid: default_lambda_grid(),
            forest_ntree: DEFAULT_NTREE,
            forest_min_node: DEFAULT_MIN_NODE,
            mtry: None,
            tune_ntree: 50,
            tune_folds: 10,
            seed: 0,
        }
    }
}

/// Scores for one (spec, learner) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub spec: ModelSpec,
    pub scores: Scores,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scheme: Scheme,
    pub cells: Vec<Cell>,
}

/// One train/test step: training tournaments and a single test tournament,
/// all as chronological indices.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub train: Vec<usize>,
    pub test: usize,
}

/// Build the expanding-window iterations: each final-year tournament in turn
/// is predicted from every strictly earlier tournament.
pub fn expanding_iterations(data: &Dataset, final_year: i32) -> Result<Vec<Iteration>, EvalError> {
    let test_indices: Vec<usize> = data
        .tournaments
        .iter()
        .enumerate()
        .filter(|(_, (_, y))| *y == final_year)
        .map(|(i, _)| i)
        .collect();
    if test_indices.is_empty() {
        return Err(EvalError::NoFinalYear(final_year));
    }
    if test_indices[0] == 0 {
        return Err(EvalError::NoPriorTournaments(final_year));
    }
    Ok(test_indices
        .into_iter()
        .map(|t| Iteration { train: (0..t).collect(), test: t })
        .collect())
}

/// Rolling-window iterations: predict tournament `k` from the `window`
/// tournaments immediately before it.
pub fn rolling_iterations(data: &Dataset, window: usize) -> Result<Vec<Iteration>, EvalError> {
    let t = data.n_tournaments();
    if t <= window {
        return Err(EvalError::TooFewTournaments { got: t, needed: window });
    }
    Ok((window..t)
        .map(|k| Iteration { train: (k - window..k).collect(), test: k })
        .collect())
}

/// Leave-one-tournament-out iterations: every tournament is tested once,
/// trained on all others (including later ones).
pub fn loto_iterations(data: &Dataset) -> Result<Vec<Iteration>, EvalError> {
    let t = data.n_tournaments();
    if t < 2 {
        return Err(EvalError::TooFewTournaments { got: t, needed: 1 });
    }
    Ok((0..t)
        .map(|k| Iteration {
            train: (0..t).filter(|&i| i != k).collect(),
            test: k,
        })
        .collect())
}

fn scheme_tag(scheme: Scheme) -> u64 {
    match scheme {
        Scheme::ExpandingWindow => 1,
        Scheme::RollingWindow => 2,
        Scheme::LeaveOneTournamentOutCv => 3,
    }
}

fn cell_seed(config: &EvalConfig, scheme: Scheme, spec_idx: usize, window_idx: usize) -> u64 {
    let s = stream_seed(config.seed, scheme_tag(scheme));
    let s = stream_seed(s, spec_idx as u64);
    stream_seed(s, window_idx as u64)
}

fn run_cell(
    annotated: &[AnnotatedMatch],
    iterations: &[Iteration],
    spec: &ModelSpec,
    spec_idx: usize,
    scheme: Scheme,
    config: &EvalConfig,
) -> Result<Cell, EvalError> {
    let mut preds = Vec::new();
    for (window_idx, iteration) in iterations.iter().enumerate() {
        let train_set: BTreeSet<usize> = iteration.train.iter().copied().collect();
        debug_assert!(!train_set.contains(&iteration.test), "leakage: test tournament in training set");
        let train: Vec<AnnotatedMatch> = annotated
            .iter()
            .filter(|m| train_set.contains(&m.record.tournament_index))
            .cloned()
            .collect();
        let test: Vec<AnnotatedMatch> = annotated
            .iter()
            .filter(|m| m.record.tournament_index == iteration.test)
            .cloned()
            .collect();
        let train_rows = build_rows(&train, spec);
        let test_rows = build_rows(&test, spec);

        let probs: Vec<f64> = match spec.learner {
            Learner::Linear => {
                let model = fit_logistic(&train_rows).map_err(ModelError::from)?;
                test_rows
                    .iter()
                    .map(|r| model.predict_prob(r).map_err(ModelError::from))
                    .collect::<Result<_, _>>()?
            }
            Learner::Spline => {
                let model =
                    fit_pspline_gam(&train_rows, &config.lambda_grid).map_err(ModelError::from)?;
                test_rows
                    .iter()
                    .map(|r| model.predict_prob(r).map_err(ModelError::from))
                    .collect::<Result<_, _>>()?
            }
            Learner::Forest => {
                let seed = cell_seed(config, scheme, spec_idx, window_idx);
                let p = spec.features.len();
                let mtry = match config.mtry {
                    Some(m) => m.min(p),
                    None if p == 1 => 1,
                    None => {
                        let tune_config = ForestConfig {
                            ntree: config.tune_ntree,
                            min_node: config.forest_min_node,
                            seed: stream_seed(seed, 0xAAAA),
                        };
                        let candidates: Vec<usize> = (1..=p).collect();
                        tune_mtry(&train_rows, &candidates, config.tune_folds, &tune_config)
                            .map_err(ModelError::from)?
                    }
                };
                let forest_config = ForestConfig {
                    ntree: config.forest_ntree,
                    min_node: config.forest_min_node,
                    seed,
                };
                let model = fit_forest(&train_rows, mtry, &forest_config).map_err(ModelError::from)?;
                test_rows
                    .iter()
                    .map(|r| model.predict_prob(r).map_err(ModelError::from))
                    .collect::<Result<_, _>>()?
            }
        };
        for (row, prob) in test_rows.iter().zip(probs) {
            preds.push(Prediction {
                match_ref: preds.len(),
                prob,
                truth: row.label,
            });
        }
    }
    Ok(Cell { spec: spec.clone(), scores: score_all(&preds)? })
}

fn run_scheme(
    data: &Dataset,
    specs: &[ModelSpec],
    iterations: &[Iteration],
    scheme: Scheme,
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    // Elo is annotated once over the full chronology; only strictly-pre-match
    // values are attached, so later windows cannot leak a test outcome.
    let annotated = annotate_pre_match_elo(data, config.elo_init, config.elo_k);
    let cells: Vec<Cell> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| run_cell(&annotated, iterations, spec, i, scheme, config))
        .collect::<Result<_, _>>()?;
    Ok(EvaluationReport { scheme, cells })
}

pub fn expanding_window(
    data: &Dataset,
    specs: &[ModelSpec],
    final_year: i32,
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    let iterations = expanding_iterations(data, final_year)?;
    run_scheme(data, specs, &iterations, Scheme::ExpandingWindow, config)
}

pub fn rolling_window(
    data: &Dataset,
    specs: &[ModelSpec],
    window: usize,
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    let iterations = rolling_iterations(data, window)?;
    run_scheme(data, specs, &iterations, Scheme::RollingWindow, config)
}

pub fn loto_cv(
    data: &Dataset,
    specs: &[ModelSpec],
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    let iterations = loto_iterations(data)?;
    run_scheme(data, specs, &iterations, Scheme::LeaveOneTournamentOutCv, config)
}

/// Per-learner winning cell indices for each measure (higher is better for
/// rate and likelihood, lower for Brier); ties mark every tied cell.
pub struct BestMarkers {
    pub classification_rate: BTreeSet<usize>,
    pub predictive_likelihood: BTreeSet<usize>,
    pub brier: BTreeSet<usize>,
}

impl EvaluationReport {
    pub fn best_markers(&self, learner: Learner) -> BestMarkers {
        let idx: Vec<usize> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.spec.learner == learner)
            .map(|(i, _)| i)
            .collect();
        let argbest = |value: fn(&Scores) -> f64, maximize: bool| -> BTreeSet<usize> {
            let best = idx
                .iter()
                .map(|&i| value(&self.cells[i].scores))
                .fold(if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                    if maximize { a.max(b) } else { a.min(b) }
                });
            idx.iter()
                .copied()
                .filter(|&i| (value(&self.cells[i].scores) - best).abs() < 1e-12)
                .collect()
        };
        BestMarkers {
            classification_rate: argbest(|s| s.classification_rate, true),
            predictive_likelihood: argbest(|s| s.predictive_likelihood, true),
            brier: argbest(|s| s.brier, false),
        }
    }

    pub fn learners(&self) -> Vec<Learner> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.spec.learner) {
                out.push(c.spec.learner);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(EvalError::UnknownFormat(other.to_string())),
        }
    }
}

/// Render the report; Markdown bolds the per-learner winners, CSV marks them
/// with a `best` column listing the winning measures.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> String {
    let mut winners: Vec<(BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>)> = Vec::new();
    let learners = report.learners();
    for &l in &learners {
        let m = report.best_markers(l);
        winners.push((m.classification_rate, m.predictive_likelihood, m.brier));
    }
    let marker = |i: usize| -> (bool, bool, bool) {
        let mut out = (false, false, false);
        for (cr, pl, br) in &winners {
            out.0 |= cr.contains(&i);
            out.1 |= pl.contains(&i);
            out.2 |= br.contains(&i);
        }
        out
    };

    match format {
        ReportFormat::Csv => {
            let mut out = String::from("scheme,learner,features,n,class_rate,likelihood,brier,best\n");
            for (i, c) in report.cells.iter().enumerate() {
                let (cr, pl, br) = marker(i);
                let mut best = Vec::new();
                if cr {
                    best.push("class_rate");
                }
                if pl {
                    best.push("likelihood");
                }
                if br {
                    best.push("brier");
                }
                out.push_str(&format!(
                    "{},{},\"{}\",{},{},{},{},{}\n",
                    report.scheme,
                    c.spec.learner,
                    c.spec.feature_label(),
                    c.scores.n,
                    c.scores.classification_rate,
                    c.scores.predictive_likelihood,
                    c.scores.brier,
                    best.join("+")
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!("# Validation results ({})\n\n", report.scheme));
            out.push_str("| Learner | Features | n | Class. rate | Likelihood | Brier |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for (i, c) in report.cells.iter().enumerate() {
                let (cr, pl, br) = marker(i);
                let fmt_cell = |v: f64, bold: bool| {
                    if bold {
                        format!("**{v:.3}**")
                    } else {
                        format!("{v:.3}")
                    }
                };
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    c.spec.learner,
                    c.spec.feature_label(),
                    c.scores.n,
                    fmt_cell(c.scores.classification_rate, cr),
                    fmt_cell(c.scores.predictive_likelihood, pl),
                    fmt_cell(c.scores.brier, br),
                ));
            }
            out
        }
    }
}

/// Parse a CSV emitted by [`render_report`] back into score rows
/// (`(learner, features, Scores)` tuples).
pub fn parse_report_csv(text: &str) -> Result<Vec<(String, String, Scores)>, EvalError> {
    let mut out = Vec::new();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    for row in reader.records() {
        let row = row.map_err(|_| EvalError::UnknownFormat("csv".into()))?;
        let parse = |i: usize| -> f64 { row.get(i).unwrap_or("0").parse().unwrap_or(f64::NAN) };
        out.push((
            row.get(1).unwrap_or("").to_string(),
            row.get(2).unwrap_or("").to_string(),
            Scores {
                n: parse(3) as usize,
                classification_rate: parse(4),
                predictive_likelihood: parse(5),
                brier: parse(6),
            },
        ));
    }
    Ok(out)
}
