//! Engineered covariates: chronological Elo ratings, age transforms,
//! difference-encoded feature rows, and the candidate model enumeration.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::dataset::{Dataset, MatchRecord};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("winner and loser are the same player: {0}")]
    SelfMatch(String),
    #[error("unknown feature name `{0}` (expected Points, Rank, Elo, Age30 or AgeInt)")]
    UnknownFeature(String),
    #[error("invalid feature set: {0}")]
    InvalidSpec(String),
}

/// The five candidate covariates, always encoded as player1 − player2
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureName {
    Points,
    Rank,
    Elo,
    Age30,
    AgeInt,
}

impl FeatureName {
    pub const ALL: [FeatureName; 5] = [
        FeatureName::Points,
        FeatureName::Rank,
        FeatureName::Elo,
        FeatureName::Age30,
        FeatureName::AgeInt,
    ];
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureName::Points => "Points",
            FeatureName::Rank => "Rank",
            FeatureName::Elo => "Elo",
            FeatureName::Age30 => "Age30",
            FeatureName::AgeInt => "AgeInt",
        };
        f.write_str(s)
    }
}

impl FromStr for FeatureName {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Points" => Ok(FeatureName::Points),
            "Rank" => Ok(FeatureName::Rank),
            "Elo" => Ok(FeatureName::Elo),
            "Age30" | "Age.30" => Ok(FeatureName::Age30),
            "AgeInt" | "Age.int" => Ok(FeatureName::AgeInt),
            other => Err(FeatureError::UnknownFeature(other.to_string())),
        }
    }
}

/// Model family used to fit a [`ModelSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Learner {
    Linear,
    Spline,
    Forest,
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Learner::Linear => "linear",
            Learner::Spline => "spline",
            Learner::Forest => "forest",
        };
        f.write_str(s)
    }
}

impl FromStr for Learner {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Learner::Linear),
            "spline" => Ok(Learner::Spline),
            "forest" => Ok(Learner::Forest),
            other => Err(FeatureError::UnknownFeature(other.to_string())),
        }
    }
}

/// A covariate subset plus the learner family that will fit it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub features: BTreeSet<FeatureName>,
    pub learner: Learner,
}

impl ModelSpec {
    pub fn new(features: impl IntoIterator<Item = FeatureName>, learner: Learner) -> Result<Self, FeatureError> {
        let features: BTreeSet<FeatureName> = features.into_iter().collect();
        if features.is_empty() {
            return Err(FeatureError::InvalidSpec("feature set is empty".into()));
        }
        if features.contains(&FeatureName::Age30) && features.contains(&FeatureName::AgeInt) {
            return Err(FeatureError::InvalidSpec(
                "Age30 and AgeInt are mutually exclusive".into(),
            ));
        }
        let has_age = features.contains(&FeatureName::Age30) || features.contains(&FeatureName::AgeInt);
        let has_base = features.contains(&FeatureName::Points)
            || features.contains(&FeatureName::Rank)
            || features.contains(&FeatureName::Elo);
        if has_age && !has_base {
            return Err(FeatureError::InvalidSpec(
                "an age feature requires at least one of Points, Rank, Elo".into(),
            ));
        }
        Ok(ModelSpec { features, learner })
    }

    /// Comma-separated feature list in canonical report order
    /// (Points, Rank, Elo, Age30, AgeInt).
    pub fn feature_label(&self) -> String {
        FeatureName::ALL
            .iter()
            .filter(|f| self.features.contains(f))
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse a label like `Points,Rank,Elo`.
    pub fn parse_features(s: &str, learner: Learner) -> Result<Self, FeatureError> {
        let feats = s
            .split(',')
            .map(FeatureName::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        ModelSpec::new(feats, learner)
    }
}

/// One difference-encoded observation: feature values (player1 − player2) and
/// the binary outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub values: BTreeMap<FeatureName, f64>,
    pub label: u8,
}

/// Mutable Elo state evolved chronologically over a match sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EloTable {
    pub ratings: HashMap<String, f64>,
    pub k_factor: f64,
    pub initial_rating: f64,
}

pub const DEFAULT_ELO_K: f64 = 32.0;
pub const DEFAULT_ELO_INITIAL: f64 = 1500.0;

impl Default for EloTable {
    fn default() -> Self {
        EloTable::new(DEFAULT_ELO_INITIAL, DEFAULT_ELO_K)
    }
}

impl EloTable {
    pub fn new(initial_rating: f64, k_factor: f64) -> Self {
        assert!(k_factor > 0.0, "K-factor must be positive");
        EloTable {
            ratings: HashMap::new(),
            k_factor,
            initial_rating,
        }
    }

    /// Current rating, inserting the initial rating on first sight.
    pub fn rating(&mut self, player_id: &str) -> f64 {
        *self
            .ratings
            .entry(player_id.to_string())
            .or_insert(self.initial_rating)
    }

    /// Exchange rating points after a decided match. The winner gains
    /// `K (1 − E_w)`; the loser loses exactly the same amount.
    pub fn update(&mut self, winner_id: &str, loser_id: &str) -> Result<(), FeatureError> {
        if winner_id == loser_id {
            return Err(FeatureError::SelfMatch(winner_id.to_string()));
        }
        let r_w = self.rating(winner_id);
        let r_l = self.rating(loser_id);
        let delta = self.k_factor * (1.0 - elo_expected(r_w, r_l));
        *self.ratings.get_mut(winner_id).unwrap() = r_w + delta;
        *self.ratings.get_mut(loser_id).unwrap() = r_l - delta;
        Ok(())
    }
}

/// Expected score of the first player: `1 / (1 + 10^((r_b − r_a)/400))`.
pub fn elo_expected(r_a: f64, r_b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / 400.0))
}

/// Absolute distance to the reference age 30.
pub fn age30(age: f64) -> f64 {
    (age - 30.0).abs()
}

/// Distance to the optimal-age interval [28, 32]; zero inside it.
pub fn age_int(age: f64) -> f64 {
    (28.0 - age).max(0.0).max(age - 32.0)
}

/// A match record with the players' strictly-pre-match Elo ratings attached.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedMatch {
    pub record: MatchRecord,
    pub elo1: f64,
    pub elo2: f64,
}

/// Walk the dataset chronologically, attaching each player's rating as it
/// stood before the match, then updating the table with the outcome.
pub fn annotate_pre_match_elo(data: &Dataset, init: f64, k: f64) -> Vec<AnnotatedMatch> {
    let mut table = EloTable::new(init, k);
    let mut out = Vec::with_capacity(data.records.len());
    for record in &data.records {
        let elo1 = table.rating(&record.player1_id);
        let elo2 = table.rating(&record.player2_id);
        let (winner, loser) = if record.victory == 1 {
            (&record.player1_id, &record.player2_id)
        } else {
            (&record.player2_id, &record.player1_id)
        };
        table
            .update(winner, loser)
            .expect("dataset invariant: distinct players");
        out.push(AnnotatedMatch {
            record: record.clone(),
            elo1,
            elo2,
        });
    }
    out
}

/// Serialize annotated matches as the canonical CSV schema with `elo1,elo2`
/// appended.
pub fn annotated_to_csv(annotated: &[AnnotatedMatch]) -> String {
    let mut out = String::from(crate::dataset::CSV_HEADER);
    out.push_str(",elo1,elo2\n");
    for a in annotated {
        let r = &a.record;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},1,{},{}\n",
            r.tournament_id,
            r.year,
            r.date,
            r.round,
            r.player1_id,
            r.player2_id,
            r.age1,
            r.age2,
            r.rank1,
            r.rank2,
            r.points1,
            r.points2,
            r.victory,
            a.elo1,
            a.elo2
        ));
    }
    out
}

/// Difference-encoded value of one feature for one match.
pub fn feature_value(f: FeatureName, m: &AnnotatedMatch) -> f64 {
    let r = &m.record;
    match f {
        FeatureName::Points => r.points1 - r.points2,
        FeatureName::Rank => r.rank1 as f64 - r.rank2 as f64,
        FeatureName::Elo => m.elo1 - m.elo2,
        FeatureName::Age30 => age30(r.age1) - age30(r.age2),
        FeatureName::AgeInt => age_int(r.age1) - age_int(r.age2),
    }
}

/// Build difference-encoded rows for the spec's feature set.
pub fn build_rows(annotated: &[AnnotatedMatch], spec: &ModelSpec) -> Vec<FeatureRow> {
    annotated
        .iter()
        .map(|m| FeatureRow {
            values: spec
                .features
                .iter()
                .map(|&f| (f, feature_value(f, m)))
                .collect(),
            label: m.record.victory,
        })
        .collect()
}

/// The 21 candidate feature subsets, in the canonical report row order.
///
/// These are all non-empty subsets of the five features that do not mix the
/// two age transforms and do not consist of an age transform alone.
pub fn enumerate_specs(learner: Learner) -> Vec<ModelSpec> {
    use FeatureName::*;
    let sets: [&[FeatureName]; 21] = [
        &[Points],
        &[Elo],
        &[Rank],
        &[Points, Rank],
        &[Points, Elo],
        &[Rank, Elo],
        &[Elo, Age30],
        &[Rank, Age30],
        &[Points, Age30],
        &[Elo, AgeInt],
        &[Rank, AgeInt],
        &[Points, AgeInt],
        &[Points, Rank, Elo],
        &[Points, Rank, Age30],
        &[Points, Rank, AgeInt],
        &[Points, Elo, Age30],
        &[Elo, Rank, Age30],
        &[Points, Elo, AgeInt],
        &[Elo, Rank, AgeInt],
        &[Points, Rank, Age30, Elo],
        &[Points, Rank, AgeInt, Elo],
    ];
    sets.iter()
        .map(|s| ModelSpec::new(s.iter().copied(), learner).expect("static sets are valid"))
        .collect()
}
