//! Match records: CSV ingestion, validation, chronological ordering, and a
//! seeded synthetic generator for desk-scale experiments.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

use crate::sigmoid;

/// CSV header expected (and emitted) by [`parse_matches`] / [`Dataset::to_csv`].
pub const CSV_HEADER: &str = "tournament_id,year,date,round,player1_id,player2_id,age1,age2,rank1,rank2,points1,points2,victory,completed";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate match on line {line}: {tournament_id} {player1_id} vs {player2_id} on {date}")]
    Duplicate {
        line: usize,
        tournament_id: String,
        player1_id: String,
        player2_id: String,
        date: NaiveDate,
    },
    #[error("tournament {tournament_id} appears in non-contiguous chronological blocks")]
    Ordering { tournament_id: String },
    #[error("empty dataset: no completed matches")]
    Empty,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One completed match between two players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub tournament_id: String,
    /// 0-based chronological index of the tournament within the dataset.
    pub tournament_index: usize,
    pub year: i32,
    pub date: NaiveDate,
    pub round: u32,
    pub player1_id: String,
    pub player2_id: String,
    pub age1: f64,
    pub age2: f64,
    pub rank1: u32,
    pub rank2: u32,
    pub points1: f64,
    pub points2: f64,
    /// 1 if player 1 won, 0 otherwise.
    pub victory: u8,
}

/// An ordered collection of matches grouped into chronological tournaments.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<MatchRecord>,
    /// (tournament_id, year), in chronological order; index here equals
    /// `tournament_index` on the member records.
    pub tournaments: Vec<(String, i32)>,
}

impl Dataset {
    pub fn n_tournaments(&self) -> usize {
        self.tournaments.len()
    }

    /// Records belonging to the tournament with the given chronological index.
    pub fn tournament_records(&self, index: usize) -> impl Iterator<Item = &MatchRecord> {
        self.records.iter().filter(move |r| r.tournament_index == index)
    }

    /// Serialize to the canonical CSV schema. All rows carry `completed=1`
    /// because excluded matches are dropped at parse time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},1\n",
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
                r.victory
            ));
        }
        out
    }
}

struct RawRow {
    line: usize,
    record: MatchRecord,
    completed: bool,
}

fn field<'a>(row: &'a csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<&'a str, DataError> {
    row.get(idx).ok_or_else(|| DataError::Parse {
        line,
        message: format!("missing column `{name}`"),
    })
}

fn parse_cell<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T, DataError> {
    s.trim().parse().map_err(|_| DataError::Parse {
        line,
        message: format!("cannot parse `{s}` as {name}"),
    })
}

/// Parse the canonical CSV schema into a chronologically ordered [`Dataset`].
///
/// Rows flagged `completed=0` (walkovers, retirements) are dropped. The
/// remaining records are sorted by `(date, tournament_id)` and tournament
/// indices are assigned in order of first appearance.
pub fn parse_matches(csv_text: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());

    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(DataError::Parse {
            line: 1,
            message: format!("unexpected header: expected `{CSV_HEADER}`, got `{}`", got.join(",")),
        });
    }

    let mut rows: Vec<RawRow> = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let row = result?;
        let victory: u8 = parse_cell(field(&row, 12, "victory", line)?, "victory", line)?;
        if victory > 1 {
            return Err(DataError::Parse {
                line,
                message: format!("victory must be 0 or 1, got {victory}"),
            });
        }
        let completed: u8 = parse_cell(field(&row, 13, "completed", line)?, "completed", line)?;
        let date: NaiveDate = parse_cell(field(&row, 2, "date", line)?, "ISO-8601 date", line)?;
        let age1: f64 = parse_cell(field(&row, 6, "age1", line)?, "age1", line)?;
        let age2: f64 = parse_cell(field(&row, 7, "age2", line)?, "age2", line)?;
        if age1 <= 0.0 || age2 <= 0.0 {
            return Err(DataError::Parse {
                line,
                message: "ages must be positive".into(),
            });
        }
        let rank1: u32 = parse_cell(field(&row, 8, "rank1", line)?, "rank1", line)?;
        let rank2: u32 = parse_cell(field(&row, 9, "rank2", line)?, "rank2", line)?;
        if rank1 == 0 || rank2 == 0 {
            return Err(DataError::Parse {
                line,
                message: "ranks must be positive integers".into(),
            });
        }
        let points1: f64 = parse_cell(field(&row, 10, "points1", line)?, "points1", line)?;
        let points2: f64 = parse_cell(field(&row, 11, "points2", line)?, "points2", line)?;
        if points1 < 0.0 || points2 < 0.0 {
            return Err(DataError::Parse {
                line,
                message: "points must be non-negative".into(),
            });
        }
        let player1_id = field(&row, 4, "player1_id", line)?.trim().to_string();
        let player2_id = field(&row, 5, "player2_id", line)?.trim().to_string();
        if player1_id == player2_id {
            return Err(DataError::Parse {
                line,
                message: format!("player1_id equals player2_id (`{player1_id}`)"),
            });
        }
        let record = MatchRecord {
            tournament_id: field(&row, 0, "tournament_id", line)?.trim().to_string(),
            tournament_index: 0,
            year: parse_cell(field(&row, 1, "year", line)?, "year", line)?,
            date,
            round: parse_cell(field(&row, 3, "round", line)?, "round", line)?,
            player1_id,
            player2_id,
            age1,
            age2,
            rank1,
            rank2,
            points1,
            points2,
            victory,
        };
        rows.push(RawRow { line, record, completed: completed != 0 });
    }

    // Duplicate detection on the full file, before the completed filter.
    let mut seen: HashSet<(String, String, String, NaiveDate)> = HashSet::new();
    for row in &rows {
        let key = (
            row.record.tournament_id.clone(),
            row.record.player1_id.clone(),
            row.record.player2_id.clone(),
            row.record.date,
        );
        if !seen.insert(key) {
            return Err(DataError::Duplicate {
                line: row.line,
                tournament_id: row.record.tournament_id.clone(),
                player1_id: row.record.player1_id.clone(),
                player2_id: row.record.player2_id.clone(),
                date: row.record.date,
            });
        }
    }

    let mut records: Vec<MatchRecord> = rows
        .into_iter()
        .filter(|r| r.completed)
        .map(|r| r.record)
        .collect();
    if records.is_empty() {
        return Err(DataError::Empty);
    }
    records.sort_by(|a, b| {
        (a.date, &a.tournament_id, a.round)
            .cmp(&(b.date, &b.tournament_id, b.round))
    });

    // Assign tournament indices by order of first appearance; a tournament id
    // reappearing after another one started is an ordering violation.
    let mut tournaments: Vec<(String, i32)> = Vec::new();
    let mut closed: HashSet<String> = HashSet::new();
    for rec in &mut records {
        match tournaments.last() {
            Some((last_id, _)) if *last_id == rec.tournament_id => {}
            _ => {
                if closed.contains(&rec.tournament_id) {
                    return Err(DataError::Ordering {
                        tournament_id: rec.tournament_id.clone(),
                    });
                }
                if let Some((last_id, _)) = tournaments.last() {
                    closed.insert(last_id.clone());
                }
                tournaments.push((rec.tournament_id.clone(), rec.year));
            }
        }
        rec.tournament_index = tournaments.len() - 1;
    }

    Ok(Dataset { records, tournaments })
}

/// Piecewise-linear age effect on the log-odds scale, peaking on [28, 32].
fn age_hill(age: f64) -> f64 {
    -0.12 * (28.0 - age).max(0.0).max(age - 32.0)
}

/// Generate a seeded synthetic dataset of knockout tournaments.
///
/// Each player carries a latent skill drawn from a standard normal; match
/// outcomes are Bernoulli with win probability
/// `sigmoid(2 (s1 - s2) + g(age1) - g(age2))` where `g` peaks on [28, 32].
/// Ranks and points are noisy monotone functions of skill, re-drawn per
/// tournament; ages drift by +0.25 per tournament. Deterministic for a fixed
/// seed.
pub fn generate_synthetic(
    n_years: usize,
    tournaments_per_year: usize,
    players: usize,
    seed: u64,
) -> Dataset {
    assert!(players >= 4, "need at least 4 players");
    assert!(n_years >= 1, "need at least one year");
    assert!(tournaments_per_year >= 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).unwrap();

    let skills: Vec<f64> = (0..players).map(|_| std_normal.sample(&mut rng)).collect();
    let mut ages: Vec<f64> = (0..players)
        .map(|_| rng.gen_range(19.0..33.0))
        .collect();
    let ids: Vec<String> = (0..players).map(|i| format!("P{:03}", i)).collect();

    let start_year = 2011;
    let mut records = Vec::new();
    let mut tournaments = Vec::new();
    let mut tournament_index = 0usize;

    for y in 0..n_years {
        let year = start_year + y as i32;
        for t in 0..tournaments_per_year {
            let month = 1 + (t * 12 / tournaments_per_year) as u32;
            let date = NaiveDate::from_ymd_opt(year, month, 15).unwrap();
            let tid = format!("GS{}-{}", year, t + 1);
            tournaments.push((tid.clone(), year));

            // Per-tournament noisy standings: rank by perturbed skill,
            // points exponential in the same perturbed skill.
            let observed: Vec<f64> = skills
                .iter()
                .map(|s| s + 0.5 * std_normal.sample(&mut rng))
                .collect();
            let mut order: Vec<usize> = (0..players).collect();
            order.sort_by(|&a, &b| observed[b].partial_cmp(&observed[a]).unwrap());
            let mut ranks = vec![0u32; players];
            for (pos, &p) in order.iter().enumerate() {
                ranks[p] = pos as u32 + 1;
            }
            let points: Vec<f64> = observed
                .iter()
                .map(|o| (1000.0 * (0.8 * o).exp()).round())
                .collect();

            // Knockout rounds with random re-draws: winners advance until one
            // player remains. No bracket is kept; only the chronological
            // grouping matters downstream.
            let mut pool: Vec<usize> = (0..players).collect();
            pool.shuffle(&mut rng);
            let mut round = 1u32;
            while pool.len() >= 2 {
                let mut winners = Vec::with_capacity(pool.len() / 2 + 1);
                if pool.len() % 2 == 1 {
                    winners.push(pool[pool.len() - 1]); // bye
                }
                for pair in pool.chunks_exact(2) {
                    let (mut a, mut b) = (pair[0], pair[1]);
                    // Randomize which side is listed first to balance labels.
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut a, &mut b);
                    }
                    let eta = 2.0 * (skills[a] - skills[b]) + age_hill(ages[a]) - age_hill(ages[b]);
                    let a_wins = rng.gen_bool(sigmoid(eta));
                    winners.push(if a_wins { a } else { b });
                    records.push(MatchRecord {
                        tournament_id: tid.clone(),
                        tournament_index,
                        year,
                        date,
                        round,
                        player1_id: ids[a].clone(),
                        player2_id: ids[b].clone(),
                        age1: (ages[a] * 100.0).round() / 100.0,
                        age2: (ages[b] * 100.0).round() / 100.0,
                        rank1: ranks[a],
                        rank2: ranks[b],
                        points1: points[a],
                        points2: points[b],
                        victory: u8::from(a_wins),
                    });
                }
                pool = winners;
                pool.shuffle(&mut rng);
                round += 1;
            }

            for age in ages.iter_mut() {
                *age += 0.25;
            }
            tournament_index += 1;
        }
    }

    Dataset { records, tournaments }
}
