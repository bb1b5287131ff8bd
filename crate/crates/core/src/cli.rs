//! Command-line front end. One thin binary exposing the pipeline: ingest or
//! synthesize data, annotate Elo, fit models, run validation schemes, render
//! reports, and emit explainability artifacts.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! Every output file gets a `<name>.meta.json` sidecar recording the crate
//! version, the seed, and the full argument vector, so any run can be
//! reproduced byte for byte.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::dataset::{generate_synthetic, parse_matches, DataError, Dataset};
use crate::evaluation::{
    expanding_window, loto_cv, parse_report_csv, render_report, rolling_window, EvalConfig,
    EvalError, ReportFormat,
};
use crate::explain::{curve_csv, ice_csv, pdp, pdp_2d, subsample_rows, surface_csv};
use crate::features::{
    annotate_pre_match_elo, annotated_to_csv, build_rows, enumerate_specs, FeatureName, Learner,
    ModelSpec, DEFAULT_ELO_INITIAL, DEFAULT_ELO_K,
};
use crate::forest::{fit_forest, tune_mtry, ForestConfig, DEFAULT_MIN_NODE, DEFAULT_NTREE};
use crate::glm_linear::fit_logistic;
use crate::glm_spline::{default_lambda_grid, fit_pspline_gam};
use crate::model::FittedModel;
use crate::plot::{pdp_ice_svg, surface_svg};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "courtcast", version, about = "Match-outcome prediction with Elo and age-based engineered covariates")]
struct Cli {
    /// Master seed for all stochastic components.
    #[arg(long, global = true, env = "SEL_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker cap for parallel evaluation cells (results are independent of it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct EloArgs {
    /// Initial Elo rating for unseen players.
    #[arg(long, default_value_t = DEFAULT_ELO_INITIAL)]
    elo_init: f64,
    /// Elo K-factor.
    #[arg(long, default_value_t = DEFAULT_ELO_K)]
    elo_k: f64,
}

#[derive(Args, Debug, Clone)]
struct ForestArgs {
    #[arg(long, default_value_t = DEFAULT_NTREE)]
    ntree: usize,
    /// Feature-subset size per split: `auto` tunes by cross-validation.
    #[arg(long, default_value = "auto")]
    mtry: String,
    #[arg(long, default_value_t = DEFAULT_MIN_NODE)]
    min_node: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate and normalize a raw CSV of matches.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long)]
        years: usize,
        #[arg(long, default_value_t = 4)]
        tournaments_per_year: usize,
        #[arg(long, default_value_t = 64)]
        players: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotate matches with strictly-pre-match Elo ratings.
    Elo {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        elo: EloArgs,
    },
    /// Fit one model on the full dataset and save it as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        learner: Learner,
        /// Comma-separated feature list, e.g. `Points,Rank,Elo`.
        #[arg(long)]
        features: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        elo: EloArgs,
        #[command(flatten)]
        forest: ForestArgs,
    },
    /// Run a chronological validation scheme over candidate models.
    Validate {
        #[arg(long)]
        input: PathBuf,
        /// expanding | rolling | cv
        #[arg(long)]
        scheme: String,
        /// linear | spline | forest | all
        #[arg(long, default_value = "all")]
        learner: String,
        /// `all` for the 21 canonical subsets, or semicolon-separated
        /// feature lists, e.g. `Points,Rank;Points,Rank,Elo`.
        #[arg(long, default_value = "all")]
        specs: String,
        #[arg(long, default_value_t = 12)]
        window: usize,
        #[arg(long)]
        final_year: Option<i32>,
        #[arg(long)]
        out: PathBuf,
        /// csv | md
        #[arg(long, default_value = "csv")]
        format: String,
        #[command(flatten)]
        elo: EloArgs,
        #[command(flatten)]
        forest: ForestArgs,
    },
    /// PDP and/or ICE curves for a saved model.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        feature: String,
        /// pdp | ice | both
        #[arg(long, default_value = "both")]
        kind: String,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Subsample this many rows for the ICE bundle (seeded).
        #[arg(long)]
        ice_sample: Option<usize>,
        #[command(flatten)]
        elo: EloArgs,
    },
    /// 2-D PDP surface (heatmap) for a saved model.
    Explain2d {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        f1: String,
        #[arg(long)]
        f2: String,
        /// Grid as `g1xg2`, e.g. `30x30`.
        #[arg(long, default_value = "30x30")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        elo: EloArgs,
    },
    /// Re-render a validation report CSV in another format.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// csv | md
        #[arg(long, default_value = "md")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(_) => CliError::Numerical(e.to_string()),
            EvalError::UnknownFormat(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    version: &'a str,
    seed: u64,
    args: &'a [String],
}

struct Ctx<'a> {
    seed: u64,
    argv: &'a [String],
}

impl Ctx<'_> {
    /// Write an output file plus its provenance sidecar.
    fn write(&self, path: &Path, content: &str) -> Result<(), CliError> {
        std::fs::write(path, content)?;
        let sidecar = Sidecar {
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            args: self.argv,
        };
        let meta_path = path.with_file_name(format!(
            "{}.meta.json",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        ));
        std::fs::write(meta_path, serde_json::to_string_pretty(&sidecar).unwrap() + "\n")?;
        Ok(())
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(parse_matches(&text)?)
}

fn parse_feature(s: &str) -> Result<FeatureName, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("unknown feature `{s}`")))
}

fn parse_specs(spec_arg: &str, learner_arg: &str) -> Result<Vec<ModelSpec>, CliError> {
    let learners: Vec<Learner> = match learner_arg {
        "all" => vec![Learner::Linear, Learner::Spline, Learner::Forest],
        other => vec![other
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown learner `{other}`")))?],
    };
    let mut specs = Vec::new();
    for learner in learners {
        if spec_arg == "all" {
            specs.extend(enumerate_specs(learner));
        } else {
            for part in spec_arg.split(';') {
                specs.push(
                    ModelSpec::parse_features(part, learner)
                        .map_err(|e| CliError::Usage(e.to_string()))?,
                );
            }
        }
    }
    Ok(specs)
}

fn fit_model(
    data: &Dataset,
    learner: Learner,
    features: &str,
    elo: &EloArgs,
    forest: &ForestArgs,
    seed: u64,
) -> Result<FittedModel, CliError> {
    let spec = ModelSpec::parse_features(features, learner)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let annotated = annotate_pre_match_elo(data, elo.elo_init, elo.elo_k);
    let rows = build_rows(&annotated, &spec);
    match learner {
        Learner::Linear => Ok(FittedModel::Linear(
            fit_logistic(&rows).map_err(|e| CliError::Numerical(e.to_string()))?,
        )),
        Learner::Spline => Ok(FittedModel::Spline(
            fit_pspline_gam(&rows, &default_lambda_grid())
                .map_err(|e| CliError::Numerical(e.to_string()))?,
        )),
        Learner::Forest => {
            let config = ForestConfig { ntree: forest.ntree, min_node: forest.min_node, seed };
            let p = spec.features.len();
            let mtry = match forest.mtry.as_str() {
                "auto" if p == 1 => 1,
                "auto" => {
                    let candidates: Vec<usize> = (1..=p).collect();
                    let tune_config = ForestConfig { ntree: 50, ..config };
                    tune_mtry(&rows, &candidates, 10, &tune_config)
                        .map_err(|e| CliError::Numerical(e.to_string()))?
                }
                k => k
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--mtry must be `auto` or an integer, got `{k}`")))?,
            };
            Ok(FittedModel::Forest(
                fit_forest(&rows, mtry, &config).map_err(|e| CliError::Numerical(e.to_string()))?,
            ))
        }
    }
}

fn load_model(path: &Path) -> Result<FittedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("invalid model file: {e}")))
}

/// Difference-encoded rows for an already fitted model's feature set.
fn rows_for_model(
    model: &FittedModel,
    data: &Dataset,
    elo: &EloArgs,
) -> Vec<crate::features::FeatureRow> {
    let annotated = annotate_pre_match_elo(data, elo.elo_init, elo.elo_k);
    let features = model.features();
    annotated
        .iter()
        .map(|m| crate::features::FeatureRow {
            values: features
                .iter()
                .map(|&f| (f, crate::features::feature_value(f, m)))
                .collect(),
            label: m.record.victory,
        })
        .collect()
}

fn run_command(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let ctx = Ctx { seed: cli.seed, argv };
    if let Some(jobs) = cli.jobs {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }

    match cli.command {
        Command::Ingest { input, out } => {
            let data = load_dataset(&input)?;
            ctx.write(&out, &data.to_csv())?;
            eprintln!(
                "ingested {} matches across {} tournaments",
                data.records.len(),
                data.n_tournaments()
            );
            Ok(())
        }
        Command::Synth { years, tournaments_per_year, players, out } => {
            if players < 4 || years < 1 {
                return Err(CliError::Usage("need --players >= 4 and --years >= 1".into()));
            }
            let data = generate_synthetic(years, tournaments_per_year, players, cli.seed);
            ctx.write(&out, &data.to_csv())?;
            Ok(())
        }
        Command::Elo { input, out, elo } => {
            let data = load_dataset(&input)?;
            let annotated = annotate_pre_match_elo(&data, elo.elo_init, elo.elo_k);
            ctx.write(&out, &annotated_to_csv(&annotated))?;
            Ok(())
        }
        Command::Fit { input, learner, features, out, elo, forest } => {
            let data = load_dataset(&input)?;
            let model = fit_model(&data, learner, &features, &elo, &forest, cli.seed)?;
            ctx.write(&out, &(serde_json::to_string_pretty(&model).unwrap() + "\n"))?;
            Ok(())
        }
        Command::Validate {
            input,
            scheme,
            learner,
            specs,
            window,
            final_year,
            out,
            format,
            elo,
            forest,
        } => {
            // Flag validation precedes data loading so bad usage is reported
            // as such even when the input file is also broken.
            if !matches!(scheme.as_str(), "expanding" | "rolling" | "cv") {
                return Err(CliError::Usage(format!(
                    "unknown scheme `{scheme}` (expected expanding, rolling or cv)"
                )));
            }
            let specs = parse_specs(&specs, &learner)?;
            let format: ReportFormat =
                format.parse().map_err(|e: EvalError| CliError::Usage(e.to_string()))?;
            let mtry = match forest.mtry.as_str() {
                "auto" => None,
                k => Some(k.parse().map_err(|_| {
                    CliError::Usage(format!("--mtry must be `auto` or an integer, got `{k}`"))
                })?),
            };
            let data = load_dataset(&input)?;
            let config = EvalConfig {
                elo_init: elo.elo_init,
                elo_k: elo.elo_k,
                forest_ntree: forest.ntree,
                forest_min_node: forest.min_node,
                mtry,
                seed: cli.seed,
                ..EvalConfig::default()
            };
            let report = match scheme.as_str() {
                "expanding" => {
                    let year = final_year
                        .or_else(|| data.tournaments.last().map(|(_, y)| *y))
                        .ok_or_else(|| CliError::Data("empty dataset".into()))?;
                    expanding_window(&data, &specs, year, &config)?
                }
                "rolling" => rolling_window(&data, &specs, window, &config)?,
                _ => loto_cv(&data, &specs, &config)?,
            };
            ctx.write(&out, &render_report(&report, format))?;
            Ok(())
        }
        Command::Explain { model, data, feature, kind, grid, out, svg, ice_sample, elo } => {
            let fitted = load_model(&model)?;
            let dataset = load_dataset(&data)?;
            let rows = rows_for_model(&fitted, &dataset, &elo);
            let feature = parse_feature(&feature)?;
            let curve = pdp(&fitted, &rows, feature, grid)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let ice_rows = match ice_sample {
                Some(k) => subsample_rows(&rows, k, cli.seed),
                None => rows.clone(),
            };
            let bundle = crate::explain::ice(&fitted, &ice_rows, feature, grid)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            match kind.as_str() {
                "pdp" => ctx.write(&out, &curve_csv(&curve))?,
                "ice" => ctx.write(&out, &ice_csv(&bundle))?,
                "both" => {
                    let mut text = curve_csv(&curve);
                    text.push('\n');
                    text.push_str(&ice_csv(&bundle));
                    ctx.write(&out, &text)?;
                }
                other => return Err(CliError::Usage(format!("unknown kind `{other}`"))),
            }
            if let Some(svg_path) = svg {
                let ice_opt = if kind == "pdp" { None } else { Some(&bundle) };
                ctx.write(&svg_path, &pdp_ice_svg(&feature.to_string(), &curve, ice_opt))?;
            }
            Ok(())
        }
        Command::Explain2d { model, data, f1, f2, grid, out, svg, elo } => {
            let fitted = load_model(&model)?;
            let dataset = load_dataset(&data)?;
            let rows = rows_for_model(&fitted, &dataset, &elo);
            let f1 = parse_feature(&f1)?;
            let f2 = parse_feature(&f2)?;
            let (g1, g2) = grid
                .split_once('x')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| CliError::Usage(format!("--grid must look like `30x30`, got `{grid}`")))?;
            let surface = pdp_2d(&fitted, &rows, f1, f2, g1, g2)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            ctx.write(&out, &surface_csv(&surface))?;
            if let Some(svg_path) = svg {
                ctx.write(&svg_path, &surface_svg(&format!("{f1} vs {f2}"), &surface))?;
            }
            Ok(())
        }
        Command::Report { input, format, out } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
            let rows = parse_report_csv(&text)?;
            let format: ReportFormat = format.parse().map_err(|e: EvalError| CliError::Usage(e.to_string()))?;
            match format {
                ReportFormat::Csv => ctx.write(&out, &text)?,
                ReportFormat::Markdown => {
                    let mut md = String::from("| Learner | Features | n | Class. rate | Likelihood | Brier |\n|---|---|---|---|---|---|\n");
                    for (learner, features, s) in rows {
                        md.push_str(&format!(
                            "| {learner} | {features} | {} | {:.3} | {:.3} | {:.3} |\n",
                            s.n, s.classification_rate, s.predictive_likelihood, s.brier
                        ));
                    }
                    ctx.write(&out, &md)?;
                }
            }
            Ok(())
        }
    }
}

/// Entry point used by the binary: parse, dispatch, map errors to exit codes.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
