//! Run the three chronological validation schemes over a small set of model
//! specifications and print the Markdown report for each.

use courtcast::dataset::generate_synthetic;
use courtcast::evaluation::{
    expanding_window, loto_cv, render_report, rolling_window, EvalConfig, ReportFormat,
};
use courtcast::features::{Learner, ModelSpec};

fn main() {
    let data = generate_synthetic(8, 4, 48, 5);
    let specs: Vec<ModelSpec> = ["Rank", "Rank,Elo", "Points,Rank,Elo"]
        .iter()
        .map(|s| ModelSpec::parse_features(s, Learner::Linear).unwrap())
        .collect();
    let config = EvalConfig { seed: 5, ..EvalConfig::default() };

    let final_year = data.tournaments.last().unwrap().1;
    let expanding = expanding_window(&data, &specs, final_year, &config).unwrap();
    println!("## expanding window (test year {final_year})\n");
    println!("{}", render_report(&expanding, ReportFormat::Markdown));

    let rolling = rolling_window(&data, &specs, 12, &config).unwrap();
    println!("## rolling window (12 tournaments)\n");
    println!("{}", render_report(&rolling, ReportFormat::Markdown));

    let cv = loto_cv(&data, &specs, &config).unwrap();
    println!("## leave-one-tournament-out CV\n");
    println!("{}", render_report(&cv, ReportFormat::Markdown));
}
