//! PDP and ICE curves for a fitted model, with the combined SVG plot.

use courtcast::dataset::generate_synthetic;
use courtcast::explain::{curve_csv, ice, pdp, subsample_rows};
use courtcast::features::{annotate_pre_match_elo, build_rows, FeatureName, Learner, ModelSpec};
use courtcast::glm_linear::fit_logistic;
use courtcast::model::FittedModel;
use courtcast::plot::pdp_ice_svg;

fn main() {
    let data = generate_synthetic(8, 4, 64, 23);
    let annotated = annotate_pre_match_elo(&data, 1500.0, 32.0);
    let spec = ModelSpec::parse_features("Rank,Elo", Learner::Linear).unwrap();
    let rows = build_rows(&annotated, &spec);
    let model = FittedModel::Linear(fit_logistic(&rows).unwrap());

    let curve = pdp(&model, &rows, FeatureName::Elo, 50).unwrap();
    println!(
        "PDP for Elo: {:.3} at {:.0} .. {:.3} at {:.0}",
        curve.values[0],
        curve.grid[0],
        curve.values.last().unwrap(),
        curve.grid.last().unwrap()
    );

    // ICE on a seeded subsample keeps the plot readable.
    let sample = subsample_rows(&rows, 60, 23);
    let bundle = ice(&model, &sample, FeatureName::Elo, 50).unwrap();
    println!("{} ICE curves on a {}-point grid", bundle.curves.len(), bundle.grid.len());

    // The PDP over the full data is the exact mean of the full ICE bundle.
    let full = ice(&model, &rows, FeatureName::Elo, 50).unwrap();
    let means = full.column_means();
    let max_gap = curve
        .values
        .iter()
        .zip(&means)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("max |PDP - mean ICE| over the grid: {max_gap:.2e}");

    let dir = std::env::temp_dir();
    let csv_path = dir.join("courtcast_pdp_elo.csv");
    let svg_path = dir.join("courtcast_pdp_elo.svg");
    std::fs::write(&csv_path, curve_csv(&curve)).unwrap();
    std::fs::write(&svg_path, pdp_ice_svg("Elo", &curve, Some(&bundle))).unwrap();
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
}
