//! 2-D partial dependence of a random forest, rendered as a heatmap.

use courtcast::dataset::generate_synthetic;
use courtcast::explain::{pdp_2d, surface_csv};
use courtcast::features::{annotate_pre_match_elo, build_rows, FeatureName, Learner, ModelSpec};
use courtcast::forest::{fit_forest, ForestConfig};
use courtcast::model::FittedModel;
use courtcast::plot::surface_svg;

fn main() {
    let data = generate_synthetic(6, 4, 48, 31);
    let annotated = annotate_pre_match_elo(&data, 1500.0, 32.0);
    let spec = ModelSpec::parse_features("Rank,Elo,Age30", Learner::Forest).unwrap();
    let rows = build_rows(&annotated, &spec);

    let config = ForestConfig { ntree: 200, min_node: 5, seed: 31 };
    let model = FittedModel::Forest(fit_forest(&rows, 2, &config).unwrap());

    let surface = pdp_2d(&model, &rows, FeatureName::Rank, FeatureName::Elo, 25, 25).unwrap();
    let flat: Vec<f64> = surface.values.iter().flatten().copied().collect();
    let lo = flat.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("surface over Rank x Elo: probabilities range {lo:.3} .. {hi:.3}");

    let dir = std::env::temp_dir();
    let csv_path = dir.join("courtcast_surface.csv");
    let svg_path = dir.join("courtcast_surface.svg");
    std::fs::write(&csv_path, surface_csv(&surface)).unwrap();
    std::fs::write(&svg_path, surface_svg("Rank vs Elo", &surface)).unwrap();
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
}
