//! Fit the P-spline additive logistic model and export each smooth's centered
//! effect curve, both as CSV and as an SVG line chart.

use courtcast::dataset::generate_synthetic;
use courtcast::features::{annotate_pre_match_elo, build_rows, Learner, ModelSpec};
use courtcast::glm_spline::{default_lambda_grid, effect_curve_csv, fit_pspline_gam};
use courtcast::plot::curve_svg;

fn main() {
    let data = generate_synthetic(8, 4, 64, 11);
    let annotated = annotate_pre_match_elo(&data, 1500.0, 32.0);
    let spec = ModelSpec::parse_features("Rank,Elo,Age30", Learner::Spline).unwrap();
    let rows = build_rows(&annotated, &spec);

    let model = fit_pspline_gam(&rows, &default_lambda_grid()).unwrap();
    println!("converged: {}, deviance: {:.1}", model.converged, model.deviance);
    for (feature, smooth) in &model.smooths {
        println!("smooth for {feature}: lambda = {:.1e} (GCV-selected)", smooth.lambda);
    }

    let dir = std::env::temp_dir();
    for feature in model.smooths.keys().copied().collect::<Vec<_>>() {
        let curve = model.effect_curve(feature, 100).unwrap();
        let csv_path = dir.join(format!("courtcast_effect_{feature}.csv"));
        let svg_path = dir.join(format!("courtcast_effect_{feature}.svg"));
        std::fs::write(&csv_path, effect_curve_csv(&curve)).unwrap();
        std::fs::write(&svg_path, curve_svg(&format!("effect of {feature}"), &curve)).unwrap();
        println!("wrote {} and {}", csv_path.display(), svg_path.display());
    }
}
