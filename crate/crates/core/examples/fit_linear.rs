//! Fit a linear logistic model on difference-encoded covariates and print its
//! coefficients.

use courtcast::dataset::generate_synthetic;
use courtcast::features::{annotate_pre_match_elo, build_rows, Learner, ModelSpec};
use courtcast::glm_linear::{fit_logistic, gradient_inf_norm};

fn main() {
    let data = generate_synthetic(8, 4, 64, 3);
    let annotated = annotate_pre_match_elo(&data, 1500.0, 32.0);
    let spec = ModelSpec::parse_features("Points,Rank,Elo", Learner::Linear).unwrap();
    let rows = build_rows(&annotated, &spec);

    let model = fit_logistic(&rows).unwrap();
    println!("{}", model.coefficient_report());
    println!("converged: {}", model.converged);
    println!("gradient sup-norm at the optimum: {:.2e}", gradient_inf_norm(&model, &rows));

    // In-sample accuracy with the 0.5 threshold.
    let correct = rows
        .iter()
        .filter(|r| {
            let p = model.predict_prob(r).unwrap();
            (p > 0.5) as u8 == r.label
        })
        .count();
    println!("in-sample classification rate: {:.3}", correct as f64 / rows.len() as f64);
}
