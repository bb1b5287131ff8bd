//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single `ACCEPTANCE n PASS/FAIL` line (run with
//! `cargo test --test acceptance -- --nocapture` to see them).

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use courtcast::dataset::{generate_synthetic, Dataset};
use courtcast::evaluation::{
    brier_score, classification_rate, expanding_iterations, expanding_window, loto_iterations,
    predictive_likelihood, rolling_iterations, EvalConfig, Prediction,
};
use courtcast::explain::{ice, pdp, pdp_2d};
use courtcast::features::{
    annotate_pre_match_elo, build_rows, enumerate_specs, FeatureName, FeatureRow, Learner,
    ModelSpec,
};
use courtcast::forest::{fit_forest, fit_tree, ForestConfig, TreeNode};
use courtcast::glm_linear::{fit_logistic, fit_logistic_traced, gradient_inf_norm, LinearModel};
use courtcast::glm_spline::{
    fit_pspline_gam, fit_pspline_gam_traced, SplineBasis,
};
use courtcast::model::FittedModel;
use courtcast::sigmoid;

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} {verdict} — {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn synth_rows(betas: &[(FeatureName, f64)], intercept: f64, n: usize, seed: u64) -> Vec<FeatureRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut eta = intercept;
            let mut values = BTreeMap::new();
            for &(f, b) in betas {
                let x: f64 = rng.gen_range(-2.0..2.0);
                values.insert(f, x);
                eta += b * x;
            }
            let label = u8::from(rng.gen_bool(sigmoid(eta)));
            FeatureRow { values, label }
        })
        .collect()
}

#[test]
fn criterion_01_metric_identities() {
    let coin: Vec<Prediction> = (0..17)
        .map(|i| Prediction { match_ref: i, prob: 0.5, truth: (i % 2) as u8 })
        .collect();
    let mut ok = brier_score(&coin).unwrap() == 0.25;
    ok &= predictive_likelihood(&coin).unwrap() == 0.5;

    let perfect: Vec<Prediction> = (0..20)
        .map(|i| {
            let truth = (i % 2) as u8;
            Prediction { match_ref: i, prob: if truth == 1 { 0.9 } else { 0.1 }, truth }
        })
        .collect();
    ok &= classification_rate(&perfect).unwrap() == 1.0;

    // Complement symmetry over 1,000 random prediction sets.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut max_gap = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..60);
        let preds: Vec<Prediction> = (0..n)
            .map(|i| Prediction {
                match_ref: i,
                prob: rng.gen_range(0.001..0.999),
                truth: u8::from(rng.gen_bool(0.5)),
            })
            .collect();
        if !preds.iter().any(|p| p.truth == 0) || !preds.iter().any(|p| p.truth == 1) {
            continue;
        }
        let flipped: Vec<Prediction> = preds
            .iter()
            .map(|p| Prediction { match_ref: p.match_ref, prob: 1.0 - p.prob, truth: 1 - p.truth })
            .collect();
        for (a, b) in [
            (classification_rate(&preds), classification_rate(&flipped)),
            (predictive_likelihood(&preds), predictive_likelihood(&flipped)),
            (brier_score(&preds), brier_score(&flipped)),
        ] {
            max_gap = max_gap.max((a.unwrap() - b.unwrap()).abs());
        }
    }
    ok &= max_gap < 1e-12;
    report(1, ok, &format!("metric identities exact, complement symmetry gap {max_gap:.2e} over 1000 sets"));
}

/// Gradient-ascent maximizer of the Bernoulli log-likelihood with Armijo
/// backtracking — an optimizer sharing no code with the IRLS path.
fn gradient_descent_logistic(x: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
    let (n, q) = (x.nrows(), x.ncols());
    let loglik = |beta: &DVector<f64>| -> f64 {
        let eta = x * beta;
        (0..n).map(|i| y[i] * eta[i] - (1.0 + eta[i].exp()).ln()).sum()
    };
    let mut beta = DVector::zeros(q);
    let mut ll = loglik(&beta);
    // Carry the accepted step size across iterations (growing it slightly
    // each time) so the backtracking search stays cheap.
    let mut step = 1.0 / n as f64;
    for _ in 0..200_000 {
        let eta = x * &beta;
        let mut grad = DVector::zeros(q);
        for i in 0..n {
            let r = y[i] - sigmoid(eta[i]);
            for j in 0..q {
                grad[j] += x[(i, j)] * r;
            }
        }
        // The likelihood Hessian has smallest eigenvalue well above 1 on
        // these problems, so a 1e-6 gradient puts the oracle within ~1e-7
        // of the maximizer — far inside the 1e-4 comparison tolerance.
        if grad.amax() < 1e-6 {
            break;
        }
        let g2 = grad.norm_squared();
        step *= 2.0;
        loop {
            let cand = &beta + &grad * step;
            let cand_ll = loglik(&cand);
            if cand_ll >= ll + 1e-4 * step * g2 {
                beta = cand;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return beta;
            }
        }
    }
    beta
}

#[test]
fn criterion_02_glm_oracle_equivalence() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_grad = 0.0f64;
    let mut monotone = true;
    for seed in 0..50u64 {
        let p = 1 + (seed % 3) as usize;
        let features = &FeatureName::ALL[..p];
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let betas: Vec<(FeatureName, f64)> =
            features.iter().map(|&f| (f, rng.gen_range(-1.2..1.2))).collect();
        let intercept = rng.gen_range(-0.5..0.5);
        let rows = synth_rows(&betas, intercept, 200, 2000 + seed);

        let (model, trace) = fit_logistic_traced(&rows).unwrap();
        monotone &= trace.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        worst_grad = worst_grad.max(gradient_inf_norm(&model, &rows));

        let n = rows.len();
        let mut x = DMatrix::zeros(n, p + 1);
        let mut y = vec![0.0; n];
        for (i, row) in rows.iter().enumerate() {
            x[(i, 0)] = 1.0;
            for (j, f) in features.iter().enumerate() {
                x[(i, j + 1)] = row.values[f];
            }
            y[i] = row.label as f64;
        }
        let oracle = gradient_descent_logistic(&x, &y);
        let mut fitted = vec![model.intercept];
        fitted.extend(features.iter().map(|f| model.coefficients[f]));
        for (a, b) in fitted.iter().zip(oracle.iter()) {
            worst_gap = worst_gap.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_gap < 1e-4 && worst_grad < 1e-6 && monotone && elapsed < 30.0;
    report(
        2,
        ok,
        &format!(
            "IRLS vs gradient-ascent oracle on 50 problems: max L-inf gap {worst_gap:.2e}, \
             max gradient {worst_grad:.2e}, deviance monotone {monotone}, {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_03_coefficient_recovery() {
    let betas = [
        (FeatureName::Points, 0.6),
        (FeatureName::Rank, -1.0),
        (FeatureName::Elo, 0.8),
    ];
    let rows = synth_rows(&betas, 0.2, 5000, 77);
    let model = fit_logistic(&rows).unwrap();
    let mut max_err = (model.intercept - 0.2f64).abs();
    for (f, b) in betas {
        max_err = max_err.max((model.coefficients[&f] - b).abs());
    }
    let signs_ok = model.coefficients[&FeatureName::Rank] < 0.0
        && model.coefficients[&FeatureName::Elo] > 0.0
        && model.coefficients[&FeatureName::Points] > 0.0;
    let ok = max_err < 0.15 && signs_ok && model.converged;
    report(
        3,
        ok,
        &format!("n=5000 recovery max error {max_err:.3} (< 0.15), sign pattern Rank<0, Elo>0, Points>0: {signs_ok}"),
    );
}

#[test]
fn criterion_04_spline_suite() {
    // Partition of unity on 20 random knot configurations.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_unity_gap = 0.0f64;
    for _ in 0..20 {
        let degree = rng.gen_range(1..=3usize);
        let n_interior = rng.gen_range(2..=8usize);
        let mut interior: Vec<f64> = (0..n_interior).map(|_| rng.gen_range(0.05..0.95)).collect();
        interior.sort_by(f64::total_cmp);
        let basis = SplineBasis::new(degree, &interior, 0.0, 1.0).unwrap();
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let total: f64 = basis.eval(x).iter().sum();
            max_unity_gap = max_unity_gap.max((total - 1.0).abs());
        }
    }
    let unity_ok = max_unity_gap < 1e-12;

    // λ=0 equals an unpenalized basis-expanded logistic fit. The oracle is a
    // plain Newton solver over [1 | first d−1 raw basis columns], which spans
    // the same space as intercept + sum-to-zero-constrained basis.
    let rows = synth_rows(&[(FeatureName::Elo, 1.5)], 0.1, 400, 9);
    let model = fit_pspline_gam(&rows, &[0.0]).unwrap();
    let smooth = &model.smooths[&FeatureName::Elo];
    let xs: Vec<f64> = rows.iter().map(|r| r.values[&FeatureName::Elo]).collect();
    let d = smooth.gamma.len();
    let n = rows.len();
    let mut x = DMatrix::zeros(n, d);
    let y: Vec<f64> = rows.iter().map(|r| r.label as f64).collect();
    for (i, &xi) in xs.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, v) in smooth.basis.eval(xi).into_iter().take(d - 1).enumerate() {
            x[(i, j + 1)] = v;
        }
    }
    let mut beta = DVector::zeros(d);
    for _ in 0..200 {
        let eta = &x * &beta;
        let mut xtwx = DMatrix::zeros(d, d);
        let mut score = DVector::zeros(d);
        for i in 0..n {
            let pr = sigmoid(eta[i]);
            let w = (pr * (1.0 - pr)).max(1e-10);
            for a in 0..d {
                score[a] += x[(i, a)] * (y[i] - pr);
                for b in 0..d {
                    xtwx[(a, b)] += x[(i, a)] * w * x[(i, b)];
                }
            }
        }
        let delta = xtwx.lu().solve(&score).unwrap();
        beta += &delta;
        if delta.amax() < 1e-12 {
            break;
        }
    }
    let mut max_prob_gap = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let eta: f64 = (0..d).map(|j| x[(i, j)] * beta[j]).sum();
        let gap = (model.predict_prob(row).unwrap() - sigmoid(eta)).abs();
        max_prob_gap = max_prob_gap.max(gap);
    }
    let zero_ok = max_prob_gap < 1e-6;

    // λ=1e12 with the order-2 penalty drives the coefficients into the
    // penalty null space: affine in the basis index. The curve must lie in
    // span{1, v(x)} with v(x) = sum_j j B_j(x); with clamped boundary knots
    // that is the exact null-space statement (affine in x holds away from
    // the boundary intervals, where the Greville points are not equispaced).
    let model = fit_pspline_gam(&rows, &[1e12]).unwrap();
    let smooth = &model.smooths[&FeatureName::Elo];
    let curve = model.effect_curve(FeatureName::Elo, 200).unwrap();
    let v: Vec<f64> = curve
        .iter()
        .map(|(cx, _)| smooth.basis.eval(*cx).iter().enumerate().map(|(j, b)| j as f64 * b).sum())
        .collect();
    let m = curve.len() as f64;
    let mv = v.iter().sum::<f64>() / m;
    let my = curve.iter().map(|p| p.1).sum::<f64>() / m;
    let svy: f64 = v.iter().zip(&curve).map(|(vi, p)| (vi - mv) * (p.1 - my)).sum();
    let svv: f64 = v.iter().map(|vi| (vi - mv) * (vi - mv)).sum();
    let slope = svy / svv;
    let max_affine_dev = v
        .iter()
        .zip(&curve)
        .map(|(vi, p)| (p.1 - (my + slope * (vi - mv))).abs())
        .fold(0.0f64, f64::max);
    let affine_ok = max_affine_dev < 1e-3;

    // Penalized deviance is monotone over the accepted IRLS steps.
    let (_, trace) = fit_pspline_gam_traced(&rows, &[10.0]).unwrap();
    let monotone = trace.windows(2).all(|w| w[1] <= w[0] + 1e-9);

    let ok = unity_ok && zero_ok && affine_ok && monotone;
    report(
        4,
        ok,
        &format!(
            "partition of unity gap {max_unity_gap:.2e}, lambda=0 oracle gap {max_prob_gap:.2e}, \
             lambda=1e12 null-space affine deviation {max_affine_dev:.2e}, penalized deviance monotone {monotone}"
        ),
    );
}

fn dataset_rows(data: &Dataset, features: &str, learner: Learner) -> (Vec<FeatureRow>, Vec<usize>) {
    let annotated = annotate_pre_match_elo(data, 1500.0, 32.0);
    let spec = ModelSpec::parse_features(features, learner).unwrap();
    let rows = build_rows(&annotated, &spec);
    let tournament: Vec<usize> = annotated.iter().map(|m| m.record.tournament_index).collect();
    (rows, tournament)
}

fn gini(n0: f64, n1: f64) -> f64 {
    let n = n0 + n1;
    let (p0, p1) = (n0 / n, n1 / n);
    1.0 - p0 * p0 - p1 * p1
}

fn check_positive_gains(node: &TreeNode, rows: &[&FeatureRow]) -> bool {
    match node {
        TreeNode::Leaf { .. } => true,
        TreeNode::Split { feature, threshold, left, right } => {
            let (l, r): (Vec<&FeatureRow>, Vec<&FeatureRow>) =
                rows.iter().partition(|row| row.values[feature] <= *threshold);
            let count = |rs: &[&FeatureRow]| {
                let n1 = rs.iter().filter(|r| r.label == 1).count() as f64;
                (rs.len() as f64 - n1, n1)
            };
            let (pn0, pn1) = count(rows);
            let (ln0, ln1) = count(&l);
            let (rn0, rn1) = count(&r);
            let n = rows.len() as f64;
            let gain = gini(pn0, pn1)
                - (l.len() as f64 / n) * gini(ln0, ln1)
                - (r.len() as f64 / n) * gini(rn0, rn1);
            gain > 0.0 && check_positive_gains(left, &l) && check_positive_gains(right, &r)
        }
    }
}

#[test]
fn criterion_05_forest_suite() {
    let start = Instant::now();
    let data = generate_synthetic(3, 4, 128, 1);
    let (rows, tournament) = dataset_rows(&data, "Points,Rank,Elo,Age30", Learner::Forest);
    // Hold out the final year (last 4 tournaments) chronologically.
    let split = data.n_tournaments() - 4;
    let train: Vec<FeatureRow> =
        rows.iter().zip(&tournament).filter(|(_, &t)| t < split).map(|(r, _)| r.clone()).collect();
    let test: Vec<FeatureRow> =
        rows.iter().zip(&tournament).filter(|(_, &t)| t >= split).map(|(r, _)| r.clone()).collect();

    let config = ForestConfig { ntree: 400, min_node: 5, seed: 1 };
    let serial_pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel_pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let serial = serial_pool.install(|| fit_forest(&train, 2, &config)).unwrap();
    let parallel = parallel_pool.install(|| fit_forest(&train, 2, &config)).unwrap();
    let identical = test.iter().all(|r| {
        serial.predict_prob(r).unwrap().to_bits() == parallel.predict_prob(r).unwrap().to_bits()
    });

    let correct = test
        .iter()
        .filter(|r| (serial.predict_prob(r).unwrap() > 0.5) as u8 == r.label)
        .count();
    let rate = correct as f64 / test.len() as f64;

    // Every accepted split in a deterministically grown tree (mtry = p, so
    // split choice does not depend on the RNG) has positive Gini gain.
    let subset: Vec<FeatureRow> = train.iter().take(300).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tree = fit_tree(&subset, 4, 5, &mut rng).unwrap();
    let refs: Vec<&FeatureRow> = subset.iter().collect();
    let gains_ok = check_positive_gains(&tree, &refs);

    let elapsed = start.elapsed().as_secs_f64();
    let ok = identical && rate >= 0.75 && gains_ok && elapsed < 60.0;
    report(
        5,
        ok,
        &format!(
            "serial==parallel {identical}, holdout rate {rate:.3} (>= 0.75), \
             all split gains positive {gains_ok}, {elapsed:.1}s (< 60)"
        ),
    );
}

#[test]
fn criterion_06_validation_protocols() {
    let data = generate_synthetic(12, 4, 32, 2);
    let final_year = data.tournaments.last().unwrap().1;

    let expanding = expanding_iterations(&data, final_year).unwrap();
    let mut ok = expanding.len() == 4;
    for w in expanding.windows(2) {
        ok &= w[1].train.len() == w[0].train.len() + 1;
    }
    for it in &expanding {
        ok &= it.train.iter().all(|&t| t < it.test);
    }

    let rolling = rolling_iterations(&data, 12).unwrap();
    for it in &rolling {
        ok &= it.train.len() == 12;
        ok &= it.train.iter().all(|&t| t < it.test);
    }

    let loto = loto_iterations(&data).unwrap();
    let mut tested: Vec<usize> = loto.iter().map(|it| it.test).collect();
    tested.sort_unstable();
    ok &= tested == (0..data.n_tournaments()).collect::<Vec<_>>();
    for it in &loto {
        ok &= it.train.len() == data.n_tournaments() - 1;
        ok &= !it.train.contains(&it.test);
    }

    report(
        6,
        ok,
        &format!(
            "expanding: {} growing final-year iterations, rolling windows all 12 wide, \
             LOTO tests partition {} tournaments, no leakage",
            expanding.len(),
            data.n_tournaments()
        ),
    );
}

#[test]
fn criterion_07_spec_enumeration_and_full_validate() {
    let expected = [
        "Points", "Elo", "Rank",
        "Points,Rank", "Points,Elo", "Rank,Elo",
        "Elo,Age30", "Rank,Age30", "Points,Age30",
        "Elo,AgeInt", "Rank,AgeInt", "Points,AgeInt",
        "Points,Rank,Elo", "Points,Rank,Age30", "Points,Rank,AgeInt",
        "Points,Elo,Age30", "Rank,Elo,Age30", "Points,Elo,AgeInt", "Rank,Elo,AgeInt",
        "Points,Rank,Elo,Age30", "Points,Rank,Elo,AgeInt",
    ];
    let specs = enumerate_specs(Learner::Linear);
    let mut ok = specs.len() == 21;
    for (spec, want) in specs.iter().zip(expected.iter()) {
        ok &= spec.feature_label() == *want;
    }

    // Full validate over all 21 specs x 3 learners through the CLI binary.
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("synth.csv");
    let report_path = dir.path().join("report.csv");
    std::fs::write(&data_path, generate_synthetic(3, 4, 32, 7).to_csv()).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_courtcast"))
        .args([
            "validate",
            "--input", data_path.to_str().unwrap(),
            "--scheme", "expanding",
            "--learner", "all",
            "--specs", "all",
            "--seed", "7",
            "--out", report_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    ok &= status.success();
    let text = std::fs::read_to_string(&report_path).unwrap();
    let scored_rows = text.lines().count() - 1; // minus header
    let elapsed = start.elapsed().as_secs_f64();
    ok &= scored_rows == 63 && elapsed < 600.0;
    report(
        7,
        ok,
        &format!(
            "21 specs match the canonical row set; full validate emitted {scored_rows} scored rows \
             in {elapsed:.0}s (< 600)"
        ),
    );
}

#[test]
fn criterion_08_explainability_identities() {
    let data = generate_synthetic(4, 4, 48, 3);
    let (rows, _) = dataset_rows(&data, "Rank,Elo", Learner::Forest);
    let forest = FittedModel::Forest(
        fit_forest(&rows, 1, &ForestConfig { ntree: 100, min_node: 5, seed: 3 }).unwrap(),
    );

    // PDP equals the ICE column mean (same fixed summation order).
    let curve = pdp(&forest, &rows, FeatureName::Elo, 30).unwrap();
    let bundle = ice(&forest, &rows, FeatureName::Elo, 30).unwrap();
    let pdp_gap = curve
        .values
        .iter()
        .zip(bundle.column_means())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    // ICE curves of an additive linear-logistic model are parallel on the
    // link (logit) scale: each curve is a vertical shift of every other.
    let linear = FittedModel::Linear(fit_logistic(&rows).unwrap());
    let bundle = ice(&linear, &rows, FeatureName::Elo, 30).unwrap();
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let base: Vec<f64> = bundle.curves[0].iter().map(|&p| logit(p)).collect();
    let mut parallel_gap = 0.0f64;
    for c in &bundle.curves {
        let offset = logit(c[0]) - base[0];
        for (j, &p) in c.iter().enumerate() {
            parallel_gap = parallel_gap.max((logit(p) - base[j] - offset).abs());
        }
    }

    // A feature with zero coefficient yields a flat PDP.
    let mut ignoring = match &linear {
        FittedModel::Linear(m) => m.clone(),
        _ => unreachable!(),
    };
    ignoring.coefficients.insert(FeatureName::Elo, 0.0);
    let flat = pdp(&FittedModel::Linear(ignoring), &rows, FeatureName::Elo, 30).unwrap();
    let flat_gap = flat
        .values
        .iter()
        .map(|v| (v - flat.values[0]).abs())
        .fold(0.0f64, f64::max);

    // A constant model has a constant 2-D surface.
    let constant = FittedModel::Linear(LinearModel {
        intercept: 0.3,
        coefficients: BTreeMap::from([(FeatureName::Rank, 0.0), (FeatureName::Elo, 0.0)]),
        converged: true,
        deviance: 0.0,
    });
    let surface = pdp_2d(&constant, &rows, FeatureName::Rank, FeatureName::Elo, 10, 10).unwrap();
    let expected = sigmoid(0.3);
    let surface_gap = surface
        .values
        .iter()
        .flatten()
        .map(|v| (v - expected).abs())
        .fold(0.0f64, f64::max);

    let ok = pdp_gap < 1e-12 && parallel_gap < 1e-10 && flat_gap < 1e-12 && surface_gap < 1e-12;
    report(
        8,
        ok,
        &format!(
            "PDP==mean ICE gap {pdp_gap:.2e}, additive ICE parallel on link scale gap {parallel_gap:.2e}, \
             ignored-feature PDP flat gap {flat_gap:.2e}, constant surface gap {surface_gap:.2e}"
        ),
    );
}

#[test]
fn criterion_09_enhanced_covariates_help() {
    let specs: Vec<ModelSpec> = ["Points,Rank", "Points,Rank,Elo", "Points,Rank,Elo,Age30"]
        .iter()
        .map(|s| ModelSpec::parse_features(s, Learner::Linear).unwrap())
        .collect();
    let mut successes = 0;
    let mut details = Vec::new();
    for seed in [101u64, 102, 103, 104, 105] {
        let data = generate_synthetic(6, 4, 48, seed);
        let config = EvalConfig { seed, ..EvalConfig::default() };
        let final_year = data.tournaments.last().unwrap().1;
        let rep = expanding_window(&data, &specs, final_year, &config).unwrap();
        let brier = |label: &str| {
            rep.cells
                .iter()
                .find(|c| c.spec.feature_label() == label)
                .unwrap()
                .scores
                .brier
        };
        let base = brier("Points,Rank");
        let with_elo = brier("Points,Rank,Elo");
        let with_age = brier("Points,Rank,Elo,Age30");
        let holds = with_elo < base && with_age <= with_elo + 0.005;
        successes += usize::from(holds);
        details.push(format!(
            "seed {seed}: {base:.4} -> {with_elo:.4} -> {with_age:.4} ({})",
            if holds { "ok" } else { "violated" }
        ));
    }
    let ok = successes >= 4;
    report(
        9,
        ok,
        &format!("Elo lowers expanding-window Brier and Age30 does not hurt in {successes}/5 seeds [{}]", details.join("; ")),
    );
}

#[test]
fn criterion_10_real_data_track() {
    let Ok(path) = std::env::var("COURTCAST_REAL_DATA") else {
        println!(
            "ACCEPTANCE 10 SKIP — conditional real-data track: set COURTCAST_REAL_DATA to a \
             CSV in the documented schema to enable"
        );
        return;
    };
    let text = std::fs::read_to_string(&path).expect("read real dataset");
    let data = courtcast::dataset::parse_matches(&text).expect("parse real dataset");
    let spec = ModelSpec::parse_features("Points,Rank,Elo,Age30", Learner::Forest).unwrap();
    let config = EvalConfig::default();
    let rep = expanding_window(&data, &[spec], 2022, &config).unwrap();
    let scores = &rep.cells[0].scores;
    let ok = (scores.classification_rate - 0.820).abs() <= 0.03
        && (scores.brier - 0.151).abs() <= 0.02;
    report(
        10,
        ok,
        &format!(
            "forest Points,Rank,Elo,Age30 on real data: rate {:.3} (target 0.820 +/- 0.03), \
             Brier {:.3} (target 0.151 +/- 0.02)",
            scores.classification_rate, scores.brier
        ),
    );
}
