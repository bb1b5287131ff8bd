//! Enumerate the 21 canonical feature subsets and show why the excluded
//! combinations are rejected.

use courtcast::features::{enumerate_specs, FeatureName, Learner, ModelSpec};

fn main() {
    let specs = enumerate_specs(Learner::Linear);
    println!("{} candidate models:", specs.len());
    for (i, spec) in specs.iter().enumerate() {
        println!("{:>2}. {}", i + 1, spec.feature_label());
    }

    // Both age transforms together are redundant, and age alone carries no
    // baseline strength signal, so those subsets are not valid specifications.
    let both_ages = ModelSpec::new([FeatureName::Age30, FeatureName::AgeInt], Learner::Linear);
    println!("\nAge30 + AgeInt together: {}", both_ages.unwrap_err());
    let lone_age = ModelSpec::new([FeatureName::Age30], Learner::Linear);
    println!("Age30 alone: {}", lone_age.unwrap_err());
}
