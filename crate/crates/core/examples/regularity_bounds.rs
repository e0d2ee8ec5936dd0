// How many replicates keep both conditional information matrices
// nonsingular.

use std::path::Path;

use qqdesign::io::{read_count_table, read_eta_samples};
use qqdesign::regularity::{prop1_bounds, BoundsReport};
use qqdesign::{CandidateSet, FactorSpec, Link, ModelSpec};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn run_example() -> qqdesign::Result<()> {
    // f(x) = (1, x), eta = (1, 1), three design points.
    let pis: Vec<f64> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|x| Link::Logit.prob_from_linear(1.0 + x))
        .collect();
    for kappa in [0.5, 0.9] {
        let b = prop1_bounds(&pis, kappa)?;
        println!(
            "kappa {kappa}: sufficient {:?}, necessary {:?}",
            b.sufficient, b.necessary
        );
    }

    let model = ModelSpec::full_quadratic(vec![
        FactorSpec::two_level("x1"),
        FactorSpec::two_level("x2"),
        FactorSpec::two_level("x3"),
        FactorSpec::categorical("x4"),
        FactorSpec::quantitative("x5"),
    ])?;
    let cands = CandidateSet::full_factorial(&model);
    let eta = read_eta_samples(&data("artificial_eta.csv"), &model.effect_names())?.remove(0);
    let all = cands.probabilities(&eta, Link::Logit)?;
    for (name, design) in read_count_table(&data("artificial_designs.csv"), &cands)? {
        let pts = design.support();
        let sub: Vec<f64> = pts.iter().map(|&i| all[i]).collect();
        let r = BoundsReport::new(&sub, model.q(), 0.5)?;
        let run = r.run_size.expect("more distinct points than effects");
        println!(
            "{name:10} m = {:2}  n0 >= {} (sufficient), n0 >= {} (necessary), smallest replication {}",
            pts.len(),
            run.n0_sufficient,
            run.n0_necessary,
            design.counts(cands.len()).iter().filter(|&&c| c > 0).min().unwrap()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
