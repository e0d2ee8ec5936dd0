// Local QQ design for one parameter value of the artificial example.

use std::path::Path;

use qqdesign::io::{read_count_table, read_eta_samples};
use qqdesign::priors::{correlation_matrix, DEFAULT_DECAY};
use qqdesign::{
    local_search, CandidateSet, CriterionConfig, Evaluator, FactorSpec, Link, ModelSpec, Objective, SearchConfig,
};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn run_example() -> qqdesign::Result<()> {
    let model = ModelSpec::full_quadratic(vec![
        FactorSpec::two_level("x1"),
        FactorSpec::two_level("x2"),
        FactorSpec::two_level("x3"),
        FactorSpec::categorical("x4"),
        FactorSpec::quantitative("x5"),
    ])?;
    let cands = CandidateSet::full_factorial(&model);
    let eta = read_eta_samples(&data("artificial_eta.csv"), &model.effect_names())?.remove(0);
    let bundled = read_count_table(&data("artificial_designs.csv"), &cands)?;
    let r = correlation_matrix(&model, DEFAULT_DECAY)?;

    for (rho, column) in [(0.0, "dqq_rho0"), (0.3, "dqq_rho03")] {
        let crit = if rho > 0.0 {
            CriterionConfig::conjugate(rho, &r, &r, Link::Logit)?
        } else {
            CriterionConfig::noninformative(model.q(), Link::Logit)
        };
        let objective = Objective::Qq(crit);
        let res = local_search(&cands, &eta, &objective, &SearchConfig::new(66).with_seed(1))?;
        let eval = Evaluator::new(&cands, &eta, &objective)?;
        let reference = bundled.iter().find(|(n, _)| n == column).expect("bundled column");
        let q_ref = eval.q_value(&reference.1)?;
        println!(
            "rho {rho}: Q = {:.4} with {} distinct points (bundled design {q_ref:.4}), restarts {:?}",
            res.q,
            res.design.distinct(),
            res.restart_values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
        );
        let counts = res.design.counts(cands.len());
        for level in [-1, 0, 1] {
            let runs: usize = (0..cands.len())
                .filter(|&i| cands.point(i)[4] == level)
                .map(|i| counts[i])
                .sum();
            println!("  runs with x5 = {level:+}: {runs}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
