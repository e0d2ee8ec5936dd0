// Efficiency of the local QQ design relative to linear, binary-response
// and combined D-optimal designs.

use std::path::Path;

use qqdesign::io::read_eta_samples;
use qqdesign::priors::{correlation_matrix, DEFAULT_DECAY};
use qqdesign::{
    baseline_design, efficiency, local_search, BaselineKind, CandidateSet, CriterionConfig, Evaluator, FactorSpec,
    Link, ModelSpec, Objective, SearchConfig,
};

pub fn run_example() -> qqdesign::Result<()> {
    let model = ModelSpec::full_quadratic(vec![
        FactorSpec::two_level("x1"),
        FactorSpec::two_level("x2"),
        FactorSpec::two_level("x3"),
        FactorSpec::categorical("x4"),
        FactorSpec::quantitative("x5"),
    ])?;
    let cands = CandidateSet::full_factorial(&model);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/artificial_eta.csv");
    let eta = read_eta_samples(&path, &model.effect_names())?.remove(0);
    let search = SearchConfig::new(66).with_seed(1);

    let kinds = [
        BaselineKind::LinearD,
        BaselineKind::GlmLocalD,
        BaselineKind::combined(66),
    ];
    let baselines = kinds
        .iter()
        .map(|&k| baseline_design(k, &cands, &eta, Link::Logit, &search))
        .collect::<qqdesign::Result<Vec<_>>>()?;

    let r = correlation_matrix(&model, DEFAULT_DECAY)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "rho", "vs linear", "vs glm", "vs comb.");
    for rho in [0.0, 0.3] {
        let crit = if rho > 0.0 {
            CriterionConfig::conjugate(rho, &r, &r, Link::Logit)?
        } else {
            CriterionConfig::noninformative(model.q(), Link::Logit)
        };
        let objective = Objective::Qq(crit);
        let eval = Evaluator::new(&cands, &eta, &objective)?;
        let qq = local_search(&cands, &eta, &objective, &search)?;
        let effs: Vec<String> = baselines
            .iter()
            .map(|d| {
                eval.q_value(d)
                    .map(|q| format!("{:10.4}", efficiency(qq.q, q, model.q())))
            })
            .collect::<qqdesign::Result<_>>()?;
        println!("{rho:5.1} {}", effs.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
