// Deletion values, exchange deltas and in-place updates of the criterion
// state, checked against evaluation from scratch.

use qqdesign::criterion::CriterionState;
use qqdesign::{CandidateSet, CriterionConfig, Design, Evaluator, Link, Objective};

pub fn run_example() -> qqdesign::Result<()> {
    // Quadratic regression in one factor with five levels.
    let cands = CandidateSet::polynomial(&[-2, -1, 0, 1, 2], 2);
    let eta = [0.3, 0.8, -0.4];
    let objective = Objective::Qq(CriterionConfig::noninformative(3, Link::Logit));
    let eval = Evaluator::new(&cands, &eta, &objective)?;
    let mut state: CriterionState = eval.state(Design::new(vec![0, 2, 4, 1, 3, 2]))?;
    println!("Q = {:.6}", state.q());

    for (i, d) in state.deletion_values().iter().enumerate() {
        println!(
            "  run {i} at x = {:+}: d = {d:.4}",
            cands.point(state.design().indices()[i])[0]
        );
    }

    let deltas = state.exchange_deltas(1, &[0, 1, 2, 3, 4]);
    let (best, delta) = deltas.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (k, &d)| if d > acc.1 { (k, d) } else { acc },
    );
    println!(
        "best replacement for run 1: x = {:+}, delta = {delta:.6}",
        cands.point(best)[0]
    );

    let before = state.q();
    state.apply_exchange(best, 1)?;
    let scratch = eval.q_value(state.design())?;
    println!(
        "after exchange: incremental {:.12}, from scratch {scratch:.12}, predicted {:.12}",
        state.q(),
        before + delta
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
