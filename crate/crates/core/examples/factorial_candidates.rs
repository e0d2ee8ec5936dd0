// Full factorial candidates and the effect columns of a full quadratic model.

use qqdesign::{CandidateSet, FactorSpec, ModelSpec};

pub fn run_example() -> qqdesign::Result<()> {
    let model = ModelSpec::full_quadratic(vec![
        FactorSpec::two_level("x1"),
        FactorSpec::two_level("x2"),
        FactorSpec::two_level("x3"),
        FactorSpec::categorical("x4"),
        FactorSpec::quantitative("x5"),
    ])?;
    let cands = CandidateSet::full_factorial(&model);
    println!("{} candidates, {} effects", cands.len(), model.q());
    println!("effects: {}", model.effect_names().join(" "));

    for i in [0, 1, 8, 71] {
        let f = cands.row(i);
        let shown: Vec<String> = f.iter().take(8).map(|v| format!("{v:+.3}")).collect();
        println!("point {:2} {:?}: {} ...", i + 1, cands.point(i), shown.join(" "));
    }

    // The coding is orthogonal over the full factorial.
    let f = cands.fmatrix();
    let ftf = f.transpose() * f;
    let off = (0..model.q())
        .flat_map(|i| (0..model.q()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| ftf[(i, j)].abs())
        .fold(0.0, f64::max);
    println!("F'F diagonal {:.1}, largest off-diagonal {off:.1e}", ftf[(0, 0)]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
