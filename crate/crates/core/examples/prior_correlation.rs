// Prior correlation of the effects under the hierarchy principle.

use qqdesign::priors::{correlation_matrix, zeta, DEFAULT_DECAY};
use qqdesign::{FactorSpec, ModelSpec};

pub fn run_example() -> qqdesign::Result<()> {
    let two = ModelSpec::full_quadratic(vec![FactorSpec::two_level("a"), FactorSpec::two_level("b")])?;
    let r = correlation_matrix(&two, DEFAULT_DECAY)?;
    println!("two 2-level factors, r = 1/3:");
    for (name, v) in two.effect_names().iter().zip(r.matrix().diagonal().iter()) {
        println!("  {name:10} {v:.4}");
    }

    let quad = ModelSpec::full_quadratic(vec![FactorSpec::two_level("a"), FactorSpec::quantitative("b")])?;
    for rate in [0.1, DEFAULT_DECAY, 0.9] {
        let r = correlation_matrix(&quad, rate)?;
        println!("\nr = {rate:.3} (zeta = {:.3})", zeta(rate));
        println!(
            "{:>10} {}",
            "",
            quad.effect_names()
                .iter()
                .map(|n| format!("{n:>8}"))
                .collect::<String>()
        );
        for (i, name) in quad.effect_names().iter().enumerate() {
            let row: String = (0..quad.q()).map(|j| format!("{:8.4}", r.matrix()[(i, j)])).collect();
            println!("{name:>10} {row}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    run_example()
}
