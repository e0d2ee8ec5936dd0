// Wafer etching study: five three-level quantitative factors, a correlated
// prior and a hierarchy-shaped coefficient box. Compares local and global
// QQ designs with the combined design that spends two thirds of the runs on
// the binary response and one third on the continuous one.
//
// Pass `--full` for the configured 500 samples.

use std::path::Path;

use qqdesign::config::ExperimentConfig;
use qqdesign::{baseline_design, efficiency, global_design, BaselineKind, Evaluator, FrequencyDesign};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(samples: Option<usize>, checks: usize) -> qqdesign::Result<()> {
    let mut cfg = ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/etching.json"))?;
    if let Some(b) = samples {
        cfg.search.b = b;
        cfg.search.restarts = 2;
    }
    let model = cfg.model()?;
    let cands = cfg.candidates()?;
    let objective = cfg.objective(&model)?;
    let link = objective.link().expect("binary response");
    let (n, q) = (cfg.search.n, model.q());
    println!("{} candidates, {q} effects, n = {n}", cands.len());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.search.seed);
    let etas = cfg.eta_samples(&model, &mut rng)?;
    let search = cfg.search_config(None);
    let global = global_design(&cands, &etas, &objective, &search)?;

    // Local comparison on the same samples, pooling the combined designs.
    let mut pooled = vec![0.0; cands.len()];
    let mut local_effs = Vec::new();
    for out in &global.per_eta {
        let eta = &etas[out.index];
        let comb = baseline_design(BaselineKind::combined(n), &cands, eta, link, &search)?;
        for &i in comb.indices() {
            pooled[i] += 1.0;
        }
        let eval = Evaluator::new(&cands, eta, &objective)?;
        local_effs.push(efficiency(out.q, eval.q_value(&comb)?, q));
    }
    let d_c = FrequencyDesign::from_counts(&pooled)?;
    println!(
        "local QQ vs combined over {} samples: min {:.3}, max {:.3}",
        local_effs.len(),
        local_effs.iter().cloned().fold(f64::INFINITY, f64::min),
        local_effs.iter().cloned().fold(0.0, f64::max)
    );

    // Global comparison on fresh draws.
    cfg.search.b = checks;
    let mut check_rng = ChaCha8Rng::seed_from_u64(cfg.search.seed + 1);
    let fresh = cfg.eta_samples(&model, &mut check_rng)?;
    let mut better = 0;
    for eta in &fresh {
        let eval = Evaluator::new(&cands, eta, &objective)?;
        let e = efficiency(eval.continuous_q(&global.freq, n)?, eval.continuous_q(&d_c, n)?, q);
        better += usize::from(e > 1.0);
    }
    println!(
        "global QQ better than global combined for {better} of {} fresh samples",
        fresh.len()
    );
    Ok(())
}

pub fn run_example() -> qqdesign::Result<()> {
    run(Some(4), 10)
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    if std::env::args().any(|a| a == "--full") {
        run(None, 100)
    } else {
        run(Some(4), 10)
    }
}
