// Global QQ design for the artificial example: local searches over a
// Latin hypercube sample of the coefficient box, pooled into frequencies.
//
// `cargo run --release --example global_design -- --full` uses the
// configured 500 samples; the default is a quick run with 12.

use std::path::Path;

use qqdesign::config::ExperimentConfig;
use qqdesign::search::sample_nonsingular;
use qqdesign::{global_design, Evaluator, Objective};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(samples: Option<usize>) -> qqdesign::Result<()> {
    let mut cfg = ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/artificial.json"))?;
    if let Some(b) = samples {
        cfg.search.b = b;
        cfg.search.restarts = 3;
    }
    let model = cfg.model()?;
    let cands = cfg.candidates()?;
    let objective = cfg.objective(&model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.search.seed);
    let etas = cfg.eta_samples(&model, &mut rng)?;
    let res = global_design(&cands, &etas, &objective, &cfg.search_config(None))?;
    println!("{} samples, {} failed", res.b, res.failures.len());

    let f = res.freq.values();
    for (k, name) in cands.factor_names().iter().enumerate().skip(3) {
        let means: Vec<String> = [-1, 0, 1]
            .iter()
            .map(|&lv| {
                let sel: Vec<f64> = (0..cands.len())
                    .filter(|&i| cands.point(i)[k] == lv)
                    .map(|i| f[i])
                    .collect();
                format!("{lv:+}: {:.4}", sel.iter().sum::<f64>() / sel.len() as f64)
            })
            .collect();
        println!("mean frequency by {name} level  {}", means.join("  "));
    }

    let mut top: Vec<usize> = (0..cands.len()).collect();
    top.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
    for &i in &top[..5] {
        println!("  {:?} {:.4}", cands.point(i), f[i]);
    }

    // An exact design of n runs drawn from the frequencies.
    let lin = Evaluator::new(&cands, &etas[0], &Objective::LinearD)?;
    let exact = sample_nonsingular(&lin, &res.freq, cfg.search.n, &mut rng)?;
    println!("sampled design: {} runs on {} points", exact.n(), exact.distinct());
    Ok(())
}

pub fn run_example() -> qqdesign::Result<()> {
    run(Some(12))
}

#[allow(dead_code)]
fn main() -> qqdesign::Result<()> {
    let full = std::env::args().any(|a| a == "--full");
    run(if full { None } else { Some(12) })
}
