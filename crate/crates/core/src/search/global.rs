use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::local_search_with;
use super::SearchConfig;
use crate::criterion::{FrequencyDesign, Objective};
use crate::error::{Error, Result};
use crate::model::{CandidateSet, Design};

/// Largest tolerated share of failed parameter samples.
const MAX_FAILURE_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaOutcome {
    pub index: usize,
    pub q: f64,
    pub design: Design,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalResult {
    pub freq: FrequencyDesign,
    /// Selection counts per candidate, replicates counted with multiplicity.
    pub counts: Vec<usize>,
    pub per_eta: Vec<EtaOutcome>,
    /// Samples whose local search failed, with the reason.
    pub failures: Vec<(usize, String)>,
    pub b: usize,
}

/// Runs a local search for every sample in `etas` and turns the pooled
/// selection counts into a frequency design.
///
/// Sample `b` uses its own ChaCha stream of `config.seed` (or the plain seed
/// when `config.shared_seed` is set), so the result does not depend on how
/// the work is scheduled.
pub fn global_design(
    cands: &CandidateSet,
    etas: &[Vec<f64>],
    objective: &Objective,
    config: &SearchConfig,
) -> Result<GlobalResult> {
    if etas.is_empty() {
        return Err(Error::Config(
            "global search needs at least one parameter sample".into(),
        ));
    }
    config.validate(cands.q())?;
    let outcomes: Vec<Result<EtaOutcome>> = etas
        .par_iter()
        .enumerate()
        .map(|(b, eta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            if !config.shared_seed {
                rng.set_stream(b as u64);
            }
            let r = local_search_with(cands, eta, objective, config, &mut rng)?;
            Ok(EtaOutcome {
                index: b,
                q: r.q,
                design: r.design,
            })
        })
        .collect();
    let mut counts = vec![0usize; cands.len()];
    let mut per_eta = Vec::with_capacity(etas.len());
    let mut failures = Vec::new();
    for (b, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) => {
                for &i in o.design.indices() {
                    counts[i] += 1;
                }
                per_eta.push(o);
            }
            Err(e @ (Error::Config(_) | Error::Domain(_))) => return Err(e),
            Err(e) => failures.push((b, e.to_string())),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_SHARE * etas.len() as f64 || per_eta.is_empty() {
        return Err(Error::InfeasibleModel(format!(
            "local search failed for {} of {} parameter samples (first: {})",
            failures.len(),
            etas.len(),
            failures.first().map(|f| f.1.as_str()).unwrap_or("")
        )));
    }
    let freq = FrequencyDesign::from_counts(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())?;
    Ok(GlobalResult {
        freq,
        counts,
        per_eta,
        failures,
        b: etas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::CriterionConfig;
    use crate::link::Link;

    fn setup() -> (CandidateSet, Objective) {
        (
            CandidateSet::polynomial(&[-2, -1, 0, 1, 2], 2),
            Objective::Qq(CriterionConfig::noninformative(3, Link::Logit)),
        )
    }

    #[test]
    fn single_sample_matches_local_frequencies() {
        let (c, obj) = setup();
        let cfg = SearchConfig::new(8).with_seed(4);
        let eta = vec![0.3, 0.4, -0.2];
        let g = global_design(&c, std::slice::from_ref(&eta), &obj, &cfg).unwrap();
        let d = &g.per_eta[0].design;
        let expect = FrequencyDesign::from_design(d, c.len()).unwrap();
        for (a, b) in g.freq.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_samples_with_shared_seed() {
        let (c, obj) = setup();
        let mut cfg = SearchConfig::new(8).with_seed(4);
        cfg.shared_seed = true;
        let eta = vec![0.3, 0.4, -0.2];
        let one = global_design(&c, std::slice::from_ref(&eta), &obj, &cfg).unwrap();
        let two = global_design(&c, &[eta.clone(), eta], &obj, &cfg).unwrap();
        assert_eq!(one.freq, two.freq);
    }

    #[test]
    fn counts_follow_sample_streams() {
        let (c, obj) = setup();
        let cfg = SearchConfig::new(6).with_seed(1);
        let etas = vec![vec![0.1, 0.2, 0.0], vec![-0.5, 0.9, 0.1], vec![0.0, -0.3, 0.2]];
        let g = global_design(&c, &etas, &obj, &cfg).unwrap();
        assert_eq!(g.counts.iter().sum::<usize>(), 18);
        // each sample's design depends only on its own index
        let sub = global_design(&c, &etas[..2], &obj, &cfg).unwrap();
        assert_eq!(sub.per_eta, g.per_eta[..2]);
    }

    #[test]
    fn empty_samples_rejected() {
        let (c, obj) = setup();
        assert!(global_design(&c, &[], &obj, &SearchConfig::new(6)).is_err());
    }
}
