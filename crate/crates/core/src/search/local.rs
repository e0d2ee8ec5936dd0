use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{filter_by_probability, reduce_support, reduction_objective, replicate, replication_weights, SearchConfig};
use crate::criterion::{Evaluator, Objective};
use crate::error::{Error, Result};
use crate::model::{CandidateSet, Design};

/// Deletion values are clamped below at this before inverting.
const MIN_DELETION: f64 = 1e-9;

/// Exchanges must improve the criterion by more than this.
const ACCEPT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub design: Design,
    pub q: f64,
    /// Final criterion of every restart.
    pub restart_values: Vec<f64>,
    /// Accepted exchanges summed over restarts.
    pub accepted: usize,
}

/// Best design of `config.n` runs for one parameter value.
///
/// For the joint criterion the starting support is reduced from the
/// candidates whose success probability passes `config.pi_filter`, and its
/// replication is weighted by the sufficient counts. Exchanges scan every
/// candidate unless `config.restrict_exchanges` is set. Other objectives
/// start from uniform replication.
pub fn local_search(
    cands: &CandidateSet,
    eta: &[f64],
    objective: &Objective,
    config: &SearchConfig,
) -> Result<LocalResult> {
    let mut rng = config.rng();
    local_search_with(cands, eta, objective, config, &mut rng)
}

pub(crate) fn local_search_with<R: Rng + ?Sized>(
    cands: &CandidateSet,
    eta: &[f64],
    objective: &Objective,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<LocalResult> {
    config.validate(cands.q())?;
    let eval = Evaluator::new(cands, eta, objective)?;
    let reducer = Evaluator::new(cands, eta, &reduction_objective(objective))?;
    let all: Vec<usize> = (0..cands.len()).collect();
    let allowed = match (config.pi_filter, objective.link()) {
        (Some(range), Some(_)) => filter_by_probability(eval.probabilities(), cands.q(), range),
        _ => all.clone(),
    };
    let (allowed, support) = match reduce_support(&reducer, &allowed) {
        Ok(s) => (allowed, s),
        Err(Error::InfeasibleModel(_)) if allowed.len() < all.len() => {
            let s = reduce_support(&reducer, &all)?;
            (all.clone(), s)
        }
        Err(e) => return Err(e),
    };
    let scan = if config.restrict_exchanges { allowed } else { all };
    let kappa = matches!(objective, Objective::Qq(_)).then_some(config.kappa_init);
    let weights = replication_weights(&eval, &support, kappa)?;
    let mut restart_values = Vec::with_capacity(config.restarts);
    let mut best: Option<(Design, f64)> = None;
    let mut accepted = 0;
    for _ in 0..config.restarts {
        let start = replicate(&support, &weights, config.n, rng)?;
        let (design, q, acc) = local_search_in(&eval, &scan, start, config, rng)?;
        accepted += acc;
        restart_values.push(q);
        if best.as_ref().is_none_or(|(_, bq)| q > *bq) {
            best = Some((design, q));
        }
    }
    let (design, q) = best.expect("at least one restart");
    Ok(LocalResult {
        design,
        q,
        restart_values,
        accepted,
    })
}

/// One exchange run from `start`, scanning only the `allowed` candidates.
/// Returns the final design, its criterion value and the number of accepted
/// exchanges.
pub fn local_search_in<R: Rng + ?Sized>(
    eval: &Evaluator<'_>,
    allowed: &[usize],
    start: Design,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<(Design, f64, usize)> {
    let mut st = eval.state(start)?;
    let max_iter = config.max_iterations();
    let window = config.no_improve_window().max(1);
    let mut stale = 0;
    let mut accepted = 0;
    for _ in 0..max_iter {
        if stale >= window {
            break;
        }
        let weights: Vec<f64> = st
            .deletion_values()
            .into_iter()
            .map(|d| if d.is_finite() { 1.0 / d.max(MIN_DELETION) } else { 0.0 })
            .collect();
        let Ok(dist) = WeightedIndex::new(&weights) else {
            stale += 1;
            continue;
        };
        let i0 = dist.sample(rng);
        let deltas = st.exchange_deltas(i0, allowed);
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (&cand, &delta) in allowed.iter().zip(&deltas) {
            if delta > best.1 || (delta == best.1 && cand < best.0) {
                best = (cand, delta);
            }
        }
        if best.1 > ACCEPT_TOL && st.apply_exchange(best.0, i0).is_ok() {
            accepted += 1;
            stale = 0;
        } else {
            stale += 1;
        }
    }
    st.refresh()?;
    let q = st.q();
    Ok((st.into_design(), q, accepted))
}
