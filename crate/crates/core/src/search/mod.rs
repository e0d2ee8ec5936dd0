//! Point-exchange search for local designs, baseline designs and global
//! designs accumulated over sampled parameter values.

mod baseline;
mod global;
mod local;
mod sample;

pub use baseline::{baseline_design, BaselineKind};
pub use global::{global_design, EtaOutcome, GlobalResult};
pub use local::{local_search, local_search_in, LocalResult};
pub use sample::{sample_discrete, sample_nonsingular, MAX_REDRAWS};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criterion::{CriterionConfig, Evaluator, Objective};
use crate::error::{Error, Result};
use crate::link::Link;
use crate::model::{CandidateSet, Design};
use crate::regularity::prop1_bounds;

pub const DEFAULT_PI_FILTER: (f64, f64) = (0.15, 0.85);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub n: usize,
    pub restarts: usize,
    /// Defaults to `200 n` when unset.
    pub max_iterations: Option<usize>,
    /// Defaults to `5 n` when unset.
    pub no_improve_window: Option<usize>,
    /// Probability window for the starting support. `None` keeps every
    /// candidate.
    pub pi_filter: Option<(f64, f64)>,
    /// Also restrict exchanges to the filtered candidates.
    pub restrict_exchanges: bool,
    pub kappa_init: f64,
    pub seed: u64,
    /// Use the same seed for every parameter sample of a global search.
    pub shared_seed: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n: 0,
            restarts: 10,
            max_iterations: None,
            no_improve_window: None,
            pi_filter: Some(DEFAULT_PI_FILTER),
            restrict_exchanges: false,
            kappa_init: 0.5,
            seed: 0,
            shared_seed: false,
        }
    }
}

impl SearchConfig {
    pub fn new(n: usize) -> Self {
        SearchConfig {
            n,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_pi_filter(mut self, filter: Option<(f64, f64)>) -> Self {
        self.pi_filter = filter;
        self
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations.unwrap_or(200 * self.n)
    }

    pub fn no_improve_window(&self) -> usize {
        self.no_improve_window.unwrap_or(5 * self.n)
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        if self.n < q {
            return Err(Error::Config(format!("run size n = {} is below q = {q}", self.n)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.pi_filter {
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return Err(Error::Config(format!(
                    "probability filter [{lo}, {hi}] must satisfy 0 < lo < hi < 1"
                )));
            }
        }
        if !(self.kappa_init > 0.0 && self.kappa_init < 1.0) {
            return Err(Error::Config(format!(
                "kappa_init = {} must lie in (0, 1)",
                self.kappa_init
            )));
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Indices of candidates whose success probability lies in `range`, or every
/// index when fewer than `q` survive.
pub fn filter_indices(cands: &CandidateSet, eta: &[f64], link: Link, range: (f64, f64)) -> Result<Vec<usize>> {
    let pis = cands.probabilities(eta, link)?;
    Ok(filter_by_probability(&pis, cands.q(), range))
}

fn filter_by_probability(pis: &[f64], q: usize, (lo, hi): (f64, f64)) -> Vec<usize> {
    let keep: Vec<usize> = (0..pis.len()).filter(|&i| pis[i] >= lo && pis[i] <= hi).collect();
    if keep.len() < q {
        (0..pis.len()).collect()
    } else {
        keep
    }
}

/// Candidate subset with `pi` in `range` (the full set when fewer than `q`
/// points survive).
pub fn filter_candidates(cands: &CandidateSet, eta: &[f64], link: Link, range: (f64, f64)) -> Result<CandidateSet> {
    let keep = filter_indices(cands, eta, link, range)?;
    cands.subset(&keep)
}

/// Evaluator used to pick the starting support: the same weights as the
/// objective but with no prior ridge.
pub(crate) fn reduction_objective(objective: &Objective) -> Objective {
    match objective {
        Objective::Qq(c) => Objective::Qq(CriterionConfig::noninformative(c.q(), c.link)),
        other => other.clone(),
    }
}

/// Greedy backward reduction of `allowed` (one run each) to `q` points by
/// repeatedly deleting the run with the smallest deletion value. Runs whose
/// removal would make the design singular are never deleted.
pub(crate) fn reduce_support(eval: &Evaluator<'_>, allowed: &[usize]) -> Result<Vec<usize>> {
    let q = eval.candidates().q();
    if allowed.len() < q {
        return Err(Error::InfeasibleModel(format!(
            "{} candidate points cannot support {q} parameters",
            allowed.len()
        )));
    }
    let mut st = eval.state(Design::new(allowed.to_vec())).map_err(|e| match e {
        Error::SingularDesign(m) => {
            Error::InfeasibleModel(format!("candidate points do not span the model ({m} is singular)"))
        }
        e => e,
    })?;
    while st.n() > q {
        let d = st.deletion_values();
        let pick = d
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        match pick {
            Some(i) => st.remove_point(i)?,
            None => {
                return Err(Error::InfeasibleModel(
                    "every remaining point is indispensable above q".into(),
                ))
            }
        }
    }
    let mut support = st.into_design().indices().to_vec();
    support.sort_unstable();
    Ok(support)
}

/// Adds `n - q` runs drawn from `support` with probabilities proportional to
/// `weights`.
pub(crate) fn replicate<R: Rng + ?Sized>(support: &[usize], weights: &[f64], n: usize, rng: &mut R) -> Result<Design> {
    let mut runs = support.to_vec();
    if n > runs.len() {
        let dist = WeightedIndex::new(weights).map_err(|e| Error::domain(format!("replication weights: {e}")))?;
        runs.extend((0..n - support.len()).map(|_| support[dist.sample(rng)]));
    }
    Ok(Design::new(runs))
}

/// Replication weights of the support: sufficient replication counts at
/// `kappa`, or uniform when `kappa` is `None`.
pub(crate) fn replication_weights(eval: &Evaluator<'_>, support: &[usize], kappa: Option<f64>) -> Result<Vec<f64>> {
    match kappa {
        Some(k) => {
            let pis: Vec<f64> = support.iter().map(|&i| eval.probabilities()[i]).collect();
            Ok(prop1_bounds(&pis, k)?
                .sufficient
                .into_iter()
                .map(|b| b as f64)
                .collect())
        }
        None => Ok(vec![1.0; support.len()]),
    }
}

/// Starting design for the joint criterion: reduction of the (filtered)
/// candidate set to `q` points under the noninformative criterion, then
/// replication weighted by the sufficient replication counts at `kappa_init`.
pub fn initial_design(cands: &CandidateSet, eta: &[f64], link: Link, config: &SearchConfig) -> Result<Design> {
    config.validate(cands.q())?;
    let objective = Objective::Qq(CriterionConfig::noninformative(cands.q(), link));
    let eval = Evaluator::new(cands, eta, &objective)?;
    let allowed = match config.pi_filter {
        Some(range) => filter_by_probability(eval.probabilities(), cands.q(), range),
        None => (0..cands.len()).collect(),
    };
    let support = match reduce_support(&eval, &allowed) {
        Ok(s) => s,
        Err(Error::InfeasibleModel(_)) if allowed.len() < cands.len() => {
            reduce_support(&eval, &(0..cands.len()).collect::<Vec<_>>())?
        }
        Err(e) => return Err(e),
    };
    let weights = replication_weights(&eval, &support, Some(config.kappa_init))?;
    replicate(&support, &weights, config.n, &mut config.rng())
}
