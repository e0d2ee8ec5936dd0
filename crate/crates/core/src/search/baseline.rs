use serde::{Deserialize, Serialize};

use super::local::local_search_with;
use super::SearchConfig;
use crate::criterion::Objective;
use crate::error::{Error, Result};
use crate::link::Link;
use crate::model::{CandidateSet, Design};

/// Reference designs to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// D-optimal for the linear model alone.
    LinearD,
    /// Local D-optimal for the binary response alone.
    GlmLocalD,
    /// A `GlmLocalD` design of `n_glm` runs followed by a `LinearD` design of
    /// `n_lin` runs.
    Combined { n_glm: usize, n_lin: usize },
}

impl BaselineKind {
    /// Combined design with two thirds of the runs on the binary model.
    pub fn combined(n: usize) -> Self {
        let n_glm = (2 * n + 1) / 3;
        BaselineKind::Combined {
            n_glm,
            n_lin: n - n_glm,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BaselineKind::LinearD => "linear-d",
            BaselineKind::GlmLocalD => "glm-local-d",
            BaselineKind::Combined { .. } => "combined",
        }
    }
}

/// Builds a baseline of `config.n` runs. Baselines search the whole candidate
/// set with uniform initial replication.
pub fn baseline_design(
    kind: BaselineKind,
    cands: &CandidateSet,
    eta: &[f64],
    link: Link,
    config: &SearchConfig,
) -> Result<Design> {
    let cfg = SearchConfig {
        pi_filter: None,
        ..config.clone()
    };
    let mut rng = cfg.rng();
    match kind {
        BaselineKind::LinearD => Ok(local_search_with(cands, eta, &Objective::LinearD, &cfg, &mut rng)?.design),
        BaselineKind::GlmLocalD => Ok(local_search_with(cands, eta, &Objective::GlmD(link), &cfg, &mut rng)?.design),
        BaselineKind::Combined { n_glm, n_lin } => {
            if n_glm + n_lin != config.n {
                return Err(Error::Config(format!(
                    "combined design sizes {n_glm} + {n_lin} do not add up to n = {}",
                    config.n
                )));
            }
            let glm = SearchConfig {
                n: n_glm,
                ..cfg.clone()
            };
            let lin = SearchConfig { n: n_lin, ..cfg };
            let a = local_search_with(cands, eta, &Objective::GlmD(link), &glm, &mut rng)?.design;
            let b = local_search_with(cands, eta, &Objective::LinearD, &lin, &mut rng)?.design;
            Ok(a.concat(&b))
        }
    }
}
