//! The Bayesian D-optimality criterion for a continuous and a binary response.
//!
//! For a fixed `eta` the criterion of a design `X` with model matrix `F` is
//!
//! ```text
//! Q(X | eta) = log det(F'W0F [+ rho0 R0^-1])
//!            + 1/2 log det(F'W1F + rho R1^-1)
//!            + 1/2 log det(F'W2F + rho R2^-1)
//! ```
//!
//! with `W1 = diag(pi)`, `W2 = I - W1` and `W0` the GLM Fisher weights
//! (`pi (1 - pi)` under the logit link). `rho = 0` gives the noninformative
//! version.
//!
//! Internally every objective is a list of weighted log-determinant
//! *channels*; the same machinery then serves the QQ criterion and the
//! single-matrix baselines (linear D-optimality, GLM local D-optimality).

mod state;

use nalgebra::DMatrix;

pub use state::{CriterionState, DEFAULT_REFRESH_EVERY, SINGULAR_RATIO_TOL};

use crate::error::{Error, InfoMatrix, Result};
use crate::linalg;
use crate::link::Link;
use crate::model::{CandidateSet, Design};
use crate::priors::CorrelationMatrix;

/// Settings of the QQ criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionConfig {
    pub link: Link,
    /// Noise-to-signal ratio `sigma^2 / tau^2`.
    pub rho: f64,
    pub r1_inv: DMatrix<f64>,
    pub r2_inv: DMatrix<f64>,
    /// Optional normal prior on `eta`: `(rho0, R0^-1)`, adding `rho0 R0^-1`
    /// to the binary-response information.
    pub eta_ridge: Option<(f64, DMatrix<f64>)>,
}

impl CriterionConfig {
    /// Noninformative priors (`rho = 0`).
    pub fn noninformative(q: usize, link: Link) -> Self {
        CriterionConfig {
            link,
            rho: 0.0,
            r1_inv: DMatrix::zeros(q, q),
            r2_inv: DMatrix::zeros(q, q),
            eta_ridge: None,
        }
    }

    /// Conjugate normal priors on both linear-model coefficient vectors.
    pub fn conjugate(rho: f64, r1: &CorrelationMatrix, r2: &CorrelationMatrix, link: Link) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("rho = {rho} must be finite and non-negative")));
        }
        if r1.dim() != r2.dim() {
            return Err(Error::domain("R1 and R2 differ in dimension"));
        }
        Ok(CriterionConfig {
            link,
            rho,
            r1_inv: r1.inverse(),
            r2_inv: r2.inverse(),
            eta_ridge: None,
        })
    }

    pub fn with_eta_ridge(mut self, rho0: f64, r0_inv: DMatrix<f64>) -> Self {
        self.eta_ridge = Some((rho0, r0_inv));
        self
    }

    pub fn q(&self) -> usize {
        self.r1_inv.nrows()
    }
}

/// What a search maximises.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// The joint criterion `Q`.
    Qq(CriterionConfig),
    /// Classic D-optimality for the linear model, `log det(F'F)`.
    LinearD,
    /// Local D-optimality for the GLM, `log det(F'W0F)`.
    GlmD(Link),
}

impl Objective {
    pub fn link(&self) -> Option<Link> {
        match self {
            Objective::Qq(c) => Some(c.link),
            Objective::LinearD => None,
            Objective::GlmD(l) => Some(*l),
        }
    }
}

/// One weighted log-determinant term of an objective.
#[derive(Debug, Clone)]
pub struct Channel {
    pub matrix: InfoMatrix,
    pub coef: f64,
    pub ridge: Option<DMatrix<f64>>,
    /// Diagonal weight of every candidate point.
    pub weights: Vec<f64>,
}

/// An objective bound to a candidate set and a fixed `eta`.
#[derive(Debug, Clone)]
pub struct Evaluator<'c> {
    candidates: &'c CandidateSet,
    channels: Vec<Channel>,
    probs: Vec<f64>,
}

impl<'c> Evaluator<'c> {
    pub fn new(candidates: &'c CandidateSet, eta: &[f64], objective: &Objective) -> Result<Self> {
        let q = candidates.q();
        let lin = candidates.linear_predictors(eta)?;
        let link = objective.link().unwrap_or_default();
        let w: Vec<_> = lin.iter().map(|&t| link.weights_from_linear(t)).collect();
        let probs = w.iter().map(|w| w.w1).collect();
        let check = |m: &DMatrix<f64>, what: &str| -> Result<()> {
            if m.nrows() != q || m.ncols() != q {
                return Err(Error::domain(format!("{what} must be {q}x{q}")));
            }
            Ok(())
        };
        let channels = match objective {
            Objective::Qq(cfg) => {
                check(&cfg.r1_inv, "R1^-1")?;
                check(&cfg.r2_inv, "R2^-1")?;
                let ridge = |m: &DMatrix<f64>| (cfg.rho > 0.0).then(|| m * cfg.rho);
                let ridge0 = match &cfg.eta_ridge {
                    Some((rho0, r0)) => {
                        check(r0, "R0^-1")?;
                        (*rho0 > 0.0).then(|| r0 * *rho0)
                    }
                    None => None,
                };
                vec![
                    Channel {
                        matrix: InfoMatrix::Binary,
                        coef: 1.0,
                        ridge: ridge0,
                        weights: w.iter().map(|w| w.w0).collect(),
                    },
                    Channel {
                        matrix: InfoMatrix::GivenOne,
                        coef: 0.5,
                        ridge: ridge(&cfg.r1_inv),
                        weights: w.iter().map(|w| w.w1).collect(),
                    },
                    Channel {
                        matrix: InfoMatrix::GivenZero,
                        coef: 0.5,
                        ridge: ridge(&cfg.r2_inv),
                        weights: w.iter().map(|w| w.w2).collect(),
                    },
                ]
            }
            Objective::LinearD => vec![Channel {
                matrix: InfoMatrix::Baseline,
                coef: 1.0,
                ridge: None,
                weights: vec![1.0; candidates.len()],
            }],
            Objective::GlmD(_) => vec![Channel {
                matrix: InfoMatrix::Binary,
                coef: 1.0,
                ridge: None,
                weights: w.iter().map(|w| w.w0).collect(),
            }],
        };
        Ok(Evaluator {
            candidates,
            channels,
            probs,
        })
    }

    pub fn candidates(&self) -> &'c CandidateSet {
        self.candidates
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// `pi(x, eta)` of every candidate.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Information matrix of channel `ch` for `design`, ridge included.
    pub fn information(&self, design: &Design, ch: usize) -> DMatrix<f64> {
        let c = &self.channels[ch];
        let mut m = linalg::weighted_gram(
            self.candidates.q(),
            design.indices().iter().map(|&i| (c.weights[i], self.candidates.row(i))),
        );
        if let Some(r) = &c.ridge {
            m += r;
        }
        m
    }

    /// Per-channel log-determinants computed from scratch.
    pub fn logdets(&self, design: &Design) -> Result<Vec<f64>> {
        design.validate(self.candidates)?;
        (0..self.channels.len())
            .map(|ch| {
                linalg::spd_logdet(&self.information(design, ch)).ok_or(Error::SingularDesign(self.channels[ch].matrix))
            })
            .collect()
    }

    /// Criterion value of an exact design, computed from scratch.
    pub fn q_value(&self, design: &Design) -> Result<f64> {
        Ok(self.combine(&self.logdets(design)?))
    }

    pub(crate) fn combine(&self, logdets: &[f64]) -> f64 {
        self.channels.iter().zip(logdets).map(|(c, l)| c.coef * l).sum()
    }

    /// Criterion value of a continuous design scaled to `n` runs. The ridge
    /// is added once, outside the frequency-weighted sum.
    pub fn continuous_q(&self, freq: &FrequencyDesign, n: usize) -> Result<f64> {
        if freq.len() != self.candidates.len() {
            return Err(Error::domain(format!(
                "frequency design has {} entries for {} candidates",
                freq.len(),
                self.candidates.len()
            )));
        }
        let scale = n as f64;
        let mut total = 0.0;
        for c in &self.channels {
            let mut m = linalg::weighted_gram(
                self.candidates.q(),
                freq.values()
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(i, &p)| (scale * p * c.weights[i], self.candidates.row(i))),
            );
            if let Some(r) = &c.ridge {
                m += r;
            }
            let ld = linalg::spd_logdet(&m).ok_or(Error::SingularDesign(c.matrix))?;
            total += c.coef * ld;
        }
        Ok(total)
    }

    pub fn state(&self, design: Design) -> Result<CriterionState<'_, 'c>> {
        CriterionState::new(self, design)
    }
}

/// `Q(design | eta)` from scratch.
pub fn q_value(candidates: &CandidateSet, design: &Design, eta: &[f64], config: &CriterionConfig) -> Result<f64> {
    Evaluator::new(candidates, eta, &Objective::Qq(config.clone()))?.q_value(design)
}

/// `Q(d | eta)` of a continuous design scaled to `n` runs.
pub fn continuous_q(
    candidates: &CandidateSet,
    freq: &FrequencyDesign,
    n: usize,
    eta: &[f64],
    config: &CriterionConfig,
) -> Result<f64> {
    Evaluator::new(candidates, eta, &Objective::Qq(config.clone()))?.continuous_q(freq, n)
}

/// Per-parameter efficiency `exp((Q1 - Q2) / q)` of design 1 relative to design 2.
pub fn efficiency(q1: f64, q2: f64, q: usize) -> f64 {
    ((q1 - q2) / q as f64).exp()
}

/// Normalised selection frequencies over a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDesign {
    freq: Vec<f64>,
}

impl FrequencyDesign {
    pub fn new(freq: Vec<f64>) -> Result<Self> {
        if freq.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("frequencies must be finite and non-negative"));
        }
        let total: f64 = freq.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("frequencies sum to {total}, not 1")));
        }
        Ok(FrequencyDesign { freq })
    }

    /// Normalises non-negative counts.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(Error::domain("cannot normalise an all-zero count vector"));
        }
        let mut freq: Vec<f64> = counts.iter().map(|c| c / total).collect();
        // Absorb rounding so the sum is 1 to within an ulp or two.
        let drift: f64 = 1.0 - freq.iter().sum::<f64>();
        if let Some(max) = freq.iter_mut().max_by(|a, b| a.partial_cmp(b).expect("finite")) {
            *max += drift;
        }
        Self::new(freq)
    }

    /// Empirical frequencies `n_i / n` of an exact design.
    pub fn from_design(design: &Design, num_candidates: usize) -> Result<Self> {
        let counts: Vec<f64> = design.counts(num_candidates).into_iter().map(|c| c as f64).collect();
        Self::from_counts(&counts)
    }

    pub fn values(&self) -> &[f64] {
        &self.freq
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }
}
