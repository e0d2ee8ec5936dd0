use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[default]
    Logit,
    Probit,
}

/// Per-point diagonal weights of the three information matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointWeight {
    /// Binary-response Fisher weight.
    pub w0: f64,
    /// `P(Z = 1)`.
    pub w1: f64,
    /// `P(Z = 0)`.
    pub w2: f64,
}

impl PointWeight {
    pub fn as_array(&self) -> [f64; 3] {
        [self.w0, self.w1, self.w2]
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

impl Link {
    pub fn prob_from_linear(self, t: f64) -> f64 {
        let p = match self {
            Link::Logit => {
                if t >= 0.0 {
                    1.0 / (1.0 + (-t).exp())
                } else {
                    let e = t.exp();
                    e / (1.0 + e)
                }
            }
            Link::Probit => std_normal().cdf(t),
        };
        p.clamp(PROB_EPS, 1.0 - PROB_EPS)
    }

    pub fn weights_from_linear(self, t: f64) -> PointWeight {
        let p = self.prob_from_linear(t);
        let w0 = match self {
            Link::Logit => p * (1.0 - p),
            Link::Probit => {
                let phi = std_normal().pdf(t);
                // Far in the tails phi^2 underflows before p(1-p) does.
                (phi * phi / (p * (1.0 - p))).max(f64::MIN_POSITIVE)
            }
        };
        PointWeight { w0, w1: p, w2: 1.0 - p }
    }
}

fn dot(fx: &[f64], eta: &[f64]) -> Result<f64> {
    if fx.len() != eta.len() {
        return Err(Error::domain(format!(
            "effect vector has length {} but eta has {}",
            fx.len(),
            eta.len()
        )));
    }
    Ok(fx.iter().zip(eta).map(|(a, b)| a * b).sum())
}

/// Success probability `pi(x, eta)` under `link`.
pub fn link_prob(fx: &[f64], eta: &[f64], link: Link) -> Result<f64> {
    Ok(link.prob_from_linear(dot(fx, eta)?))
}

/// Weights `(w0, w1, w2)` of a single point.
pub fn point_weights(fx: &[f64], eta: &[f64], link: Link) -> Result<PointWeight> {
    Ok(link.weights_from_linear(dot(fx, eta)?))
}

/// Weights for every run of a design, given the candidate rows of its runs.
pub fn weight_diagonals<'a, I>(rows: I, eta: &[f64], link: Link) -> Result<Vec<PointWeight>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    rows.into_iter().map(|r| point_weights(r, eta, link)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logit_example_one() {
        let p = link_prob(&[1.0, 1.0], &[1.0, 1.0], Link::Logit).unwrap();
        assert!((p - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert_eq!(((1.0 - p) * 100.0).round() / 100.0, 0.12);
        assert_eq!(link_prob(&[1.0, -1.0], &[1.0, 1.0], Link::Logit).unwrap(), 0.5);
        assert!(link_prob(&[1.0], &[1.0, 1.0], Link::Logit).is_err());
    }

    #[test]
    fn symmetric_point_weights() {
        for link in [Link::Logit, Link::Probit] {
            assert_eq!(link.prob_from_linear(0.0), 0.5);
        }
        let w = Link::Logit.weights_from_linear(0.0);
        assert_eq!(w.as_array(), [0.25, 0.5, 0.5]);
        // phi(0)^2 / 0.25 = 2 / pi
        let w = Link::Probit.weights_from_linear(0.0);
        assert!((w.w0 - 2.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn logit_weight_at_example_point() {
        let w = point_weights(&[1.0, 1.0], &[1.0, 1.0], Link::Logit).unwrap();
        assert!((w.w0 - 0.104_993_585_403_506_6).abs() < 1e-12);
    }

    #[test]
    fn extreme_predictors_clamped() {
        for link in [Link::Logit, Link::Probit] {
            for t in [-1e3, -50.0, 50.0, 1e3] {
                let w = link.weights_from_linear(t);
                assert!(w.w0 > 0.0 && w.w1 >= PROB_EPS && w.w2 >= PROB_EPS * 0.5, "{link:?} {t}");
            }
        }
    }

    proptest! {
        #[test]
        fn weights_partition_probability(t in -40.0f64..40.0) {
            for link in [Link::Logit, Link::Probit] {
                let w = link.weights_from_linear(t);
                prop_assert_eq!(w.w1 + w.w2, 1.0);
                prop_assert!(w.w0 > 0.0);
                prop_assert!(w.w1 > 0.0 && w.w1 < 1.0);
            }
            let w = Link::Logit.weights_from_linear(t);
            prop_assert_eq!(w.w0, w.w1 * w.w2);
        }
    }
}
