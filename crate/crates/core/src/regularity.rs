//! Replication and run-size bounds that keep the conditional information
//! matrices nonsingular with high probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ceiling that ignores round-off just above an integer.
fn ceil_tol(x: f64) -> u64 {
    (x - 1e-9).ceil().max(0.0) as u64
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("{what} = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Per-point replication bounds for a saturated design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointBounds {
    pub sufficient: Vec<u64>,
    pub necessary: Vec<u64>,
}

/// Replication bounds at each point so that both outcomes are observed with
/// probability at least `kappa`.
pub fn prop1_bounds(pis: &[f64], kappa: f64) -> Result<PointBounds> {
    check_prob(kappa, "kappa")?;
    let mut sufficient = Vec::with_capacity(pis.len());
    let mut necessary = Vec::with_capacity(pis.len());
    for &p in pis {
        check_prob(p, "success probability")?;
        let big = p.max(1.0 - p);
        sufficient.push(1 + ceil_tol((1.0 - kappa).ln() / big.ln()));
        let nec = 2.0 * ((1.0 - kappa) / 2.0).ln() / (p.ln() + (1.0 - p).ln());
        necessary.push(ceil_tol(nec).max(1));
    }
    Ok(PointBounds { sufficient, necessary })
}

/// Minimum replication `n0` and total run size for a design with `m > q`
/// distinct points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSizeBounds {
    pub n0_sufficient: u64,
    pub n_sufficient: u64,
    pub n0_necessary: u64,
    pub n_necessary: u64,
}

pub fn prop2_bounds(m: usize, q: usize, pi_min: f64, pi_max: f64) -> Result<RunSizeBounds> {
    if q == 0 || m <= q {
        return Err(Error::domain(format!(
            "run-size bounds need m > q >= 1 (got m = {m}, q = {q})"
        )));
    }
    check_prob(pi_min, "pi_min")?;
    check_prob(pi_max, "pi_max")?;
    if pi_min > pi_max {
        return Err(Error::domain(format!("pi_min = {pi_min} exceeds pi_max = {pi_max}")));
    }
    let t = (1.0 - q as f64 / m as f64).ln();
    let suff = 1f64.max(t / (1.0 - pi_min).ln()).max(t / pi_max.ln());
    let nec = 1f64.max(t / (1.0 - pi_max).ln()).max(t / pi_min.ln());
    let n0_sufficient = ceil_tol(suff);
    let n0_necessary = ceil_tol(nec);
    Ok(RunSizeBounds {
        n0_sufficient,
        n_sufficient: m as u64 * n0_sufficient,
        n0_necessary,
        n_necessary: m as u64 * n0_necessary,
    })
}

/// Both sets of bounds for a design's distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub kappa: f64,
    pub pis: Vec<f64>,
    pub per_point_sufficient: Vec<u64>,
    pub per_point_necessary: Vec<u64>,
    /// Absent when there are no more distinct points than parameters.
    pub run_size: Option<RunSizeBounds>,
}

impl BoundsReport {
    /// `pis` are the success probabilities of the distinct design points.
    pub fn new(pis: &[f64], q: usize, kappa: f64) -> Result<Self> {
        let p1 = prop1_bounds(pis, kappa)?;
        let run_size = if pis.len() > q {
            let lo = pis.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = pis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some(prop2_bounds(pis.len(), q, lo, hi)?)
        } else {
            None
        };
        Ok(BoundsReport {
            kappa,
            pis: pis.to_vec(),
            per_point_sufficient: p1.sufficient,
            per_point_necessary: p1.necessary,
            run_size,
        })
    }
}
