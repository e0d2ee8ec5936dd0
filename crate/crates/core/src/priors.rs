//! Prior correlation matrices for the linear-model coefficients and samplers
//! for the logistic coefficients `eta`.
//!
//! The correlation of the coefficients of the full Kronecker effect basis is
//!
//! ```text
//! R = c^-1 * kron_j F_j^-1 Psi_j F_j^-T
//! ```
//!
//! where `F_j` is factor `j`'s coding matrix (levels x basis columns), `Psi_j`
//! its level correlation (`zeta` off-diagonal for two-level and categorical
//! factors, a Gaussian `zeta, zeta^4` pattern for quantitative factors) and
//! `c` rescales the intercept entry to one. `zeta = (1 - r) / (1 + r)`.
//! Because `R` is a Kronecker product, the entry for two effects is the product
//! of the per-factor entries selected by their basis tuples, so the model's
//! submatrix is built directly without materialising the full basis.

use nalgebra::{DMatrix, Matrix2, Matrix3};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::factors::{basis_matrix, FactorKind};
use crate::linalg;
use crate::model::ModelSpec;

/// Default hierarchy decay rate.
pub const DEFAULT_DECAY: f64 = 1.0 / 3.0;

/// Largest full Kronecker basis [`full_kronecker_correlation`] will build.
pub const MAX_FULL_BASIS: usize = 1 << 12;

pub fn zeta(r: f64) -> f64 {
    (1.0 - r) / (1.0 + r)
}

/// Symmetric positive-definite prior correlation aligned with a model's
/// effect order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::domain("correlation matrix must be square"));
        }
        if linalg::cholesky(&m).is_none() {
            return Err(Error::domain("correlation matrix is not positive definite"));
        }
        Ok(CorrelationMatrix(linalg::symmetrize(m)))
    }

    pub fn identity(q: usize) -> Self {
        CorrelationMatrix(DMatrix::identity(q, q))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let l = linalg::cholesky(&self.0).expect("validated positive definite on construction");
        linalg::inverse_from_cholesky(&l)
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Per-factor coefficient correlation `F^-1 Psi F^-T`, scaled so the
/// constant column has unit variance.
fn factor_block(kind: FactorKind, zeta: f64) -> DMatrix<f64> {
    let k = raw_factor_block(kind, zeta);
    let c = k[(0, 0)];
    k / c
}

fn raw_factor_block(kind: FactorKind, zeta: f64) -> DMatrix<f64> {
    let b = basis_matrix(kind);
    match kind {
        FactorKind::TwoLevel => {
            let f = Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]);
            let psi = Matrix2::new(1.0, zeta, zeta, 1.0);
            let fi = f.try_inverse().expect("two-level coding is invertible");
            let k = fi * psi * fi.transpose();
            DMatrix::from_fn(2, 2, |i, j| k[(i, j)])
        }
        _ => {
            let f = Matrix3::from_fn(|i, j| b[i][j]);
            let z4 = zeta.powi(4);
            let psi = if kind == FactorKind::ThreeLevelCategorical {
                Matrix3::new(1.0, zeta, zeta, zeta, 1.0, zeta, zeta, zeta, 1.0)
            } else {
                Matrix3::new(1.0, zeta, z4, zeta, 1.0, zeta, z4, zeta, 1.0)
            };
            let fi = f.try_inverse().expect("three-level coding is invertible");
            let k = fi * psi * fi.transpose();
            DMatrix::from_fn(3, 3, |i, j| k[(i, j)])
        }
    }
}

fn check_decay(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("decay rate r = {r} must lie in (0, 1]")));
    }
    Ok(())
}

/// Prior correlation of the model's coefficients for hierarchy decay `r`.
pub fn correlation_matrix(model: &ModelSpec, r: f64) -> Result<CorrelationMatrix> {
    check_decay(r)?;
    let z = zeta(r);
    let blocks: Vec<DMatrix<f64>> = model.factors().iter().map(|f| factor_block(f.kind, z)).collect();
    let basis = model.basis();
    let q = model.q();
    let m = DMatrix::from_fn(q, q, |a, b| {
        blocks
            .iter()
            .enumerate()
            .map(|(j, k)| k[(basis[a][j], basis[b][j])])
            .product::<f64>()
    });
    CorrelationMatrix::new(m)
}

/// Full-basis Kronecker correlation (all `prod_j levels_j` effects, first
/// factor varying fastest) followed by selection of the model's rows and
/// columns. Exponential in the number of factors; used as a cross-check of
/// [`correlation_matrix`].
pub fn full_kronecker_correlation(model: &ModelSpec, r: f64) -> Result<CorrelationMatrix> {
    check_decay(r)?;
    let factors = model.factors();
    let dim: usize = factors.iter().map(|f| f.kind.num_levels()).product();
    if dim > MAX_FULL_BASIS {
        return Err(Error::domain(format!(
            "full Kronecker basis of dimension {dim} exceeds the cap of {MAX_FULL_BASIS}"
        )));
    }
    let z = zeta(r);
    // kron(A, B) puts A's index in the slow position, so the last factor goes first.
    let mut full = DMatrix::<f64>::from_element(1, 1, 1.0);
    for f in factors.iter().rev() {
        full = full.kronecker(&factor_block(f.kind, z));
    }
    let radix: Vec<usize> = factors.iter().map(|f| f.kind.num_levels()).collect();
    let index: Vec<usize> = model
        .basis()
        .iter()
        .map(|b| {
            let mut idx = 0;
            let mut stride = 1;
            for (c, r) in b.iter().zip(&radix) {
                idx += c * stride;
                stride *= r;
            }
            idx
        })
        .collect();
    let q = index.len();
    CorrelationMatrix::new(DMatrix::from_fn(q, q, |a, b| full[(index[a], index[b])]))
}

/// Prior description for `eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaPrior {
    /// Independent uniforms on a box; `lower == upper` fixes a coordinate.
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
    /// `eta ~ N(0, tau0_sq * diag(r0_diag))`.
    NormalDiag { tau0_sq: f64, r0_diag: Vec<f64> },
}

impl EtaPrior {
    pub fn dim(&self) -> usize {
        match self {
            EtaPrior::UniformBox { lower, .. } => lower.len(),
            EtaPrior::NormalDiag { r0_diag, .. } => r0_diag.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EtaPrior::UniformBox { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(Error::domain("box bounds must be non-empty and of equal length"));
                }
                for (k, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if !l.is_finite() || !u.is_finite() {
                        return Err(Error::domain(format!("box bound {k} is not finite")));
                    }
                    if l > u {
                        return Err(Error::domain(format!(
                            "box lower bound {l} exceeds upper bound {u} in coordinate {k}"
                        )));
                    }
                }
            }
            EtaPrior::NormalDiag { tau0_sq, r0_diag } => {
                if !(*tau0_sq > 0.0) || r0_diag.is_empty() || r0_diag.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::domain("normal prior needs tau0_sq > 0 and positive diagonal"));
                }
            }
        }
        Ok(())
    }

    /// Maps a point of the unit cube through the marginal quantiles.
    fn transform(&self, u: &[f64]) -> Vec<f64> {
        match self {
            EtaPrior::UniformBox { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(u, (l, h))| l + u * (h - l))
                .collect(),
            EtaPrior::NormalDiag { tau0_sq, r0_diag } => {
                let n = Normal::standard();
                u.iter()
                    .zip(r0_diag)
                    .map(|(u, r)| (tau0_sq * r).sqrt() * n.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12)))
                    .collect()
            }
        }
    }

    /// Hierarchy-shaped box: one interval for the intercept, one for
    /// first-order effects, one for second-order effects.
    pub fn hierarchical_box(
        model: &ModelSpec,
        intercept: (f64, f64),
        first_order: (f64, f64),
        second_order: (f64, f64),
    ) -> EtaPrior {
        let (lower, upper) = model
            .effects()
            .iter()
            .map(|e| match e.order() {
                0 => intercept,
                1 => first_order,
                _ => second_order,
            })
            .unzip();
        EtaPrior::UniformBox { lower, upper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    IidUniform,
    MaximinLhs,
}

/// Tuning of the maximin Latin hypercube search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhsConfig {
    pub restarts: usize,
    /// Coordinate-swap proposals per restart, as a multiple of the sample count.
    pub swaps_per_point: usize,
    /// Exponent of the Morris-Mitchell surrogate guiding the swaps.
    pub phi_power: i32,
}

impl Default for LhsConfig {
    fn default() -> Self {
        LhsConfig {
            restarts: 20,
            swaps_per_point: 50,
            phi_power: 20,
        }
    }
}

/// Draws `count` coefficient vectors from `prior`.
pub fn sample_eta<R: Rng + ?Sized>(
    prior: &EtaPrior,
    count: usize,
    strategy: SamplingStrategy,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    sample_eta_with(prior, count, strategy, LhsConfig::default(), rng)
}

pub fn sample_eta_with<R: Rng + ?Sized>(
    prior: &EtaPrior,
    count: usize,
    strategy: SamplingStrategy,
    lhs: LhsConfig,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    prior.validate()?;
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let d = prior.dim();
    let unit = match (strategy, prior) {
        (SamplingStrategy::MaximinLhs, _) => maximin_lhs(count, d, lhs, rng),
        (SamplingStrategy::IidUniform, EtaPrior::NormalDiag { tau0_sq, r0_diag }) => {
            return Ok((0..count)
                .map(|_| {
                    r0_diag
                        .iter()
                        .map(|r| {
                            let z: f64 = StandardNormal.sample(rng);
                            (tau0_sq * r).sqrt() * z
                        })
                        .collect()
                })
                .collect())
        }
        (SamplingStrategy::IidUniform, _) => (0..count)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect(),
    };
    Ok(unit.iter().map(|u| prior.transform(u)).collect())
}

fn random_lhs<R: Rng + ?Sized>(count: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; count];
    let mut perm: Vec<usize> = (0..count).collect();
    for k in 0..d {
        perm.shuffle(rng);
        for (i, p) in pts.iter_mut().enumerate() {
            p[k] = (perm[i] as f64 + rng.random::<f64>()) / count as f64;
        }
    }
    pts
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Smallest pairwise Euclidean distance of a point set.
pub fn min_pairwise_distance(pts: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.min(sq_dist(&pts[i], &pts[j]));
        }
    }
    best.sqrt()
}

/// Maximin Latin hypercube in the unit cube: random restarts, each improved by
/// coordinate swaps between points that lower the Morris-Mitchell `phi_p`
/// criterion (a smooth surrogate of the minimum distance). The restart with
/// the largest minimum distance wins.
pub fn maximin_lhs<R: Rng + ?Sized>(count: usize, d: usize, cfg: LhsConfig, rng: &mut R) -> Vec<Vec<f64>> {
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let mut pts = random_lhs(count, d, rng);
        if count > 2 && d > 0 {
            improve_lhs(&mut pts, cfg, rng);
        }
        let score = min_pairwise_distance(&pts);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, pts));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

fn improve_lhs<R: Rng + ?Sized>(pts: &mut [Vec<f64>], cfg: LhsConfig, rng: &mut R) {
    let n = pts.len();
    let d = pts[0].len();
    let p = cfg.phi_power;
    let mut dist2 = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(&pts[i], &pts[j]).max(1e-300);
            dist2[i * n + j] = v;
            dist2[j * n + i] = v;
        }
    }
    let term = |d2: f64| d2.powi(-p).sqrt();
    let mut new_a = vec![0.0; n];
    let mut new_b = vec![0.0; n];
    for _ in 0..cfg.swaps_per_point * n {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let k = rng.random_range(0..d);
        let (xa, xb) = (pts[a][k], pts[b][k]);
        let mut delta = 0.0;
        for c in 0..n {
            if c == a || c == b {
                continue;
            }
            let xc = pts[c][k];
            let da = (dist2[a * n + c] - (xa - xc).powi(2) + (xb - xc).powi(2)).max(1e-300);
            let db = (dist2[b * n + c] - (xb - xc).powi(2) + (xa - xc).powi(2)).max(1e-300);
            delta += term(da) + term(db) - term(dist2[a * n + c]) - term(dist2[b * n + c]);
            new_a[c] = da;
            new_b[c] = db;
        }
        if delta < 0.0 {
            pts[a][k] = xb;
            pts[b][k] = xa;
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                dist2[a * n + c] = new_a[c];
                dist2[c * n + a] = new_a[c];
                dist2[b * n + c] = new_b[c];
                dist2[c * n + b] = new_b[c];
            }
        }
    }
}
