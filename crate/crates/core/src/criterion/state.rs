//! Incremental criterion state for point-exchange search.
//!
//! The state keeps `M_j = (F'W_jF + ridge_j)^-1` and `log det M_j^-1` for every
//! channel. With `v_j(x, y) = f(x)'M_j f(y)` and channel weights `w`:
//!
//! * deleting run `i` changes channel `j` by the factor `1 - w(x_i) v_j(x_i)`;
//! * replacing run `x_i` by candidate `x` changes it by
//!   `(1 + w(x) v_j(x)) (1 - w(x_i) v_j(x_i)) + w(x) w(x_i) v_j(x, x_i)^2`.
//!
//! An exchange is applied to `M_j` as a rank-one update with `x` followed by a
//! rank-one downdate with `x_i`. Inverses are rebuilt from scratch every
//! `refresh_every` exchanges to bound drift.

use nalgebra::{DMatrix, DVector};

use super::Evaluator;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Design;

pub const DEFAULT_REFRESH_EVERY: usize = 32;

/// Determinant ratios at or below this are treated as singular.
pub const SINGULAR_RATIO_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CriterionState<'e, 'c> {
    eval: &'e Evaluator<'c>,
    design: Design,
    inverses: Vec<DMatrix<f64>>,
    logdets: Vec<f64>,
    exchanges_since_refresh: usize,
    refresh_every: usize,
}

impl<'e, 'c> CriterionState<'e, 'c> {
    pub fn new(eval: &'e Evaluator<'c>, design: Design) -> Result<Self> {
        design.validate(eval.candidates())?;
        let mut state = CriterionState {
            eval,
            design,
            inverses: Vec::new(),
            logdets: Vec::new(),
            exchanges_since_refresh: 0,
            refresh_every: DEFAULT_REFRESH_EVERY,
        };
        state.refresh()?;
        Ok(state)
    }

    pub fn with_refresh_every(mut self, k: usize) -> Self {
        self.refresh_every = k.max(1);
        self
    }

    /// Recomputes inverses and log-determinants from scratch.
    pub fn refresh(&mut self) -> Result<()> {
        let mut inverses = Vec::with_capacity(self.eval.channels().len());
        let mut logdets = Vec::with_capacity(self.eval.channels().len());
        for (ch, c) in self.eval.channels().iter().enumerate() {
            let info = self.eval.information(&self.design, ch);
            let (ld, inv) = linalg::spd_logdet_inverse(&info).ok_or(Error::SingularDesign(c.matrix))?;
            inverses.push(inv);
            logdets.push(ld);
        }
        self.inverses = inverses;
        self.logdets = logdets;
        self.exchanges_since_refresh = 0;
        Ok(())
    }

    pub fn evaluator(&self) -> &'e Evaluator<'c> {
        self.eval
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn into_design(self) -> Design {
        self.design
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    /// Current criterion value.
    pub fn q(&self) -> f64 {
        self.eval.combine(&self.logdets)
    }

    pub fn logdets(&self) -> &[f64] {
        &self.logdets
    }

    pub fn inverse(&self, ch: usize) -> &DMatrix<f64> {
        &self.inverses[ch]
    }

    pub fn exchanges_since_refresh(&self) -> usize {
        self.exchanges_since_refresh
    }

    fn row(&self, cand: usize) -> &DVector<f64> {
        self.eval.candidates().row(cand)
    }

    /// Weighted leverage `w_j(x_i) v_j(x_i)` of run `i` in channel `ch`.
    pub fn leverage(&self, i: usize, ch: usize) -> f64 {
        let x = self.design.indices()[i];
        let f = self.row(x);
        self.eval.channels()[ch].weights[x] * linalg::quad_form(&self.inverses[ch], f, f)
    }

    /// `Q(X) - Q(X_-i)`; `+inf` when removing run `i` makes a matrix singular.
    pub fn deletion_value(&self, i: usize) -> f64 {
        let mut d = 0.0;
        for (ch, c) in self.eval.channels().iter().enumerate() {
            let bracket = 1.0 - self.leverage(i, ch);
            if bracket <= SINGULAR_RATIO_TOL {
                return f64::INFINITY;
            }
            d -= c.coef * bracket.ln();
        }
        d
    }

    pub fn deletion_values(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.deletion_value(i)).collect()
    }

    /// `Q(X*) - Q(X)` when candidate `cand` replaces run `i`; `-inf` when the
    /// exchange would make a matrix singular.
    pub fn exchange_delta(&self, cand: usize, i: usize) -> f64 {
        let xi = self.design.indices()[i];
        if cand == xi {
            return 0.0;
        }
        let (f, g) = (self.row(cand), self.row(xi));
        let mut delta = 0.0;
        for (ch, c) in self.eval.channels().iter().enumerate() {
            let m = &self.inverses[ch];
            let mg = m * g;
            let vx = linalg::quad_form(m, f, f);
            let vi = g.dot(&mg);
            let vxi = f.dot(&mg);
            let ratio = exchange_ratio(c.weights[cand], vx, c.weights[xi], vi, vxi);
            if ratio <= SINGULAR_RATIO_TOL {
                return f64::NEG_INFINITY;
            }
            delta += c.coef * ratio.ln();
        }
        delta
    }

    /// [`exchange_delta`](Self::exchange_delta) for every candidate in `cands`
    /// against run `i`, sharing the work that depends only on `x_i`.
    pub fn exchange_deltas(&self, i: usize, cands: &[usize]) -> Vec<f64> {
        let xi = self.design.indices()[i];
        let g = self.row(xi);
        let fm = self.eval.candidates().fmatrix();
        let mut out = vec![0.0; cands.len()];
        let mut feasible = vec![true; cands.len()];
        for (ch, c) in self.eval.channels().iter().enumerate() {
            let m = &self.inverses[ch];
            let mg = m * g;
            let vi = g.dot(&mg);
            let wi = c.weights[xi];
            // Row k of F M dotted with row k of F is v(x_k).
            let v_all = fm.component_mul(&(fm * m)).column_sum();
            let vxi_all = fm * &mg;
            for (k, &cand) in cands.iter().enumerate() {
                if !feasible[k] || cand == xi {
                    continue;
                }
                let ratio = exchange_ratio(c.weights[cand], v_all[cand], wi, vi, vxi_all[cand]);
                if ratio <= SINGULAR_RATIO_TOL {
                    feasible[k] = false;
                    out[k] = f64::NEG_INFINITY;
                } else {
                    out[k] += c.coef * ratio.ln();
                }
            }
        }
        out
    }

    /// Replaces run `i` by candidate `cand`, updating inverses in place.
    pub fn apply_exchange(&mut self, cand: usize, i: usize) -> Result<()> {
        if cand >= self.eval.candidates().len() {
            return Err(Error::domain(format!("candidate {cand} out of range")));
        }
        let xi = self.design.indices()[i];
        if cand == xi {
            return Ok(());
        }
        self.design.indices_mut()[i] = cand;
        self.exchanges_since_refresh += 1;
        let mut broken = false;
        for ch in 0..self.inverses.len() {
            let (a, b) = {
                let w = &self.eval.channels()[ch].weights;
                (w[cand], w[xi])
            };
            let f = self.eval.candidates().row(cand);
            let g = self.eval.candidates().row(xi);
            let m = &mut self.inverses[ch];
            let up = linalg::sherman_morrison(m, f, a);
            let down = linalg::sherman_morrison(m, g, -b);
            if up <= 0.0 || down <= SINGULAR_RATIO_TOL {
                broken = true;
                break;
            }
            self.logdets[ch] += up.ln() + down.ln();
        }
        if broken || self.exchanges_since_refresh >= self.refresh_every {
            if let Err(e) = self.refresh() {
                self.design.indices_mut()[i] = xi;
                self.refresh()?;
                return Err(e);
            }
        }
        Ok(())
    }

    /// Removes run `i` (later runs shift down by one).
    pub fn remove_point(&mut self, i: usize) -> Result<()> {
        let x = self.design.indices()[i];
        for (ch, c) in self.eval.channels().iter().enumerate() {
            if 1.0 - self.leverage(i, ch) <= SINGULAR_RATIO_TOL {
                return Err(Error::SingularDesign(c.matrix));
            }
        }
        let f = self.eval.candidates().row(x);
        for ch in 0..self.inverses.len() {
            let w = self.eval.channels()[ch].weights[x];
            let ratio = linalg::sherman_morrison(&mut self.inverses[ch], f, -w);
            self.logdets[ch] += ratio.ln();
        }
        self.design.indices_mut().remove(i);
        Ok(())
    }

    /// Appends a run at candidate `cand`.
    pub fn add_point(&mut self, cand: usize) -> Result<()> {
        if cand >= self.eval.candidates().len() {
            return Err(Error::domain(format!("candidate {cand} out of range")));
        }
        let f = self.eval.candidates().row(cand);
        for ch in 0..self.inverses.len() {
            let w = self.eval.channels()[ch].weights[cand];
            let ratio = linalg::sherman_morrison(&mut self.inverses[ch], f, w);
            self.logdets[ch] += ratio.ln();
        }
        self.design.indices_mut().push(cand);
        Ok(())
    }
}

/// Determinant ratio of a single-channel exchange.
fn exchange_ratio(a: f64, vx: f64, b: f64, vi: f64, vxi: f64) -> f64 {
    (1.0 + a * vx) * (1.0 - b * vi) + a * b * vxi * vxi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::{CriterionConfig, Objective};
    use crate::link::Link;
    use crate::model::CandidateSet;

    fn setup() -> CandidateSet {
        CandidateSet::polynomial(&[-1, 0, 1], 2)
    }

    #[test]
    fn saturated_design_all_indispensable() {
        let c = setup();
        let ev = Evaluator::new(
            &c,
            &[0.2, 0.5, -0.3],
            &Objective::Qq(CriterionConfig::noninformative(3, Link::Logit)),
        )
        .unwrap();
        let st = ev.state(Design::new(vec![0, 1, 2])).unwrap();
        for i in 0..3 {
            assert!((st.leverage(i, 0) - 1.0).abs() < 1e-12);
            assert_eq!(st.deletion_value(i), f64::INFINITY);
        }
        assert!((st.q() - ev.q_value(st.design()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn replicated_point_deletions_equal() {
        let c = setup();
        let ev = Evaluator::new(
            &c,
            &[0.2, 0.5, -0.3],
            &Objective::Qq(CriterionConfig::noninformative(3, Link::Logit)),
        )
        .unwrap();
        let st = ev.state(Design::new(vec![0, 1, 2, 1])).unwrap();
        let (a, b) = (st.deletion_value(1), st.deletion_value(3));
        assert!(a.is_finite());
        assert!((a - b).abs() < 1e-12);
        assert_eq!(st.deletion_value(0), f64::INFINITY);
    }

    #[test]
    fn self_exchange_is_exactly_zero() {
        let c = setup();
        let ev = Evaluator::new(&c, &[0.1, 0.1, 0.1], &Objective::LinearD).unwrap();
        let mut st = ev.state(Design::new(vec![0, 1, 2, 2])).unwrap();
        assert_eq!(st.exchange_delta(2, 3), 0.0);
        let before = st.inverse(0).clone();
        st.apply_exchange(2, 3).unwrap();
        assert_eq!(st.inverse(0), &before);
    }

    #[test]
    fn exchange_removing_only_middle_point_is_infeasible() {
        let c = setup();
        let ev = Evaluator::new(
            &c,
            &[0.0, 0.4, 0.1],
            &Objective::Qq(CriterionConfig::noninformative(3, Link::Logit)),
        )
        .unwrap();
        let st = ev.state(Design::new(vec![0, 0, 1, 2, 2])).unwrap();
        assert_eq!(st.exchange_delta(0, 2), f64::NEG_INFINITY);
        assert_eq!(st.exchange_deltas(2, &[0, 1, 2])[0], f64::NEG_INFINITY);
    }

    #[test]
    fn remove_to_rank_limit() {
        let c = setup();
        let ev = Evaluator::new(&c, &[0.0; 3], &Objective::LinearD).unwrap();
        let mut st = ev.state(Design::new(vec![0, 1, 2, 0, 1])).unwrap();
        st.remove_point(3).unwrap();
        st.remove_point(3).unwrap();
        assert_eq!(st.n(), 3);
        assert!(st.remove_point(0).is_err());
        assert_eq!(st.n(), 3);
    }
}
