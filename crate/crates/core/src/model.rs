//! Model effect lists, candidate sets and designs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::{full_factorial_points, FactorKind, FactorSpec, Level};
use crate::link::Link;

/// One coded column of a factor's main effect. `column` is 1 (first
/// comparison / linear) or 2 (second comparison / quadratic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub factor: usize,
    pub column: usize,
}

impl Column {
    pub fn new(factor: usize, column: usize) -> Self {
        Column { factor, column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Effect {
    Intercept,
    Main(Column),
    Interaction(Column, Column),
    /// Quadratic column of a three-level quantitative factor.
    Quadratic(usize),
}

impl Effect {
    /// Hierarchy order: 0 for the intercept, 1 for main-effect columns,
    /// 2 for interactions and quadratic columns.
    pub fn order(&self) -> usize {
        match self {
            Effect::Intercept => 0,
            Effect::Main(_) => 1,
            Effect::Interaction(..) | Effect::Quadratic(_) => 2,
        }
    }

    /// Per-factor basis column (0 = not involved) in the full Kronecker basis.
    pub fn basis(&self, factors: &[FactorSpec]) -> Result<Vec<usize>> {
        let mut basis = vec![0; factors.len()];
        let mut set = |c: Column, allow_quadratic: bool| -> Result<()> {
            let f = factors
                .get(c.factor)
                .ok_or_else(|| Error::domain(format!("effect references missing factor {}", c.factor)))?;
            if c.column == 0 || c.column > f.kind.num_columns() {
                return Err(Error::domain(format!(
                    "factor `{}` has no effect column {}",
                    f.name, c.column
                )));
            }
            if !allow_quadratic && f.kind == FactorKind::ThreeLevelQuantitative && c.column == 2 {
                return Err(Error::domain(format!(
                    "quadratic column of `{}` must be written as a Quadratic effect",
                    f.name
                )));
            }
            if basis[c.factor] != 0 {
                return Err(Error::domain(format!("interaction uses factor `{}` twice", f.name)));
            }
            basis[c.factor] = c.column;
            Ok(())
        };
        match *self {
            Effect::Intercept => {}
            Effect::Main(c) => set(c, false)?,
            Effect::Interaction(a, b) => {
                set(a, true)?;
                set(b, true)?;
            }
            Effect::Quadratic(f) => {
                let kind = factors
                    .get(f)
                    .ok_or_else(|| Error::domain(format!("effect references missing factor {f}")))?
                    .kind;
                if kind != FactorKind::ThreeLevelQuantitative {
                    return Err(Error::domain(format!(
                        "quadratic effect requires a three-level quantitative factor, `{}` is {kind:?}",
                        factors[f].name
                    )));
                }
                set(Column::new(f, 2), true)?;
            }
        }
        Ok(basis)
    }

    pub fn name(&self, factors: &[FactorSpec]) -> String {
        let col = |c: &Column| factors[c.factor].column_name(c.column);
        match self {
            Effect::Intercept => "intercept".to_string(),
            Effect::Main(c) => col(c),
            Effect::Interaction(a, b) => format!("{}*{}", col(a), col(b)),
            Effect::Quadratic(f) => factors[*f].column_name(2),
        }
    }

    /// Parses the names produced by [`Effect::name`].
    pub fn parse(name: &str, factors: &[FactorSpec]) -> Result<Effect> {
        let name = name.trim();
        if name.eq_ignore_ascii_case("intercept") || name == "1" {
            return Ok(Effect::Intercept);
        }
        let column = |s: &str| -> Result<Column> {
            let (base, suffix) = match s.rsplit_once('.') {
                Some((b, suf)) if factors.iter().any(|f| f.name == b) => (b, Some(suf)),
                _ => (s, None),
            };
            let factor = factors
                .iter()
                .position(|f| f.name == base)
                .ok_or_else(|| Error::domain(format!("unknown factor in effect `{s}`")))?;
            let col = match (factors[factor].kind, suffix) {
                (FactorKind::TwoLevel, None) => 1,
                (FactorKind::ThreeLevelCategorical, Some("1")) => 1,
                (FactorKind::ThreeLevelCategorical, Some("2")) => 2,
                (FactorKind::ThreeLevelQuantitative, Some("l")) => 1,
                (FactorKind::ThreeLevelQuantitative, Some("q")) => 2,
                _ => return Err(Error::domain(format!("bad effect column `{s}`"))),
            };
            Ok(Column::new(factor, col))
        };
        let parts: Vec<&str> = name.split('*').collect();
        let effect = match parts.as_slice() {
            [one] => {
                let c = column(one)?;
                if factors[c.factor].kind == FactorKind::ThreeLevelQuantitative && c.column == 2 {
                    Effect::Quadratic(c.factor)
                } else {
                    Effect::Main(c)
                }
            }
            [a, b] => Effect::Interaction(column(a)?, column(b)?),
            _ => return Err(Error::domain(format!("cannot parse effect `{name}`"))),
        };
        effect.basis(factors)?;
        Ok(effect)
    }
}

/// Ordered effect list defining `f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    factors: Vec<FactorSpec>,
    effects: Vec<Effect>,
    basis: Vec<Vec<usize>>,
}

impl ModelSpec {
    pub fn new(factors: Vec<FactorSpec>, effects: Vec<Effect>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::domain("model has no effects"));
        }
        let basis = effects.iter().map(|e| e.basis(&factors)).collect::<Result<Vec<_>>>()?;
        for (i, b) in basis.iter().enumerate() {
            if basis[..i].contains(b) {
                return Err(Error::domain(format!(
                    "effect `{}` listed twice",
                    effects[i].name(&factors)
                )));
            }
        }
        Ok(ModelSpec {
            factors,
            effects,
            basis,
        })
    }

    /// Intercept, all main-effect columns, two-factor interactions between
    /// the non-quadratic columns of distinct factors, and the quadratic
    /// columns of quantitative factors. Effects are listed in Kronecker
    /// (Yates) order with the first factor varying fastest.
    pub fn full_quadratic(factors: Vec<FactorSpec>) -> Result<Self> {
        let effects = Self::full_basis_effects(&factors)
            .into_iter()
            .filter(|e| match e {
                Effect::Intercept | Effect::Main(_) | Effect::Quadratic(_) => true,
                Effect::Interaction(a, b) => {
                    let quad =
                        |c: &Column| factors[c.factor].kind == FactorKind::ThreeLevelQuantitative && c.column == 2;
                    !quad(a) && !quad(b)
                }
            })
            .collect();
        Self::new(factors, effects)
    }

    /// Intercept plus main-effect columns (and quadratic columns).
    pub fn main_effects(factors: Vec<FactorSpec>) -> Result<Self> {
        let effects = Self::full_basis_effects(&factors)
            .into_iter()
            .filter(|e| e.order() < 2 || matches!(e, Effect::Quadratic(_)))
            .collect();
        Self::new(factors, effects)
    }

    /// Every effect expressible as intercept, main, quadratic or two-factor
    /// interaction, in Kronecker order.
    fn full_basis_effects(factors: &[FactorSpec]) -> Vec<Effect> {
        let radix: Vec<usize> = factors.iter().map(|f| f.kind.num_levels()).collect();
        let total: usize = radix.iter().product();
        let mut out = Vec::new();
        for mut idx in 0..total {
            let mut cols = Vec::new();
            for (j, r) in radix.iter().enumerate() {
                let c = idx % r;
                idx /= r;
                if c != 0 {
                    cols.push(Column::new(j, c));
                }
            }
            let effect = match cols.as_slice() {
                [] => Effect::Intercept,
                [c] if factors[c.factor].kind == FactorKind::ThreeLevelQuantitative && c.column == 2 => {
                    Effect::Quadratic(c.factor)
                }
                [c] => Effect::Main(*c),
                [a, b] => Effect::Interaction(*a, *b),
                _ => continue,
            };
            out.push(effect);
        }
        out
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// Per-effect Kronecker basis tuples.
    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn q(&self) -> usize {
        self.effects.len()
    }

    pub fn effect_names(&self) -> Vec<String> {
        self.effects.iter().map(|e| e.name(&self.factors)).collect()
    }

    pub fn expand(&self, point: &[Level]) -> Result<DVector<f64>> {
        expand_model(point, self)
    }
}

/// Effect vector `f(x)` of a point given as level labels.
pub fn expand_model(point: &[Level], model: &ModelSpec) -> Result<DVector<f64>> {
    if point.len() != model.factors.len() {
        return Err(Error::domain(format!(
            "point has {} levels but the model has {} factors",
            point.len(),
            model.factors.len()
        )));
    }
    let mut coded = Vec::with_capacity(point.len());
    for (f, &level) in model.factors.iter().zip(point) {
        let row: Vec<f64> = (0..=f.kind.num_columns())
            .map(|c| f.kind.basis_value(level, c))
            .collect::<Result<_>>()
            .map_err(|_| Error::domain(format!("level {level} is not valid for factor `{}`", f.name)))?;
        coded.push(row);
    }
    Ok(DVector::from_iterator(
        model.q(),
        model
            .basis
            .iter()
            .map(|b| b.iter().zip(&coded).map(|(&c, row)| row[c]).product()),
    ))
}

/// Candidate points with their effect-expanded model matrix.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    points: Vec<Vec<Level>>,
    fmatrix: DMatrix<f64>,
    rows: Vec<DVector<f64>>,
    factor_names: Vec<String>,
    effect_names: Vec<String>,
}

impl CandidateSet {
    /// Full factorial over the model's factors.
    pub fn full_factorial(model: &ModelSpec) -> Self {
        let points = full_factorial_points(&model.factors);
        Self::from_points(model, points).expect("factorial points are valid levels")
    }

    pub fn from_points(model: &ModelSpec, points: Vec<Vec<Level>>) -> Result<Self> {
        let rows = points
            .iter()
            .map(|p| expand_model(p, model))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(
            points,
            rows,
            model.factors.iter().map(|f| f.name.clone()).collect(),
            model.effect_names(),
        ))
    }

    /// Candidate set with an arbitrary, caller-supplied regression vector per
    /// point (e.g. raw polynomial terms of a numeric level).
    pub fn from_rows(
        points: Vec<Vec<Level>>,
        rows: Vec<Vec<f64>>,
        factor_names: Vec<String>,
        effect_names: Vec<String>,
    ) -> Result<Self> {
        if points.len() != rows.len() || points.is_empty() {
            return Err(Error::domain(
                "candidate points and rows must be non-empty and equal in number",
            ));
        }
        let q = effect_names.len();
        if rows.iter().any(|r| r.len() != q) || points.iter().any(|p| p.len() != factor_names.len()) {
            return Err(Error::domain("candidate row length does not match the effect list"));
        }
        let rows = rows.into_iter().map(DVector::from_vec).collect();
        Ok(Self::assemble(points, rows, factor_names, effect_names))
    }

    /// One numeric factor with regression vector `(1, x, x^2, ...)` up to
    /// `degree`, at the given levels.
    pub fn polynomial(levels: &[Level], degree: usize) -> Self {
        let rows = levels
            .iter()
            .map(|&l| (0..=degree).map(|d| f64::from(l).powi(d as i32)).collect())
            .collect();
        let names = (0..=degree)
            .map(|d| match d {
                0 => "intercept".to_string(),
                1 => "x".to_string(),
                d => format!("x^{d}"),
            })
            .collect();
        Self::from_rows(
            levels.iter().map(|&l| vec![l]).collect(),
            rows,
            vec!["x".to_string()],
            names,
        )
        .expect("polynomial rows are consistent")
    }

    fn assemble(
        points: Vec<Vec<Level>>,
        rows: Vec<DVector<f64>>,
        factor_names: Vec<String>,
        effect_names: Vec<String>,
    ) -> Self {
        let q = effect_names.len();
        let fmatrix = DMatrix::from_fn(rows.len(), q, |i, j| rows[i][j]);
        CandidateSet {
            points,
            fmatrix,
            rows,
            factor_names,
            effect_names,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn q(&self) -> usize {
        self.effect_names.len()
    }

    pub fn points(&self) -> &[Vec<Level>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Level] {
        &self.points[i]
    }

    /// `f(x_i)` as a column vector.
    pub fn row(&self, i: usize) -> &DVector<f64> {
        &self.rows[i]
    }

    pub fn fmatrix(&self) -> &DMatrix<f64> {
        &self.fmatrix
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn effect_names(&self) -> &[String] {
        &self.effect_names
    }

    /// Linear predictors `f(x_i)'eta` for every candidate.
    pub fn linear_predictors(&self, eta: &[f64]) -> Result<Vec<f64>> {
        if eta.len() != self.q() {
            return Err(Error::domain(format!(
                "eta has {} coefficients, model has {}",
                eta.len(),
                self.q()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(eta).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn probabilities(&self, eta: &[f64], link: Link) -> Result<Vec<f64>> {
        Ok(self
            .linear_predictors(eta)?
            .into_iter()
            .map(|t| link.prob_from_linear(t))
            .collect())
    }

    /// Index of the candidate with the given level labels.
    pub fn find(&self, point: &[Level]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == point)
    }

    /// Candidates at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<CandidateSet> {
        if indices.is_empty() {
            return Err(Error::domain("candidate subset is empty"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::domain(format!("candidate index {bad} out of range")));
        }
        Ok(Self::assemble(
            indices.iter().map(|&i| self.points[i].clone()).collect(),
            indices.iter().map(|&i| self.rows[i].clone()).collect(),
            self.factor_names.clone(),
            self.effect_names.clone(),
        ))
    }
}

/// An exact design: an ordered multiset of candidate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Design {
    indices: Vec<usize>,
}

impl Design {
    pub fn new(indices: Vec<usize>) -> Self {
        Design { indices }
    }

    /// Design with `counts[i]` replicates of candidate `i`, in candidate order.
    pub fn from_counts(counts: &[usize]) -> Self {
        let indices = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
            .collect();
        Design { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Replication count of every candidate among `num_candidates`.
    pub fn counts(&self, num_candidates: usize) -> Vec<usize> {
        let mut counts = vec![0; num_candidates];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }

    /// Number of distinct points `m`.
    pub fn distinct(&self) -> usize {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// Distinct candidate indices in ascending order.
    pub fn support(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn validate(&self, candidates: &CandidateSet) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= candidates.len()) {
            Some(i) => Err(Error::domain(format!(
                "design index {i} outside candidate set of size {}",
                candidates.len()
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn indices_mut(&mut self) -> &mut Vec<usize> {
        &mut self.indices
    }

    /// Concatenation of two designs.
    pub fn concat(&self, other: &Design) -> Design {
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        Design { indices }
    }

    /// Model matrix `F` of the design (one row per run).
    pub fn model_matrix(&self, candidates: &CandidateSet) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), candidates.q(), |r, c| {
            candidates.fmatrix[(self.indices[r], c)]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn artificial() -> Vec<FactorSpec> {
        vec![
            FactorSpec::two_level("x1"),
            FactorSpec::two_level("x2"),
            FactorSpec::two_level("x3"),
            FactorSpec::categorical("x4"),
            FactorSpec::quantitative("x5"),
        ]
    }

    #[test]
    fn interaction_model_expansion() {
        let fs = vec![FactorSpec::two_level("x1"), FactorSpec::two_level("x2")];
        let m = ModelSpec::new(
            fs,
            vec![
                Effect::Intercept,
                Effect::Main(Column::new(0, 1)),
                Effect::Main(Column::new(1, 1)),
                Effect::Interaction(Column::new(0, 1), Column::new(1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(m.expand(&[1, 1]).unwrap().as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.expand(&[-1, 1]).unwrap().as_slice(), &[1.0, -1.0, 1.0, -1.0]);
        assert!(m.expand(&[1]).is_err());
        assert!(m.expand(&[1, 0]).is_err());
    }

    #[test]
    fn quantitative_middle_level() {
        let m = ModelSpec::new(
            vec![FactorSpec::quantitative("x")],
            vec![Effect::Intercept, Effect::Main(Column::new(0, 1)), Effect::Quadratic(0)],
        )
        .unwrap();
        let f = m.expand(&[0]).unwrap();
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 0.0);
        assert!((f[2] + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn missing_factor_is_domain_error() {
        let fs = vec![FactorSpec::two_level("x1")];
        assert!(ModelSpec::new(fs.clone(), vec![Effect::Main(Column::new(3, 1))]).is_err());
        assert!(ModelSpec::new(fs.clone(), vec![Effect::Quadratic(0)]).is_err());
        assert!(ModelSpec::new(fs, vec![Effect::Interaction(Column::new(0, 1), Column::new(0, 1))]).is_err());
    }

    #[test]
    fn full_quadratic_artificial_has_22_effects_in_table_order() {
        let m = ModelSpec::full_quadratic(artificial()).unwrap();
        assert_eq!(m.q(), 22);
        let names = m.effect_names();
        let expected = [
            "intercept",
            "x1",
            "x2",
            "x1*x2",
            "x3",
            "x1*x3",
            "x2*x3",
            "x4.1",
            "x1*x4.1",
            "x2*x4.1",
            "x3*x4.1",
            "x4.2",
            "x1*x4.2",
            "x2*x4.2",
            "x3*x4.2",
            "x5.l",
            "x1*x5.l",
            "x2*x5.l",
            "x3*x5.l",
            "x4.1*x5.l",
            "x4.2*x5.l",
            "x5.q",
        ];
        assert_eq!(names, expected);
        for n in &names {
            assert_eq!(Effect::parse(n, m.factors()).unwrap().name(m.factors()), *n);
        }
    }

    #[test]
    fn full_quadratic_five_quantitative_has_21() {
        let fs = (1..=5).map(|i| FactorSpec::quantitative(format!("x{i}"))).collect();
        assert_eq!(ModelSpec::full_quadratic(fs).unwrap().q(), 21);
    }

    #[test]
    fn full_basis_columns_orthogonal() {
        // Every column of the 2 x 3 x 3 Kronecker basis, evaluated over the
        // full factorial, gives a diagonal F'F.
        let fs = vec![
            FactorSpec::two_level("a"),
            FactorSpec::categorical("b"),
            FactorSpec::quantitative("c"),
        ];
        let mut effects = ModelSpec::full_basis_effects(&fs);
        effects.retain(|e| e.basis(&fs).is_ok());
        let m = ModelSpec::new(fs, effects).unwrap();
        let c = CandidateSet::full_factorial(&m);
        let ftf = c.fmatrix().transpose() * c.fmatrix();
        for i in 0..ftf.nrows() {
            for j in 0..ftf.ncols() {
                if i != j {
                    assert!(ftf[(i, j)].abs() < 1e-10);
                } else {
                    assert!((ftf[(i, i)] - 18.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn design_counts_roundtrip() {
        let d = Design::from_counts(&[2, 0, 1]);
        assert_eq!(d.indices(), &[0, 0, 2]);
        assert_eq!(d.counts(3), vec![2, 0, 1]);
        assert_eq!(d.distinct(), 2);
    }
}
