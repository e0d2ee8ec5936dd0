//! Experimental factors and their orthogonal effect codings.
//!
//! Two-level factors use the identity coding `{-1, +1}`. Three-level factors
//! (categorical or quantitative) share the orthogonal polynomial coding
//!
//! ```text
//! level   first / linear   second / quadratic
//!  -1       -sqrt(3/2)          sqrt(1/2)
//!   0            0              -sqrt(2)
//!  +1        sqrt(3/2)          sqrt(1/2)
//! ```
//!
//! so every factor's basis matrix (intercept column plus its effect columns)
//! has orthogonal columns of squared norm equal to the number of levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3_2: f64 = 1.224_744_871_391_589;
const SQRT_1_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Level label of a factor: `-1`, `0` or `+1`.
pub type Level = i8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    TwoLevel,
    ThreeLevelCategorical,
    ThreeLevelQuantitative,
}

impl FactorKind {
    pub fn levels(self) -> &'static [Level] {
        match self {
            FactorKind::TwoLevel => &[-1, 1],
            _ => &[-1, 0, 1],
        }
    }

    pub fn num_levels(self) -> usize {
        self.levels().len()
    }

    /// Number of effect columns contributed by the factor's main effect.
    pub fn num_columns(self) -> usize {
        self.num_levels() - 1
    }

    /// Position of `level` in [`FactorKind::levels`].
    pub fn level_index(self, level: Level) -> Option<usize> {
        self.levels().iter().position(|&l| l == level)
    }

    /// Value of basis column `column` (0 = constant) at `level`.
    pub fn basis_value(self, level: Level, column: usize) -> Result<f64> {
        let idx = self
            .level_index(level)
            .ok_or_else(|| Error::domain(format!("level {level} is not valid for a {self:?} factor")))?;
        if column > self.num_columns() {
            return Err(Error::domain(format!(
                "column {column} does not exist for a {self:?} factor"
            )));
        }
        Ok(basis_matrix(self)[idx][column])
    }
}

/// Rows are levels, columns are (constant, first, second) codings.
pub(crate) fn basis_matrix(kind: FactorKind) -> &'static [[f64; 3]] {
    const TWO: [[f64; 3]; 2] = [[1.0, -1.0, 0.0], [1.0, 1.0, 0.0]];
    const THREE: [[f64; 3]; 3] = [
        [1.0, -SQRT_3_2, SQRT_1_2],
        [1.0, 0.0, -SQRT_2],
        [1.0, SQRT_3_2, SQRT_1_2],
    ];
    match kind {
        FactorKind::TwoLevel => &TWO,
        _ => &THREE,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub kind: FactorKind,
}

impl FactorSpec {
    pub fn new(name: impl Into<String>, kind: FactorKind) -> Self {
        FactorSpec {
            name: name.into(),
            kind,
        }
    }

    pub fn two_level(name: impl Into<String>) -> Self {
        Self::new(name, FactorKind::TwoLevel)
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self::new(name, FactorKind::ThreeLevelCategorical)
    }

    pub fn quantitative(name: impl Into<String>) -> Self {
        Self::new(name, FactorKind::ThreeLevelQuantitative)
    }

    /// Suffix-qualified name of effect column `column` (1 or 2).
    pub fn column_name(&self, column: usize) -> String {
        match (self.kind, column) {
            (FactorKind::TwoLevel, _) => self.name.clone(),
            (FactorKind::ThreeLevelCategorical, c) => format!("{}.{c}", self.name),
            (FactorKind::ThreeLevelQuantitative, 1) => format!("{}.l", self.name),
            (FactorKind::ThreeLevelQuantitative, _) => format!("{}.q", self.name),
        }
    }
}

/// Coded effect values of one factor at one level: a single value for
/// two-level factors, the (first, second) comparison pair otherwise.
pub fn encode_effect_columns(factor: &FactorSpec, level: Level) -> Result<Vec<f64>> {
    let kind = factor.kind;
    (1..=kind.num_columns())
        .map(|c| kind.basis_value(level, c))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| {
            Error::domain(format!(
                "level {level} is not valid for factor `{}` ({kind:?})",
                factor.name
            ))
        })
}

/// Every level combination of `factors`, first factor varying fastest.
pub fn full_factorial_points(factors: &[FactorSpec]) -> Vec<Vec<Level>> {
    let total: usize = factors.iter().map(|f| f.kind.num_levels()).product();
    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let point = factors
            .iter()
            .map(|f| {
                let levels = f.kind.levels();
                let l = levels[idx % levels.len()];
                idx /= levels.len();
                l
            })
            .collect();
        points.push(point);
    }
    points
}
