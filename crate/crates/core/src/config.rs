//! JSON experiment configuration.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::criterion::{CriterionConfig, Objective};
use crate::error::{Error, Result};
use crate::factors::FactorSpec;
use crate::io;
use crate::link::Link;
use crate::model::{CandidateSet, Effect, ModelSpec};
use crate::priors::{correlation_matrix, sample_eta, EtaPrior, SamplingStrategy, DEFAULT_DECAY};
use crate::search::{SearchConfig, DEFAULT_PI_FILTER};

/// Which effects the model contains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelDescriptor {
    /// `"full-quadratic"` or `"main-effects"`.
    Shorthand(String),
    /// Effect names such as `"intercept"`, `"x1"`, `"x1*x4.2"`, `"x5.q"`.
    Effects(Vec<String>),
}

impl Default for ModelDescriptor {
    fn default() -> Self {
        ModelDescriptor::Shorthand("full-quadratic".into())
    }
}

fn default_decay() -> f64 {
    DEFAULT_DECAY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    #[serde(default)]
    pub link: Link,
    #[serde(default)]
    pub rho: f64,
    /// Hierarchy decay rate of the prior correlation given `Z = 1`.
    #[serde(default = "default_decay")]
    pub r1: f64,
    /// Hierarchy decay rate of the prior correlation given `Z = 0`.
    #[serde(default = "default_decay")]
    pub r2: f64,
    /// Weight of a normal prior on `eta`.
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
}

impl Default for CriterionSection {
    fn default() -> Self {
        CriterionSection {
            link: Link::Logit,
            rho: 0.0,
            r1: DEFAULT_DECAY,
            r2: DEFAULT_DECAY,
            rho0: None,
            r0: None,
        }
    }
}

/// Prior on the binary-response parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaPriorSection {
    /// Uniform ranges by effect order, with optional per-effect overrides.
    Box {
        intercept: (f64, f64),
        first_order: (f64, f64),
        second_order: (f64, f64),
        #[serde(default)]
        overrides: BTreeMap<String, (f64, f64)>,
    },
    /// Explicit uniform bounds in model effect order.
    Bounds { lower: Vec<f64>, upper: Vec<f64> },
    /// CSV of samples, relative to the config file.
    Samples(PathBuf),
    /// `eta ~ N(0, tau0_sq R0)` with `R0` the hierarchy correlation at decay `r0`.
    Normal {
        tau0_sq: f64,
        #[serde(default)]
        r0: Option<f64>,
    },
}

fn default_restarts() -> usize {
    10
}

fn default_b() -> usize {
    500
}

fn default_pi_filter() -> Option<(f64, f64)> {
    Some(DEFAULT_PI_FILTER)
}

fn default_kappa() -> f64 {
    0.5
}

fn default_sampling() -> SamplingStrategy {
    SamplingStrategy::MaximinLhs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub n: usize,
    /// Number of parameter samples for global designs.
    #[serde(default = "default_b", alias = "B")]
    pub b: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    /// `null` disables the filter.
    #[serde(default = "default_pi_filter")]
    pub pi_filter: Option<(f64, f64)>,
    #[serde(default)]
    pub restrict_exchanges: bool,
    #[serde(default = "default_kappa")]
    pub kappa_init: f64,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingStrategy,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub no_improve_window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub factors: Vec<FactorSpec>,
    #[serde(default)]
    pub model: ModelDescriptor,
    #[serde(default)]
    pub criterion: CriterionSection,
    #[serde(default)]
    pub eta_prior: Option<EtaPriorSection>,
    pub search: SearchSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(config_err("factors: at least one factor is required"));
        }
        let mut seen = HashSet::new();
        for f in &self.factors {
            if f.name.is_empty() || f.name.contains(['*', ',']) {
                return Err(config_err(format!("factors: invalid factor name '{}'", f.name)));
            }
            if !seen.insert(&f.name) {
                return Err(config_err(format!("factors: duplicate factor name '{}'", f.name)));
            }
        }
        let c = &self.criterion;
        if !(c.rho >= 0.0 && c.rho.is_finite()) {
            return Err(config_err(format!("criterion.rho: {} must be finite and >= 0", c.rho)));
        }
        for (field, r) in [("r1", Some(c.r1)), ("r2", Some(c.r2)), ("r0", c.r0)] {
            if let Some(r) = r {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(config_err(format!("criterion.{field}: {r} must lie in (0, 1]")));
                }
            }
        }
        if let Some(r) = c.rho0 {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(config_err(format!("criterion.rho0: {r} must be finite and >= 0")));
            }
        }
        if self.search.b == 0 {
            return Err(config_err("search.B must be at least 1"));
        }
        let check = |field: &str, (lo, hi): (f64, f64)| -> Result<()> {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(config_err(format!(
                    "eta_prior.{field}: [{lo}, {hi}] is not a finite interval"
                )));
            }
            Ok(())
        };
        match &self.eta_prior {
            Some(EtaPriorSection::Box {
                intercept,
                first_order,
                second_order,
                overrides,
            }) => {
                check("intercept", *intercept)?;
                check("first_order", *first_order)?;
                check("second_order", *second_order)?;
                for (k, v) in overrides {
                    check(&format!("overrides.{k}"), *v)?;
                }
            }
            Some(EtaPriorSection::Bounds { lower, upper }) => {
                if lower.len() != upper.len() {
                    return Err(config_err("eta_prior.bounds: lower and upper differ in length"));
                }
                for (l, u) in lower.iter().zip(upper) {
                    check("bounds", (*l, *u))?;
                }
            }
            Some(EtaPriorSection::Normal { tau0_sq, .. }) if !(*tau0_sq > 0.0 && tau0_sq.is_finite()) => {
                return Err(config_err("eta_prior.normal.tau0_sq must be positive"));
            }
            _ => {}
        }
        let model = self.model()?;
        self.search_config(None).validate(model.q()).map_err(|e| match e {
            Error::Config(m) => config_err(format!("search: {m}")),
            e => e,
        })?;
        Ok(())
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let factors = self.factors.clone();
        let r = match &self.model {
            ModelDescriptor::Shorthand(s) if s == "full-quadratic" => ModelSpec::full_quadratic(factors),
            ModelDescriptor::Shorthand(s) if s == "main-effects" => ModelSpec::main_effects(factors),
            ModelDescriptor::Shorthand(s) => return Err(config_err(format!("model: unknown shorthand '{s}'"))),
            ModelDescriptor::Effects(names) => names
                .iter()
                .map(|n| Effect::parse(n, &factors))
                .collect::<Result<Vec<_>>>()
                .and_then(|effects| ModelSpec::new(factors.clone(), effects)),
        };
        r.map_err(|e| match e {
            Error::Domain(m) => config_err(format!("model: {m}")),
            e => e,
        })
    }

    pub fn candidates(&self) -> Result<CandidateSet> {
        Ok(CandidateSet::full_factorial(&self.model()?))
    }

    pub fn criterion(&self, model: &ModelSpec) -> Result<CriterionConfig> {
        let c = &self.criterion;
        let mut cfg = if c.rho > 0.0 {
            CriterionConfig::conjugate(
                c.rho,
                &correlation_matrix(model, c.r1)?,
                &correlation_matrix(model, c.r2)?,
                c.link,
            )?
        } else {
            CriterionConfig::noninformative(model.q(), c.link)
        };
        let r0 = c.r0.unwrap_or(DEFAULT_DECAY);
        let ridge = match (&self.eta_prior, c.rho0) {
            (_, Some(rho0)) => Some((rho0, correlation_matrix(model, r0)?)),
            (Some(EtaPriorSection::Normal { tau0_sq, r0 }), None) => {
                Some((1.0 / tau0_sq, correlation_matrix(model, r0.unwrap_or(DEFAULT_DECAY))?))
            }
            _ => None,
        };
        if let Some((rho0, r)) = ridge {
            if rho0 > 0.0 {
                cfg = cfg.with_eta_ridge(rho0, r.inverse());
            }
        }
        Ok(cfg)
    }

    pub fn objective(&self, model: &ModelSpec) -> Result<Objective> {
        Ok(Objective::Qq(self.criterion(model)?))
    }

    /// The parametric prior, if the config has one.
    pub fn eta_prior(&self, model: &ModelSpec) -> Result<Option<EtaPrior>> {
        let names = model.effect_names();
        let prior = match &self.eta_prior {
            None | Some(EtaPriorSection::Samples(_)) => return Ok(None),
            Some(EtaPriorSection::Box {
                intercept,
                first_order,
                second_order,
                overrides,
            }) => {
                let mut p = EtaPrior::hierarchical_box(model, *intercept, *first_order, *second_order);
                if let EtaPrior::UniformBox { lower, upper } = &mut p {
                    for (name, (lo, hi)) in overrides {
                        let k = names
                            .iter()
                            .position(|n| n == name)
                            .ok_or_else(|| config_err(format!("eta_prior.box.overrides: unknown effect '{name}'")))?;
                        lower[k] = *lo;
                        upper[k] = *hi;
                    }
                }
                p
            }
            Some(EtaPriorSection::Bounds { lower, upper }) => {
                if lower.len() != model.q() {
                    return Err(config_err(format!(
                        "eta_prior.bounds: expected {} values, found {}",
                        model.q(),
                        lower.len()
                    )));
                }
                EtaPrior::UniformBox {
                    lower: lower.clone(),
                    upper: upper.clone(),
                }
            }
            Some(EtaPriorSection::Normal { tau0_sq, r0 }) => EtaPrior::NormalDiag {
                tau0_sq: *tau0_sq,
                r0_diag: correlation_matrix(model, r0.unwrap_or(DEFAULT_DECAY))?
                    .matrix()
                    .diagonal()
                    .iter()
                    .copied()
                    .collect(),
            },
        };
        prior.validate()?;
        Ok(Some(prior))
    }

    /// Parameter samples for a global search: read from the configured CSV,
    /// or `search.B` draws from the parametric prior.
    pub fn eta_samples<R: Rng + ?Sized>(&self, model: &ModelSpec, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if let Some(EtaPriorSection::Samples(p)) = &self.eta_prior {
            return io::read_eta_samples(&self.resolve(p), &model.effect_names());
        }
        match self.eta_prior(model)? {
            Some(prior) => sample_eta(&prior, self.search.b, self.search.sampling, rng),
            None => Err(config_err("eta_prior: a prior or a sample file is required")),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn search_config(&self, seed: Option<u64>) -> SearchConfig {
        let s = &self.search;
        SearchConfig {
            n: s.n,
            restarts: s.restarts,
            max_iterations: s.max_iterations,
            no_improve_window: s.no_improve_window,
            pi_filter: s.pi_filter,
            restrict_exchanges: s.restrict_exchanges,
            kappa_init: s.kappa_init,
            seed: seed.unwrap_or(s.seed),
            shared_seed: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ART: &str = r#"{
        "factors": [
            {"name": "x1", "kind": "two-level"},
            {"name": "x2", "kind": "two-level"},
            {"name": "x3", "kind": "two-level"},
            {"name": "x4", "kind": "three-level-categorical"},
            {"name": "x5", "kind": "three-level-quantitative"}
        ],
        "model": "full-quadratic",
        "criterion": {"link": "logit", "rho": 0.3},
        "eta_prior": {"box": {"intercept": [-1, 1], "first_order": [-1, 1], "second_order": [-0.5, 0.5]}},
        "search": {"n": 66, "B": 50, "seed": 3}
    }"#;

    #[test]
    fn parses_artificial() {
        let c = ExperimentConfig::from_json(ART).unwrap();
        let m = c.model().unwrap();
        assert_eq!(m.q(), 22);
        assert_eq!(c.search.b, 50);
        assert_eq!(c.search.pi_filter, Some(DEFAULT_PI_FILTER));
        let crit = c.criterion(&m).unwrap();
        assert_eq!(crit.rho, 0.3);
        let p = c.eta_prior(&m).unwrap().unwrap();
        assert_eq!(p.dim(), 22);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back.search, c.search);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = ART.replace("\"rho\": 0.3", "\"rho\": -1");
        let e = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("criterion.rho"), "{e}");
        let bad = ART.replace("\"n\": 66", "\"n\": 10");
        assert!(ExperimentConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .contains("search"));
        let bad = ART.replace("\"seed\": 3", "\"sead\": 3");
        assert!(ExperimentConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .contains("sead"));
        let bad = ART.replace("full-quadratic", "cubic");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn explicit_effects_and_overrides() {
        let text = r#"{
            "factors": [{"name": "a", "kind": "two-level"}, {"name": "b", "kind": "three-level-quantitative"}],
            "model": ["intercept", "a", "b.l", "a*b.l", "b.q"],
            "eta_prior": {"box": {"intercept": [0, 6], "first_order": [-1, 1], "second_order": [-0.3, 0.3],
                                  "overrides": {"a": [1, 5]}}},
            "search": {"n": 10, "pi_filter": null}
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let m = c.model().unwrap();
        assert_eq!(m.q(), 5);
        assert_eq!(c.search.pi_filter, None);
        match c.eta_prior(&m).unwrap().unwrap() {
            EtaPrior::UniformBox { lower, upper } => {
                assert_eq!(lower, vec![0.0, 1.0, -1.0, -0.3, -0.3]);
                assert_eq!(upper, vec![6.0, 5.0, 1.0, 0.3, 0.3]);
            }
            p => panic!("{p:?}"),
        }
    }

    #[test]
    fn normal_prior_adds_eta_ridge() {
        let text = r#"{
            "factors": [{"name": "a", "kind": "two-level"}],
            "eta_prior": {"normal": {"tau0_sq": 4.0}},
            "search": {"n": 4}
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let m = c.model().unwrap();
        let crit = c.criterion(&m).unwrap();
        assert_eq!(crit.eta_ridge.as_ref().unwrap().0, 0.25);
    }
}
