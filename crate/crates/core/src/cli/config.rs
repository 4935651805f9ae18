//! Scenario files.
//!
//! ```toml
//! [distribution]
//! family = "normal"            # normal | student-t | logistic | laplace
//! mu = [1.3, 0.8, 3.2]
//! sigma = [[1.33, -0.067, 2.63], [-0.067, 0.25, -0.50], [2.63, -0.50, 5.76]]
//! skew = "normal-cdf"          # half | normal-cdf | student-t-cdf | logistic-cdf | laplace-cdf
//! gamma = [2.1, -0.045, -1.06]
//! root = "cholesky"            # symmetric | cholesky
//!
//! [request]
//! q = [0.80, 0.90, 0.95]       # or: var = [...]
//!
//! [integration]
//! method = "quadrature"        # quadrature | qmc
//!
//! [oracle]
//! samples = 10000000
//! seed = 1
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::distributions::{GseDistribution, RootConvention, VarMethod};
use crate::error::{Error, Result};
use crate::generators::GeneratorFamily;
use crate::oracle::TailEvent;
use crate::risk_measures::{resolve_lambda, TailRequest, Thresholds};
use crate::skewing::{SkewKind, SkewingFunction};
use crate::tail_engine::IntegrationConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub distribution: DistributionSection,
    pub request: RequestSection,
    #[serde(default)]
    pub integration: IntegrationConfig,
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    pub family: FamilyName,
    /// Student-t degrees of freedom.
    pub dof: Option<f64>,
    pub mu: Vec<f64>,
    /// Row lists.
    pub sigma: Vec<Vec<f64>>,
    #[serde(default)]
    pub skew: SkewName,
    /// Degrees of freedom of a Student-t cdf skewing; defaults to `dof`.
    pub skew_dof: Option<f64>,
    pub gamma: Option<Vec<f64>>,
    #[serde(default)]
    pub root: RootConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Normal,
    StudentT,
    Logistic,
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkewName {
    #[default]
    Half,
    NormalCdf,
    StudentTCdf,
    LogisticCdf,
    LaplaceCdf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSection {
    pub q: Option<Vec<f64>>,
    pub var: Option<Vec<f64>>,
    pub var_method: Option<VarMethodName>,
    /// Sample size and seed for `var_method = "monte-carlo"`.
    pub var_samples: Option<usize>,
    pub var_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarMethodName {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventName {
    /// Standardized orthant `Z > λ`, the event the measures condition on.
    #[default]
    Standardized,
    /// `Y > VaR` componentwise.
    Data,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub event: EventName,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn distribution(&self) -> Result<GseDistribution> {
        let d = &self.distribution;
        let n = d.mu.len();
        if d.sigma.len() != n || d.sigma.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("sigma must be a {n}x{n} list of rows to match mu")));
        }
        let sigma = DMatrix::from_fn(n, n, |i, j| d.sigma[i][j]);
        let family = match d.family {
            FamilyName::Normal => GeneratorFamily::Normal,
            FamilyName::StudentT => {
                GeneratorFamily::student_t(d.dof.ok_or_else(|| Error::Config("student-t family needs dof".into()))?)?
            }
            FamilyName::Logistic => GeneratorFamily::Logistic,
            FamilyName::Laplace => GeneratorFamily::Laplace,
        };
        if d.dof.is_some() && d.family != FamilyName::StudentT {
            return Err(Error::Config("dof only applies to the student-t family".into()));
        }
        let kind = match d.skew {
            SkewName::Half => SkewKind::Half,
            SkewName::NormalCdf => SkewKind::NormalCdf,
            SkewName::StudentTCdf => SkewKind::student_t(
                d.skew_dof
                    .or(d.dof)
                    .ok_or_else(|| Error::Config("student-t-cdf skewing needs skew_dof".into()))?,
            )?,
            SkewName::LogisticCdf => SkewKind::LogisticCdf,
            SkewName::LaplaceCdf => SkewKind::LaplaceCdf,
        };
        let gamma = match (&d.gamma, kind) {
            (Some(g), _) => g.clone(),
            (None, SkewKind::Half) => vec![0.0; n],
            (None, _) => return Err(Error::Config(format!("{} skewing needs gamma", kind.name()))),
        };
        if gamma.len() != n {
            return Err(Error::Config(format!("gamma has {} entries, mu has {n}", gamma.len())));
        }
        GseDistribution::new(d.mu.clone(), sigma, family, SkewingFunction::new(kind, gamma), d.root)
    }

    pub fn request(&self) -> Result<TailRequest> {
        let r = &self.request;
        let thresholds = match (&r.q, &r.var) {
            (Some(q), None) => Thresholds::Quantiles(q.clone()),
            (None, Some(v)) => Thresholds::Var(v.clone()),
            _ => return Err(Error::Config("request needs exactly one of q or var".into())),
        };
        let var_method = match r.var_method {
            None => None,
            Some(VarMethodName::ClosedForm) => Some(VarMethod::ClosedForm),
            Some(VarMethodName::Quadrature) => Some(VarMethod::Quadrature),
            Some(VarMethodName::MonteCarlo) => Some(VarMethod::MonteCarlo {
                samples: r.var_samples.unwrap_or(crate::distributions::MC_VAR_MIN_SAMPLES),
                seed: r.var_seed.unwrap_or(0),
            }),
        };
        if let Thresholds::Quantiles(q) = &thresholds {
            if let Some(bad) = q.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
                return Err(Error::Config(format!("quantile levels must lie in [0, 1), got {bad}")));
            }
        }
        self.integration.validate().map_err(|e| Error::Config(format!("integration: {e}")))?;
        Ok(TailRequest { thresholds, var_method, integration: self.integration })
    }

    /// The oracle's tail event for this scenario.
    pub fn oracle_event(&self, dist: &GseDistribution, req: &TailRequest) -> Result<TailEvent> {
        let lam = resolve_lambda(dist, req)?;
        Ok(match self.oracle.as_ref().map(|o| o.event).unwrap_or_default() {
            EventName::Standardized => TailEvent::Standardized(lam.lambda),
            EventName::Data => TailEvent::Data(lam.var),
        })
    }
}
