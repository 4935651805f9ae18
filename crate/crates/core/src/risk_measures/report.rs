use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::assembly::{univariate_tail_variance, Assembly};
use super::{map_cov, map_mean, mtcorr_estimate, resolve_lambda, StandardMoments, TailRequest, Thresholds};
use crate::distributions::{GseDistribution, RootConvention, VarMethod};
use crate::error::{Error, Result};
use crate::generators::GeneratorFamily;
use crate::skewing::SkewKind;
use crate::tail_engine::IntegrationConfig;
use crate::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Mtce,
    Mtcov,
    Mtcorr,
    Tv,
    All,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Mtce => "mtce",
            Measure::Mtcov => "mtcov",
            Measure::Mtcorr => "mtcorr",
            Measure::Tv => "tv",
            Measure::All => "all",
        }
    }

    fn wants_cov(&self) -> bool {
        matches!(self, Measure::Mtcov | Measure::Mtcorr | Measure::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBars {
    pub var_vector: Vec<f64>,
    pub tail_prob: f64,
    pub mtce: Option<Vec<f64>>,
    pub mtcov: Option<Vec<Vec<f64>>>,
    pub mtcorr: Option<Vec<Vec<f64>>>,
    pub tv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub measure: Measure,
    pub generator: GeneratorFamily,
    pub skew: SkewKind,
    pub root: RootConvention,
    /// Quantile levels, when the VaR vector was derived from them.
    pub quantiles: Option<Vec<f64>>,
    pub var_method: Option<VarMethod>,
    pub integration: IntegrationConfig,
    /// False when any integral stopped on its subdivision budget.
    pub converged: bool,
}

/// Everything computed for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub dimension: usize,
    #[serde(with = "extended_floats")]
    pub var_vector: Vec<f64>,
    #[serde(with = "extended_floats")]
    pub lambda: Vec<f64>,
    pub tail_prob: f64,
    pub mtce: Option<Vec<f64>>,
    pub mtcov: Option<Vec<Vec<f64>>>,
    pub mtcorr: Option<Vec<Vec<f64>>>,
    pub tv: Option<f64>,
    pub error_bars: ErrorBars,
    pub metadata: ReportMetadata,
}

fn values(v: &[Estimate]) -> Vec<f64> {
    v.iter().map(|e| e.value).collect()
}

fn errors(v: &[Estimate]) -> Vec<f64> {
    v.iter().map(|e| e.error).collect()
}

fn matrix_values(m: &[Vec<Estimate>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| values(r)).collect()
}

fn matrix_errors(m: &[Vec<Estimate>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| errors(r)).collect()
}

impl RiskReport {
    pub fn compute(dist: &GseDistribution, req: &TailRequest, measure: Measure) -> Result<Self> {
        let n = dist.dim();
        if measure == Measure::Tv && n != 1 {
            return Err(Error::Domain(format!("tail variance needs a univariate law, got dimension {n}")));
        }
        let family = dist.generator();
        family.require_dof_above(2.0, "MTCE")?;
        let with_cov = measure.wants_cov() || measure == Measure::Tv;
        if with_cov {
            family.require_dof_above(4.0, if measure == Measure::Tv { "TV" } else { "MTCov" })?;
        }
        let lam = resolve_lambda(dist, req)?;
        let asm = Assembly::new(dist, &lam.lambda, &req.integration)?;
        let m: StandardMoments = if with_cov && dist.is_elliptical() {
            asm.elliptical_moments()?
        } else {
            asm.moments(with_cov)?
        };
        let mean = map_mean(dist, &m.mean);
        let cov = match &m.cov {
            Some(om) if with_cov => Some(map_cov(dist, om)?),
            _ => None,
        };
        let corr = match (&cov, measure) {
            (Some(c), Measure::Mtcorr | Measure::All) => Some(mtcorr_estimate(c)?),
            _ => None,
        };
        let tv = if n == 1 && matches!(measure, Measure::Tv | Measure::All) {
            let om = univariate_tail_variance(dist, lam.lambda[0], &req.integration)?;
            Some(om.scale(dist.sigma()[(0, 0)]))
        } else {
            None
        };
        let show_mean = matches!(measure, Measure::Mtce | Measure::All);
        let show_cov = matches!(measure, Measure::Mtcov | Measure::All);
        Ok(RiskReport {
            dimension: n,
            var_vector: lam.var.clone(),
            lambda: lam.lambda.clone(),
            tail_prob: m.tail_prob.value,
            mtce: show_mean.then(|| values(&mean)),
            mtcov: cov.as_ref().filter(|_| show_cov).map(|c| matrix_values(c)),
            mtcorr: corr.as_ref().map(|c| matrix_values(c)),
            tv: tv.map(|t| t.value),
            error_bars: ErrorBars {
                var_vector: lam.var_error.clone(),
                tail_prob: m.tail_prob.error,
                mtce: show_mean.then(|| errors(&mean)),
                mtcov: cov.as_ref().filter(|_| show_cov).map(|c| matrix_errors(c)),
                mtcorr: corr.as_ref().map(|c| matrix_errors(c)),
                tv: tv.map(|t| t.error),
            },
            metadata: ReportMetadata {
                measure,
                generator: family,
                skew: dist.skew().kind,
                root: dist.root_convention(),
                quantiles: match &req.thresholds {
                    Thresholds::Quantiles(q) => Some(q.clone()),
                    Thresholds::Var(_) => None,
                },
                var_method: match req.thresholds {
                    Thresholds::Quantiles(_) => Some(req.var_method.unwrap_or_else(|| dist.default_var_method())),
                    Thresholds::Var(_) => None,
                },
                integration: req.integration,
                converged: m.converged,
            },
        })
    }

    pub fn mtcov_matrix(&self) -> Option<DMatrix<f64>> {
        self.mtcov.as_ref().map(|m| DMatrix::from_fn(self.dimension, self.dimension, |i, j| m[i][j]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid report: {e}")))
    }
}

/// Vectors that may hold ±inf, written as numbers or "inf"/"-inf" strings.
mod extended_floats {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let r: Vec<Repr> = v
            .iter()
            .map(|x| match *x {
                x if x.is_finite() => Repr::Num(x),
                f64::INFINITY => Repr::Text("inf".into()),
                f64::NEG_INFINITY => Repr::Text("-inf".into()),
                _ => Repr::Text("nan".into()),
            })
            .collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Num(x) => Ok(x),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(D::Error::custom(format!("expected a number, got {other:?}"))),
                },
            })
            .collect()
    }
}
