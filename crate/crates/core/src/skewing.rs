//! Skewing functions H with H(−x) = 1 − H(x), and their first two
//! derivatives, applied to a linear form γᵀz.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::special::{ln_gamma, norm_cdf, norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SkewKind {
    /// H ≡ ½: the elliptical case.
    Half,
    NormalCdf,
    StudentTCdf { dof: f64 },
    LogisticCdf,
    LaplaceCdf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewingFunction {
    pub kind: SkewKind,
    pub gamma: Vec<f64>,
}

impl SkewKind {
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(Error::Parameter(format!("Student-t skewing needs positive degrees of freedom, got {dof}")));
        }
        Ok(SkewKind::StudentTCdf { dof })
    }

    pub fn is_half(&self) -> bool {
        matches!(self, SkewKind::Half)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SkewKind::Half => "half",
            SkewKind::NormalCdf => "normal-cdf",
            SkewKind::StudentTCdf { .. } => "student-t-cdf",
            SkewKind::LogisticCdf => "logistic-cdf",
            SkewKind::LaplaceCdf => "laplace-cdf",
        }
    }

    /// H, H′ or H″ at `x`. The Laplace H″ is undefined at 0 and reported as
    /// a domain error here; [`eval_pv`](Self::eval_pv) returns 0 instead.
    pub fn eval(&self, order: u8, x: f64) -> Result<f64> {
        if order > 2 {
            return Err(Error::Domain(format!("skewing derivative order must be 0, 1 or 2, got {order}")));
        }
        if order == 2 && x == 0.0 && matches!(self, SkewKind::LaplaceCdf) {
            return Err(Error::Domain("Laplace-cdf second derivative is undefined at 0".into()));
        }
        Ok(self.eval_pv(order, x))
    }

    /// Like [`eval`](Self::eval) but with the principal value 0 for the
    /// Laplace H″ at the kink. Orders above 2 evaluate as 2.
    #[inline]
    pub fn eval_pv(&self, order: u8, x: f64) -> f64 {
        match (*self, order) {
            (SkewKind::Half, 0) => 0.5,
            (SkewKind::Half, _) => 0.0,
            (SkewKind::NormalCdf, 0) => norm_cdf(x),
            (SkewKind::NormalCdf, 1) => norm_pdf(x),
            (SkewKind::NormalCdf, _) => -x * norm_pdf(x),
            (SkewKind::StudentTCdf { dof }, 0) => t_cdf(dof, x),
            (SkewKind::StudentTCdf { dof }, 1) => t_pdf(dof, x),
            (SkewKind::StudentTCdf { dof }, _) => -(dof + 1.0) * x / (dof + x * x) * t_pdf(dof, x),
            (SkewKind::LogisticCdf, 0) => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            (SkewKind::LogisticCdf, 1) => logistic_pdf(x),
            (SkewKind::LogisticCdf, _) => {
                // lo′ = lo·(1 − 2Lo), written so it stays odd in x.
                let e = (-x.abs()).exp();
                let tanh_half = (1.0 - e) / (1.0 + e);
                -x.signum() * logistic_pdf(x) * tanh_half
            }
            (SkewKind::LaplaceCdf, 0) => {
                if x < 0.0 {
                    0.5 * x.exp()
                } else {
                    1.0 - 0.5 * (-x).exp()
                }
            }
            (SkewKind::LaplaceCdf, 1) => 0.5 * (-x.abs()).exp(),
            (SkewKind::LaplaceCdf, _) => {
                if x == 0.0 {
                    0.0
                } else {
                    -x.signum() * 0.5 * (-x.abs()).exp()
                }
            }
        }
    }
}

impl SkewingFunction {
    pub fn new(kind: SkewKind, gamma: Vec<f64>) -> Self {
        SkewingFunction { kind, gamma }
    }

    pub fn half(n: usize) -> Self {
        SkewingFunction { kind: SkewKind::Half, gamma: vec![0.0; n] }
    }

    /// H^{(order)}(γᵀz)
    pub fn eval_linear(&self, order: u8, z: &[f64]) -> f64 {
        let x: f64 = self.gamma.iter().zip(z).map(|(g, v)| g * v).sum();
        self.kind.eval_pv(order, x)
    }
}

fn logistic_pdf(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

fn t_pdf(m: f64, x: f64) -> f64 {
    let c = ln_gamma(0.5 * (m + 1.0)) - ln_gamma(0.5 * m) - 0.5 * (m * std::f64::consts::PI).ln();
    (c - 0.5 * (m + 1.0) * (x * x / m).ln_1p()).exp()
}

fn t_cdf(m: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let lower = 0.5 * beta_reg(0.5 * m, 0.5, m / (m + x * x));
    if x < 0.0 {
        lower
    } else {
        1.0 - lower
    }
}
