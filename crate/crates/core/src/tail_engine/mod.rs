//! Orthant tail functionals `∫_{z > t} h(z) f(z) dz` against spherical
//! densities built from g, Ḡ or 𝒢̄.
//!
//! Up to three dimensions are integrated by nested adaptive Gauss–Kronrod
//! rules; higher dimensions (or on request) by randomized Sobol points.
//! Each semi-infinite axis `[t, ∞)` is mapped onto `[u₀, 1)` by
//! `z = c + s·u/(1−|u|)` with `c = max(t, 0)`; lower bounds below zero
//! use the mirrored branch, so `t = −∞` is handled exactly.

mod cubature;
mod qmc;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{GeneratorFamily, GeneratorKind};
use crate::skewing::{SkewKind, SkewingFunction};

/// Largest dimension handled by the tail engine.
pub const MAX_DIM: usize = 10;
/// Largest dimension integrated by nested quadrature.
pub const MAX_QUADRATURE_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    #[serde(alias = "adaptive-quadrature")]
    Quadrature,
    #[serde(alias = "quasi-monte-carlo")]
    Qmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    pub method: Method,
    /// Absolute tolerance, measured against the integral of |h·f|.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub qmc_points: usize,
    pub max_subdivisions: usize,
    pub qmc_seed: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            method: Method::Quadrature,
            abs_tol: 1e-8,
            rel_tol: 1e-7,
            qmc_points: 1 << 20,
            max_subdivisions: 100_000,
            qmc_seed: 0x5eed,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain("integration tolerances must be positive".into()));
        }
        if !self.qmc_points.is_power_of_two() || self.qmc_points < 1024 {
            return Err(Error::Domain(format!(
                "qmc_points must be a power of two of at least 1024, got {}",
                self.qmc_points
            )));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::Domain("max_subdivisions must be at least 16".into()));
        }
        Ok(())
    }
}

/// A spherical density `norm · K_n(½|z|² + shift)` on ℝ^dim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub family: GeneratorFamily,
    pub kind: GeneratorKind,
    /// Dimension index of the generator (the `n` in g_n).
    pub n: usize,
    pub dim: usize,
    pub shift: f64,
    pub norm: f64,
}

impl DensitySpec {
    /// The density normalized to integrate to one over ℝ^dim.
    pub fn normalized(family: GeneratorFamily, kind: GeneratorKind, n: usize, dim: usize, shift: f64) -> Result<Self> {
        let vol = family.kernel_volume(kind, n, dim, shift)?;
        if !(vol > 0.0) || !vol.is_finite() {
            return Err(Error::Domain(format!(
                "{} kernel with shift {shift} has no normalizable mass in {dim} dimensions",
                family.name()
            )));
        }
        Ok(DensitySpec { family, kind, n, dim, shift, norm: 1.0 / vol })
    }

    #[inline]
    pub fn eval_sq(&self, half_sq: f64) -> f64 {
        self.norm * self.family.eval_unchecked(self.kind, self.n, half_sq + self.shift)
    }
}

/// Weight functions h(z).
#[derive(Clone)]
pub enum Weight {
    Constant(f64),
    /// z_k
    Coordinate(usize),
    /// z_i·z_j
    CoordinateProduct(usize, usize),
    /// H^{(order)}(offset + coeffsᵀz)
    Skew { kind: SkewKind, order: u8, offset: f64, coeffs: Vec<f64> },
    Scaled(f64, Box<Weight>),
    Sum(Box<Weight>, Box<Weight>),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant(c) => write!(f, "Constant({c})"),
            Weight::Coordinate(k) => write!(f, "Coordinate({k})"),
            Weight::CoordinateProduct(i, j) => write!(f, "CoordinateProduct({i}, {j})"),
            Weight::Skew { kind, order, offset, coeffs } => {
                write!(f, "Skew({kind:?}, order {order}, offset {offset}, {coeffs:?})")
            }
            Weight::Scaled(c, w) => write!(f, "Scaled({c}, {w:?})"),
            Weight::Sum(a, b) => write!(f, "Sum({a:?}, {b:?})"),
            Weight::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Weight {
    #[inline]
    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Coordinate(k) => z[*k],
            Weight::CoordinateProduct(i, j) => z[*i] * z[*j],
            Weight::Skew { kind, order, offset, coeffs } => {
                let x = offset + coeffs.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
                kind.eval_pv(*order, x)
            }
            Weight::Scaled(c, w) => c * w.eval(z),
            Weight::Sum(a, b) => a.eval(z) + b.eval(z),
            Weight::Custom(f) => f(z),
        }
    }

    /// True when the weight vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Constant(c) => *c == 0.0,
            Weight::Skew { kind: SkewKind::Half, order, .. } => *order > 0,
            Weight::Scaled(c, w) => *c == 0.0 || w.is_zero(),
            Weight::Sum(a, b) => a.is_zero() && b.is_zero(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TailIntegrand {
    pub density: DensitySpec,
    pub weight: Weight,
}

/// Integral value with its absolute error and a convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: u64,
}

impl TailEstimate {
    pub fn estimate(&self) -> crate::Estimate {
        crate::Estimate::new(self.value, self.error)
    }
}

/// The standardized skew-elliptical law `2 c_n g_n(½|z|²) H(γᵀz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardGse {
    pub family: GeneratorFamily,
    pub skew: SkewingFunction,
}

impl StandardGse {
    pub fn dim(&self) -> usize {
        self.skew.gamma.len()
    }
}

/// P(Z > λ) componentwise.
pub fn tail_probability(dist: &StandardGse, lambda: &[f64], cfg: &IntegrationConfig) -> Result<TailEstimate> {
    let n = dist.dim();
    if lambda.len() != n {
        return Err(Error::Dimension { expected: n, found: lambda.len() });
    }
    let density = DensitySpec::normalized(dist.family, GeneratorKind::G, n, n, 0.0)?;
    let weight = if dist.skew.kind.is_half() {
        Weight::Constant(1.0)
    } else {
        Weight::Scaled(
            2.0,
            Box::new(Weight::Skew { kind: dist.skew.kind, order: 0, offset: 0.0, coeffs: dist.skew.gamma.clone() }),
        )
    };
    let mut r = tail_expectation(&TailIntegrand { density, weight }, lambda, cfg)?;
    r.value = r.value.clamp(0.0, 1.0);
    Ok(r)
}

/// `∫_{z > lower} h(z) f(z) dz`.
pub fn tail_expectation(integrand: &TailIntegrand, lower: &[f64], cfg: &IntegrationConfig) -> Result<TailEstimate> {
    cfg.validate()?;
    let d = integrand.density.dim;
    if lower.len() != d {
        return Err(Error::Dimension { expected: d, found: lower.len() });
    }
    if d > MAX_DIM {
        return Err(Error::Domain(format!("tail integrals above {MAX_DIM} dimensions are not supported")));
    }
    if lower.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Domain(format!("lower bounds must be finite or -inf, got {lower:?}")));
    }
    if integrand.weight.is_zero() {
        return Ok(TailEstimate { value: 0.0, error: 0.0, converged: true, evaluations: 0 });
    }
    if d == 0 {
        let v = integrand.density.eval_sq(0.0) * integrand.weight.eval(&[]);
        if !v.is_finite() {
            return Err(Error::NonFinite { point: vec![] });
        }
        return Ok(TailEstimate { value: v, error: 0.0, converged: true, evaluations: 1 });
    }
    let axes = cubature::axes(&integrand.density, lower);
    if cfg.method == Method::Quadrature && d <= MAX_QUADRATURE_DIM {
        cubature::integrate(integrand, &axes, cfg)
    } else {
        qmc::integrate(integrand, &axes, cfg)
    }
}
