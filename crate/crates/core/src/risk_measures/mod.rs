//! Tail conditional expectation (MTCE), tail covariance (MTCov), tail
//! correlation (MTCorr) and univariate tail variance (TV).
//!
//! All measures condition on the standardized orthant event `{Z > λ}` with
//! `λ = R⁻¹(VaR − μ)`, and are mapped back through `Y = μ + R·Z`.

mod assembly;
mod report;

pub use report::{ErrorBars, Measure, ReportMetadata, RiskReport};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{GseDistribution, VarMethod};
use crate::error::{Error, Result};
use crate::tail_engine::IntegrationConfig;
use crate::Estimate;
use assembly::Assembly;

/// Tail probabilities below this are refused unless the integrator resolves
/// them to its relative tolerance.
pub const MIN_TAIL_PROBABILITY: f64 = 1e-12;
/// MTCorr refuses diagonal entries below this.
pub const MIN_CORR_DIAGONAL: f64 = 1e-12;
/// Allowed negative eigenvalue of a returned MTCov, relative to its trace.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// How the VaR vector is specified. A quantile level of 0 means the
/// vacuous threshold `−∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Thresholds {
    Quantiles(Vec<f64>),
    Var(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRequest {
    pub thresholds: Thresholds,
    /// Defaults to [`GseDistribution::default_var_method`].
    pub var_method: Option<VarMethod>,
    pub integration: IntegrationConfig,
}

impl TailRequest {
    pub fn quantiles(q: Vec<f64>) -> Self {
        TailRequest { thresholds: Thresholds::Quantiles(q), var_method: None, integration: IntegrationConfig::default() }
    }

    pub fn var(v: Vec<f64>) -> Self {
        TailRequest { thresholds: Thresholds::Var(v), var_method: None, integration: IntegrationConfig::default() }
    }

    /// No conditioning: every threshold at `−∞`.
    pub fn vacuous(n: usize) -> Self {
        Self::quantiles(vec![0.0; n])
    }

    pub fn with_integration(mut self, cfg: IntegrationConfig) -> Self {
        self.integration = cfg;
        self
    }

    pub fn with_var_method(mut self, method: VarMethod) -> Self {
        self.var_method = Some(method);
        self
    }
}

/// VaR vector and its standardized image `λ = R⁻¹(VaR − μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedLambda {
    pub var: Vec<f64>,
    pub var_error: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl StandardizedLambda {
    /// λ with entry `k` removed.
    pub fn without(&self, k: usize) -> Vec<f64> {
        drop_indices(&self.lambda, &[k])
    }

    /// λ with entries `i` and `j` removed.
    pub fn without_pair(&self, i: usize, j: usize) -> Vec<f64> {
        drop_indices(&self.lambda, &[i, j])
    }
}

pub(crate) fn drop_indices(v: &[f64], drop: &[usize]) -> Vec<f64> {
    v.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, x)| *x).collect()
}

/// Resolves the request's thresholds against `dist`.
pub fn resolve_lambda(dist: &GseDistribution, req: &TailRequest) -> Result<StandardizedLambda> {
    let n = dist.dim();
    let (excess, var_error) = match &req.thresholds {
        Thresholds::Quantiles(q) => {
            if q.len() != n {
                return Err(Error::Dimension { expected: n, found: q.len() });
            }
            let method = req.var_method.unwrap_or_else(|| dist.default_var_method());
            let mut excess = Vec::with_capacity(n);
            let mut errs = Vec::with_capacity(n);
            for (k, &qk) in q.iter().enumerate() {
                if qk == 0.0 {
                    excess.push(f64::NEG_INFINITY);
                    errs.push(0.0);
                } else {
                    let (qs, e) = dist.standardized_margin_quantile(k, qk, method)?;
                    let norm = dist.row_norm(k);
                    excess.push(norm * qs);
                    errs.push(norm * e);
                }
            }
            (excess, errs)
        }
        Thresholds::Var(v) => {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, found: v.len() });
            }
            if v.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
                return Err(Error::Domain(format!("VaR entries must be finite or -inf, got {v:?}")));
            }
            (v.iter().zip(dist.mu().iter()).map(|(a, m)| a - m).collect(), vec![0.0; n])
        }
    };
    let var: Vec<f64> = excess.iter().zip(dist.mu().iter()).map(|(e, m)| m + e).collect();
    let lambda = standardize_excess(dist, &excess)?;
    Ok(StandardizedLambda { var, var_error, lambda })
}

fn standardize_excess(dist: &GseDistribution, excess: &[f64]) -> Result<Vec<f64>> {
    let infinite = excess.iter().filter(|e| e.is_infinite()).count();
    if infinite == 0 {
        return Ok((dist.root_inv() * DVector::from_column_slice(excess)).iter().copied().collect());
    }
    if infinite == excess.len() {
        return Ok(vec![f64::NEG_INFINITY; excess.len()]);
    }
    let r = dist.root();
    let diagonal = (0..r.nrows()).all(|i| (0..r.ncols()).all(|j| i == j || r[(i, j)] == 0.0));
    if !diagonal {
        return Err(Error::Domain(
            "a mix of -inf and finite thresholds needs a diagonal root; use all -inf or none".into(),
        ));
    }
    Ok(excess.iter().enumerate().map(|(k, e)| e / r[(k, k)]).collect())
}

fn check_tail(f: &Estimate, converged: bool, rel_tol: f64) -> Result<()> {
    let resolved = converged && f.error <= rel_tol * f.value;
    if !(f.value > 0.0) || (f.value < MIN_TAIL_PROBABILITY && !resolved) {
        return Err(Error::DegenerateTail(f.value));
    }
    Ok(())
}

/// Tail probability, standardized conditional mean and covariance with
/// their error bars.
#[derive(Debug, Clone)]
pub(crate) struct StandardMoments {
    pub tail_prob: Estimate,
    pub mean: Vec<Estimate>,
    pub cov: Option<Vec<Vec<Estimate>>>,
    pub converged: bool,
}

fn map_mean(dist: &GseDistribution, m: &[Estimate]) -> Vec<Estimate> {
    let r = dist.root();
    (0..dist.dim())
        .map(|i| {
            let mut acc = Estimate::exact(dist.mu()[i]);
            for (k, mk) in m.iter().enumerate() {
                acc = acc + mk.scale(r[(i, k)]);
            }
            acc
        })
        .collect()
}

/// `R Ω Rᵀ`, symmetrized and checked for positive semidefiniteness.
fn map_cov(dist: &GseDistribution, omega: &[Vec<Estimate>]) -> Result<Vec<Vec<Estimate>>> {
    let n = dist.dim();
    let r = dist.root();
    let mut out = vec![vec![Estimate::ZERO; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Estimate::ZERO;
            for (k, row) in omega.iter().enumerate() {
                for (l, w) in row.iter().enumerate() {
                    acc = acc + w.scale(r[(i, k)] * r[(j, l)]);
                }
            }
            out[i][j] = acc;
            out[j][i] = acc;
        }
    }
    check_psd(&out)?;
    Ok(out)
}

fn check_psd(m: &[Vec<Estimate>]) -> Result<()> {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j].value);
    let trace = mat.trace();
    let min = mat.symmetric_eigenvalues().min();
    if !(min >= -PSD_TOLERANCE * trace.abs()) {
        return Err(Error::Integration(format!(
            "tail covariance is not positive semidefinite (min eigenvalue {min:e}, trace {trace:e})"
        )));
    }
    Ok(())
}

/// E[Y | Z > λ].
pub fn mtce(dist: &GseDistribution, req: &TailRequest) -> Result<Vec<Estimate>> {
    dist.generator().require_dof_above(2.0, "MTCE")?;
    let lam = resolve_lambda(dist, req)?;
    let m = Assembly::new(dist, &lam.lambda, &req.integration)?.moments(false)?;
    Ok(map_mean(dist, &m.mean))
}

/// Cov(Y | Z > λ). Elliptical laws use the reduced assembly.
pub fn mtcov(dist: &GseDistribution, req: &TailRequest) -> Result<Vec<Vec<Estimate>>> {
    if dist.is_elliptical() {
        mtcov_elliptical(dist, req)
    } else {
        mtcov_generic(dist, req)
    }
}

/// Cov(Y | Z > λ) through the full skew-elliptical assembly, whatever the
/// skewing function.
pub fn mtcov_generic(dist: &GseDistribution, req: &TailRequest) -> Result<Vec<Vec<Estimate>>> {
    dist.generator().require_dof_above(4.0, "MTCov")?;
    let lam = resolve_lambda(dist, req)?;
    let m = Assembly::new(dist, &lam.lambda, &req.integration)?.moments(true)?;
    map_cov(dist, m.cov.as_ref().expect("covariance requested"))
}

/// Cov(Y | Z > λ) for H ≡ ½.
pub fn mtcov_elliptical(dist: &GseDistribution, req: &TailRequest) -> Result<Vec<Vec<Estimate>>> {
    if !dist.is_elliptical() {
        return Err(Error::Domain(format!(
            "the elliptical path needs half skewing, got {}",
            dist.skew().kind.name()
        )));
    }
    dist.generator().require_dof_above(4.0, "MTCov")?;
    let lam = resolve_lambda(dist, req)?;
    let m = Assembly::new(dist, &lam.lambda, &req.integration)?.elliptical_moments()?;
    map_cov(dist, m.cov.as_ref().expect("covariance requested"))
}

/// Var(Y | Y > VaR_q) for a univariate law.
pub fn tv(dist: &GseDistribution, q: f64, cfg: &IntegrationConfig) -> Result<Estimate> {
    tv_request(dist, &TailRequest::quantiles(vec![q]).with_integration(*cfg))
}

pub fn tv_request(dist: &GseDistribution, req: &TailRequest) -> Result<Estimate> {
    if dist.dim() != 1 {
        return Err(Error::Dimension { expected: 1, found: dist.dim() });
    }
    dist.generator().require_dof_above(4.0, "TV")?;
    let lam = resolve_lambda(dist, req)?;
    let omega = assembly::univariate_tail_variance(dist, lam.lambda[0], &req.integration)?;
    Ok(omega.scale(dist.sigma()[(0, 0)]))
}

/// Correlation form of a tail covariance matrix.
pub fn mtcorr(mtcov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let est: Vec<Vec<Estimate>> =
        (0..mtcov.nrows()).map(|i| (0..mtcov.ncols()).map(|j| Estimate::exact(mtcov[(i, j)])).collect()).collect();
    let c = mtcorr_estimate(&est)?;
    Ok(DMatrix::from_fn(mtcov.nrows(), mtcov.ncols(), |i, j| c[i][j].value))
}

/// [`mtcorr`] with first-order error bars.
pub fn mtcorr_estimate(mtcov: &[Vec<Estimate>]) -> Result<Vec<Vec<Estimate>>> {
    let n = mtcov.len();
    if mtcov.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension { expected: n, found: mtcov.iter().map(|r| r.len()).max().unwrap_or(0) });
    }
    for (i, row) in mtcov.iter().enumerate() {
        if !(row[i].value >= MIN_CORR_DIAGONAL) {
            return Err(Error::Domain(format!(
                "MTCorr needs diagonal entries of at least {MIN_CORR_DIAGONAL:e}, entry {i} is {:e}",
                row[i].value
            )));
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return Estimate::exact(1.0);
                    }
                    let c = mtcov[i][j] / (mtcov[i][i] * mtcov[j][j]).sqrt();
                    Estimate::new(c.value.clamp(-1.0, 1.0), c.error)
                })
                .collect()
        })
        .collect())
}
