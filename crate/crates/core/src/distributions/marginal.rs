//! Marginal quantiles.
//!
//! `Y_k − μ_k = ‖r_k‖·S` where `r_k` is row `k` of the root and `S = eᵀZ`
//! for the unit vector `e = r_k/‖r_k‖`. Writing `γ = αe + βf` with `f ⊥ e`,
//! the density of `S` is `∫ 2 m₂(s, v) H(αs + βv) dv`, where `m₂` is the
//! two-dimensional marginal of the spherical law; when `β = 0` it collapses
//! to `2 m₁(s) H(αs)`. Both marginals come from the radial kernel volume, so
//! the quadrature route works in any dimension.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{sample_chunks, GseDistribution};
use crate::error::{Error, Result};
use crate::generators::{GeneratorFamily, GeneratorKind};
use crate::quadrature::{integrate_line, integrate_upper, Tolerance};

pub const MC_VAR_MIN_SAMPLES: usize = 1_000_000;
const MC_BATCHES: usize = 32;
const MAX_ROOT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum VarMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

struct Margin<'a> {
    dist: &'a GseDistribution,
    alpha: f64,
    beta: f64,
    tol: Tolerance,
}

impl<'a> Margin<'a> {
    fn new(dist: &'a GseDistribution, k: usize) -> Self {
        let n = dist.dim();
        let row = dist.root.row(k);
        let norm = row.norm();
        let e: Vec<f64> = row.iter().map(|v| v / norm).collect();
        let g = &dist.skew.gamma;
        let alpha: f64 = g.iter().zip(&e).map(|(a, b)| a * b).sum();
        let beta = if dist.skew.kind.is_half() || n == 1 {
            0.0
        } else {
            let rest: f64 = g.iter().zip(&e).map(|(gi, ei)| (gi - alpha * ei).powi(2)).sum();
            let r = rest.sqrt();
            // Components at round-off level are treated as exactly aligned.
            if r <= 1e-14 * (1.0 + alpha.abs()) { 0.0 } else { r }
        };
        Margin { dist, alpha, beta, tol: Tolerance::new(1e-13, 1e-12, 2000) }
    }

    fn kernel(&self, d: usize, a: f64) -> f64 {
        let v = self.dist.generator.kernel_volume(GeneratorKind::G, self.dist.dim(), d, a);
        self.dist.cn * v.unwrap_or(f64::NAN)
    }

    fn density(&self, s: f64) -> f64 {
        let n = self.dist.dim();
        let h = &self.dist.skew.kind;
        if self.beta == 0.0 {
            return 2.0 * self.kernel(n - 1, 0.5 * s * s) * h.eval_pv(0, self.alpha * s);
        }
        let r = integrate_line(
            |v| 2.0 * self.kernel(n - 2, 0.5 * (s * s + v * v)) * h.eval_pv(0, self.alpha * s + self.beta * v),
            0.0,
            1.0,
            &self.tol,
        );
        r.value
    }

    fn scale(&self) -> f64 {
        match self.dist.generator {
            GeneratorFamily::StudentT { dof } if dof > 2.0 => (dof / (dof - 2.0)).sqrt(),
            GeneratorFamily::StudentT { .. } => 3.0,
            _ => 1.0,
        }
    }

    /// (P(S ≤ t), P(S > t)) with the smaller side integrated directly, plus
    /// the quadrature error.
    fn cdf_pair(&self, t: f64) -> Result<(f64, f64, f64)> {
        let sc = self.scale();
        let r = if t <= 0.0 {
            integrate_upper(|x| self.density(t - x), 0.0, sc, &self.tol)
        } else {
            integrate_upper(|x| self.density(t + x), 0.0, sc, &self.tol)
        };
        if !r.value.is_finite() {
            return Err(Error::Integration(format!("marginal cdf at {t} is not finite")));
        }
        Ok(if t <= 0.0 { (r.value, 1.0 - r.value, r.error) } else { (1.0 - r.value, r.value, r.error) })
    }

    fn quantile(&self, q: f64) -> Result<(f64, f64)> {
        // g(t) = F(t) − q evaluated on the accurate side.
        let g = |t: f64| -> Result<(f64, f64)> {
            let (lo, up, err) = self.cdf_pair(t)?;
            Ok((if t <= 0.0 { lo - q } else { (1.0 - q) - up }, err))
        };
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let mut t = normal.inverse_cdf(q) * self.scale();
        let (mut gt, _) = g(t)?;
        let (mut a, mut b);
        let mut step = 1.0;
        if gt < 0.0 {
            a = t;
            loop {
                b = a + step;
                let (gb, _) = g(b)?;
                if gb >= 0.0 {
                    break;
                }
                a = b;
                step *= 2.0;
                if step > 1e8 {
                    return Err(Error::RootFinding(format!("could not bracket the {q} quantile")));
                }
            }
        } else {
            b = t;
            loop {
                a = b - step;
                let (ga, _) = g(a)?;
                if ga < 0.0 {
                    break;
                }
                b = a;
                step *= 2.0;
                if step > 1e8 {
                    return Err(Error::RootFinding(format!("could not bracket the {q} quantile")));
                }
            }
        }
        t = t.clamp(a, b);
        for _ in 0..MAX_ROOT_ITERATIONS {
            let (gv, err) = g(t)?;
            gt = gv;
            if gt == 0.0 {
                return Ok((t, 0.0));
            }
            if gt < 0.0 {
                a = t;
            } else {
                b = t;
            }
            let f = self.density(t);
            let mut next = if f > 0.0 { t - gt / f } else { f64::NAN };
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            let tol = 1e-13 * t.abs().max(1.0);
            if (next - t).abs() <= tol || (b - a) <= tol {
                let f = if f > 0.0 { f } else { self.density(next) };
                let e = if f > 0.0 { err / f } else { b - a };
                return Ok((next, e + tol));
            }
            t = next;
        }
        Err(Error::RootFinding(format!(
            "quantile {q} did not converge after {MAX_ROOT_ITERATIONS} iterations (residual {gt:e})"
        )))
    }
}

impl GseDistribution {
    /// Closed form is available for elliptical normal and Student-t margins.
    pub fn has_closed_form_margins(&self) -> bool {
        self.skew.kind.is_half()
            && matches!(self.generator, GeneratorFamily::Normal | GeneratorFamily::StudentT { .. })
    }

    /// Closed form when available, quadrature otherwise.
    pub fn default_var_method(&self) -> VarMethod {
        if self.has_closed_form_margins() {
            VarMethod::ClosedForm
        } else {
            VarMethod::Quadrature
        }
    }

    /// Quantile of `S = eᵀZ` for margin `k`, with its error.
    pub(crate) fn standardized_margin_quantile(&self, k: usize, q: f64, method: VarMethod) -> Result<(f64, f64)> {
        if k >= self.dim() {
            return Err(Error::Domain(format!("margin index {k} out of range for dimension {}", self.dim())));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        match method {
            VarMethod::ClosedForm => {
                if !self.has_closed_form_margins() {
                    return Err(Error::MethodUnavailable(format!(
                        "no closed-form margin for {} generator with {} skewing",
                        self.generator.name(),
                        self.skew.kind.name()
                    )));
                }
                let v = match self.generator {
                    GeneratorFamily::StudentT { dof } => StudentsT::new(0.0, 1.0, dof)
                        .map_err(|e| Error::Parameter(e.to_string()))?
                        .inverse_cdf(q),
                    _ => Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(q),
                };
                Ok((v, 0.0))
            }
            VarMethod::Quadrature => Margin::new(self, k).quantile(q),
            VarMethod::MonteCarlo { samples, seed } => {
                if samples < MC_VAR_MIN_SAMPLES {
                    return Err(Error::Domain(format!(
                        "Monte Carlo VaR needs at least {MC_VAR_MIN_SAMPLES} samples, got {samples}"
                    )));
                }
                let n = self.dim();
                let mu = self.mu[k];
                let norm = self.row_norm(k);
                let chunks = sample_chunks(self, samples, seed, |_, rows| {
                    rows.chunks_exact(n).map(|r| (r[k] - mu) / norm).collect::<Vec<f64>>()
                });
                let all: Vec<f64> = chunks.into_iter().flatten().collect();
                let batch = all.len() / MC_BATCHES;
                let batch_q: Vec<f64> = (0..MC_BATCHES)
                    .map(|b| empirical_quantile(all[b * batch..(b + 1) * batch].to_vec(), q))
                    .collect();
                let value = empirical_quantile(all, q);
                let mean = batch_q.iter().sum::<f64>() / MC_BATCHES as f64;
                let var = batch_q.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (MC_BATCHES - 1) as f64;
                Ok((value, (var / MC_BATCHES as f64).sqrt()))
            }
        }
    }
}

fn empirical_quantile(mut v: Vec<f64>, q: f64) -> f64 {
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    let (_, x, _) = v.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    *x
}
