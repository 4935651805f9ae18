//! Orthant moments of the standardized law `2 c_n g_n(½|z|²) H(γᵀz)`.
//!
//! With `F = P(Z > λ)` the conditional mean and covariance are
//!
//! ```text
//! m_k   = (2/F)(W_k + γ_k X₁)
//! Ω_ij  = (2/F)(U_ij + γ_j V_i + γ_i V_j + γ_iγ_j X₂) − m_i m_j      (i ≠ j)
//! Ω_ii  = (2/F)(λ_i W_i + γ_i V_i + γ_i² X₂) + F*/F − m_i²
//! ```
//!
//! where, writing `K⁽ᵖ⁾` for a term with the listed coordinates pinned at
//! their λ values,
//!
//! ```text
//! F*   = ∫_{z>λ}     2c_n Ḡ(½|z|²) H(γᵀz)
//! X₁   = ∫_{z>λ}      c_n Ḡ(½|z|²) H′(γᵀz)
//! X₂   = ∫_{z>λ}      c_n 𝒢̄(½|z|²) H″(γᵀz)
//! W_k  = ∫_{w>λ₋ₖ}    c_n Ḡ(½|w|² + ½λ_k²) H(γ_kλ_k + γ₋ₖᵀw)
//! V_k  = ∫_{v>λ₋ₖ}    c_n 𝒢̄(½|v|² + ½λ_k²) H′(γ_kλ_k + γ₋ₖᵀv)
//! U_ij = ∫_{u>λ₋ᵢⱼ}   c_n 𝒢̄(½|u|² + ½λ_i² + ½λ_j²) H(γ_iλ_i + γ_jλ_j + γ₋ᵢⱼᵀu)
//! ```
//!
//! Each is `ratio × E`, the ratio being `c_n` over the normalizing constant
//! of the shifted kernel and `E` an expectation under that normalized kernel.

use rayon::prelude::*;

use super::{check_tail, drop_indices, StandardMoments};
use crate::distributions::GseDistribution;
use crate::error::Result;
use crate::generators::{ConstantKind, GeneratorFamily, GeneratorKind};
use crate::skewing::SkewingFunction;
use crate::tail_engine::{
    tail_expectation, tail_probability, DensitySpec, IntegrationConfig, StandardGse, TailIntegrand, Weight,
};
use crate::Estimate;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    F,
    FStar,
    X1,
    X2,
    W(usize),
    V(usize),
    U(usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct Value {
    est: Estimate,
    converged: bool,
}

impl Value {
    const ZERO: Value = Value { est: Estimate::ZERO, converged: true };
}

pub(super) struct Assembly<'a> {
    family: GeneratorFamily,
    skew: &'a SkewingFunction,
    lambda: &'a [f64],
    cn: f64,
    cfg: &'a IntegrationConfig,
}

impl<'a> Assembly<'a> {
    pub fn new(dist: &'a GseDistribution, lambda: &'a [f64], cfg: &'a IntegrationConfig) -> Result<Self> {
        cfg.validate()?;
        let family = dist.generator();
        let cn = family.normalizing_constant(ConstantKind::CN, dist.dim())?;
        Ok(Assembly { family, skew: dist.skew(), lambda, cn, cfg })
    }

    fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `ratio · E[h]` for the kernel `kind` with `pinned` coordinates fixed
    /// at λ. `h` is `scale · H^{(order)}(·)` or, without a skew order, 1.
    fn term(&self, kind: GeneratorKind, pinned: &[usize], skew: Option<(u8, f64)>) -> Result<Value> {
        let n = self.n();
        if pinned.iter().any(|&p| self.lambda[p] == f64::NEG_INFINITY) {
            return Ok(Value::ZERO);
        }
        let pinned_l: Vec<f64> = pinned.iter().map(|&p| self.lambda[p]).collect();
        let shift = 0.5 * pinned_l.iter().map(|l| l * l).sum::<f64>();
        let ratio = match (kind, pinned.len()) {
            (GeneratorKind::G, 0) => 1.0,
            (GeneratorKind::GBar, 0) => self.cn / self.family.normalizing_constant(ConstantKind::CNStar, n)?,
            (GeneratorKind::GGBar, 0) => self.cn / self.family.normalizing_constant(ConstantKind::CNStar2, n)?,
            // With every coordinate pinned the kernel is a point mass.
            (_, p) if p == n => self.family.shifted_ratio(kind, n, 0, shift)?,
            (GeneratorKind::GBar, 1) => self.family.constant_ratio(ConstantKind::RatioCOverCStarN1k, n, &pinned_l)?,
            (GeneratorKind::GGBar, 1) => self.family.constant_ratio(ConstantKind::RatioCOverCStar2N1k, n, &pinned_l)?,
            (GeneratorKind::GGBar, 2) => self.family.constant_ratio(ConstantKind::RatioCOverCStar2N2ij, n, &pinned_l)?,
            _ => unreachable!("no such term"),
        };
        if ratio == 0.0 {
            return Ok(Value::ZERO);
        }
        let dim = n - pinned.len();
        let density = DensitySpec { family: self.family, kind, n, dim, shift, norm: self.cn / ratio };
        let weight = match skew {
            None => Weight::Constant(1.0),
            Some((order, scale)) => {
                let offset: f64 = pinned.iter().map(|&p| self.skew.gamma[p] * self.lambda[p]).sum();
                let h = Weight::Skew {
                    kind: self.skew.kind,
                    order,
                    offset,
                    coeffs: drop_indices(&self.skew.gamma, pinned),
                };
                if scale == 1.0 {
                    h
                } else {
                    Weight::Scaled(scale, Box::new(h))
                }
            }
        };
        let lower = drop_indices(self.lambda, pinned);
        let r = tail_expectation(&TailIntegrand { density, weight }, &lower, self.cfg)?;
        Ok(Value { est: Estimate::new(ratio * r.value, ratio * r.error), converged: r.converged })
    }

    fn eval(&self, t: Term) -> Result<Value> {
        match t {
            Term::F => {
                let dist = StandardGse { family: self.family, skew: self.skew.clone() };
                let r = tail_probability(&dist, self.lambda, self.cfg)?;
                Ok(Value { est: r.estimate(), converged: r.converged })
            }
            Term::FStar => self.term(GeneratorKind::GBar, &[], Some((0, 2.0))),
            Term::X1 => self.term(GeneratorKind::GBar, &[], Some((1, 1.0))),
            Term::X2 => self.term(GeneratorKind::GGBar, &[], Some((2, 1.0))),
            Term::W(k) => self.term(GeneratorKind::GBar, &[k], Some((0, 1.0))),
            Term::V(k) => self.term(GeneratorKind::GGBar, &[k], Some((1, 1.0))),
            Term::U(i, j) => self.term(GeneratorKind::GGBar, &[i, j], Some((0, 1.0))),
        }
    }

    fn eval_all(&self, terms: &[Term]) -> Result<Vec<Value>> {
        terms.par_iter().map(|&t| self.eval(t)).collect()
    }

    /// Conditional moments of Z through the full skew-elliptical assembly.
    pub fn moments(&self, with_cov: bool) -> Result<StandardMoments> {
        let n = self.n();
        let mut terms = vec![Term::F, Term::X1];
        terms.extend((0..n).map(Term::W));
        if with_cov {
            terms.extend([Term::FStar, Term::X2]);
            terms.extend((0..n).map(Term::V));
            for i in 0..n {
                terms.extend((i + 1..n).map(|j| Term::U(i, j)));
            }
        }
        let values = self.eval_all(&terms)?;
        let get = |t: Term| values[terms.iter().position(|x| *x == t).expect("term evaluated")].est;
        let converged = values.iter().all(|v| v.converged);
        let f = get(Term::F);
        check_tail(&f, values[0].converged, self.cfg.rel_tol)?;
        let two_over_f = Estimate::exact(2.0) / f;
        let g = &self.skew.gamma;
        let x1 = get(Term::X1);
        let mean: Vec<Estimate> = (0..n).map(|k| two_over_f * (get(Term::W(k)) + x1.scale(g[k]))).collect();
        let cov = with_cov.then(|| {
            let x2 = get(Term::X2);
            let fstar_over_f = get(Term::FStar) / f;
            let mut om = vec![vec![Estimate::ZERO; n]; n];
            for i in 0..n {
                let vi = get(Term::V(i));
                let wi = get(Term::W(i));
                // λ_i W_i vanishes with W_i when λ_i = −∞.
                let lw = if wi.value == 0.0 && wi.error == 0.0 { Estimate::ZERO } else { wi.scale(self.lambda[i]) };
                om[i][i] = two_over_f * (lw + vi.scale(g[i]) + x2.scale(g[i] * g[i])) + fstar_over_f
                    - mean[i] * mean[i];
                for j in i + 1..n {
                    let s = get(Term::U(i, j)) + vi.scale(g[j]) + get(Term::V(j)).scale(g[i]) + x2.scale(g[i] * g[j]);
                    let v = two_over_f * s - mean[i] * mean[j];
                    om[i][j] = v;
                    om[j][i] = v;
                }
            }
            om
        });
        Ok(StandardMoments { tail_prob: f, mean, cov, converged })
    }

    /// The H ≡ ½ reduction: every H-derivative term drops and the remaining
    /// integrals carry no skewing weight.
    pub fn elliptical_moments(&self) -> Result<StandardMoments> {
        let n = self.n();
        let mut terms = vec![Term::F, Term::FStar];
        terms.extend((0..n).map(Term::W));
        for i in 0..n {
            terms.extend((i + 1..n).map(|j| Term::U(i, j)));
        }
        let values: Vec<Value> = terms
            .par_iter()
            .map(|&t| match t {
                Term::F => self.term(GeneratorKind::G, &[], None),
                Term::FStar => self.term(GeneratorKind::GBar, &[], None),
                Term::W(k) => self.term(GeneratorKind::GBar, &[k], None),
                Term::U(i, j) => self.term(GeneratorKind::GGBar, &[i, j], None),
                _ => unreachable!(),
            })
            .collect::<Result<_>>()?;
        let get = |t: Term| values[terms.iter().position(|x| *x == t).expect("term evaluated")].est;
        let converged = values.iter().all(|v| v.converged);
        let f = get(Term::F);
        check_tail(&f, values[0].converged, self.cfg.rel_tol)?;
        let inv_f = Estimate::exact(1.0) / f;
        let mean: Vec<Estimate> = (0..n).map(|k| inv_f * get(Term::W(k))).collect();
        let fstar_over_f = get(Term::FStar) / f;
        let mut om = vec![vec![Estimate::ZERO; n]; n];
        for i in 0..n {
            let wi = get(Term::W(i));
            let lw = if wi.value == 0.0 && wi.error == 0.0 { Estimate::ZERO } else { wi.scale(self.lambda[i]) };
            om[i][i] = inv_f * lw + fstar_over_f - mean[i] * mean[i];
            for j in i + 1..n {
                let v = inv_f * get(Term::U(i, j)) - mean[i] * mean[j];
                om[i][j] = v;
                om[j][i] = v;
            }
        }
        Ok(StandardMoments { tail_prob: f, mean, cov: Some(om), converged })
    }
}

/// Var(Z | Z > λ) for a univariate law, written out in one dimension:
/// the pinned terms are point evaluations and the rest are 1-D integrals.
pub(super) fn univariate_tail_variance(dist: &GseDistribution, lambda: f64, cfg: &IntegrationConfig) -> Result<Estimate> {
    let fam = dist.generator();
    let skew = dist.skew();
    let gam = skew.gamma[0];
    let c1 = fam.normalizing_constant(ConstantKind::CN, 1)?;
    let integral = |kind: GeneratorKind, cst: ConstantKind, order: u8| -> Result<(Estimate, bool)> {
        let c = fam.normalizing_constant(cst, 1)?;
        let density = DensitySpec { family: fam, kind, n: 1, dim: 1, shift: 0.0, norm: c };
        let weight = Weight::Skew { kind: skew.kind, order, offset: 0.0, coeffs: vec![gam] };
        let r = tail_expectation(&TailIntegrand { density, weight }, &[lambda], cfg)?;
        Ok((Estimate::new(r.value, r.error).scale(c1 / c), r.converged))
    };
    let (f, f_ok) = integral(GeneratorKind::G, ConstantKind::CN, 0)?;
    let f = f.scale(2.0);
    check_tail(&f, f_ok, cfg.rel_tol)?;
    let (fstar, _) = integral(GeneratorKind::GBar, ConstantKind::CNStar, 0)?;
    let (x1, _) = integral(GeneratorKind::GBar, ConstantKind::CNStar, 1)?;
    let (x2, _) = integral(GeneratorKind::GGBar, ConstantKind::CNStar2, 2)?;
    let (w, v) = if lambda == f64::NEG_INFINITY {
        (0.0, 0.0)
    } else {
        let u = 0.5 * lambda * lambda;
        (
            c1 * fam.eval(GeneratorKind::GBar, 1, u)? * skew.kind.eval_pv(0, gam * lambda),
            c1 * fam.eval(GeneratorKind::GGBar, 1, u)? * skew.kind.eval_pv(1, gam * lambda),
        )
    };
    let two_over_f = Estimate::exact(2.0) / f;
    let m = two_over_f * (Estimate::exact(w) + x1.scale(gam));
    let lw = if w == 0.0 { 0.0 } else { lambda * w };
    Ok(two_over_f * (Estimate::exact(lw + gam * v) + x2.scale(gam * gam)) + fstar.scale(2.0) / f - m * m)
}
