//! Density generators g, their tail integrals Ḡ and 𝒢̄, normalizing
//! constants and the shifted-kernel constant ratios.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_upper, Tolerance};
use crate::special::{gamma, ln_gamma};

/// Kernel volumes below `e^−800` are reported as 0.
const LN_UNDERFLOW: f64 = -800.0;

/// The four registered generator families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeneratorFamily {
    Normal,
    StudentT { dof: f64 },
    Logistic,
    Laplace,
}

/// Which of the three generator functions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// g_n
    G,
    /// Ḡ_n(u) = ∫_u^∞ g_n
    GBar,
    /// 𝒢̄_n(u) = ∫_u^∞ Ḡ_n
    GGBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantKind {
    CN,
    CNStar,
    CNStar2,
    RatioCOverCStarN1k,
    RatioCOverCStar2N1k,
    RatioCOverCStar2N2ij,
}

impl GeneratorKind {
    fn name(self) -> &'static str {
        match self {
            GeneratorKind::G => "g",
            GeneratorKind::GBar => "Gbar",
            GeneratorKind::GGBar => "GGbar",
        }
    }
}

impl GeneratorFamily {
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(Error::Parameter(format!("Student-t degrees of freedom must be positive, got {dof}")));
        }
        Ok(GeneratorFamily::StudentT { dof })
    }

    pub fn dof(&self) -> Option<f64> {
        match *self {
            GeneratorFamily::StudentT { dof } => Some(dof),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorFamily::Normal => "normal",
            GeneratorFamily::StudentT { .. } => "student-t",
            GeneratorFamily::Logistic => "logistic",
            GeneratorFamily::Laplace => "laplace",
        }
    }

    /// Requires `m > bound` for Student-t; other families always pass.
    pub fn require_dof_above(&self, bound: f64, what: &str) -> Result<()> {
        match *self {
            GeneratorFamily::StudentT { dof } if dof <= bound => Err(Error::Parameter(format!(
                "{what} requires Student-t degrees of freedom m > {bound}, got m = {dof}"
            ))),
            _ => Ok(()),
        }
    }

    fn check_kind(&self, kind: GeneratorKind, n: usize) -> Result<()> {
        if let GeneratorFamily::StudentT { dof } = *self {
            let n = n as f64;
            let ok = match kind {
                GeneratorKind::G => true,
                GeneratorKind::GBar => dof + n > 2.0,
                GeneratorKind::GGBar => dof + n > 4.0,
            };
            if !ok {
                return Err(Error::Parameter(format!(
                    "Student-t {} with m = {dof}, n = {n} needs m + n > {}",
                    kind.name(),
                    if kind == GeneratorKind::GBar { 2 } else { 4 }
                )));
            }
        }
        Ok(())
    }

    /// Student-t kernels are `k·(1 + 2u/m)^(−p)`; returns `(ln k, p)`.
    fn t_params(dof: f64, kind: GeneratorKind, n: usize) -> (f64, f64) {
        let (m, n) = (dof, n as f64);
        match kind {
            GeneratorKind::G => (0.0, 0.5 * (m + n)),
            GeneratorKind::GBar => ((m / (m + n - 2.0)).ln(), 0.5 * (m + n - 2.0)),
            GeneratorKind::GGBar => ((m * m / ((m + n - 2.0) * (m + n - 4.0))).ln(), 0.5 * (m + n - 4.0)),
        }
    }

    /// Generator value with argument checks.
    pub fn eval(&self, kind: GeneratorKind, n: usize, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("generator argument must be nonnegative, got {u}")));
        }
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        self.check_kind(kind, n)?;
        Ok(self.eval_unchecked(kind, n, u))
    }

    /// Generator value without argument checks; `u = ∞` gives 0.
    #[inline]
    pub fn eval_unchecked(&self, kind: GeneratorKind, n: usize, u: f64) -> f64 {
        match *self {
            GeneratorFamily::Normal => (-u).exp(),
            GeneratorFamily::StudentT { dof } => {
                let (lk, p) = Self::t_params(dof, kind, n);
                (lk - p * (2.0 * u / dof).ln_1p()).exp()
            }
            GeneratorFamily::Logistic => {
                let e = (-u).exp();
                match kind {
                    GeneratorKind::G => e / ((1.0 + e) * (1.0 + e)),
                    GeneratorKind::GBar => e / (1.0 + e),
                    GeneratorKind::GGBar => e.ln_1p(),
                }
            }
            GeneratorFamily::Laplace => {
                let r = (2.0 * u).sqrt();
                let e = (-r).exp();
                match kind {
                    GeneratorKind::G => e,
                    GeneratorKind::GBar => (1.0 + r) * e,
                    GeneratorKind::GGBar => (3.0 + 2.0 * u + 3.0 * r) * e,
                }
            }
        }
    }

    /// `ln K_n(a)`, finite where [`eval_unchecked`](Self::eval_unchecked) underflows.
    fn ln_eval(&self, kind: GeneratorKind, n: usize, a: f64) -> f64 {
        let base = match *self {
            GeneratorFamily::StudentT { dof } => Self::t_params(dof, kind, n).0,
            GeneratorFamily::Logistic => match kind {
                GeneratorKind::G => -(4f64.ln()),
                GeneratorKind::GBar => -(2f64.ln()),
                GeneratorKind::GGBar => 2f64.ln().ln(),
            },
            GeneratorFamily::Laplace if kind == GeneratorKind::GGBar => 3f64.ln(),
            _ => 0.0,
        };
        base + self.ln_ratio(kind, n, 0.0, a)
    }

    /// `ln K_n(a + s) − ln K_n(a)` without cancellation.
    fn ln_ratio(&self, kind: GeneratorKind, n: usize, a: f64, s: f64) -> f64 {
        if s == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        if s == 0.0 {
            return 0.0;
        }
        let u = a + s;
        match *self {
            GeneratorFamily::Normal => -s,
            GeneratorFamily::StudentT { dof } => {
                let p = Self::t_params(dof, kind, n).1;
                -p * (2.0 * s / (dof + 2.0 * a)).ln_1p()
            }
            GeneratorFamily::Logistic => {
                let (e0, e1) = ((-a).exp(), (-u).exp());
                match kind {
                    GeneratorKind::G => -s - 2.0 * (e1.ln_1p() - e0.ln_1p()),
                    GeneratorKind::GBar => -s - (e1.ln_1p() - e0.ln_1p()),
                    GeneratorKind::GGBar => ln_ln1p_exp(u) - ln_ln1p_exp(a),
                }
            }
            GeneratorFamily::Laplace => {
                let (r0, r1) = ((2.0 * a).sqrt(), (2.0 * u).sqrt());
                let poly = |r: f64| match kind {
                    GeneratorKind::G => 1.0,
                    GeneratorKind::GBar => 1.0 + r,
                    GeneratorKind::GGBar => 3.0 + r * r + 3.0 * r,
                };
                (poly(r1) / poly(r0)).ln() - 2.0 * s / (r0 + r1)
            }
        }
    }

    /// `∫_{ℝ^d} K_n(½|w|² + a) dw` for generator kind `K`. For `d = 0` this
    /// is `K_n(a)`. Closed forms are used where they exist.
    pub fn kernel_volume(&self, kind: GeneratorKind, n: usize, d: usize, a: f64) -> Result<f64> {
        self.check_kind(kind, n)?;
        if !(a >= 0.0) {
            return Err(Error::Domain(format!("shift must be nonnegative, got {a}")));
        }
        if d == 0 {
            return Ok(self.eval_unchecked(kind, n, a));
        }
        if a == f64::INFINITY {
            return Ok(0.0);
        }
        let df = d as f64;
        match *self {
            GeneratorFamily::Normal => Ok((0.5 * df * (2.0 * PI).ln() - a).exp()),
            GeneratorFamily::StudentT { dof } => {
                let (lk, p) = Self::t_params(dof, kind, n);
                if p <= 0.5 * df {
                    return Err(Error::Parameter(format!(
                        "Student-t {} kernel with m = {dof} is not integrable over {d} dimensions",
                        kind.name()
                    )));
                }
                let ln = lk + 0.5 * df * (PI * (dof + 2.0 * a)).ln() - p * (2.0 * a / dof).ln_1p()
                    + ln_gamma(p - 0.5 * df)
                    - ln_gamma(p);
                Ok(ln.exp())
            }
            GeneratorFamily::Logistic if d == 1 => Ok(self.line_volume(kind, n, a)),
            GeneratorFamily::Logistic => {
                let (mu, s) = match kind {
                    GeneratorKind::G => (2.0, 0.5 * df),
                    GeneratorKind::GBar => (1.0, 0.5 * df),
                    GeneratorKind::GGBar => (1.0, 0.5 * df + 1.0),
                };
                let z = -(-a).exp();
                Ok((0.5 * df * (2.0 * PI).ln() - a).exp() * hurwitz_lerch(mu, z, s, 1.0)?)
            }
            GeneratorFamily::Laplace if a == 0.0 => {
                let poly = match kind {
                    GeneratorKind::G => 1.0,
                    GeneratorKind::GBar => df + 1.0,
                    GeneratorKind::GGBar => (df + 1.0) * (df + 3.0),
                };
                Ok((2.0f64.ln() + 0.5 * df * PI.ln() + ln_gamma(df) - ln_gamma(0.5 * df)).exp() * poly)
            }
            GeneratorFamily::Laplace if kind == GeneratorKind::G && (2.0 * a).sqrt() >= 1e-8 => {
                Ok(laplace_volume((2.0 * a).sqrt(), d))
            }
            GeneratorFamily::Laplace if kind == GeneratorKind::G => self.kernel_volume(kind, n, d, 0.0),
            GeneratorFamily::Laplace => self.kernel_volume_quadrature(kind, n, d, a),
        }
    }

    /// `∫_ℝ K(½w² + a) dw` by the trapezoidal rule. The logistic kernels are
    /// analytic in a strip of half-width at least √π around the real line,
    /// so step 0.2 is exact to round-off.
    fn line_volume(&self, kind: GeneratorKind, n: usize, a: f64) -> f64 {
        const H: f64 = 0.2;
        const STEPS: usize = 48;
        let ln_k0 = self.ln_eval(kind, n, a);
        let mut sum = 0.5;
        for j in 1..=STEPS {
            let w = H * j as f64;
            sum += self.ln_ratio(kind, n, a, 0.5 * w * w).exp();
        }
        (ln_k0 + (2.0 * H * sum).ln()).exp()
    }

    /// Same as [`kernel_volume`](Self::kernel_volume) but always by radial
    /// quadrature: `(2π)^{d/2}/Γ(d/2) · 2∫₀^∞ t^{d−1} K(t² + a) dt`.
    pub fn kernel_volume_quadrature(&self, kind: GeneratorKind, n: usize, d: usize, a: f64) -> Result<f64> {
        self.check_kind(kind, n)?;
        if d == 0 {
            return Ok(self.eval_unchecked(kind, n, a));
        }
        let df = d as f64;
        // Work relative to K(a) in logs so large shifts do not underflow.
        let ln_k0 = self.ln_eval(kind, n, a);
        if ln_k0 + 0.5 * df * a.ln_1p() < LN_UNDERFLOW {
            return Ok(0.0);
        }
        let scale = match *self {
            GeneratorFamily::StudentT { dof } => (dof + 2.0 * a).sqrt().max(1.0),
            GeneratorFamily::Laplace => (2.0 * a).sqrt().sqrt().max(1.0),
            _ => 1.0,
        };
        let tol = Tolerance::new(1e-13, 1e-12, 4000);
        let r = integrate_upper(
            |t| 2.0 * t.powi(d as i32 - 1) * self.ln_ratio(kind, n, a, t * t).exp(),
            0.0,
            scale,
            &tol,
        );
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Integration(format!(
                "radial integral for {} {} did not converge",
                self.name(),
                kind.name()
            )));
        }
        Ok((0.5 * df * (2.0 * PI).ln() - ln_gamma(0.5 * df) + ln_k0).exp() * r.value)
    }

    /// c_n, c_n* or c_n** (the kernel normalizing constants over ℝ^n).
    pub fn normalizing_constant(&self, kind: ConstantKind, n: usize) -> Result<f64> {
        let gk = self.constant_generator(kind, n)?;
        Ok(1.0 / self.kernel_volume(gk, n, n, 0.0)?)
    }

    /// Quadrature fallback for [`normalizing_constant`](Self::normalizing_constant).
    pub fn normalizing_constant_quadrature(&self, kind: ConstantKind, n: usize) -> Result<f64> {
        let gk = self.constant_generator(kind, n)?;
        Ok(1.0 / self.kernel_volume_quadrature(gk, n, n, 0.0)?)
    }

    fn constant_generator(&self, kind: ConstantKind, n: usize) -> Result<GeneratorKind> {
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        match kind {
            ConstantKind::CN => Ok(GeneratorKind::G),
            ConstantKind::CNStar => {
                self.require_dof_above(2.0, "c_n*")?;
                Ok(GeneratorKind::GBar)
            }
            ConstantKind::CNStar2 => {
                self.require_dof_above(4.0, "c_n**")?;
                Ok(GeneratorKind::GGBar)
            }
            _ => Err(Error::Domain(format!("{kind:?} is a ratio, not a normalizing constant"))),
        }
    }

    /// c_n / c*_{n−1,k}, c_n / c**_{n−1,k} or c_n / c**_{n−2,ij} at the given
    /// λ values (one value for the n−1 ratios, two for the n−2 ratio).
    pub fn constant_ratio(&self, kind: ConstantKind, n: usize, lambda: &[f64]) -> Result<f64> {
        let (gk, d, need) = match kind {
            ConstantKind::RatioCOverCStarN1k => {
                self.require_dof_above(2.0, "c_n/c*_{n-1,k}")?;
                (GeneratorKind::GBar, n.checked_sub(1), 1)
            }
            ConstantKind::RatioCOverCStar2N1k => {
                self.require_dof_above(4.0, "c_n/c**_{n-1,k}")?;
                (GeneratorKind::GGBar, n.checked_sub(1), 1)
            }
            ConstantKind::RatioCOverCStar2N2ij => {
                self.require_dof_above(4.0, "c_n/c**_{n-2,ij}")?;
                (GeneratorKind::GGBar, n.checked_sub(2), 2)
            }
            _ => return Err(Error::Domain(format!("{kind:?} is not a ratio kind"))),
        };
        let min_n = need + 1;
        let d = match d {
            Some(d) if n >= min_n => d,
            _ => return Err(Error::Domain(format!("{kind:?} needs n >= {min_n}, got {n}"))),
        };
        if lambda.len() != need {
            return Err(Error::Dimension { expected: need, found: lambda.len() });
        }
        let a = 0.5 * lambda.iter().map(|l| l * l).sum::<f64>();
        self.shifted_ratio(gk, n, d, a)
    }

    /// `c_n · ∫_{ℝ^d} K_n(½|w|² + a) dw`: the ratio of c_n to the
    /// normalizing constant of the shifted d-dimensional kernel.
    pub fn shifted_ratio(&self, kind: GeneratorKind, n: usize, d: usize, a: f64) -> Result<f64> {
        let cn = self.normalizing_constant(ConstantKind::CN, n)?;
        Ok(cn * self.kernel_volume(kind, n, d, a)?)
    }
}

/// `∫_{ℝ^d} exp(−√(|w|² + c²)) dw = 2^{(d+1)/2} π^{(d−1)/2} c^ν K_ν(c)` with
/// `ν = (d+1)/2`, for `c > 0`.
fn laplace_volume(c: f64, d: usize) -> f64 {
    let nu = 0.5 * (d as f64 + 1.0);
    let ln_pre = nu * 2f64.ln() + 0.5 * (d as f64 - 1.0) * PI.ln() + nu * c.ln();
    if d % 2 == 1 {
        (ln_pre).exp() * puruspe::Kn(d.div_ceil(2) as u32, c)
    } else {
        // K_{k+½}(c) = √(π/2c) e^{−c} Σ_j (k+j)!/(j!(k−j)!) (2c)^{−j}
        let k = d / 2;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..=k {
            term *= ((k + j) * (k + 1 - j)) as f64 / (j as f64 * 2.0 * c);
            sum += term;
        }
        (ln_pre + 0.5 * (PI / (2.0 * c)).ln() - c).exp() * sum
    }
}

/// `ln ln(1 + e^{−u})` without underflow for large `u`.
fn ln_ln1p_exp(u: f64) -> f64 {
    let e = (-u).exp();
    if e < 1e-8 {
        -u + (-0.5 * e).ln_1p()
    } else {
        e.ln_1p().ln()
    }
}

/// Generalized Hurwitz–Lerch zeta Ψ*_μ(z, s, a) through its integral
/// representation `Γ(s)⁻¹ ∫₀^∞ t^{s−1} e^{−at} (1 − z e^{−t})^{−μ} dt`.
pub fn hurwitz_lerch(mu: f64, z: f64, s: f64, a: f64) -> Result<f64> {
    if !(mu > 0.0) || !(a > 0.0) || !(s > 0.0) || !(-1.0..1.0).contains(&z) {
        return Err(Error::Domain(format!(
            "Hurwitz-Lerch zeta needs mu > 0, a > 0, s > 0 and -1 <= z < 1 (mu={mu}, z={z}, s={s}, a={a})"
        )));
    }
    if z == 0.0 {
        return Ok(a.powf(-s));
    }
    let tol = Tolerance::new(1e-14, 1e-12, 4000);
    let (value, converged) = if s < 1.0 {
        // x = t^s removes the endpoint singularity.
        let inv = 1.0 / s;
        let res = integrate_upper(
            |x| {
                let t = x.powf(inv);
                (-a * t).exp() * (1.0 - z * (-t).exp()).powf(-mu)
            },
            0.0,
            a.powf(-s),
            &tol,
        );
        (res.value / gamma(s + 1.0), res.converged)
    } else {
        let lg = ln_gamma(s);
        let res = integrate_upper(
            |t| {
                if t == 0.0 {
                    return if s == 1.0 { (1.0 - z).powf(-mu) / gamma(s) } else { 0.0 };
                }
                ((s - 1.0) * t.ln() - a * t - lg).exp() * (1.0 - z * (-t).exp()).powf(-mu)
            },
            0.0,
            (s / a).max(1.0 / a),
            &tol,
        );
        (res.value, res.converged)
    };
    if !converged || !value.is_finite() {
        return Err(Error::Integration(format!("Hurwitz-Lerch zeta at (mu={mu}, z={z}, s={s}, a={a})")));
    }
    Ok(value)
}
