//! Elliptical and generalized skew-elliptical (GSE) distributions.

mod marginal;
mod root;
mod sampling;

pub use marginal::{VarMethod, MC_VAR_MIN_SAMPLES};
pub use root::{check_spd, matrix_root, RootConvention};
pub use sampling::{logistic_radius_quantile, sample_chunks, sample_gse, SampleMatrix, SAMPLE_CHUNK};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generators::{ConstantKind, GeneratorFamily, GeneratorKind};
use crate::skewing::{SkewKind, SkewingFunction};

/// Y = μ + R·Z where Z has density `2 c_n g_n(½|z|²) H(γᵀz)` and `R` is the
/// chosen root of Σ.
#[derive(Debug, Clone)]
pub struct GseDistribution {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    generator: GeneratorFamily,
    skew: SkewingFunction,
    root_convention: RootConvention,
    root: DMatrix<f64>,
    root_inv: DMatrix<f64>,
    abs_det_root: f64,
    cn: f64,
}

impl GseDistribution {
    pub fn new(
        mu: Vec<f64>,
        sigma: DMatrix<f64>,
        generator: GeneratorFamily,
        skew: SkewingFunction,
        root_convention: RootConvention,
    ) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::Domain("distribution dimension must be at least 1".into()));
        }
        if n > 10 {
            return Err(Error::Domain(format!("dimension {n} exceeds the supported maximum of 10")));
        }
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::Dimension { expected: n, found: sigma.nrows().max(sigma.ncols()) });
        }
        if skew.gamma.len() != n {
            return Err(Error::Dimension { expected: n, found: skew.gamma.len() });
        }
        if mu.iter().chain(skew.gamma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("mu and gamma must be finite".into()));
        }
        if let GeneratorFamily::StudentT { dof } = generator {
            GeneratorFamily::student_t(dof)?;
        }
        if let SkewKind::StudentTCdf { dof } = skew.kind {
            SkewKind::student_t(dof)?;
        }
        check_spd(&sigma, "sigma")?;
        let root = matrix_root(&sigma, root_convention)?;
        let root_inv = root
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotPositiveDefinite("sigma".into()))?;
        let abs_det_root = root.determinant().abs();
        let cn = generator.normalizing_constant(ConstantKind::CN, n)?;
        Ok(GseDistribution {
            mu: DVector::from_vec(mu),
            sigma,
            generator,
            skew,
            root_convention,
            root,
            root_inv,
            abs_det_root,
            cn,
        })
    }

    /// Elliptical distribution (H ≡ ½).
    pub fn elliptical(
        mu: Vec<f64>,
        sigma: DMatrix<f64>,
        generator: GeneratorFamily,
        root_convention: RootConvention,
    ) -> Result<Self> {
        let n = mu.len();
        Self::new(mu, sigma, generator, SkewingFunction::half(n), root_convention)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }
    pub fn generator(&self) -> GeneratorFamily {
        self.generator
    }
    pub fn skew(&self) -> &SkewingFunction {
        &self.skew
    }
    pub fn root_convention(&self) -> RootConvention {
        self.root_convention
    }
    pub fn root(&self) -> &DMatrix<f64> {
        &self.root
    }
    pub fn root_inv(&self) -> &DMatrix<f64> {
        &self.root_inv
    }
    pub fn is_elliptical(&self) -> bool {
        self.skew.kind.is_half()
    }

    /// Same law shifted by `b`.
    pub fn translated(&self, b: &[f64]) -> Result<Self> {
        if b.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: b.len() });
        }
        let mu: Vec<f64> = self.mu.iter().zip(b).map(|(m, s)| m + s).collect();
        Self::new(mu, self.sigma.clone(), self.generator, self.skew.clone(), self.root_convention)
    }

    /// Law of `a·Y` for `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("scale factor must be positive, got {a}")));
        }
        let mu: Vec<f64> = self.mu.iter().map(|m| a * m).collect();
        Self::new(mu, &self.sigma * (a * a), self.generator, self.skew.clone(), self.root_convention)
    }

    /// z = R⁻¹(y − μ)
    pub fn standardize(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: y.len() });
        }
        let d = DVector::from_column_slice(y) - &self.mu;
        Ok((&self.root_inv * d).iter().copied().collect())
    }

    /// y = μ + R·z
    pub fn unstandardize(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: z.len() });
        }
        let y = &self.mu + &self.root * DVector::from_column_slice(z);
        Ok(y.iter().copied().collect())
    }

    /// Density `(2c_n/√|Σ|) g_n(½(y−μ)ᵀΣ⁻¹(y−μ)) H(γᵀR⁻¹(y−μ))`.
    pub fn pdf(&self, y: &[f64]) -> Result<f64> {
        let z = self.standardize(y)?;
        Ok(self.standard_pdf(&z) / self.abs_det_root)
    }

    /// Density of the standardized vector Z.
    pub fn standard_pdf(&self, z: &[f64]) -> f64 {
        let q: f64 = z.iter().map(|v| v * v).sum();
        let g = self.generator.eval_unchecked(GeneratorKind::G, self.dim(), 0.5 * q);
        2.0 * self.cn * g * self.skew.eval_linear(0, z)
    }

    /// The elliptical density (H ≡ ½ version) at `y`.
    pub fn elliptical_pdf(&self, y: &[f64]) -> Result<f64> {
        let z = self.standardize(y)?;
        let q: f64 = z.iter().map(|v| v * v).sum();
        Ok(self.cn * self.generator.eval_unchecked(GeneratorKind::G, self.dim(), 0.5 * q) / self.abs_det_root)
    }

    /// VaR_q(Y_k) for the `k`-th margin.
    pub fn marginal_var(&self, k: usize, q: f64, method: VarMethod) -> Result<crate::Estimate> {
        let (qs, err) = self.standardized_margin_quantile(k, q, method)?;
        let norm = self.row_norm(k);
        Ok(crate::Estimate::new(self.mu[k] + norm * qs, norm * err))
    }

    /// Euclidean norm of row `k` of the root; `Y_k − μ_k = norm·eᵀZ` with `e`
    /// the unit row direction.
    pub fn row_norm(&self, k: usize) -> f64 {
        self.root.row(k).norm()
    }
}
