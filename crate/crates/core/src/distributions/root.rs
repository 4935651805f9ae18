use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which square root of Σ standardizes the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootConvention {
    /// Symmetric spectral root, R = R^T, R·R = Σ.
    #[default]
    Symmetric,
    /// Lower Cholesky factor, R·R^T = Σ.
    Cholesky,
}

impl RootConvention {
    pub fn name(&self) -> &'static str {
        match self {
            RootConvention::Symmetric => "symmetric",
            RootConvention::Cholesky => "cholesky",
        }
    }
}

/// Checks symmetry and that every eigenvalue exceeds 1e-12 times the largest.
pub fn check_spd(sigma: &DMatrix<f64>, name: &str) -> Result<()> {
    let n = sigma.nrows();
    if sigma.ncols() != n || n == 0 {
        return Err(Error::NotPositiveDefinite(format!("{name} (not a square matrix)")));
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite(format!("{name} (non-finite entries)")));
    }
    let scale = sigma.amax();
    for i in 0..n {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotPositiveDefinite(format!(
                    "{name} (not symmetric at entry ({}, {}))",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let eig = SymmetricEigen::new(sigma.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::NotPositiveDefinite(format!("{name} (smallest eigenvalue {min:e}, largest {max:e})")));
    }
    Ok(())
}

/// Square root of an SPD matrix under the given convention.
pub fn matrix_root(sigma: &DMatrix<f64>, method: RootConvention) -> Result<DMatrix<f64>> {
    check_spd(sigma, "sigma")?;
    // Symmetrize so round-off in the input does not leak into the root.
    let s = (sigma + sigma.transpose()) * 0.5;
    match method {
        RootConvention::Cholesky => s
            .cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::NotPositiveDefinite("sigma".into())),
        RootConvention::Symmetric => {
            let eig = SymmetricEigen::new(s);
            let v = &eig.eigenvectors;
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
            let r = v * d * v.transpose();
            Ok((&r + r.transpose()) * 0.5)
        }
    }
}
