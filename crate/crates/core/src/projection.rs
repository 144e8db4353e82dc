//! KL-optimal reduction of a Gaussian covariance to the diagonal and scalar
//! families.
//!
//! Minimizing `KL(N(mu, V) || N(mu, diag(v)))` over `v` gives `v = diag(V)`;
//! restricting further to `v I` gives the average of the diagonal. The mean
//! passes through untouched in both cases.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-10;

/// Posterior covariance in one of the supported representations.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSummary {
    FullMatrix(DMatrix<f64>),
    DiagonalVector(Vec<f64>),
    Scalar(f64),
    /// Time-invariant variance shared by every player.
    Fixed(f64),
}

impl CovarianceSummary {
    pub fn kind(&self) -> &'static str {
        match self {
            CovarianceSummary::FullMatrix(_) => "matrix",
            CovarianceSummary::DiagonalVector(_) => "vector",
            CovarianceSummary::Scalar(_) => "scalar",
            CovarianceSummary::Fixed(_) => "fixed",
        }
    }

    /// Marginal variance of player `m`.
    pub fn variance(&self, m: usize) -> f64 {
        match self {
            CovarianceSummary::FullMatrix(v) => v[(m, m)],
            CovarianceSummary::DiagonalVector(v) => v[m],
            CovarianceSummary::Scalar(v) | CovarianceSummary::Fixed(v) => *v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CovarianceSummary::FullMatrix(v) => check_psd(v),
            CovarianceSummary::DiagonalVector(v) => {
                if v.iter().all(|&x| x >= 0.0) {
                    Ok(())
                } else {
                    Err(Error::domain("negative variance"))
                }
            }
            CovarianceSummary::Scalar(v) | CovarianceSummary::Fixed(v) => {
                if *v >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("negative variance"))
                }
            }
        }
    }
}

/// Checks symmetry and positive semidefiniteness with an unpivoted
/// Cholesky sweep that tolerates pivots down to `-1e-10`.
pub fn check_psd(v: &DMatrix<f64>) -> Result<()> {
    let n = v.nrows();
    if v.ncols() != n {
        return Err(Error::domain("covariance must be square"));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (v[(i, j)], v[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::domain(format!("covariance not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = v[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot < -PIVOT_TOL {
            return Err(Error::domain(format!("covariance not positive semidefinite (pivot {pivot:e})")));
        }
        if pivot <= PIVOT_TOL {
            // rank-deficient direction; the remaining entries of the column must vanish
            for i in (j + 1)..n {
                let mut r = v[(i, j)];
                for k in 0..j {
                    r -= l[(i, k)] * l[(j, k)];
                }
                if r.abs() > PIVOT_TOL.sqrt() {
                    return Err(Error::domain("covariance not positive semidefinite"));
                }
            }
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut r = v[(i, j)];
            for k in 0..j {
                r -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = r / d;
        }
    }
    Ok(())
}

/// Diagonal-family projection: extracts `diag(V)`.
pub fn project_to_diagonal(v: &DMatrix<f64>) -> Vec<f64> {
    v.diagonal().iter().copied().collect()
}

/// Scalar-family projection: the arithmetic mean of the variances.
pub fn project_to_scalar(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::domain("cannot project an empty variance vector"));
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}
