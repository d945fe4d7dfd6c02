use faer::{Mat, MatRef};

use super::gso::Gso;
use crate::error::{Error, Result};
use crate::linalg::{pinv_solve, vec_of};

/// Polynomial graph filter, held as coefficients, as a dense matrix, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFilter {
    coeffs: Option<Vec<f64>>,
    matrix: Option<Mat<f64>>,
}

/// Least-squares fit of polynomial coefficients.
#[derive(Debug, Clone)]
pub struct CoeffFit {
    pub coeffs: Vec<f64>,
    pub rank: usize,
    pub rank_deficient: bool,
}

impl GraphFilter {
    pub fn from_coeffs(h: Vec<f64>) -> Self {
        Self {
            coeffs: Some(h),
            matrix: None,
        }
    }

    pub fn from_matrix(h: Mat<f64>) -> Self {
        Self {
            coeffs: None,
            matrix: Some(h),
        }
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    pub fn matrix(&self) -> Option<MatRef<'_, f64>> {
        self.matrix.as_ref().map(|m| m.as_ref())
    }

    /// Adds the dense matrix computed from the coefficients on `gso`.
    pub fn materialize(self, gso: &Gso) -> Result<Self> {
        if self.matrix.is_some() {
            return Ok(self);
        }
        let h = self.coeffs.ok_or_else(|| {
            Error::InvalidArgument("filter has neither coefficients nor matrix".into())
        })?;
        build_filter(gso, &h)
    }

    /// Adds coefficients of order `r` fitted to the matrix on `gso`.
    pub fn with_fitted_coeffs(self, gso: &Gso, r: usize) -> Result<(Self, CoeffFit)> {
        let m = self
            .matrix
            .ok_or_else(|| Error::InvalidArgument("filter has no matrix form".into()))?;
        let fit = poly_basis_fit(m.as_ref(), gso.matrix(), r)?;
        Ok((
            Self {
                coeffs: Some(fit.coeffs.clone()),
                matrix: Some(m),
            },
            fit,
        ))
    }
}

/// `H = Σ_r h_r S^r` by Horner's rule.
pub fn build_filter(gso: &Gso, h: &[f64]) -> Result<GraphFilter> {
    let n = gso.n();
    if h.is_empty() || h.len() > n {
        return Err(Error::InvalidArgument(format!(
            "filter order must lie in 1..={n}, got {}",
            h.len()
        )));
    }
    let s = gso.matrix();
    let r = h.len();
    let mut acc = Mat::<f64>::identity(n, n) * faer::Scale(h[r - 1]);
    for k in (0..r - 1).rev() {
        acc = &acc * s;
        for i in 0..n {
            acc[(i, i)] += h[k];
        }
    }
    Ok(GraphFilter {
        coeffs: Some(h.to_vec()),
        matrix: Some(acc),
    })
}

/// `argmin_h ‖vec(H) − [vec(I), vec(S), …, vec(S^{r-1})] h‖`, minimum norm.
pub fn poly_basis_fit(h: MatRef<'_, f64>, s: MatRef<'_, f64>, r: usize) -> Result<CoeffFit> {
    let n = s.nrows();
    if s.ncols() != n || h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "filter {}x{} against operator {}x{}",
            h.nrows(),
            h.ncols(),
            s.nrows(),
            s.ncols()
        )));
    }
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "filter order must lie in 1..={n}, got {r}"
        )));
    }
    let mut basis = Mat::<f64>::zeros(n * n, r);
    let mut power = Mat::<f64>::identity(n, n);
    for k in 0..r {
        for j in 0..n {
            for i in 0..n {
                basis[(i + n * j, k)] = power[(i, j)];
            }
        }
        if k + 1 < r {
            power = &power * s;
        }
    }
    let sol = pinv_solve(basis.as_ref(), &vec_of(h))?;
    Ok(CoeffFit {
        coeffs: sol.x,
        rank: sol.rank,
        rank_deficient: sol.rank_deficient,
    })
}
