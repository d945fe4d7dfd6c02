use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, Side};

use super::gso::Gso;
use crate::error::{Error, Result};

/// Reconstruction tolerance (relative Frobenius) below which `S` counts as diagonalizable.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `S = V diag(λ) V⁻¹`, stored in complex arithmetic so directed graphs are covered.
///
/// Symmetric operators go through the self-adjoint solver, giving a real
/// orthogonal `V` with `V⁻¹ = Vᵀ`.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    eigvecs: Mat<c64>,
    eigvals: Vec<c64>,
    inv_eigvecs: Mat<c64>,
    real: bool,
}

impl SpectralDecomp {
    pub fn of(gso: &Gso) -> Result<Self> {
        let s = gso.matrix();
        let n = gso.n();
        let dec = if gso.is_symmetric() {
            let evd = s.self_adjoint_eigen(Side::Lower).map_err(|e| {
                Error::Decomposition(format!("symmetric eigendecomposition: {e:?}"))
            })?;
            let u = evd.U();
            let d = evd.S().column_vector();
            Self {
                eigvecs: Mat::from_fn(n, n, |i, j| c64::new(u[(i, j)], 0.0)),
                eigvals: (0..n).map(|i| c64::new(d[i], 0.0)).collect(),
                inv_eigvecs: Mat::from_fn(n, n, |i, j| c64::new(u[(j, i)], 0.0)),
                real: true,
            }
        } else {
            let evd = s
                .eigen()
                .map_err(|e| Error::Decomposition(format!("eigendecomposition: {e:?}")))?;
            let v = evd.U().to_owned();
            let d = evd.S().column_vector();
            let eigvals: Vec<c64> = (0..n).map(|i| d[i]).collect();
            let inv = v.partial_piv_lu().inverse();
            let real = eigvals.iter().all(|l| l.im == 0.0)
                && (0..n).all(|j| (0..n).all(|i| v[(i, j)].im == 0.0));
            Self {
                eigvecs: v,
                eigvals,
                inv_eigvecs: inv,
                real,
            }
        };
        let err = dec.reconstruction_error(gso);
        if !(err < RECONSTRUCTION_TOL) {
            return Err(Error::Decomposition(format!(
                "operator is not numerically diagonalizable (reconstruction error {err:.3e})"
            )));
        }
        Ok(dec)
    }

    pub fn n(&self) -> usize {
        self.eigvals.len()
    }

    pub fn eigvecs(&self) -> &Mat<c64> {
        &self.eigvecs
    }

    pub fn eigvals(&self) -> &[c64] {
        &self.eigvals
    }

    pub fn inv_eigvecs(&self) -> &Mat<c64> {
        &self.inv_eigvecs
    }

    /// True when `V` and `λ` carry no imaginary parts.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `Ψ` truncated to `r` columns: `Ψ[i, k] = λ_i^k`.
    pub fn vandermonde(&self, r: usize) -> Mat<c64> {
        let n = self.n();
        let mut psi = Mat::<c64>::zeros(n, r);
        for i in 0..n {
            let mut p = c64::new(1.0, 0.0);
            for k in 0..r {
                psi[(i, k)] = p;
                p *= self.eigvals[i];
            }
        }
        psi
    }

    /// `V⁻¹ X` for a real `X`.
    pub fn gft(&self, x: faer::MatRef<'_, f64>) -> Mat<c64> {
        let xc = Mat::from_fn(x.nrows(), x.ncols(), |i, j| c64::new(x[(i, j)], 0.0));
        &self.inv_eigvecs * &xc
    }

    /// Real part of `V diag(λ) V⁻¹`.
    pub fn reconstruct(&self) -> Mat<f64> {
        let n = self.n();
        let vl = Mat::from_fn(n, n, |i, j| self.eigvecs[(i, j)] * self.eigvals[j]);
        let full = &vl * &self.inv_eigvecs;
        Mat::from_fn(n, n, |i, j| full[(i, j)].re)
    }

    /// Relative Frobenius error of [`Self::reconstruct`] against `gso`.
    pub fn reconstruction_error(&self, gso: &Gso) -> f64 {
        let n = self.n();
        let vl = Mat::from_fn(n, n, |i, j| self.eigvecs[(i, j)] * self.eigvals[j]);
        let full = &vl * &self.inv_eigvecs;
        let s = gso.matrix();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            for i in 0..n {
                let d = full[(i, j)] - c64::new(s[(i, j)], 0.0);
                num += d.norm_sqr();
                den += s[(i, j)] * s[(i, j)];
            }
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Smallest pairwise distance between eigenvalues.
    pub fn min_eigval_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                gap = gap.min((self.eigvals[a] - self.eigvals[b]).norm());
            }
        }
        gap
    }
}
