//! Dense linear-algebra helpers shared by the solvers.
//!
//! Matrices are `faer::Mat<f64>`. Vectorization is column-major throughout:
//! entry `(i, j)` of an `n x n` matrix lives at index `i + n * j` of its `vec`.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Singular values below `PINV_RCOND * sigma_max` are treated as zero.
pub const PINV_RCOND: f64 = 1e-10;

/// Column-major vectorization.
pub fn vec_of(m: MatRef<'_, f64>) -> Vec<f64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &[f64], nrows: usize, ncols: usize) -> Mat<f64> {
    assert_eq!(v.len(), nrows * ncols, "unvec: length mismatch");
    Mat::from_fn(nrows, ncols, |i, j| v[i + nrows * j])
}

pub fn frob_sq(m: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            acc += v * v;
        }
    }
    acc
}

pub fn frob(m: MatRef<'_, f64>) -> f64 {
    frob_sq(m).sqrt()
}

pub fn sub(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn add(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn scale(a: MatRef<'_, f64>, s: f64) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| s * a[(i, j)])
}

pub fn matmul(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimension mismatch");
    a * b
}

/// `A B - B A`.
pub fn commutator(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    sub(matmul(a, b).as_ref(), matmul(b, a).as_ref())
}

/// Frobenius norm of `A B - B A`.
pub fn commutator_norm(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(frob(commutator(a, b).as_ref()))
}

/// Dense Kronecker product `A ⊗ B`.
pub fn kron(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn is_finite(m: MatRef<'_, f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut acc: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc = acc.max(m[(i, j)].abs());
        }
    }
    acc
}

/// Largest singular value.
pub fn spectral_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = m
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("singular values: {e:?}")))?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("eigenvalues: {e:?}")))?;
    Ok(ev.into_iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Minimum-norm least-squares solution `A^+ b` with the uniform relative cutoff.
#[derive(Debug, Clone)]
pub struct PinvSolution {
    pub x: Vec<f64>,
    pub rank: usize,
    /// True when some singular value fell below the cutoff, or the system is
    /// wider than it is tall.
    pub rank_deficient: bool,
}

pub fn pinv_solve(a: MatRef<'_, f64>, b: &[f64]) -> Result<PinvSolution> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "pinv_solve: rhs length {} for {}x{} system",
            b.len(),
            m,
            n
        )));
    }
    if n == 0 {
        return Ok(PinvSolution {
            x: vec![],
            rank: 0,
            rank_deficient: false,
        });
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let u = svd.U();
    let v = svd.V();
    let s = svd.S().column_vector();
    let k = s.nrows();
    let smax = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let cutoff = PINV_RCOND * smax;
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for idx in 0..k {
        let sigma = s[idx];
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        rank += 1;
        let mut proj = 0.0;
        for i in 0..m {
            proj += u[(i, idx)] * b[i];
        }
        let coef = proj / sigma;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v[(j, idx)] * coef;
        }
    }
    Ok(PinvSolution {
        x,
        rank,
        rank_deficient: rank < n,
    })
}

/// `A⁺ B` for a matrix right-hand side, with the same cutoff as [`pinv_solve`].
pub fn pinv_solve_multi(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Mat<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "pinv_solve_multi: {}x{} system with {} rhs rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(Mat::zeros(n, b.ncols()));
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let smax = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let cutoff = PINV_RCOND * smax;
    // V diag(1/σ) Uᵀ B over the retained singular values
    let utb = svd.U().transpose() * b;
    let scaled = Mat::from_fn(k, b.ncols(), |i, j| {
        if s[i] > cutoff && s[i] > 0.0 {
            utb[(i, j)] / s[i]
        } else {
            0.0
        }
    });
    Ok(svd.V() * &scaled)
}

/// Numerical rank of a symmetric positive-semidefinite matrix, counting
/// eigenvalues above `rel_tol * lambda_max`.
pub fn psd_rank(m: MatRef<'_, f64>, rel_tol: f64) -> Result<usize> {
    let eig = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("symmetric eigenvalues: {e:?}")))?;
    let top = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    Ok(eig.iter().filter(|&&l| l > rel_tol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_radius_of_rotation_and_shift() {
        let rot = Mat::from_fn(2, 2, |i, j| [[0.0, -2.0], [2.0, 0.0]][i][j]);
        assert!((spectral_radius(rot.as_ref()).unwrap() - 2.0).abs() < 1e-12);
        let shift = Mat::from_fn(3, 3, |i, j| if i == j + 1 { 5.0 } else { 0.0 });
        assert!(spectral_radius(shift.as_ref()).unwrap() < 1e-6);
    }

    #[test]
    fn vec_round_trip_is_column_major() {
        let m = Mat::from_fn(2, 3, |i, j| (i + 10 * j) as f64);
        let v = vec_of(m.as_ref());
        assert_eq!(v, vec![0.0, 1.0, 10.0, 11.0, 20.0, 21.0]);
        assert_eq!(unvec(&v, 2, 3), m);
    }

    #[test]
    fn kron_matches_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = Mat::from_fn(3, 3, |i, j| (i as f64) - 0.5 * j as f64);
        let b = Mat::from_fn(3, 3, |i, j| 1.0 + (i * j) as f64);
        let x = Mat::from_fn(3, 3, |i, j| (i + 2 * j) as f64 * 0.3);
        let lhs = vec_of(matmul(matmul(a.as_ref(), x.as_ref()).as_ref(), b.as_ref()).as_ref());
        let k = kron(b.transpose(), a.as_ref());
        let xv = vec_of(x.as_ref());
        for (r, l) in lhs.iter().enumerate() {
            let rhs: f64 = (0..9).map(|c| k[(r, c)] * xv[c]).sum();
            assert!((l - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_flags_rank_deficiency() {
        let a = Mat::from_fn(4, 2, |i, _| i as f64 + 1.0);
        let sol = pinv_solve(a.as_ref(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.rank, 1);
        // minimum-norm solution splits the weight evenly
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && (sol.x[1] - 0.5).abs() < 1e-12);
    }
}
