use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::graph::{build_filter, GraphFilter, Gso};
use crate::linalg::pinv_solve;

/// Coefficients from the non-robust closed form.
#[derive(Debug, Clone)]
pub struct FiResult {
    pub coeffs: Vec<f64>,
    pub rank: usize,
    /// The regression matrix lost rank; `coeffs` is the minimum-norm solution.
    pub rank_deficient: bool,
}

/// `ĥ = Θ† vec(Y)` with `Θ = ((V⁻¹X)ᵀ ⊙ V) Ψ`, `Ψ` truncated to `r` columns.
///
/// Column `k` of `Θ` is `vec(V diag(λ)^k V⁻¹ X)`. For operators with a complex
/// spectrum the real and imaginary parts are stacked so the coefficients stay
/// real.
pub fn fi_closed_form(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    gso: &Gso,
    r: usize,
) -> Result<FiResult> {
    let n = gso.n();
    check_signals(x, y, n)?;
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "filter order must lie in 1..={n}, got {r}"
        )));
    }
    let m = x.ncols();
    let dec = gso.spectral()?;
    let xt = dec.gft(x);
    let v = dec.eigvecs();
    let lam = dec.eigvals();
    let nm = n * m;
    let rows = if dec.is_real() { nm } else { 2 * nm };
    let mut theta = Mat::<f64>::zeros(rows, r);
    let mut scaled = xt.clone();
    for k in 0..r {
        if k > 0 {
            for j in 0..m {
                for i in 0..n {
                    scaled[(i, j)] *= lam[i];
                }
            }
        }
        let col: Mat<c64> = v * &scaled;
        for j in 0..m {
            for i in 0..n {
                let z = col[(i, j)];
                theta[(i + n * j, k)] = z.re;
                if rows > nm {
                    theta[(nm + i + n * j, k)] = z.im;
                }
            }
        }
    }
    let mut rhs = vec![0.0; rows];
    for j in 0..m {
        for i in 0..n {
            rhs[i + n * j] = y[(i, j)];
        }
    }
    let sol = pinv_solve(theta.as_ref(), &rhs)?;
    Ok(FiResult {
        coeffs: sol.x,
        rank: sol.rank,
        rank_deficient: sol.rank_deficient,
    })
}

/// [`fi_closed_form`] followed by building the filter on the same operator.
pub fn fi_filter(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    gso: &Gso,
    r: usize,
) -> Result<(GraphFilter, FiResult)> {
    let fit = fi_closed_form(x, y, gso, r)?;
    Ok((build_filter(gso, &fit.coeffs)?, fit))
}

pub(crate) fn check_signals(x: MatRef<'_, f64>, y: MatRef<'_, f64>, n: usize) -> Result<()> {
    if x.nrows() != n || y.nrows() != n || x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, Y is {}x{}, graph has {n} nodes",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidArgument("no signals".into()));
    }
    if !crate::linalg::is_finite(x) || !crate::linalg::is_finite(y) {
        return Err(Error::NonFinite("signal matrices".into()));
    }
    Ok(())
}
