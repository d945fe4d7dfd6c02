use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::linalg::{is_finite, unvec};

/// A penalty `weight · ‖C H − H C‖²_F` on the filter.
#[derive(Debug, Clone, Copy)]
pub struct FilterPenalty<'a> {
    pub c: MatRef<'a, f64>,
    pub weight: f64,
}

/// Filter step: `argmin_H ‖Y − HX‖²_F + γ‖SH − HS‖²_F`.
///
/// Solves the `N² x N²` normal equations
/// `(XXᵀ⊗I + γ(SSᵀ⊗I + I⊗SᵀS − Sᵀ⊗Sᵀ − S⊗S)) vec(H) = vec(YXᵀ)`
/// with a dense Cholesky factorization.
pub fn rfi_step1(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    gamma: f64,
) -> Result<Mat<f64>> {
    let n = s.nrows();
    crate::solver::fi::check_signals(x, y, n)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if !is_finite(s) {
        return Err(Error::NonFinite("shift operator".into()));
    }
    let xxt = x * x.transpose();
    let yxt = y * x.transpose();
    step1_solve(
        xxt.as_ref(),
        yxt.as_ref(),
        &[FilterPenalty {
            c: s,
            weight: gamma,
        }],
    )
}

/// Solves `(G⊗I + Σ_p w_p K(C_p)) vec(H) = vec(B)` where `G = XXᵀ`, `B = YXᵀ`
/// and `K(C) = CCᵀ⊗I + I⊗CᵀC − Cᵀ⊗Cᵀ − C⊗C`.
pub fn step1_solve(
    xxt: MatRef<'_, f64>,
    yxt: MatRef<'_, f64>,
    penalties: &[FilterPenalty<'_>],
) -> Result<Mat<f64>> {
    let n = xxt.nrows();
    let a = step1_system(xxt, penalties);
    let mut rhs = Mat::<f64>::zeros(n * n, 1);
    for j in 0..n {
        for i in 0..n {
            rhs[(i + n * j, 0)] = yxt[(i, j)];
        }
    }
    let sol = spd_solve(a, rhs)?;
    let v: Vec<f64> = (0..n * n).map(|k| sol[(k, 0)]).collect();
    Ok(unvec(&v, n, n))
}

/// Assembles the normal-equation matrix of [`step1_solve`].
///
/// Row and column index `i + N j` addresses `H[i, j]`.
pub fn step1_system(xxt: MatRef<'_, f64>, penalties: &[FilterPenalty<'_>]) -> Mat<f64> {
    let n = xxt.nrows();
    // P ⊗ I + I ⊗ Q collects the Kronecker products with an identity factor.
    let mut p = xxt.to_owned();
    let mut q = Mat::<f64>::zeros(n, n);
    for pen in penalties.iter().filter(|p| p.weight != 0.0) {
        let c = pen.c;
        let cct = c * c.transpose();
        let ctc = c.transpose() * c;
        for j in 0..n {
            for i in 0..n {
                p[(i, j)] += pen.weight * cct[(i, j)];
                q[(i, j)] += pen.weight * ctc[(i, j)];
            }
        }
    }
    let active: Vec<&FilterPenalty<'_>> = penalties.iter().filter(|p| p.weight != 0.0).collect();
    let nn = n * n;
    let mut a = Mat::<f64>::zeros(nn, nn);
    for l in 0..n {
        for k in 0..n {
            let col = k + n * l;
            for j in 0..n {
                let pjl = p[(j, l)];
                for i in 0..n {
                    let mut v = 0.0;
                    if i == k {
                        v += pjl;
                    }
                    if j == l {
                        v += q[(i, k)];
                    }
                    for pen in &active {
                        let c = pen.c;
                        v -= pen.weight * (c[(l, j)] * c[(k, i)] + c[(j, l)] * c[(i, k)]);
                    }
                    a[(i + n * j, col)] = v;
                }
            }
        }
    }
    a
}

/// Cholesky solve with escalating diagonal jitter when the matrix is singular.
pub(crate) fn spd_solve(mut a: Mat<f64>, rhs: Mat<f64>) -> Result<Mat<f64>> {
    let dim = a.nrows();
    let trace: f64 = (0..dim).map(|i| a[(i, i)]).sum();
    let base = if trace > 0.0 {
        1e-12 * trace / dim as f64
    } else {
        1e-12
    };
    let mut added = 0.0;
    for attempt in 0..6 {
        if attempt > 0 {
            let target = base * 100f64.powi(attempt - 1);
            for i in 0..dim {
                a[(i, i)] += target - added;
            }
            added = target;
        }
        if let Ok(llt) = a.llt(Side::Lower) {
            let x = llt.solve(&rhs);
            if is_finite(x.as_ref()) {
                return Ok(x);
            }
        }
    }
    Err(Error::Decomposition(
        "normal equations are not positive definite even after jitter".into(),
    ))
}
