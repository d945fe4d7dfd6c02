use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Entrywise majorization weights of the two log penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct MmWeights {
    /// `1 / (|S − S̄| + δ1)`.
    pub omega_bar: Mat<f64>,
    /// `1 / (|S| + δ2)`.
    pub omega: Mat<f64>,
}

impl MmWeights {
    /// All-ones weights (plain weighted ℓ1, no reweighting).
    pub fn ones(n: usize) -> Self {
        Self {
            omega_bar: Mat::from_fn(n, n, |_, _| 1.0),
            omega: Mat::from_fn(n, n, |_, _| 1.0),
        }
    }

    pub fn n(&self) -> usize {
        self.omega.nrows()
    }
}

pub fn mm_weights(
    s: MatRef<'_, f64>,
    s_bar: MatRef<'_, f64>,
    delta1: f64,
    delta2: f64,
) -> Result<MmWeights> {
    if !(delta1 > 0.0 && delta2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "deltas must be > 0, got {delta1}, {delta2}"
        )));
    }
    if s.nrows() != s_bar.nrows() || s.ncols() != s_bar.ncols() {
        return Err(Error::DimensionMismatch("S and S̄ differ in shape".into()));
    }
    let (r, c) = (s.nrows(), s.ncols());
    Ok(MmWeights {
        omega_bar: Mat::from_fn(r, c, |i, j| {
            1.0 / ((s[(i, j)] - s_bar[(i, j)]).abs() + delta1)
        }),
        omega: Mat::from_fn(r, c, |i, j| 1.0 / (s[(i, j)].abs() + delta2)),
    })
}

/// `r_δ(Z) = Σ log(|Z_ij| + δ)`.
pub fn log_penalty(z: MatRef<'_, f64>, delta: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..z.ncols() {
        for i in 0..z.nrows() {
            acc += (z[(i, j)].abs() + delta).ln();
        }
    }
    acc
}

/// Tangent of `r_δ` at `z0`, evaluated at `z`:
/// `Σ log(|z0| + δ) + (|z| − |z0|) / (|z0| + δ)`.
pub fn linearized_log_penalty(z: MatRef<'_, f64>, z0: MatRef<'_, f64>, delta: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..z.ncols() {
        for i in 0..z.nrows() {
            let a0 = z0[(i, j)].abs() + delta;
            acc += a0.ln() + (z[(i, j)].abs() - z0[(i, j)].abs()) / a0;
        }
    }
    acc
}
