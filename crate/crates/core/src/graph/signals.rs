use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::filter::GraphFilter;
use crate::error::{Error, Result};
use crate::linalg::frob_sq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputDist {
    /// Columns drawn from `N(0, I)`.
    #[default]
    GaussianWhite,
}

/// Paired input/output observations `Y = H X + W`.
#[derive(Debug, Clone)]
pub struct SignalSet {
    pub x: Mat<f64>,
    pub y: Mat<f64>,
    /// Requested ratio `E‖W‖² / ‖HX‖²`.
    pub noise_power: f64,
}

impl SignalSet {
    pub fn new(x: Mat<f64>, y: Mat<f64>, noise_power: f64) -> Result<Self> {
        if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "X is {}x{} but Y is {}x{}",
                x.nrows(),
                x.ncols(),
                y.nrows(),
                y.ncols()
            )));
        }
        Ok(Self { x, y, noise_power })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }
}

/// Fills an `n x m` matrix with i.i.d. standard normal entries (column by column).
pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            out[(i, j)] = StandardNormal.sample(rng);
        }
    }
    out
}

/// Draws `X` and returns `Y = H X + W`.
///
/// `W` is white Gaussian with per-entry variance `η ‖HX‖² / (N M)`, so the
/// expected noise energy is `η` times the energy of this realization's `HX`.
pub fn synthesize_signals(
    filter: &GraphFilter,
    m: usize,
    noise_power: f64,
    input: InputDist,
    seed: u64,
) -> Result<SignalSet> {
    let h = filter
        .matrix()
        .ok_or_else(|| Error::InvalidArgument("filter has no matrix form".into()))?;
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one signal".into()));
    }
    if !(noise_power >= 0.0) || !noise_power.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise power {noise_power} must be >= 0"
        )));
    }
    let n = h.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = match input {
        InputDist::GaussianWhite => gaussian_matrix(&mut rng, n, m),
    };
    let mut y = h * &x;
    if noise_power > 0.0 {
        let sigma = (noise_power * frob_sq(y.as_ref()) / (n * m) as f64).sqrt();
        let w = gaussian_matrix(&mut rng, n, m);
        for j in 0..m {
            for i in 0..n {
                y[(i, j)] += sigma * w[(i, j)];
            }
        }
    }
    SignalSet::new(x, y, noise_power)
}

/// `X Xᵀ / M` (signals are taken to be zero mean).
pub fn sample_covariance(x: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let m = x.ncols();
    if m == 0 {
        return Err(Error::InvalidArgument("covariance of zero signals".into()));
    }
    let c = x * x.transpose();
    Ok(c * faer::Scale(1.0 / m as f64))
}
