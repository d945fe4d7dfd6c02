use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::linalg::{frob_sq, pinv_solve_multi};
use crate::solver::{
    inner_control, run_alternating, step1_solve, FilterModel, FilterPenalty, RfiResult,
    SolverConfig,
};

/// Graph time series `y_κ` (each `N x M_κ`), optional exogenous inputs of the
/// same shapes, and the AR memory `K`.
#[derive(Debug, Clone)]
pub struct ArSeries {
    pub y: Vec<Mat<f64>>,
    pub x: Option<Vec<Mat<f64>>>,
    pub k: usize,
}

impl ArSeries {
    pub fn new(y: Vec<Mat<f64>>, x: Option<Vec<Mat<f64>>>, k: usize) -> Result<Self> {
        let s = Self { y, x, k };
        s.validate()?;
        Ok(s)
    }

    /// One column per time step.
    pub fn from_columns(data: MatRef<'_, f64>, k: usize) -> Result<Self> {
        let y = (0..data.ncols())
            .map(|t| data.subcols(t, 1).to_owned())
            .collect();
        Self::new(y, None, k)
    }

    pub fn n(&self) -> usize {
        self.y.first().map_or(0, |m| m.nrows())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("AR memory must be >= 1".into()));
        }
        if self.y.len() <= self.k {
            return Err(Error::InvalidArgument(format!(
                "series of length {} is too short for memory {}",
                self.y.len(),
                self.k
            )));
        }
        let n = self.n();
        let m = self.y[0].ncols();
        if self.y.iter().any(|y| y.nrows() != n || y.ncols() != m) {
            return Err(Error::DimensionMismatch(
                "all samples must share N and M".into(),
            ));
        }
        if let Some(x) = &self.x {
            if x.len() != self.y.len() || x.iter().any(|v| v.nrows() != n || v.ncols() != m) {
                return Err(Error::DimensionMismatch(
                    "exogenous inputs must match the series".into(),
                ));
            }
        }
        if self
            .y
            .iter()
            .chain(self.x.iter().flatten())
            .any(|v| !crate::linalg::is_finite(v.as_ref()))
        {
            return Err(Error::NonFinite("AR series".into()));
        }
        Ok(())
    }

    /// `y_κ − x_κ` (or `y_κ` without inputs).
    fn target(&self, t: usize) -> Mat<f64> {
        match &self.x {
            Some(x) => &self.y[t] - &x[t],
            None => self.y[t].clone(),
        }
    }
}

/// Order in which the per-lag filters are refreshed inside one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArUpdate {
    /// Lags in ascending order, each using the already refreshed lower lags.
    #[default]
    GaussSeidel,
    /// All lags from the previous iterate.
    Jacobi,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ArOptions {
    pub update: ArUpdate,
}

/// Lag moments over the fitting window `κ = K..T−1` (0-based):
/// `cross[a][b] = Σ y_{κ−a−1} y_{κ−b−1}ᵀ`, `target[a] = Σ z_κ y_{κ−a−1}ᵀ`.
struct LagMoments {
    cross: Vec<Vec<Mat<f64>>>,
    target: Vec<Mat<f64>>,
}

fn lag_moments(series: &ArSeries) -> LagMoments {
    let (n, k) = (series.n(), series.k);
    let mut cross = vec![vec![Mat::<f64>::zeros(n, n); k]; k];
    let mut target = vec![Mat::<f64>::zeros(n, n); k];
    for t in k..series.len() {
        let z = series.target(t);
        for a in 0..k {
            let ya = series.y[t - a - 1].as_ref();
            target[a] += &z * ya.transpose();
            for b in 0..k {
                cross[a][b] += ya * series.y[t - b - 1].transpose();
            }
        }
    }
    LagMoments { cross, target }
}

struct ArModel<'a> {
    series: &'a ArSeries,
    moments: LagMoments,
    update: ArUpdate,
}

impl FilterModel for ArModel<'_> {
    fn step1(
        &mut self,
        s: MatRef<'_, f64>,
        gamma: f64,
        current: &[Mat<f64>],
    ) -> Result<Vec<Mat<f64>>> {
        let k = self.series.k;
        let n = self.series.n();
        let previous: Vec<Mat<f64>> = if current.len() == k {
            current.to_vec()
        } else {
            vec![Mat::zeros(n, n); k]
        };
        let mut next = previous.clone();
        for a in 0..k {
            // Σ_κ (z_κ − Σ_{b≠a} H_b y_{κ−b}) y_{κ−a}ᵀ
            let mut rhs = self.moments.target[a].clone();
            for b in 0..k {
                if b == a {
                    continue;
                }
                let hb = match self.update {
                    ArUpdate::GaussSeidel => &next[b],
                    ArUpdate::Jacobi => &previous[b],
                };
                rhs -= hb * &self.moments.cross[b][a];
            }
            next[a] = step1_solve(
                self.moments.cross[a][a].as_ref(),
                rhs.as_ref(),
                &[FilterPenalty {
                    c: s,
                    weight: gamma,
                }],
            )?;
        }
        Ok(next)
    }

    fn data_fit(&self, filters: &[Mat<f64>]) -> f64 {
        let k = self.series.k;
        let mut acc = 0.0;
        for t in k..self.series.len() {
            let mut r = self.series.target(t);
            for (a, h) in filters.iter().enumerate() {
                r -= h * &self.series.y[t - a - 1];
            }
            acc += frob_sq(r.as_ref());
        }
        acc
    }
}

/// Robust AR identification: block-coordinate filter updates on residualized
/// targets, alternated with the shared graph step. Returns `H_1..H_K` in order.
pub fn ar_rfi(
    series: &ArSeries,
    s_bar: &Gso,
    config: &SolverConfig,
    options: ArOptions,
) -> Result<RfiResult> {
    series.validate()?;
    if series.n() != s_bar.n() {
        return Err(Error::DimensionMismatch(format!(
            "series has {} nodes, graph {}",
            series.n(),
            s_bar.n()
        )));
    }
    let mut model = ArModel {
        series,
        moments: lag_moments(series),
        update: options.update,
    };
    let out = run_alternating(
        &mut model,
        s_bar,
        config,
        &[],
        Vec::new(),
        inner_control(config),
    )?;
    crate::solver::finish_single(out, config)
}

/// Unconstrained least-squares AR fit (minimum norm when underdetermined).
pub fn ar_fit_ls(series: &ArSeries) -> Result<Vec<Mat<f64>>> {
    series.validate()?;
    let (n, k) = (series.n(), series.k);
    let mo = lag_moments(series);
    // [H_1 .. H_K] G = [T_1 .. T_K]  ⇔  G [H_1 .. H_K]ᵀ = [T_1 .. T_K]ᵀ
    let g = Mat::from_fn(k * n, k * n, |r, c| mo.cross[r / n][c / n][(r % n, c % n)]);
    let tt = Mat::from_fn(k * n, n, |r, c| mo.target[r / n][(c, r % n)]);
    let sol = pinv_solve_multi(g.as_ref(), tt.as_ref())?;
    Ok((0..k)
        .map(|a| Mat::from_fn(n, n, |i, j| sol[(a * n + j, i)]))
        .collect())
}

/// Iterates `ŷ_κ = Σ_k H_k y_{κ−k} (+ x_κ)` for `steps` steps, feeding
/// predictions back. `history` is chronological (last entry most recent);
/// `exogenous[s]` is added at step `s`.
pub fn ar_predict(
    filters: &[Mat<f64>],
    history: &[Mat<f64>],
    steps: usize,
    exogenous: Option<&[Mat<f64>]>,
) -> Result<Vec<Mat<f64>>> {
    let k = filters.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no filters".into()));
    }
    if history.len() < k {
        return Err(Error::InvalidArgument(format!(
            "history of {} samples for memory {k}",
            history.len()
        )));
    }
    if let Some(x) = exogenous {
        if x.len() < steps {
            return Err(Error::InvalidArgument(format!(
                "{} exogenous samples for {steps} steps",
                x.len()
            )));
        }
    }
    let mut window: Vec<Mat<f64>> = history[history.len() - k..].to_vec();
    let mut out = Vec::with_capacity(steps);
    for step in 0..steps {
        let last = &window[window.len() - 1];
        let mut pred = Mat::<f64>::zeros(last.nrows(), last.ncols());
        for (a, h) in filters.iter().enumerate() {
            pred += h * &window[window.len() - 1 - a];
        }
        if let Some(x) = exogenous {
            pred += &x[step];
        }
        window.remove(0);
        window.push(pred.clone());
        out.push(pred);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, sub};

    #[test]
    fn copy_and_zero_predictions() {
        let last = Mat::from_fn(3, 1, |i, _| i as f64 + 0.5);
        let prev = Mat::from_fn(3, 1, |i, _| -(i as f64));
        let history = vec![prev, last.clone()];
        let p = ar_predict(&[Mat::identity(3, 3)], &history, 1, None).unwrap();
        assert_eq!(p[0], last);
        let x = vec![Mat::from_fn(3, 1, |_, _| 2.0)];
        let p = ar_predict(&[Mat::zeros(3, 3), Mat::zeros(3, 3)], &history, 1, Some(&x)).unwrap();
        assert_eq!(p[0], x[0]);
    }

    #[test]
    fn multi_step_unrolls_powers() {
        let h = Mat::from_fn(3, 3, |i, j| 0.2 * (i as f64) - 0.1 * (j as f64));
        let y0 = Mat::from_fn(3, 1, |i, _| 1.0 + i as f64);
        let p = ar_predict(std::slice::from_ref(&h), std::slice::from_ref(&y0), 3, None).unwrap();
        let h3 = &h * &h * &h;
        assert!(frob(sub(p[2].as_ref(), (&h3 * &y0).as_ref()).as_ref()) < 1e-14);
    }

    #[test]
    fn ls_fit_recovers_noiseless_ar2() {
        let n = 3;
        let h1 = Mat::from_fn(n, n, |i, j| {
            if i == j {
                0.4
            } else {
                0.1 * (i + j) as f64 / 4.0
            }
        });
        let h2 = Mat::from_fn(n, n, |i, j| if i == j { -0.2 } else { 0.05 });
        let mut y = vec![
            Mat::from_fn(n, 4, |i, j| ((i + 2 * j) % 3) as f64 - 1.0),
            Mat::from_fn(n, 4, |i, j| ((2 * i + j) % 5) as f64 * 0.3),
        ];
        for t in 2..12 {
            let next = &h1 * &y[t - 1] + &h2 * &y[t - 2];
            y.push(next);
        }
        let series = ArSeries::new(y, None, 2).unwrap();
        let fit = ar_fit_ls(&series).unwrap();
        let pred = ar_predict(&fit, &series.y[..2], 1, None).unwrap();
        assert!(frob(sub(pred[0].as_ref(), series.y[2].as_ref()).as_ref()) < 1e-8);
    }

    #[test]
    fn short_series_is_rejected() {
        let y = vec![Mat::<f64>::zeros(2, 1); 3];
        assert!(ArSeries::new(y, None, 3).is_err());
    }
}
