use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::Method;
use crate::error::{Error, Result};
use crate::graph::{build_filter, nerr, Gso};
use crate::joint::{ar_fit_ls, ar_predict, ar_rfi, ArOptions, ArSeries};
use crate::linalg::{frob_sq, spectral_norm, spectral_radius};
use crate::solver::{fi_filter, SolverConfig};

/// Parameters of a synthetic AR process on a graph.
#[derive(Debug, Clone)]
pub struct ArProcessSpec {
    pub order: usize,
    /// Polynomial order of every `H_k`.
    pub filter_order: usize,
    pub length: usize,
    pub burn_in: usize,
    /// Spectral radius of the companion matrix, in (0, 1).
    pub stability: f64,
    pub innovation_std: f64,
}

/// A sampled AR process: the filters and an `N x length` series.
#[derive(Debug, Clone)]
pub struct ArProcess {
    pub filters: Vec<Mat<f64>>,
    pub series: Mat<f64>,
}

/// `y_κ = Σ_k H_k y_{κ−k} + w_κ` with `H_k` polynomials of `gso`.
///
/// Each `H_k` is `I + P_k / (2‖P_k‖₂)`, with `P_k` a polynomial without constant term
/// and standard normal coefficients, scaled to `‖H_k‖₂ = a_k` with `a_k ∝ U(0.5, 1)`
/// and `Σ a_k = 1`. A common factor then
/// sets the spectral radius of the companion matrix to `stability`.
pub fn synthesize_ar_process(gso: &Gso, spec: &ArProcessSpec, seed: u64) -> Result<ArProcess> {
    if spec.order == 0 || spec.filter_order == 0 || spec.length == 0 {
        return Err(Error::InvalidArgument(
            "AR order, filter order and length must be >= 1".into(),
        ));
    }
    if !(spec.stability > 0.0) || spec.stability >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "stability {} must lie in (0, 1)",
            spec.stability
        )));
    }
    let n = gso.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares: Vec<f64> = (0..spec.order)
        .map(|_| 0.5 + 0.5 * rand::Rng::random::<f64>(&mut rng))
        .collect();
    let total: f64 = shares.iter().sum();
    let mut filters = Vec::with_capacity(spec.order);
    for share in shares {
        // Constant term plus a random polynomial with N(0,1) coefficients scaled to
        // half its size, so every frequency response lies in [0.5, 1.5] times a_k.
        let mut h: Vec<f64> = (0..spec.filter_order.min(n))
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        h[0] = 0.0;
        let p = build_filter(gso, &h)?;
        let p = p.matrix().expect("built filters carry a matrix").to_owned();
        let p_norm = spectral_norm(p.as_ref())?;
        let mut m = Mat::<f64>::identity(n, n);
        if p_norm > 0.0 {
            m += &p * faer::Scale(0.5 / p_norm);
        }
        let norm = spectral_norm(m.as_ref())?;
        filters.push(&m * faer::Scale(share / total / norm));
    }
    let c = companion_scale(&filters, spec.stability)?;
    for f in &mut filters {
        *f = &*f * faer::Scale(c);
    }
    let total_len = spec.burn_in + spec.length;
    let mut cols: Vec<Mat<f64>> = Vec::with_capacity(total_len);
    for t in 0..total_len {
        let mut y = Mat::from_fn(n, 1, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            spec.innovation_std * z
        });
        for (k, h) in filters.iter().enumerate() {
            if t > k {
                y += h * &cols[t - k - 1];
            }
        }
        cols.push(y);
    }
    let series = Mat::from_fn(n, spec.length, |i, t| cols[spec.burn_in + t][(i, 0)]);
    Ok(ArProcess { filters, series })
}

fn companion_radius(filters: &[Mat<f64>], c: f64) -> Result<f64> {
    let n = filters[0].nrows();
    let k = filters.len();
    let comp = Mat::from_fn(n * k, n * k, |i, j| {
        if i < n {
            c * filters[j / n][(i, j % n)]
        } else if j + n == i {
            1.0
        } else {
            0.0
        }
    });
    spectral_radius(comp.as_ref())
}

/// Common factor `c` with `ρ(companion(c H_1, .., c H_K)) = target`, by bisection.
fn companion_scale(filters: &[Mat<f64>], target: f64) -> Result<f64> {
    let mut hi = 1.0;
    let mut grown = 0;
    while companion_radius(filters, hi)? < target {
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(Error::Infeasible(
                "AR filters cannot reach the requested spectral radius".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if companion_radius(filters, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct ForecastSpec {
    /// Memory of the `AR-RFI` fit.
    pub order: usize,
    /// Fraction of samples used for training.
    pub tts: f64,
    pub horizon: usize,
    pub lsgf_order: usize,
    pub methods: Vec<Method>,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    pub method: Method,
    /// `(1/M) Σ_κ nerr(ŷ_κ, y_κ)` over the evaluation window.
    pub nerr: f64,
    /// `Σ_κ ‖ŷ_κ − y_κ‖²`.
    pub sse: f64,
    pub wall_ms: f64,
}

/// Chronological train/test forecasting on an `N x T` series.
///
/// Targets are `y_κ` for every `κ` past the training split; each is predicted
/// `horizon` steps ahead from the observed history up to `κ − horizon`,
/// feeding predictions back for multi-step horizons.
pub fn forecast_experiment(
    data: MatRef<'_, f64>,
    exogenous: Option<MatRef<'_, f64>>,
    s_bar: &Gso,
    spec: &ForecastSpec,
) -> Result<Vec<ForecastOutcome>> {
    let (n, t_len) = (data.nrows(), data.ncols());
    if n != s_bar.n() {
        return Err(Error::DimensionMismatch(format!(
            "data has {n} nodes, graph {}",
            s_bar.n()
        )));
    }
    if let Some(x) = exogenous {
        if x.nrows() != n || x.ncols() != t_len {
            return Err(Error::DimensionMismatch(
                "exogenous inputs must match the series".into(),
            ));
        }
    }
    if spec.horizon == 0 || spec.order == 0 {
        return Err(Error::InvalidArgument(
            "horizon and order must be >= 1".into(),
        ));
    }
    let train = (spec.tts * t_len as f64).floor() as usize;
    let max_order = spec.order.max(1);
    if train <= max_order + 1 || train >= t_len || train < max_order + spec.horizon - 1 {
        return Err(Error::InvalidArgument(format!(
            "{t_len} samples with tts {} leave too little data for order {} and horizon {}",
            spec.tts, spec.order, spec.horizon
        )));
    }
    let col = |m: MatRef<'_, f64>, t: usize| m.subcols(t, 1).to_owned();
    let cols =
        |m: MatRef<'_, f64>, a: usize, b: usize| (a..b).map(|t| col(m, t)).collect::<Vec<_>>();
    let series = |a: usize, b: usize, k: usize| {
        ArSeries::new(cols(data, a, b), exogenous.map(|x| cols(x, a, b)), k)
    };

    let mut out = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let start = std::time::Instant::now();
        let filters: Vec<Mat<f64>> = match method {
            Method::CopyPrevDay => vec![Mat::identity(n, n)],
            Method::Ls => ar_fit_ls(&series(0, train, 1)?)?,
            Method::LsEval => ar_fit_ls(&series(train - 1, t_len, 1)?)?,
            Method::LsGf => {
                let xs = data.subcols(0, train - 1);
                let mut ys = data.subcols(1, train - 1).to_owned();
                if let Some(x) = exogenous {
                    ys -= x.subcols(1, train - 1);
                }
                let (f, _) = fi_filter(xs, ys.as_ref(), s_bar, spec.lsgf_order.min(n))?;
                vec![f.matrix().expect("materialized").to_owned()]
            }
            Method::Rfi => {
                ar_rfi(
                    &series(0, train, 1)?,
                    s_bar,
                    &spec.solver,
                    ArOptions::default(),
                )?
                .filters
            }
            Method::ArRfi => {
                ar_rfi(
                    &series(0, train, spec.order)?,
                    s_bar,
                    &spec.solver,
                    ArOptions::default(),
                )?
                .filters
            }
            other => {
                return Err(Error::Config(format!(
                    "method {} does not forecast",
                    other.label()
                )))
            }
        };
        let (nerr_mean, sse) = evaluate(&filters, data, exogenous, train, spec.horizon)?;
        out.push(ForecastOutcome {
            method,
            nerr: nerr_mean,
            sse,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(out)
}

fn evaluate(
    filters: &[Mat<f64>],
    data: MatRef<'_, f64>,
    exogenous: Option<MatRef<'_, f64>>,
    train: usize,
    horizon: usize,
) -> Result<(f64, f64)> {
    let k = filters.len();
    let t_len = data.ncols();
    let (mut acc, mut sse, mut count) = (0.0, 0.0, 0usize);
    for target in train..t_len {
        let last = target - horizon; // newest observed sample
        if last + 1 < k {
            return Err(Error::InvalidArgument(
                "not enough history before the evaluation window".into(),
            ));
        }
        let history: Vec<Mat<f64>> = (last + 1 - k..=last)
            .map(|t| data.subcols(t, 1).to_owned())
            .collect();
        let exo: Option<Vec<Mat<f64>>> = exogenous.map(|x| {
            (last + 1..=target)
                .map(|t| x.subcols(t, 1).to_owned())
                .collect()
        });
        let pred = ar_predict(filters, &history, horizon, exo.as_deref())?;
        let y = data.subcols(target, 1);
        let p = pred.last().expect("horizon >= 1");
        acc += nerr(p.as_ref(), y)?;
        sse += frob_sq((p - y).as_ref());
        count += 1;
    }
    Ok((acc / count as f64, sse))
}
