use std::time::Instant;

use faer::{Mat, MatRef};
use serde::Serialize;

use super::config::SolverConfig;
use super::denoise::inner_control;
use super::objective::graph_penalties;
use super::step1::{step1_solve, FilterPenalty};
use super::weights::{mm_weights, MmWeights};
use crate::efficient::{CommutatorTerm, DenoiseProblem, SweepControl};
use crate::error::{Error, Result};
use crate::graph::{poly_basis_fit, sample_covariance, CoeffFit, Gso, GsoFamily};
use crate::linalg::{commutator, frob_sq, sub};

/// One outer iteration of an alternating solver.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub gamma: f64,
    /// Objective after both steps, at this iteration's commutativity weight.
    pub objective: f64,
    pub step1_ms: f64,
    pub step2_ms: f64,
    pub inner_sweeps: usize,
    pub inner_converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Filter,
    Denoise,
}

/// Per-phase timing of the reduced-complexity solver.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRecord {
    pub t: usize,
    pub phase: Phase,
    pub inner_iters: usize,
    pub wall_ms: f64,
    pub objective: f64,
}

/// Output of the alternating solvers.
#[derive(Debug, Clone)]
pub struct RfiResult {
    /// Estimated filters; a single entry except for the joint and AR solvers.
    pub filters: Vec<Mat<f64>>,
    pub s_hat: Gso,
    /// Coefficients recovered from the first filter on `s_hat`.
    pub h_coeffs: Option<CoeffFit>,
    pub trace: Vec<IterationRecord>,
    pub phases: Vec<PhaseRecord>,
    /// The outer loop stopped on the objective tolerance.
    pub converged: bool,
}

impl RfiResult {
    pub fn h_hat(&self) -> MatRef<'_, f64> {
        self.filters[0].as_ref()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }
}

/// The filter half of an alternating scheme.
pub(crate) trait FilterModel {
    /// Minimizes the filter part of the objective with `S` fixed.
    fn step1(
        &mut self,
        s: MatRef<'_, f64>,
        gamma: f64,
        current: &[Mat<f64>],
    ) -> Result<Vec<Mat<f64>>>;

    /// Everything in the objective that depends on the filters alone.
    fn data_fit(&self, filters: &[Mat<f64>]) -> f64;

    /// Inner iterations spent by the last [`FilterModel::step1`] call.
    fn last_inner_iters(&self) -> usize {
        1
    }
}

pub(crate) struct AltOutput {
    pub filters: Vec<Mat<f64>>,
    pub s_hat: Gso,
    pub trace: Vec<IterationRecord>,
    pub phases: Vec<PhaseRecord>,
    pub converged: bool,
}

/// Alternates the model's filter step with the reweighted graph step.
///
/// `graph_terms` are extra penalties `w‖C S − S C‖²` (stationarity).
pub(crate) fn run_alternating<M: FilterModel>(
    model: &mut M,
    s_bar: &Gso,
    config: &SolverConfig,
    graph_terms: &[(MatRef<'_, f64>, f64)],
    init_filters: Vec<Mat<f64>>,
    control: SweepControl,
) -> Result<AltOutput> {
    config.validate()?;
    if s_bar.family() != GsoFamily::Adjacency {
        return Err(Error::InvalidGso(
            "the observed operator must be an adjacency matrix".into(),
        ));
    }
    let symmetric = config.symmetric.unwrap_or(s_bar.is_symmetric());
    if symmetric && !s_bar.is_symmetric() {
        return Err(Error::InvalidGso(
            "symmetric structural set requested for an asymmetric observed operator".into(),
        ));
    }
    let n = s_bar.n();
    let mut s = s_bar.matrix().to_owned();
    let mut filters = init_filters;
    let mut trace = Vec::with_capacity(config.t_max);
    let mut phases = Vec::with_capacity(2 * config.t_max);
    let mut converged = false;
    for t in 0..config.t_max {
        let gamma = config.gamma_at(t);

        let t0 = Instant::now();
        filters = model.step1(s.as_ref(), gamma, &filters)?;
        let step1_ms = t0.elapsed().as_secs_f64() * 1e3;

        let mid_objective = full_objective(
            model,
            &filters,
            s.as_ref(),
            s_bar.matrix(),
            config,
            gamma,
            graph_terms,
        );

        let t1 = Instant::now();
        let weights = if config.reweight {
            mm_weights(s.as_ref(), s_bar.matrix(), config.delta1, config.delta2)?
        } else {
            MmWeights::ones(n)
        };
        let mut terms: Vec<CommutatorTerm<'_>> = filters
            .iter()
            .map(|h| CommutatorTerm {
                a: h.as_ref(),
                weight: gamma,
            })
            .collect();
        terms.extend(
            graph_terms
                .iter()
                .map(|&(c, w)| CommutatorTerm { a: c, weight: w }),
        );
        let problem = DenoiseProblem {
            terms,
            s_bar: s_bar.matrix(),
            weights: &weights,
            lambda: config.lambda,
            beta: config.beta,
            symmetric,
        };
        let cd = problem.solve(s.as_ref(), control)?;
        let step2_ms = t1.elapsed().as_secs_f64() * 1e3;
        s = cd.s;

        let objective = full_objective(
            model,
            &filters,
            s.as_ref(),
            s_bar.matrix(),
            config,
            gamma,
            graph_terms,
        );
        phases.push(PhaseRecord {
            t,
            phase: Phase::Filter,
            inner_iters: model.last_inner_iters(),
            wall_ms: step1_ms,
            objective: mid_objective,
        });
        phases.push(PhaseRecord {
            t,
            phase: Phase::Denoise,
            inner_iters: cd.sweeps,
            wall_ms: step2_ms,
            objective,
        });
        let prev = trace
            .last()
            .map(|r: &IterationRecord| (r.objective, r.gamma));
        trace.push(IterationRecord {
            iteration: t,
            gamma,
            objective,
            step1_ms,
            step2_ms,
            inner_sweeps: cd.sweeps,
            inner_converged: cd.converged,
        });
        if let Some((prev_obj, prev_gamma)) = prev {
            let rel = (prev_obj - objective).abs() / prev_obj.abs().max(f64::MIN_POSITIVE);
            if config.early_stop_tol > 0.0 && prev_gamma == gamma && rel < config.early_stop_tol {
                converged = true;
                break;
            }
        }
    }
    let s_hat = Gso::new(s, GsoFamily::Adjacency, symmetric)?;
    Ok(AltOutput {
        filters,
        s_hat,
        trace,
        phases,
        converged,
    })
}

fn full_objective<M: FilterModel>(
    model: &M,
    filters: &[Mat<f64>],
    s: MatRef<'_, f64>,
    s_bar: MatRef<'_, f64>,
    config: &SolverConfig,
    gamma: f64,
    graph_terms: &[(MatRef<'_, f64>, f64)],
) -> f64 {
    let mut obj = model.data_fit(filters) + graph_penalties(s, s_bar, config);
    for h in filters {
        obj += gamma * frob_sq(commutator(s, h.as_ref()).as_ref());
    }
    for &(c, w) in graph_terms {
        obj += w * frob_sq(commutator(c, s).as_ref());
    }
    obj
}

/// Single-filter model `‖Y − HX‖² (+ ρ'‖C_y H − H C_y‖²)`.
pub(crate) struct SingleFilter<'a> {
    x: MatRef<'a, f64>,
    y: MatRef<'a, f64>,
    xxt: Mat<f64>,
    yxt: Mat<f64>,
    filter_penalty: Option<(Mat<f64>, f64)>,
}

impl<'a> SingleFilter<'a> {
    pub(crate) fn new(x: MatRef<'a, f64>, y: MatRef<'a, f64>) -> Self {
        Self {
            x,
            y,
            xxt: x * x.transpose(),
            yxt: y * x.transpose(),
            filter_penalty: None,
        }
    }
}

impl FilterModel for SingleFilter<'_> {
    fn step1(
        &mut self,
        s: MatRef<'_, f64>,
        gamma: f64,
        _current: &[Mat<f64>],
    ) -> Result<Vec<Mat<f64>>> {
        let mut pens = vec![FilterPenalty {
            c: s,
            weight: gamma,
        }];
        if let Some((c, w)) = &self.filter_penalty {
            pens.push(FilterPenalty {
                c: c.as_ref(),
                weight: *w,
            });
        }
        Ok(vec![step1_solve(
            self.xxt.as_ref(),
            self.yxt.as_ref(),
            &pens,
        )?])
    }

    fn data_fit(&self, filters: &[Mat<f64>]) -> f64 {
        let h = filters[0].as_ref();
        let mut v = frob_sq(sub(self.y, (h * self.x).as_ref()).as_ref());
        if let Some((c, w)) = &self.filter_penalty {
            v += w * frob_sq(commutator(c.as_ref(), h).as_ref());
        }
        v
    }
}

pub(crate) fn finish_single(out: AltOutput, config: &SolverConfig) -> Result<RfiResult> {
    let r = config
        .filter_order
        .unwrap_or(out.s_hat.n())
        .min(out.s_hat.n());
    let h_coeffs = Some(poly_basis_fit(
        out.filters[0].as_ref(),
        out.s_hat.matrix(),
        r,
    )?);
    Ok(RfiResult {
        filters: out.filters,
        s_hat: out.s_hat,
        h_coeffs,
        trace: out.trace,
        phases: out.phases,
        converged: out.converged,
    })
}

/// Robust identification with graph denoising: alternates the closed-form
/// filter step with the reweighted graph step, starting from `S = S̄`.
pub fn rfi_alternating(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: &Gso,
    config: &SolverConfig,
) -> Result<RfiResult> {
    super::check_signals(x, y, s_bar.n())?;
    let mut model = SingleFilter::new(x, y);
    let out = run_alternating(
        &mut model,
        s_bar,
        config,
        &[],
        Vec::new(),
        inner_control(config),
    )?;
    finish_single(out, config)
}

/// Covariances for the stationarity-penalized solver.
#[derive(Debug, Clone)]
pub struct StationaryInputs {
    /// Input covariance; white inputs can leave it unset.
    pub cx: Option<Mat<f64>>,
    pub cy: Mat<f64>,
}

impl StationaryInputs {
    /// Sample covariances `XXᵀ/M` and `YYᵀ/M`.
    pub fn sample(x: MatRef<'_, f64>, y: MatRef<'_, f64>) -> Result<Self> {
        Ok(Self {
            cx: Some(sample_covariance(x)?),
            cy: sample_covariance(y)?,
        })
    }
}

/// A scalar multiple of the identity commutes with everything, so its
/// penalty vanishes identically and is dropped.
fn is_scalar_identity(c: MatRef<'_, f64>) -> bool {
    let n = c.nrows();
    (0..n).all(|j| {
        (0..n).all(|i| {
            if i == j {
                c[(i, i)] == c[(0, 0)]
            } else {
                c[(i, j)] == 0.0
            }
        })
    })
}

/// [`rfi_alternating`] with the graph step penalized by
/// `ρ_x‖C_x S − S C_x‖² + ρ_y‖C_y S − S C_y‖²` and, when `rho_filter > 0`, the
/// filter step by `ρ'‖C_y H − H C_y‖²`.
pub fn rfi_alternating_stationary(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: &Gso,
    config: &SolverConfig,
    cov: &StationaryInputs,
) -> Result<RfiResult> {
    let n = s_bar.n();
    super::check_signals(x, y, n)?;
    let shapes_ok = cov.cy.nrows() == n
        && cov.cy.ncols() == n
        && cov
            .cx
            .as_ref()
            .is_none_or(|c| c.nrows() == n && c.ncols() == n);
    if !shapes_ok {
        return Err(Error::DimensionMismatch(
            "covariance matrices must be N x N".into(),
        ));
    }
    let mut model = SingleFilter::new(x, y);
    if config.rho_filter > 0.0 && !is_scalar_identity(cov.cy.as_ref()) {
        model.filter_penalty = Some((cov.cy.clone(), config.rho_filter));
    }
    let mut graph_terms: Vec<(MatRef<'_, f64>, f64)> = Vec::new();
    if let Some(cx) = &cov.cx {
        if config.rho_x > 0.0 && !is_scalar_identity(cx.as_ref()) {
            graph_terms.push((cx.as_ref(), config.rho_x));
        }
    }
    if config.rho_y > 0.0 && !is_scalar_identity(cov.cy.as_ref()) {
        graph_terms.push((cov.cy.as_ref(), config.rho_y));
    }
    let out = run_alternating(
        &mut model,
        s_bar,
        config,
        &graph_terms,
        Vec::new(),
        inner_control(config),
    )?;
    finish_single(out, config)
}
