use faer::MatRef;

use super::config::SolverConfig;
use super::weights::MmWeights;
use crate::efficient::{CommutatorTerm, DenoiseOutcome, DenoiseProblem, SweepControl, STEP_TOL};
use crate::error::Result;
use crate::graph::Gso;

/// Graph step: minimizes the reweighted surrogate
/// `Σ λΩ̄|S − S̄| + βΩ|S| + γ‖SH − HS‖²` over the adjacency set, starting at
/// `s_init`. Sweeps stop at `inner_max`, at a relative surrogate change below
/// `inner_tol`, or when no entry moves; `converged` is false only in the first
/// case.
pub fn denoise_step(
    h: MatRef<'_, f64>,
    s_init: &Gso,
    s_bar: &Gso,
    weights: &MmWeights,
    config: &SolverConfig,
    gamma: f64,
) -> Result<DenoiseOutcome> {
    let symmetric = config.symmetric.unwrap_or(s_bar.is_symmetric());
    let problem = DenoiseProblem {
        terms: vec![CommutatorTerm {
            a: h,
            weight: gamma,
        }],
        s_bar: s_bar.matrix(),
        weights,
        lambda: config.lambda,
        beta: config.beta,
        symmetric,
    };
    let cd = problem.solve(s_init.matrix(), inner_control(config))?;
    DenoiseOutcome::from_cd(cd, symmetric)
}

pub(crate) fn inner_control(config: &SolverConfig) -> SweepControl {
    SweepControl {
        max_sweeps: config.inner_max,
        step_tol: STEP_TOL,
        rel_obj_tol: config.inner_tol,
        record_updates: false,
    }
}
