//! Filter identification: the non-robust closed form and the robust
//! alternating solver with graph denoising.

mod alternating;
mod config;
mod denoise;
mod fi;
mod identifiability;
mod objective;
pub mod report;
mod step1;
mod weights;

pub(crate) use alternating::{finish_single, run_alternating, FilterModel};
pub use alternating::{
    rfi_alternating, rfi_alternating_stationary, IterationRecord, Phase, PhaseRecord, RfiResult,
    StationaryInputs,
};
pub use config::SolverConfig;
pub use denoise::denoise_step;
pub(crate) use denoise::inner_control;
pub(crate) use fi::check_signals;
pub use fi::{fi_closed_form, fi_filter, FiResult};
pub use identifiability::{
    identifiability_check, step1_system_rank, IdentifiabilityReport, SystemRank,
};
pub use objective::{graph_penalties, objective_at, objective_eval};
pub use step1::{rfi_step1, step1_solve, step1_system, FilterPenalty};
pub use weights::{linearized_log_penalty, log_penalty, mm_weights, MmWeights};

use crate::error::Result;
use crate::graph::{poly_basis_fit, CoeffFit};
use faer::MatRef;

/// Least-squares polynomial coefficients of `h_hat` on `s_hat`
/// (minimum norm, rank deficiency flagged).
pub fn recover_coeffs(
    h_hat: MatRef<'_, f64>,
    s_hat: MatRef<'_, f64>,
    r: usize,
) -> Result<CoeffFit> {
    poly_basis_fit(h_hat, s_hat, r)
}
