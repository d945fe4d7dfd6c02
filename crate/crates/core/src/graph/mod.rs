//! Graph-shift operators and everything generated from them.

mod filter;
mod generate;
mod gso;
pub mod io;
mod metrics;
mod perturb;
mod signals;
mod spectral;

pub use filter::{build_filter, poly_basis_fit, CoeffFit, GraphFilter};
pub use generate::{generate_er, generate_small_world};
pub use gso::{Gso, GsoFamily};
pub use metrics::{commutator_norm, nerr, nerr_vec};
pub use perturb::{
    perturb, perturb_detailed, remove_links, Perturbation, PerturbationKind, PerturbationSpec,
};
pub use signals::{sample_covariance, synthesize_signals, InputDist, SignalSet};
pub use spectral::SpectralDecomp;
