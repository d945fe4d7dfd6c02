//! Reduced-complexity solver: gradient descent on the filter and cyclic
//! coordinate descent with projected soft-thresholding on the graph.

mod alg;
mod coord;
mod gradient;
mod sigma;

pub use alg::{efficient_rfi, EfficientConfig};
pub use coord::{
    coord_update, denoise_coord_descent, scalar_minimizer, CdOutcome, CommutatorTerm,
    DenoiseOutcome, DenoiseProblem, SweepControl, STEP_TOL,
};
pub use gradient::{f1_value, filter_step_gd, grad_f1, GdOutcome, StepSize};
pub use sigma::{build_sigma_columns, SparseColumn, SparseKronColumns};
