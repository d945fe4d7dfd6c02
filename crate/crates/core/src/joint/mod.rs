//! Several filters sharing one graph: independent input/output pairs, and
//! autoregressive time series.

mod ar;
mod multi;

pub use ar::{ar_fit_ls, ar_predict, ar_rfi, ArOptions, ArSeries, ArUpdate};
pub use multi::{joint_rfi, MultiSignalSet};
