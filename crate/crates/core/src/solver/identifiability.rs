use faer::MatRef;

use super::step1::{step1_system, FilterPenalty};
use crate::error::Result;
use crate::graph::Gso;

/// Eigenvalue gap below which two graph frequencies count as equal.
pub const GAP_TOL: f64 = 1e-8;
/// Row energy of `V⁻¹X`, relative to `‖V⁻¹X‖_F`, below which a frequency counts as unexcited.
pub const ROW_ENERGY_REL_TOL: f64 = 1e-10;

/// Sufficient conditions for the filter to be uniquely determined by
/// `(X, Y)` once it is constrained to commute with `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifiabilityReport {
    /// All eigenvalues of `S` are pairwise distinct.
    pub distinct_eigs: bool,
    /// Every row of `V⁻¹X` carries energy.
    pub excited_frequencies: bool,
    pub min_gap: f64,
    pub min_row_energy: f64,
}

impl IdentifiabilityReport {
    pub fn holds(&self) -> bool {
        self.distinct_eigs && self.excited_frequencies
    }
}

pub fn identifiability_check(x: MatRef<'_, f64>, gso: &Gso) -> Result<IdentifiabilityReport> {
    if x.nrows() != gso.n() {
        return Err(crate::Error::DimensionMismatch(format!(
            "X has {} rows, graph has {} nodes",
            x.nrows(),
            gso.n()
        )));
    }
    let dec = gso.spectral()?;
    let min_gap = dec.min_eigval_gap();
    let xt = dec.gft(x);
    let mut total = 0.0;
    let mut min_row = f64::INFINITY;
    for i in 0..xt.nrows() {
        let e: f64 = (0..xt.ncols()).map(|j| xt[(i, j)].norm_sqr()).sum();
        total += e;
        min_row = min_row.min(e.sqrt());
    }
    let total = total.sqrt();
    Ok(IdentifiabilityReport {
        distinct_eigs: min_gap > GAP_TOL,
        excited_frequencies: min_row > ROW_ENERGY_REL_TOL * total,
        min_gap,
        min_row_energy: min_row,
    })
}

/// Numerical rank of the filter-step normal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemRank {
    pub rank: usize,
    pub dim: usize,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl SystemRank {
    pub fn full(&self) -> bool {
        self.rank == self.dim
    }
}

/// Eigenvalues of `XXᵀ⊗I + γ K(S)`, counted above `dim · ε · λ_max`.
pub fn step1_system_rank(x: MatRef<'_, f64>, s: MatRef<'_, f64>, gamma: f64) -> Result<SystemRank> {
    let xxt = x * x.transpose();
    let a = step1_system(
        xxt.as_ref(),
        &[FilterPenalty {
            c: s,
            weight: gamma,
        }],
    );
    let eig = a
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| crate::Error::Decomposition(format!("{e:?}")))?;
    let dim = a.nrows();
    let max_eig = eig.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let min_eig = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let tol = dim as f64 * f64::EPSILON * max_eig;
    let rank = eig.iter().filter(|&&v| v > tol).count();
    Ok(SystemRank {
        rank,
        dim,
        min_eig,
        max_eig,
    })
}
