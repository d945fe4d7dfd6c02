use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GsoFamily;

/// Hyperparameters of the alternating solvers.
///
/// Serialized as flat TOML whose keys are exactly the field names; any key
/// may be omitted to keep its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the log-distance to the observed operator.
    pub lambda: f64,
    /// Weight of the log-sparsity penalty.
    pub beta: f64,
    /// Commutativity weight at the first iteration.
    pub gamma0: f64,
    /// Geometric growth factor of the commutativity weight (1 keeps it fixed).
    pub gamma_growth: f64,
    pub gamma_max: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Outer iterations.
    pub t_max: usize,
    /// Relative change of the denoising surrogate that ends the inner loop.
    pub inner_tol: f64,
    /// Cap on coordinate-descent sweeps per denoising step.
    pub inner_max: usize,
    /// Relative objective change that ends the outer loop once the
    /// commutativity weight has stopped growing. Zero disables early stopping.
    pub early_stop_tol: f64,
    /// Penalty weight of `‖C_x S − S C_x‖²` (stationary variant only).
    pub rho_x: f64,
    /// Penalty weight of `‖C_y S − S C_y‖²` (stationary variant only).
    pub rho_y: f64,
    /// Penalty weight of `‖C_y H − H C_y‖²` in the filter step (stationary variant only).
    pub rho_filter: f64,
    /// Recompute the log-penalty weights every iteration; `false` freezes them at one
    /// (plain weighted ℓ1).
    pub reweight: bool,
    /// Force the symmetric structural set; unset inherits the observed operator's flag.
    pub symmetric: Option<bool>,
    pub family: GsoFamily,
    /// Order used when recovering coefficients from the final filter; unset means N.
    pub filter_order: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            beta: 1e-5,
            gamma0: 1.0,
            gamma_growth: 2.0,
            gamma_max: 1e4,
            delta1: 1e-3,
            delta2: 1e-3,
            t_max: 20,
            inner_tol: 1e-8,
            inner_max: 200,
            early_stop_tol: 1e-6,
            rho_x: 1.0,
            rho_y: 1.0,
            rho_filter: 0.0,
            reweight: true,
            symmetric: None,
            family: GsoFamily::Adjacency,
            filter_order: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("gamma0", self.gamma0),
            ("gamma_growth", self.gamma_growth),
            ("gamma_max", self.gamma_max),
            ("inner_tol", self.inner_tol),
            ("early_stop_tol", self.early_stop_tol),
            ("rho_x", self.rho_x),
            ("rho_y", self.rho_y),
            ("rho_filter", self.rho_filter),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be a finite value >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be >= 1".into()));
        }
        if self.inner_max == 0 {
            return Err(Error::Config("inner_max must be >= 1".into()));
        }
        if self.family != GsoFamily::Adjacency {
            return Err(Error::Config(
                "only the adjacency structural set can be optimized".into(),
            ));
        }
        Ok(())
    }

    /// `min(γ0 c^t, γ_max)`.
    pub fn gamma_at(&self, t: usize) -> f64 {
        let g = self.gamma0 * self.gamma_growth.powi(t.min(i32::MAX as usize) as i32);
        if g.is_finite() {
            g.min(self.gamma_max)
        } else {
            self.gamma_max
        }
    }

    /// Same configuration with a constant commutativity weight.
    pub fn with_fixed_gamma(mut self, gamma: f64) -> Self {
        self.gamma0 = gamma;
        self.gamma_growth = 1.0;
        self.gamma_max = gamma;
        self
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
