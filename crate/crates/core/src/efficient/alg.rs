use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use super::coord::SweepControl;
use super::gradient::{gd_from_moments, StepSize};
use crate::error::{Error, Result};
use crate::graph::{build_filter, Gso};
use crate::linalg::{frob_sq, sub};
use crate::solver::{
    check_signals, fi_closed_form, run_alternating, FilterModel, RfiResult, SolverConfig,
};

/// Settings of the reduced-complexity solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficientConfig {
    /// Gradient steps per filter update.
    pub tau1: usize,
    /// Coordinate-descent sweeps per graph update.
    pub tau2: usize,
    /// Fixed gradient step; unset selects `1/L`.
    pub step_size: Option<f64>,
    /// Order of the closed-form warm start; unset means `min(5, N)`.
    pub init_order: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for EfficientConfig {
    fn default() -> Self {
        Self {
            tau1: 50,
            tau2: 50,
            step_size: None,
            init_order: None,
            solver: SolverConfig::default(),
        }
    }
}

impl EfficientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau1 == 0 || self.tau2 == 0 {
            return Err(Error::Config("tau1 and tau2 must be >= 1".into()));
        }
        if let Some(m) = self.step_size {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Config(format!("step_size must be > 0, got {m}")));
            }
        }
        self.solver.validate()
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn step(&self) -> StepSize {
        self.step_size.map_or(StepSize::Auto, StepSize::Fixed)
    }
}

struct GdModel<'a> {
    x: MatRef<'a, f64>,
    y: MatRef<'a, f64>,
    xxt: Mat<f64>,
    yxt: Mat<f64>,
    y_sq: f64,
    step: StepSize,
    tau1: usize,
    last_steps: usize,
}

impl FilterModel for GdModel<'_> {
    fn step1(
        &mut self,
        s: MatRef<'_, f64>,
        gamma: f64,
        current: &[Mat<f64>],
    ) -> Result<Vec<Mat<f64>>> {
        let out = gd_from_moments(
            current[0].as_ref(),
            s,
            self.xxt.as_ref(),
            self.yxt.as_ref(),
            self.y_sq,
            gamma,
            self.step,
            self.tau1,
        )?;
        self.last_steps = out.steps;
        Ok(vec![out.h])
    }

    fn data_fit(&self, filters: &[Mat<f64>]) -> f64 {
        frob_sq(sub(self.y, (&filters[0] * self.x).as_ref()).as_ref())
    }

    fn last_inner_iters(&self) -> usize {
        self.last_steps
    }
}

/// Warm start: closed-form coefficients on `S̄` of order `min(5, N)`; if `S̄` is
/// not diagonalizable, ridge-regularized least squares `YXᵀ(XXᵀ + εI)⁻¹`.
fn initial_filter(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: &Gso,
    order: usize,
) -> Result<Mat<f64>> {
    if let Ok(fit) = fi_closed_form(x, y, s_bar, order) {
        if let Some(h) = build_filter(s_bar, &fit.coeffs)?.matrix() {
            return Ok(h.to_owned());
        }
    }
    let n = x.nrows();
    let mut g = x * x.transpose();
    let trace: f64 = (0..n).map(|i| g[(i, i)]).sum();
    for i in 0..n {
        g[(i, i)] += 1e-8 * trace.max(1.0) / n as f64;
    }
    let yxt = y * x.transpose();
    let llt = g
        .llt(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    // H G = YXᵀ  ⇔  G Hᵀ = X Yᵀ (G symmetric)
    let ht = llt.solve(yxt.transpose());
    Ok(ht.transpose().to_owned())
}

/// Reduced-complexity robust identification.
///
/// Each outer iteration runs `tau1` gradient steps on the filter (warm-started
/// from the previous iterate) and `tau2` coordinate-descent sweeps on the graph.
pub fn efficient_rfi(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: &Gso,
    config: &EfficientConfig,
) -> Result<RfiResult> {
    config.validate()?;
    let n = s_bar.n();
    check_signals(x, y, n)?;
    let order = config.init_order.unwrap_or(5).clamp(1, n);
    let h0 = initial_filter(x, y, s_bar, order)?;
    let mut model = GdModel {
        x,
        y,
        xxt: x * x.transpose(),
        yxt: y * x.transpose(),
        y_sq: frob_sq(y),
        step: config.step(),
        tau1: config.tau1,
        last_steps: 0,
    };
    let control = SweepControl::sweeps(config.tau2);
    let out = run_alternating(&mut model, s_bar, &config.solver, &[], vec![h0], control)?;
    crate::solver::finish_single(out, &config.solver)
}
