use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::linalg::{frob_sq, sub};
use crate::solver::{
    check_signals, inner_control, run_alternating, step1_solve, FilterModel, FilterPenalty,
    RfiResult, SolverConfig,
};

/// `K` input/output pairs observed on the same graph, with data-fit weights `α_k`.
#[derive(Debug, Clone)]
pub struct MultiSignalSet {
    pub pairs: Vec<(Mat<f64>, Mat<f64>)>,
    pub alpha: Vec<f64>,
}

impl MultiSignalSet {
    /// Unit weights.
    pub fn new(pairs: Vec<(Mat<f64>, Mat<f64>)>) -> Self {
        let k = pairs.len();
        Self {
            pairs,
            alpha: vec![1.0; k],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::InvalidArgument("need at least one filter".into()));
        }
        if self.alpha.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} pairs",
                self.alpha.len(),
                self.pairs.len()
            )));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weights must be > 0, got {a}"
            )));
        }
        for (x, y) in &self.pairs {
            check_signals(x.as_ref(), y.as_ref(), n)?;
        }
        Ok(())
    }
}

struct JointModel<'a> {
    set: &'a MultiSignalSet,
    moments: Vec<(Mat<f64>, Mat<f64>)>,
}

impl FilterModel for JointModel<'_> {
    fn step1(
        &mut self,
        s: MatRef<'_, f64>,
        gamma: f64,
        _current: &[Mat<f64>],
    ) -> Result<Vec<Mat<f64>>> {
        // Separable across k with S fixed.
        self.moments
            .par_iter()
            .zip(self.set.alpha.par_iter())
            .map(|((xxt, yxt), &alpha)| {
                step1_solve(
                    xxt.as_ref(),
                    yxt.as_ref(),
                    &[FilterPenalty {
                        c: s,
                        weight: gamma / alpha,
                    }],
                )
            })
            .collect()
    }

    fn data_fit(&self, filters: &[Mat<f64>]) -> f64 {
        self.set
            .pairs
            .iter()
            .zip(&self.set.alpha)
            .zip(filters)
            .map(|(((x, y), &a), h)| a * frob_sq(sub(y.as_ref(), (h * x).as_ref()).as_ref()))
            .sum()
    }
}

/// Joint identification of `K` filters and one denoised graph.
///
/// Filter `k` is updated with commutativity weight `γ/α_k`; the graph step
/// penalizes `Σ_k γ‖S H_k − H_k S‖²`.
pub fn joint_rfi(multi: &MultiSignalSet, s_bar: &Gso, config: &SolverConfig) -> Result<RfiResult> {
    multi.validate(s_bar.n())?;
    let moments = multi
        .pairs
        .iter()
        .map(|(x, y)| (x * x.transpose(), y * x.transpose()))
        .collect();
    let mut model = JointModel {
        set: multi,
        moments,
    };
    let out = run_alternating(
        &mut model,
        s_bar,
        config,
        &[],
        Vec::new(),
        inner_control(config),
    )?;
    crate::solver::finish_single(out, config)
}
