use faer::{Mat, MatRef};

use super::sigma::{sigma_column, SparseColumn};
use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::linalg::{commutator, vec_of};
use crate::solver::{MmWeights, SolverConfig};

/// Sweeps stop early once no entry moves by more than this.
pub const STEP_TOL: f64 = 1e-9;

/// A quadratic penalty `weight · ‖S A − A S‖²_F` on the graph.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorTerm<'a> {
    pub a: MatRef<'a, f64>,
    pub weight: f64,
}

/// Reweighted denoising subproblem over the adjacency set:
///
/// `min_S Σ λ Ω̄_ij |S_ij − S̄_ij| + β Ω_ij |S_ij| + Σ_t w_t ‖S A_t − A_t S‖²_F`
/// subject to `S ≥ 0`, `diag(S) = 0` and, optionally, `S = Sᵀ`.
#[derive(Debug, Clone)]
pub struct DenoiseProblem<'a> {
    pub terms: Vec<CommutatorTerm<'a>>,
    pub s_bar: MatRef<'a, f64>,
    pub weights: &'a MmWeights,
    pub lambda: f64,
    pub beta: f64,
    pub symmetric: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepControl {
    pub max_sweeps: usize,
    /// Largest entry change below which sweeping stops.
    pub step_tol: f64,
    /// Relative surrogate change below which sweeping stops; 0 disables the test.
    pub rel_obj_tol: f64,
    /// Record the surrogate after every single coordinate update (testing aid).
    pub record_updates: bool,
}

impl SweepControl {
    pub fn sweeps(max_sweeps: usize) -> Self {
        Self {
            max_sweeps,
            step_tol: STEP_TOL,
            rel_obj_tol: 0.0,
            record_updates: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CdOutcome {
    pub s: Mat<f64>,
    pub sweeps: usize,
    /// A stopping tolerance was met before `max_sweeps`.
    pub converged: bool,
    /// Surrogate objective at the returned point.
    pub objective: f64,
    /// Surrogate after each update, when requested.
    pub update_trace: Vec<f64>,
    /// Incrementally maintained `vec(S A_t − A_t S)`, one per term.
    pub residuals: Vec<Vec<f64>>,
}

/// Exact minimizer of `q s² + 2 g s + lw |s − s̄| + bw s` over `s ≥ 0`.
///
/// With `q = 0` the objective is piecewise linear; it is minimized at `s̄` when
/// `lw ≥ bw + 2g` (ties go to `s̄`) and at 0 otherwise.
pub fn scalar_minimizer(q: f64, g: f64, s_bar: f64, lw: f64, bw: f64) -> f64 {
    debug_assert!(s_bar >= 0.0, "reference entry must be feasible");
    if q <= 0.0 {
        return if bw + 2.0 * g <= lw { s_bar } else { 0.0 };
    }
    let u = -(2.0 * g + bw) / (2.0 * q);
    let thr = lw / (2.0 * q);
    if s_bar < u - thr {
        (u - thr).max(0.0)
    } else if s_bar > u + thr {
        (u + thr).max(0.0)
    } else {
        s_bar
    }
}

/// Projected soft-thresholding update of one entry.
///
/// Minimizes `λω̄|s − s̄| + βω s + γ‖σ s + r‖²` over `s ≥ 0`, where `r` is the
/// residual with this entry's contribution removed; `sigma_dot_r = σᵀr`.
#[allow(clippy::too_many_arguments)]
pub fn coord_update(
    s_bar: f64,
    sigma_sq: f64,
    sigma_dot_r: f64,
    omega: f64,
    omega_bar: f64,
    lambda: f64,
    beta: f64,
    gamma: f64,
) -> f64 {
    scalar_minimizer(
        gamma * sigma_sq,
        gamma * sigma_dot_r,
        s_bar,
        lambda * omega_bar,
        beta * omega,
    )
}

struct Var {
    i: usize,
    j: usize,
    s_bar: f64,
    lw: f64,
    bw: f64,
    cols: Vec<SparseColumn>,
    q: f64,
}

fn merge(a: SparseColumn, b: SparseColumn) -> SparseColumn {
    let mut pairs: Vec<(usize, f64)> = a
        .rows
        .into_iter()
        .zip(a.vals)
        .chain(b.rows.into_iter().zip(b.vals))
        .collect();
    pairs.sort_by_key(|p| p.0);
    let mut out = SparseColumn::default();
    for (r, v) in pairs {
        if out.rows.last() == Some(&r) {
            *out.vals.last_mut().unwrap() += v;
        } else {
            out.rows.push(r);
            out.vals.push(v);
        }
    }
    let (rows, vals): (Vec<_>, Vec<_>) = out
        .rows
        .into_iter()
        .zip(out.vals)
        .filter(|p| p.1 != 0.0)
        .unzip();
    SparseColumn { rows, vals }
}

impl DenoiseProblem<'_> {
    fn n(&self) -> usize {
        self.s_bar.nrows()
    }

    fn validate(&self, s_init: MatRef<'_, f64>) -> Result<()> {
        let n = self.n();
        if self.s_bar.ncols() != n
            || s_init.nrows() != n
            || s_init.ncols() != n
            || self.weights.n() != n
        {
            return Err(Error::DimensionMismatch(
                "denoising problem shapes disagree".into(),
            ));
        }
        for t in &self.terms {
            if t.a.nrows() != n || t.a.ncols() != n {
                return Err(Error::DimensionMismatch("commutator term shape".into()));
            }
            if !(t.weight >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "term weight {} must be >= 0",
                    t.weight
                )));
            }
        }
        if !(self.lambda >= 0.0 && self.beta >= 0.0) {
            return Err(Error::InvalidArgument(
                "lambda and beta must be >= 0".into(),
            ));
        }
        for j in 0..n {
            for i in 0..n {
                if self.s_bar[(i, j)] < 0.0 || s_init[(i, j)] < 0.0 {
                    return Err(Error::InvalidGso(
                        "denoising needs nonnegative S̄ and initial S".into(),
                    ));
                }
                if i != j {
                    let (ob, o) = (self.weights.omega_bar[(i, j)], self.weights.omega[(i, j)]);
                    if !(ob > 0.0 && o > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "weights at ({i}, {j}) must be > 0"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn variables(&self) -> Vec<Var> {
        let n = self.n();
        let active: Vec<&CommutatorTerm<'_>> =
            self.terms.iter().filter(|t| t.weight > 0.0).collect();
        let mut vars = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || (self.symmetric && j < i) {
                    continue;
                }
                let w = self.weights;
                let mut lw = self.lambda * w.omega_bar[(i, j)];
                let mut bw = self.beta * w.omega[(i, j)];
                if self.symmetric {
                    lw += self.lambda * w.omega_bar[(j, i)];
                    bw += self.beta * w.omega[(j, i)];
                }
                let cols: Vec<SparseColumn> = active
                    .iter()
                    .map(|t| {
                        let c = sigma_column(t.a, i, j);
                        if self.symmetric {
                            merge(c, sigma_column(t.a, j, i))
                        } else {
                            c
                        }
                    })
                    .collect();
                let q = active
                    .iter()
                    .zip(&cols)
                    .map(|(t, c)| t.weight * c.norm_sq())
                    .sum();
                vars.push(Var {
                    i,
                    j,
                    s_bar: self.s_bar[(i, j)],
                    lw,
                    bw,
                    cols,
                    q,
                });
            }
        }
        vars
    }

    /// Surrogate value at `s` with residuals already computed.
    fn surrogate(
        &self,
        vars: &[Var],
        s: &Mat<f64>,
        residuals: &[Vec<f64>],
        weights: &[f64],
    ) -> f64 {
        let mut acc = 0.0;
        for v in vars {
            let x = s[(v.i, v.j)];
            acc += v.lw * (x - v.s_bar).abs() + v.bw * x;
        }
        for (r, w) in residuals.iter().zip(weights) {
            acc += w * r.iter().map(|e| e * e).sum::<f64>();
        }
        acc
    }

    /// Surrogate objective evaluated from scratch.
    pub fn evaluate(&self, s: MatRef<'_, f64>) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                let x = s[(i, j)];
                acc +=
                    self.lambda * self.weights.omega_bar[(i, j)] * (x - self.s_bar[(i, j)]).abs();
                acc += self.beta * self.weights.omega[(i, j)] * x.abs();
            }
        }
        for t in &self.terms {
            acc += t.weight * crate::linalg::frob_sq(commutator(s, t.a).as_ref());
        }
        acc
    }

    /// Cyclic coordinate descent from `s_init`, visiting off-diagonal entries
    /// in row-major order.
    pub fn solve(&self, s_init: MatRef<'_, f64>, control: SweepControl) -> Result<CdOutcome> {
        self.validate(s_init)?;
        let n = self.n();
        let mut s = s_init.to_owned();
        for i in 0..n {
            s[(i, i)] = 0.0;
        }
        if self.symmetric {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 0.5 * (s[(i, j)] + s[(j, i)]);
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
        let active: Vec<&CommutatorTerm<'_>> =
            self.terms.iter().filter(|t| t.weight > 0.0).collect();
        let tw: Vec<f64> = active.iter().map(|t| t.weight).collect();
        let vars = self.variables();
        let mut residuals: Vec<Vec<f64>> = active
            .iter()
            .map(|t| vec_of(commutator(s.as_ref(), t.a).as_ref()))
            .collect();
        let mut objective = self.surrogate(&vars, &s, &residuals, &tw);
        let mut update_trace = Vec::new();
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < control.max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for v in &vars {
                let old = s[(v.i, v.j)];
                let mut dot = 0.0;
                for ((c, r), w) in v.cols.iter().zip(&residuals).zip(&tw) {
                    dot += w * c.dot(r);
                }
                let g = dot - v.q * old;
                let new = scalar_minimizer(v.q, g, v.s_bar, v.lw, v.bw);
                let d = new - old;
                if d != 0.0 {
                    for (c, r) in v.cols.iter().zip(residuals.iter_mut()) {
                        c.axpy(d, r);
                    }
                    s[(v.i, v.j)] = new;
                    if self.symmetric {
                        s[(v.j, v.i)] = new;
                    }
                    max_change = max_change.max(d.abs());
                }
                if control.record_updates {
                    update_trace.push(self.surrogate(&vars, &s, &residuals, &tw));
                }
            }
            let next = self.surrogate(&vars, &s, &residuals, &tw);
            let rel = (objective - next).abs() / objective.abs().max(f64::MIN_POSITIVE);
            objective = next;
            if max_change < control.step_tol
                || (control.rel_obj_tol > 0.0 && rel < control.rel_obj_tol)
            {
                converged = true;
                break;
            }
        }
        Ok(CdOutcome {
            s,
            sweeps,
            converged,
            objective,
            update_trace,
            residuals,
        })
    }
}

/// Result of a denoising step.
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub gso: Gso,
    pub sweeps: usize,
    pub converged: bool,
    pub surrogate: f64,
}

impl DenoiseOutcome {
    pub(crate) fn from_cd(cd: CdOutcome, symmetric: bool) -> Result<Self> {
        let gso = Gso::new(cd.s, crate::graph::GsoFamily::Adjacency, symmetric)?;
        Ok(Self {
            gso,
            sweeps: cd.sweeps,
            converged: cd.converged,
            surrogate: cd.objective,
        })
    }
}

/// `τ_max2` sweeps of cyclic coordinate descent on
/// `Σ λΩ̄|S − S̄| + βΩ|S| + γ‖SH − HS‖²`, starting at `s_init`.
pub fn denoise_coord_descent(
    h: MatRef<'_, f64>,
    s_init: &Gso,
    s_bar: &Gso,
    weights: &MmWeights,
    config: &SolverConfig,
    gamma: f64,
    tau_max2: usize,
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
    let cd = problem.solve(s_init.matrix(), SweepControl::sweeps(tau_max2))?;
    DenoiseOutcome::from_cd(cd, symmetric)
}
