use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{commutator, frob, frob_sq, spectral_norm, sub};

/// `f1(H) = ‖Y − HX‖² + γ‖SH − HS‖²`.
pub fn f1_value(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    gamma: f64,
) -> f64 {
    frob_sq(sub(y, (h * x).as_ref()).as_ref()) + gamma * frob_sq(commutator(s, h).as_ref())
}

/// `∇f1 = 2(HXXᵀ − YXᵀ) + 2γ(Sᵀ(SH − HS) − (SH − HS)Sᵀ)`.
pub fn grad_f1(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    gamma: f64,
) -> Mat<f64> {
    let xxt = x * x.transpose();
    let yxt = y * x.transpose();
    grad_from_moments(h, s, xxt.as_ref(), yxt.as_ref(), gamma)
}

fn grad_from_moments(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    xxt: MatRef<'_, f64>,
    yxt: MatRef<'_, f64>,
    gamma: f64,
) -> Mat<f64> {
    let mut g = sub((h * xxt).as_ref(), yxt);
    if gamma != 0.0 {
        let c = commutator(s, h);
        let cs = sub((s.transpose() * &c).as_ref(), (&c * s.transpose()).as_ref());
        g = g + cs * faer::Scale(gamma);
    }
    g * faer::Scale(2.0)
}

/// `f1` up to the constant `‖Y‖²`, from the moments `XXᵀ` and `YXᵀ`.
fn f1_shifted(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    xxt: MatRef<'_, f64>,
    yxt: MatRef<'_, f64>,
    gamma: f64,
) -> f64 {
    let hg = h * xxt;
    let mut v = 0.0;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            v += h[(i, j)] * (hg[(i, j)] - 2.0 * yxt[(i, j)]);
        }
    }
    if gamma != 0.0 {
        v += gamma * frob_sq(commutator(s, h).as_ref());
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `1 / L` with `L = 2‖XXᵀ‖₂ + 8γ‖S‖₂²`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct GdOutcome {
    pub h: Mat<f64>,
    pub steps: usize,
    /// Step size in use at the end (after any halving).
    pub mu: f64,
    /// `f1` at the initial point and after every step.
    pub f1_trace: Vec<f64>,
}

/// Up to `tau_max1` gradient steps `H ← H − μ∇f1` from `h_init`.
///
/// After three consecutive increases of `f1` the step is halved. Stops early
/// when a step no longer changes `H`.
pub fn filter_step_gd(
    h_init: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    gamma: f64,
    step: StepSize,
    tau_max1: usize,
) -> Result<GdOutcome> {
    let xxt = x * x.transpose();
    let yxt = y * x.transpose();
    let y_sq = frob_sq(y);
    gd_from_moments(
        h_init,
        s,
        xxt.as_ref(),
        yxt.as_ref(),
        y_sq,
        gamma,
        step,
        tau_max1,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn gd_from_moments(
    h_init: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    xxt: MatRef<'_, f64>,
    yxt: MatRef<'_, f64>,
    y_sq: f64,
    gamma: f64,
    step: StepSize,
    tau_max1: usize,
) -> Result<GdOutcome> {
    if tau_max1 == 0 {
        return Err(Error::InvalidArgument("tau_max1 must be >= 1".into()));
    }
    let mut mu = match step {
        StepSize::Auto => {
            let l = 2.0 * spectral_norm(xxt)? + 8.0 * gamma * spectral_norm(s)?.powi(2);
            if l > 0.0 {
                1.0 / l
            } else {
                1.0
            }
        }
        StepSize::Fixed(m) if m > 0.0 && m.is_finite() => m,
        StepSize::Fixed(m) => {
            return Err(Error::InvalidArgument(format!(
                "step size must be > 0, got {m}"
            )))
        }
    };
    let mut h = h_init.to_owned();
    let mut f = f1_shifted(h.as_ref(), s, xxt, yxt, gamma);
    let mut f1_trace = vec![f + y_sq];
    let mut rises = 0;
    let mut steps = 0;
    while steps < tau_max1 {
        let g = grad_from_moments(h.as_ref(), s, xxt, yxt, gamma);
        let next = sub(h.as_ref(), (&g * faer::Scale(mu)).as_ref());
        steps += 1;
        let moved = frob(sub(next.as_ref(), h.as_ref()).as_ref());
        let f_next = f1_shifted(next.as_ref(), s, xxt, yxt, gamma);
        rises = if f_next > f { rises + 1 } else { 0 };
        h = next;
        f = f_next;
        f1_trace.push(f + y_sq);
        if rises >= 3 {
            mu *= 0.5;
            rises = 0;
        }
        if moved <= 1e-15 * frob(h.as_ref()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(GdOutcome {
        h,
        steps,
        mu,
        f1_trace,
    })
}
