use faer::MatRef;

use super::config::SolverConfig;
use super::weights::log_penalty;
use crate::linalg::{commutator, frob_sq, sub};

/// `‖Y − HX‖² + λ r_δ1(S − S̄) + β r_δ2(S) + γ‖SH − HS‖²` at `γ = config.gamma0`.
pub fn objective_eval(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: MatRef<'_, f64>,
    config: &SolverConfig,
) -> f64 {
    objective_at(h, s, x, y, s_bar, config, config.gamma0)
}

/// [`objective_eval`] with an explicit commutativity weight.
pub fn objective_at(
    h: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    s_bar: MatRef<'_, f64>,
    config: &SolverConfig,
    gamma: f64,
) -> f64 {
    let fit = frob_sq(sub(y, (h * x).as_ref()).as_ref());
    fit + graph_penalties(s, s_bar, config) + gamma * frob_sq(commutator(s, h).as_ref())
}

/// `λ r_δ1(S − S̄) + β r_δ2(S)`.
pub fn graph_penalties(s: MatRef<'_, f64>, s_bar: MatRef<'_, f64>, config: &SolverConfig) -> f64 {
    let mut acc = 0.0;
    if config.lambda != 0.0 {
        acc += config.lambda * log_penalty(sub(s, s_bar).as_ref(), config.delta1);
    }
    if config.beta != 0.0 {
        acc += config.beta * log_penalty(s, config.delta2);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    #[test]
    fn reference_values() {
        let n = 3;
        let z = Mat::<f64>::zeros(n, n);
        let x = Mat::from_fn(n, 2, |i, j| (i + j) as f64);
        let y = Mat::from_fn(n, 2, |i, j| i as f64 - j as f64);
        let mut c = SolverConfig::default();
        c.lambda = 0.0;
        c.beta = 0.0;
        let v = objective_eval(
            z.as_ref(),
            z.as_ref(),
            x.as_ref(),
            y.as_ref(),
            z.as_ref(),
            &c,
        );
        assert_eq!(v, frob_sq(y.as_ref()));

        c.lambda = 2.0;
        let v2 = objective_eval(
            z.as_ref(),
            z.as_ref(),
            x.as_ref(),
            y.as_ref(),
            z.as_ref(),
            &c,
        );
        assert!((v2 - v - 2.0 * 9.0 * c.delta1.ln()).abs() < 1e-12);
    }
}
