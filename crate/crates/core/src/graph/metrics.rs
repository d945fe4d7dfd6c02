use faer::MatRef;

use crate::error::{Error, Result};

/// `‖Θ̂ − Θ‖²_F / ‖Θ‖²_F`.
pub fn nerr(estimate: MatRef<'_, f64>, truth: MatRef<'_, f64>) -> Result<f64> {
    if estimate.nrows() != truth.nrows() || estimate.ncols() != truth.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "estimate {}x{} vs truth {}x{}",
            estimate.nrows(),
            estimate.ncols(),
            truth.nrows(),
            truth.ncols()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..truth.ncols() {
        for i in 0..truth.nrows() {
            let d = estimate[(i, j)] - truth[(i, j)];
            num += d * d;
            den += truth[(i, j)] * truth[(i, j)];
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(num / den)
}

/// [`nerr`] for coefficient vectors; the shorter vector is zero-padded.
pub fn nerr_vec(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    let len = estimate.len().max(truth.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let num: f64 = (0..len)
        .map(|k| (at(estimate, k) - at(truth, k)).powi(2))
        .sum();
    Ok(num / den)
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<f64> {
    crate::linalg::commutator_norm(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    #[test]
    fn nerr_reference_values() {
        let t = Mat::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let two = &t * faer::Scale(2.0);
        assert_eq!(nerr(t.as_ref(), t.as_ref()).unwrap(), 0.0);
        assert!((nerr(two.as_ref(), t.as_ref()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            nerr(Mat::<f64>::zeros(3, 2).as_ref(), t.as_ref()).unwrap(),
            1.0
        );
        assert!(matches!(
            nerr(t.as_ref(), Mat::<f64>::zeros(3, 2).as_ref()),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn nerr_vec_pads() {
        assert_eq!(nerr_vec(&[1.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(nerr_vec(&[1.0, 1.0], &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn commutator_of_polynomials_vanishes() {
        let s = Mat::from_fn(4, 4, |i, j| ((i * 3 + j) % 4) as f64);
        let s2 = &s * &s;
        assert!(commutator_norm(s.as_ref(), s2.as_ref()).unwrap() < 1e-12);
        let id = Mat::<f64>::identity(4, 4);
        assert_eq!(commutator_norm(id.as_ref(), s.as_ref()).unwrap(), 0.0);
        let a = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        let b = Mat::from_fn(2, 2, |i, j| if i == 1 && j == 0 { 1.0 } else { 0.0 });
        // AB − BA = diag(1, −1)
        assert!((commutator_norm(a.as_ref(), b.as_ref()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
