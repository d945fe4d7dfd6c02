//! Independent oracles and instance builders shared by the integration tests.
//!
//! Nothing here calls into the solver code it is used to check.

#![allow(dead_code)]

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgfi_core::graph::{generate_er, perturb, Gso, PerturbationKind, PerturbationSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<f64> {
    Mat::from_fn(r, c, |_, _| {
        // Box-Muller keeps the oracle free of the crate's own samplers.
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    })
}

pub fn frob_sq(m: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)] * m[(i, j)];
        }
    }
    acc
}

pub fn rel_frob(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (frob_sq(&(a - b)) / frob_sq(b)).sqrt()
}

/// `Σ_r h_r S^r` by explicit repeated multiplication.
pub fn explicit_poly(s: &Mat<f64>, h: &[f64]) -> Mat<f64> {
    let n = s.nrows();
    let mut out = Mat::<f64>::zeros(n, n);
    let mut power = Mat::<f64>::identity(n, n);
    for (r, &c) in h.iter().enumerate() {
        if r > 0 {
            power = &power * s;
        }
        out += &power * faer::Scale(c);
    }
    out
}

pub fn commutator(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    a * b - b * a
}

/// ER graph, its perturbed copy, a unit-gain degree-`r` filter with its coefficients.
pub struct Instance {
    pub s: Gso,
    pub s_bar: Gso,
    pub h: Mat<f64>,
    pub coeffs: Vec<f64>,
}

pub fn instance(n: usize, ratio: f64, r: usize, seed: u64) -> Instance {
    let s = generate_er(n, 0.2f64.max(3.0 / n as f64), true, seed).unwrap();
    let s_bar = if ratio > 0.0 {
        perturb(
            &s,
            &PerturbationSpec::new(PerturbationKind::CreateDestroy, ratio, seed + 7_000),
        )
        .unwrap()
    } else {
        s.clone()
    };
    let mut g = rng(seed + 9_000);
    let raw: Vec<f64> = (0..r).map(|_| gaussian(&mut g, 1, 1)[(0, 0)]).collect();
    let h = explicit_poly(&s.matrix().to_owned(), &raw);
    let norm = spectral_norm(&h);
    let coeffs: Vec<f64> = raw.iter().map(|c| c / norm).collect();
    Instance {
        h: &h * faer::Scale(1.0 / norm),
        s,
        s_bar,
        coeffs,
    }
}

/// Largest singular value from the eigenvalues of `AᵀA` by power iteration.
pub fn spectral_norm(a: &Mat<f64>) -> f64 {
    let ata = a.transpose() * a;
    let n = ata.nrows();
    let mut v = Mat::from_fn(n, 1, |i, _| 1.0 + 0.01 * i as f64);
    let mut lam = 0.0;
    for _ in 0..2_000 {
        let w = &ata * &v;
        let norm = frob_sq(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = &w * faer::Scale(1.0 / norm);
        if (norm - lam).abs() <= 1e-15 * norm {
            lam = norm;
            break;
        }
        lam = norm;
    }
    lam.sqrt()
}

/// Dense solve of the filter step by assembling
/// `(XXᵀ ⊗ I) + γ (I ⊗ SᵀS + SSᵀ ⊗ I − Sᵀ ⊗ Sᵀ − S ⊗ S)` entry by entry from
/// the definition `∂/∂H [‖Y − HX‖² + γ‖SH − HS‖²] = 0`.
pub fn brute_force_step1(x: &Mat<f64>, y: &Mat<f64>, s: &Mat<f64>, gamma: f64) -> Mat<f64> {
    let n = s.nrows();
    let nn = n * n;
    // Apply the quadratic form's Hessian to each unit matrix E_kl.
    let mut a = Mat::<f64>::zeros(nn, nn);
    let xxt = x * x.transpose();
    for l in 0..n {
        for k in 0..n {
            let mut e = Mat::<f64>::zeros(n, n);
            e[(k, l)] = 1.0;
            let c = s * &e - &e * s;
            let hess = &e * &xxt + (s.transpose() * &c - &c * s.transpose()) * faer::Scale(gamma);
            for j in 0..n {
                for i in 0..n {
                    a[(i + n * j, k + n * l)] = hess[(i, j)];
                }
            }
        }
    }
    let b = y * x.transpose();
    let rhs = Mat::from_fn(nn, 1, |p, _| b[(p % n, p / n)]);
    let sol = a.full_piv_lu().solve(&rhs);
    Mat::from_fn(n, n, |i, j| sol[(i + n * j, 0)])
}

/// Central finite differences of a scalar function of a matrix.
pub fn finite_diff<F: Fn(&Mat<f64>) -> f64>(f: F, at: &Mat<f64>, step: f64) -> Mat<f64> {
    let mut g = Mat::<f64>::zeros(at.nrows(), at.ncols());
    for j in 0..at.ncols() {
        for i in 0..at.nrows() {
            let mut p = at.clone();
            p[(i, j)] += step;
            let mut m = at.clone();
            m[(i, j)] -= step;
            g[(i, j)] = (f(&p) - f(&m)) / (2.0 * step);
        }
    }
    g
}

/// Weighted denoising problem on symmetric nonnegative hollow matrices.
pub struct DenoiseInstance {
    pub h: Mat<f64>,
    pub s_bar: Mat<f64>,
    pub omega_bar: Mat<f64>,
    pub omega: Mat<f64>,
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl DenoiseInstance {
    pub fn objective(&self, s: &Mat<f64>) -> f64 {
        let n = s.nrows();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    acc += self.lambda
                        * self.omega_bar[(i, j)]
                        * (s[(i, j)] - self.s_bar[(i, j)]).abs();
                    acc += self.beta * self.omega[(i, j)] * s[(i, j)].abs();
                }
            }
        }
        acc + self.gamma * frob_sq(&commutator(s, &self.h))
    }

    /// Projected subgradient over the upper triangle with steps `a0 / √(k+1)`,
    /// restarted from the best point with a smaller `a0` eight times; returns the
    /// best objective value seen.
    pub fn subgradient_oracle(&self, iters: usize) -> (f64, Mat<f64>) {
        self.subgradient_run(iters, 0.5, 8)
    }

    pub fn subgradient_run(&self, iters: usize, a: f64, restarts: usize) -> (f64, Mat<f64>) {
        let n = self.h.nrows();
        let mut s = self.s_bar.clone();
        let mut best = (self.objective(&s), s.clone());
        let scale = frob_sq(&self.h).sqrt().max(1.0);
        let mut a0 = a / (self.gamma.max(1e-12) * scale * scale).max(1.0);
        let mut k0 = 0;
        let block = iters / (restarts + 1);
        for k in 0..iters {
            if restarts > 0 && k > 0 && k % block == 0 {
                s = best.1.clone();
                k0 = k;
                a0 *= 0.3;
            }
            let k = k - k0;
            let c = commutator(&s, &self.h);
            let g =
                (&c * self.h.transpose() - self.h.transpose() * &c) * faer::Scale(2.0 * self.gamma);
            let step = a0 / ((k + 1) as f64).sqrt();
            let mut next = s.clone();
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = s[(i, j)];
                    let d = v - self.s_bar[(i, j)];
                    let sd = if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    let sv = if v > 0.0 { 1.0 } else { 0.0 };
                    let sub = g[(i, j)]
                        + g[(j, i)]
                        + self.lambda * (self.omega_bar[(i, j)] + self.omega_bar[(j, i)]) * sd
                        + self.beta * (self.omega[(i, j)] + self.omega[(j, i)]) * sv;
                    let nv = (v - step * sub).max(0.0);
                    next[(i, j)] = nv;
                    next[(j, i)] = nv;
                }
            }
            s = next;
            let f = self.objective(&s);
            if f < best.0 {
                best = (f, s.clone());
            }
        }
        best
    }
}

pub fn denoise_instance(n: usize, seed: u64) -> DenoiseInstance {
    let inst = instance(n.max(5), 0.3, 3, seed);
    let mut g = rng(seed + 11);
    let w = |g: &mut ChaCha8Rng| Mat::from_fn(n, n, |_, _| 0.5 + 1.5 * g.random::<f64>());
    let (omega_bar, omega) = (w(&mut g), w(&mut g));
    // Keep both sides symmetric so the parametrization over the triangle is exact.
    let sym = |m: Mat<f64>| Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    DenoiseInstance {
        h: inst.h,
        s_bar: inst.s_bar.matrix().to_owned(),
        omega_bar: sym(omega_bar),
        omega: sym(omega),
        lambda: 0.05,
        beta: 0.01,
        gamma: 1.0,
    }
}

/// Median of a sample.
pub fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `k` unit-gain degree-`r` filters on `s`, coefficients i.i.d. Gaussian.
pub fn filters_on(s: &Mat<f64>, k: usize, r: usize, seed: u64) -> Vec<Mat<f64>> {
    let mut g = rng(seed);
    (0..k)
        .map(|_| {
            let c: Vec<f64> = (0..r).map(|_| gaussian(&mut g, 1, 1)[(0, 0)]).collect();
            let h = explicit_poly(s, &c);
            let norm = spectral_norm(&h);
            &h * faer::Scale(1.0 / norm)
        })
        .collect()
}

/// `H X + W` with Gaussian `X` and noise energy `eta · ‖HX‖²`.
pub fn io_pair(h: &Mat<f64>, m: usize, eta: f64, seed: u64) -> (Mat<f64>, Mat<f64>) {
    let n = h.nrows();
    let mut g = rng(seed);
    let x = gaussian(&mut g, n, m);
    let hx = h * &x;
    let w = gaussian(&mut g, n, m);
    let scale = if eta > 0.0 {
        (eta * frob_sq(&hx) / frob_sq(&w)).sqrt()
    } else {
        0.0
    };
    let y = &hx + &w * faer::Scale(scale);
    (x, y)
}
