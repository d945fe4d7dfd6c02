mod common;

use common::*;
use faer::Mat;
use proptest::prelude::*;
use rgfi_core::graph::{
    build_filter, commutator_norm, generate_er, generate_small_world, nerr, perturb,
    perturb_detailed, remove_links, sample_covariance, synthesize_signals, GraphFilter, Gso,
    InputDist, PerturbationKind, PerturbationSpec,
};

fn edges(g: &Gso) -> usize {
    let s = g.matrix();
    let n = g.n();
    let mut c = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if s[(i, j)] != 0.0 {
                c += 1;
            }
        }
    }
    c
}

/// Mean and variance of the edge count of a symmetric ER graph conditioned on
/// having no isolated node, by enumerating all graphs.
fn conditional_edge_moments(n: usize, p: f64) -> (f64, f64) {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let (mut mass, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for mask in 0u32..(1 << pairs.len()) {
        let mut deg = vec![0; n];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
        if deg.contains(&0) {
            continue;
        }
        let e = mask.count_ones() as f64;
        let w = p.powf(e) * (1.0 - p).powf(pairs.len() as f64 - e);
        mass += w;
        m1 += w * e;
        m2 += w * e * e;
    }
    let mean = m1 / mass;
    (mean, m2 / mass - mean * mean)
}

#[test]
fn er_edge_count_matches_conditioned_binomial() {
    // Redrawing graphs with an empty row conditions Binomial(10, 0.5) on that event.
    let (mu, var) = conditional_edge_moments(5, 0.5);
    let draws = 10_000;
    let total: usize = (0..draws)
        .map(|seed| edges(&generate_er(5, 0.5, true, seed).unwrap()))
        .sum();
    let mean = total as f64 / draws as f64;
    let sigma = (var / draws as f64).sqrt();
    assert!(
        (mean - mu).abs() < 3.0 * sigma,
        "mean {mean}, expected {mu}"
    );
    // The unconditioned Binomial mean is 5; the conditioning is visible.
    assert!(mu > 5.4);
}

#[test]
fn er_density_at_desk_scale() {
    // Oracle: independent rejection sampler for the same conditioned law.
    let draws = 2_000;
    let mut g = rng(77);
    let mut oracle = Vec::with_capacity(draws);
    while oracle.len() < draws {
        let mut deg = [0usize; 20];
        let mut e = 0;
        for i in 0..20 {
            for j in (i + 1)..20 {
                if rand::Rng::random::<f64>(&mut g) < 0.2 {
                    deg[i] += 1;
                    deg[j] += 1;
                    e += 1;
                }
            }
        }
        if !deg.contains(&0) {
            oracle.push(e as f64);
        }
    }
    let ours: Vec<f64> = (0..draws as u64)
        .map(|seed| edges(&generate_er(20, 0.2, true, seed).unwrap()) as f64)
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let sigma = ((var(&ours) + var(&oracle)) / draws as f64).sqrt();
    assert!(
        (mean(&ours) - mean(&oracle)).abs() < 3.0 * sigma,
        "ours {} oracle {}",
        mean(&ours),
        mean(&oracle)
    );
    // 0.2 · 190 = 38 before conditioning
    assert!((mean(&ours) - 38.0).abs() < 2.0);
}

#[test]
fn small_world_rewiring_keeps_edge_count() {
    for seed in 0..20 {
        let g = generate_small_world(20, 4, 0.1, seed).unwrap();
        assert_eq!(g.degrees().iter().sum::<f64>(), 80.0);
    }
    let mut saw_irregular = false;
    for seed in 0..5 {
        let g = generate_small_world(20, 4, 1.0, seed).unwrap();
        assert_eq!(edges(&g), 40);
        saw_irregular |= g.degrees().iter().any(|&d| d != 4.0);
    }
    assert!(saw_irregular);
}

#[test]
fn noise_power_is_close_to_nominal() {
    for seed in 0..64 {
        let inst = instance(20, 0.0, 4, seed);
        let sig = synthesize_signals(
            &GraphFilter::from_matrix(inst.h.clone()),
            50,
            0.05,
            InputDist::GaussianWhite,
            seed,
        )
        .unwrap();
        let hx = &inst.h * &sig.x;
        let ratio = frob_sq(&(&sig.y - &hx)) / frob_sq(&hx);
        assert!((0.03..=0.07).contains(&ratio), "seed {seed}: {ratio}");
    }
}

#[test]
fn sample_covariance_converges() {
    let inst = instance(8, 0.0, 3, 2);
    let mut g = rng(4);
    let m = 100_000;
    let w = gaussian(&mut g, 8, m);
    let y = &inst.h * &w;
    let c = sample_covariance(y.as_ref()).unwrap();
    let truth = &inst.h * inst.h.transpose();
    let rel = rel_frob(&c, &truth);
    assert!(rel < 5.0 / (m as f64).sqrt(), "{rel}");
    // Graph stationarity: the covariance is a polynomial of S and commutes with it.
    let s = inst.s.matrix().to_owned();
    let comm = frob_sq(&commutator(&c, &s)).sqrt();
    let scale = frob_sq(&c).sqrt() * frob_sq(&s).sqrt();
    assert!(comm < 0.02 * scale, "{}", comm / scale);
}

#[test]
fn perturbation_bound_holds() {
    // ‖H̄ − H‖₂ ≤ Σ_{r≥1} |h_r| r C^{r−1} ‖Δ‖₂ with C ≥ ‖S‖₂, ‖S̄‖₂
    for seed in 0..50 {
        let s = generate_er(15, 0.25, true, seed).unwrap();
        let bar = perturb(
            &s,
            &PerturbationSpec::new(PerturbationKind::CreateDestroy, 0.15, seed + 1),
        )
        .unwrap();
        let mut g = rng(seed + 2);
        let h: Vec<f64> = (0..5).map(|_| gaussian(&mut g, 1, 1)[(0, 0)]).collect();
        let (sm, bm) = (s.matrix().to_owned(), bar.matrix().to_owned());
        let diff = explicit_poly(&bm, &h) - explicit_poly(&sm, &h);
        let c = spectral_norm(&sm).max(spectral_norm(&bm));
        let delta = spectral_norm(&(&bm - &sm));
        let bound: f64 = h
            .iter()
            .enumerate()
            .skip(1)
            .map(|(r, hr)| hr.abs() * r as f64 * c.powi(r as i32 - 1) * delta)
            .sum();
        assert!(spectral_norm(&diff) <= bound * (1.0 + 1e-9), "seed {seed}");
    }
}

#[test]
fn commutator_matches_direct_product() {
    let mut g = rng(8);
    let a = gaussian(&mut g, 5, 5);
    let b = gaussian(&mut g, 5, 5);
    let direct = frob_sq(&(&a * &b - &b * &a)).sqrt();
    let got = commutator_norm(a.as_ref(), b.as_ref()).unwrap();
    assert!((got - direct).abs() < 1e-12 * direct);
    assert!(direct > 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filters_commute_with_their_shift(
        seed in 0u64..100_000,
        n in 3usize..15,
        h in prop::collection::vec(-2.0f64..2.0, 1..6),
    ) {
        let s = generate_er(n, 0.4, true, seed).unwrap();
        let h = &h[..h.len().min(n)];
        let f = build_filter(&s, h).unwrap();
        let hm = f.matrix().unwrap().to_owned();
        let sm = s.matrix().to_owned();
        let c = commutator_norm(hm.as_ref(), sm.as_ref()).unwrap();
        prop_assert!(c <= 1e-9 * frob_sq(&hm).sqrt() * frob_sq(&sm).sqrt() + 1e-300);
        prop_assert!(rel_frob(&hm, &explicit_poly(&sm, h)) < 1e-12 || frob_sq(&hm) == 0.0);
    }

    #[test]
    fn destroying_created_links_restores_the_graph(seed in 0u64..100_000, ratio in 0.0f64..0.5) {
        let s = generate_er(12, 0.3, true, seed).unwrap();
        let p = perturb_detailed(&s, &PerturbationSpec::new(PerturbationKind::Create, ratio, seed)).unwrap();
        let back = remove_links(&p.gso, &p.created).unwrap();
        prop_assert_eq!(back.matrix().to_owned(), s.matrix().to_owned());
    }

    #[test]
    fn symmetric_spectrum_reconstructs(seed in 0u64..100_000, n in 2usize..20) {
        let s = generate_er(n, 0.4, true, seed).unwrap();
        let dec = s.spectral().unwrap();
        prop_assert!(dec.reconstruction_error(&s) < 1e-8);
    }

    #[test]
    fn nerr_scales_quadratically(seed in 0u64..100_000, c in -3.0f64..3.0) {
        let mut g = rng(seed);
        let t = gaussian(&mut g, 4, 3);
        let e = nerr((&t * faer::Scale(c)).as_ref(), t.as_ref()).unwrap();
        prop_assert!((e - (c - 1.0).powi(2)).abs() < 1e-12 * (1.0 + (c - 1.0).powi(2)));
    }

    #[test]
    fn perturbation_keeps_structure(seed in 0u64..100_000, ratio in 0.0f64..0.3) {
        let s = generate_er(16, 0.25, true, seed).unwrap();
        for kind in [PerturbationKind::Create, PerturbationKind::Destroy, PerturbationKind::CreateDestroy] {
            let bar = perturb(&s, &PerturbationSpec::new(kind, ratio, seed)).unwrap();
            let m: Mat<f64> = bar.matrix().to_owned();
            for i in 0..16 {
                prop_assert_eq!(m[(i, i)], 0.0);
                for j in 0..16 {
                    prop_assert!(m[(i, j)] >= 0.0);
                    prop_assert_eq!(m[(i, j)], m[(j, i)]);
                }
            }
        }
    }
}
