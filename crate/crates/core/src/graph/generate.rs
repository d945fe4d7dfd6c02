use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gso::{Gso, GsoFamily};
use crate::error::{Error, Result};

const ER_MAX_RETRIES: usize = 100;

/// Erdős–Rényi graph with unit weights.
///
/// Draws are repeated (up to 100 times) until every node has at least one
/// outgoing link.
pub fn generate_er(n: usize, p: f64, symmetric: bool, seed: u64) -> Result<Gso> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ER graph needs n >= 2, got {n}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "link probability must lie in (0, 1), got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ER_MAX_RETRIES {
        let mut a = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j || (symmetric && j < i) {
                    continue;
                }
                if rng.random_bool(p) {
                    a[(i, j)] = 1.0;
                    if symmetric {
                        a[(j, i)] = 1.0;
                    }
                }
            }
        }
        let row_complete = (0..n).all(|i| (0..n).any(|j| a[(i, j)] != 0.0));
        if row_complete {
            return Gso::new(a, GsoFamily::Adjacency, symmetric);
        }
    }
    Err(Error::Infeasible(format!(
        "no ER(n={n}, p={p}) draw without isolated rows after {ER_MAX_RETRIES} retries"
    )))
}

/// Watts–Strogatz small-world graph (undirected, unit weights).
///
/// Starts from a ring lattice where each node links to its `k/2` neighbours on
/// either side, then rewires the far end of every lattice edge with
/// probability `rewire_p` to a uniformly chosen node, avoiding self-loops and
/// duplicate links. The edge count `n k / 2` is preserved.
pub fn generate_small_world(n: usize, k: usize, rewire_p: f64, seed: u64) -> Result<Gso> {
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "small-world k must be even with 0 < k < n, got k={k}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&rewire_p) {
        return Err(Error::InvalidArgument(format!(
            "rewiring probability must lie in [0, 1], got {rewire_p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for d in 1..=k / 2 {
            let j = (i + d) % n;
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    for d in 1..=k / 2 {
        for i in 0..n {
            let j = (i + d) % n;
            if a[(i, j)] == 0.0 || !rng.random_bool(rewire_p) {
                continue;
            }
            let degree = (0..n).filter(|&v| a[(i, v)] != 0.0).count();
            if degree >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != i && a[(i, w)] == 0.0 {
                    break w;
                }
            };
            a[(i, j)] = 0.0;
            a[(j, i)] = 0.0;
            a[(i, w)] = 1.0;
            a[(w, i)] = 1.0;
        }
    }
    Gso::new(a, GsoFamily::Adjacency, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_near_one_gives_complete_pair() {
        let g = generate_er(2, 1.0 - 1e-12, true, 3).unwrap();
        assert_eq!(g.matrix()[(0, 1)], 1.0);
        assert_eq!(g.matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn er_rejects_bad_arguments() {
        assert!(generate_er(1, 0.5, true, 0).is_err());
        assert!(generate_er(5, 0.0, true, 0).is_err());
        assert!(generate_er(5, 1.0, true, 0).is_err());
        assert!(matches!(
            generate_er(40, 1e-6, true, 0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn er_is_deterministic_and_directed_mode_works() {
        let a = generate_er(15, 0.3, false, 11).unwrap();
        let b = generate_er(15, 0.3, false, 11).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_symmetric());
    }

    #[test]
    fn lattice_without_rewiring() {
        let g = generate_small_world(20, 4, 0.0, 1).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 4.0));
    }

    #[test]
    fn rewiring_preserves_edges() {
        for p in [0.1, 1.0] {
            let g = generate_small_world(20, 4, p, 5).unwrap();
            assert_eq!(g.edge_count(), 40);
            let total: f64 = g.degrees().iter().sum();
            assert_eq!(total, 80.0);
        }
        let g = generate_small_world(20, 4, 1.0, 5).unwrap();
        let d = g.degrees();
        assert!(d.iter().any(|&x| x != d[0]));
    }

    #[test]
    fn small_world_rejects_odd_k() {
        assert!(generate_small_world(10, 3, 0.1, 0).is_err());
        assert!(generate_small_world(4, 4, 0.1, 0).is_err());
    }
}
