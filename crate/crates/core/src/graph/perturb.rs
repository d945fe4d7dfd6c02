use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gso::{Gso, GsoFamily};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Add links where none exist.
    Create,
    /// Remove existing links.
    Destroy,
    /// Split the budget: `floor(budget / 2)` creations, the rest destructions.
    CreateDestroy,
    /// Additive Gaussian noise on existing weights.
    WeightNoise,
    /// `CreateDestroy` followed by weight noise on every surviving original link.
    Mixed,
}

impl PerturbationKind {
    /// Short label used in experiment output.
    pub fn label(self) -> &'static str {
        match self {
            Self::Create => "C",
            Self::Destroy => "D",
            Self::CreateDestroy => "CD",
            Self::WeightNoise => "W",
            Self::Mixed => "M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    /// Fraction of existing links affected, in `[0, 1]`.
    pub ratio: f64,
    #[serde(default)]
    pub weight_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, ratio: f64, seed: u64) -> Self {
        Self {
            kind,
            ratio,
            weight_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::InvalidArgument(format!(
                "perturbation ratio {} outside [0, 1]",
                self.ratio
            )));
        }
        if !(self.weight_sigma >= 0.0) || !self.weight_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "weight_sigma {} must be >= 0",
                self.weight_sigma
            )));
        }
        Ok(())
    }
}

/// A perturbed operator together with the links that were touched.
///
/// Link lists use upper-triangle pairs for symmetric operators.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub gso: Gso,
    pub created: Vec<(usize, usize)>,
    pub destroyed: Vec<(usize, usize)>,
    pub reweighted: Vec<(usize, usize)>,
}

/// `S̄ = S + Δ` according to `spec`.
pub fn perturb(gso: &Gso, spec: &PerturbationSpec) -> Result<Gso> {
    perturb_detailed(gso, spec).map(|p| p.gso)
}

pub fn perturb_detailed(gso: &Gso, spec: &PerturbationSpec) -> Result<Perturbation> {
    spec.validate()?;
    if gso.family() != GsoFamily::Adjacency {
        return Err(Error::InvalidGso(
            "perturbations are defined on adjacency operators".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let links = gso.links();
    let non_links = gso.non_links();
    let budget = (spec.ratio * links.len() as f64).round() as usize;
    let (n_create, n_destroy, n_noise) = match spec.kind {
        PerturbationKind::Create => (budget, 0, 0),
        PerturbationKind::Destroy => (0, budget, 0),
        PerturbationKind::CreateDestroy | PerturbationKind::Mixed => {
            (budget / 2, budget - budget / 2, 0)
        }
        PerturbationKind::WeightNoise => (0, 0, budget),
    };
    if n_create > non_links.len() {
        return Err(Error::Infeasible(format!(
            "{n_create} link creations requested but only {} absent links",
            non_links.len()
        )));
    }
    if n_destroy > links.len() {
        return Err(Error::Infeasible(format!(
            "{n_destroy} link destructions requested but only {} links",
            links.len()
        )));
    }

    let weights: Vec<f64> = links.iter().map(|&(i, j)| gso.matrix()[(i, j)]).collect();
    let mut m = gso.matrix().to_owned();
    let sym = gso.is_symmetric();
    let set = |m: &mut faer::Mat<f64>, (i, j): (usize, usize), v: f64| {
        m[(i, j)] = v;
        if sym {
            m[(j, i)] = v;
        }
    };

    let mut created = pick(&mut rng, &non_links, n_create);
    created.sort_unstable();
    for &l in &created {
        let w = if weights.is_empty() {
            1.0
        } else {
            weights[rng.random_range(0..weights.len())]
        };
        set(&mut m, l, w);
    }
    let mut destroyed = pick(&mut rng, &links, n_destroy);
    destroyed.sort_unstable();
    for &l in &destroyed {
        set(&mut m, l, 0.0);
    }

    let mut reweighted = match spec.kind {
        PerturbationKind::WeightNoise => pick(&mut rng, &links, n_noise),
        PerturbationKind::Mixed => links
            .iter()
            .copied()
            .filter(|l| destroyed.binary_search(l).is_err())
            .collect(),
        _ => Vec::new(),
    };
    reweighted.sort_unstable();
    if !reweighted.is_empty() && spec.weight_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.weight_sigma).expect("validated sigma");
        for &(i, j) in &reweighted {
            // Reflect at zero so the result stays a valid adjacency weight.
            let w = (m[(i, j)] + normal.sample(&mut rng)).abs();
            set(&mut m, (i, j), w);
        }
    }

    let gso = Gso::new(m, GsoFamily::Adjacency, sym)?;
    Ok(Perturbation {
        gso,
        created,
        destroyed,
        reweighted,
    })
}

/// Zeroes the given links (and their mirrors on symmetric operators).
pub fn remove_links(gso: &Gso, links: &[(usize, usize)]) -> Result<Gso> {
    let mut m = gso.matrix().to_owned();
    for &(i, j) in links {
        if i >= gso.n() || j >= gso.n() {
            return Err(Error::InvalidArgument(format!(
                "link ({i}, {j}) outside a {}-node graph",
                gso.n()
            )));
        }
        m[(i, j)] = 0.0;
        if gso.is_symmetric() {
            m[(j, i)] = 0.0;
        }
    }
    Gso::new(m, gso.family(), gso.is_symmetric())
}

fn pick<R: Rng>(rng: &mut R, from: &[(usize, usize)], amount: usize) -> Vec<(usize, usize)> {
    if amount == 0 {
        return Vec::new();
    }
    sample(rng, from.len(), amount)
        .into_iter()
        .map(|k| from[k])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;

    fn diff_count(a: &Gso, b: &Gso) -> usize {
        let n = a.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a.matrix()[(i, j)] != b.matrix()[(i, j)])
            .count()
    }

    #[test]
    fn zero_ratio_is_identity() {
        let g = generate_er(12, 0.3, true, 1).unwrap();
        for kind in [
            PerturbationKind::Create,
            PerturbationKind::Destroy,
            PerturbationKind::CreateDestroy,
            PerturbationKind::WeightNoise,
            PerturbationKind::Mixed,
        ] {
            let p = perturb(&g, &PerturbationSpec::new(kind, 0.0, 4)).unwrap();
            assert_eq!(p, g);
        }
    }

    #[test]
    fn create_destroy_flips_budget() {
        let g = generate_er(20, 0.2, true, 3).unwrap();
        let e = g.edge_count();
        let p = perturb_detailed(
            &g,
            &PerturbationSpec::new(PerturbationKind::CreateDestroy, 0.10, 9),
        )
        .unwrap();
        let budget = (0.1 * e as f64).round() as usize;
        assert_eq!(p.created.len(), budget / 2);
        assert_eq!(p.created.len() + p.destroyed.len(), budget);
        // each undirected flip touches two entries
        assert_eq!(diff_count(&g, &p.gso), 2 * budget);
    }

    #[test]
    fn destroy_all_gives_zero() {
        let g = generate_er(10, 0.4, false, 2).unwrap();
        let p = perturb(
            &g,
            &PerturbationSpec::new(PerturbationKind::Destroy, 1.0, 0),
        )
        .unwrap();
        assert_eq!(p.nnz_offdiag(), 0);
    }

    #[test]
    fn infeasible_create_is_reported() {
        let g = generate_er(4, 0.999999, true, 0).unwrap();
        let r = perturb(&g, &PerturbationSpec::new(PerturbationKind::Create, 0.5, 0));
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn destroying_created_links_restores() {
        let g = generate_er(15, 0.25, true, 8).unwrap();
        let p =
            perturb_detailed(&g, &PerturbationSpec::new(PerturbationKind::Create, 0.3, 1)).unwrap();
        assert!(!p.created.is_empty());
        assert_eq!(remove_links(&p.gso, &p.created).unwrap(), g);
    }

    #[test]
    fn weight_noise_only_touches_links() {
        let g = generate_er(15, 0.25, false, 8).unwrap();
        let spec = PerturbationSpec {
            kind: PerturbationKind::WeightNoise,
            ratio: 1.0,
            weight_sigma: 0.3,
            seed: 2,
        };
        let p = perturb(&g, &spec).unwrap();
        for i in 0..15 {
            for j in 0..15 {
                if g.matrix()[(i, j)] == 0.0 {
                    assert_eq!(p.matrix()[(i, j)], 0.0);
                }
            }
        }
        assert!(diff_count(&g, &p) > 0);
    }
}
