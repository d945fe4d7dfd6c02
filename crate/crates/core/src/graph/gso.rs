use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::spectral::SpectralDecomp;
use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// Structural family of a shift operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GsoFamily {
    /// Nonnegative weights, no self-loops.
    #[default]
    Adjacency,
    /// `L = D - A`: nonpositive off-diagonal, zero row sums.
    CombinatorialLaplacian,
}

/// Dense graph-shift operator with a validated structural family.
#[derive(Debug, Clone, PartialEq)]
pub struct Gso {
    matrix: Mat<f64>,
    family: GsoFamily,
    symmetric: bool,
}

impl Gso {
    /// Validates `matrix` against `family` and, if requested, symmetry.
    pub fn new(matrix: Mat<f64>, family: GsoFamily, symmetric: bool) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::InvalidGso(format!(
                "matrix is {}x{}, not square",
                n,
                matrix.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidGso("empty matrix".into()));
        }
        for j in 0..n {
            for i in 0..n {
                if !matrix[(i, j)].is_finite() {
                    return Err(Error::NonFinite(format!("GSO entry ({i}, {j})")));
                }
            }
        }
        match family {
            GsoFamily::Adjacency => {
                for i in 0..n {
                    if matrix[(i, i)] != 0.0 {
                        return Err(Error::InvalidGso(format!("self-loop at node {i}")));
                    }
                    for j in 0..n {
                        if matrix[(i, j)] < 0.0 {
                            return Err(Error::InvalidGso(format!(
                                "negative weight at ({i}, {j})"
                            )));
                        }
                    }
                }
            }
            GsoFamily::CombinatorialLaplacian => {
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        let v = matrix[(i, j)];
                        if i != j && v > 0.0 {
                            return Err(Error::InvalidGso(format!(
                                "positive off-diagonal at ({i}, {j})"
                            )));
                        }
                        row += v;
                    }
                    if row.abs() > ROW_SUM_TOL {
                        return Err(Error::InvalidGso(format!("row {i} sums to {row}")));
                    }
                }
            }
        }
        if symmetric {
            for j in 0..n {
                for i in 0..j {
                    if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL {
                        return Err(Error::InvalidGso(format!("asymmetric at ({i}, {j})")));
                    }
                }
            }
        }
        Ok(Self {
            matrix,
            family,
            symmetric,
        })
    }

    /// Adjacency-family operator; the symmetry flag is detected from the entries.
    pub fn adjacency(matrix: Mat<f64>) -> Result<Self> {
        let symmetric = is_symmetric(matrix.as_ref());
        Self::new(matrix, GsoFamily::Adjacency, symmetric)
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn family(&self) -> GsoFamily {
        self.family
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Nonzero off-diagonal entries (ordered pairs).
    pub fn nnz_offdiag(&self) -> usize {
        let n = self.n();
        let mut c = 0;
        for j in 0..n {
            for i in 0..n {
                if i != j && self.matrix[(i, j)] != 0.0 {
                    c += 1;
                }
            }
        }
        c
    }

    /// Number of links: undirected pairs for symmetric operators, ordered pairs otherwise.
    pub fn edge_count(&self) -> usize {
        let nnz = self.nnz_offdiag();
        if self.symmetric {
            nnz / 2
        } else {
            nnz
        }
    }

    /// Present links as `(i, j)` pairs; upper triangle only when symmetric.
    pub fn links(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .filter(|&(i, j)| self.matrix[(i, j)] != 0.0)
            .collect()
    }

    /// Absent links as `(i, j)` pairs; upper triangle only when symmetric.
    pub fn non_links(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .filter(|&(i, j)| self.matrix[(i, j)] == 0.0)
            .collect()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        let sym = self.symmetric;
        (0..n)
            .flat_map(move |i| (0..n).map(move |j| (i, j)))
            .filter(move |&(i, j)| if sym { i < j } else { i != j })
    }

    /// Degree (row sum of the adjacency weights).
    pub fn degrees(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.matrix[(i, j)].abs())
                    .sum()
            })
            .collect()
    }

    /// Combinatorial Laplacian `diag(A 1) - A` of an adjacency operator.
    pub fn laplacian(&self) -> Result<Gso> {
        if self.family != GsoFamily::Adjacency {
            return Err(Error::InvalidGso(
                "laplacian of a non-adjacency operator".into(),
            ));
        }
        let deg = self.degrees();
        let l = Mat::from_fn(self.n(), self.n(), |i, j| {
            if i == j {
                deg[i]
            } else {
                -self.matrix[(i, j)]
            }
        });
        Gso::new(l, GsoFamily::CombinatorialLaplacian, self.symmetric)
    }

    pub fn spectral(&self) -> Result<SpectralDecomp> {
        SpectralDecomp::of(self)
    }
}

pub(crate) fn is_symmetric(m: MatRef<'_, f64>) -> bool {
    let n = m.nrows();
    n == m.ncols() && (0..n).all(|j| (0..j).all(|i| (m[(i, j)] - m[(j, i)]).abs() <= SYMMETRY_TOL))
}
