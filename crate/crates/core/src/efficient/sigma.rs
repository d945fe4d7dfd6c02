use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Sparse column: `(row, value)` pairs with no explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseColumn {
    pub rows: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseColumn {
    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.vals)
            .map(|(&r, &v)| v * dense[r])
            .sum()
    }

    /// `dense += alpha · self`.
    pub fn axpy(&self, alpha: f64, dense: &mut [f64]) {
        for (&r, &v) in self.rows.iter().zip(&self.vals) {
            dense[r] += alpha * v;
        }
    }
}

/// Off-diagonal columns of `Σ = Aᵀ ⊕ (−A) = Aᵀ⊗I − I⊗A`, the operator with
/// `Σ vec(S) = vec(SA − AS)`.
///
/// Column `(i, j)` (vec index `i + N j`) holds `A[j, b]` at rows `i + N b`,
/// `−A[a, i]` at rows `a + N j`, and `A[j, j] − A[i, i]` where they meet, so it
/// has at most `2N − 1` nonzeros. Columns are stored in row-major order of
/// `(i, j)`, skipping the diagonal.
#[derive(Debug, Clone)]
pub struct SparseKronColumns {
    n: usize,
    entries: Vec<(usize, usize)>,
    cols: Vec<SparseColumn>,
    norms_sq: Vec<f64>,
}

pub fn build_sigma_columns(a: MatRef<'_, f64>) -> Result<SparseKronColumns> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Σ needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut entries = Vec::with_capacity(n * n.saturating_sub(1));
    let mut cols = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            entries.push((i, j));
            cols.push(sigma_column(a, i, j));
        }
    }
    let norms_sq = cols.iter().map(SparseColumn::norm_sq).collect();
    Ok(SparseKronColumns {
        n,
        entries,
        cols,
        norms_sq,
    })
}

pub(crate) fn sigma_column(a: MatRef<'_, f64>, i: usize, j: usize) -> SparseColumn {
    let n = a.nrows();
    let mut col = SparseColumn {
        rows: Vec::with_capacity(2 * n - 1),
        vals: Vec::with_capacity(2 * n - 1),
    };
    let mut push = |r: usize, v: f64| {
        if v != 0.0 {
            col.rows.push(r);
            col.vals.push(v);
        }
    };
    for a_row in 0..n {
        if a_row != i {
            push(a_row + n * j, -a[(a_row, i)]);
        }
    }
    push(i + n * j, a[(j, j)] - a[(i, i)]);
    for b in 0..n {
        if b != j {
            push(i + n * b, a[(j, b)]);
        }
    }
    col
}

impl SparseKronColumns {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// `(i, j)` of the `k`-th stored column.
    pub fn entry(&self, k: usize) -> (usize, usize) {
        self.entries[k]
    }

    /// Position of off-diagonal entry `(i, j)` in storage order.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        Some(i * (self.n - 1) + if j > i { j - 1 } else { j })
    }

    pub fn column(&self, k: usize) -> &SparseColumn {
        &self.cols[k]
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        self.norms_sq[k]
    }

    /// Dense `N² x N²` matrix; diagonal-entry columns are left at zero.
    pub fn to_dense(&self) -> Mat<f64> {
        let nn = self.n * self.n;
        let mut d = Mat::<f64>::zeros(nn, nn);
        for (k, &(i, j)) in self.entries.iter().enumerate() {
            let c = i + self.n * j;
            for (&r, &v) in self.cols[k].rows.iter().zip(&self.cols[k].vals) {
                d[(r, c)] += v;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, kron, sub};

    #[test]
    fn identity_gives_zero_columns() {
        let s = build_sigma_columns(Mat::<f64>::identity(4, 4).as_ref()).unwrap();
        assert_eq!(s.len(), 12);
        assert!((0..s.len()).all(|k| s.column(k).nnz() == 0));
    }

    #[test]
    fn diagonal_has_single_entry() {
        let h = Mat::from_fn(4, 4, |i, j| if i == j { 1.0 + i as f64 } else { 0.0 });
        let s = build_sigma_columns(h.as_ref()).unwrap();
        for k in 0..s.len() {
            let (i, j) = s.entry(k);
            let c = s.column(k);
            assert_eq!(c.rows, vec![i + 4 * j]);
            assert_eq!(c.vals, vec![h[(j, j)] - h[(i, i)]]);
        }
    }

    #[test]
    fn dense_reconstruction() {
        let n = 4;
        let h = Mat::from_fn(n, n, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let s = build_sigma_columns(h.as_ref()).unwrap();
        let id = Mat::<f64>::identity(n, n);
        let mut expect = sub(
            kron(h.transpose(), id.as_ref()).as_ref(),
            kron(id.as_ref(), h.as_ref()).as_ref(),
        );
        for d in 0..n {
            for r in 0..n * n {
                expect[(r, d + n * d)] = 0.0;
            }
        }
        assert!(frob(sub(s.to_dense().as_ref(), expect.as_ref()).as_ref()) < 1e-14);
        assert!((0..s.len()).all(|k| s.column(k).nnz() <= 2 * n));
        for k in 0..s.len() {
            let (i, j) = s.entry(k);
            assert_eq!(s.index_of(i, j), Some(k));
        }
    }
}
