use crate::error::{Error, Result};

use super::{reverse_cuthill_mckee, CsrMatrix, Scalar};

/// Relative pivot threshold below which a factorization is declared singular.
const PIVOT_TOL: f64 = 1e-13;

/// `LDLᵀ` factorization of a symmetric (not necessarily Hermitian) sparse
/// matrix in variable-band (envelope) storage after RCM reordering.
///
/// No pivoting: complex symmetric FEM matrices with a dissipative part or SPD
/// matrices factor stably in practice. A vanishing pivot is reported as
/// [`Error::SingularPivot`] carrying the original row index.
#[derive(Clone, Debug)]
pub struct SkylineLdlt<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> SkylineLdlt<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let perm = reverse_cuthill_mckee(&a.adjacency());
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (old_r, &i) in iperm.iter().enumerate() {
            for &c in a.row(old_r).0 {
                let j = iperm[c];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }

        let mut lower = vec![T::zero(); start[n]];
        let mut diag = vec![T::zero(); n];
        let mut scale = 0.0f64;
        for (i, j, v) in a.triplets() {
            let (ni, nj) = (iperm[i], iperm[j]);
            if nj < ni {
                lower[start[ni] + nj - first[ni]] = v;
            } else if ni == nj {
                diag[ni] = v;
                scale = scale.max(v.modulus());
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (head, tail) = lower.split_at_mut(start[i]);
            let row_i = &mut tail[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let row_j = &head[start[j]..start[j + 1]];
                let k0 = fi.max(fj);
                let mut s = row_i[j - fi];
                for k in k0..j {
                    s -= row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] = s;
            }
            let mut d = diag[i];
            for k in fi..i {
                let t = row_i[k - fi];
                let l = t / diag[k];
                d -= t * l;
                row_i[k - fi] = l;
            }
            if !(d.modulus() > PIVOT_TOL * scale) {
                return Err(Error::SingularPivot {
                    subdomain: None,
                    pivot: perm[i],
                    magnitude: d.modulus(),
                });
            }
            diag[i] = d;
        }

        Ok(Self {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of stored off-diagonal entries.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for (k, &l) in (fi..i).zip(row) {
                s -= l * x[k];
            }
            x[i] = s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= *d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let xi = x[i];
            for (k, &l) in (fi..i).zip(row) {
                x[k] -= l * xi;
            }
        }
        let mut out = vec![T::zero(); n];
        for (new, v) in x.into_iter().enumerate() {
            out[self.perm[new]] = v;
        }
        out
    }
}
