use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{CsrMatrix, Scalar, SkylineLdlt};
use crate::par::Exec;

/// Static condensation of a symmetric sparse matrix onto its leading
/// `n_boundary` unknowns:
///
/// ```text
/// [A_BB A_BI] [u_B]   [F_B]
/// [A_IB A_II] [u_I] = [F_I]
/// ```
///
/// Stores the sparse factor of `A_II`, `X = A_II⁻¹ A_IB` and the Schur
/// complement `A_BB - A_BI X`. Columns of `X` are independent solves and run
/// under the given [`Exec`] policy.
#[derive(Clone, Debug)]
pub struct BorderedFactor<T> {
    n_boundary: usize,
    interior: Option<SkylineLdlt<T>>,
    a_bi: CsrMatrix<T>,
    x: DMatrix<T>,
    schur: DMatrix<T>,
}

impl<T: Scalar> BorderedFactor<T> {
    pub fn new(a: &CsrMatrix<T>, n_boundary: usize, exec: Exec) -> Result<Self> {
        let n = a.nrows();
        let boundary: Vec<usize> = (0..n_boundary).collect();
        let interior: Vec<usize> = (n_boundary..n).collect();
        let a_bi = a.submatrix(&boundary, &interior);
        let mut schur = a.submatrix(&boundary, &boundary).to_dense();
        if interior.is_empty() {
            return Ok(Self {
                n_boundary,
                interior: None,
                a_bi,
                x: DMatrix::zeros(0, n_boundary),
                schur,
            });
        }
        let factor = SkylineLdlt::factor(&a.submatrix(&interior, &interior))
            .map_err(|e| shift_pivot(e, n_boundary))?;
        let ni = interior.len();
        let columns = exec.map(n_boundary, |k| {
            let mut rhs = vec![T::zero(); ni];
            let (cols, vals) = a_bi.row(k);
            for (&c, &v) in cols.iter().zip(vals) {
                rhs[c] = v;
            }
            factor.solve(&rhs)
        });
        let x = DMatrix::from_fn(ni, n_boundary, |i, k| columns[k][i]);
        for k in 0..n_boundary {
            let (cols, vals) = a_bi.row(k);
            for (&c, &v) in cols.iter().zip(vals) {
                for m in 0..n_boundary {
                    schur[(k, m)] -= v * x[(c, m)];
                }
            }
        }
        Ok(Self {
            n_boundary,
            interior: Some(factor),
            a_bi,
            x,
            schur,
        })
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn n_interior(&self) -> usize {
        self.x.nrows()
    }

    pub fn schur(&self) -> &DMatrix<T> {
        &self.schur
    }

    /// Split a full right-hand side into the condensed boundary load
    /// `F_B - A_BI A_II⁻¹ F_I` and the particular interior part `A_II⁻¹ F_I`.
    pub fn condense(&self, f: &[T]) -> (Vec<T>, Vec<T>) {
        let nb = self.n_boundary;
        let y = match &self.interior {
            Some(factor) => factor.solve(&f[nb..]),
            None => Vec::new(),
        };
        let ay = self.a_bi.mul_vec(&y);
        let g = f[..nb].iter().zip(&ay).map(|(&a, &b)| a - b).collect();
        (g, y)
    }

    /// Full solution from boundary values and the particular interior part.
    pub fn expand(&self, u_b: &[T], y: &[T]) -> Vec<T> {
        let mut u = u_b.to_vec();
        u.extend(y.iter().enumerate().map(|(i, &yi)| {
            let mut v = yi;
            for (k, &ub) in u_b.iter().enumerate() {
                v -= self.x[(i, k)] * ub;
            }
            v
        }));
        u
    }

    /// Discrete harmonic extension: zero interior load, boundary values `u_b`.
    pub fn extend(&self, u_b: &[T]) -> Vec<T> {
        self.expand(u_b, &vec![T::zero(); self.n_interior()])
    }
}

fn shift_pivot(e: crate::Error, offset: usize) -> crate::Error {
    match e {
        crate::Error::SingularPivot {
            subdomain,
            pivot,
            magnitude,
        } => crate::Error::SingularPivot {
            subdomain,
            pivot: pivot + offset,
            magnitude,
        },
        other => other,
    }
}
