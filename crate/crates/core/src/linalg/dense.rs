use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

use super::C64;

/// Cholesky factor of a real SPD matrix, applied to real or complex data.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        Cholesky::new(m)
            .map(|chol| Self { chol })
            .ok_or_else(|| Error::Factorization(format!("{n}x{n} matrix is not positive definite")))
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn solve_real(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        let re = self.chol.solve(&b.map(|z| z.re));
        let im = self.chol.solve(&b.map(|z| z.im));
        DVector::from_fn(b.len(), |i, _| C64::new(re[i], im[i]))
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}

/// LU factor of a dense complex matrix with a pivot-ratio singularity check.
#[derive(Clone, Debug)]
pub struct ComplexLu {
    lu: LU<C64, Dyn, Dyn>,
}

impl ComplexLu {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let lu = m.lu();
        let u = lu.u();
        let mags: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        if let Some((pivot, &magnitude)) = mags
            .iter()
            .enumerate()
            .find(|(_, &m)| !(m > 1e-14 * max))
        {
            return Err(Error::SingularPivot {
                subdomain: None,
                pivot,
                magnitude,
            });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(b).expect("factor checked nonsingular at construction")
    }

    pub fn solve_matrix(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        self.lu.solve(b).expect("factor checked nonsingular at construction")
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// `M v` for real `M` and complex `v`.
pub fn real_times_complex(m: &DMatrix<f64>, v: &DVector<C64>) -> DVector<C64> {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    DVector::from_fn(m.nrows(), |i, _| C64::new(re[i], im[i]))
}
