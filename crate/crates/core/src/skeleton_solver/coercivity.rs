use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SkeletonSystem, SystemForm, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{real_times_complex, C64};
use crate::traces::{MultiTrace, TraceKind};

/// Materialized skeleton operator `A = I - ΠS` on the flattened Neumann
/// coefficients, together with its whitened form `B = L⁻¹ A L` where
/// `T = L Lᵀ` blockwise. `H_N` quantities of `A` are Euclidean ones of `B`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    whitened: DMatrix<C64>,
}

impl DenseOperator {
    pub fn build(sys: &SkeletonSystem, form: SystemForm, limit: usize) -> Result<Self> {
        let n = sys.total_dofs();
        if n > limit {
            return Err(Error::DenseLimit { dofs: n, limit });
        }
        let sizes = sys.sizes();
        let columns = sys.exec().map(n, |k| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[k] = C64::new(1.0, 0.0);
            let p = MultiTrace::from_flat(TraceKind::Neumann, &sizes, &e).expect("sizes match");
            sys.apply_form(&p, form).to_flat()
        });
        let matrix = DMatrix::from_fn(n, n, |i, k| columns[k][i]);

        let mut l = DMatrix::<C64>::zeros(n, n);
        let mut offset = 0;
        for (j, &nj) in sizes.iter().enumerate() {
            let lj = sys.dtn().factor(j).l();
            l.view_mut((offset, offset), (nj, nj)).copy_from(&lj.map(|x| C64::new(x, 0.0)));
            offset += nj;
        }
        let al = &matrix * &l;
        let whitened = l
            .solve_lower_triangular(&al)
            .ok_or_else(|| Error::Factorization("singular DtN Cholesky factor".into()))?;
        Ok(Self { matrix, whitened })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn whitened(&self) -> &DMatrix<C64> {
        &self.whitened
    }

    /// Eigenvalues (ascending) of the `H_N`-Hermitian part `(B + Bᴴ)/2`.
    pub fn hermitian_spectrum(&self) -> Vec<f64> {
        let h = (&self.whitened + self.whitened.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Smallest singular value of `A` as an operator on `H_N`.
    pub fn sigma_min(&self) -> f64 {
        self.whitened
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMethod {
    /// Full eigensolve of the Hermitian part (needs the dense operator).
    Dense,
    /// Lanczos on `(A + A*)/2` in `H_N` with full reorthogonalization,
    /// started from a seeded random vector.
    Lanczos { steps: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoercivityEstimate {
    /// Smallest `Re(Ap, p)_{H_N} / ‖p‖²` found.
    pub alpha: f64,
    /// Largest value of the same quotient found.
    pub upper: f64,
    pub method: ProbeMethod,
}

/// `Re((I - ΠS)p, p)_{H_N} / ‖p‖²_{H_N}`.
pub fn rayleigh_quotient(sys: &SkeletonSystem, p: &MultiTrace) -> f64 {
    let nn = sys.inner(p, p).re;
    sys.inner(&sys.apply(p), p).re / nn
}

/// `A* q` for the `H_N` adjoint, `A* = I - S*Π` with `S* = T Sᴴ T⁻¹`
/// (`Π` is self-adjoint on `H_N`).
fn apply_adjoint(sys: &SkeletonSystem, adjoints: &[DMatrix<C64>], q: &MultiTrace) -> MultiTrace {
    let pq = sys.exchange().apply_pi(q);
    let w = sys.dtn().solve(&pq);
    let blocks = sys.exec().map(adjoints.len(), |j| {
        real_times_complex(sys.dtn().block(j), &(&adjoints[j] * w.block(j)))
    });
    q.sub(&MultiTrace::from_blocks(TraceKind::Neumann, blocks))
}

fn lanczos(sys: &SkeletonSystem, steps: usize, seed: u64) -> (f64, f64) {
    let adjoints: Vec<DMatrix<C64>> = sys
        .scattering()
        .solvers()
        .iter()
        .map(|s| s.scattering_matrix().adjoint())
        .collect();
    let herm = |p: &MultiTrace| {
        sys.apply(p)
            .add_scaled(&apply_adjoint(sys, &adjoints, p), C64::new(1.0, 0.0))
            .scale(C64::new(0.5, 0.0))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = MultiTrace::random(TraceKind::Neumann, &sys.sizes(), &mut rng);
    let mut basis = vec![start.scale(C64::new(1.0 / sys.norm(&start), 0.0))];
    let mut diag = Vec::new();
    let mut off = Vec::new();
    let steps = steps.clamp(1, sys.total_dofs());
    for k in 0..steps {
        let mut w = herm(&basis[k]);
        diag.push(sys.inner(&w, &basis[k]).re);
        for _ in 0..2 {
            for v in &basis {
                let c = sys.inner(&w, v);
                w = w.add_scaled(v, -c);
            }
        }
        let b = sys.norm(&w);
        if k + 1 == steps || b <= 1e-12 * diag.iter().fold(1.0f64, |m, d| m.max(d.abs())) {
            break;
        }
        off.push(b);
        basis.push(w.scale(C64::new(1.0 / b, 0.0)));
    }
    let m = diag.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let ev = SymmetricEigen::new(t).eigenvalues;
    (ev.min(), ev.max())
}

/// Coercivity constant of `I - ΠS` in `H_N`.
pub fn estimate_coercivity(sys: &SkeletonSystem, method: ProbeMethod) -> Result<CoercivityEstimate> {
    let (alpha, upper) = match method {
        ProbeMethod::Dense => {
            let ev = DenseOperator::build(sys, SystemForm::Product, DENSE_LIMIT)?.hermitian_spectrum();
            (ev[0], ev[ev.len() - 1])
        }
        ProbeMethod::Lanczos { steps, seed } => lanczos(sys, steps, seed),
    };
    Ok(CoercivityEstimate { alpha, upper, method })
}

/// Smallest `H_N` singular value of `I - ΠS`; zero would mean a nontrivial kernel.
pub fn injectivity_check(sys: &SkeletonSystem) -> Result<f64> {
    Ok(DenseOperator::build(sys, SystemForm::Product, DENSE_LIMIT)?.sigma_min())
}
