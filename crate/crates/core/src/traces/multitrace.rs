use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    /// Nodal coefficients of Dirichlet traces.
    Dirichlet,
    /// Dual (load-vector) coefficients of Neumann traces.
    Neumann,
}

/// Block vector with one complex block per subdomain boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiTrace {
    kind: TraceKind,
    blocks: Vec<DVector<C64>>,
}

impl MultiTrace {
    pub fn zeros(kind: TraceKind, sizes: &[usize]) -> Self {
        Self {
            kind,
            blocks: sizes.iter().map(|&n| DVector::zeros(n)).collect(),
        }
    }

    pub fn from_blocks(kind: TraceKind, blocks: Vec<DVector<C64>>) -> Self {
        Self { kind, blocks }
    }

    /// Real and imaginary parts drawn uniformly from `[-1, 1)`.
    pub fn random(kind: TraceKind, sizes: &[usize], rng: &mut impl Rng) -> Self {
        Self {
            kind,
            blocks: sizes
                .iter()
                .map(|&n| DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect(),
        }
    }

    /// Split a flat vector into blocks of the given sizes.
    pub fn from_flat(kind: TraceKind, sizes: &[usize], flat: &[C64]) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if flat.len() != total {
            return Err(Error::ShapeMismatch {
                expected: total,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        let blocks = sizes
            .iter()
            .map(|&n| {
                let b = DVector::from_column_slice(&flat[offset..offset + n]);
                offset += n;
                b
            })
            .collect();
        Ok(Self { kind, blocks })
    }

    pub fn to_flat(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> &DVector<C64> {
        &self.blocks[j]
    }

    pub fn block_mut(&mut self, j: usize) -> &mut DVector<C64> {
        &mut self.blocks[j]
    }

    pub fn blocks(&self) -> &[DVector<C64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DVector<C64>> {
        self.blocks
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.kind, other.kind, "mixing trace kinds");
        assert_eq!(self.sizes(), other.sizes(), "block sizes differ");
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: C64) -> Self {
        self.check(other);
        Self {
            kind: self.kind,
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b * alpha).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            kind: self.kind,
            blocks: self.blocks.iter().map(|b| b * alpha).collect(),
        }
    }

    /// Euclidean norm of the coefficients (diagnostics only).
    pub fn coefficient_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| *z == C64::new(0.0, 0.0)))
    }

    pub fn conj(&self) -> Self {
        Self {
            kind: self.kind,
            blocks: self.blocks.iter().map(|b| b.conjugate()).collect(),
        }
    }
}

/// Dirichlet and Neumann traces on every subdomain boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyPair {
    pub dir: MultiTrace,
    pub neu: MultiTrace,
}

impl CauchyPair {
    pub fn new(dir: MultiTrace, neu: MultiTrace) -> Result<Self> {
        if dir.kind() != TraceKind::Dirichlet || neu.kind() != TraceKind::Neumann {
            return Err(Error::InvalidParameter("Cauchy pair needs Dirichlet and Neumann parts".into()));
        }
        if dir.sizes() != neu.sizes() {
            return Err(Error::ShapeMismatch {
                expected: dir.n_blocks(),
                found: neu.n_blocks(),
            });
        }
        Ok(Self { dir, neu })
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self {
            dir: MultiTrace::zeros(TraceKind::Dirichlet, sizes),
            neu: MultiTrace::zeros(TraceKind::Neumann, sizes),
        }
    }

    pub fn random(sizes: &[usize], rng: &mut impl Rng) -> Self {
        Self {
            dir: MultiTrace::random(TraceKind::Dirichlet, sizes, rng),
            neu: MultiTrace::random(TraceKind::Neumann, sizes, rng),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            dir: self.dir.conj(),
            neu: self.neu.conj(),
        }
    }
}

/// `⟦u, v⟧ = Σ_j (q_jᵀ u_j - p_jᵀ v_j)` for `u = (u, p)`, `v = (v, q)`;
/// bilinear, no conjugation.
pub fn skew_pairing(u: &CauchyPair, v: &CauchyPair) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..u.dir.n_blocks() {
        sum += v.neu.block(j).dot(u.dir.block(j)) - u.neu.block(j).dot(v.dir.block(j));
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_roundtrip_and_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sizes = [3, 0, 5];
        let a = MultiTrace::random(TraceKind::Neumann, &sizes, &mut rng);
        let b = MultiTrace::from_flat(TraceKind::Neumann, &sizes, &a.to_flat()).unwrap();
        assert_eq!(a, b);
        assert!(a.sub(&b).is_zero());
        let two = a.scale(C64::new(2.0, 0.0));
        assert!((two.coefficient_norm() - 2.0 * a.coefficient_norm()).abs() < 1e-14);
        assert!(MultiTrace::from_flat(TraceKind::Neumann, &sizes, &[C64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn skew_pairing_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sizes = [4, 6];
        for _ in 0..10 {
            let u = CauchyPair::random(&sizes, &mut rng);
            let v = CauchyPair::random(&sizes, &mut rng);
            assert!(skew_pairing(&u, &u).norm() < 1e-14);
            assert!((skew_pairing(&u, &v) + skew_pairing(&v, &u)).norm() < 1e-13);
        }
    }
}
