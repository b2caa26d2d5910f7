use nalgebra::DVector;

use super::{CauchyPair, MultiTrace, TraceKind};
use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_unit;
use crate::linalg::{CsrMatrix, C64};
use crate::mesh::{Mesh, Point, Skeleton};

/// Stacked 0/1 restriction `R` from skeleton-vertex values to the boundary
/// blocks. Each boundary position reads exactly one skeleton vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleTraceMap {
    sizes: Vec<usize>,
    n_skeleton: usize,
    /// `entries[j][pos]` = skeleton index read by position `pos` of block `j`.
    entries: Vec<Vec<usize>>,
}

impl SingleTraceMap {
    pub fn new(skeleton: &Skeleton) -> Self {
        let entries: Vec<Vec<usize>> = (0..skeleton.n_subdomains()).map(|j| skeleton.to_skeleton(j).to_vec()).collect();
        Self {
            sizes: entries.iter().map(Vec::len).collect(),
            n_skeleton: skeleton.n_vertices(),
            entries,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_skeleton(&self) -> usize {
        self.n_skeleton
    }

    pub fn entries(&self, j: usize) -> &[usize] {
        &self.entries[j]
    }

    /// Copy with position `pos` of block `j` redirected to skeleton vertex
    /// `target` (fault injection).
    pub fn corrupted(&self, j: usize, pos: usize, target: usize) -> Self {
        let mut out = self.clone();
        out.entries[j][pos] = target;
        out
    }

    /// Skeleton vertices that no boundary position reads; non-empty means
    /// `R` has deficient column rank.
    pub fn unused_columns(&self) -> Vec<usize> {
        let mut used = vec![false; self.n_skeleton];
        for e in self.entries.iter().flatten() {
            used[*e] = true;
        }
        (0..self.n_skeleton).filter(|&s| !used[s]).collect()
    }

    pub fn check_full_rank(&self) -> Result<()> {
        match self.unused_columns().first() {
            Some(s) => Err(Error::RankDeficient(format!("skeleton vertex {s} is read by no boundary block"))),
            None => Ok(()),
        }
    }

    /// `R φ` as Dirichlet blocks.
    pub fn restrict(&self, phi: &DVector<C64>) -> MultiTrace {
        MultiTrace::from_blocks(
            TraceKind::Dirichlet,
            self.entries.iter().map(|e| DVector::from_iterator(e.len(), e.iter().map(|&s| phi[s]))).collect(),
        )
    }

    /// `Rᵀ p`: sum of the block entries landing on each skeleton vertex.
    pub fn gather(&self, p: &MultiTrace) -> DVector<C64> {
        let mut out = DVector::zeros(self.n_skeleton);
        for (e, b) in self.entries.iter().zip(p.blocks()) {
            for (&s, v) in e.iter().zip(b.iter()) {
                out[s] += v;
            }
        }
        out
    }

    /// Sparse `R` of size (Σ|∂Ωj|) × |Γ|.
    pub fn matrix(&self) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        let mut row = 0;
        for e in &self.entries {
            for &s in e {
                t.push((row, s, 1.0));
                row += 1;
            }
        }
        CsrMatrix::from_triplets(row, self.n_skeleton, t)
    }

    /// Basis of `ker Rᵀ`: for each skeleton vertex read by positions
    /// `o_1, …, o_m`, the vectors `e_{o_1} - e_{o_i}` for `i = 2..m`.
    pub fn kernel_basis(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n_skeleton];
        for (j, e) in self.entries.iter().enumerate() {
            for (pos, &s) in e.iter().enumerate() {
                occ[s].push((j, pos));
            }
        }
        occ.iter()
            .flat_map(|o| o.iter().skip(1).map(move |&b| (o[0], b)))
            .collect()
    }
}

/// `max |⟦u, b⟧|` over a basis `b` of the discrete single-trace space
/// `range R × ker Rᵀ`: the larger of `‖Rᵀ u_neu‖_∞` and the largest
/// Dirichlet jump between two blocks sharing a skeleton vertex.
/// Zero exactly when `u` is a discrete single trace.
pub fn polarity_residual(u: &CauchyPair, map: &SingleTraceMap) -> f64 {
    let flux = map.gather(&u.neu).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let jump = map
        .kernel_basis()
        .iter()
        .map(|&((j, p), (k, q))| (u.dir.block(j)[p] - u.dir.block(k)[q]).norm())
        .fold(0.0, f64::max);
    flux.max(jump)
}

/// Cauchy data of a smooth field on every subdomain boundary: nodal values
/// and dual Neumann vectors `∫ (∇u·n_j) φ_i` with `n_j` outward for `Ωj`,
/// integrated edge by edge with an `order`-point Gauss rule.
pub fn cauchy_data(
    mesh: &Mesh,
    skeleton: &Skeleton,
    order: usize,
    value: impl Fn(Point) -> C64,
    grad: impl Fn(Point) -> [C64; 2],
) -> Result<CauchyPair> {
    let rule = gauss_unit(order)?;
    let mut dir = Vec::new();
    let mut neu = Vec::new();
    for b in skeleton.boundaries() {
        let pts: Vec<Point> = b.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
        dir.push(DVector::from_iterator(pts.len(), pts.iter().map(|&x| value(x))));
        let mut p = DVector::zeros(pts.len());
        for &[s, t] in &b.edges {
            let (a, c) = (pts[s], pts[t]);
            let (dx, dy) = (c[0] - a[0], c[1] - a[1]);
            let len = dx.hypot(dy);
            let n = [dy / len, -dx / len];
            for &(x, w) in &rule {
                let g = grad([a[0] + x * dx, a[1] + x * dy]);
                let dn = (g[0] * n[0] + g[1] * n[1]) * (w * len);
                p[s] += dn * (1.0 - x);
                p[t] += dn * x;
            }
        }
        neu.push(p);
    }
    CauchyPair::new(
        MultiTrace::from_blocks(TraceKind::Dirichlet, dir),
        MultiTrace::from_blocks(TraceKind::Neumann, neu),
    )
}
