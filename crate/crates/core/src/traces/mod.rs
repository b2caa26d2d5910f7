//! Dirichlet-to-Neumann maps of the Yukawa operator `-Δ + γ⁻²` on each
//! subdomain, the trace inner products they induce, multi-trace containers,
//! and the single-trace restriction map.

mod multitrace;
mod single_trace;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

pub use multitrace::{skew_pairing, CauchyPair, MultiTrace, TraceKind};
pub use single_trace::{cauchy_data, polarity_residual, SingleTraceMap};

use crate::error::{Error, Result};
use crate::fem::{assemble_yukawa, outer_mass, BorderedFactor, SubdomainMesh};
use crate::linalg::{real_times_complex, SpdFactor, C64};
use crate::mesh::Mesh;
use crate::par::Exec;
use crate::specfun::bessel_k_neg_log_derivative;

/// How the Yukawa extension is closed on the truncation boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Closure {
    /// `∂ₙφ + γ⁻¹φ = 0`.
    #[default]
    Absorbing,
    /// Exact exterior Yukawa DtN of a circle centred at the origin, applied
    /// mode by mode through `-K_n'/K_n`.
    ExactCircle,
}

/// Schur complement of the Yukawa matrix onto the subdomain's skeleton
/// boundary nodes: `T_j v` is the dual Neumann trace of the discrete
/// Yukawa extension of `v`.
pub fn build_dtn(mesh: &Mesh, sub: &SubdomainMesh, gamma: f64, closure: Closure, exec: Exec) -> Result<DMatrix<f64>> {
    let mut a = assemble_yukawa(mesh, sub, gamma)?;
    let nb = sub.n_boundary();
    let tag = |e: Error| match sub.subdomain() {
        Some(j) => e.in_subdomain(j),
        None => e,
    };
    let t = if closure == Closure::Absorbing || sub.outer_edges().is_empty() {
        if !sub.outer_edges().is_empty() {
            a = a.add_scaled(&outer_mass(mesh, sub, |_| 1.0), 1.0 / gamma);
        }
        BorderedFactor::new(&a, nb, exec).map_err(tag)?.schur().clone()
    } else {
        let nbo = nb + sub.n_outer_only();
        let mut s = BorderedFactor::new(&a, nbo, exec).map_err(tag)?.schur().clone();
        let (nodes, c) = circle_closure(mesh, sub, gamma)?;
        for (a, &p) in nodes.iter().enumerate() {
            for (b, &q) in nodes.iter().enumerate() {
                s[(p, q)] += c[(a, b)];
            }
        }
        let no = nbo - nb;
        let s_oo = SpdFactor::new(s.view((nb, nb), (no, no)).into_owned()).map_err(tag)?;
        let s_ob = s.view((nb, 0), (no, nb)).into_owned();
        let s_bb = s.view((0, 0), (nb, nb)).into_owned();
        let mut x = s_ob.clone();
        for k in 0..nb {
            x.set_column(k, &s_oo.solve_real(&s_ob.column(k).into_owned()));
        }
        s_bb - s_ob.transpose() * x
    };
    Ok((&t + t.transpose()) * 0.5)
}

/// Local node ids of the truncation circle and the closure matrix
/// `M V Λ Vᵀ M` over them.
fn circle_closure(mesh: &Mesh, sub: &SubdomainMesh, gamma: f64) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let mut nodes: Vec<usize> = sub.outer_edges().iter().flat_map(|(e, _)| *e).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let pts: Vec<_> = nodes.iter().map(|&l| sub.point(mesh, l)).collect();
    let radius = pts[0][0].hypot(pts[0][1]);
    if pts.iter().any(|p| (p[0].hypot(p[1]) - radius).abs() > 1e-9 * radius) {
        return Err(Error::InvalidParameter(
            "exact circular closure needs the truncation boundary on a circle about the origin".into(),
        ));
    }
    let pos = |l: usize| nodes.binary_search(&l).expect("outer node");
    let edges: Vec<[usize; 2]> = sub.outer_edges().iter().map(|(e, _)| [pos(e[0]), pos(e[1])]).collect();
    let m = crate::fem::segment_mass(&pts, &edges).to_dense();
    let n = nodes.len();
    let theta: Vec<f64> = pts.iter().map(|p| p[1].atan2(p[0])).collect();

    // M-orthonormal discrete Fourier modes, lowest frequency first
    let mut basis: Vec<(DVector<f64>, usize)> = Vec::with_capacity(n);
    let mut freq = 0;
    while basis.len() < n && freq <= n {
        let candidates: Vec<DVector<f64>> = if freq == 0 {
            vec![DVector::from_element(n, 1.0)]
        } else {
            vec![
                DVector::from_iterator(n, theta.iter().map(|t| (freq as f64 * t).cos())),
                DVector::from_iterator(n, theta.iter().map(|t| (freq as f64 * t).sin())),
            ]
        };
        for mut v in candidates {
            let norm0 = v.dot(&(&m * &v)).sqrt();
            for _ in 0..2 {
                for (b, _) in &basis {
                    let c = b.dot(&(&m * &v));
                    v -= b * c;
                }
            }
            let norm = v.dot(&(&m * &v)).sqrt();
            if norm > 1e-8 * norm0 && basis.len() < n {
                basis.push((v / norm, freq));
            }
        }
        freq += 1;
    }
    let mut c = DMatrix::zeros(n, n);
    for (v, k) in &basis {
        let lambda = bessel_k_neg_log_derivative(*k, radius / gamma)? / gamma;
        let mv = &m * v;
        c += &mv * mv.transpose() * lambda;
    }
    Ok((nodes, c))
}

/// Block-diagonal `T = diag(T_j)` with stored Cholesky factors.
#[derive(Clone, Debug)]
pub struct DtnOperator {
    gamma: f64,
    blocks: Vec<DMatrix<f64>>,
    factors: Vec<SpdFactor>,
}

impl DtnOperator {
    pub fn build(mesh: &Mesh, subs: &[SubdomainMesh], gamma: f64, closure: Closure, exec: Exec) -> Result<Self> {
        let blocks = exec.try_map(subs.len(), |j| build_dtn(mesh, &subs[j], gamma, closure, exec))?;
        Self::from_blocks(gamma, blocks)
    }

    pub fn from_blocks(gamma: f64, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let factors = blocks
            .iter()
            .enumerate()
            .map(|(j, t)| {
                SpdFactor::new(t.clone())
                    .map_err(|_| Error::Factorization(format!("DtN block {j} is not positive definite")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { gamma, blocks, factors })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn block(&self, j: usize) -> &DMatrix<f64> {
        &self.blocks[j]
    }

    pub fn factor(&self, j: usize) -> &SpdFactor {
        &self.factors[j]
    }

    /// `T u`: Dirichlet blocks to Neumann blocks.
    pub fn apply(&self, u: &MultiTrace) -> MultiTrace {
        MultiTrace::from_blocks(
            TraceKind::Neumann,
            self.blocks.iter().zip(u.blocks()).map(|(t, b)| real_times_complex(t, b)).collect(),
        )
    }

    /// `T⁻¹ p`: Neumann blocks to Dirichlet blocks.
    pub fn solve(&self, p: &MultiTrace) -> MultiTrace {
        MultiTrace::from_blocks(
            TraceKind::Dirichlet,
            self.factors.iter().zip(p.blocks()).map(|(f, b)| f.solve(b)).collect(),
        )
    }

    /// `(p, q)_{H_N} = Σ_j q̄_jᵀ T_j⁻¹ p_j`.
    pub fn hn_inner(&self, p: &MultiTrace, q: &MultiTrace) -> C64 {
        (0..self.n_blocks()).map(|j| hm12_inner(p.block(j), q.block(j), &self.factors[j])).sum()
    }

    /// `(u, v)_{H_D} = Σ_j v̄_jᵀ T_j u_j`.
    pub fn hd_inner(&self, u: &MultiTrace, v: &MultiTrace) -> C64 {
        (0..self.n_blocks()).map(|j| h12_inner(u.block(j), v.block(j), &self.blocks[j])).sum()
    }
}

/// `v̄ᵀ T u`.
pub fn h12_inner(u: &DVector<C64>, v: &DVector<C64>, t: &DMatrix<f64>) -> C64 {
    v.dotc(&real_times_complex(t, u))
}

/// `q̄ᵀ T⁻¹ p`.
pub fn hm12_inner(p: &DVector<C64>, q: &DVector<C64>, t: &SpdFactor) -> C64 {
    q.dotc(&t.solve(p))
}

/// `‖p‖_{H_N} = (Σ_j p̄_jᵀ T_j⁻¹ p_j)^{1/2}`.
pub fn multitrace_norm(p: &MultiTrace, t: &DtnOperator) -> f64 {
    t.hn_inner(p, p).re.max(0.0).sqrt()
}

/// Analytic eigenvalue of the interior Yukawa DtN of a disk of radius `r`
/// on the Fourier mode of order `n`: `γ⁻¹ I_n'(r/γ)/I_n(r/γ)`.
pub fn disk_dtn_eigenvalue(n: usize, r: f64, gamma: f64) -> Result<f64> {
    Ok(crate::specfun::bessel_i_log_derivative(n, r / gamma)? / gamma)
}

/// Analytic eigenvalue of the exterior Yukawa DtN of a circle of radius `r`.
pub fn exterior_dtn_eigenvalue(n: usize, r: f64, gamma: f64) -> Result<f64> {
    Ok(bessel_k_neg_log_derivative(n, r / gamma)? / gamma)
}

/// Generalized eigenvalues of `T v = λ M v`, ascending.
pub fn generalized_eigenvalues(t: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let l = SpdFactor::new(m.clone())?.l();
    let li = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Factorization("singular mass factor".into()))?;
    let b = &li * t * li.transpose();
    let b = (&b + b.transpose()) * 0.5;
    let mut ev: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Closed-form flux of the mode-0 disk extension, `2πr · γ⁻¹ I_1/I_0`, used
/// as an independent check on `1ᵀ T 1`.
pub fn disk_constant_energy(r: f64, gamma: f64) -> Result<f64> {
    Ok(2.0 * PI * r * disk_dtn_eigenvalue(0, r, gamma)?)
}
