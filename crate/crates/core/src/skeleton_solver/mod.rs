//! The skeleton equation `p - ΠS p = f` with `f = Π τ₊(φ_f)`, its iterative
//! solvers, coercivity estimates, field reconstruction, and the monolithic
//! finite-element reference.

mod coercivity;
mod iterative;

use std::sync::Arc;

#[cfg(test)]
use nalgebra::DVector;

pub use coercivity::{estimate_coercivity, injectivity_check, rayleigh_quotient, CoercivityEstimate, DenseOperator, ProbeMethod};
pub use iterative::{gmres, richardson, richardson_bound, SolveReport};

use crate::error::{Error, Result};
use crate::exchange::{build_exchange, ExchangeOperator};
use crate::fem::{assemble_helmholtz, CoefficientField, SubdomainMesh};
use crate::linalg::C64;
use crate::local_solver::ScatteringOperator;
use crate::mesh::{Mesh, Skeleton};
use crate::par::Exec;
use crate::traces::{multitrace_norm, Closure, DtnOperator, MultiTrace, SingleTraceMap, TraceKind};

/// Default cap on skeleton unknowns for dense operator materialization.
pub const DENSE_LIMIT: usize = 2000;

/// Which algebraically equivalent skeleton equation is solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SystemForm {
    /// `p - ΠS p = Π τ₊(φ_f)`.
    #[default]
    Product,
    /// `(Π - S) p = τ₊(φ_f)`.
    Difference,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Yukawa decay length; `None` means `1/κ₀`.
    pub gamma: Option<f64>,
    /// Impedance; `None` means `κ₀`.
    pub omega: Option<f64>,
    pub closure: Closure,
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            omega: None,
            closure: Closure::Absorbing,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SkeletonSystem {
    subs: Vec<SubdomainMesh>,
    n_vertices: usize,
    dtn: Arc<DtnOperator>,
    exchange: ExchangeOperator,
    scattering: ScatteringOperator,
    offset: MultiTrace,
    rhs: MultiTrace,
    gamma: f64,
    omega: f64,
    exec: Exec,
}

impl SkeletonSystem {
    pub fn build(mesh: &Mesh, skeleton: &Skeleton, coeffs: &CoefficientField, config: &SolverConfig) -> Result<Self> {
        Self::build_with_map(mesh, skeleton, coeffs, config, SingleTraceMap::new(skeleton))
    }

    /// Build with an explicit restriction map (used to inject faults).
    pub fn build_with_map(
        mesh: &Mesh,
        skeleton: &Skeleton,
        coeffs: &CoefficientField,
        config: &SolverConfig,
        map: SingleTraceMap,
    ) -> Result<Self> {
        if skeleton.n_subdomains() < 2 || skeleton.total_dofs() == 0 {
            return Err(Error::InvalidParameter("need at least two subdomains sharing an interface".into()));
        }
        coeffs.validate(mesh)?;
        let k0 = coeffs.kappa0();
        let gamma = config.gamma.unwrap_or(1.0 / k0);
        let omega = config.omega.unwrap_or(k0);
        if !(gamma > 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma and omega must be positive, got {gamma}, {omega}")));
        }
        let exec = config.exec;
        let subs = (0..skeleton.n_subdomains())
            .map(|j| SubdomainMesh::new(mesh, skeleton, j))
            .collect::<Result<Vec<_>>>()?;
        let dtn = Arc::new(DtnOperator::build(mesh, &subs, gamma, config.closure, exec)?);
        let exchange = build_exchange(dtn.clone(), map)?;
        let scattering = ScatteringOperator::build(mesh, &subs, coeffs, &dtn, omega, exec)?;
        let (offset, _) = scattering.offset_traces()?;
        let rhs = exchange.apply_pi(&offset);
        Ok(Self {
            subs,
            n_vertices: mesh.n_vertices(),
            dtn,
            exchange,
            scattering,
            offset,
            rhs,
            gamma,
            omega,
            exec,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.dtn.sizes()
    }

    pub fn total_dofs(&self) -> usize {
        self.sizes().iter().sum()
    }

    pub fn dtn(&self) -> &DtnOperator {
        &self.dtn
    }

    pub fn exchange(&self) -> &ExchangeOperator {
        &self.exchange
    }

    pub fn scattering(&self) -> &ScatteringOperator {
        &self.scattering
    }

    pub fn subdomain_meshes(&self) -> &[SubdomainMesh] {
        &self.subs
    }

    /// `τ₊(φ_f)`.
    pub fn offset(&self) -> &MultiTrace {
        &self.offset
    }

    /// `f = Π τ₊(φ_f)`.
    pub fn rhs(&self) -> &MultiTrace {
        &self.rhs
    }

    pub fn rhs_for(&self, form: SystemForm) -> &MultiTrace {
        match form {
            SystemForm::Product => &self.rhs,
            SystemForm::Difference => &self.offset,
        }
    }

    pub fn zeros(&self) -> MultiTrace {
        MultiTrace::zeros(TraceKind::Neumann, &self.sizes())
    }

    /// `p - Π(S p)`.
    pub fn apply(&self, p: &MultiTrace) -> MultiTrace {
        p.sub(&self.exchange.apply_pi(&self.scattering.apply(p)))
    }

    pub fn apply_form(&self, p: &MultiTrace, form: SystemForm) -> MultiTrace {
        match form {
            SystemForm::Product => self.apply(p),
            SystemForm::Difference => self.exchange.apply_pi(p).sub(&self.scattering.apply(p)),
        }
    }

    pub fn norm(&self, p: &MultiTrace) -> f64 {
        multitrace_norm(p, &self.dtn)
    }

    pub fn inner(&self, p: &MultiTrace, q: &MultiTrace) -> C64 {
        self.dtn.hn_inner(p, q)
    }

    /// Local fields with outgoing data `p` and the coefficient sources.
    pub fn reconstruct(&self, p: &MultiTrace) -> Result<Reconstruction> {
        let (fields, pair) = self.scattering.solve_all(p)?;
        let mut global = vec![C64::new(0.0, 0.0); self.n_vertices];
        let mut count = vec![0u32; self.n_vertices];
        for (sub, u) in self.subs.iter().zip(&fields) {
            for (&g, &v) in sub.nodes().iter().zip(u) {
                global[g] += v;
                count[g] += 1;
            }
        }
        for (v, &c) in global.iter_mut().zip(&count) {
            if c > 1 {
                *v /= f64::from(c);
            }
        }
        let map = self.exchange.map();
        let scale = fields
            .iter()
            .flat_map(|u| u.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let jump = map
            .kernel_basis()
            .iter()
            .map(|&((j, a), (k, b))| (pair.dir.block(j)[a] - pair.dir.block(k)[b]).norm())
            .fold(0.0, f64::max)
            / scale;
        let neu_scale = pair.neu.coefficient_norm().max(f64::MIN_POSITIVE);
        let balance = map.gather(&pair.neu).norm() / neu_scale;
        Ok(Reconstruction {
            fields,
            global,
            traces: pair,
            interface_jump: jump,
            neumann_balance: balance,
        })
    }
}

/// Output of [`SkeletonSystem::reconstruct`].
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Per-subdomain nodal values in local numbering.
    pub fields: Vec<Vec<C64>>,
    /// Global nodal field; values on shared vertices are averaged.
    pub global: Vec<C64>,
    pub traces: crate::traces::CauchyPair,
    /// Largest Dirichlet mismatch across interfaces relative to `max |u|`.
    pub interface_jump: f64,
    /// `‖Rᵀ u_ν‖ / ‖u_ν‖` (Euclidean on coefficients).
    pub neumann_balance: f64,
}

/// Single global solve of the same discretization on the whole mesh.
pub fn monolithic_reference(mesh: &Mesh, coeffs: &CoefficientField) -> Result<Vec<C64>> {
    coeffs.validate(mesh)?;
    let whole = SubdomainMesh::whole(mesh);
    let system = assemble_helmholtz(mesh, &whole, coeffs, None)?;
    Ok(system.factor(Exec::Sequential)?.solve(&system.load))
}

/// Relative `ℓ²`-weighted (mass matrix) distance between two global fields.
pub fn relative_l2_difference(mesh: &Mesh, u: &[C64], reference: &[C64]) -> f64 {
    let whole = SubdomainMesh::whole(mesh);
    let zero = vec![C64::new(0.0, 0.0); reference.len()];
    let den = crate::fem::l2_distance(mesh, &whole, reference, &zero);
    crate::fem::l2_distance(mesh, &whole, u, reference) / den.max(f64::MIN_POSITIVE)
}
