//! Local Robin problems and the scattering operator.
//!
//! For subdomain `j` with Yukawa DtN `T_j` and impedance `ω`, the outgoing
//! and ingoing Robin traces of a field are `τ∓ = u_ν ∓ iωT_j u_d`. A local
//! solve takes `τ₋` (plus volume data) to the field; `S_j` maps `τ₋` to `τ₊`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::{assemble_helmholtz, CoefficientField, LocalFactor, SubdomainMesh};
use crate::linalg::{real_times_complex, CsrMatrix, C64};
use crate::mesh::Mesh;
use crate::par::Exec;
use crate::traces::{CauchyPair, DtnOperator, MultiTrace, TraceKind};

/// `u_neu - iω T u_dir`.
pub fn robin_minus(u_dir: &DVector<C64>, u_neu: &DVector<C64>, t: &DMatrix<f64>, omega: f64) -> DVector<C64> {
    u_neu - real_times_complex(t, u_dir) * C64::new(0.0, omega)
}

/// `u_neu + iω T u_dir`.
pub fn robin_plus(u_dir: &DVector<C64>, u_neu: &DVector<C64>, t: &DMatrix<f64>, omega: f64) -> DVector<C64> {
    u_neu + real_times_complex(t, u_dir) * C64::new(0.0, omega)
}

/// `i⟦u, ū⟧ = 2 Σ_j Im(ū_jᵀ p_j)`; non-positive for outgoing Cauchy data.
pub fn energy_flux(u: &CauchyPair) -> f64 {
    (0..u.dir.n_blocks())
        .map(|j| 2.0 * u.dir.block(j).dotc(u.neu.block(j)).im)
        .sum()
}

/// Factorized `A_j - iωT_j` on one subdomain together with its dense
/// scattering matrix `S_j = I + 2iω T_j Z⁻¹`, `Z` the condensed boundary operator.
#[derive(Clone, Debug)]
pub struct LocalRobinSolver {
    subdomain: usize,
    omega: f64,
    t: DMatrix<f64>,
    matrix: CsrMatrix<C64>,
    load: Vec<C64>,
    factor: LocalFactor,
    scattering: DMatrix<C64>,
}

impl LocalRobinSolver {
    pub fn new(
        mesh: &Mesh,
        sub: &SubdomainMesh,
        coeffs: &CoefficientField,
        t: &DMatrix<f64>,
        omega: f64,
        exec: Exec,
    ) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        let j = sub
            .subdomain()
            .ok_or_else(|| Error::InvalidParameter("local solver needs a subdomain mesh".into()))?;
        let system = assemble_helmholtz(mesh, sub, coeffs, Some(&(t * omega)))?;
        let factor = system.factor(exec)?;
        let nb = sub.n_boundary();
        let scattering = match factor.boundary_lu() {
            Some(lu) => {
                let zinv = lu.solve_matrix(&DMatrix::identity(nb, nb));
                let tz = crate::linalg::to_complex(t) * zinv;
                DMatrix::identity(nb, nb) + tz * C64::new(0.0, 2.0 * omega)
            }
            None => DMatrix::zeros(0, 0),
        };
        Ok(Self {
            subdomain: j,
            omega,
            t: t.clone(),
            matrix: system.matrix,
            load: system.load,
            factor,
            scattering,
        })
    }

    pub fn subdomain(&self) -> usize {
        self.subdomain
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_boundary(&self) -> usize {
        self.t.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.nrows()
    }

    /// Load vector of the volume source and truncation data in the coefficients.
    pub fn data_load(&self) -> &[C64] {
        &self.load
    }

    /// Field with volume load `load` (weak form of the source) and outgoing
    /// Robin datum `h`.
    pub fn solve_robin(&self, load: &[C64], h: &DVector<C64>) -> Result<Vec<C64>> {
        if load.len() != self.n_nodes() || h.len() != self.n_boundary() {
            return Err(Error::ShapeMismatch {
                expected: self.n_nodes(),
                found: load.len(),
            });
        }
        let mut rhs = load.to_vec();
        for (r, v) in rhs.iter_mut().zip(h.iter()) {
            *r += v;
        }
        Ok(self.factor.solve(&rhs))
    }

    /// Dirichlet trace and dual Neumann trace of a field solving the interior
    /// rows with volume load `load`.
    pub fn traces(&self, u: &[C64], load: &[C64]) -> (DVector<C64>, DVector<C64>) {
        let nb = self.n_boundary();
        let au = self.matrix.mul_vec(u);
        let neu = DVector::from_iterator(nb, (0..nb).map(|i| au[i] - load[i]));
        (DVector::from_column_slice(&u[..nb]), neu)
    }

    pub fn robin_minus(&self, u_dir: &DVector<C64>, u_neu: &DVector<C64>) -> DVector<C64> {
        robin_minus(u_dir, u_neu, &self.t, self.omega)
    }

    pub fn robin_plus(&self, u_dir: &DVector<C64>, u_neu: &DVector<C64>) -> DVector<C64> {
        robin_plus(u_dir, u_neu, &self.t, self.omega)
    }

    /// `S_j p` through the stored dense scattering matrix.
    pub fn scattering_apply(&self, p: &DVector<C64>) -> DVector<C64> {
        &self.scattering * p
    }

    /// `S_j p` by an explicit homogeneous solve followed by `τ₊`.
    pub fn scattering_by_solve(&self, p: &DVector<C64>) -> Result<DVector<C64>> {
        let zero = vec![C64::new(0.0, 0.0); self.n_nodes()];
        let u = self.solve_robin(&zero, p)?;
        let (d, n) = self.traces(&u, &zero);
        Ok(self.robin_plus(&d, &n))
    }

    pub fn scattering_matrix(&self) -> &DMatrix<C64> {
        &self.scattering
    }
}

/// Block-diagonal scattering operator over all subdomains.
#[derive(Clone, Debug)]
pub struct ScatteringOperator {
    solvers: Vec<LocalRobinSolver>,
    exec: Exec,
}

impl ScatteringOperator {
    pub fn build(
        mesh: &Mesh,
        subs: &[SubdomainMesh],
        coeffs: &CoefficientField,
        dtn: &DtnOperator,
        omega: f64,
        exec: Exec,
    ) -> Result<Self> {
        coeffs.validate(mesh)?;
        let solvers = exec.try_map(subs.len(), |j| {
            LocalRobinSolver::new(mesh, &subs[j], coeffs, dtn.block(j), omega, exec)
        })?;
        Ok(Self { solvers, exec })
    }

    pub fn solvers(&self) -> &[LocalRobinSolver] {
        &self.solvers
    }

    pub fn solver(&self, j: usize) -> &LocalRobinSolver {
        &self.solvers[j]
    }

    pub fn omega(&self) -> f64 {
        self.solvers.first().map_or(0.0, |s| s.omega)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.solvers.iter().map(LocalRobinSolver::n_boundary).collect()
    }

    pub fn apply(&self, p: &MultiTrace) -> MultiTrace {
        let blocks = self.exec.map(self.solvers.len(), |j| self.solvers[j].scattering_apply(p.block(j)));
        MultiTrace::from_blocks(TraceKind::Neumann, blocks)
    }

    /// Local solves with the coefficient data and zero outgoing datum; returns
    /// `τ₊(φ_f)` and the per-subdomain fields `φ_f`.
    pub fn offset_traces(&self) -> Result<(MultiTrace, Vec<Vec<C64>>)> {
        let out = self.exec.try_map(self.solvers.len(), |j| {
            let s = &self.solvers[j];
            let u = s.solve_robin(&s.load, &DVector::zeros(s.n_boundary()))?;
            let (d, n) = s.traces(&u, &s.load);
            Ok::<_, Error>((s.robin_plus(&d, &n), u))
        })?;
        let (blocks, fields) = out.into_iter().unzip();
        Ok((MultiTrace::from_blocks(TraceKind::Neumann, blocks), fields))
    }

    /// Fields with the coefficient data and outgoing data `p`, plus their
    /// Cauchy traces.
    pub fn solve_all(&self, p: &MultiTrace) -> Result<(Vec<Vec<C64>>, CauchyPair)> {
        let out = self.exec.try_map(self.solvers.len(), |j| {
            let s = &self.solvers[j];
            let u = s.solve_robin(&s.load, p.block(j))?;
            let (d, n) = s.traces(&u, &s.load);
            Ok::<_, Error>((u, d, n))
        })?;
        let mut fields = Vec::new();
        let (mut dir, mut neu) = (Vec::new(), Vec::new());
        for (u, d, n) in out {
            fields.push(u);
            dir.push(d);
            neu.push(n);
        }
        let pair = CauchyPair::new(
            MultiTrace::from_blocks(TraceKind::Dirichlet, dir),
            MultiTrace::from_blocks(TraceKind::Neumann, neu),
        )?;
        Ok((fields, pair))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_skeleton, generate_partitioned_disk};
    use crate::traces::{multitrace_norm, Closure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        mesh: Mesh,
        subs: Vec<SubdomainMesh>,
        dtn: DtnOperator,
        coeffs: CoefficientField,
    }

    fn fixture(absorbing: bool) -> Fixture {
        let mesh = generate_partitioned_disk(3, 1.0, 1.6, 0.15).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        let subs: Vec<_> = (0..4).map(|j| SubdomainMesh::new(&mesh, &sk, j).unwrap()).collect();
        let dtn = DtnOperator::build(&mesh, &subs, 1.0 / 3.0, Closure::Absorbing, Exec::default()).unwrap();
        let loss = if absorbing { 0.5 } else { 0.0 };
        let coeffs = CoefficientField::piecewise_constant(
            &[1.0, 2.0, 1.0, 2.0],
            &[C64::new(9.0, 0.0), C64::new(12.0, loss), C64::new(13.5, 0.0), C64::new(16.0, loss)],
            3.0,
        )
        .unwrap()
        .with_source(|x| C64::new((-8.0 * ((x[0] - 0.3).powi(2) + x[1].powi(2))).exp(), 0.0));
        Fixture { mesh, subs, dtn, coeffs }
    }

    fn random_block(n: usize, rng: &mut impl Rng) -> DVector<C64> {
        DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn robin_traces_basic_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 7;
        let t = DMatrix::from_fn(n, n, |i, j| if i == j { 3.0 } else { 0.2 });
        let z = DVector::zeros(n);
        let p = random_block(n, &mut rng);
        assert_eq!(robin_minus(&z, &p, &t, 2.0), p);
        assert_eq!(robin_plus(&z, &p, &t, 2.0), p);
        let u = random_block(n, &mut rng);
        assert_eq!(robin_plus(&u, &z, &t, 2.0), -robin_minus(&u, &z, &t, 2.0));
    }

    #[test]
    fn manufactured_local_solution_is_recovered() {
        let f = fixture(false);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for j in 0..4 {
            let s = LocalRobinSolver::new(&f.mesh, &f.subs[j], &f.coeffs, f.dtn.block(j), 3.0, Exec::Sequential).unwrap();
            let nb = s.n_boundary();
            let u_star: Vec<C64> = (0..s.n_nodes()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
            // interior residual is the load; boundary rows carry the datum
            let mut load = s.matrix.mul_vec(&u_star);
            for v in load.iter_mut().take(nb) {
                *v = C64::new(0.0, 0.0);
            }
            let (d, n) = s.traces(&u_star, &load);
            let h = s.robin_minus(&d, &n);
            let u = s.solve_robin(&load, &h).unwrap();
            let err: f64 = u.iter().zip(&u_star).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let scale: f64 = u_star.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * scale, "j={j}: {err}");
            let (d2, n2) = s.traces(&u, &load);
            let h2 = s.robin_minus(&d2, &n2);
            assert!((&h2 - &h).norm() <= 1e-11 * h.norm());
        }
    }

    #[test]
    fn scattering_contracts_and_is_isometric_when_lossless() {
        for absorbing in [true, false] {
            let f = fixture(absorbing);
            let s = ScatteringOperator::build(&f.mesh, &f.subs, &f.coeffs, &f.dtn, 3.0, Exec::default()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..10 {
                let p = MultiTrace::random(TraceKind::Neumann, &f.dtn.sizes(), &mut rng);
                let sp = s.apply(&p);
                assert!(multitrace_norm(&sp, &f.dtn) <= multitrace_norm(&p, &f.dtn) + 1e-9);
                for j in 1..4 {
                    let a = crate::traces::hm12_inner(sp.block(j), sp.block(j), f.dtn.factor(j)).re.sqrt();
                    let b = crate::traces::hm12_inner(p.block(j), p.block(j), f.dtn.factor(j)).re.sqrt();
                    if !absorbing {
                        assert!((a - b).abs() <= 1e-9 * b, "lossless j={j}: {a} vs {b}");
                    } else {
                        assert!(a <= b + 1e-9);
                    }
                }
                for j in 0..4 {
                    let by_solve = s.solver(j).scattering_by_solve(p.block(j)).unwrap();
                    assert!((&by_solve - sp.block(j)).norm() <= 1e-10 * p.block(j).norm());
                }
            }
            let zero = MultiTrace::zeros(TraceKind::Neumann, &f.dtn.sizes());
            assert!(s.apply(&zero).is_zero());
        }
    }

    #[test]
    fn offset_and_flux() {
        let f = fixture(true);
        let s = ScatteringOperator::build(&f.mesh, &f.subs, &f.coeffs, &f.dtn, 3.0, Exec::default()).unwrap();
        let (tau, fields) = s.offset_traces().unwrap();
        for (j, field) in fields.iter().enumerate() {
            let sv = s.solver(j);
            let (d, n) = sv.traces(field, sv.data_load());
            assert!((sv.robin_plus(&d, &n) - tau.block(j)).norm() <= 1e-12 * tau.block(j).norm().max(1.0));
            assert!(sv.robin_minus(&d, &n).norm() <= 1e-10 * n.norm().max(1e-300));
        }
        // zero data gives a zero offset
        let homogeneous = f.coeffs.homogeneous_data();
        let s0 = ScatteringOperator::build(&f.mesh, &f.subs, &homogeneous, &f.dtn, 3.0, Exec::default()).unwrap();
        assert!(s0.offset_traces().unwrap().0.is_zero());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = MultiTrace::random(TraceKind::Neumann, &f.dtn.sizes(), &mut rng);
        let (_, pair) = s0.solve_all(&p).unwrap();
        assert!(energy_flux(&pair) <= 1e-9);
        let real = CauchyPair::new(
            MultiTrace::from_blocks(TraceKind::Dirichlet, pair.dir.blocks().iter().map(|b| b.map(|z| C64::new(z.re, 0.0))).collect()),
            MultiTrace::from_blocks(TraceKind::Neumann, pair.neu.blocks().iter().map(|b| b.map(|z| C64::new(z.re, 0.0))).collect()),
        )
        .unwrap();
        assert_eq!(energy_flux(&real), 0.0);
    }
}
