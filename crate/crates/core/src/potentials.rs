//! Yukawa single- and double-layer potentials evaluated off the boundary by
//! composite Gauss quadrature, and the representation-formula checks built
//! on them.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fem::{boundary_mass, quadrature::gauss_unit};
use crate::linalg::{SpdFactor, C64};
use crate::mesh::{Mesh, Point, Skeleton, SubdomainBoundary};
use crate::par::Exec;
use crate::specfun::green2;
use crate::traces::{cauchy_data, CauchyPair};

pub const DEFAULT_ORDER: usize = 4;

#[derive(Clone, Copy, Debug)]
struct QuadPoint {
    x: Point,
    weight: f64,
    normal: [f64; 2],
    /// boundary positions of the edge endpoints and the local coordinate
    ends: [usize; 2],
    s: f64,
}

/// Per-edge Gauss nodes on one subdomain boundary with outward normals.
#[derive(Clone, Debug)]
pub struct BoundaryQuadrature {
    points: Vec<QuadPoint>,
    edges: Vec<(Point, Point)>,
    n_nodes: usize,
}

impl BoundaryQuadrature {
    pub fn new(mesh: &Mesh, boundary: &SubdomainBoundary, order: usize) -> Result<Self> {
        let rule = gauss_unit(order)?;
        let pts: Vec<Point> = boundary.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
        let mut points = Vec::with_capacity(rule.len() * boundary.edges.len());
        let mut edges = Vec::with_capacity(boundary.edges.len());
        for &[a, b] in &boundary.edges {
            let (p, q) = (pts[a], pts[b]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            edges.push((p, q));
            for &(s, w) in &rule {
                points.push(QuadPoint {
                    x: [p[0] + s * dx, p[1] + s * dy],
                    weight: w * len,
                    normal: [dy / len, -dx / len],
                    ends: [a, b],
                    s,
                });
            }
        }
        Ok(Self {
            points,
            edges,
            n_nodes: pts.len(),
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|q| q.weight).sum()
    }

    /// Same nodes with inward normals.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for q in &mut out.points {
            q.normal = [-q.normal[0], -q.normal[1]];
        }
        out
    }

    /// Reject points closer to an edge than twice that edge's length.
    pub fn check_distance(&self, x: Point) -> Result<()> {
        for &(p, q) in &self.edges {
            let len = crate::mesh::distance(p, q);
            let d = point_segment_distance(x, p, q);
            if d < 2.0 * len {
                return Err(Error::TooCloseToBoundary {
                    distance: d,
                    required: 2.0 * len,
                });
            }
        }
        Ok(())
    }

    fn interpolate(&self, qp: &QuadPoint, v: &DVector<C64>) -> C64 {
        v[qp.ends[0]] * (1.0 - qp.s) + v[qp.ends[1]] * qp.s
    }

    fn check_len(&self, v: &DVector<C64>) -> Result<()> {
        if v.len() != self.n_nodes {
            return Err(Error::ShapeMismatch {
                expected: self.n_nodes,
                found: v.len(),
            });
        }
        Ok(())
    }
}

fn point_segment_distance(x: Point, p: Point, q: Point) -> f64 {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let t = (((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    crate::mesh::distance(x, [p[0] + t * dx, p[1] + t * dy])
}

/// `∫ G(x - y) q(y) dσ(y)` for a nodal P1 density `q`.
pub fn single_layer(quad: &BoundaryQuadrature, gamma: f64, q: &DVector<C64>, x: Point) -> Result<C64> {
    quad.check_len(q)?;
    quad.check_distance(x)?;
    Ok(quad
        .points
        .iter()
        .map(|qp| quad.interpolate(qp, q) * (green2(gamma, [x[0] - qp.x[0], x[1] - qp.x[1]]).0 * qp.weight))
        .sum())
}

/// `∫ n(y)·(∇G)(x - y) v(y) dσ(y)` for a nodal P1 density `v`.
pub fn double_layer(quad: &BoundaryQuadrature, gamma: f64, v: &DVector<C64>, x: Point) -> Result<C64> {
    quad.check_len(v)?;
    quad.check_distance(x)?;
    Ok(quad
        .points
        .iter()
        .map(|qp| {
            let g = green2(gamma, [x[0] - qp.x[0], x[1] - qp.x[1]]).1;
            quad.interpolate(qp, v) * ((qp.normal[0] * g[0] + qp.normal[1] * g[1]) * qp.weight)
        })
        .sum())
}

/// Nodal density whose boundary-mass moments are the dual vector `p`.
pub fn dual_to_nodal(mesh: &Mesh, boundary: &SubdomainBoundary, p: &DVector<C64>) -> Result<DVector<C64>> {
    Ok(SpdFactor::new(boundary_mass(mesh, boundary).to_dense())?.solve(p))
}

/// Multi-potential `Σ_j Ψ^j(u_j)` with Dirichlet blocks taken as nodal
/// values and Neumann blocks as dual vectors.
#[derive(Clone, Debug)]
pub struct MultiPotential {
    gamma: f64,
    quads: Vec<BoundaryQuadrature>,
    /// nodal Dirichlet and Neumann densities per subdomain
    densities: Vec<(DVector<C64>, DVector<C64>)>,
}

impl MultiPotential {
    pub fn new(mesh: &Mesh, skeleton: &Skeleton, gamma: f64, u: &CauchyPair, order: usize, subdomains: &[usize]) -> Result<Self> {
        let mut quads = Vec::new();
        let mut densities = Vec::new();
        for &j in subdomains {
            let b = skeleton.boundary(j);
            quads.push(BoundaryQuadrature::new(mesh, b, order)?);
            densities.push((u.dir.block(j).clone(), dual_to_nodal(mesh, b, u.neu.block(j))?));
        }
        Ok(Self { gamma, quads, densities })
    }

    pub fn eval(&self, x: Point) -> Result<C64> {
        let mut sum = C64::new(0.0, 0.0);
        for (quad, (v, q)) in self.quads.iter().zip(&self.densities) {
            sum += single_layer(quad, self.gamma, q, x)? + double_layer(quad, self.gamma, v, x)?;
        }
        Ok(sum)
    }

    pub fn eval_many(&self, xs: &[Point], exec: Exec) -> Result<Vec<C64>> {
        exec.try_map(xs.len(), |i| self.eval(xs[i]))
    }
}

fn green_pair(mesh: &Mesh, skeleton: &Skeleton, gamma: f64, x0: Point, order: usize) -> Result<CauchyPair> {
    for &v in skeleton.vertices() {
        if mesh.vertices()[v] == x0 {
            return Err(Error::KernelSingularity);
        }
    }
    cauchy_data(
        mesh,
        skeleton,
        order,
        |x| C64::new(green2(gamma, [x[0] - x0[0], x[1] - x0[1]]).0, 0.0),
        |x| green2(gamma, [x[0] - x0[0], x[1] - x0[1]]).1.map(|g| C64::new(g, 0.0)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepresentationCheck {
    /// max over interior points of |Ψ(τu)(x) - u(x)| / |u(x)|
    pub interior_rel_error: f64,
    /// max over exterior points of |Ψ(τu)(x)|, relative to max |u| over the interior points
    pub exterior_leakage: f64,
}

/// Reproduce `u = G(· - x₀)`, `x₀ ∉ Ω̄_j`, inside `Ω_j` from its boundary
/// traces and check that the same potential vanishes outside.
#[allow(clippy::too_many_arguments)]
pub fn verify_representation(
    mesh: &Mesh,
    skeleton: &Skeleton,
    j: usize,
    gamma: f64,
    x0: Point,
    interior: &[Point],
    exterior: &[Point],
    exec: Exec,
) -> Result<RepresentationCheck> {
    let pair = green_pair(mesh, skeleton, gamma, x0, DEFAULT_ORDER)?;
    let pot = MultiPotential::new(mesh, skeleton, gamma, &pair, DEFAULT_ORDER, &[j])?;
    let u = |x: Point| green2(gamma, [x[0] - x0[0], x[1] - x0[1]]).0;
    let inside = pot.eval_many(interior, exec)?;
    let mut rel = 0.0f64;
    let mut umax = 0.0f64;
    for (x, psi) in interior.iter().zip(&inside) {
        let ux = u(*x);
        umax = umax.max(ux.abs());
        rel = rel.max((psi - ux).norm() / ux.abs());
    }
    let outside = pot.eval_many(exterior, exec)?;
    let leak = outside.iter().map(|z| z.norm()).fold(0.0, f64::max) / umax.max(f64::MIN_POSITIVE);
    Ok(RepresentationCheck {
        interior_rel_error: rel,
        exterior_leakage: leak,
    })
}

/// `max |Σ_j Ψ^j(τ_j G_{x₀})|` over `points`: the multi-potential of a single
/// trace, which vanishes up to discretization error.
pub fn verify_single_trace_annihilation(
    mesh: &Mesh,
    skeleton: &Skeleton,
    gamma: f64,
    x0: Point,
    points: &[Point],
    exec: Exec,
) -> Result<f64> {
    let pair = green_pair(mesh, skeleton, gamma, x0, DEFAULT_ORDER)?;
    let all: Vec<usize> = (0..skeleton.n_subdomains()).filter(|&j| !skeleton.boundary(j).is_empty()).collect();
    let pot = MultiPotential::new(mesh, skeleton, gamma, &pair, DEFAULT_ORDER, &all)?;
    Ok(pot.eval_many(points, exec)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_skeleton, generate_partitioned_disk};
    use crate::specfun::bessel_k01;

    fn merged_disk(r: f64, h: f64) -> (Mesh, Skeleton) {
        let mesh = generate_partitioned_disk(3, r, 1.5 * r, h).unwrap();
        let tags = mesh.tags().iter().map(|&t| usize::from(t > 0)).collect();
        let mesh = mesh.retagged(tags).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        (mesh, sk)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    #[test]
    fn weights_sum_to_length_and_zero_density() {
        let (mesh, sk) = merged_disk(1.0, 0.1);
        let b = sk.boundary(1);
        let quad = BoundaryQuadrature::new(&mesh, b, 4).unwrap();
        let len: f64 = b
            .edges
            .iter()
            .map(|e| crate::mesh::distance(mesh.vertices()[b.vertices[e[0]]], mesh.vertices()[b.vertices[e[1]]]))
            .sum();
        assert!((quad.total_weight() - len).abs() < 1e-12 * len);
        let zero = DVector::zeros(b.len());
        assert_eq!(single_layer(&quad, 0.5, &zero, [0.0, 0.0]).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(double_layer(&quad, 0.5, &zero, [0.0, 0.0]).unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(
            single_layer(&quad, 0.5, &zero, [0.99, 0.0]),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn circle_center_values() {
        let (r, gamma) = (1.0, 0.5);
        let (mesh, sk) = merged_disk(r, r / 40.0);
        let b = sk.boundary(1);
        let quad = BoundaryQuadrature::new(&mesh, b, 4).unwrap();
        let ones = DVector::from_element(b.len(), C64::new(1.0, 0.0));
        let (k0, k1) = bessel_k01(r / gamma).unwrap();
        let s = single_layer(&quad, gamma, &ones, [0.0, 0.0]).unwrap();
        assert!((s.re - r * k0).abs() < 2e-3 * r * k0);
        let d = double_layer(&quad, gamma, &ones, [0.0, 0.0]).unwrap();
        assert!((d.re - r / gamma * k1).abs() < 2e-3 * r / gamma * k1);
        let flipped = double_layer(&quad.flipped(), gamma, &ones, [0.0, 0.0]).unwrap();
        assert!((flipped + d).norm() < 1e-14);

        // the same polygon integrated edge by edge with adaptive Simpson
        let mut oracle = 0.0;
        for e in &b.edges {
            let (p, q) = (mesh.vertices()[b.vertices[e[0]]], mesh.vertices()[b.vertices[e[1]]]);
            let len = crate::mesh::distance(p, q);
            let n = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
            let f = |t: f64| {
                let y = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                let g = green2(gamma, [-y[0], -y[1]]).1;
                (n[0] * g[0] + n[1] * g[1]) * len
            };
            oracle += adaptive_simpson(&f, 0.0, 1.0, 1e-13);
        }
        assert!((d.re - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn layer_potentials_are_linear() {
        let (mesh, sk) = merged_disk(1.0, 0.1);
        let b = sk.boundary(1);
        let quad = BoundaryQuadrature::new(&mesh, b, 4).unwrap();
        let u = DVector::from_fn(b.len(), |i, _| C64::new((i as f64).cos(), 0.2));
        let v = DVector::from_fn(b.len(), |i, _| C64::new(0.1, (i as f64).sin()));
        let a = C64::new(0.3, -1.2);
        let x = [0.1, -0.2];
        let lhs = single_layer(&quad, 0.5, &(&u + &v * a), x).unwrap();
        let rhs = single_layer(&quad, 0.5, &u, x).unwrap() + single_layer(&quad, 0.5, &v, x).unwrap() * a;
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn representation_on_sector() {
        let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.05).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        let c = [0.268, 0.464];
        let interior = [c, [c[0] + 0.05, c[1]], [c[0], c[1] - 0.05]];
        let exterior = [[-0.5, 0.1], [0.2, -0.6]];
        let check = verify_representation(&mesh, &sk, 1, 1.0 / 3.0, [1.3, -0.4], &interior, &exterior, Exec::default()).unwrap();
        assert!(check.interior_rel_error < 1e-2, "{check:?}");
        assert!(check.exterior_leakage < 1e-2, "{check:?}");
    }

    #[test]
    fn multipotential_of_single_trace_vanishes() {
        let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.05).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        let gamma = 1.0 / 3.0;
        let x0 = [1.25, 0.1];
        let points = [[0.3, 0.4], [-0.4, 0.1], [0.0, -1.3]];
        let g = green2(gamma, [0.3 - x0[0], 0.4 - x0[1]]).0;
        let m = verify_single_trace_annihilation(&mesh, &sk, gamma, x0, &points, Exec::default()).unwrap();
        assert!(m < 1e-2 * g.max(green2(gamma, [0.0 - x0[0], -1.3 - x0[1]]).0), "{m}");
    }
}
