use nalgebra::{DMatrix, DVector};

use super::quadrature::{gauss_unit, TRIANGLE_7};
use super::{p1_gradients, BorderedFactor, CoefficientField, SubdomainMesh};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, ComplexLu, TripletBuilder, C64};
use crate::mesh::{Mesh, Point, SubdomainBoundary};
use crate::par::Exec;

const EDGE_QUADRATURE: usize = 4;

fn mass_entry(i: usize, j: usize) -> f64 {
    if i == j {
        2.0 / 12.0
    } else {
        1.0 / 12.0
    }
}

fn edge_normal(a: Point, b: Point) -> ([f64; 2], f64) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx.hypot(dy);
    ([dy / len, -dx / len], len)
}

/// `∫ ∇u·∇v + γ⁻² u v` over the subdomain, in local numbering.
pub fn assemble_yukawa(mesh: &Mesh, sub: &SubdomainMesh, gamma: f64) -> Result<CsrMatrix<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if sub.triangles().is_empty() {
        return Err(Error::EmptySubdomain(sub.subdomain().unwrap_or(0)));
    }
    let g2 = gamma.powi(-2);
    let n = sub.n_nodes();
    let mut b = TripletBuilder::new(n, n);
    for (&t, tri) in sub.triangles().iter().zip(sub.local_triangles()) {
        let (grads, area) = p1_gradients(mesh.triangle_points(t));
        for i in 0..3 {
            for j in 0..3 {
                let k = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                b.push(tri[i], tri[j], k + g2 * (area * mass_entry(i, j)));
            }
        }
    }
    Ok(b.build())
}

/// Consistent P1 volume mass matrix.
pub fn assemble_mass(mesh: &Mesh, sub: &SubdomainMesh) -> CsrMatrix<f64> {
    let n = sub.n_nodes();
    let mut b = TripletBuilder::new(n, n);
    for (&t, tri) in sub.triangles().iter().zip(sub.local_triangles()) {
        let area = mesh.triangle_area(t);
        for i in 0..3 {
            for j in 0..3 {
                b.push(tri[i], tri[j], area * mass_entry(i, j));
            }
        }
    }
    b.build()
}

/// P1 mass matrix of a polyline given as edges between indexed points.
pub fn segment_mass(points: &[Point], edges: &[[usize; 2]]) -> CsrMatrix<f64> {
    segment_mass_weighted(points, edges.iter().map(|&e| (e, 1.0)))
}

fn segment_mass_weighted(points: &[Point], edges: impl Iterator<Item = ([usize; 2], f64)>) -> CsrMatrix<f64> {
    let n = points.len();
    let mut b = TripletBuilder::new(n, n);
    for ([p, q], w) in edges {
        let len = crate::mesh::distance(points[p], points[q]);
        let (d, o) = (w * len / 3.0, w * len / 6.0);
        b.push(p, p, d);
        b.push(q, q, d);
        b.push(p, q, o);
        b.push(q, p, o);
    }
    b.build()
}

/// Mass matrix of a subdomain's interface boundary, indexed by boundary position.
pub fn boundary_mass(mesh: &Mesh, boundary: &SubdomainBoundary) -> CsrMatrix<f64> {
    let points: Vec<Point> = boundary.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
    segment_mass(&points, &boundary.edges)
}

/// Truncation-boundary mass matrix in local numbering, each edge weighted
/// by `weight(global triangle)`.
pub fn outer_mass(mesh: &Mesh, sub: &SubdomainMesh, weight: impl Fn(usize) -> f64) -> CsrMatrix<f64> {
    let points: Vec<Point> = (0..sub.n_nodes()).map(|l| sub.point(mesh, l)).collect();
    segment_mass_weighted(&points, sub.outer_edges().iter().map(|&(e, t)| (e, weight(t))))
}

/// Discretized `-div(μ∇u) - κ²u = f` on one subdomain with the absorbing
/// closure `μ∂ₙu - iκ₀μu = g` on truncation edges, and an optional dense
/// operator `B` entering as `-i B` on the leading boundary block.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    pub matrix: CsrMatrix<C64>,
    pub load: Vec<C64>,
    pub n_boundary: usize,
    pub boundary_block: Option<DMatrix<C64>>,
    pub subdomain: Option<usize>,
}

pub fn assemble_helmholtz(
    mesh: &Mesh,
    sub: &SubdomainMesh,
    coeffs: &CoefficientField,
    boundary_operator: Option<&DMatrix<f64>>,
) -> Result<LocalSystem> {
    let nb = sub.n_boundary();
    if let Some(b) = boundary_operator {
        if b.nrows() != nb || b.ncols() != nb {
            return Err(Error::ShapeMismatch {
                expected: nb,
                found: b.nrows(),
            });
        }
    }
    let n = sub.n_nodes();
    let mut builder = TripletBuilder::new(n, n);
    let mut load = vec![C64::new(0.0, 0.0); n];
    let tags = mesh.tags();
    for (&t, tri) in sub.triangles().iter().zip(sub.local_triangles()) {
        let pts = mesh.triangle_points(t);
        let (grads, area) = p1_gradients(pts);
        let xc = mesh.barycenter(t);
        let mu = coeffs.mu(tags[t], xc);
        let k2 = coeffs.kappa_sq(tags[t], xc);
        for i in 0..3 {
            for j in 0..3 {
                let k = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                builder.push(tri[i], tri[j], C64::new(mu * k, 0.0) - k2 * (area * mass_entry(i, j)));
            }
        }
        if let Some(f) = coeffs.source() {
            for (l, w) in TRIANGLE_7.iter() {
                let x = [
                    l[0] * pts[0][0] + l[1] * pts[1][0] + l[2] * pts[2][0],
                    l[0] * pts[0][1] + l[1] * pts[1][1] + l[2] * pts[2][1],
                ];
                let fx = f(x) * (w * area);
                for i in 0..3 {
                    load[tri[i]] += fx * l[i];
                }
            }
        }
    }
    let rule = gauss_unit(EDGE_QUADRATURE)?;
    let k0 = coeffs.kappa0();
    for &([p, q], t) in sub.outer_edges() {
        let (a, b) = (sub.point(mesh, p), sub.point(mesh, q));
        let (normal, len) = edge_normal(a, b);
        let mu = coeffs.mu(tags[t], mesh.barycenter(t));
        let absorb = C64::new(0.0, -k0 * mu * len);
        builder.push(p, p, absorb / 3.0);
        builder.push(q, q, absorb / 3.0);
        builder.push(p, q, absorb / 6.0);
        builder.push(q, p, absorb / 6.0);
        if let Some(g) = coeffs.outer_data() {
            for &(s, w) in &rule {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let gx = g(x, normal) * (w * len);
                load[p] += gx * (1.0 - s);
                load[q] += gx * s;
            }
        }
    }
    let boundary_block = boundary_operator.map(|b| b.map(|v| C64::new(0.0, -v)));
    Ok(LocalSystem {
        matrix: builder.build(),
        load,
        n_boundary: nb,
        boundary_block,
        subdomain: sub.subdomain(),
    })
}

impl LocalSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full operator (sparse part plus dense boundary block) applied to `u`.
    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        let mut out = self.matrix.mul_vec(u);
        if let Some(d) = &self.boundary_block {
            let ub = DVector::from_column_slice(&u[..self.n_boundary]);
            let db = d * ub;
            for (o, v) in out.iter_mut().zip(db.iter()) {
                *o += v;
            }
        }
        out
    }

    pub fn factor(&self, exec: Exec) -> Result<LocalFactor> {
        let tag = |e: Error| match self.subdomain {
            Some(j) => e.in_subdomain(j),
            None => e,
        };
        let bordered = BorderedFactor::new(&self.matrix, self.n_boundary, exec).map_err(tag)?;
        let lu = if self.n_boundary > 0 {
            let mut z = bordered.schur().clone();
            if let Some(d) = &self.boundary_block {
                z += d;
            }
            Some(ComplexLu::new(z).map_err(tag)?)
        } else {
            None
        };
        Ok(LocalFactor { bordered, lu })
    }
}

/// Factorized [`LocalSystem`]; immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct LocalFactor {
    bordered: BorderedFactor<C64>,
    lu: Option<ComplexLu>,
}

impl LocalFactor {
    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let (g, y) = self.bordered.condense(rhs);
        let ub = match &self.lu {
            Some(lu) => lu.solve(&DVector::from_vec(g)).as_slice().to_vec(),
            None => Vec::new(),
        };
        self.bordered.expand(&ub, &y)
    }

    pub fn bordered(&self) -> &BorderedFactor<C64> {
        &self.bordered
    }

    /// Factor of the condensed boundary operator (Schur complement plus the
    /// dense boundary block); `None` when there are no boundary unknowns.
    pub fn boundary_lu(&self) -> Option<&ComplexLu> {
        self.lu.as_ref()
    }
}

/// Boundary rows of `A u - F` for the sparse part of `system`: the weak
/// (dual-basis) representation of `μ∂ₙu` on the skeleton boundary.
pub fn discrete_neumann_trace(system: &LocalSystem, u: &[C64]) -> Result<Vec<C64>> {
    if u.len() != system.dim() {
        return Err(Error::ShapeMismatch {
            expected: system.dim(),
            found: u.len(),
        });
    }
    let au = system.matrix.mul_vec(u);
    Ok((0..system.n_boundary).map(|i| au[i] - system.load[i]).collect())
}

fn interpolate(pts: &[Point; 3], l: &[f64; 3]) -> Point {
    [
        l[0] * pts[0][0] + l[1] * pts[1][0] + l[2] * pts[2][0],
        l[0] * pts[0][1] + l[1] * pts[1][1] + l[2] * pts[2][1],
    ]
}

/// `‖u_h - u‖_{L²}` over the subdomain for nodal values `u` in local numbering.
pub fn l2_error(mesh: &Mesh, sub: &SubdomainMesh, u: &[C64], exact: impl Fn(Point) -> C64) -> f64 {
    let mut sum = 0.0;
    for (&t, tri) in sub.triangles().iter().zip(sub.local_triangles()) {
        let pts = mesh.triangle_points(t);
        let area = mesh.triangle_area(t);
        for (l, w) in TRIANGLE_7.iter() {
            let uh = u[tri[0]] * l[0] + u[tri[1]] * l[1] + u[tri[2]] * l[2];
            sum += w * area * (uh - exact(interpolate(&pts, l))).norm_sqr();
        }
    }
    sum.sqrt()
}

/// `‖u - v‖_{L²}` between two P1 fields on the same local numbering.
pub fn l2_distance(mesh: &Mesh, sub: &SubdomainMesh, u: &[C64], v: &[C64]) -> f64 {
    let m = assemble_mass(mesh, sub);
    let d: Vec<C64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let md = m.mul_complex(&d);
    d.iter().zip(&md).map(|(a, b)| (a.conj() * b).re).sum::<f64>().max(0.0).sqrt()
}
