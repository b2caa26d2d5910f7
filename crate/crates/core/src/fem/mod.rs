//! P1 finite elements on subdomain meshes: Yukawa and Helmholtz assembly,
//! boundary mass matrices, static condensation onto boundary nodes, and
//! weak Neumann traces.

mod assembly;
mod coefficients;
mod elimination;
pub mod quadrature;

pub use assembly::{
    assemble_helmholtz, assemble_mass, assemble_yukawa, boundary_mass, discrete_neumann_trace, l2_distance,
    l2_error, outer_mass, segment_mass, LocalFactor, LocalSystem,
};
pub use coefficients::{CoefficientField, ComplexFn, EdgeFn, RealFn};
pub use elimination::BorderedFactor;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Skeleton};

/// Local numbering of the triangles of one subdomain (or of the whole mesh).
///
/// Local nodes are ordered: skeleton boundary nodes first, in the order of
/// the subdomain's boundary list; then nodes that lie only on the truncation
/// boundary; then the remaining interior nodes.
#[derive(Clone, Debug)]
pub struct SubdomainMesh {
    subdomain: Option<usize>,
    nodes: Vec<usize>,
    local: Vec<Option<usize>>,
    triangles: Vec<usize>,
    local_triangles: Vec<[usize; 3]>,
    outer_edges: Vec<([usize; 2], usize)>,
    n_boundary: usize,
    n_outer_only: usize,
}

impl SubdomainMesh {
    pub fn new(mesh: &Mesh, skeleton: &Skeleton, j: usize) -> Result<Self> {
        if j >= mesh.n_subdomains() {
            return Err(Error::EmptySubdomain(j));
        }
        let triangles: Vec<usize> = mesh.subdomain_triangles(j).collect();
        if triangles.is_empty() {
            return Err(Error::EmptySubdomain(j));
        }
        let mut local = vec![None; mesh.n_vertices()];
        let mut nodes = Vec::new();
        let mut add = |v: usize, nodes: &mut Vec<usize>| {
            if local[v].is_none() {
                local[v] = Some(nodes.len());
                nodes.push(v);
            }
        };
        for &v in &skeleton.boundary(j).vertices {
            add(v, &mut nodes);
        }
        let n_boundary = nodes.len();
        let outer: Vec<_> = mesh
            .outer_edges()
            .iter()
            .filter(|e| mesh.tags()[e.triangle] == j)
            .copied()
            .collect();
        let mut outer_nodes: Vec<usize> = outer.iter().flat_map(|e| e.vertices).collect();
        outer_nodes.sort_unstable();
        for v in outer_nodes {
            add(v, &mut nodes);
        }
        let n_outer_only = nodes.len() - n_boundary;
        let mut rest: Vec<usize> = triangles.iter().flat_map(|&t| mesh.triangles()[t]).collect();
        rest.sort_unstable();
        for v in rest {
            add(v, &mut nodes);
        }
        Ok(Self::finish(mesh, Some(j), nodes, local, triangles, outer, n_boundary, n_outer_only))
    }

    /// The whole mesh with the identity numbering and no condensed boundary.
    pub fn whole(mesh: &Mesh) -> Self {
        let nodes: Vec<usize> = (0..mesh.n_vertices()).collect();
        let local = nodes.iter().map(|&v| Some(v)).collect();
        let triangles = (0..mesh.n_triangles()).collect();
        Self::finish(mesh, None, nodes, local, triangles, mesh.outer_edges().to_vec(), 0, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        mesh: &Mesh,
        subdomain: Option<usize>,
        nodes: Vec<usize>,
        local: Vec<Option<usize>>,
        triangles: Vec<usize>,
        outer: Vec<crate::mesh::OuterEdge>,
        n_boundary: usize,
        n_outer_only: usize,
    ) -> Self {
        let map = |v: usize| local[v].expect("node registered");
        let local_triangles = triangles
            .iter()
            .map(|&t| mesh.triangles()[t].map(map))
            .collect();
        let outer_edges = outer.iter().map(|e| (e.vertices.map(map), e.triangle)).collect();
        Self {
            subdomain,
            nodes,
            local,
            triangles,
            local_triangles,
            outer_edges,
            n_boundary,
            n_outer_only,
        }
    }

    pub fn subdomain(&self) -> Option<usize> {
        self.subdomain
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of skeleton boundary nodes (the leading local indices).
    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    /// Nodes on the truncation boundary that are not skeleton nodes; they
    /// follow the boundary block in the local numbering.
    pub fn n_outer_only(&self) -> usize {
        self.n_outer_only
    }

    /// Local to global vertex ids.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.local.get(global).copied().flatten()
    }

    /// Global triangle ids.
    pub fn triangles(&self) -> &[usize] {
        &self.triangles
    }

    pub fn local_triangles(&self) -> &[[usize; 3]] {
        &self.local_triangles
    }

    /// Truncation-boundary edges (local ids, counter-clockwise) with their
    /// global triangle id.
    pub fn outer_edges(&self) -> &[([usize; 2], usize)] {
        &self.outer_edges
    }

    pub fn point(&self, mesh: &Mesh, local: usize) -> Point {
        mesh.vertices()[self.nodes[local]]
    }
}

/// Barycentric gradients and area of a positively oriented triangle.
pub(crate) fn p1_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = crate::mesh::signed_area(p[0], p[1], p[2]);
    let inv = 0.5 / area;
    let grads = std::array::from_fn(|i| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv]
    });
    (grads, area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_skeleton, generate_partitioned_disk};

    #[test]
    fn local_numbering_puts_boundary_first() {
        let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.25).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        for j in 0..4 {
            let sub = SubdomainMesh::new(&mesh, &sk, j).unwrap();
            assert_eq!(&sub.nodes()[..sub.n_boundary()], sk.boundary(j).vertices.as_slice());
            for (l, &g) in sub.nodes().iter().enumerate() {
                assert_eq!(sub.local_index(g), Some(l));
            }
            assert_eq!(sub.n_outer_only() > 0, j == 0);
        }
        let whole = SubdomainMesh::whole(&mesh);
        assert_eq!(whole.n_nodes(), mesh.n_vertices());
        assert_eq!(whole.outer_edges().len(), mesh.outer_edges().len());
    }

    #[test]
    fn gradients_sum_to_zero() {
        let (g, a) = p1_gradients([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]);
        assert!((a - 1.0).abs() < 1e-15);
        assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-15);
        assert_eq!(g[1], [0.5, 0.0]);
        assert_eq!(g[2], [0.0, 1.0]);
    }
}
