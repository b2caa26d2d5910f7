//! Conforming P1 triangulations partitioned into subdomains, and the skeleton
//! (union of subdomain boundaries) with its restriction index maps.

mod generate;
mod io;
mod skeleton;

use std::collections::HashMap;

pub use generate::{generate_partitioned_disk, generate_split_square};
pub use io::{load_mesh, read_mesh, save_mesh, write_mesh};
pub use skeleton::{extract_skeleton, Skeleton, SubdomainBoundary};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Mesh edge lying on the artificial truncation boundary, oriented
/// counter-clockwise with respect to its triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OuterEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
}

/// Validated conforming triangulation. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<usize>,
    n_subdomains: usize,
    outer_edges: Vec<OuterEdge>,
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    /// Validate connectivity and build the mesh. Every topological boundary
    /// edge is treated as part of the artificial truncation boundary.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, tags: Vec<usize>) -> Result<Self> {
        if tags.len() != triangles.len() {
            return Err(Error::ShapeMismatch {
                expected: triangles.len(),
                found: tags.len(),
            });
        }
        if triangles.is_empty() {
            return Err(Error::InvalidParameter("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::Topology {
                    element: t,
                    message: format!("references missing vertex {v}"),
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology {
                    element: t,
                    message: "repeated vertex".into(),
                });
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::Topology {
                    element: t,
                    message: format!("inverted or degenerate (signed area {area:e})"),
                });
            }
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!("vertex {v} belongs to no triangle")));
        }

        // edge key -> (triangle, directed edge) for every triangle using it
        let mut edges: HashMap<(usize, usize), Vec<(usize, [usize; 2])>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.entry(edge_key(a, b)).or_default().push((t, [a, b]));
            }
        }
        let mut outer_edges = Vec::new();
        for list in edges.values() {
            match list.as_slice() {
                [(t, e)] => outer_edges.push(OuterEdge {
                    vertices: *e,
                    triangle: *t,
                }),
                [(_, e0), (t1, e1)] => {
                    if e0 != &[e1[1], e1[0]] {
                        return Err(Error::Topology {
                            element: *t1,
                            message: "overlaps its neighbour across a shared edge".into(),
                        });
                    }
                }
                more => {
                    let t = more.iter().map(|(t, _)| *t).max().unwrap_or(0);
                    return Err(Error::Topology {
                        element: t,
                        message: format!("edge shared by {} triangles", more.len()),
                    });
                }
            }
        }
        outer_edges.sort_by_key(|e| (e.triangle, e.vertices));

        let n_subdomains = tags.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![0usize; n_subdomains];
        for &tag in &tags {
            counts[tag] += 1;
        }
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptySubdomain(j));
        }

        Ok(Self {
            vertices,
            triangles,
            tags,
            n_subdomains,
            outer_edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Number of subdomains `J + 1` (tags `0..=J`).
    pub fn n_subdomains(&self) -> usize {
        self.n_subdomains
    }

    pub fn outer_edges(&self) -> &[OuterEdge] {
        &self.outer_edges
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn barycenter(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn subdomain_triangles(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.tags
            .iter()
            .enumerate()
            .filter(move |(_, &tag)| tag == j)
            .map(|(t, _)| t)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn subdomain_area(&self, j: usize) -> f64 {
        self.subdomain_triangles(j).map(|t| self.triangle_area(t)).sum()
    }

    /// Longest edge length, the mesh size `h`.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |k| (tri[k], tri[(k + 1) % 3])))
            .map(|(a, b)| distance(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Copy of the mesh with new subdomain tags.
    pub fn retagged(&self, tags: Vec<usize>) -> Result<Self> {
        Self::new(self.vertices.clone(), self.triangles.clone(), tags)
    }
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
