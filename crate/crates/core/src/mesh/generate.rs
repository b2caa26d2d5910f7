use std::f64::consts::PI;

use super::{signed_area, Mesh, Point};
use crate::error::{Error, Result};

/// Disk of radius `r_skeleton` cut into `n_sectors` pie slices (tags
/// `1..=n_sectors`) meeting at the centre, surrounded by the annulus
/// `r_skeleton..r_outer` (tag 0) whose outer circle is the truncation boundary.
///
/// Vertices sit on concentric rings spaced about `h` apart; every ring carries
/// the ray points, so all interfaces are conforming.
pub fn generate_partitioned_disk(n_sectors: usize, r_skeleton: f64, r_outer: f64, h: f64) -> Result<Mesh> {
    if n_sectors < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 sectors, got {n_sectors}")));
    }
    if !(r_skeleton > 0.0 && r_outer > r_skeleton) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r_skeleton < r_outer, got {r_skeleton} and {r_outer}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("mesh size must be positive, got {h}")));
    }
    let n_inner = (r_skeleton / h).round() as usize;
    if n_inner < 2 {
        return Err(Error::InvalidParameter(format!(
            "mesh size {h} leaves fewer than 3 vertices on each interface ray"
        )));
    }
    let n_outer = (((r_outer - r_skeleton) / h).round() as usize).max(1);

    let mut radii: Vec<f64> = (0..=n_inner).map(|k| r_skeleton * k as f64 / n_inner as f64).collect();
    radii.extend((1..=n_outer).map(|k| r_skeleton + (r_outer - r_skeleton) * k as f64 / n_outer as f64));
    *radii.last_mut().expect("at least one ring") = r_outer;
    radii[n_inner] = r_skeleton;

    let sector_angle = 2.0 * PI / n_sectors as f64;
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    // rings[k][s] = vertex ids of sector s's arc on ring k, endpoints included
    let mut rings: Vec<Vec<Vec<usize>>> = vec![vec![vec![0]; n_sectors]];
    for &r in &radii[1..] {
        let per_sector = ((sector_angle * r / h).ceil() as usize).max(2);
        let total = per_sector * n_sectors;
        let base = vertices.len();
        for i in 0..total {
            let theta = 2.0 * PI * i as f64 / total as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
        let arcs = (0..n_sectors)
            .map(|s| {
                (0..=per_sector)
                    .map(|i| base + (s * per_sector + i) % total)
                    .collect()
            })
            .collect();
        rings.push(arcs);
    }

    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    for k in 0..radii.len() - 1 {
        for (s, (inner, outer)) in rings[k].iter().zip(&rings[k + 1]).enumerate() {
            let tag = if k < n_inner { s + 1 } else { 0 };
            zip_arcs(&vertices, inner, outer, |tri| {
                triangles.push(tri);
                tags.push(tag);
            });
        }
    }
    Mesh::new(vertices, triangles, tags)
}

// Triangulate the strip between two arcs spanning the same angular sector,
// always advancing along the arc whose next point comes first.
fn zip_arcs(
    vertices: &[Point],
    lower: &[usize],
    upper: &[usize],
    mut emit: impl FnMut([usize; 3]),
) {
    let frac = |arc: &[usize], i: usize| {
        if arc.len() == 1 {
            0.0
        } else {
            i as f64 / (arc.len() - 1) as f64
        }
    };
    let (p, q) = (lower.len() - 1, upper.len() - 1);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let advance_lower = i < p && (j == q || frac(lower, i + 1) <= frac(upper, j + 1));
        let mut tri = if advance_lower {
            i += 1;
            [lower[i - 1], lower[i], upper[j]]
        } else {
            j += 1;
            [lower[i], upper[j], upper[j - 1]]
        };
        if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
        emit(tri);
    }
}

/// Square `[-a, a]²` on an `n_cells × n_cells` grid, split along `x = 0` into
/// subdomain 0 (left) and 1 (right). The whole square boundary is the
/// truncation boundary, so the interface has no cross point.
pub fn generate_split_square(half_width: f64, n_cells: usize) -> Result<Mesh> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!("half width must be positive, got {half_width}")));
    }
    if n_cells < 2 || !n_cells.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("cell count must be even and >= 2, got {n_cells}")));
    }
    let n = n_cells;
    let step = 2.0 * half_width / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let vertices: Vec<Point> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [-half_width + i as f64 * step, -half_width + j as f64 * step]))
        .collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut tags = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let tag = usize::from(2 * i >= n);
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            // alternate diagonals so the mesh has no preferred direction
            if (i + j) % 2 == 0 {
                triangles.extend([[a, b, c], [a, c, d]]);
            } else {
                triangles.extend([[a, b, d], [b, c, d]]);
            }
            tags.extend([tag, tag]);
        }
    }
    Mesh::new(vertices, triangles, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_is_inscribed_polygon_area() {
        let (r_s, r_o, h) = (1.0, 2.0, 0.1);
        let mesh = generate_partitioned_disk(3, r_s, r_o, h).unwrap();
        let outer_vertices = mesh.outer_edges().len();
        let m = outer_vertices as f64;
        let polygon = 0.5 * m * r_o * r_o * (2.0 * PI / m).sin();
        assert!((mesh.total_area() - polygon).abs() < 1e-12 * polygon);
        // O(h²) geometric error against the true disk
        assert!((mesh.total_area() - PI * r_o * r_o).abs() < 2.0 * h * h * r_o);
        let per_subdomain: f64 = (0..mesh.n_subdomains()).map(|j| mesh.subdomain_area(j)).sum();
        assert!((per_subdomain - mesh.total_area()).abs() < 1e-12);
    }

    #[test]
    fn disk_tags_and_sizes() {
        let mesh = generate_partitioned_disk(4, 1.0, 1.5, 0.2).unwrap();
        assert_eq!(mesh.n_subdomains(), 5);
        assert!(mesh.max_edge_length() < 2.0 * 0.2);
        for &v in mesh.vertices() {
            assert!(v[0].hypot(v[1]) <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn degenerate_h_rejected() {
        assert!(generate_partitioned_disk(3, 1.0, 2.0, 0.8).is_err());
        assert!(generate_partitioned_disk(1, 1.0, 2.0, 0.1).is_err());
        assert!(generate_partitioned_disk(3, 1.0, 0.5, 0.1).is_err());
        assert!(generate_split_square(1.0, 3).is_err());
    }

    #[test]
    fn square_split() {
        let mesh = generate_split_square(1.0, 8).unwrap();
        assert_eq!(mesh.n_triangles(), 128);
        assert!((mesh.subdomain_area(0) - 2.0).abs() < 1e-14);
        assert!((mesh.subdomain_area(1) - 2.0).abs() < 1e-14);
        assert_eq!(mesh.outer_edges().len(), 32);
    }
}
