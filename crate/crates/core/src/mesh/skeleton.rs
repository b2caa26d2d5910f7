use std::collections::{BTreeMap, HashMap};

use super::{edge_key, Mesh};
use crate::error::{Error, Result};

/// Interface part of one subdomain boundary. Edges on the artificial
/// truncation boundary are excluded, so the polyline may be an open chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdomainBoundary {
    /// Global vertex ids in traversal order (subdomain on the left).
    pub vertices: Vec<usize>,
    /// Edges as position pairs into `vertices`, oriented with the subdomain on the left.
    pub edges: Vec<[usize; 2]>,
    /// True when every component of the polyline is a closed loop.
    pub closed: bool,
}

impl SubdomainBoundary {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    boundaries: Vec<SubdomainBoundary>,
    /// Sorted global ids of all skeleton vertices.
    vertices: Vec<usize>,
    /// `to_skeleton[j][pos]` = skeleton index of the vertex at `pos` in ∂Ωj.
    to_skeleton: Vec<Vec<usize>>,
    /// `positions[s]` = list of (subdomain, position) pairs for skeleton vertex `s`.
    positions: Vec<Vec<(usize, usize)>>,
    cross_points: Vec<usize>,
}

impl Skeleton {
    pub fn n_subdomains(&self) -> usize {
        self.boundaries.len()
    }

    pub fn boundary(&self, j: usize) -> &SubdomainBoundary {
        &self.boundaries[j]
    }

    pub fn boundaries(&self) -> &[SubdomainBoundary] {
        &self.boundaries
    }

    pub fn boundary_sizes(&self) -> Vec<usize> {
        self.boundaries.iter().map(SubdomainBoundary::len).collect()
    }

    /// Total number of multi-trace degrees of freedom, Σ_j |∂Ωj|.
    pub fn total_dofs(&self) -> usize {
        self.boundaries.iter().map(SubdomainBoundary::len).sum()
    }

    /// Global ids of the skeleton vertices Γ.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_skeleton(&self, j: usize) -> &[usize] {
        &self.to_skeleton[j]
    }

    /// Position of skeleton vertex `s` in the ∂Ωj list, if it lies on ∂Ωj.
    pub fn position(&self, j: usize, s: usize) -> Option<usize> {
        self.positions[s].iter().find(|(k, _)| *k == j).map(|&(_, p)| p)
    }

    pub fn occurrences(&self, s: usize) -> &[(usize, usize)] {
        &self.positions[s]
    }

    /// Number of subdomain boundaries containing skeleton vertex `s`.
    pub fn multiplicity(&self, s: usize) -> usize {
        self.positions[s].len()
    }

    /// Skeleton indices of vertices shared by three or more subdomain boundaries.
    pub fn cross_points(&self) -> &[usize] {
        &self.cross_points
    }

    pub fn skeleton_index(&self, global_vertex: usize) -> Option<usize> {
        self.vertices.binary_search(&global_vertex).ok()
    }

    /// Copy of the skeleton with one restriction entry redirected to another
    /// skeleton vertex. Only meant for fault-injection checks.
    pub fn with_corrupted_entry(&self, j: usize, pos: usize, target: usize) -> Self {
        let mut out = self.clone();
        let old = out.to_skeleton[j][pos];
        out.to_skeleton[j][pos] = target;
        out.positions[old].retain(|&(k, p)| !(k == j && p == pos));
        out.positions[target].push((j, pos));
        out
    }
}

/// Triangle owning a directed edge.
type EdgeOwner = (usize, [usize; 2]);

/// Collect each subdomain's interface boundary and build the restriction maps.
pub fn extract_skeleton(mesh: &Mesh) -> Result<Skeleton> {
    let mut owners: HashMap<(usize, usize), Vec<EdgeOwner>> = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            let e = [tri[k], tri[(k + 1) % 3]];
            owners.entry(edge_key(e[0], e[1])).or_default().push((t, e));
        }
    }
    let tags = mesh.tags();
    let mut directed: Vec<Vec<[usize; 2]>> = vec![Vec::new(); mesh.n_subdomains()];
    for list in owners.values() {
        if let [(t0, e0), (t1, e1)] = list.as_slice() {
            if tags[*t0] != tags[*t1] {
                directed[tags[*t0]].push(*e0);
                directed[tags[*t1]].push(*e1);
            }
        }
    }

    let boundaries = directed
        .into_iter()
        .enumerate()
        .map(|(j, edges)| chain_edges(j, edges))
        .collect::<Result<Vec<_>>>()?;

    let mut vertices: Vec<usize> = boundaries.iter().flat_map(|b| b.vertices.iter().copied()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let mut positions = vec![Vec::new(); vertices.len()];
    let to_skeleton: Vec<Vec<usize>> = boundaries
        .iter()
        .enumerate()
        .map(|(j, b)| {
            b.vertices
                .iter()
                .enumerate()
                .map(|(pos, v)| {
                    let s = vertices.binary_search(v).expect("vertex collected above");
                    positions[s].push((j, pos));
                    s
                })
                .collect()
        })
        .collect();
    let cross_points = (0..vertices.len()).filter(|&s| positions[s].len() >= 3).collect();
    Ok(Skeleton {
        boundaries,
        vertices,
        to_skeleton,
        positions,
        cross_points,
    })
}

fn chain_edges(j: usize, edges: Vec<[usize; 2]>) -> Result<SubdomainBoundary> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    let mut has_incoming: BTreeMap<usize, bool> = BTreeMap::new();
    for &[a, b] in &edges {
        if next.insert(a, b).is_some() {
            return Err(Error::NonManifold { subdomain: j, vertex: a });
        }
        if has_incoming.insert(b, true) == Some(true) {
            return Err(Error::NonManifold { subdomain: j, vertex: b });
        }
        has_incoming.entry(a).or_insert(false);
    }

    let mut position: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut chained = Vec::with_capacity(edges.len());
    let mut closed = true;
    // open chains first (they start where nothing comes in), then loops
    let starts: Vec<usize> = has_incoming
        .iter()
        .filter(|(_, &inc)| !inc)
        .map(|(&v, _)| v)
        .chain(has_incoming.keys().copied())
        .collect();
    for start in starts {
        if position.contains_key(&start) {
            continue;
        }
        if !has_incoming[&start] {
            closed = false;
        }
        let mut v = start;
        position.insert(v, vertices.len());
        vertices.push(v);
        while let Some(&w) = next.get(&v) {
            let pw = match position.get(&w) {
                Some(&p) => p,
                None => {
                    position.insert(w, vertices.len());
                    vertices.push(w);
                    vertices.len() - 1
                }
            };
            chained.push([position[&v], pw]);
            if w == start {
                break;
            }
            v = w;
        }
    }
    Ok(SubdomainBoundary {
        vertices,
        edges: chained,
        closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_partitioned_disk, generate_split_square, Mesh};

    fn consistency(sk: &Skeleton) {
        let lists: usize = sk.boundaries().iter().map(SubdomainBoundary::len).sum();
        let mult: usize = (0..sk.n_vertices()).map(|s| sk.multiplicity(s)).sum();
        assert_eq!(lists, mult);
        for j in 0..sk.n_subdomains() {
            for (pos, &s) in sk.to_skeleton(j).iter().enumerate() {
                assert_eq!(sk.position(j, s), Some(pos));
            }
            let mut seen = sk.to_skeleton(j).to_vec();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), sk.to_skeleton(j).len(), "restriction not injective");
        }
    }

    #[test]
    fn three_sector_center_is_cross_point() {
        let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.2).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        consistency(&sk);
        let center = sk.skeleton_index(0).unwrap();
        assert!(sk.cross_points().contains(&center));
        assert_eq!(sk.multiplicity(center), 3);
        // the three ray endpoints on the circle touch the annulus as well
        assert_eq!(sk.cross_points().len(), 4);
        assert!(sk.boundaries().iter().all(|b| b.closed));
    }

    #[test]
    fn two_sector_center_is_not_cross_point() {
        let mesh = generate_partitioned_disk(2, 1.0, 1.5, 0.2).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        consistency(&sk);
        let center = sk.skeleton_index(0).unwrap();
        assert_eq!(sk.multiplicity(center), 2);
        assert_eq!(sk.cross_points().len(), 2);
        for &s in sk.cross_points() {
            let v = mesh.vertices()[sk.vertices()[s]];
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_built_square() {
        // unit square cut along x = 0.5, two triangles per half
        let vertices = vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 1.0], [1.0, 1.0]];
        let triangles = vec![[0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4]];
        let mesh = Mesh::new(vertices, triangles, vec![0, 0, 1, 1]).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        consistency(&sk);
        assert_eq!(sk.vertices(), &[1, 4]);
        assert_eq!(sk.boundary(0).vertices, vec![1, 4]);
        assert_eq!(sk.boundary(1).vertices, vec![4, 1]);
        assert!(!sk.boundary(0).closed);
        assert!(sk.cross_points().is_empty());
        assert_eq!(mesh.outer_edges().len(), 6);
    }

    #[test]
    fn split_square_interface() {
        let mesh = generate_split_square(1.0, 8).unwrap();
        let sk = extract_skeleton(&mesh).unwrap();
        consistency(&sk);
        assert_eq!(sk.n_vertices(), 9);
        assert!((0..9).all(|s| sk.multiplicity(s) == 2));
        assert_eq!(sk.boundary(0).edges.len(), 8);
    }

    #[test]
    fn pinched_subdomain_is_non_manifold() {
        // subdomain 1 = two triangles touching only at vertex 4, inside a square of subdomain 0
        let vertices = vec![
            [0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0],
            [1.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0],
        ];
        let triangles = vec![
            [0, 5, 4], [5, 1, 6], [5, 6, 4], [6, 2, 4],
            [4, 2, 7], [7, 3, 8], [7, 8, 4], [4, 8, 0],
        ];
        let mesh = Mesh::new(vertices, triangles, vec![1, 0, 0, 0, 1, 0, 0, 0]).unwrap();
        assert!(matches!(
            extract_skeleton(&mesh),
            Err(Error::NonManifold { subdomain: _, vertex: 4 })
        ));
    }

    #[test]
    fn annulus_only_exterior_has_two_lists() {
        let mesh = generate_partitioned_disk(3, 1.0, 1.5, 0.25).unwrap();
        let tags: Vec<usize> = mesh.tags().iter().map(|&t| usize::from(t > 0)).collect();
        let merged = mesh.retagged(tags).unwrap();
        let sk = extract_skeleton(&merged).unwrap();
        assert!(sk.cross_points().is_empty());
        assert!((0..sk.n_vertices()).all(|s| sk.multiplicity(s) == 2));
    }
}
