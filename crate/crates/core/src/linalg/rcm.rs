use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of a symmetric sparsity graph.
///
/// Returns `perm` with `perm[new] = old`. Disconnected components are ordered
/// one after another, each rooted at a pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("unvisited vertex remains");
        let root = pseudo_peripheral(adjacency, &degree, &visited, seed);

        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

// George–Liu: repeat BFS from the lowest-degree vertex of the deepest level
// while the eccentricity grows.
fn pseudo_peripheral(adjacency: &[Vec<usize>], degree: &[usize], blocked: &[bool], seed: usize) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let (levels, last) = bfs_levels(adjacency, blocked, root);
        let candidate = last
            .into_iter()
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        if levels <= depth {
            break;
        }
        depth = levels;
        root = candidate;
    }
    root
}

fn bfs_levels(adjacency: &[Vec<usize>], blocked: &[bool], root: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; adjacency.len()];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adjacency[v] {
                if !blocked[w] && level[w] == usize::MAX {
                    level[w] = depth + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}
