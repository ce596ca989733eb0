use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of an undirected graph given by adjacency
/// lists. Returns `perm` with `perm[new] = old`. Each connected component is
/// started from a pseudo-peripheral vertex; ties break by vertex index.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    for start in 0..n {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(adj, &degree, start);
        let mut queue = VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
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

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    let mut depth = 0;
    let mut members = Vec::new();
    while let Some(v) = queue.pop_front() {
        members.push(v);
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = members.into_iter().filter(|&v| level[v] == depth).collect();
    (last, depth)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], start: usize) -> usize {
    let mut root = start;
    let (mut last, mut depth) = bfs_levels(adj, root);
    loop {
        let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (l2, d2) = bfs_levels(adj, cand);
        if d2 <= depth {
            return root;
        }
        root = cand;
        last = l2;
        depth = d2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_keeps_unit_bandwidth() {
        // scrambled path 3-0-4-1-2
        let mut adj = vec![Vec::new(); 5];
        for (a, b) in [(3, 0), (0, 4), (4, 1), (1, 2)] {
            adj[a].push(b);
            adj[b].push(a);
        }
        let perm = reverse_cuthill_mckee(&adj);
        let mut inv = vec![0; 5];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        for (a, nbrs) in adj.iter().enumerate() {
            for &b in nbrs {
                assert!(inv[a].abs_diff(inv[b]) <= 1);
            }
        }
    }

    #[test]
    fn handles_disconnected_graphs() {
        let adj = vec![vec![1], vec![0], vec![], vec![]];
        let mut perm = reverse_cuthill_mckee(&adj);
        perm.sort_unstable();
        assert_eq!(perm, vec![0, 1, 2, 3]);
    }
}
