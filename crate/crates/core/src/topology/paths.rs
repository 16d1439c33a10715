use std::collections::VecDeque;

use super::{Digraph, NodeId};

/// Directed BFS hop count from `u` to `v`; `None` when unreachable.
pub fn shortest_path_hops(h: &Digraph, u: NodeId, v: NodeId) -> Option<usize> {
    shortest_path_hops_within(h, u, v, |_| true)
}

/// BFS hop count from `u` to `v` where every intermediate node must satisfy
/// `relay_ok`. The endpoints are not checked.
pub fn shortest_path_hops_within<F>(h: &Digraph, u: NodeId, v: NodeId, relay_ok: F) -> Option<usize>
where
    F: Fn(NodeId) -> bool,
{
    if u == v {
        return Some(0);
    }
    let mut dist = vec![usize::MAX; h.node_count()];
    let mut queue = VecDeque::new();
    dist[u.index()] = 0;
    queue.push_back(u);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x.index()];
        for &y in h.out_neighbors(x) {
            if dist[y.index()] != usize::MAX {
                continue;
            }
            dist[y.index()] = dx + 1;
            if y == v {
                return Some(dx + 1);
            }
            if relay_ok(y) {
                queue.push_back(y);
            }
        }
    }
    None
}
