//! Graph model shared by every stage: node identities, roles, and the
//! directed graph used both as the P2P graph and as the anonymity graph.

mod generators;
pub mod io;
mod paths;

use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

pub use generators::{
    apply_supernode_edges, build_anonymity_graph, embed_partial_deployment,
    gen_anonymity_approx4, gen_exact_d_regular, gen_line_cycle, gen_p2p_approx_regular,
    DeploymentMode,
};
pub use paths::{shortest_path_hops, shortest_path_hops_within};

/// Dense 0-based node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    #[inline]
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Role {
    #[default]
    Honest,
    Spy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeProfile {
    pub role: Role,
    pub supports_protocol: bool,
}

impl Default for NodeProfile {
    fn default() -> Self {
        NodeProfile { role: Role::Honest, supports_protocol: true }
    }
}

impl NodeProfile {
    pub fn honest(supports_protocol: bool) -> Self {
        NodeProfile { role: Role::Honest, supports_protocol }
    }

    pub fn spy() -> Self {
        NodeProfile { role: Role::Spy, supports_protocol: true }
    }

    #[inline]
    pub fn is_spy(&self) -> bool {
        self.role == Role::Spy
    }
}

/// Graph families the harness can build for the anonymity overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// Every node picks `eta` distinct uniform out-neighbors.
    ApproxRegular { eta: usize },
    /// Superposition of `d/2` uniform Hamiltonian cycles.
    ExactRegular { d: usize },
    /// A single directed Hamiltonian cycle.
    LineCycle,
    /// Two distinct uniform out-neighbors per node.
    Approx4Regular,
}

impl TopologyKind {
    pub fn label(&self) -> String {
        match self {
            TopologyKind::ApproxRegular { eta } => format!("approx-regular-{eta}"),
            TopologyKind::ExactRegular { d } => format!("exact-{d}-regular"),
            TopologyKind::LineCycle => "line".to_string(),
            TopologyKind::Approx4Regular => "approx-4-regular".to_string(),
        }
    }

    /// Parses `line`, `approx4`, `approx-4-regular`, `exact` (needs `d`),
    /// `exact-<d>-regular`, `approx-regular` (needs `eta`).
    pub fn parse(s: &str, d: usize, eta: usize) -> Result<Self> {
        let kind = match s {
            "line" | "line-cycle" => TopologyKind::LineCycle,
            "approx4" | "approx-4-regular" => TopologyKind::Approx4Regular,
            "exact" | "exact-regular" => TopologyKind::ExactRegular { d },
            "approx-regular" | "p2p" => TopologyKind::ApproxRegular { eta },
            other => {
                let parsed = other
                    .strip_prefix("exact-")
                    .and_then(|r| r.strip_suffix("-regular"))
                    .and_then(|x| x.parse::<usize>().ok());
                match parsed {
                    Some(d) => TopologyKind::ExactRegular { d },
                    None => return Err(Error::Config(format!("unknown topology `{other}`"))),
                }
            }
        };
        if let TopologyKind::ExactRegular { d } = kind {
            if d < 2 || d % 2 != 0 {
                return Err(Error::invalid(format!("exact-regular degree must be even and >= 2, got {d}")));
            }
        }
        Ok(kind)
    }
}

/// Directed graph with per-node roles. Adjacency is immutable after
/// construction; in-adjacency is kept consistent with out-adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    profiles: Vec<NodeProfile>,
}

impl Digraph {
    /// Builds a graph, rejecting self-loops, duplicate targets and
    /// out-of-range endpoints.
    pub fn new(out_adj: Vec<Vec<NodeId>>, profiles: Vec<NodeProfile>) -> Result<Self> {
        let n = out_adj.len();
        if profiles.len() != n {
            return Err(Error::invalid(format!(
                "profile count {} does not match node count {n}",
                profiles.len()
            )));
        }
        let mut seen = vec![usize::MAX; n];
        for (src, targets) in out_adj.iter().enumerate() {
            for &t in targets {
                let ti = t.index();
                if ti >= n {
                    return Err(Error::invalid(format!("edge {src}->{t} leaves [0, {n})")));
                }
                if ti == src {
                    return Err(Error::invalid(format!("self-loop at {src}")));
                }
                if seen[ti] == src {
                    return Err(Error::invalid(format!("duplicate edge {src}->{t}")));
                }
                seen[ti] = src;
            }
        }
        Ok(Self::from_parts_unchecked(out_adj, profiles))
    }

    pub(crate) fn from_parts_unchecked(out_adj: Vec<Vec<NodeId>>, profiles: Vec<NodeProfile>) -> Self {
        let n = out_adj.len();
        let mut in_adj = vec![Vec::new(); n];
        for (src, targets) in out_adj.iter().enumerate() {
            for &t in targets {
                in_adj[t.index()].push(NodeId::from(src));
            }
        }
        Digraph { out_adj, in_adj, profiles }
    }

    /// `n` isolated honest, protocol-supporting nodes.
    pub fn empty(n: usize) -> Self {
        Self::from_parts_unchecked(vec![Vec::new(); n], vec![NodeProfile::default(); n])
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    /// In-neighbors in ascending index order.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    #[inline]
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v.index()].len()
    }

    #[inline]
    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u.index()].contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |&t| (NodeId::from(s), t)))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId::from)
    }

    #[inline]
    pub fn profile(&self, v: NodeId) -> NodeProfile {
        self.profiles[v.index()]
    }

    pub fn profiles(&self) -> &[NodeProfile] {
        &self.profiles
    }

    #[inline]
    pub fn is_spy(&self, v: NodeId) -> bool {
        self.profiles[v.index()].is_spy()
    }

    #[inline]
    pub fn is_honest(&self, v: NodeId) -> bool {
        !self.is_spy(v)
    }

    #[inline]
    pub fn supports_protocol(&self, v: NodeId) -> bool {
        self.profiles[v.index()].supports_protocol
    }

    pub fn honest_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.is_honest(v)).collect()
    }

    pub fn spies(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.is_spy(v)).collect()
    }

    /// Same adjacency, new role annotation.
    pub fn with_profiles(&self, profiles: Vec<NodeProfile>) -> Result<Self> {
        if profiles.len() != self.node_count() {
            return Err(Error::invalid("profile count does not match node count"));
        }
        Ok(Digraph { out_adj: self.out_adj.clone(), in_adj: self.in_adj.clone(), profiles })
    }

    /// Union of in- and out-neighbors, sorted and deduplicated. Links are
    /// directed by who opened them but carry traffic both ways.
    pub fn undirected_neighbors(&self) -> Vec<Vec<NodeId>> {
        (0..self.node_count())
            .map(|v| {
                let mut ns: Vec<NodeId> =
                    self.out_adj[v].iter().chain(self.in_adj[v].iter()).copied().collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            })
            .collect()
    }
}

/// Nearest-integer rounding with ties going up.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

pub fn spy_count(n: usize, p: f64) -> usize {
    round_half_up(p * n as f64).min(n)
}

pub fn supporter_count(n: usize, p: f64, beta: f64) -> usize {
    round_half_up(beta * (1.0 - p) * n as f64).min(n - spy_count(n, p))
}

/// Uniformly places `round(p n)` spies; among honest nodes a uniform subset
/// of `round(beta (1 - p) n)` supports the protocol. Spies always support it.
pub fn assign_roles<R: Rng + ?Sized>(n: usize, p: f64, beta: f64, rng: &mut R) -> Result<Vec<NodeProfile>> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::invalid(format!("p={p} and beta={beta} must lie in [0, 1]")));
    }
    let spies = spy_count(n, p);
    let supporters = supporter_count(n, p, beta);
    let order = index::sample(rng, n, n);
    let mut profiles = vec![NodeProfile::honest(false); n];
    for (rank, v) in order.iter().enumerate() {
        profiles[v] = if rank < spies {
            NodeProfile::spy()
        } else if rank < spies + supporters {
            NodeProfile::honest(true)
        } else {
            NodeProfile::honest(false)
        };
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;

    #[test]
    fn rejects_malformed_graphs() {
        let prof = vec![NodeProfile::default(); 2];
        assert!(Digraph::new(vec![vec![NodeId(0)], vec![]], prof.clone()).is_err());
        assert!(Digraph::new(vec![vec![NodeId(1), NodeId(1)], vec![]], prof.clone()).is_err());
        assert!(Digraph::new(vec![vec![NodeId(5)], vec![]], prof.clone()).is_err());
        let g = Digraph::new(vec![vec![NodeId(1)], vec![NodeId(0)]], prof).unwrap();
        assert_eq!(g.in_neighbors(NodeId(0)), &[NodeId(1)]);
    }

    #[test]
    fn role_counts_follow_rounding() {
        let mut rng = rng_from_seed(1);
        let prof = assign_roles(1000, 0.2, 0.1, &mut rng).unwrap();
        assert_eq!(prof.iter().filter(|p| p.is_spy()).count(), 200);
        let sup = prof.iter().filter(|p| !p.is_spy() && p.supports_protocol).count();
        assert_eq!(sup, 80);
        // 0.15 * 50 = 7.5 rounds up
        assert_eq!(spy_count(50, 0.15), 8);
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.4999), 2);
    }

    #[test]
    fn topology_parsing() {
        assert_eq!(TopologyKind::parse("exact-4-regular", 0, 0).unwrap(), TopologyKind::ExactRegular { d: 4 });
        assert_eq!(TopologyKind::parse("exact", 6, 0).unwrap(), TopologyKind::ExactRegular { d: 6 });
        assert!(TopologyKind::parse("exact", 3, 0).is_err());
        assert!(TopologyKind::parse("torus", 4, 0).is_err());
    }
}
