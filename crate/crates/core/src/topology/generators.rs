use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{Digraph, NodeId, NodeProfile, TopologyKind};
use crate::error::{Error, Result};

const CYCLE_RESAMPLE_BUDGET: usize = 10_000;

/// Draws `k` distinct uniform nodes from `0..n` excluding `v`.
fn sample_excluding<R: Rng + ?Sized>(rng: &mut R, n: usize, v: usize, k: usize) -> Vec<NodeId> {
    index::sample(rng, n - 1, k)
        .into_iter()
        .map(|i| NodeId::from(if i >= v { i + 1 } else { i }))
        .collect()
}

/// P2P graph: every node opens `eta` outbound links to distinct uniform
/// targets other than itself.
pub fn gen_p2p_approx_regular<R: Rng + ?Sized>(n: usize, eta: usize, rng: &mut R) -> Result<Digraph> {
    if eta < 1 || n < eta + 1 {
        return Err(Error::invalid(format!("approx-regular graph needs eta >= 1 and n > eta (n={n}, eta={eta})")));
    }
    let out = (0..n).map(|v| sample_excluding(rng, n, v, eta)).collect();
    Ok(Digraph::from_parts_unchecked(out, vec![NodeProfile::default(); n]))
}

/// Random directed `d`-regular graph (in- and out-degree `d/2` everywhere)
/// built from `d/2` uniform Hamiltonian cycles; a cycle that would repeat
/// an existing edge is redrawn.
pub fn gen_exact_d_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Digraph> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::invalid(format!("exact-regular degree must be even and >= 2, got {d}")));
    }
    if d > n.saturating_sub(1) {
        return Err(Error::invalid(format!("exact {d}-regular graph needs n >= {}, got {n}", d + 1)));
    }
    let cycles = d / 2;
    let mut out: Vec<Vec<NodeId>> = vec![Vec::with_capacity(cycles); n];
    let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(n * cycles);
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut attempts = 0;
    for _ in 0..cycles {
        loop {
            attempts += 1;
            if attempts > CYCLE_RESAMPLE_BUDGET {
                return Err(Error::ResamplingBudgetExhausted { what: "exact regular graph", attempts: attempts - 1 });
            }
            order.shuffle(rng);
            let collides = (0..n).any(|i| edges.contains(&(order[i], order[(i + 1) % n])));
            if !collides {
                for i in 0..n {
                    let (s, t) = (order[i], order[(i + 1) % n]);
                    edges.insert((s, t));
                    out[s as usize].push(NodeId(t));
                }
                break;
            }
        }
    }
    Ok(Digraph::from_parts_unchecked(out, vec![NodeProfile::default(); n]))
}

/// Line baseline: one uniform directed Hamiltonian cycle.
pub fn gen_line_cycle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Digraph> {
    gen_exact_d_regular(n, 2, rng)
}

/// Anonymity graph where each node links to two distinct uniform targets.
/// The supplied profiles are carried over unchanged.
pub fn gen_anonymity_approx4<R: Rng + ?Sized>(profiles: &[NodeProfile], rng: &mut R) -> Result<Digraph> {
    let n = profiles.len();
    if n < 3 {
        return Err(Error::invalid(format!("approximate 4-regular graph needs n >= 3, got {n}")));
    }
    let out = (0..n)
        .map(|v| {
            let u1 = sample_excluding(rng, n, v, 1)[0];
            // second target uniform over V \ {v, u1}
            let (lo, hi) = if u1.index() < v { (u1.index(), v) } else { (v, u1.index()) };
            let mut j = rng.gen_range(0..n - 2);
            if j >= lo {
                j += 1;
            }
            if j >= hi {
                j += 1;
            }
            vec![u1, NodeId::from(j)]
        })
        .collect();
    Ok(Digraph::from_parts_unchecked(out, profiles.to_vec()))
}

/// How anonymity edges are chosen when only part of the network runs the
/// protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeploymentMode {
    VersionChecking,
    NoVersionChecking,
}

impl DeploymentMode {
    pub fn label(&self) -> &'static str {
        match self {
            DeploymentMode::VersionChecking => "version-checking",
            DeploymentMode::NoVersionChecking => "no-version-checking",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "version-checking" | "vc" => Ok(DeploymentMode::VersionChecking),
            "no-version-checking" | "nvc" => Ok(DeploymentMode::NoVersionChecking),
            other => Err(Error::Config(format!("unknown deployment mode `{other}`"))),
        }
    }
}

/// Embeds an anonymity graph of out-degree `d/2` into the P2P graph `g`.
///
/// Version-checking draws from the supporting out-neighbors when there are
/// enough of them, keeps all of them when there are fewer than `d/2`, and
/// falls back to uniform out-neighbors when there are none. Without version
/// checking, `d/2` uniform out-neighbors are used regardless of support.
pub fn embed_partial_deployment<R: Rng + ?Sized>(
    g: &Digraph,
    mode: DeploymentMode,
    d: usize,
    rng: &mut R,
) -> Result<Digraph> {
    let half = d / 2;
    if half == 0 {
        return Err(Error::invalid("anonymity degree d must be >= 2"));
    }
    let mut out = Vec::with_capacity(g.node_count());
    for v in g.nodes() {
        let nbrs = g.out_neighbors(v);
        if half > nbrs.len() {
            return Err(Error::invalid(format!(
                "d/2 = {half} exceeds out-degree {} of node {v}",
                nbrs.len()
            )));
        }
        let pick = |pool: &[NodeId], rng: &mut R| -> Vec<NodeId> {
            index::sample(rng, pool.len(), half).into_iter().map(|i| pool[i]).collect()
        };
        let chosen = match mode {
            DeploymentMode::NoVersionChecking => pick(nbrs, rng),
            DeploymentMode::VersionChecking => {
                let supporters: Vec<NodeId> = nbrs.iter().copied().filter(|&w| g.supports_protocol(w)).collect();
                if supporters.is_empty() {
                    pick(nbrs, rng)
                } else if supporters.len() < half {
                    supporters
                } else {
                    pick(&supporters, rng)
                }
            }
        };
        out.push(chosen);
    }
    Ok(Digraph::from_parts_unchecked(out, g.profiles().to_vec()))
}

/// Spies replace their outbound edges with links to every honest node.
pub fn apply_supernode_edges(h: &Digraph) -> Digraph {
    let honest = h.honest_nodes();
    let out = h
        .nodes()
        .map(|v| if h.is_spy(v) { honest.clone() } else { h.out_neighbors(v).to_vec() })
        .collect();
    Digraph::from_parts_unchecked(out, h.profiles().to_vec())
}

/// Anonymity graph for `kind` over nodes carrying `profiles`.
pub fn build_anonymity_graph<R: Rng + ?Sized>(
    kind: TopologyKind,
    profiles: &[NodeProfile],
    rng: &mut R,
) -> Result<Digraph> {
    let n = profiles.len();
    let g = match kind {
        TopologyKind::ApproxRegular { eta } => gen_p2p_approx_regular(n, eta, rng)?,
        TopologyKind::ExactRegular { d } => gen_exact_d_regular(n, d, rng)?,
        TopologyKind::LineCycle => gen_line_cycle(n, rng)?,
        TopologyKind::Approx4Regular => return gen_anonymity_approx4(profiles, rng),
    };
    g.with_profiles(profiles.to_vec())
}
