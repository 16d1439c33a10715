use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeds::hash_unit;
use crate::topology::{Digraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForwardingScheme {
    /// Fresh uniform out-edge at every hop.
    PerTransaction,
    /// Inbound edges mapped to distinct outbound edges for the epoch.
    OneToOne,
    /// Every inbound edge mapped to one outbound edge.
    AllToOne,
    /// Each inbound edge mapped independently, with replacement.
    PerIncomingEdge,
}

impl ForwardingScheme {
    pub const ALL: [ForwardingScheme; 4] = [
        ForwardingScheme::PerTransaction,
        ForwardingScheme::OneToOne,
        ForwardingScheme::AllToOne,
        ForwardingScheme::PerIncomingEdge,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ForwardingScheme::PerTransaction => "per-transaction",
            ForwardingScheme::OneToOne => "one-to-one",
            ForwardingScheme::AllToOne => "all-to-one",
            ForwardingScheme::PerIncomingEdge => "per-incoming-edge",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown forwarding scheme `{s}`")))
    }

    /// True for the schemes whose routing is fixed for an epoch.
    pub fn is_pseudorandom(&self) -> bool {
        !matches!(self, ForwardingScheme::PerTransaction)
    }
}

/// Forwarding state of one node for one epoch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeRouting {
    /// Outbound target for each inbound neighbor, aligned with the node's
    /// sorted in-neighbor list. Empty under per-transaction forwarding.
    pub relay: Vec<NodeId>,
    pub own_edge: Option<NodeId>,
    pub is_diffuser: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRouting {
    pub scheme: ForwardingScheme,
    pub epoch: u64,
    nodes: Vec<NodeRouting>,
}

impl EpochRouting {
    pub fn node(&self, v: NodeId) -> &NodeRouting {
        &self.nodes[v.index()]
    }

    /// Outbound target for a transaction that reached `v` from `from`.
    pub fn relay_target(&self, h: &Digraph, v: NodeId, from: NodeId) -> Option<NodeId> {
        let relay = &self.nodes[v.index()].relay;
        if relay.is_empty() {
            return None;
        }
        h.in_neighbors(v).binary_search(&from).ok().map(|i| relay[i])
    }

    pub fn own_edge(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.index()].own_edge
    }

    pub fn is_diffuser(&self, v: NodeId) -> bool {
        self.nodes[v.index()].is_diffuser
    }

    /// Sets the per-epoch diffuser flags: node `v` diffuses when a hash of
    /// `(v, epoch, seed)` falls below `q`.
    pub fn with_diffusers(mut self, q: f64, seed: u64) -> Self {
        let epoch = self.epoch;
        for (v, r) in self.nodes.iter_mut().enumerate() {
            r.is_diffuser = hash_unit(&[v as u64, epoch, seed]) < q;
        }
        self
    }
}

/// Samples the routing state of a single node.
pub fn sample_node_routing<R: Rng + ?Sized>(
    h: &Digraph,
    v: NodeId,
    scheme: ForwardingScheme,
    rng: &mut R,
) -> NodeRouting {
    let outs = h.out_neighbors(v);
    if outs.is_empty() {
        return NodeRouting::default();
    }
    let ins = h.in_neighbors(v);
    let relay = match scheme {
        ForwardingScheme::PerTransaction => Vec::new(),
        ForwardingScheme::AllToOne => {
            let c = outs[rng.gen_range(0..outs.len())];
            vec![c; ins.len()]
        }
        ForwardingScheme::PerIncomingEdge => ins.iter().map(|_| outs[rng.gen_range(0..outs.len())]).collect(),
        ForwardingScheme::OneToOne => {
            // Shuffled inbound positions dealt round-robin onto shuffled
            // outbound edges: injective while in <= out, balanced otherwise.
            let mut in_order: Vec<usize> = (0..ins.len()).collect();
            in_order.shuffle(rng);
            let mut out_order = outs.to_vec();
            out_order.shuffle(rng);
            let mut relay = vec![NodeId(0); ins.len()];
            for (k, &i) in in_order.iter().enumerate() {
                relay[i] = out_order[k % out_order.len()];
            }
            relay
        }
    };
    let own_edge = match scheme {
        ForwardingScheme::PerTransaction => None,
        _ => Some(outs[rng.gen_range(0..outs.len())]),
    };
    NodeRouting { relay, own_edge, is_diffuser: false }
}

/// Samples every node's routing for one epoch. Spies get routing too, since
/// by default they follow the protocol.
pub fn sample_epoch_routing<R: Rng + ?Sized>(
    h: &Digraph,
    scheme: ForwardingScheme,
    epoch: u64,
    rng: &mut R,
) -> Result<EpochRouting> {
    let mut nodes = Vec::with_capacity(h.node_count());
    for v in h.nodes() {
        if h.out_degree(v) == 0 && h.is_honest(v) {
            return Err(Error::NoOutEdges(v));
        }
        nodes.push(sample_node_routing(h, v, scheme, rng));
    }
    Ok(EpochRouting { scheme, epoch, nodes })
}
