use std::collections::HashSet;

use rand::Rng;

use super::routing::{EpochRouting, ForwardingScheme};
use crate::adversary::{Observation, Phase};
use crate::topology::{Digraph, NodeId};

/// A transaction generated by an honest node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tx {
    pub tx_id: u32,
    pub source: NodeId,
    /// Index among the source's own transactions.
    pub source_seq: u32,
    pub created_at: f64,
}

/// What ends the stem at an honest relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluffTrigger {
    /// Each relay flips a coin with probability `q` after receiving.
    #[default]
    PerHopCoin,
    /// Relays flagged as diffusers for the epoch always fluff.
    EpochDiffuser,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StemParams {
    pub q: f64,
    pub trigger: FluffTrigger,
    /// End bookkeeping at the first spy that receives the transaction.
    pub stop_at_spy: bool,
    /// Seconds per stem hop.
    pub delta_hop: f64,
}

impl Default for StemParams {
    fn default() -> Self {
        StemParams { q: 0.1, trigger: FluffTrigger::PerHopCoin, stop_at_spy: true, delta_hop: 0.3 }
    }
}

impl StemParams {
    pub fn with_q(q: f64) -> Self {
        StemParams { q, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    FirstSpyHit,
    FluffEntry,
    LoopDetected,
    HopCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StemOutcome {
    /// Every stem recipient in order, starting with the source.
    pub path: Vec<NodeId>,
    pub termination: Termination,
    pub fluff_origin: NodeId,
    pub stem_observations: Vec<Observation>,
}

impl StemOutcome {
    pub fn stem_length(&self) -> usize {
        self.path.len() - 1
    }
}

/// Hop limit for per-transaction walks: `50 * ceil(1 / max(q, 0.01))`.
pub fn hop_cap(q: f64) -> usize {
    50 * (1.0 / q.max(0.01)).ceil() as usize
}

fn uniform_out<R: Rng + ?Sized>(h: &Digraph, v: NodeId, rng: &mut R) -> Option<NodeId> {
    let outs = h.out_neighbors(v);
    (!outs.is_empty()).then(|| outs[rng.gen_range(0..outs.len())])
}

/// Relays `tx` along the anonymity graph until it fluffs, loops, hits the
/// hop cap or (when configured) reaches a spy.
pub fn stem_route<R: Rng + ?Sized>(
    tx: &Tx,
    h: &Digraph,
    routing: &EpochRouting,
    params: &StemParams,
    rng: &mut R,
) -> StemOutcome {
    let source = tx.source;
    let mut path = vec![source];
    let mut observations = Vec::new();
    let mut spy_hit = false;
    let finish = |path: Vec<NodeId>, obs, t, origin, spy_hit: bool| StemOutcome {
        path,
        termination: if spy_hit { Termination::FirstSpyHit } else { t },
        fluff_origin: origin,
        stem_observations: obs,
    };

    if !h.supports_protocol(source) {
        return finish(path, observations, Termination::FluffEntry, source, false);
    }
    let first = match routing.scheme {
        ForwardingScheme::PerTransaction => uniform_out(h, source, rng),
        _ => routing.own_edge(source).or_else(|| uniform_out(h, source, rng)),
    };
    let Some(mut target) = first else {
        return finish(path, observations, Termination::FluffEntry, source, false);
    };
    let cap = hop_cap(params.q);
    let mut visited: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut head = source;
    loop {
        path.push(target);
        let hops = path.len() - 1;
        if h.is_spy(target) {
            if h.is_honest(head) {
                observations.push(Observation {
                    tx_id: tx.tx_id,
                    deliverer: head,
                    spy: target,
                    time: tx.created_at + hops as f64 * params.delta_hop,
                    phase: Phase::Stem,
                });
            }
            spy_hit = true;
            if params.stop_at_spy {
                return finish(path, observations, Termination::FirstSpyHit, target, true);
            }
        } else if !h.supports_protocol(target) {
            return finish(path, observations, Termination::FluffEntry, target, spy_hit);
        }
        let fluff = match params.trigger {
            FluffTrigger::PerHopCoin => rng.gen::<f64>() < params.q,
            FluffTrigger::EpochDiffuser => routing.is_diffuser(target),
        };
        if fluff {
            return finish(path, observations, Termination::FluffEntry, target, spy_hit);
        }
        if hops >= cap {
            return finish(path, observations, Termination::HopCap, target, spy_hit);
        }
        let next = if routing.scheme.is_pseudorandom() {
            if !visited.insert((target, head)) {
                return finish(path, observations, Termination::LoopDetected, target, spy_hit);
            }
            routing.relay_target(h, target, head).or_else(|| uniform_out(h, target, rng))
        } else {
            uniform_out(h, target, rng)
        };
        let Some(next) = next else {
            return finish(path, observations, Termination::FluffEntry, target, spy_hit);
        };
        head = target;
        target = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::routing::sample_epoch_routing;
    use crate::seeds::rng_from_seed;
    use crate::stats;
    use crate::topology::{assign_roles, gen_exact_d_regular, NodeProfile};

    fn tx(source: u32) -> Tx {
        Tx { tx_id: 0, source: NodeId(source), source_seq: 0, created_at: 0.0 }
    }

    #[test]
    fn q_one_gives_single_hop() {
        let mut rng = rng_from_seed(1);
        let h = gen_exact_d_regular(50, 4, &mut rng).unwrap();
        for scheme in ForwardingScheme::ALL {
            let r = sample_epoch_routing(&h, scheme, 0, &mut rng).unwrap();
            for s in 0..50 {
                let out = stem_route(&tx(s), &h, &r, &StemParams::with_q(1.0), &mut rng);
                assert_eq!(out.stem_length(), 1);
                assert_eq!(out.termination, Termination::FluffEntry);
                assert_eq!(out.fluff_origin, out.path[1]);
            }
        }
    }

    #[test]
    fn own_edge_to_spy_is_first_spy_hit() {
        // 0 -> 1 (spy) only
        let out = vec![vec![NodeId(1)], vec![NodeId(2)], vec![NodeId(0)]];
        let prof = vec![NodeProfile::honest(true), NodeProfile::spy(), NodeProfile::honest(true)];
        let h = Digraph::new(out, prof).unwrap();
        let mut rng = rng_from_seed(2);
        let r = sample_epoch_routing(&h, ForwardingScheme::OneToOne, 0, &mut rng).unwrap();
        let o = stem_route(&tx(0), &h, &r, &StemParams::with_q(0.0), &mut rng);
        assert_eq!(o.termination, Termination::FirstSpyHit);
        assert_eq!(o.stem_length(), 1);
        assert_eq!(o.stem_observations.len(), 1);
        assert_eq!(o.stem_observations[0].deliverer, NodeId(0));
        assert_eq!(o.stem_observations[0].spy, NodeId(1));
    }

    #[test]
    fn geometric_stem_length() {
        let mut rng = rng_from_seed(3);
        let h = gen_exact_d_regular(500, 4, &mut rng).unwrap();
        let r = sample_epoch_routing(&h, ForwardingScheme::PerTransaction, 0, &mut rng).unwrap();
        let lens: Vec<f64> = (0..20_000)
            .map(|i| stem_route(&tx(i % 500), &h, &r, &StemParams::with_q(0.1), &mut rng).stem_length() as f64)
            .collect();
        let m = stats::mean(&lens);
        assert!((m - 10.0).abs() < 3.0 * stats::std_err(&lens), "mean {m}");
    }

    #[test]
    fn pseudorandom_same_inbound_same_outbound() {
        let mut rng = rng_from_seed(4);
        let prof = assign_roles(200, 0.0, 1.0, &mut rng).unwrap();
        let h = gen_exact_d_regular(200, 4, &mut rng).unwrap().with_profiles(prof).unwrap();
        for scheme in [ForwardingScheme::OneToOne, ForwardingScheme::AllToOne, ForwardingScheme::PerIncomingEdge] {
            let r = sample_epoch_routing(&h, scheme, 0, &mut rng).unwrap();
            let p = StemParams::with_q(0.0);
            for s in 0..20 {
                let a = stem_route(&tx(s), &h, &r, &p, &mut rng);
                let b = stem_route(&tx(s), &h, &r, &p, &mut rng);
                assert_eq!(a.path, b.path);
                assert_eq!(a.termination, Termination::LoopDetected);
                // the repeat point is on the path twice
                let head = *a.path.last().unwrap();
                assert_eq!(a.fluff_origin, head);
            }
        }
    }

    #[test]
    fn per_transaction_zero_q_hits_cap() {
        let mut rng = rng_from_seed(5);
        let h = gen_exact_d_regular(30, 4, &mut rng).unwrap();
        let r = sample_epoch_routing(&h, ForwardingScheme::PerTransaction, 0, &mut rng).unwrap();
        let o = stem_route(&tx(0), &h, &r, &StemParams::with_q(0.0), &mut rng);
        assert_eq!(o.termination, Termination::HopCap);
        assert_eq!(o.stem_length(), hop_cap(0.0));
        assert_eq!(hop_cap(0.0), 5000);
        assert_eq!(hop_cap(0.2), 250);
    }

    #[test]
    fn non_supporter_ends_stem() {
        let out = vec![vec![NodeId(1)], vec![NodeId(2)], vec![NodeId(0)]];
        let prof = vec![NodeProfile::honest(true), NodeProfile::honest(false), NodeProfile::honest(true)];
        let h = Digraph::new(out, prof).unwrap();
        let mut rng = rng_from_seed(6);
        let r = sample_epoch_routing(&h, ForwardingScheme::PerTransaction, 0, &mut rng).unwrap();
        let o = stem_route(&tx(0), &h, &r, &StemParams::with_q(0.0), &mut rng);
        assert_eq!(o.fluff_origin, NodeId(1));
        assert_eq!(o.termination, Termination::FluffEntry);
    }

    #[test]
    fn epoch_diffuser_trigger() {
        let mut rng = rng_from_seed(7);
        let h = gen_exact_d_regular(40, 4, &mut rng).unwrap();
        let r = sample_epoch_routing(&h, ForwardingScheme::OneToOne, 0, &mut rng).unwrap().with_diffusers(1.0, 3);
        let p = StemParams { trigger: FluffTrigger::EpochDiffuser, q: 0.0, ..StemParams::default() };
        let o = stem_route(&tx(0), &h, &r, &p, &mut rng);
        assert_eq!(o.stem_length(), 1);
    }
}
