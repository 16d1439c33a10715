use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::routing::EpochRouting;
use super::stem::{stem_route, StemParams, Termination, Tx};
use crate::error::{Error, Result};
use crate::topology::{Digraph, NodeId, NodeProfile};

/// Embargo timer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerConfig {
    /// Mean of the exponential embargo timer, seconds.
    pub t_base: f64,
    /// Seconds per stem hop.
    pub delta_hop: f64,
}

impl TimerConfig {
    pub fn new(t_base: f64, delta_hop: f64) -> Result<Self> {
        if !(t_base > 0.0 && delta_hop > 0.0) {
            return Err(Error::invalid(format!("timer parameters must be positive: T_base={t_base}, delta_hop={delta_hop}")));
        }
        Ok(TimerConfig { t_base, delta_hop })
    }
}

/// How spies treat stem transactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DropPolicy {
    #[default]
    RelayHonestly,
    DropAll,
}

impl DropPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            DropPolicy::RelayHonestly => "relay",
            DropPolicy::DropAll => "drop-all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relay" | "honest" => Ok(DropPolicy::RelayHonestly),
            "drop" | "drop-all" => Ok(DropPolicy::DropAll),
            _ => Err(Error::Config(format!("unknown drop policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlackHoleOutcome {
    pub diffused: bool,
    pub diffusing_relay: NodeId,
    /// Position of the diffusing relay among the honest stem relays.
    pub relay_index: usize,
    /// Time from creation until diffusion starts.
    pub elapsed: f64,
    /// A timer fired while the stem was still progressing.
    pub premature: bool,
    /// The stem was swallowed by a spy.
    pub dropped: bool,
    /// Honest relays that armed a timer, source included.
    pub relays: usize,
    /// Time from the last honest relay's receipt until diffusion.
    pub extra_delay: f64,
}

/// Runs one stem with embargo timers. Each honest relay arms an
/// exponential timer with mean `T_base` on first receipt. Under
/// `DropAll` the first spy swallows the transaction and the earliest timer
/// starts diffusion; otherwise a timer only matters if it fires before the
/// stem reaches its fluff point.
pub fn simulate_black_hole<R: Rng + ?Sized>(
    tx: &Tx,
    h: &Digraph,
    routing: &EpochRouting,
    stem: &StemParams,
    timers: &TimerConfig,
    drop: DropPolicy,
    rng: &mut R,
) -> BlackHoleOutcome {
    let params = StemParams { stop_at_spy: drop == DropPolicy::DropAll, delta_hop: timers.delta_hop, ..*stem };
    let out = stem_route(tx, h, routing, &params, rng);
    let dropped = drop == DropPolicy::DropAll && out.termination == Termination::FirstSpyHit;

    let mut seen = std::collections::HashSet::new();
    let relays: Vec<(usize, NodeId)> = out
        .path
        .iter()
        .enumerate()
        .filter(|&(i, &v)| h.is_honest(v) && !(dropped && i + 1 == out.path.len()) && seen.insert(v))
        .map(|(i, &v)| (i, v))
        .collect();
    let exp = Exp::new(1.0 / timers.t_base).expect("positive T_base");
    let fires: Vec<f64> = relays.iter().map(|&(i, _)| i as f64 * timers.delta_hop + exp.sample(rng)).collect();
    let (first_idx, first_fire) = fires
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("the source always arms a timer");
    let last_arm = relays.last().map(|&(i, _)| i as f64 * timers.delta_hop).unwrap_or(0.0);

    if dropped {
        BlackHoleOutcome {
            diffused: true,
            diffusing_relay: relays[first_idx].1,
            relay_index: first_idx,
            elapsed: first_fire,
            premature: first_fire < last_arm,
            dropped,
            relays: relays.len(),
            extra_delay: first_fire - last_arm,
        }
    } else {
        let fluff_at = out.stem_length() as f64 * timers.delta_hop;
        let premature = first_fire < fluff_at;
        let (relay, idx, elapsed) = if premature {
            (relays[first_idx].1, first_idx, first_fire)
        } else {
            let idx = relays.iter().position(|&(_, v)| v == out.fluff_origin).unwrap_or(relays.len());
            (out.fluff_origin, idx, fluff_at)
        };
        BlackHoleOutcome {
            diffused: true,
            diffusing_relay: relay,
            relay_index: idx,
            elapsed,
            premature,
            dropped,
            relays: relays.len(),
            extra_delay: elapsed - last_arm,
        }
    }
}

/// A directed chain of `k` honest relays `0 -> 1 -> ... -> k-1` ending at a
/// spy `k`, which links back to node 0.
pub fn black_hole_chain(k: usize) -> Result<Digraph> {
    if k == 0 {
        return Err(Error::invalid("chain needs at least one honest relay"));
    }
    let out = (0..=k).map(|i| vec![NodeId::from((i + 1) % (k + 1))]).collect();
    let mut prof = vec![NodeProfile::honest(true); k + 1];
    prof[k] = NodeProfile::spy();
    Digraph::new(out, prof)
}
