//! Transaction propagation: per-epoch routing state, stem relay, diffusion
//! over the P2P graph and the embargo-timer fail-safe.

mod diffusion;
mod routing;
mod stem;
mod timers;

use rand::Rng;

pub use diffusion::diffuse;
pub use routing::{sample_epoch_routing, sample_node_routing, EpochRouting, ForwardingScheme, NodeRouting};
pub use stem::{hop_cap, stem_route, FluffTrigger, StemOutcome, StemParams, Termination, Tx};
pub use timers::{black_hole_chain, simulate_black_hole, BlackHoleOutcome, DropPolicy, TimerConfig};

use crate::adversary::Observation;
use crate::error::{Error, Result};
use crate::topology::{Digraph, NodeId};

/// How far a transaction is followed once the stem is done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservationMode {
    /// Stop at the first spy observation, stem or fluff.
    #[default]
    FirstSpy,
    /// Stem records only; no diffusion.
    StemOnly,
    /// Run the stem through spies and the full diffusion.
    Full,
}

impl ObservationMode {
    pub fn label(&self) -> &'static str {
        match self {
            ObservationMode::FirstSpy => "first-spy",
            ObservationMode::StemOnly => "stem-only",
            ObservationMode::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "first-spy" | "cutoff" => Ok(ObservationMode::FirstSpy),
            "stem-only" | "stem" => Ok(ObservationMode::StemOnly),
            "full" => Ok(ObservationMode::Full),
            _ => Err(Error::Config(format!("unknown observation mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    pub stem: StemParams,
    /// Rate of the exponential per-edge diffusion delay.
    pub fluff_rate: f64,
    pub mode: ObservationMode,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams { stem: StemParams::default(), fluff_rate: 1.0, mode: ObservationMode::FirstSpy }
    }
}

/// Stem and fluff result for one transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub stem: StemOutcome,
    pub observations: Vec<Observation>,
}

impl Propagation {
    pub fn source(&self) -> NodeId {
        self.stem.path[0]
    }
}

/// Relays `tx` in stem phase over `h`, then diffuses it over the P2P graph
/// whose undirected neighbor lists are `g_nbrs`. Stem observations are
/// stamped at `hop * delta_hop`; fluff observations are offset by the stem
/// duration.
pub fn propagate<R: Rng + ?Sized>(
    tx: &Tx,
    h: &Digraph,
    g_nbrs: &[Vec<NodeId>],
    routing: &EpochRouting,
    params: &PropagationParams,
    rng: &mut R,
) -> Propagation {
    let stem_params = StemParams { stop_at_spy: params.mode != ObservationMode::Full, ..params.stem };
    let stem = stem_route(tx, h, routing, &stem_params, rng);
    let mut observations = stem.stem_observations.clone();
    let skip_fluff = match params.mode {
        ObservationMode::StemOnly => true,
        ObservationMode::FirstSpy => !observations.is_empty(),
        ObservationMode::Full => false,
    };
    if !skip_fluff {
        let start = tx.created_at + stem.stem_length() as f64 * params.stem.delta_hop;
        let cutoff = params.mode == ObservationMode::FirstSpy;
        observations.extend(diffuse(tx.tx_id, stem.fluff_origin, start, g_nbrs, h, params.fluff_rate, cutoff, rng));
    }
    Propagation { stem, observations }
}
