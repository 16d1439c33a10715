use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;

use super::log::ObservationLog;
use crate::protocol::{hop_cap, sample_node_routing, ForwardingScheme, NodeRouting};
use crate::seeds::{trial_rng, Stream};
use crate::topology::{Digraph, NodeId};

/// First-spy counts of one source's linked transactions, sorted by spy.
pub type SpyHistogram = Vec<(NodeId, u32)>;

/// Smoothed first-spy pmfs per candidate source.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureTable {
    candidates: Vec<NodeId>,
    spies: Vec<NodeId>,
    spy_slot: HashMap<NodeId, usize>,
    log_psi: Vec<Vec<f64>>,
    sum_log_psi: Vec<f64>,
    n_train: usize,
    eps: f64,
}

impl SignatureTable {
    /// Builds the table from raw first-spy counts, one row per candidate
    /// aligned with `spies`. Rows are normalized by their hit count, then
    /// smoothed with `eps = 1/(n_train * spies)` and renormalized.
    pub fn from_counts(candidates: Vec<NodeId>, spies: Vec<NodeId>, counts: Vec<Vec<u64>>, n_train: usize) -> Self {
        let s = spies.len().max(1);
        let eps = 1.0 / (n_train.max(1) * s) as f64;
        let log_psi: Vec<Vec<f64>> = counts
            .iter()
            .map(|row| {
                let hits: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        let p = if hits == 0 { 1.0 / s as f64 } else { c as f64 / hits as f64 };
                        ((p + eps) / (1.0 + eps * s as f64)).ln()
                    })
                    .collect()
            })
            .collect();
        let sum_log_psi = log_psi.iter().map(|r| r.iter().sum()).collect();
        let spy_slot = spies.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        SignatureTable { candidates, spies, spy_slot, log_psi, sum_log_psi, n_train, eps }
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn spies(&self) -> &[NodeId] {
        &self.spies
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Smoothed pmf of candidate number `i`, aligned with [`Self::spies`].
    pub fn psi(&self, i: usize) -> Vec<f64> {
        self.log_psi[i].iter().map(|l| l.exp()).collect()
    }

    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.candidates.binary_search(&v).ok()
    }
}

/// One adversarial training walk from `v`; returns the first spy reached in
/// the stem, if any. Pseudorandom routing is unknown to the adversary, so
/// each walk samples fresh routing for the nodes it visits.
fn training_walk<R: Rng + ?Sized>(
    h: &Digraph,
    v: NodeId,
    q: f64,
    scheme: ForwardingScheme,
    cap: usize,
    rng: &mut R,
) -> Option<NodeId> {
    let uniform = |x: NodeId, rng: &mut R| {
        let outs = h.out_neighbors(x);
        (!outs.is_empty()).then(|| outs[rng.gen_range(0..outs.len())])
    };
    let mut lazy: HashMap<NodeId, NodeRouting> = HashMap::new();
    let mut visited: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut head = v;
    let mut target = if scheme.is_pseudorandom() {
        lazy.entry(v).or_insert_with(|| sample_node_routing(h, v, scheme, rng)).own_edge?
    } else {
        uniform(v, rng)?
    };
    let mut hops = 1;
    loop {
        if h.is_spy(target) {
            return Some(target);
        }
        if !h.supports_protocol(target) || rng.gen::<f64>() < q || hops >= cap {
            return None;
        }
        let next = if scheme.is_pseudorandom() {
            if !visited.insert((target, head)) {
                return None;
            }
            let r = lazy.entry(target).or_insert_with(|| sample_node_routing(h, target, scheme, rng));
            let slot = h.in_neighbors(target).binary_search(&head).ok()?;
            r.relay.get(slot).copied()?
        } else {
            uniform(target, rng)?
        };
        head = target;
        target = next;
        hops += 1;
    }
}

/// Simulates `n_train` stem walks from every honest node and tabulates the
/// first spy reached. Candidate `v` uses the stream `(seed, v)`, so the
/// table does not depend on thread scheduling.
pub fn train_signatures(h: &Digraph, q: f64, scheme: ForwardingScheme, n_train: usize, seed: u64) -> SignatureTable {
    let candidates = h.honest_nodes();
    let spies = h.spies();
    let slot: HashMap<NodeId, usize> = spies.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let cap = hop_cap(q);
    let counts: Vec<Vec<u64>> = candidates
        .par_iter()
        .map(|&v| {
            let mut rng = trial_rng(seed, v.0 as u64, Stream::Training);
            let mut row = vec![0u64; spies.len()];
            for _ in 0..n_train {
                if let Some(s) = training_walk(h, v, q, scheme, cap, &mut rng) {
                    row[slot[&s]] += 1;
                }
            }
            row
        })
        .collect();
    SignatureTable::from_counts(candidates, spies, counts, n_train)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accusation {
    pub node: NodeId,
    /// Drawn uniformly because nothing was observed.
    pub random: bool,
}

/// Accuses the candidate minimizing KL(observed || Psi_v), both smoothed
/// with the table's epsilon. Ties go to the lowest node index.
pub fn intersection_classify<R: Rng + ?Sized>(hist: &[(NodeId, u32)], table: &SignatureTable, rng: &mut R) -> Accusation {
    let m: u32 = hist.iter().map(|&(_, c)| c).sum();
    if m == 0 || table.candidates.len() == 1 {
        let i = if table.candidates.len() == 1 { 0 } else { rng.gen_range(0..table.candidates.len()) };
        return Accusation { node: table.candidates[i], random: m == 0 };
    }
    // KL(P || Psi_v) = const - sum_s P_s ln Psi_vs, with
    // P_s = (c_s/m + eps) / (1 + eps S); the positive factor is dropped.
    let support: Vec<(usize, f64)> = hist
        .iter()
        .filter_map(|&(s, c)| table.spy_slot.get(&s).map(|&i| (i, c as f64 / m as f64)))
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, (row, &sum)) in table.log_psi.iter().zip(&table.sum_log_psi).enumerate() {
        let score = table.eps * sum + support.iter().map(|&(j, p)| p * row[j]).sum::<f64>();
        if score > best.0 {
            best = (score, i);
        }
    }
    Accusation { node: table.candidates[best.1], random: false }
}

/// Groups first-spy identities by true source. `truth[tx]` is the source
/// of transaction `tx`; sources with no observations get an empty histogram.
pub fn per_source_histograms(log: &ObservationLog, truth: &[NodeId]) -> BTreeMap<NodeId, SpyHistogram> {
    let mut counts: BTreeMap<NodeId, BTreeMap<NodeId, u32>> = truth.iter().map(|&v| (v, BTreeMap::new())).collect();
    for r in log.first_records(truth.len()).into_iter().flatten() {
        *counts.get_mut(&truth[r.tx_id as usize]).expect("source present").entry(r.spy).or_default() += 1;
    }
    counts.into_iter().map(|(v, c)| (v, c.into_iter().collect())).collect()
}
