use std::collections::{HashMap, VecDeque};

use super::assignment::max_weight_assignment;
use super::log::ObservationLog;
use super::mapping::{first_spy_estimate, Mapping};
use crate::error::{Error, Result};
use crate::protocol::EpochRouting;
use crate::topology::{Digraph, NodeId};

/// Log-likelihood that each honest node's transaction left the stem on the
/// edge into a spy from `w`, following the shortest honest path to `w`:
/// `(h-1) ln(1-q) - sum of ln(outdeg)` over the path, `h` hops in total.
fn shortest_path_loglik(h: &Digraph, w: NodeId, q: f64) -> Vec<Option<f64>> {
    let n = h.node_count();
    let mut ll: Vec<Option<f64>> = vec![None; n];
    let mut hops = vec![usize::MAX; n];
    let ln_cont = (1.0 - q).ln();
    let ln_deg = |v: NodeId| (h.out_degree(v) as f64).ln();
    ll[w.index()] = Some(-ln_deg(w));
    hops[w.index()] = 1;
    let mut queue = VecDeque::from([w]);
    while let Some(x) = queue.pop_front() {
        for &v in h.in_neighbors(x) {
            if h.is_spy(v) || hops[v.index()] != usize::MAX {
                continue;
            }
            hops[v.index()] = hops[x.index()] + 1;
            ll[v.index()] = ll[x.index()].map(|l| l - ln_deg(v) + ln_cont);
            queue.push_back(v);
        }
    }
    ll.into_iter().map(|l| l.filter(|x| x.is_finite())).collect()
}

/// Solves the weighted assignment for the observed transactions, replicating
/// candidates when there are more transactions than candidates. Copies cost
/// extra so reuse only happens once every candidate is taken.
fn assign(tx_count: usize, txs: &[u32], candidates: &[NodeId], weights: Vec<Vec<Option<f64>>>) -> Mapping {
    const REUSE: f64 = 1e5;
    let mut mapping = Mapping::unassigned(tx_count);
    if txs.is_empty() || candidates.is_empty() {
        return mapping;
    }
    let copies = txs.len().div_ceil(candidates.len());
    let wide: Vec<Vec<Option<f64>>> = weights
        .into_iter()
        .map(|row| (0..copies).flat_map(|c| row.iter().map(move |w| w.map(|x| x - REUSE * c as f64))).collect())
        .collect();
    let cols = max_weight_assignment(&wide);
    for ((&tx, col), row) in txs.iter().zip(cols).zip(&wide) {
        // a forced forbidden pair falls back to the tx's most likely node
        let col = if row[col].is_some() {
            col
        } else {
            match row[..candidates.len()]
                .iter()
                .enumerate()
                .filter_map(|(j, w)| w.map(|w| (w, j)))
                .fold(None, |best: Option<(f64, usize)>, x| match best {
                    Some(b) if b.0 >= x.0 => Some(b),
                    _ => Some(x),
                }) {
                Some((_, j)) => j,
                None => continue,
            }
        };
        mapping.assign(tx, candidates[col % candidates.len()]);
    }
    mapping
}

fn observed(log: &ObservationLog, tx_count: usize) -> (Vec<u32>, Vec<(NodeId, NodeId)>) {
    log.first_records(tx_count)
        .into_iter()
        .flatten()
        .map(|o| (o.tx_id, (o.deliverer, o.spy)))
        .unzip()
}

/// Maximum-likelihood matching of transactions to distinct honest nodes
/// using shortest-path likelihoods on the known anonymity graph.
pub fn matching_estimate(log: &ObservationLog, tx_count: usize, h: &Digraph, q: f64) -> Result<Mapping> {
    if !log.graph_known {
        return Err(Error::invalid("matching estimator needs the graph-known flag"));
    }
    let (txs, edges) = observed(log, tx_count);
    let candidates = h.honest_nodes();
    let mut cache: HashMap<NodeId, Vec<Option<f64>>> = HashMap::new();
    let weights: Vec<Vec<Option<f64>>> = edges
        .iter()
        .map(|&(w, _)| {
            let ll = cache.entry(w).or_insert_with(|| shortest_path_loglik(h, w, q));
            candidates.iter().map(|v| ll[v.index()]).collect()
        })
        .collect();
    if weights.iter().all(|r| r.iter().all(Option::is_none)) {
        return Ok(first_spy_estimate(log, tx_count));
    }
    Ok(assign(tx_count, &txs, &candidates, weights))
}

/// Scores every honest node by the probability that one of its own
/// transactions exits the stem on edge `w -> s`, given the relay maps.
/// Own-edge choice is unknown, so the out-edges are averaged.
fn routing_scores(h: &Digraph, routing: &EpochRouting, w: NodeId, s: NodeId, q: f64) -> Vec<Option<f64>> {
    let n = h.node_count();
    let mut sum = vec![0.0f64; n];
    let cont = 1.0 - q;
    // (edge tail, edge head, hops from the tail's own send to the spy)
    let mut stack = vec![(w, s, 1usize)];
    let mut seen = std::collections::HashSet::new();
    while let Some((a, b, hops)) = stack.pop() {
        if !seen.insert((a, b)) {
            continue;
        }
        sum[a.index()] += cont.powi(hops as i32 - 1);
        for &u in h.in_neighbors(a) {
            if h.is_honest(u) && routing.relay_target(h, a, u) == Some(b) {
                stack.push((u, a, hops + 1));
            }
        }
    }
    h.nodes()
        .map(|v| {
            let score = sum[v.index()] / h.out_degree(v).max(1) as f64;
            (score > 0.0).then(|| score.ln())
        })
        .collect()
}

/// Matching that also uses known relay decisions (not own-transaction
/// choices) of every honest node.
pub fn routing_aware_estimate(
    log: &ObservationLog,
    tx_count: usize,
    h: &Digraph,
    routing: &EpochRouting,
    q: f64,
) -> Result<Mapping> {
    if !log.graph_known || !log.routing_known {
        return Err(Error::invalid("routing-aware estimator needs graph and routing knowledge"));
    }
    if !routing.scheme.is_pseudorandom() {
        return Err(Error::invalid("routing-aware estimator needs a pseudorandom forwarding scheme"));
    }
    let (txs, edges) = observed(log, tx_count);
    let candidates = h.honest_nodes();
    let mut cache: HashMap<(NodeId, NodeId), Vec<Option<f64>>> = HashMap::new();
    let weights: Vec<Vec<Option<f64>>> = edges
        .iter()
        .map(|&(w, s)| {
            let sc = cache.entry((w, s)).or_insert_with(|| routing_scores(h, routing, w, s, q));
            candidates.iter().map(|v| sc[v.index()]).collect()
        })
        .collect();
    if weights.iter().all(|r| r.iter().all(Option::is_none)) {
        return Ok(first_spy_estimate(log, tx_count));
    }
    Ok(assign(tx_count, &txs, &candidates, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Observation, Phase};
    use crate::protocol::{sample_epoch_routing, ForwardingScheme};
    use crate::seeds::rng_from_seed;
    use crate::topology::{assign_roles, gen_exact_d_regular, shortest_path_hops_within, NodeProfile};

    fn rec(tx: u32, d: u32, s: u32) -> Observation {
        Observation { tx_id: tx, deliverer: NodeId(d), spy: NodeId(s), time: 1.0, phase: Phase::Stem }
    }

    /// Node 1 is the only honest node that can reach spy 2; 0 and 3 cycle.
    fn lone_feeder() -> Digraph {
        let out = vec![vec![NodeId(3)], vec![NodeId(2)], vec![NodeId(0)], vec![NodeId(0)]];
        let prof = vec![NodeProfile::honest(true), NodeProfile::honest(true), NodeProfile::spy(), NodeProfile::honest(true)];
        Digraph::new(out, prof).unwrap()
    }

    #[test]
    fn single_positive_weight() {
        let h = lone_feeder();
        let log = ObservationLog::from_records(vec![rec(0, 1, 2)]).with_knowledge(true, false);
        let m = matching_estimate(&log, 1, &h, 0.0).unwrap();
        assert_eq!(m.get(0), Some(NodeId(1)));
    }

    #[test]
    fn loglik_hops_match_restricted_bfs() {
        let mut rng = rng_from_seed(2);
        let prof = assign_roles(40, 0.2, 1.0, &mut rng).unwrap();
        let h = gen_exact_d_regular(40, 4, &mut rng).unwrap().with_profiles(prof).unwrap();
        let q = 0.3;
        for w in h.honest_nodes() {
            let ll = shortest_path_loglik(&h, w, q);
            for v in h.honest_nodes() {
                let hops = shortest_path_hops_within(&h, v, w, |x| h.is_honest(x));
                match (hops, ll[v.index()]) {
                    (Some(d), Some(l)) => {
                        let expect = d as f64 * (0.7f64).ln() - (d + 1) as f64 * 2f64.ln();
                        assert!((l - expect).abs() < 1e-9);
                    }
                    (None, None) => {}
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn image_is_honest_and_distinct() {
        let mut rng = rng_from_seed(3);
        let prof = assign_roles(50, 0.2, 1.0, &mut rng).unwrap();
        let h = gen_exact_d_regular(50, 4, &mut rng).unwrap().with_profiles(prof).unwrap();
        let honest = h.honest_nodes();
        let spies = h.spies();
        let recs: Vec<Observation> = honest
            .iter()
            .enumerate()
            .map(|(i, &v)| Observation { tx_id: i as u32, deliverer: v, spy: spies[0], time: 0.3, phase: Phase::Stem })
            .collect();
        let log = ObservationLog::from_records(recs).with_knowledge(true, false);
        let m = matching_estimate(&log, honest.len(), &h, 0.0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (_, a) in m.iter() {
            let a = a.unwrap();
            assert!(h.is_honest(a));
            assert!(seen.insert(a));
        }
    }

    #[test]
    fn replication_when_more_txs_than_nodes() {
        let h = lone_feeder();
        let log = ObservationLog::from_records(vec![rec(0, 1, 2), rec(1, 1, 2), rec(2, 1, 2)]).with_knowledge(true, false);
        let m = matching_estimate(&log, 3, &h, 0.0).unwrap();
        assert_eq!(m.assigned_count(), 3);
        let ones = m.iter().filter(|(_, a)| *a == Some(NodeId(1))).count();
        assert_eq!(ones, 3);
    }

    #[test]
    fn requires_knowledge_flags() {
        let h = Digraph::empty(3);
        let log = ObservationLog::new();
        assert!(matching_estimate(&log, 0, &h, 0.0).is_err());
    }

    #[test]
    fn routing_aware_direct_edge_scores_highest() {
        let mut rng = rng_from_seed(4);
        let prof = assign_roles(60, 0.2, 1.0, &mut rng).unwrap();
        let h = gen_exact_d_regular(60, 4, &mut rng).unwrap().with_profiles(prof).unwrap();
        let r = sample_epoch_routing(&h, ForwardingScheme::OneToOne, 0, &mut rng).unwrap();
        let (w, s) = h.edges().find(|&(a, b)| h.is_honest(a) && h.is_spy(b)).unwrap();
        let sc = routing_scores(&h, &r, w, s, 0.2);
        let best = h.nodes().filter_map(|v| sc[v.index()].map(|x| (x, v))).fold((f64::MIN, w), |a, b| if b.0 > a.0 { b } else { a });
        assert_eq!(best.1, w);
        assert!((sc[w.index()].unwrap() - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn routing_aware_equals_matching_on_line() {
        let mut rng = rng_from_seed(5);
        let prof = assign_roles(50, 0.15, 1.0, &mut rng).unwrap();
        let h = gen_exact_d_regular(50, 2, &mut rng).unwrap().with_profiles(prof).unwrap();
        let r = sample_epoch_routing(&h, ForwardingScheme::OneToOne, 0, &mut rng).unwrap();
        let spies = h.spies();
        let recs: Vec<Observation> = h
            .honest_nodes()
            .into_iter()
            .filter(|&v| spies.contains(&h.out_neighbors(v)[0]))
            .enumerate()
            .map(|(i, v)| Observation { tx_id: i as u32, deliverer: v, spy: h.out_neighbors(v)[0], time: 0.3, phase: Phase::Stem })
            .collect();
        let k = recs.len();
        let log = ObservationLog::from_records(recs).with_knowledge(true, true);
        assert_eq!(
            matching_estimate(&log, k, &h, 0.2).unwrap(),
            routing_aware_estimate(&log, k, &h, &r, 0.2).unwrap()
        );
    }
}
