use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::adversary::{Observation, Phase};
use crate::topology::{Digraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Continuous-time diffusion of `tx_id` from `origin` over the undirected
/// neighbor lists `nbrs`, starting at `start`. Each edge delay is
/// exponential with the given rate. Records every honest-to-spy delivery;
/// with `cutoff` only the earliest one is returned and the simulation stops
/// as soon as it is known.
#[allow(clippy::too_many_arguments)]
pub fn diffuse<R: Rng + ?Sized>(
    tx_id: u32,
    origin: NodeId,
    start: f64,
    nbrs: &[Vec<NodeId>],
    roles: &Digraph,
    rate: f64,
    cutoff: bool,
    rng: &mut R,
) -> Vec<Observation> {
    let n = nbrs.len();
    let exp = Exp::new(rate).expect("positive diffusion rate");
    let mut arrival = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut obs: Vec<Observation> = Vec::new();
    let mut best = f64::INFINITY;
    arrival[origin.index()] = start;
    heap.push(Reverse((Time(start), origin)));
    while let Some(Reverse((Time(t), u))) = heap.pop() {
        if settled[u.index()] {
            continue;
        }
        if cutoff && t >= best {
            break;
        }
        settled[u.index()] = true;
        let honest = roles.is_honest(u);
        for &w in &nbrs[u.index()] {
            let tw = t + exp.sample(rng);
            if honest && roles.is_spy(w) {
                if !cutoff {
                    obs.push(Observation { tx_id, deliverer: u, spy: w, time: tw, phase: Phase::Fluff });
                } else if tw < best {
                    best = tw;
                    obs.clear();
                    obs.push(Observation { tx_id, deliverer: u, spy: w, time: tw, phase: Phase::Fluff });
                }
            }
            if tw < arrival[w.index()] {
                arrival[w.index()] = tw;
                heap.push(Reverse((Time(tw), w)));
            }
        }
    }
    obs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use crate::topology::{assign_roles, gen_p2p_approx_regular, NodeProfile};

    fn roles(prof: Vec<NodeProfile>, n: usize) -> Digraph {
        Digraph::empty(n).with_profiles(prof).unwrap()
    }

    #[test]
    fn two_nodes_one_observation() {
        let g = roles(vec![NodeProfile::honest(true), NodeProfile::spy()], 2);
        let nbrs = vec![vec![NodeId(1)], vec![NodeId(0)]];
        let o = diffuse(0, NodeId(0), 0.0, &nbrs, &g, 1.0, false, &mut rng_from_seed(1));
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].deliverer, NodeId(0));
    }

    #[test]
    fn no_spies_no_observations() {
        let mut rng = rng_from_seed(2);
        let g = gen_p2p_approx_regular(100, 8, &mut rng).unwrap();
        let o = diffuse(0, NodeId(3), 0.0, &g.undirected_neighbors(), &g, 1.0, false, &mut rng);
        assert!(o.is_empty());
    }

    #[test]
    fn star_with_spy_center() {
        let n = 6;
        let mut prof = vec![NodeProfile::honest(true); n];
        prof[0] = NodeProfile::spy();
        let g = roles(prof, n);
        let mut nbrs = vec![vec![NodeId(0)]; n];
        nbrs[0] = (1..n).map(NodeId::from).collect();
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let o = diffuse(0, NodeId(4), 0.0, &nbrs, &g, 1.0, true, &mut rng);
            assert_eq!(o.len(), 1);
            assert_eq!(o[0].deliverer, NodeId(4));
        }
    }

    #[test]
    fn cutoff_returns_earliest_full_record() {
        let mut rng = rng_from_seed(4);
        let prof = assign_roles(200, 0.2, 1.0, &mut rng).unwrap();
        let g = gen_p2p_approx_regular(200, 8, &mut rng).unwrap().with_profiles(prof).unwrap();
        let nbrs = g.undirected_neighbors();
        let origin = g.honest_nodes()[0];
        let full = diffuse(1, origin, 2.0, &nbrs, &g, 1.0, false, &mut rng_from_seed(9));
        let cut = diffuse(1, origin, 2.0, &nbrs, &g, 1.0, true, &mut rng_from_seed(9));
        let earliest = full.iter().min_by(|a, b| a.time.total_cmp(&b.time)).unwrap();
        assert_eq!(cut.len(), 1);
        assert_eq!(cut[0].time, earliest.time);
        assert!(full.iter().all(|o| g.is_honest(o.deliverer) && g.is_spy(o.spy) && o.time > 2.0));
    }
}
