use crate::adversary::Mapping;
use crate::scalar::Scalar;
use crate::topology::NodeId;

/// Per-node and averaged precision/recall.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionRecallReport<T> {
    pub nodes: Vec<NodeId>,
    pub precision: Vec<T>,
    pub recall: Vec<T>,
    pub avg_precision: T,
    pub avg_recall: T,
    pub assigned: usize,
    pub unassigned: usize,
}

/// Scores `mapping` against `truth[tx] = source` over the node set `scored`.
/// D(v) is the share of transactions mapped to `v` that `v` created (0 when
/// none map to `v`); R(v) is the share of `v`'s own transactions mapped to
/// `v`. Transactions whose accused node is outside `scored` still count
/// as assigned.
pub fn precision_recall<T: Scalar>(mapping: &Mapping, truth: &[NodeId], scored: &[NodeId]) -> PrecisionRecallReport<T> {
    let n = scored.iter().chain(truth).map(|v| v.index() + 1).max().unwrap_or(0);
    let n = mapping.iter().filter_map(|(_, a)| a).map(|v| v.index() + 1).fold(n, usize::max);
    let mut mapped_to = vec![0usize; n];
    let mut correct = vec![0usize; n];
    let mut own = vec![0usize; n];
    let mut assigned = 0;
    for (tx, acc) in mapping.iter() {
        let src = truth[tx as usize];
        own[src.index()] += 1;
        if let Some(a) = acc {
            assigned += 1;
            mapped_to[a.index()] += 1;
            if a == src {
                correct[a.index()] += 1;
            }
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { T::zero() } else { T::from_count(num) / T::from_count(den) };
    let precision: Vec<T> = scored.iter().map(|v| ratio(correct[v.index()], mapped_to[v.index()])).collect();
    let recall: Vec<T> = scored.iter().map(|v| ratio(correct[v.index()], own[v.index()])).collect();
    let mean = |xs: &[T]| {
        if xs.is_empty() {
            T::zero()
        } else {
            xs.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(xs.len())
        }
    };
    PrecisionRecallReport {
        avg_precision: mean(&precision),
        avg_recall: mean(&recall),
        nodes: scored.to_vec(),
        precision,
        recall,
        assigned,
        unassigned: mapping.tx_count() - assigned,
    }
}
