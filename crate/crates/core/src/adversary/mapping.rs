use super::log::ObservationLog;
use crate::topology::NodeId;

/// Estimator output: the accused node per transaction id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    assignment: Vec<Option<NodeId>>,
}

impl Mapping {
    pub fn unassigned(tx_count: usize) -> Self {
        Mapping { assignment: vec![None; tx_count] }
    }

    pub fn from_vec(assignment: Vec<Option<NodeId>>) -> Self {
        Mapping { assignment }
    }

    pub fn tx_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn get(&self, tx_id: u32) -> Option<NodeId> {
        self.assignment[tx_id as usize]
    }

    pub fn assign(&mut self, tx_id: u32, v: NodeId) {
        self.assignment[tx_id as usize] = Some(v);
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().flatten().count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Option<NodeId>)> + '_ {
        self.assignment.iter().enumerate().map(|(i, &a)| (i as u32, a))
    }
}

/// Accuses the deliverer of each transaction's earliest record.
pub fn first_spy_estimate(log: &ObservationLog, tx_count: usize) -> Mapping {
    Mapping::from_vec(log.first_records(tx_count).into_iter().map(|r| r.map(|o| o.deliverer)).collect())
}
