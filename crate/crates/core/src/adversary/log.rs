use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Stem,
    Fluff,
}

/// One delivery of a transaction from an honest node to a spy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tx_id: u32,
    pub deliverer: NodeId,
    pub spy: NodeId,
    pub time: f64,
    pub phase: Phase,
}

/// The adversary's view of a trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationLog {
    records: Vec<Observation>,
    pub graph_known: bool,
    pub routing_known: bool,
}

impl ObservationLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(mut records: Vec<Observation>) -> Self {
        sort_records(&mut records);
        ObservationLog { records, ..Self::default() }
    }

    pub fn with_knowledge(mut self, graph_known: bool, routing_known: bool) -> Self {
        self.graph_known = graph_known;
        self.routing_known = routing_known;
        self
    }

    pub fn extend(&mut self, obs: impl IntoIterator<Item = Observation>) {
        self.records.extend(obs);
        sort_records(&mut self.records);
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Earliest record per transaction id in `0..tx_count`. Ties in time go
    /// to the lowest deliverer index.
    pub fn first_records(&self, tx_count: usize) -> Vec<Option<Observation>> {
        let mut first: Vec<Option<Observation>> = vec![None; tx_count];
        for r in &self.records {
            let slot = &mut first[r.tx_id as usize];
            match slot {
                Some(cur) if (cur.time, cur.deliverer) <= (r.time, r.deliverer) => {}
                _ => *slot = Some(*r),
            }
        }
        first
    }
}

fn sort_records(records: &mut [Observation]) {
    records.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.tx_id.cmp(&b.tx_id))
            .then(a.phase.cmp(&b.phase))
            .then(a.deliverer.cmp(&b.deliverer))
            .then(a.spy.cmp(&b.spy))
    });
}
