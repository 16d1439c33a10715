use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::{EstimatorKind, ExperimentConfig, Spreading};
use crate::adversary::{
    first_spy_estimate, intersection_classify, matching_estimate, per_source_histograms, routing_aware_estimate,
    train_signatures, Mapping, ObservationLog,
};
use crate::analytics::{partial_deployment_recall_bounds, precision_recall, timer_threshold};
use crate::error::{Error, Result};
use crate::protocol::{
    black_hole_chain, diffuse, propagate, sample_epoch_routing, simulate_black_hole, FluffTrigger, ForwardingScheme,
    ObservationMode, PropagationParams, StemParams, Termination, TimerConfig, Tx,
};
use crate::seeds::{splitmix64, trial_rng, Stream};
use crate::stats::mean;
use crate::topology::{
    apply_supernode_edges, assign_roles, build_anonymity_graph, embed_partial_deployment, gen_p2p_approx_regular,
    Digraph, NodeId,
};

/// One trial's result with the config echoed, as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub experiment: String,
    pub topology: String,
    pub n: usize,
    pub eta: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub scheme: String,
    pub estimator: String,
    pub mode: String,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub aux: Vec<(String, f64)>,
}

impl TrialRow {
    fn echo(cfg: &ExperimentConfig, trial: usize) -> Self {
        TrialRow {
            experiment: cfg.experiment.clone(),
            topology: cfg.topology_label(),
            n: cfg.n,
            eta: cfg.eta,
            d: cfg.d,
            p: cfg.p,
            q: cfg.q,
            beta: cfg.beta,
            scheme: cfg.scheme_label(),
            estimator: cfg.estimator.label().to_string(),
            mode: cfg.mode_label().to_string(),
            m: cfg.m,
            trial,
            seed: cfg.seed,
            avg_precision: f64::NAN,
            avg_recall: f64::NAN,
            aux: Vec::new(),
        }
    }

    pub fn aux(&self, key: &str) -> Option<f64> {
        self.aux.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Graphs and routing of one trial.
pub struct TrialWorld {
    /// Anonymity graph, with supernode edges when enabled.
    pub h: Digraph,
    /// Undirected neighbor lists of the P2P graph; empty when nothing diffuses.
    pub g_nbrs: Vec<Vec<NodeId>>,
    pub routing: crate::protocol::EpochRouting,
}

fn needs_p2p(cfg: &ExperimentConfig) -> bool {
    cfg.deployment.is_some() || cfg.observe != ObservationMode::StemOnly || cfg.spreading == Spreading::Diffusion
}

/// Builds the graphs and routing state for `trial`. Every piece draws from
/// its own stream keyed by `(seed, trial)`, so the world does not depend
/// on `m`, the estimator or the observation mode.
pub fn build_world(cfg: &ExperimentConfig, trial: usize) -> Result<TrialWorld> {
    let t = trial as u64;
    let beta = if cfg.deployment.is_some() { cfg.beta } else { 1.0 };
    let roles = assign_roles(cfg.n, cfg.p, beta, &mut trial_rng(cfg.seed, t, Stream::Roles))?;
    let g = if needs_p2p(cfg) {
        Some(gen_p2p_approx_regular(cfg.n, cfg.eta, &mut trial_rng(cfg.seed, t, Stream::P2pGraph))?.with_profiles(roles.clone())?)
    } else {
        None
    };
    let mut rng = trial_rng(cfg.seed, t, Stream::AnonymityGraph);
    let mut h = match (cfg.deployment, &g) {
        (Some(mode), Some(g)) => embed_partial_deployment(g, mode, cfg.d, &mut rng)?,
        _ => build_anonymity_graph(cfg.topology, &roles, &mut rng)?,
    };
    let mut g = g;
    if cfg.supernode {
        h = apply_supernode_edges(&h);
        g = g.map(|g| apply_supernode_edges(&g));
    }
    let mut routing = sample_epoch_routing(&h, cfg.scheme, t, &mut trial_rng(cfg.seed, t, Stream::Routing))?;
    if cfg.trigger == FluffTrigger::EpochDiffuser {
        routing = routing.with_diffusers(cfg.q, splitmix64(cfg.seed ^ t));
    }
    let g_nbrs = g.map(|g| g.undirected_neighbors()).unwrap_or_default();
    Ok(TrialWorld { h, g_nbrs, routing })
}

/// Runs every trial of `cfg`. Trials execute in parallel; rows come back
/// ordered by trial index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    cfg.validate()?;
    let mut rows: Vec<TrialRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t).map_err(|e| e.context(format!("experiment `{}` trial {t}", cfg.experiment))))
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.trial);
    Ok(rows)
}

/// Runs a single trial.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialRow> {
    let world = build_world(cfg, trial)?;
    let h = &world.h;
    let t = trial as u64;

    let sources: Vec<NodeId> = h.nodes().filter(|&v| h.is_honest(v) && (cfg.deployment.is_none() || h.supports_protocol(v))).collect();
    let tx_count = sources.len() * cfg.m;
    let mut ids: Vec<u32> = (0..tx_count as u32).collect();
    ids.shuffle(&mut trial_rng(cfg.seed, t, Stream::Transactions));
    let mut truth = vec![NodeId(0); tx_count];
    let mut txs = Vec::with_capacity(tx_count);
    for (i, &v) in sources.iter().enumerate() {
        for j in 0..cfg.m {
            let tx_id = ids[i * cfg.m + j];
            truth[tx_id as usize] = v;
            txs.push(Tx { tx_id, source: v, source_seq: j as u32, created_at: 0.0 });
        }
    }
    txs.sort_by_key(|tx| tx.tx_id);

    let params = PropagationParams {
        stem: StemParams { q: cfg.q, trigger: cfg.trigger, stop_at_spy: true, delta_hop: cfg.delta_hop },
        fluff_rate: cfg.fluff_rate,
        mode: cfg.observe,
    };
    let mut rng = trial_rng(cfg.seed, t, Stream::Propagation);
    let mut records = Vec::new();
    let mut stem_lengths = Vec::with_capacity(tx_count);
    let mut loops = 0usize;
    for tx in &txs {
        match cfg.spreading {
            Spreading::Dandelion => {
                let prop = propagate(tx, h, &world.g_nbrs, &world.routing, &params, &mut rng);
                stem_lengths.push(prop.stem.stem_length() as f64);
                loops += usize::from(prop.stem.termination == Termination::LoopDetected);
                records.extend(prop.observations);
            }
            Spreading::Diffusion => {
                let cutoff = cfg.observe != ObservationMode::Full;
                records.extend(diffuse(tx.tx_id, tx.source, tx.created_at, &world.g_nbrs, h, cfg.fluff_rate, cutoff, &mut rng));
            }
        }
    }
    let log = ObservationLog::from_records(records).with_knowledge(cfg.estimator.graph_known(), cfg.estimator.routing_known());
    let observed = log.first_records(tx_count).iter().filter(|r| r.is_some()).count();

    let mut row = TrialRow::echo(cfg, trial);
    let mapping = match cfg.estimator {
        EstimatorKind::FirstSpy => first_spy_estimate(&log, tx_count),
        EstimatorKind::Matching => matching_estimate(&log, tx_count, h, cfg.q)?,
        EstimatorKind::RoutingAware => routing_aware_estimate(&log, tx_count, h, &world.routing, cfg.q)?,
        EstimatorKind::Intersection => {
            let (mapping, accuracy, random) = intersection_mapping(cfg, h, &log, &truth, t);
            row.aux.push(("intersection_recall".into(), accuracy));
            row.aux.push(("random_accusation_fraction".into(), random));
            mapping
        }
    };
    let report = precision_recall::<f64>(&mapping, &truth, &sources);
    row.avg_precision = report.avg_precision;
    row.avg_recall = report.avg_recall;
    if cfg.spreading == Spreading::Dandelion {
        row.aux.push(("stem_length_mean".into(), mean(&stem_lengths)));
        row.aux.push(("loop_fraction".into(), loops as f64 / tx_count.max(1) as f64));
    }
    row.aux.push(("observed_fraction".into(), observed as f64 / tx_count.max(1) as f64));
    if let Some(mode) = cfg.deployment {
        // bound columns make the CSV self-contained for bound-band plots
        let b = partial_deployment_recall_bounds::<f64>(cfg.n, cfg.p, cfg.beta, cfg.q, cfg.eta, mode)?;
        row.aux.push(("recall_lower".into(), b.lower));
        row.aux.push(("recall_upper_finite".into(), b.upper_finite.value));
        row.aux.push(("recall_upper_asymptotic".into(), b.upper_asymptotic.value));
    }
    Ok(row)
}

/// Trains signatures on the true graph, classifies each source's first-spy
/// histogram and maps all its transactions to the accused node. Sources
/// with nothing observed are accused at random by the classifier but left
/// unassigned in the mapping, so they score zero recall. Returns
/// the mapping, the fraction of sources classified correctly and the
/// fraction accused at random.
fn intersection_mapping(
    cfg: &ExperimentConfig,
    h: &Digraph,
    log: &ObservationLog,
    truth: &[NodeId],
    t: u64,
) -> (Mapping, f64, f64) {
    let table = train_signatures(h, cfg.q, cfg.scheme, cfg.n_train, splitmix64(cfg.seed ^ splitmix64(t)));
    let hists = per_source_histograms(log, truth);
    let mut rng = trial_rng(cfg.seed, t, Stream::Estimator);
    let mut accused = std::collections::BTreeMap::new();
    let (mut correct, mut random) = (0usize, 0usize);
    for (&v, hist) in &hists {
        let acc = intersection_classify(hist, &table, &mut rng);
        correct += usize::from(acc.node == v);
        random += usize::from(acc.random);
        accused.insert(v, (!acc.random).then_some(acc.node));
    }
    let mapping = Mapping::from_vec(truth.iter().map(|v| accused[v]).collect());
    let k = hists.len().max(1) as f64;
    (mapping, correct as f64 / k, random as f64 / k)
}

/// Embargo mean used by the black-hole experiment: the configured value or
/// the smallest mean that keeps premature diffusion below `epsilon`.
pub fn black_hole_t_base(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.t_base {
        Some(t) => Ok(t),
        None => timer_threshold(cfg.k, cfg.delta_hop, cfg.epsilon),
    }
}

/// Black-hole runs on a chain of `k` honest relays ending at a spy. The
/// stem never fluffs by coin (q is forced to 0), so only the embargo timers
/// end it. One row per trial; precision and recall are not applicable.
pub fn run_blackhole(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    cfg.validate()?;
    let t_base = black_hole_t_base(cfg)?;
    let timers = TimerConfig::new(t_base, cfg.delta_hop)?;
    let h = black_hole_chain(cfg.k)?;
    let stem = StemParams { q: 0.0, trigger: FluffTrigger::PerHopCoin, stop_at_spy: true, delta_hop: cfg.delta_hop };
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let t = trial as u64;
            let routing = sample_epoch_routing(&h, ForwardingScheme::PerTransaction, t, &mut trial_rng(cfg.seed, t, Stream::Routing))?;
            let tx = Tx { tx_id: 0, source: NodeId(0), source_seq: 0, created_at: 0.0 };
            let o = simulate_black_hole(&tx, &h, &routing, &stem, &timers, cfg.drop, &mut trial_rng(cfg.seed, t, Stream::Timers));
            let mut row = TrialRow::echo(cfg, trial);
            row.topology = format!("chain-{}", cfg.k);
            row.scheme = cfg.drop.label().to_string();
            row.aux = vec![
                ("t_base".into(), t_base),
                ("premature".into(), f64::from(u8::from(o.premature))),
                ("extra_delay".into(), o.extra_delay),
                ("relay_index".into(), o.relay_index as f64),
                ("diffused".into(), f64::from(u8::from(o.diffused))),
                ("elapsed".into(), o.elapsed),
            ];
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e: Error| e.context(format!("experiment `{}`", cfg.experiment)))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::DropPolicy;
    use crate::topology::TopologyKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig { n: 60, trials: 4, ..ExperimentConfig::default() }
    }

    #[test]
    fn no_spies_no_recall() {
        for est in [EstimatorKind::FirstSpy, EstimatorKind::Matching, EstimatorKind::Intersection] {
            let cfg = ExperimentConfig { p: 0.0, trials: 1, estimator: est, n_train: 10, ..small() };
            let rows = run_experiment(&cfg).unwrap();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].avg_recall, 0.0, "{est:?}");
        }
    }

    #[test]
    fn deterministic_and_ordered() {
        let cfg = ExperimentConfig { trials: 6, estimator: EstimatorKind::Matching, ..small() };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, r)| r.trial == i));
    }

    #[test]
    fn world_independent_of_m() {
        let cfg = small();
        let a = build_world(&cfg, 2).unwrap();
        let b = build_world(&ExperimentConfig { m: 5, ..cfg }, 2).unwrap();
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn every_estimator_runs() {
        for (est, scheme) in [
            (EstimatorKind::FirstSpy, ForwardingScheme::PerTransaction),
            (EstimatorKind::Matching, ForwardingScheme::OneToOne),
            (EstimatorKind::RoutingAware, ForwardingScheme::OneToOne),
            (EstimatorKind::Intersection, ForwardingScheme::PerTransaction),
        ] {
            let cfg = ExperimentConfig { estimator: est, scheme, m: 2, n_train: 50, trials: 2, ..small() };
            for r in run_experiment(&cfg).unwrap() {
                assert!((0.0..=1.0).contains(&r.avg_precision) && (0.0..=1.0).contains(&r.avg_recall));
                assert!(r.aux("stem_length_mean").unwrap() >= 1.0);
            }
        }
    }

    #[test]
    fn partial_deployment_and_supernode() {
        let cfg = ExperimentConfig {
            n: 80,
            deployment: Some(crate::topology::DeploymentMode::VersionChecking),
            beta: 0.5,
            supernode: true,
            ..small()
        };
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows[0].topology, "p2p-embedded-4+supernode");
        assert_eq!(rows[0].mode, "version-checking");
    }

    #[test]
    fn diffusion_baseline_and_line() {
        let cfg = ExperimentConfig { spreading: Spreading::Diffusion, topology: TopologyKind::LineCycle, ..small() };
        let rows = run_experiment(&cfg).unwrap();
        assert!(rows[0].aux("stem_length_mean").is_none());
        assert_eq!(rows[0].scheme, "diffusion");
    }

    #[test]
    fn blackhole_rows() {
        let cfg = ExperimentConfig { experiment: "bh".into(), trials: 50, drop: DropPolicy::DropAll, ..small() };
        let rows = run_blackhole(&cfg).unwrap();
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|r| r.aux("diffused") == Some(1.0)));
        assert!(rows.iter().all(|r| r.aux("relay_index").unwrap() < 10.0));
    }

    #[test]
    fn config_errors_carry_context() {
        let cfg = ExperimentConfig { p: 2.0, ..small() };
        assert!(run_experiment(&cfg).unwrap_err().is_config_error());
    }
}
