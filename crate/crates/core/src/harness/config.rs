use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::protocol::{DropPolicy, FluffTrigger, ForwardingScheme, ObservationMode};
use crate::topology::{DeploymentMode, TopologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    FirstSpy,
    Matching,
    RoutingAware,
    Intersection,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::FirstSpy => "first-spy",
            EstimatorKind::Matching => "matching",
            EstimatorKind::RoutingAware => "routing-aware",
            EstimatorKind::Intersection => "intersection",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "first-spy" | "fs" => Ok(EstimatorKind::FirstSpy),
            "matching" => Ok(EstimatorKind::Matching),
            "routing-aware" => Ok(EstimatorKind::RoutingAware),
            "intersection" | "kl" => Ok(EstimatorKind::Intersection),
            _ => Err(Error::Config(format!("unknown estimator `{s}`"))),
        }
    }

    pub fn graph_known(&self) -> bool {
        !matches!(self, EstimatorKind::FirstSpy)
    }

    pub fn routing_known(&self) -> bool {
        matches!(self, EstimatorKind::RoutingAware)
    }
}

/// How transactions are broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spreading {
    /// Stem over the anonymity graph, then diffusion.
    #[default]
    Dandelion,
    /// Diffusion straight from the source.
    Diffusion,
}

impl Spreading {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dandelion" => Ok(Spreading::Dandelion),
            "diffusion" => Ok(Spreading::Diffusion),
            _ => Err(Error::Config(format!("unknown spreading `{s}`"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Spreading::Dandelion => "dandelion",
            Spreading::Diffusion => "diffusion",
        }
    }
}

/// Everything a simulation run depends on. Serialized as flat
/// `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    /// Out-degree of the P2P graph.
    pub eta: usize,
    /// Anonymity graph degree (in + out).
    pub d: usize,
    pub p: f64,
    pub q: f64,
    /// Fraction of honest nodes running the protocol under partial deployment.
    pub beta: f64,
    /// Transactions per source.
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub topology: TopologyKind,
    /// `None` means every node runs the protocol.
    pub deployment: Option<DeploymentMode>,
    pub scheme: ForwardingScheme,
    pub estimator: EstimatorKind,
    pub observe: ObservationMode,
    pub supernode: bool,
    pub trigger: FluffTrigger,
    pub spreading: Spreading,
    /// Training walks per candidate for the intersection attack.
    pub n_train: usize,
    pub fluff_rate: f64,
    pub delta_hop: f64,
    /// Embargo mean; derived from `k` and `epsilon` when absent.
    pub t_base: Option<f64>,
    pub k: usize,
    pub epsilon: f64,
    pub drop: DropPolicy,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "run".into(),
            n: 100,
            eta: 8,
            d: 4,
            p: 0.2,
            q: 0.2,
            beta: 1.0,
            m: 1,
            trials: 10,
            seed: 1,
            topology: TopologyKind::Approx4Regular,
            deployment: None,
            scheme: ForwardingScheme::OneToOne,
            estimator: EstimatorKind::FirstSpy,
            observe: ObservationMode::FirstSpy,
            supernode: false,
            trigger: FluffTrigger::PerHopCoin,
            spreading: Spreading::Dandelion,
            n_train: 2000,
            fluff_rate: 1.0,
            delta_hop: 0.3,
            t_base: None,
            k: 10,
            epsilon: 0.1,
            drop: DropPolicy::RelayHonestly,
            out: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{v}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Sets one key. Topology names that need a degree read the current
    /// `d` / `eta`, so set those first.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "experiment" => self.experiment = v.to_string(),
            "n" => self.n = num(key, v)?,
            "eta" => self.eta = num(key, v)?,
            "d" => {
                self.d = num(key, v)?;
                if let TopologyKind::ExactRegular { .. } = self.topology {
                    self.topology = TopologyKind::ExactRegular { d: self.d };
                }
            }
            "p" => self.p = num(key, v)?,
            "q" => self.q = num(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "m" => self.m = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "topology" => self.topology = TopologyKind::parse(v, self.d, self.eta)?,
            "mode" | "deployment" => {
                self.deployment = match v {
                    "full" | "none" => None,
                    other => Some(DeploymentMode::parse(other)?),
                }
            }
            "scheme" => self.scheme = ForwardingScheme::parse(v)?,
            "estimator" => self.estimator = EstimatorKind::parse(v)?,
            "observe" => self.observe = ObservationMode::parse(v)?,
            "supernode" => self.supernode = boolean(key, v)?,
            "trigger" => {
                self.trigger = match v {
                    "coin" | "per-hop" => FluffTrigger::PerHopCoin,
                    "diffuser" | "epoch" => FluffTrigger::EpochDiffuser,
                    _ => return Err(Error::Config(format!("unknown trigger `{v}`"))),
                }
            }
            "spreading" => self.spreading = Spreading::parse(v)?,
            "n_train" => self.n_train = num(key, v)?,
            "fluff_rate" => self.fluff_rate = num(key, v)?,
            "delta_hop" => self.delta_hop = num(key, v)?,
            "t_base" => self.t_base = Some(num(key, v)?),
            "k" => self.k = num(key, v)?,
            "epsilon" => self.epsilon = num(key, v)?,
            "drop" => self.drop = DropPolicy::parse(v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse { path: path.to_path_buf(), line: i + 1, msg: format!("expected `key = value`, found `{line}`") });
            };
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        // degrees before topology so `topology = exact` picks up `d`
        pairs.sort_by_key(|(_, k, _)| k != "d" && k != "eta");
        for (line, k, v) in pairs {
            cfg.set(&k, &v).map_err(|e| Error::Parse { path: path.to_path_buf(), line, msg: e.to_string() })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("experiment", self.experiment.clone());
        kv("n", self.n.to_string());
        kv("eta", self.eta.to_string());
        kv("d", self.d.to_string());
        kv("p", self.p.to_string());
        kv("q", self.q.to_string());
        kv("beta", self.beta.to_string());
        kv("m", self.m.to_string());
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv("topology", self.topology.label());
        kv("mode", self.mode_label().to_string());
        kv("scheme", self.scheme.label().to_string());
        kv("estimator", self.estimator.label().to_string());
        kv("observe", self.observe.label().to_string());
        kv("supernode", self.supernode.to_string());
        kv(
            "trigger",
            match self.trigger {
                FluffTrigger::PerHopCoin => "coin",
                FluffTrigger::EpochDiffuser => "diffuser",
            }
            .to_string(),
        );
        kv("spreading", self.spreading.label().to_string());
        kv("n_train", self.n_train.to_string());
        kv("fluff_rate", self.fluff_rate.to_string());
        kv("delta_hop", self.delta_hop.to_string());
        if let Some(t) = self.t_base {
            kv("t_base", t.to_string());
        }
        kv("k", self.k.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("drop", self.drop.label().to_string());
        s
    }

    pub fn mode_label(&self) -> &'static str {
        self.deployment.map(|m| m.label()).unwrap_or("full")
    }

    /// Topology column of the CSV: the anonymity graph plus modifiers.
    pub fn topology_label(&self) -> String {
        let mut t = match self.deployment {
            Some(_) => format!("p2p-embedded-{}", self.d),
            None => self.topology.label(),
        };
        if self.supernode {
            t.push_str("+supernode");
        }
        t
    }

    pub fn scheme_label(&self) -> String {
        match self.spreading {
            Spreading::Dandelion => self.scheme.label().to_string(),
            Spreading::Diffusion => "diffusion".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q), ("beta", self.beta), ("epsilon", self.epsilon)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("`{name}` must lie in [0, 1], got {v}")));
            }
        }
        if self.trials == 0 || self.m == 0 {
            return Err(Error::Config("`trials` and `m` must be >= 1".into()));
        }
        if self.n < 3 {
            return Err(Error::Config(format!("`n` must be >= 3, got {}", self.n)));
        }
        if self.n <= self.eta {
            return Err(Error::Config(format!("`n` must exceed `eta` ({} <= {})", self.n, self.eta)));
        }
        if !(self.fluff_rate > 0.0 && self.delta_hop > 0.0) {
            return Err(Error::Config("`fluff_rate` and `delta_hop` must be positive".into()));
        }
        if self.estimator == EstimatorKind::RoutingAware && !self.scheme.is_pseudorandom() {
            return Err(Error::Config("routing-aware estimator needs a pseudorandom scheme".into()));
        }
        if self.estimator == EstimatorKind::Intersection && self.n_train == 0 {
            return Err(Error::Config("`n_train` must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "# sweep\nn = 50\ntopology = exact\nd = 2\np=0.15\nestimator = matching\nmode = version-checking\nsupernode = true\n";
        let cfg = ExperimentConfig::parse_text(text, Path::new("c.cfg")).unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.topology, TopologyKind::ExactRegular { d: 2 });
        assert_eq!(cfg.estimator, EstimatorKind::Matching);
        assert_eq!(cfg.deployment, Some(DeploymentMode::VersionChecking));
        assert!(cfg.supernode);
        let again = ExperimentConfig::parse_text(&cfg.to_text(), Path::new("x")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse_text("n = 5\nbogus line\n", Path::new("c")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = ExperimentConfig::parse_text("n = 5\ncolour = red\n", Path::new("c")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(err.is_config_error());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.p = 1.5;
        assert!(cfg.validate().is_err());
        cfg.p = 0.2;
        cfg.estimator = EstimatorKind::RoutingAware;
        cfg.scheme = ForwardingScheme::PerTransaction;
        assert!(cfg.validate().is_err());
    }
}
