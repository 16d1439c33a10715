//! `dandelion` command-line front end.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dandelion_core::analytics::{bounds_report, BoundsParams};
use dandelion_core::harness::{run_blackhole, run_experiment, run_preset, serialize_graph, write_csv, write_csv_to, ExperimentConfig};
use dandelion_core::seeds::{trial_rng, Stream};
use dandelion_core::topology::{assign_roles, build_anonymity_graph};
use dandelion_core::{BoundsReport, Error, Result};

#[derive(Parser)]
#[command(name = "dandelion", version, about = "Simulate stem/fluff transaction broadcast and evaluate anonymity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an anonymity graph as an edge list plus a roles file.
    GenGraph(Common),
    /// Run one experiment and write its CSV.
    Run(Common),
    /// Run a named preset sweep (content name or figure alias).
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the closed-form bounds as `name,value` lines.
    Bounds(Common),
}

#[derive(Args, Default)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    estimator: Option<String>,
    /// full, version-checking or no-version-checking.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    supernode: bool,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (a file path for `gen-graph`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    /// Flag overrides in application order; degrees precede topology.
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut v = Vec::new();
        let named = [
            ("d", &self.d),
            ("eta", &self.eta),
            ("n", &self.n),
            ("p", &self.p),
            ("q", &self.q),
            ("beta", &self.beta),
            ("m", &self.m),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("topology", &self.topology),
            ("scheme", &self.scheme),
            ("estimator", &self.estimator),
            ("mode", &self.mode),
        ];
        for (k, val) in named {
            if let Some(x) = val {
                v.push((k.to_string(), x.clone()));
            }
        }
        if self.supernode {
            v.push(("supernode".into(), "true".into()));
        }
        for kv in &self.set {
            let (k, x) = kv.split_once('=').ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{kv}`")))?;
            v.push((k.trim().to_string(), x.trim().to_string()));
        }
        Ok(v)
    }

    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for (k, v) in self.overrides()? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }
}

fn gen_graph(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let out = common.out.as_deref().ok_or_else(|| Error::Config("gen-graph needs --out PATH".into()))?;
    let roles = assign_roles(cfg.n, cfg.p, cfg.beta, &mut trial_rng(cfg.seed, 0, Stream::Roles))?;
    let h = build_anonymity_graph(cfg.topology, &roles, &mut trial_rng(cfg.seed, 0, Stream::AnonymityGraph))?;
    serialize_graph(&h, out)
}

fn run(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let rows = if matches!(cfg.experiment.as_str(), "blackhole" | "black-hole") {
        run_blackhole(&cfg)?
    } else {
        run_experiment(&cfg)?
    };
    match common.out.as_deref().or(cfg.out.as_deref()) {
        Some(dir) => {
            let path = dir.join(format!("{}.csv", cfg.experiment));
            write_csv(&rows, &path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv_to(&rows, io::stdout().lock()).map_err(|source| Error::Csv { path: "<stdout>".into(), source })?,
    }
    Ok(())
}

fn preset(name: &str, common: &Common) -> Result<()> {
    let mut overrides = Vec::new();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        // validate the file, then feed its keys through as overrides
        ExperimentConfig::parse_text(&text, path)?;
        for line in text.lines() {
            if let Some((k, v)) = line.split('#').next().unwrap_or("").split_once('=') {
                overrides.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    overrides.extend(common.overrides()?);
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let res = run_preset(name, &overrides, &out)?;
    for f in &res.csv_files {
        eprintln!("wrote {}", f.display());
    }
    eprintln!("wrote {}", res.manifest.display());
    Ok(())
}

fn bounds(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let params = BoundsParams {
        n: cfg.n,
        eta: cfg.eta,
        p: cfg.p,
        q: cfg.q,
        beta: cfg.beta,
        k: cfg.k,
        epsilon: cfg.epsilon,
        delta_hop: cfg.delta_hop,
    };
    let report: BoundsReport = bounds_report(&params)?;
    let mut out = io::stdout().lock();
    let w = |out: &mut io::StdoutLock, line: String| out.write_all(line.as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e });
    w(&mut out, "name,value\n".into())?;
    for e in &report.entries {
        w(&mut out, format!("{},{:.6}\n", e.name, e.value))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::GenGraph(c) => gen_graph(c),
        Command::Run(c) => run(c),
        Command::Preset { name, common } => preset(name, common),
        Command::Bounds(c) => bounds(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}

