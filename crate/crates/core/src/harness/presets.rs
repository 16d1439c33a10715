use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::csv_io::write_csv;
use super::run::{run_blackhole, run_experiment, TrialRow};
use crate::error::{Error, Result};

const P_GRID: &str = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
const BETA_GRID: &str = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";

/// A named sweep. `file_axis` splits the output into one CSV per value;
/// `axes` are swept inside each file.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub alias: &'static str,
    pub description: &'static str,
    pub base: &'static [(&'static str, &'static str)],
    pub file_axis: (&'static str, &'static str),
    pub axes: &'static [(&'static str, &'static str)],
    /// Rough single-laptop wall-clock budget.
    pub budget: &'static str,
    blackhole: bool,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "graph-knowledge-precision",
        alias: "fig4",
        description: "precision vs p on random d-regular graphs, first-spy (unknown graph) and matching (known graph)",
        base: &[("n", "50"), ("q", "0"), ("scheme", "per-transaction"), ("observe", "stem-only"), ("topology", "exact"), ("trials", "400")],
        file_axis: ("d", "2,4,6"),
        axes: &[("estimator", "first-spy,matching"), ("p", P_GRID)],
        budget: "2 min",
        blackhole: false,
    },
    Preset {
        name: "forwarding-scheme-precision",
        alias: "fig5",
        description: "first-spy precision vs p on exact 4-regular graphs under each forwarding scheme",
        base: &[("n", "1000"), ("q", "0"), ("observe", "stem-only"), ("topology", "exact-4-regular"), ("trials", "40")],
        file_axis: ("scheme", "per-transaction,one-to-one,all-to-one,per-incoming-edge"),
        axes: &[("p", P_GRID)],
        budget: "2 min",
        blackhole: false,
    },
    Preset {
        name: "intersection-attack-recall",
        alias: "fig6",
        description: "intersection-attack recall vs transactions per node on exact 4-regular graphs",
        base: &[
            ("n", "1000"),
            ("q", "0"),
            ("observe", "stem-only"),
            ("topology", "exact-4-regular"),
            ("estimator", "intersection"),
            ("n_train", "2000"),
            ("trials", "8"),
        ],
        file_axis: ("scheme", "per-transaction,one-to-one"),
        axes: &[("p", "0.1,0.2,0.3"), ("m", "1,2,3,5,10")],
        budget: "20 min",
        blackhole: false,
    },
    Preset {
        name: "approx-vs-exact-precision",
        alias: "fig7",
        description: "matching and first-spy precision on approximate vs exact 4-regular graphs",
        base: &[("n", "100"), ("q", "0"), ("scheme", "per-transaction"), ("observe", "stem-only"), ("trials", "400")],
        file_axis: ("estimator", "matching,first-spy"),
        axes: &[("topology", "approx-4-regular,exact-4-regular"), ("p", P_GRID)],
        budget: "3 min",
        blackhole: false,
    },
    Preset {
        name: "supernode-protocol-following",
        alias: "fig8",
        description: "first-spy precision vs p for several q when spies follow the graph construction",
        base: &[("n", "500"), ("topology", "approx-4-regular"), ("scheme", "one-to-one"), ("trials", "40")],
        file_axis: ("q", "0,0.1,0.2,0.3,0.5"),
        axes: &[("p", P_GRID)],
        budget: "3 min",
        blackhole: false,
    },
    Preset {
        name: "supernode-malicious",
        alias: "fig8m",
        description: "first-spy precision vs p for several q when spies connect to every honest node",
        base: &[("n", "500"), ("topology", "approx-4-regular"), ("scheme", "one-to-one"), ("supernode", "true"), ("trials", "40")],
        file_axis: ("q", "0,0.1,0.2,0.3,0.5"),
        axes: &[("p", P_GRID)],
        budget: "5 min",
        blackhole: false,
    },
    Preset {
        name: "partial-deployment-recall",
        alias: "fig9",
        description: "first-spy recall vs support fraction beta with analytic bound columns, p = q = 0.2",
        base: &[("n", "1000"), ("p", "0.2"), ("q", "0.2"), ("eta", "8"), ("d", "4"), ("scheme", "one-to-one"), ("trials", "20")],
        file_axis: ("mode", "version-checking,no-version-checking"),
        axes: &[("beta", BETA_GRID)],
        budget: "3 min",
        blackhole: false,
    },
    Preset {
        name: "black-hole-failsafe",
        alias: "blackhole",
        description: "premature diffusion and extra delay vs epsilon on a k-relay chain ending at a dropping spy",
        base: &[("drop", "drop-all"), ("delta_hop", "0.3"), ("trials", "10000")],
        file_axis: ("k", "5,10"),
        axes: &[("epsilon", "0.01,0.02,0.05,0.1,0.2")],
        budget: "1 min",
        blackhole: true,
    },
    Preset {
        name: "topology-tradeoffs",
        alias: "tradeoff-appC",
        description: "one-to-one precision vs p by adversary knowledge on line, exact and approximate 4-regular graphs",
        base: &[("n", "100"), ("q", "0.2"), ("scheme", "one-to-one"), ("trials", "200")],
        file_axis: ("topology", "line,exact-4-regular,approx-4-regular"),
        axes: &[("estimator", "first-spy,matching,routing-aware"), ("p", P_GRID)],
        budget: "5 min",
        blackhole: false,
    },
];

pub fn find_preset(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name || p.alias == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Files written by a preset run.
#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub csv_files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn split(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).collect()
}

impl Preset {
    /// Grid for `key`, collapsed to a single point when overridden.
    fn grid(&self, key: &str, values: &str, overrides: &[(String, String)]) -> Vec<String> {
        match overrides.iter().rev().find(|(k, _)| k == key) {
            Some((_, v)) => vec![v.clone()],
            None => split(values),
        }
    }

    fn base_config(&self, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig { experiment: self.name.to_string(), ..ExperimentConfig::default() };
        // degrees first so `topology = exact` sees the right `d`
        let mut settings: Vec<(&str, &str)> = self.base.to_vec();
        settings.extend(overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())));
        settings.sort_by_key(|(k, _)| *k != "d" && *k != "eta");
        for (k, v) in settings {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// All configs of one output file, in sweep order.
    pub fn configs(&self, overrides: &[(String, String)]) -> Result<Vec<(String, Vec<ExperimentConfig>)>> {
        let base = self.base_config(overrides)?;
        let mut files = Vec::new();
        for fv in self.grid(self.file_axis.0, self.file_axis.1, overrides) {
            let mut cfgs = vec![base.clone()];
            for c in &mut cfgs {
                c.set(self.file_axis.0, &fv)?;
            }
            for &(key, values) in self.axes {
                let grid = self.grid(key, values, overrides);
                let mut next = Vec::with_capacity(cfgs.len() * grid.len());
                for c in &cfgs {
                    for v in &grid {
                        let mut c = c.clone();
                        c.set(key, v)?;
                        next.push(c);
                    }
                }
                cfgs = next;
            }
            files.push((format!("{}_{}-{}.csv", self.name, self.file_axis.0, fv), cfgs));
        }
        Ok(files)
    }

    pub fn manifest_text(&self, base: &ExperimentConfig, files: &[PathBuf]) -> String {
        let mut s = String::new();
        s.push_str(&format!("preset = {}\nalias = {}\ndescription = {}\n", self.name, self.alias, self.description));
        s.push_str(&format!("file_axis = {} : {}\n", self.file_axis.0, self.file_axis.1));
        for (k, v) in self.axes {
            s.push_str(&format!("axis = {k} : {v}\n"));
        }
        s.push_str(&format!("trials = {}\nbudget = {}\n", base.trials, self.budget));
        for f in files {
            s.push_str(&format!("file = {}\n", f.file_name().and_then(|x| x.to_str()).unwrap_or_default()));
        }
        s.push_str("# base configuration\n");
        for line in base.to_text().lines() {
            s.push_str(&format!("# {line}\n"));
        }
        s
    }
}

/// Runs every config of one file and concatenates the rows.
pub fn run_configs(cfgs: &[ExperimentConfig], blackhole: bool) -> Result<Vec<TrialRow>> {
    let mut rows = Vec::new();
    for c in cfgs {
        rows.extend(if blackhole { run_blackhole(c)? } else { run_experiment(c)? });
    }
    Ok(rows)
}

/// Runs a preset by content name or figure alias. `overrides` are applied
/// on top of the preset's base settings; overriding a swept key pins that
/// axis to the given value.
pub fn run_preset(name: &str, overrides: &[(String, String)], out_dir: &Path) -> Result<PresetOutput> {
    let preset = find_preset(name)?;
    let files = preset.configs(overrides)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut csv_files = Vec::new();
    for (file, cfgs) in &files {
        let rows = run_configs(cfgs, preset.blackhole)?;
        let path = out_dir.join(file);
        write_csv(&rows, &path)?;
        csv_files.push(path);
    }
    let manifest = out_dir.join(format!("{}.manifest", preset.name));
    let text = preset.manifest_text(&preset.base_config(overrides)?, &csv_files);
    fs::write(&manifest, text).map_err(|e| Error::io(&manifest, e))?;
    Ok(PresetOutput { csv_files, manifest })
}
