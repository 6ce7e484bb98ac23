//! Flat `key=value` run configuration.
//!
//! Every key doubles as a command-line flag of the same name. Values from the
//! command line replace values from the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::{EstimatorConfig, RepresentationMode};
use crate::error::{Error, Result};
use crate::likelihood::NoiseModel;
use crate::postprocess::FilterOptions;
use crate::simulator::SchemeKind;

pub type ConfigMap = BTreeMap<String, String>;

/// Recognised keys, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "truth",
    "phases",
    "weights",
    "truth-count",
    "num-dists",
    "mode",
    "n-max",
    "epsilon",
    "init-sigma",
    "scheme",
    "k-list",
    "c-max",
    "k-max",
    "rounds",
    "noise",
    "k-err",
    "readout-p",
    "trials",
    "iterations",
    "seed",
    "weight-schedule-T",
    "reference-iteration",
    "snapshots-per-decade",
    "log-every-iteration",
    "weight-threshold",
    "tv-window",
    "tv-threshold",
    "tau",
    "success-tol",
    "threads",
    "out",
];

/// How ground-truth instances are produced for each trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthSpec {
    Explicit { phases: Vec<f64>, weights: Vec<f64> },
    /// Phases `[2, 4, 5]` at 90% weight plus `count` random phases sharing 10%.
    Spurious { count: usize },
    /// `count` phases on the `π/12 + iπ/6` grid, perturbed by up to 0.05.
    Grid { count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub estimator: EstimatorConfig,
    pub truth: TruthSpec,
    pub trials: usize,
    pub out: PathBuf,
    /// Iteration whose snapshot fixes the estimate-to-truth assignment.
    /// `None` uses the final snapshot.
    pub reference_iteration: Option<usize>,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
    pub filter: FilterOptions,
    pub success_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            truth: TruthSpec::Explicit {
                phases: vec![2.0, 4.0, 5.0],
                weights: vec![0.5, 0.3, 0.2],
            },
            trials: 1,
            out: PathBuf::from("bqpe-out"),
            reference_iteration: None,
            threads: 0,
            filter: FilterOptions::default(),
            success_tol: 0.005,
        }
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// underscores in keys are read as dashes.
pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", n + 1)))?;
        let key = normalize_key(key.trim());
        check_key(&key)?;
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn normalize_key(key: &str) -> String {
    key.replace('_', "-")
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown key {key:?}")))
    }
}

/// Applies `overrides` on top of `base`.
pub fn merge(mut base: ConfigMap, overrides: ConfigMap) -> Result<ConfigMap> {
    for (k, v) in overrides {
        let k = normalize_key(&k);
        check_key(&k)?;
        base.insert(k, v);
    }
    Ok(base)
}

fn get<T: FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("{key}={v:?}: {e}"))))
        .transpose()
}

fn get_list<T: FromStr>(map: &ConfigMap, key: &str) -> Result<Option<Vec<T>>>
where
    T::Err: Display,
{
    map.get(key)
        .map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("{key}={v:?}: {e}"))))
                .collect()
        })
        .transpose()
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        for key in map.keys() {
            check_key(key)?;
        }
        let d = RunConfig::default();
        let de = &d.estimator;

        let truth = match map.get("truth").map(String::as_str).unwrap_or("explicit") {
            "explicit" => {
                let phases = get_list::<f64>(map, "phases")?.unwrap_or_else(|| vec![2.0, 4.0, 5.0]);
                let weights = match get_list::<f64>(map, "weights")? {
                    Some(w) => w,
                    None if map.contains_key("phases") => vec![1.0 / phases.len() as f64; phases.len()],
                    None => vec![0.5, 0.3, 0.2],
                };
                if phases.is_empty() || phases.len() != weights.len() {
                    return Err(Error::Config(format!(
                        "{} phases but {} weights",
                        phases.len(),
                        weights.len()
                    )));
                }
                TruthSpec::Explicit { phases, weights }
            }
            "spurious" => TruthSpec::Spurious {
                count: get(map, "truth-count")?.unwrap_or(2),
            },
            "grid" => {
                let count = get(map, "truth-count")?.unwrap_or(3);
                if !(1..=12).contains(&count) {
                    return Err(Error::Config(format!("grid truth needs 1..=12 phases, got {count}")));
                }
                TruthSpec::Grid { count }
            }
            other => return Err(Error::Config(format!("unknown truth generator {other:?}"))),
        };

        let mode = match map.get("mode").map(String::as_str).unwrap_or("mixed") {
            "fourier" => RepresentationMode::FourierOnly,
            "normal" => RepresentationMode::NormalOnly,
            "mixed" => RepresentationMode::Mixed,
            other => return Err(Error::Config(format!("unknown mode {other:?}"))),
        };

        let scheme = match map.get("scheme").map(String::as_str).unwrap_or("fixed") {
            "fixed" => SchemeKind::Fixed {
                k: get_list(map, "k-list")?.unwrap_or_else(|| vec![1, 2, 5]),
            },
            "cyclic" => SchemeKind::Cyclic {
                c_max: get(map, "c-max")?.unwrap_or(20),
            },
            "adaptive" => SchemeKind::Adaptive {
                k_max: get(map, "k-max")?.unwrap_or(4096),
            },
            "adaptive-cyclic" => SchemeKind::AdaptiveCyclic {
                k_max: get(map, "k-max")?.unwrap_or(4096),
            },
            "qft" => SchemeKind::Qft {
                rounds: get(map, "rounds")?.unwrap_or(5),
            },
            other => return Err(Error::Config(format!("unknown scheme {other:?}"))),
        };

        let noise = match map.get("noise").map(String::as_str).unwrap_or("ideal") {
            "ideal" => NoiseModel::Ideal,
            "depolarizing" => NoiseModel::Depolarizing {
                k_err: get(map, "k-err")?.ok_or_else(|| Error::Config("depolarizing noise needs k-err".into()))?,
            },
            "readout" => NoiseModel::ReadOut {
                p: get(map, "readout-p")?.ok_or_else(|| Error::Config("readout noise needs readout-p".into()))?,
            },
            other => return Err(Error::Config(format!("unknown noise model {other:?}"))),
        };

        let estimator = EstimatorConfig {
            num_distributions: get(map, "num-dists")?.unwrap_or(de.num_distributions),
            n_max: get(map, "n-max")?.unwrap_or(de.n_max),
            epsilon: get(map, "epsilon")?.unwrap_or(de.epsilon),
            mode,
            scheme,
            noise,
            schedule_t: get(map, "weight-schedule-T")?.unwrap_or(de.schedule_t),
            init_sigma: get(map, "init-sigma")?.unwrap_or(de.init_sigma),
            iterations: get(map, "iterations")?.unwrap_or(de.iterations),
            seed: get(map, "seed")?.unwrap_or(de.seed),
            solver: de.solver,
            snapshots_per_decade: get(map, "snapshots-per-decade")?.unwrap_or(de.snapshots_per_decade),
            log_every_iteration: get(map, "log-every-iteration")?.unwrap_or(de.log_every_iteration),
        };

        let filter = FilterOptions {
            weight_threshold: get(map, "weight-threshold")?.unwrap_or(d.filter.weight_threshold),
            tv_window: get(map, "tv-window")?.unwrap_or(d.filter.tv_window),
            tv_threshold: get(map, "tv-threshold")?.unwrap_or(d.filter.tv_threshold),
            tau: get(map, "tau")?.unwrap_or(d.filter.tau),
        };

        let cfg = RunConfig {
            estimator,
            truth,
            trials: get(map, "trials")?.unwrap_or(d.trials),
            out: get::<PathBuf>(map, "out")?.unwrap_or(d.out),
            reference_iteration: get(map, "reference-iteration")?,
            threads: get(map, "threads")?.unwrap_or(d.threads),
            filter,
            success_tol: get(map, "success-tol")?.unwrap_or(d.success_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.filter.tv_window < 2 {
            return Err(Error::Config("tv-window must be at least 2".into()));
        }
        if let TruthSpec::Explicit { phases, weights } = &self.truth {
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|&w| !(w >= 0.0)) || !(total > 0.0) || !total.is_finite() {
                return Err(Error::Config(format!("truth weights {weights:?} cannot be normalized")));
            }
            if phases.iter().any(|p| !p.is_finite()) {
                return Err(Error::Config("truth phases must be finite".into()));
            }
        }
        Ok(())
    }

    /// Canonical key=value form. `threads` and `out` are left out so the echo
    /// does not depend on where or how wide a run happened.
    pub fn to_map(&self) -> ConfigMap {
        let e = &self.estimator;
        let mut m = ConfigMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match &self.truth {
            TruthSpec::Explicit { phases, weights } => {
                put("truth", "explicit".into());
                put("phases", join(phases));
                put("weights", join(weights));
            }
            TruthSpec::Spurious { count } => {
                put("truth", "spurious".into());
                put("truth-count", count.to_string());
            }
            TruthSpec::Grid { count } => {
                put("truth", "grid".into());
                put("truth-count", count.to_string());
            }
        }
        put("num-dists", e.num_distributions.to_string());
        put(
            "mode",
            match e.mode {
                RepresentationMode::FourierOnly => "fourier",
                RepresentationMode::NormalOnly => "normal",
                RepresentationMode::Mixed => "mixed",
            }
            .into(),
        );
        put("n-max", e.n_max.to_string());
        put("epsilon", e.epsilon.to_string());
        put("init-sigma", e.init_sigma.to_string());
        match &e.scheme {
            SchemeKind::Fixed { k } => {
                put("scheme", "fixed".into());
                put("k-list", join(k));
            }
            SchemeKind::Cyclic { c_max } => {
                put("scheme", "cyclic".into());
                put("c-max", c_max.to_string());
            }
            SchemeKind::Adaptive { k_max } => {
                put("scheme", "adaptive".into());
                put("k-max", k_max.to_string());
            }
            SchemeKind::AdaptiveCyclic { k_max } => {
                put("scheme", "adaptive-cyclic".into());
                put("k-max", k_max.to_string());
            }
            SchemeKind::Qft { rounds } => {
                put("scheme", "qft".into());
                put("rounds", rounds.to_string());
            }
        }
        match e.noise {
            NoiseModel::Ideal => put("noise", "ideal".into()),
            NoiseModel::Depolarizing { k_err } => {
                put("noise", "depolarizing".into());
                put("k-err", k_err.to_string());
            }
            NoiseModel::ReadOut { p } => {
                put("noise", "readout".into());
                put("readout-p", p.to_string());
            }
        }
        put("trials", self.trials.to_string());
        put("iterations", e.iterations.to_string());
        put("seed", e.seed.to_string());
        put("weight-schedule-T", e.schedule_t.to_string());
        if let Some(r) = self.reference_iteration {
            put("reference-iteration", r.to_string());
        }
        put("snapshots-per-decade", e.snapshots_per_decade.to_string());
        put("log-every-iteration", e.log_every_iteration.to_string());
        put("weight-threshold", self.filter.weight_threshold.to_string());
        put("tv-window", self.filter.tv_window.to_string());
        put("tv-threshold", self.filter.tv_threshold.to_string());
        put("tau", self.filter.tau.to_string());
        put("success-tol", self.success_tol.to_string());
        m
    }
}
