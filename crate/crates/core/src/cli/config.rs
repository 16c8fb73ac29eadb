//! Flat `key = value` experiment files.
//!
//! Blank lines and text after `#` are ignored. Keys may appear in any order
//! and at most once; missing keys take the defaults of the chosen `algo`.
//! [`to_text`] writes every key, so `parse(to_text(c)) == c`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::agents::{ExplorationSchedule, Mode, OptimizerKind, ScheduleKind};
use crate::error::{Error, Result};
use crate::norms::Reputation;
use crate::sim::{Algo, EpisodeMode, EvalScope, ExperimentConfig, TrainingFactors};

/// A named configuration, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedConfig {
    pub name: String,
    pub config: ExperimentConfig,
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn to_text(name: &str, c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("name", name.to_string());
    kv("algo", c.algo.name().to_string());
    kv("pool_size", c.pool_size.to_string());
    kv("endowment", c.endowment.to_string());
    kv("epochs", c.epochs.to_string());
    kv("rounds_per_epoch", c.rounds_per_epoch.to_string());
    kv(
        "training_f",
        match &c.training_f {
            TrainingFactors::Discrete(v) => list(v),
            TrainingFactors::Continuous { lo, hi } => format!("[{lo}, {hi}]"),
        },
    );
    kv("eval_f", list(&c.eval_f));
    kv("reputation", on_off(c.reputation_enabled).into());
    kv("intrinsic", on_off(c.intrinsic_enabled).into());
    kv("steering_fraction", c.steering_fraction.to_string());
    kv("sigma", c.sigma.to_string());
    kv("eval_noise", on_off(c.eval_noise).into());
    kv("beta", c.beta.to_string());
    kv("alpha", c.alpha.to_string());
    kv("gamma", c.gamma.to_string());
    kv("chi", c.chi.to_string());
    let e = &c.exploration;
    kv(
        "epsilon",
        match e.kind() {
            ScheduleKind::Constant => format!("constant {}", e.eps_start()),
            ScheduleKind::LinearDecay => format!("linear {} {}", e.eps_start(), e.eps_end()),
        },
    );
    kv("batch_size", c.batch_size.to_string());
    kv(
        "optimizer",
        match c.optimizer {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
        .into(),
    );
    kv(
        "episode",
        match c.episode {
            EpisodeMode::Sequential => "sequential",
            EpisodeMode::SingleRound => "single-round",
        }
        .into(),
    );
    kv("q_init", c.q_init.to_string());
    kv("init_scale", c.init_scale.to_string());
    kv(
        "initial_reputation",
        if c.initial_reputation.is_good() { "good" } else { "bad" }.into(),
    );
    kv(
        "self_play",
        match c.self_play_mode {
            Mode::Explore => "explore",
            Mode::Greedy => "greedy",
        }
        .into(),
    );
    kv(
        "eval_scope",
        match c.eval_scope {
            EvalScope::Active => "active",
            EvalScope::AllLearnerPairs => "all-learner-pairs",
        }
        .into(),
    );
    kv("runs", c.runs.to_string());
    kv("seed", c.master_seed.to_string());
    kv("last_k", c.last_k.to_string());
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")))
}

fn floats(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(line, key, x.trim())).collect()
}

fn flag(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(bad(line, format!("`{key}` expects on or off, got `{v}`"))),
    }
}

pub fn parse_algo(v: &str) -> Result<Algo> {
    match v {
        "tabular" => Ok(Algo::Tabular),
        "dqn" => Ok(Algo::Dqn),
        _ => Err(Error::InvalidConfig(format!("unknown algorithm `{v}`"))),
    }
}

/// Parses a configuration file. `fallback_name` is used when the file has
/// no `name` key.
pub fn parse(text: &str, fallback_name: &str) -> Result<NamedConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected `key = value`, got `{content}`")))?;
        let k = k.trim().to_string();
        if entries.insert(k.clone(), (line, v.trim().to_string())).is_some() {
            return Err(bad(line, format!("duplicate key `{k}`")));
        }
    }

    let algo = match entries.remove("algo") {
        Some((line, v)) => parse_algo(&v).map_err(|e| bad(line, e))?,
        None => Algo::Dqn,
    };
    let mut c = ExperimentConfig::for_algo(algo);
    let mut name = fallback_name.to_string();

    for (k, (line, v)) in entries {
        let v = v.as_str();
        match k.as_str() {
            "name" => name = v.to_string(),
            "pool_size" => c.pool_size = num(line, &k, v)?,
            "endowment" => c.endowment = num(line, &k, v)?,
            "epochs" => c.epochs = num(line, &k, v)?,
            "rounds_per_epoch" => c.rounds_per_epoch = num(line, &k, v)?,
            "training_f" => {
                c.training_f = match v.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                    Some(inner) => {
                        let b = floats(line, &k, inner)?;
                        if b.len() != 2 {
                            return Err(bad(line, "an interval needs exactly two bounds"));
                        }
                        TrainingFactors::Continuous { lo: b[0], hi: b[1] }
                    }
                    None => TrainingFactors::Discrete(floats(line, &k, v)?),
                }
            }
            "eval_f" => c.eval_f = floats(line, &k, v)?,
            "reputation" => c.reputation_enabled = flag(line, &k, v)?,
            "intrinsic" => c.intrinsic_enabled = flag(line, &k, v)?,
            "steering_fraction" => c.steering_fraction = num(line, &k, v)?,
            "sigma" => c.sigma = num(line, &k, v)?,
            "eval_noise" => c.eval_noise = flag(line, &k, v)?,
            "beta" => c.beta = num(line, &k, v)?,
            "alpha" => c.alpha = num(line, &k, v)?,
            "gamma" => c.gamma = num(line, &k, v)?,
            "chi" => c.chi = num(line, &k, v)?,
            "epsilon" => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                c.exploration = match parts.as_slice() {
                    ["constant", e] => ExplorationSchedule::constant(num(line, &k, e)?),
                    ["linear", a, b] => ExplorationSchedule::linear(num(line, &k, a)?, num(line, &k, b)?, 1),
                    _ => {
                        return Err(bad(
                            line,
                            format!("`epsilon` expects `constant E` or `linear START END`, got `{v}`"),
                        ))
                    }
                }
                .map_err(|e| bad(line, e))?;
            }
            "batch_size" => c.batch_size = num(line, &k, v)?,
            "optimizer" => {
                c.optimizer = match v {
                    "sgd" => OptimizerKind::Sgd,
                    "adam" => OptimizerKind::Adam,
                    _ => return Err(bad(line, format!("unknown optimizer `{v}`"))),
                }
            }
            "episode" => {
                c.episode = match v {
                    "sequential" => EpisodeMode::Sequential,
                    "single-round" => EpisodeMode::SingleRound,
                    _ => return Err(bad(line, format!("unknown episode mode `{v}`"))),
                }
            }
            "q_init" => c.q_init = num(line, &k, v)?,
            "init_scale" => c.init_scale = num(line, &k, v)?,
            "initial_reputation" => {
                c.initial_reputation = match v {
                    "good" => Reputation::Good,
                    "bad" => Reputation::Bad,
                    _ => return Err(bad(line, format!("reputation must be good or bad, got `{v}`"))),
                }
            }
            "self_play" => {
                c.self_play_mode = match v {
                    "explore" => Mode::Explore,
                    "greedy" => Mode::Greedy,
                    _ => return Err(bad(line, format!("unknown self-play mode `{v}`"))),
                }
            }
            "eval_scope" => {
                c.eval_scope = match v {
                    "active" => EvalScope::Active,
                    "all-learner-pairs" => EvalScope::AllLearnerPairs,
                    _ => return Err(bad(line, format!("unknown evaluation scope `{v}`"))),
                }
            }
            "runs" => c.runs = num(line, &k, v)?,
            "seed" => c.master_seed = num(line, &k, v)?,
            "last_k" => c.last_k = num(line, &k, v)?,
            _ => return Err(bad(line, format!("unknown key `{k}`"))),
        }
    }
    Ok(NamedConfig { name, config: c })
}
