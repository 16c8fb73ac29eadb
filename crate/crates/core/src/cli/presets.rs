//! Named experiment conditions.
//!
//! A preset name is one of the base names below, optionally followed by
//! `-steerNN` to turn `NN` percent of the pool into steering agents, for
//! example `dqn-uncertainty-reputation-steer50`.

use crate::error::{Error, Result};
use crate::sim::{Algo, ExperimentConfig};

/// Noise level of the `uncertainty` presets.
pub const UNCERTAINTY_SIGMA: f64 = 2.0;

/// Steering percentages of the reputation grid.
pub const STEERING_GRID: [u32; 5] = [0, 30, 50, 70, 90];

pub const BASE_NAMES: [&str; 12] = [
    "tabular-baseline",
    "tabular-reputation",
    "tabular-intrinsic",
    "tabular-reputation-intrinsic",
    "dqn-baseline",
    "dqn-reputation",
    "dqn-intrinsic",
    "dqn-reputation-intrinsic",
    "dqn-uncertainty",
    "dqn-uncertainty-reputation",
    "dqn-uncertainty-intrinsic",
    "dqn-uncertainty-reputation-intrinsic",
];

fn base(name: &str) -> Option<ExperimentConfig> {
    let mut parts = name.split('-');
    let mut c = match parts.next()? {
        "tabular" => ExperimentConfig::for_algo(Algo::Tabular),
        "dqn" => ExperimentConfig::for_algo(Algo::Dqn),
        _ => return None,
    };
    let rest: Vec<&str> = parts.collect();
    let (uncertain, mechanisms) = match rest.as_slice() {
        ["uncertainty", m @ ..] if c.algo == Algo::Dqn => (true, m),
        m => (false, m),
    };
    match mechanisms {
        ["baseline"] if !uncertain => {}
        [] if uncertain => {}
        ["reputation"] => c.reputation_enabled = true,
        ["intrinsic"] => c.intrinsic_enabled = true,
        ["reputation", "intrinsic"] => {
            c.reputation_enabled = true;
            c.intrinsic_enabled = true;
        }
        _ => return None,
    }
    if uncertain {
        c.sigma = UNCERTAINTY_SIGMA;
        // Agents act on what they observe, including when evaluated.
        c.eval_noise = true;
    }
    if c.algo == Algo::Tabular && c.reputation_enabled && c.intrinsic_enabled {
        // Q-values need longer to settle with both mechanisms on.
        c.epochs = 40_000;
    }
    Some(c)
}

/// Resolves a preset name to its configuration.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let unknown = || {
        Error::InvalidConfig(format!(
            "unknown preset `{name}`; known bases: {} (optionally with -steerNN)",
            BASE_NAMES.join(", ")
        ))
    };
    let (stem, steer) = match name.rsplit_once("-steer") {
        Some((stem, pct)) => {
            let pct: u32 = pct.parse().map_err(|_| unknown())?;
            if pct > 100 {
                return Err(unknown());
            }
            (stem, Some(pct))
        }
        None => (name, None),
    };
    let mut c = base(stem).ok_or_else(unknown)?;
    if let Some(pct) = steer {
        c.steering_fraction = pct as f64 / 100.0;
    }
    Ok(c)
}

/// Name of a steering-grid cell, e.g. `dqn-uncertainty-reputation-steer30`.
pub fn grid_name(prefix: &str, intrinsic: bool, steer_pct: u32) -> String {
    let mech = if intrinsic {
        "reputation-intrinsic"
    } else {
        "reputation"
    };
    format!("{prefix}-{mech}-steer{steer_pct}")
}
