//! Reputation, social norms and the steering policy.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Action;

/// Binary reputation: good (1) or bad (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reputation {
    Bad = 0,
    Good = 1,
}

impl Reputation {
    pub fn from_bit(good: bool) -> Self {
        if good {
            Reputation::Good
        } else {
            Reputation::Bad
        }
    }

    pub fn is_good(self) -> bool {
        self == Reputation::Good
    }

    pub fn value(self) -> f64 {
        self as u8 as f64
    }

    pub fn flipped(self) -> Self {
        Reputation::from_bit(!self.is_good())
    }
}

/// Parameters of the reputation assignment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    chi: f64,
}

impl NormParams {
    pub fn new(chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::InvalidArgument(format!(
                "reputation error probability {chi} outside [0, 1]"
            )));
        }
        Ok(NormParams { chi })
    }

    /// Probability that an assigned reputation is flipped.
    pub fn chi(&self) -> f64 {
        self.chi
    }
}

/// Cooperating with the good and defecting against the bad earns a good
/// reputation; everything else earns a bad one.
pub fn base_norm(action: Action, opponent: Reputation) -> Reputation {
    Reputation::from_bit(action.is_cooperate() == opponent.is_good())
}

/// The base norm applied only when the true game is not competitive.
/// In competitive games (`f < 1`) the reputation is left unchanged.
pub fn epgg_norm(f: f64, action: Action, own: Reputation, opponent: Reputation) -> Reputation {
    if f >= 1.0 {
        base_norm(action, opponent)
    } else {
        own
    }
}

/// Noisy reputation assignment: the norm's verdict is flipped with
/// probability `chi`. `f` must be the true factor of the game.
pub fn assign_reputation<R: Rng + ?Sized>(
    f: f64,
    action: Action,
    own: Reputation,
    opponent: Reputation,
    params: NormParams,
    rng: &mut R,
) -> Reputation {
    let verdict = epgg_norm(f, action, own, opponent);
    if rng.random_bool(params.chi) {
        verdict.flipped()
    } else {
        verdict
    }
}

/// Fixed policy of a steering agent: cooperate iff the observed factor is
/// at least 1 and the opponent is in good standing.
pub fn steering_action(f_obs: f64, opponent: Reputation) -> Action {
    if f_obs >= 1.0 && opponent.is_good() {
        Action::Cooperate
    } else {
        Action::Defect
    }
}
