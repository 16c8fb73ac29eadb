//! Learners (tabular Q-learning and a small DQN) and steering agents behind
//! one act/record/update contract.

mod mlp;
mod tabular;

pub use mlp::{dqn_update, AdamState, DqnParams, Mlp, Optimizer, OptimizerKind, Sample, HIDDEN, MAX_INPUTS, OUTPUTS};
pub use tabular::{q_update, QTable};

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::Action;
use crate::norms::{steering_action, Reputation};

/// What an agent sees before acting. `opponent_rep` is present exactly
/// when the reputation mechanism is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub f_obs: f64,
    pub opponent_rep: Option<Reputation>,
}

impl Observation {
    pub fn new(f_obs: f64, opponent_rep: Option<Reputation>) -> Self {
        Observation { f_obs, opponent_rep }
    }
}

/// One round of an interaction as seen by a single agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: Action,
    pub reward: f64,
    pub next_obs: Observation,
    /// Set only on the last round of the interaction.
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explore,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    LinearDecay,
}

/// Epsilon as a function of the training epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSchedule {
    kind: ScheduleKind,
    eps_start: f64,
    eps_end: f64,
    horizon: usize,
}

impl ExplorationSchedule {
    pub fn constant(eps: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant, eps, eps, 1)
    }

    /// Linear interpolation from `eps_start` at epoch 0 to `eps_end` at
    /// epoch `horizon - 1`, constant afterwards.
    pub fn linear(eps_start: f64, eps_end: f64, horizon: usize) -> Result<Self> {
        Self::new(ScheduleKind::LinearDecay, eps_start, eps_end, horizon)
    }

    pub fn new(kind: ScheduleKind, eps_start: f64, eps_end: f64, horizon: usize) -> Result<Self> {
        if !(0.0 <= eps_end && eps_end <= eps_start && eps_start <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "exploration schedule needs 0 <= end <= start <= 1, got {eps_start} -> {eps_end}"
            )));
        }
        Ok(ExplorationSchedule {
            kind,
            eps_start,
            eps_end,
            horizon: horizon.max(1),
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn eps_start(&self) -> f64 {
        self.eps_start
    }

    pub fn eps_end(&self) -> f64 {
        self.eps_end
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon.max(1);
        self
    }

    pub fn epsilon(&self, epoch: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eps_start,
            ScheduleKind::LinearDecay => {
                if self.horizon <= 1 {
                    return self.eps_end;
                }
                let t = (epoch as f64 / (self.horizon - 1) as f64).min(1.0);
                self.eps_start + (self.eps_end - self.eps_start) * t
            }
        }
    }
}

/// Anything that scores both actions for an observation.
pub trait QFunction {
    fn q_values(&self, obs: &Observation) -> Result<[f64; 2]>;
}

/// Argmax over `[Q(D), Q(C)]`, ties going to defection.
#[inline]
pub fn greedy_action(q: [f64; 2]) -> Action {
    if q[1] > q[0] {
        Action::Cooperate
    } else {
        Action::Defect
    }
}

/// Epsilon-greedy choice on top of a precomputed greedy action.
fn explore<R: Rng + ?Sized>(greedy: Action, mode: Mode, epsilon: f64, rng: &mut R) -> Action {
    match mode {
        Mode::Greedy => greedy,
        Mode::Explore => {
            if rng.random_bool(epsilon) {
                Action::from_index(rng.random_range(0..2))
            } else {
                greedy
            }
        }
    }
}

/// A Q-network together with its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnLearner {
    pub net: Mlp,
    pub optimizer: Optimizer,
}

impl DqnLearner {
    pub fn new(net: Mlp, kind: OptimizerKind) -> Self {
        let optimizer = Optimizer::new(kind, net.num_params());
        DqnLearner { net, optimizer }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Tabular,
    Dqn,
    Steering,
}

/// Decision rule of an agent.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Tabular(QTable),
    Dqn(DqnLearner),
    /// Fixed norm-following behaviour; never learns.
    Steering,
}

impl Policy {
    pub fn kind(&self) -> AgentKind {
        match self {
            Policy::Tabular(_) => AgentKind::Tabular,
            Policy::Dqn(_) => AgentKind::Dqn,
            Policy::Steering => AgentKind::Steering,
        }
    }

    pub fn is_learner(&self) -> bool {
        !matches!(self, Policy::Steering)
    }

    /// Chooses an action. Steering agents ignore `mode`, `epsilon` and `rng`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &Observation, mode: Mode, epsilon: f64, rng: &mut R) -> Result<Action> {
        let q = match self {
            Policy::Tabular(t) => t.q_values(obs)?,
            Policy::Dqn(d) => d.net.q_values(obs)?,
            Policy::Steering => {
                let rep = obs.opponent_rep.unwrap_or(Reputation::Good);
                return Ok(steering_action(obs.f_obs, rep));
            }
        };
        Ok(explore(greedy_action(q), mode, epsilon, rng))
    }

    /// Learns from a finished interaction. A no-op for steering agents.
    pub fn update<R: Rng + ?Sized>(&mut self, buffer: &[Transition], params: DqnParams, rng: &mut R) -> Result<()> {
        match self {
            Policy::Tabular(t) => q_update(t, buffer, params.alpha, params.gamma),
            Policy::Dqn(d) => dqn_update(&mut d.net, &mut d.optimizer, buffer, params, rng),
            Policy::Steering => Ok(()),
        }
    }
}
