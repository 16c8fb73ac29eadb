//! Independent reinforcement learners on the Extended Public Goods Game.
//!
//! Pairs of agents drawn from a pool repeatedly play a two-player public
//! goods game whose multiplication factor decides whether incentives are
//! competitive, mixed-motive or cooperative. The crate measures how
//! reputation under a factor-aware social norm, norm-following steering
//! agents, self-play intrinsic rewards and Gaussian noise on the observed
//! factor change the cooperation the learners converge to.
//!
//! Modules map onto the moving parts of the simulator:
//!
//! - [`game`]: payoffs, regimes, equilibrium analysis
//! - [`norms`]: reputation, social norms, steering policy
//! - [`uncertainty`]: noisy observation of the factor
//! - [`agents`]: tabular Q-learning and the small DQN
//! - [`rewards`]: game utility and the intrinsic self-play term
//! - [`sim`]: pools, epochs, evaluation, multi-run experiments
//! - [`stats`]: summaries and Welch's t-test
//! - [`cli`]: presets, config files, CSV output and commands

pub mod agents;
pub mod cli;
pub mod error;
pub mod game;
pub mod norms;
pub mod rewards;
pub mod sim;
pub mod stats;
pub mod uncertainty;

pub use error::{Error, Result};

/// The guide in `book/`, compiled so its snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/game.md")]
    pub struct Game;
    #[doc = include_str!("../../../book/src/norms.md")]
    pub struct Norms;
    #[doc = include_str!("../../../book/src/uncertainty.md")]
    pub struct Uncertainty;
    #[doc = include_str!("../../../book/src/agents.md")]
    pub struct Agents;
    #[doc = include_str!("../../../book/src/rewards.md")]
    pub struct Rewards;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub struct Statistics;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
