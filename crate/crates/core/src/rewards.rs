//! Round rewards: the game utility, optionally mixed with a self-play
//! intrinsic term.
//!
//! With the intrinsic mechanism on, agent `i` also imagines playing a fresh
//! action `a'` against a copy of itself in a game whose factor is its own
//! observation, and is rewarded with
//!
//! ```text
//! R_i = beta * u_i(a, f, c) + (1 - beta) * u_i((a', a'), f_obs, c)
//! ```

use rand::Rng;

use crate::agents::{Mode, Observation, Policy};
use crate::error::{Error, Result};
use crate::game::{player_utility, Action};
use crate::norms::Reputation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    beta: f64,
    intrinsic_enabled: bool,
    /// Policy mode used to sample the imagined action.
    self_play_mode: Mode,
}

impl RewardParams {
    pub fn new(beta: f64, intrinsic_enabled: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!("beta {beta} outside [0, 1]")));
        }
        Ok(RewardParams {
            beta,
            intrinsic_enabled,
            self_play_mode: Mode::Explore,
        })
    }

    pub fn plain() -> Self {
        RewardParams {
            beta: 1.0,
            intrinsic_enabled: false,
            self_play_mode: Mode::Explore,
        }
    }

    pub fn with_self_play_mode(mut self, mode: Mode) -> Self {
        self.self_play_mode = mode;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn intrinsic_enabled(&self) -> bool {
        self.intrinsic_enabled
    }

    pub fn self_play_mode(&self) -> Mode {
        self.self_play_mode
    }
}

/// Everything the reward of one agent in one round depends on.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a> {
    /// Index of the rewarded agent inside `profile`.
    pub player: usize,
    pub profile: &'a [Action],
    pub true_f: f64,
    pub f_obs: f64,
    /// The agent's own reputation, or `None` when reputation is disabled.
    pub own_rep: Option<Reputation>,
    pub endowments: &'a [f64],
    /// Exploration rate of the behaviour policy this epoch.
    pub epsilon: f64,
}

/// Reward of `ctx.player` for the round. Draws from `rng` only when the
/// intrinsic term is enabled and `beta < 1`.
pub fn round_reward<R: Rng + ?Sized>(
    policy: &Policy,
    ctx: &RoundContext<'_>,
    params: RewardParams,
    rng: &mut R,
) -> Result<f64> {
    if ctx.profile.len() != ctx.endowments.len() || ctx.player >= ctx.profile.len() {
        return Err(Error::InvalidArgument(
            "profile, endowments and player index disagree".into(),
        ));
    }
    let real = player_utility(ctx.player, ctx.profile, ctx.endowments, ctx.true_f);
    if !params.intrinsic_enabled || params.beta == 1.0 {
        return Ok(real);
    }
    let imagined_action = policy.act(
        &Observation::new(ctx.f_obs, ctx.own_rep),
        params.self_play_mode,
        ctx.epsilon,
        rng,
    )?;
    let mirrored = vec![imagined_action; ctx.profile.len()];
    let imagined = player_utility(ctx.player, &mirrored, ctx.endowments, ctx.f_obs);
    Ok(mix(params.beta, real, imagined))
}

/// Convex combination `beta * real + (1 - beta) * imagined`.
#[inline]
pub fn mix(beta: f64, real: f64, imagined: f64) -> f64 {
    beta * real + (1.0 - beta) * imagined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{DqnLearner, Mlp, OptimizerKind, QTable};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Action::{Cooperate as C, Defect as D};

    const ENDOW: [f64; 2] = [4.0, 4.0];

    fn always_c_table(f: f64, with_rep: bool) -> Policy {
        let mut t = QTable::new(&[f], with_rep);
        for rep in [Some(Reputation::Good), Some(Reputation::Bad)] {
            let rep = if with_rep { rep } else { None };
            t.set(&Observation::new(f, rep), [0.0, 1.0]).unwrap();
        }
        Policy::Tabular(t)
    }

    fn ctx<'a>(profile: &'a [Action], true_f: f64, f_obs: f64) -> RoundContext<'a> {
        RoundContext {
            player: 0,
            profile,
            true_f,
            f_obs,
            own_rep: Some(Reputation::Good),
            endowments: &ENDOW,
            epsilon: 0.0,
        }
    }

    #[test]
    fn beta_one_is_game_utility() {
        let policy = Policy::Dqn(DqnLearner::new(Mlp::zeros(2).unwrap(), OptimizerKind::Adam));
        let params = RewardParams::new(1.0, true).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = round_reward(&policy, &ctx(&[C, D], 1.5, 3.0), params, &mut rng).unwrap();
            assert_eq!(r, 3.0);
        }
    }

    #[test]
    fn disabled_intrinsic_is_game_utility() {
        let policy = always_c_table(2.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = RewardParams::new(0.1, false).unwrap();
        let r = round_reward(&policy, &ctx(&[D, C], 1.5, 2.0), params, &mut rng).unwrap();
        assert_eq!(r, 7.0);
    }

    #[test]
    fn beta_zero_is_self_play_utility() {
        let policy = always_c_table(2.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = RewardParams::new(0.0, true).unwrap();
        let r = round_reward(&policy, &ctx(&[C, D], 1.5, 2.0), params, &mut rng).unwrap();
        assert_eq!(r, 8.0);
    }

    #[test]
    fn mixed_example() {
        let policy = always_c_table(2.0, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = RewardParams::new(0.1, true).unwrap();
        let r = round_reward(&policy, &ctx(&[C, D], 1.5, 2.0), params, &mut rng).unwrap();
        assert!((r - 7.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn self_play_conditions_on_own_reputation() {
        // Cooperates only against good opponents.
        let mut t = QTable::new(&[2.0], true);
        t.set(&Observation::new(2.0, Some(Reputation::Good)), [0.0, 1.0])
            .unwrap();
        let policy = Policy::Tabular(t);
        let params = RewardParams::new(0.0, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = ctx(&[C, C], 2.0, 2.0);
        assert_eq!(round_reward(&policy, &c, params, &mut rng).unwrap(), 8.0);
        c.own_rep = Some(Reputation::Bad);
        assert_eq!(round_reward(&policy, &c, params, &mut rng).unwrap(), 4.0);
    }

    #[test]
    fn no_reputation_self_play() {
        let policy = always_c_table(2.0, false);
        let params = RewardParams::new(0.0, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = ctx(&[D, D], 2.0, 2.0);
        c.own_rep = None;
        assert_eq!(round_reward(&policy, &c, params, &mut rng).unwrap(), 8.0);
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(RewardParams::new(1.1, true).is_err());
        assert!(RewardParams::new(-0.1, true).is_err());
    }

    proptest! {
        #[test]
        fn reward_between_components(
            beta in 0.0f64..=1.0,
            true_f in 0.0f64..5.0,
            f_obs in 0.0f64..10.0,
            a in any::<bool>(),
            b in any::<bool>(),
        ) {
            let act = |x: bool| if x { C } else { D };
            let profile = [act(a), act(b)];
            let table = always_c_table(f_obs, true);
            let params = RewardParams::new(beta, true).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let r = round_reward(&table, &ctx(&profile, true_f, f_obs), params, &mut rng).unwrap();
            let real = player_utility(0, &profile, &ENDOW, true_f);
            let imagined = player_utility(0, &[C, C], &ENDOW, f_obs);
            let (lo, hi) = (real.min(imagined), real.max(imagined));
            prop_assert!(r >= lo - 1e-9 && r <= hi + 1e-9);
            // Affine in beta.
            prop_assert!((r - (imagined + beta * (real - imagined))).abs() < 1e-9);
        }
    }
}
