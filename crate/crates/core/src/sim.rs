//! The training engine.
//!
//! Each epoch two distinct agents are drawn from the pool together with a
//! multiplication factor. They play `M` rounds of the pairwise game, each
//! round observing the (possibly noisy) factor and the opponent's reputation,
//! acting, collecting rewards and having their reputations reassigned by the
//! norm under the *true* factor. Learners then update from the interaction
//! buffer, which is discarded, and the pair is evaluated greedily on every
//! evaluation factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agents::{
    DqnLearner, DqnParams, ExplorationSchedule, Mlp, Mode, Observation, OptimizerKind, Policy, QTable, Transition,
};
use crate::error::{Error, Result};
use crate::game::Action;
use crate::norms::{assign_reputation, NormParams, Reputation};
use crate::rewards::{round_reward, RewardParams, RoundContext};
use crate::uncertainty::{observe, NoiseModel};

/// The factors used for evaluation and for tabular training.
pub const F2: [f64; 4] = [0.5, 1.0, 1.5, 3.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Tabular,
    Dqn,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Tabular => "tabular",
            Algo::Dqn => "dqn",
        }
    }
}

/// Distribution the per-epoch training factor is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainingFactors {
    /// Uniform over a finite set.
    Discrete(Vec<f64>),
    /// Uniform over a closed interval.
    Continuous { lo: f64, hi: f64 },
}

impl TrainingFactors {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TrainingFactors::Discrete(v) => v[rng.random_range(0..v.len())],
            TrainingFactors::Continuous { lo, hi } => rng.random_range(*lo..=*hi),
        }
    }
}

/// How the rounds of one interaction are chained into learning targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeMode {
    /// Round `t` bootstraps from round `t + 1`; only the last round is terminal.
    Sequential,
    /// Every round is terminal, so targets are the immediate rewards.
    SingleRound,
}

/// Which agents are probed at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalScope {
    /// The two agents active in the epoch.
    Active,
    /// Every unordered pair of learners, averaged.
    AllLearnerPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub pool_size: usize,
    pub endowment: f64,
    pub epochs: usize,
    pub rounds_per_epoch: usize,
    pub training_f: TrainingFactors,
    pub eval_f: Vec<f64>,
    pub reputation_enabled: bool,
    pub intrinsic_enabled: bool,
    pub steering_fraction: f64,
    pub sigma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub chi: f64,
    pub exploration: ExplorationSchedule,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub episode: EpisodeMode,
    /// Initial value of every tabular Q entry.
    pub q_init: f64,
    pub init_scale: f64,
    pub initial_reputation: Reputation,
    pub self_play_mode: Mode,
    pub eval_noise: bool,
    pub eval_scope: EvalScope,
    pub runs: usize,
    pub master_seed: u64,
    pub last_k: usize,
}

impl ExperimentConfig {
    /// Tabular Q-learning on the discrete factor set, constant epsilon 0.01.
    /// Rounds of an interaction are chained and every entry starts at the
    /// optimistic bound [`optimistic_q`].
    pub fn tabular() -> Self {
        let base = Self::dqn();
        ExperimentConfig {
            algo: Algo::Tabular,
            training_f: TrainingFactors::Discrete(F2.to_vec()),
            exploration: ExplorationSchedule::constant(0.01).unwrap(),
            batch_size: 32,
            episode: EpisodeMode::Sequential,
            q_init: optimistic_q(&F2, base.endowment, base.gamma),
            ..base
        }
    }

    /// DQN on the continuous factor range `[0.5, 3.5]`, epsilon decaying
    /// linearly from 0.1 to 0.001 over the run. Each round is its own
    /// episode and the whole interaction buffer forms one Adam step.
    pub fn dqn() -> Self {
        ExperimentConfig {
            algo: Algo::Dqn,
            pool_size: 10,
            endowment: 4.0,
            epochs: 10_000,
            rounds_per_epoch: 200,
            training_f: TrainingFactors::Continuous { lo: 0.5, hi: 3.5 },
            eval_f: F2.to_vec(),
            reputation_enabled: false,
            intrinsic_enabled: false,
            steering_fraction: 0.0,
            sigma: 0.0,
            beta: 0.1,
            alpha: 0.01,
            gamma: 0.99,
            chi: 0.001,
            // Stretched over `epochs` by `schedule()`.
            exploration: ExplorationSchedule::linear(0.1, 0.001, 1).unwrap(),
            batch_size: 200,
            optimizer: OptimizerKind::Adam,
            episode: EpisodeMode::SingleRound,
            q_init: 0.0,
            init_scale: 0.5,
            initial_reputation: Reputation::Good,
            self_play_mode: Mode::Explore,
            eval_noise: false,
            eval_scope: EvalScope::Active,
            runs: 20,
            master_seed: 0,
            last_k: 50,
        }
    }

    pub fn for_algo(algo: Algo) -> Self {
        match algo {
            Algo::Tabular => Self::tabular(),
            Algo::Dqn => Self::dqn(),
        }
    }

    pub fn steering_count(&self) -> usize {
        (self.steering_fraction * self.pool_size as f64).round() as usize
    }

    /// Epsilon schedule stretched over the configured number of epochs.
    pub fn schedule(&self) -> ExplorationSchedule {
        self.exploration.with_horizon(self.epochs)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.pool_size < 2 {
            return bad(format!("pool size must be at least 2, got {}", self.pool_size));
        }
        if self.rounds_per_epoch == 0 {
            return bad("rounds per epoch must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.steering_fraction) {
            return bad(format!("steering fraction {} outside [0, 1]", self.steering_fraction));
        }
        if !(self.endowment.is_finite() && self.endowment >= 0.0) {
            return bad(format!("endowment must be >= 0, got {}", self.endowment));
        }
        if self.eval_f.is_empty() || self.eval_f.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return bad("evaluation factors must be a nonempty list of values >= 0".into());
        }
        match &self.training_f {
            TrainingFactors::Discrete(v) if v.is_empty() => return bad("discrete training factor set is empty".into()),
            TrainingFactors::Continuous { lo, hi } if !(0.0 <= *lo && lo <= hi && hi.is_finite()) => {
                return bad(format!("training interval [{lo}, {hi}] is invalid"))
            }
            _ => {}
        }
        NoiseModel::new(self.sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        NormParams::new(self.chi).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        RewardParams::new(self.beta, self.intrinsic_enabled).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("learning rate must be >= 0, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("discount {} outside [0, 1]", self.gamma));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if self.runs == 0 {
            return bad("at least one run is required".into());
        }
        if self.algo == Algo::Tabular {
            let TrainingFactors::Discrete(set) = &self.training_f else {
                return bad("tabular learners need a discrete training factor set".into());
            };
            if self.sigma != 0.0 || self.eval_noise {
                return bad("tabular learners cannot observe noisy factors".into());
            }
            if let Some(f) = self.eval_f.iter().find(|f| !set.contains(f)) {
                return bad(format!("evaluation factor {f} is not in the tabular training set"));
            }
        }
        Ok(())
    }
}

/// Largest pairwise round payoff over `factors`, summed over an infinite
/// discounted horizon.
pub fn optimistic_q(factors: &[f64], endowment: f64, gamma: f64) -> f64 {
    let best = factors
        .iter()
        .map(|&f| (endowment * f).max(endowment * f / 2.0 + endowment))
        .fold(0.0, f64::max);
    if gamma < 1.0 {
        best / (1.0 - gamma)
    } else {
        best
    }
}

// Substream layout: stream 0 drives pair and factor sampling; each agent owns
// a block of streams, one per purpose.
const STREAMS_PER_AGENT: u64 = 8;
const S_INIT: u64 = 0;
const S_POLICY: u64 = 1;
const S_NOISE: u64 = 2;
const S_NORM: u64 = 3;
const S_EVAL: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random streams of one run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    seed: u64,
}

impl RunStreams {
    pub fn new(master_seed: u64, run: usize) -> Self {
        RunStreams {
            seed: splitmix64(splitmix64(master_seed) ^ run as u64),
        }
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn engine(&self) -> ChaCha8Rng {
        self.stream(0)
    }

    fn agent(&self, agent: usize, purpose: u64) -> ChaCha8Rng {
        self.stream(1 + agent as u64 * STREAMS_PER_AGENT + purpose)
    }
}

/// One member of the pool.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub policy: Policy,
    pub reputation: Reputation,
    pub endowment: f64,
    buffer: Vec<Transition>,
    policy_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    norm_rng: ChaCha8Rng,
    eval_rng: ChaCha8Rng,
}

impl AgentState {
    pub fn is_learner(&self) -> bool {
        self.policy.is_learner()
    }

    pub fn buffer(&self) -> &[Transition] {
        &self.buffer
    }
}

/// The first `round(steering_fraction * pool_size)` agents are steering
/// agents, the rest learners of the configured algorithm.
pub fn build_pool(config: &ExperimentConfig, streams: &RunStreams) -> Result<Vec<AgentState>> {
    config.validate()?;
    let n_steering = config.steering_count();
    let factors: Vec<f64> = match &config.training_f {
        TrainingFactors::Discrete(v) => v.clone(),
        TrainingFactors::Continuous { .. } => Vec::new(),
    };
    let d_in = 1 + config.reputation_enabled as usize;
    (0..config.pool_size)
        .map(|id| {
            let mut init = streams.agent(id, S_INIT);
            let policy = if id < n_steering {
                Policy::Steering
            } else {
                match config.algo {
                    Algo::Tabular => {
                        Policy::Tabular(QTable::filled(&factors, config.reputation_enabled, config.q_init))
                    }
                    Algo::Dqn => Policy::Dqn(DqnLearner::new(
                        Mlp::random(d_in, config.init_scale, &mut init)?,
                        config.optimizer,
                    )),
                }
            };
            Ok(AgentState {
                id,
                policy,
                reputation: config.initial_reputation,
                endowment: config.endowment,
                buffer: Vec::with_capacity(config.rounds_per_epoch),
                policy_rng: streams.agent(id, S_POLICY),
                noise_rng: streams.agent(id, S_NOISE),
                norm_rng: streams.agent(id, S_NORM),
                eval_rng: streams.agent(id, S_EVAL),
            })
        })
        .collect()
}

/// Outcome of one training epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub active: (usize, usize),
    /// True factor played this epoch.
    pub f: f64,
    /// Fraction of cooperative actions over all rounds of the interaction.
    pub training_cooperation: f64,
    /// Greedy cooperation of the evaluated agents, one entry per evaluation factor.
    pub eval: Vec<f64>,
}

fn two_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

/// Plays one epoch: pair and factor sampling, `M` rounds, learner updates
/// and evaluation.
pub fn run_epoch(
    pool: &mut [AgentState],
    config: &ExperimentConfig,
    epoch: usize,
    engine: &mut ChaCha8Rng,
) -> Result<EpochRecord> {
    let n = pool.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("pool of {n} agents cannot form a pair")));
    }
    let i = engine.random_range(0..n);
    let mut j = engine.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let f = config.training_f.sample(engine);
    let training_cooperation = play_interaction(pool, (i, j), f, config, epoch)?;

    let params = DqnParams {
        alpha: config.alpha,
        gamma: config.gamma,
        batch_size: config.batch_size,
    };
    for k in [i, j] {
        let agent = &mut pool[k];
        let buffer = std::mem::take(&mut agent.buffer);
        agent.policy.update(&buffer, params, &mut agent.policy_rng)?;
        agent.buffer = buffer;
        agent.buffer.clear();
    }

    let eval = evaluate(pool, (i, j), config)?;
    Ok(EpochRecord {
        epoch,
        active: (i, j),
        f,
        training_cooperation,
        eval,
    })
}

/// The `M`-round interaction between agents `pair` at true factor `f`.
/// Fills the learners' buffers and returns the fraction of cooperative actions.
pub fn play_interaction(
    pool: &mut [AgentState],
    pair: (usize, usize),
    f: f64,
    config: &ExperimentConfig,
    epoch: usize,
) -> Result<f64> {
    let noise = NoiseModel::new(config.sigma)?;
    let norm = NormParams::new(config.chi)?;
    let reward_params =
        RewardParams::new(config.beta, config.intrinsic_enabled)?.with_self_play_mode(config.self_play_mode);
    let epsilon = config.schedule().epsilon(epoch);
    let rounds = config.rounds_per_epoch;
    let (a, b) = two_mut(pool, pair.0, pair.1);
    let agents = [a, b];
    let endowments = [agents[0].endowment, agents[1].endowment];

    let mut pending: [Option<(Observation, Action, f64)>; 2] = [None, None];
    let mut cooperations = 0usize;

    for round in 0..rounds {
        let reps = [agents[0].reputation, agents[1].reputation];
        let mut obs = [Observation::new(0.0, None); 2];
        for k in 0..2 {
            let f_obs = observe(f, noise, &mut agents[k].noise_rng);
            let opp = config.reputation_enabled.then_some(reps[1 - k]);
            obs[k] = Observation::new(f_obs, opp);
            if let Some((o, act, r)) = pending[k].take() {
                agents[k].buffer.push(Transition {
                    obs: o,
                    action: act,
                    reward: r,
                    next_obs: obs[k],
                    terminal: config.episode == EpisodeMode::SingleRound,
                });
            }
        }

        let mut actions = [Action::Defect; 2];
        for k in 0..2 {
            let agent = &mut *agents[k];
            actions[k] = agent
                .policy
                .act(&obs[k], Mode::Explore, epsilon, &mut agent.policy_rng)?;
        }
        cooperations += actions.iter().filter(|a| a.is_cooperate()).count();

        for k in 0..2 {
            let agent = &mut *agents[k];
            if !agent.is_learner() {
                continue;
            }
            let ctx = RoundContext {
                player: k,
                profile: &actions,
                true_f: f,
                f_obs: obs[k].f_obs,
                own_rep: config.reputation_enabled.then_some(reps[k]),
                endowments: &endowments,
                epsilon,
            };
            let r = round_reward(&agent.policy, &ctx, reward_params, &mut agent.policy_rng)?;
            pending[k] = Some((obs[k], actions[k], r));
        }

        if config.reputation_enabled {
            for k in 0..2 {
                let agent = &mut *agents[k];
                agent.reputation = assign_reputation(f, actions[k], reps[k], reps[1 - k], norm, &mut agent.norm_rng);
            }
        }

        if round + 1 == rounds {
            for k in 0..2 {
                if let Some((o, act, r)) = pending[k].take() {
                    agents[k].buffer.push(Transition {
                        obs: o,
                        action: act,
                        reward: r,
                        next_obs: o,
                        terminal: true,
                    });
                }
            }
        }
    }
    Ok(cooperations as f64 / (2 * rounds) as f64)
}

/// Greedy cooperation of the evaluated agents at every evaluation factor.
/// Reputations, buffers and learning state are left untouched.
pub fn evaluate(pool: &mut [AgentState], active: (usize, usize), config: &ExperimentConfig) -> Result<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = match config.eval_scope {
        EvalScope::Active => vec![active],
        EvalScope::AllLearnerPairs => {
            let learners: Vec<usize> = pool.iter().filter(|a| a.is_learner()).map(|a| a.id).collect();
            let all: Vec<(usize, usize)> = learners
                .iter()
                .enumerate()
                .flat_map(|(x, &p)| learners[x + 1..].iter().map(move |&q| (p, q)))
                .collect();
            if all.is_empty() {
                vec![active]
            } else {
                all
            }
        }
    };
    let noise = if config.eval_noise {
        NoiseModel::new(config.sigma)?
    } else {
        NoiseModel::exact()
    };
    config
        .eval_f
        .iter()
        .map(|&f| {
            let mut total = 0.0;
            for &(p, q) in &pairs {
                total += evaluate_pair(pool, (p, q), f, noise, config.reputation_enabled)?;
            }
            Ok(total / pairs.len() as f64)
        })
        .collect()
}

fn evaluate_pair(
    pool: &mut [AgentState],
    pair: (usize, usize),
    f: f64,
    noise: NoiseModel,
    reputation_enabled: bool,
) -> Result<f64> {
    let (a, b) = two_mut(pool, pair.0, pair.1);
    let reps = [a.reputation, b.reputation];
    let mut coop = 0.0;
    for (k, agent) in [a, b].into_iter().enumerate() {
        let f_obs = observe(f, noise, &mut agent.eval_rng);
        let obs = Observation::new(f_obs, reputation_enabled.then_some(reps[1 - k]));
        // Greedy mode never consumes randomness.
        let act = agent.policy.act(&obs, Mode::Greedy, 0.0, &mut agent.eval_rng)?;
        coop += act.value();
    }
    Ok(coop / 2.0)
}

/// All epoch records of all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub eval_f: Vec<f64>,
    pub runs: Vec<Vec<EpochRecord>>,
}

impl MetricSeries {
    pub fn num_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn num_epochs(&self) -> usize {
        self.runs.first().map_or(0, Vec::len)
    }

    pub fn f_index(&self, f: f64) -> Result<usize> {
        self.eval_f
            .iter()
            .position(|&x| x == f)
            .ok_or_else(|| Error::InvalidArgument(format!("{f} is not an evaluation factor")))
    }
}

/// Trains one run from scratch.
pub fn run_single(config: &ExperimentConfig, run: usize) -> Result<Vec<EpochRecord>> {
    let streams = RunStreams::new(config.master_seed, run);
    let mut pool = build_pool(config, &streams)?;
    let mut engine = streams.engine();
    (0..config.epochs)
        .map(|e| run_epoch(&mut pool, config, e, &mut engine))
        .collect()
}

/// Runs `config.runs` independent runs in parallel on the current rayon
/// pool. The result depends only on the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricSeries> {
    config.validate()?;
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|r| {
            run_single(config, r).map_err(|e| Error::Run {
                run: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricSeries {
        eval_f: config.eval_f.clone(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algo: Algo) -> ExperimentConfig {
        ExperimentConfig {
            epochs: 5,
            runs: 1,
            ..ExperimentConfig::for_algo(algo)
        }
    }

    #[test]
    fn pool_composition() {
        let streams = RunStreams::new(1, 0);
        for (frac, steer) in [(0.0, 0), (0.3, 3), (0.5, 5), (0.7, 7), (0.9, 9)] {
            let cfg = ExperimentConfig {
                steering_fraction: frac,
                reputation_enabled: true,
                ..small(Algo::Dqn)
            };
            let pool = build_pool(&cfg, &streams).unwrap();
            assert_eq!(pool.len(), 10);
            assert_eq!(pool.iter().filter(|a| !a.is_learner()).count(), steer);
            assert!(pool[..steer].iter().all(|a| !a.is_learner()));
            assert!(pool
                .iter()
                .all(|a| a.reputation == Reputation::Good && a.endowment == 4.0));
        }
        let cfg = ExperimentConfig {
            steering_fraction: 1.2,
            ..small(Algo::Dqn)
        };
        assert!(matches!(build_pool(&cfg, &streams), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = small(Algo::Tabular);
        c.sigma = 2.0;
        assert!(c.validate().is_err());
        let mut c = small(Algo::Tabular);
        c.eval_f = vec![2.0];
        assert!(c.validate().is_err());
        let mut c = small(Algo::Dqn);
        c.pool_size = 1;
        assert!(c.validate().is_err());
        let mut c = small(Algo::Dqn);
        c.rounds_per_epoch = 0;
        assert!(c.validate().is_err());
    }

    fn steering_pair(f: f64) -> (Vec<AgentState>, ExperimentConfig) {
        let cfg = ExperimentConfig {
            pool_size: 2,
            steering_fraction: 1.0,
            reputation_enabled: true,
            chi: 0.0,
            training_f: TrainingFactors::Discrete(vec![f]),
            ..small(Algo::Dqn)
        };
        let pool = build_pool(&cfg, &RunStreams::new(0, 0)).unwrap();
        (pool, cfg)
    }

    #[test]
    fn steering_pair_cooperates_when_cooperative() {
        let (mut pool, cfg) = steering_pair(3.5);
        let mut engine = RunStreams::new(0, 0).engine();
        let rec = run_epoch(&mut pool, &cfg, 0, &mut engine).unwrap();
        assert_eq!(rec.training_cooperation, 1.0);
        assert_eq!(rec.eval, vec![0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn steering_pair_defects_when_competitive() {
        let (mut pool, cfg) = steering_pair(0.5);
        let mut engine = RunStreams::new(0, 0).engine();
        let rec = run_epoch(&mut pool, &cfg, 0, &mut engine).unwrap();
        assert_eq!(rec.training_cooperation, 0.0);
        assert!(pool.iter().all(|a| a.reputation == Reputation::Good));
    }

    #[test]
    fn random_learners_cooperate_half_the_time() {
        let cfg = ExperimentConfig {
            pool_size: 2,
            exploration: ExplorationSchedule::constant(1.0).unwrap(),
            ..small(Algo::Dqn)
        };
        let streams = RunStreams::new(3, 0);
        let mut pool = build_pool(&cfg, &streams).unwrap();
        let mut engine = streams.engine();
        let rec = run_epoch(&mut pool, &cfg, 0, &mut engine).unwrap();
        assert!(
            (rec.training_cooperation - 0.5).abs() <= 0.05,
            "{}",
            rec.training_cooperation
        );
    }

    #[test]
    fn zero_networks_evaluate_to_defection() {
        let cfg = small(Algo::Dqn);
        let mut pool = build_pool(&cfg, &RunStreams::new(0, 0)).unwrap();
        for a in &mut pool {
            a.policy = Policy::Dqn(DqnLearner::new(Mlp::zeros(1).unwrap(), OptimizerKind::Adam));
        }
        assert_eq!(evaluate(&mut pool, (0, 1), &cfg).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn fixed_cooperator_and_defector_average_half() {
        let cfg = small(Algo::Tabular);
        let mut pool = build_pool(&cfg, &RunStreams::new(0, 0)).unwrap();
        let mut always_c = QTable::new(&F2, false);
        for f in F2 {
            always_c.set(&Observation::new(f, None), [0.0, 1.0]).unwrap();
        }
        pool[0].policy = Policy::Tabular(always_c);
        assert_eq!(evaluate(&mut pool, (0, 1), &cfg).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn buffers_are_terminated_and_cleared() {
        let cfg = ExperimentConfig {
            pool_size: 2,
            rounds_per_epoch: 7,
            episode: EpisodeMode::Sequential,
            ..small(Algo::Dqn)
        };
        let mut pool = build_pool(&cfg, &RunStreams::new(0, 0)).unwrap();
        play_interaction(&mut pool, (0, 1), 2.0, &cfg, 0).unwrap();
        for a in &pool {
            let buf = a.buffer();
            assert_eq!(buf.len(), 7);
            assert!(buf[..6].iter().all(|t| !t.terminal));
            assert!(buf[6].terminal);
            for w in buf.windows(2) {
                assert_eq!(w[0].next_obs, w[1].obs);
            }
        }
        let mut engine = RunStreams::new(0, 0).engine();
        run_epoch(&mut pool, &cfg, 0, &mut engine).unwrap();
        assert!(pool.iter().all(|a| a.buffer().is_empty()));
    }

    #[test]
    fn single_round_episodes_are_all_terminal() {
        let cfg = ExperimentConfig {
            pool_size: 2,
            rounds_per_epoch: 7,
            episode: EpisodeMode::SingleRound,
            ..small(Algo::Dqn)
        };
        let mut pool = build_pool(&cfg, &RunStreams::new(0, 0)).unwrap();
        play_interaction(&mut pool, (0, 1), 2.0, &cfg, 0).unwrap();
        for a in &pool {
            assert_eq!(a.buffer().len(), 7);
            assert!(a.buffer().iter().all(|t| t.terminal));
        }
    }

    #[test]
    fn optimistic_bound() {
        // Mutual cooperation at 3.5 pays 14 per round.
        assert!((optimistic_q(&F2, 4.0, 0.99) - 1400.0).abs() < 1e-9);
        // Below f = 2 the best payoff is defecting on a cooperator.
        assert_eq!(optimistic_q(&[1.0], 4.0, 0.0), 6.0);
        let t = ExperimentConfig::tabular();
        assert_eq!(t.q_init, optimistic_q(&F2, t.endowment, t.gamma));
    }

    #[test]
    fn steering_agents_never_learn() {
        let cfg = ExperimentConfig {
            steering_fraction: 0.5,
            reputation_enabled: true,
            epochs: 50,
            ..small(Algo::Dqn)
        };
        let streams = RunStreams::new(9, 0);
        let mut pool = build_pool(&cfg, &streams).unwrap();
        let mut engine = streams.engine();
        for e in 0..cfg.epochs {
            run_epoch(&mut pool, &cfg, e, &mut engine).unwrap();
        }
        assert!(pool[..5].iter().all(|a| a.policy == Policy::Steering));
    }

    #[test]
    fn chi_is_inert_without_reputation() {
        let a = ExperimentConfig {
            chi: 0.0,
            epochs: 30,
            ..small(Algo::Dqn)
        };
        let b = ExperimentConfig { chi: 0.5, ..a.clone() };
        assert_eq!(run_single(&a, 0).unwrap(), run_single(&b, 0).unwrap());
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = ExperimentConfig {
            runs: 2,
            epochs: 20,
            reputation_enabled: true,
            intrinsic_enabled: true,
            sigma: 2.0,
            eval_noise: true,
            ..ExperimentConfig::dqn()
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_runs(), 2);
        assert_eq!(a.num_epochs(), 20);
    }

    #[test]
    fn shape_of_a_single_epoch() {
        let cfg = ExperimentConfig {
            runs: 1,
            epochs: 1,
            ..ExperimentConfig::tabular()
        };
        let s = run_experiment(&cfg).unwrap();
        assert_eq!(s.runs.len(), 1);
        assert_eq!(s.runs[0].len(), 1);
        assert_eq!(s.runs[0][0].eval.len(), 4);
    }

    #[test]
    fn all_learner_pair_evaluation() {
        let cfg = ExperimentConfig {
            eval_scope: EvalScope::AllLearnerPairs,
            epochs: 3,
            ..small(Algo::Dqn)
        };
        let s = run_single(&cfg, 0).unwrap();
        assert!(s.iter().all(|r| r.eval.iter().all(|v| (0.0..=1.0).contains(v))));
    }
}
