use super::{Observation, QFunction, Transition};
use crate::error::{Error, Result};
use crate::norms::Reputation;

/// Q-values over a discrete grid of multiplication factors, optionally
/// split by the opponent's reputation.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    factors: Vec<f64>,
    with_reputation: bool,
    values: Vec<[f64; 2]>,
}

impl QTable {
    /// A zero-initialized table. Every (state, action) pair exists from the start.
    pub fn new(factors: &[f64], with_reputation: bool) -> Self {
        Self::filled(factors, with_reputation, 0.0)
    }

    /// A table with every entry set to `q0`.
    pub fn filled(factors: &[f64], with_reputation: bool, q0: f64) -> Self {
        let per_factor = if with_reputation { 2 } else { 1 };
        QTable {
            factors: factors.to_vec(),
            with_reputation,
            values: vec![[q0; 2]; factors.len() * per_factor],
        }
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn with_reputation(&self) -> bool {
        self.with_reputation
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn state_index(&self, obs: &Observation) -> Result<usize> {
        let fi = self
            .factors
            .iter()
            .position(|&f| f == obs.f_obs)
            .ok_or(Error::MissingState(obs.f_obs))?;
        if self.with_reputation {
            let rep = obs
                .opponent_rep
                .ok_or_else(|| Error::InvalidArgument("table keyed by reputation but observation has none".into()))?;
            Ok(fi * 2 + rep as usize)
        } else {
            Ok(fi)
        }
    }

    pub fn get(&self, obs: &Observation) -> Result<[f64; 2]> {
        Ok(self.values[self.state_index(obs)?])
    }

    pub fn set(&mut self, obs: &Observation, q: [f64; 2]) -> Result<()> {
        let i = self.state_index(obs)?;
        self.values[i] = q;
        Ok(())
    }

    /// Q-values for factor `f` and (optional) opponent reputation.
    pub fn entry(&self, f: f64, rep: Option<Reputation>) -> Result<[f64; 2]> {
        self.get(&Observation::new(f, rep))
    }
}

impl QFunction for QTable {
    fn q_values(&self, obs: &Observation) -> Result<[f64; 2]> {
        self.get(obs)
    }
}

/// Replays a finished interaction through the one-step Q-learning rule, in
/// buffer order. The bootstrap term is dropped on terminal transitions.
pub fn q_update(table: &mut QTable, buffer: &[Transition], alpha: f64, gamma: f64) -> Result<()> {
    for t in buffer {
        let s = table.state_index(&t.obs)?;
        let bootstrap = if t.terminal {
            0.0
        } else {
            let next = table.get(&t.next_obs)?;
            next[0].max(next[1])
        };
        let q = &mut table.values[s][t.action.index()];
        *q += alpha * (t.reward + gamma * bootstrap - *q);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Action::{self, Cooperate as C, Defect as D};
    use crate::norms::Reputation::{Bad, Good};
    use proptest::prelude::*;

    const F2: [f64; 4] = [0.5, 1.0, 1.5, 3.5];

    fn tr(f: f64, a: Action, r: f64, next_f: f64, terminal: bool) -> Transition {
        Transition {
            obs: Observation::new(f, None),
            action: a,
            reward: r,
            next_obs: Observation::new(next_f, None),
            terminal,
        }
    }

    #[test]
    fn single_terminal_step() {
        let mut t = QTable::new(&F2, false);
        q_update(&mut t, &[tr(1.5, C, 4.0, 1.5, true)], 0.01, 0.99).unwrap();
        assert!((t.entry(1.5, None).unwrap()[1] - 0.04).abs() < 1e-15);
        assert_eq!(t.entry(1.5, None).unwrap()[0], 0.0);
    }

    #[test]
    fn zero_alpha_is_identity() {
        let mut t = QTable::new(&F2, false);
        t.set(&Observation::new(1.0, None), [3.0, -2.0]).unwrap();
        let before = t.clone();
        let buf = vec![tr(1.0, C, 5.0, 1.0, false), tr(1.0, D, 1.0, 1.0, true)];
        q_update(&mut t, &buf, 0.0, 0.99).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn empty_buffer_is_noop() {
        let mut t = QTable::new(&F2, true);
        let before = t.clone();
        q_update(&mut t, &[], 0.5, 0.9).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn two_step_sequence_matches_hand_execution() {
        // Start: Q(0.5)=(1, 2), Q(3.5)=(10, 0).
        // Step 1: s=0.5, a=D, r=3, s'=3.5 -> 1 + 0.5*(3 + 0.9*10 - 1) = 6.5
        // Step 2: s=3.5, a=C, r=7, terminal -> 0 + 0.5*(7 - 0) = 3.5
        let mut t = QTable::new(&F2, false);
        t.set(&Observation::new(0.5, None), [1.0, 2.0]).unwrap();
        t.set(&Observation::new(3.5, None), [10.0, 0.0]).unwrap();
        let buf = vec![tr(0.5, D, 3.0, 3.5, false), tr(3.5, C, 7.0, 3.5, true)];
        q_update(&mut t, &buf, 0.5, 0.9).unwrap();
        assert_eq!(t.entry(0.5, None).unwrap(), [6.5, 2.0]);
        assert_eq!(t.entry(3.5, None).unwrap(), [10.0, 3.5]);
    }

    #[test]
    fn reputation_keys_are_separate() {
        let mut t = QTable::new(&F2, true);
        assert_eq!(t.len(), 8);
        t.set(&Observation::new(1.5, Some(Good)), [0.0, 1.0]).unwrap();
        assert_eq!(t.entry(1.5, Some(Bad)).unwrap(), [0.0, 0.0]);
        assert!(t.entry(1.5, None).is_err());
    }

    #[test]
    fn unknown_factor_is_missing_state() {
        let t = QTable::new(&F2, false);
        assert_eq!(t.entry(2.0, None).unwrap_err(), Error::MissingState(2.0));
    }

    proptest! {
        #[test]
        fn greedy_full_step_writes_reward(
            steps in prop::collection::vec((0usize..4, any::<bool>(), -10.0f64..10.0), 1..30)
        ) {
            let mut t = QTable::new(&F2, false);
            let buf: Vec<Transition> = steps
                .iter()
                .map(|&(fi, c, r)| tr(F2[fi], if c { C } else { D }, r, F2[0], false))
                .collect();
            q_update(&mut t, &buf, 1.0, 0.0).unwrap();
            for fi in 0..4 {
                for a in [D, C] {
                    let last = steps.iter().rev().find(|&&(i, c, _)| i == fi && c == (a == C));
                    let expected = last.map(|s| s.2).unwrap_or(0.0);
                    let got = t.entry(F2[fi], None).unwrap()[a.index()];
                    prop_assert!((got - expected).abs() <= 1e-12, "{} vs {}", got, expected);
                }
            }
        }
    }
}
