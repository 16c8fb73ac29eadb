//! The Extended Public Goods Game (EPGG).
//!
//! Every player holds an endowment `c_i` and either invests it into the
//! public pot (cooperate) or keeps it (defect). The pot is multiplied by the
//! factor `f` and shared equally:
//!
//! ```text
//! u_i(a, f, c) = (1/n) * sum_j c_j * I(a_j) * f  +  c_i * (1 - I(a_i))
//! ```
//!
//! Letting `f` range over `[0, R+]` instead of `(1, n)` yields competitive
//! (`f < 1`), boundary (`f = 1`), mixed-motive (`1 < f < n`) and cooperative
//! (`f >= n`) games.

use std::fmt;

use crate::error::{Error, Result};

/// Default upper bound of the multiplication factor range for two players.
pub const DEFAULT_R_PLUS: f64 = 5.0;

/// A binary action. The discriminant is the indicator `I(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Defect = 0,
    Cooperate = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Defect, Action::Cooperate];

    /// Indicator value: 1 for cooperation, 0 for defection.
    #[inline]
    pub fn value(self) -> f64 {
        self as u8 as f64
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::Defect
        } else {
            Action::Cooperate
        }
    }

    pub fn is_cooperate(self) -> bool {
        self == Action::Cooperate
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Defect => write!(f, "D"),
            Action::Cooperate => write!(f, "C"),
        }
    }
}

/// One instance of the game: endowments, multiplication factor and the
/// upper bound `R+` of the factor range.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    endowments: Vec<f64>,
    f: f64,
    r_plus: f64,
}

impl GameSpec {
    pub fn new(endowments: Vec<f64>, f: f64, r_plus: f64) -> Result<Self> {
        let n = endowments.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a game needs at least 2 players, got {n}"
            )));
        }
        if endowments.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidArgument(
                "endowments must be finite and nonnegative".into(),
            ));
        }
        if !(r_plus.is_finite() && r_plus > n as f64) {
            return Err(Error::InvalidArgument(format!(
                "R+ must exceed the player count {n}, got {r_plus}"
            )));
        }
        if !(0.0..=r_plus).contains(&f) {
            return Err(Error::InvalidArgument(format!(
                "multiplication factor {f} outside [0, {r_plus}]"
            )));
        }
        Ok(GameSpec { endowments, f, r_plus })
    }

    /// Two players with equal endowment `c` and the default `R+`.
    pub fn pairwise(c: f64, f: f64) -> Result<Self> {
        GameSpec::new(vec![c, c], f, DEFAULT_R_PLUS)
    }

    pub fn n(&self) -> usize {
        self.endowments.len()
    }

    pub fn endowments(&self) -> &[f64] {
        &self.endowments
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn regime(&self) -> Regime {
        classify(self.f, self.n())
    }
}

/// The joint action of all players, one entry per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProfile(pub Vec<Action>);

impl ActionProfile {
    pub fn new(actions: Vec<Action>) -> Self {
        ActionProfile(actions)
    }

    pub fn pair(a: Action, b: Action) -> Self {
        ActionProfile(vec![a, b])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Utility vector for a profile under `spec`.
pub fn utility(profile: &ActionProfile, spec: &GameSpec) -> Result<Vec<f64>> {
    utility_with_factor(profile, spec.endowments(), spec.f())
}

/// Utility vector for an arbitrary factor `f`, which may lie outside any
/// `R+` bound (noisy observations are not clipped from above).
pub fn utility_with_factor(profile: &ActionProfile, endowments: &[f64], f: f64) -> Result<Vec<f64>> {
    if profile.len() != endowments.len() {
        return Err(Error::InvalidArgument(format!(
            "profile has {} actions but the game has {} players",
            profile.len(),
            endowments.len()
        )));
    }
    let share = public_share(profile.actions(), endowments, f);
    Ok(profile
        .actions()
        .iter()
        .zip(endowments)
        .map(|(a, c)| share + c * (1.0 - a.value()))
        .collect())
}

/// Utility of player `i` alone. Callers guarantee matching lengths.
#[inline]
pub fn player_utility(i: usize, actions: &[Action], endowments: &[f64], f: f64) -> f64 {
    debug_assert_eq!(actions.len(), endowments.len());
    public_share(actions, endowments, f) + endowments[i] * (1.0 - actions[i].value())
}

#[inline]
fn public_share(actions: &[Action], endowments: &[f64], f: f64) -> f64 {
    let pot: f64 = actions.iter().zip(endowments).map(|(a, c)| c * a.value()).sum();
    pot * f / actions.len() as f64
}

/// Incentive-alignment class of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Competitive,
    Boundary,
    MixedMotive,
    Cooperative,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Competitive => "competitive",
            Regime::Boundary => "boundary",
            Regime::MixedMotive => "mixed-motive",
            Regime::Cooperative => "cooperative",
        };
        f.write_str(s)
    }
}

pub fn classify(f: f64, n: usize) -> Regime {
    if f < 1.0 {
        Regime::Competitive
    } else if f == 1.0 {
        Regime::Boundary
    } else if f < n as f64 {
        Regime::MixedMotive
    } else {
        Regime::Cooperative
    }
}

/// Payoff tensor of a two-player game, indexed `[row action][column action][player]`
/// with actions indexed by their indicator value (D = 0, C = 1).
pub type PayoffTensor = [[[f64; 2]; 2]; 2];

pub fn payoff_matrix(spec: &GameSpec) -> Result<PayoffTensor> {
    if spec.n() != 2 {
        return Err(Error::UnsupportedArity(spec.n()));
    }
    let mut m = [[[0.0; 2]; 2]; 2];
    for row in Action::ALL {
        for col in Action::ALL {
            let u = utility(&ActionProfile::pair(row, col), spec)?;
            m[row.index()][col.index()] = [u[0], u[1]];
        }
    }
    Ok(m)
}

/// Equilibrium and efficiency structure of a two-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAnalysis {
    pub payoffs: PayoffTensor,
    /// Profiles in which every player uses a weakly dominant strategy
    /// (no worse than the alternative against every opponent action).
    pub dominant_profiles: Vec<(Action, Action)>,
    pub pareto_optimal: Vec<(Action, Action)>,
    /// Pure Nash equilibria: no player gains strictly by deviating alone.
    pub nash: Vec<(Action, Action)>,
}

pub fn analyze(spec: &GameSpec) -> Result<MatrixAnalysis> {
    let payoffs = payoff_matrix(spec)?;
    let u = |a: Action, b: Action, p: usize| payoffs[a.index()][b.index()][p];

    // Weak dominance of `a` over the alternative for the given player.
    let dominant = |player: usize, a: Action| {
        let alt = Action::from_index(1 - a.index());
        Action::ALL.iter().all(|&o| {
            if player == 0 {
                u(a, o, 0) >= u(alt, o, 0)
            } else {
                u(o, a, 1) >= u(o, alt, 1)
            }
        })
    };

    let profiles: Vec<(Action, Action)> = Action::ALL
        .iter()
        .flat_map(|&r| Action::ALL.iter().map(move |&c| (r, c)))
        .collect();

    let dominant_profiles = profiles
        .iter()
        .copied()
        .filter(|&(r, c)| dominant(0, r) && dominant(1, c))
        .collect();

    let nash = profiles
        .iter()
        .copied()
        .filter(|&(r, c)| {
            let r_alt = Action::from_index(1 - r.index());
            let c_alt = Action::from_index(1 - c.index());
            u(r_alt, c, 0) <= u(r, c, 0) && u(r, c_alt, 1) <= u(r, c, 1)
        })
        .collect();

    let pareto_optimal = profiles
        .iter()
        .copied()
        .filter(|&(r, c)| {
            !profiles.iter().any(|&(r2, c2)| {
                let (a0, a1) = (u(r2, c2, 0), u(r2, c2, 1));
                let (b0, b1) = (u(r, c, 0), u(r, c, 1));
                a0 >= b0 && a1 >= b1 && (a0 > b0 || a1 > b1)
            })
        })
        .collect();

    Ok(MatrixAnalysis {
        payoffs,
        dominant_profiles,
        pareto_optimal,
        nash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Action::{Cooperate as C, Defect as D};

    fn u2(a: Action, b: Action, f: f64) -> Vec<f64> {
        utility(&ActionProfile::pair(a, b), &GameSpec::pairwise(4.0, f).unwrap()).unwrap()
    }

    #[test]
    fn utility_examples() {
        assert_eq!(u2(C, C, 3.5), vec![14.0, 14.0]);
        assert_eq!(u2(D, D, 2.2), vec![4.0, 4.0]);
        assert_eq!(u2(C, D, 1.5), vec![3.0, 7.0]);
        assert_eq!(u2(C, D, 0.5), vec![1.0, 5.0]);
    }

    #[test]
    fn utility_rejects_dimension_mismatch() {
        let spec = GameSpec::pairwise(4.0, 1.0).unwrap();
        let err = utility(&ActionProfile::new(vec![C, C, D]), &spec).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::new(vec![4.0], 1.0, 5.0).is_err());
        assert!(GameSpec::new(vec![4.0, -1.0], 1.0, 5.0).is_err());
        assert!(GameSpec::new(vec![4.0, 4.0], 6.0, 5.0).is_err());
        assert!(GameSpec::new(vec![4.0, 4.0], 1.0, 2.0).is_err());
        assert!(GameSpec::new(vec![4.0, 4.0, 4.0], 4.5, 5.0).is_ok());
    }

    #[test]
    fn payoff_matrix_panels() {
        let m = payoff_matrix(&GameSpec::pairwise(4.0, 0.0).unwrap()).unwrap();
        assert_eq!(m[1][1], [0.0, 0.0]);
        assert_eq!(m[1][0], [0.0, 4.0]);
        assert_eq!(m[0][1], [4.0, 0.0]);
        assert_eq!(m[0][0], [4.0, 4.0]);

        let m = payoff_matrix(&GameSpec::pairwise(4.0, 1.0).unwrap()).unwrap();
        assert_eq!(m[1][1], [4.0, 4.0]);
        assert_eq!(m[1][0], [2.0, 6.0]);
        assert_eq!(m[0][1], [6.0, 2.0]);
        assert_eq!(m[0][0], [4.0, 4.0]);
    }

    #[test]
    fn payoff_matrix_needs_two_players() {
        let spec = GameSpec::new(vec![4.0; 3], 1.0, 5.0).unwrap();
        assert_eq!(payoff_matrix(&spec).unwrap_err(), Error::UnsupportedArity(3));
        assert_eq!(analyze(&spec).unwrap_err(), Error::UnsupportedArity(3));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.5, 2), Regime::Competitive);
        assert_eq!(classify(1.0, 2), Regime::Boundary);
        assert_eq!(classify(1.5, 2), Regime::MixedMotive);
        assert_eq!(classify(2.0, 2), Regime::Cooperative);
        assert_eq!(classify(3.5, 2), Regime::Cooperative);
        assert_eq!(classify(2.5, 3), Regime::MixedMotive);
    }

    #[test]
    fn analyze_examples() {
        let a = analyze(&GameSpec::pairwise(4.0, 0.5).unwrap()).unwrap();
        assert_eq!(a.dominant_profiles, vec![(D, D)]);
        assert_eq!(a.nash, vec![(D, D)]);
        // (5, 1) and (1, 5) are not dominated by (4, 4).
        assert_eq!(a.pareto_optimal, vec![(D, D), (D, C), (C, D)]);

        let a = analyze(&GameSpec::pairwise(4.0, 1.5).unwrap()).unwrap();
        assert_eq!(a.dominant_profiles, vec![(D, D)]);
        assert_eq!(a.nash, vec![(D, D)]);
        assert!(a.pareto_optimal.contains(&(C, C)));
        assert!(!a.pareto_optimal.contains(&(D, D)));

        let a = analyze(&GameSpec::pairwise(4.0, 1.0).unwrap()).unwrap();
        assert_eq!(a.nash, vec![(D, D)]);
        assert!(a.pareto_optimal.contains(&(C, C)));
        assert!(a.pareto_optimal.contains(&(D, D)));

        let a = analyze(&GameSpec::pairwise(4.0, 3.5).unwrap()).unwrap();
        assert_eq!(a.dominant_profiles, vec![(C, C)]);
        assert_eq!(a.nash, vec![(C, C)]);
        assert_eq!(a.pareto_optimal, vec![(C, C)]);
    }

    #[test]
    fn strict_dominance_outside_mixed_region() {
        for k in 1..100 {
            let f = k as f64 / 100.0;
            let m = payoff_matrix(&GameSpec::pairwise(4.0, f).unwrap()).unwrap();
            for o in 0..2 {
                assert!(m[0][o][0] > m[1][o][0], "f={f}");
                assert!(m[o][0][1] > m[o][1][1], "f={f}");
            }
        }
        for k in 1..30 {
            let f = 2.0 + k as f64 / 10.0;
            let m = payoff_matrix(&GameSpec::pairwise(4.0, f).unwrap()).unwrap();
            for o in 0..2 {
                assert!(m[1][o][0] > m[0][o][0], "f={f}");
                assert!(m[o][1][1] > m[o][0][1], "f={f}");
            }
        }
    }

    fn action() -> impl Strategy<Value = Action> {
        prop_oneof![Just(C), Just(D)]
    }

    proptest! {
        #[test]
        fn utilities_are_finite_and_nonnegative(
            actions in prop::collection::vec(action(), 2..6),
            c in 0.0f64..10.0,
            f in 0.0f64..20.0,
        ) {
            let endow = vec![c; actions.len()];
            let u = utility_with_factor(&ActionProfile::new(actions.clone()), &endow, f).unwrap();
            for (i, v) in u.iter().enumerate() {
                prop_assert!(v.is_finite() && *v >= 0.0);
                prop_assert_eq!(*v, player_utility(i, &actions, &endow, f));
            }
        }

        #[test]
        fn permuting_actions_permutes_utilities(
            actions in prop::collection::vec(action(), 2..6),
            f in 0.0f64..10.0,
            rot in 0usize..6,
        ) {
            let n = actions.len();
            let endow = vec![4.0; n];
            let u = utility_with_factor(&ActionProfile::new(actions.clone()), &endow, f).unwrap();
            let mut rotated = actions.clone();
            rotated.rotate_left(rot % n);
            let v = utility_with_factor(&ActionProfile::new(rotated), &endow, f).unwrap();
            for i in 0..n {
                prop_assert_eq!(v[i], u[(i + rot) % n]);
            }
        }

        #[test]
        fn dominant_profiles_are_nash(c in 0.1f64..10.0, f in 0.0f64..5.0) {
            let a = analyze(&GameSpec::pairwise(c, f).unwrap()).unwrap();
            for p in &a.dominant_profiles {
                prop_assert!(a.nash.contains(p));
            }
        }
    }
}
