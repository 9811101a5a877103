//! Exact state values for small explicit MDPs, by iterative policy
//! evaluation. Test oracle for the TD trainer.

use crate::error::{CoreError, Result};

const MAX_STATES: usize = 10_000;
const RESIDUAL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000_000;

/// A small MDP with explicit per-state rewards and transition
/// distributions. Terminal states collect their reward and end the episode:
/// `V(s) = r(s)`. Non-terminal: `V(s) = r(s) + gamma * sum_s' P(s'|s) V(s')`.
#[derive(Debug, Clone)]
pub struct ExplicitMdp {
    pub rewards: Vec<f64>,
    pub transitions: Vec<Vec<(usize, f64)>>,
    pub terminal: Vec<bool>,
    pub gamma: f64,
}

impl ExplicitMdp {
    /// Deterministic chain s0 -> s1 -> ... -> terminal last state.
    pub fn chain(rewards: Vec<f64>, gamma: f64) -> Self {
        let n = rewards.len();
        let transitions = (0..n)
            .map(|i| {
                if i + 1 < n {
                    vec![(i + 1, 1.0)]
                } else {
                    vec![]
                }
            })
            .collect();
        let mut terminal = vec![false; n];
        if n > 0 {
            terminal[n - 1] = true;
        }
        Self {
            rewards,
            transitions,
            terminal,
            gamma,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.rewards.len();
        if n == 0 || n > MAX_STATES {
            return Err(CoreError::Domain(format!(
                "state count {n} outside 1..={MAX_STATES}"
            )));
        }
        if self.transitions.len() != n || self.terminal.len() != n {
            return Err(CoreError::Domain("mdp field lengths disagree".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CoreError::Domain(format!(
                "gamma {} outside [0,1]",
                self.gamma
            )));
        }
        for (s, out) in self.transitions.iter().enumerate() {
            if self.terminal[s] {
                continue;
            }
            let total: f64 = out.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(CoreError::Domain(format!(
                    "state {s} transition probabilities sum to {total}"
                )));
            }
            if out.iter().any(|(t, _)| *t >= n) {
                return Err(CoreError::Domain(format!(
                    "state {s} transitions out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Exact state values to a 1e-10 fixed-point residual.
pub fn evaluate(mdp: &ExplicitMdp) -> Result<Vec<f64>> {
    mdp.validate()?;
    let n = mdp.rewards.len();
    let mut values = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        let mut next = vec![0.0; n];
        let mut residual = 0.0_f64;
        for s in 0..n {
            next[s] = if mdp.terminal[s] {
                mdp.rewards[s]
            } else {
                let future: f64 = mdp.transitions[s].iter().map(|(t, p)| p * values[*t]).sum();
                mdp.rewards[s] + mdp.gamma * future
            };
            residual = residual.max((next[s] - values[s]).abs());
        }
        values = next;
        if residual < RESIDUAL {
            return Ok(values);
        }
    }
    Err(CoreError::Oracle(format!(
        "policy evaluation did not reach residual {RESIDUAL} in {MAX_ITERATIONS} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn absorbing_terminal_state_has_zero_value() {
        let mdp = ExplicitMdp::chain(vec![0.0], 0.9);
        assert_eq!(evaluate(&mdp).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_state_chain_matches_hand_computation() {
        let mdp = ExplicitMdp::chain(vec![1.0, 0.0], 0.5);
        let values = evaluate(&mdp).unwrap();
        assert!((values[0] - 1.0).abs() < 1e-9);
        assert!(values[1].abs() < 1e-9);
    }

    #[test]
    fn three_state_chain_matches_geometric_form() {
        let (r1, r2, r3) = (0.4, 0.7, 0.2);
        let gamma = 0.9;
        let mdp = ExplicitMdp::chain(vec![r1, r2, r3], gamma);
        let values = evaluate(&mdp).unwrap();
        assert!((values[0] - (r1 + gamma * r2 + gamma * gamma * r3)).abs() < 1e-9);
        assert!((values[1] - (r2 + gamma * r3)).abs() < 1e-9);
        assert!((values[2] - r3).abs() < 1e-9);
    }

    #[test]
    fn random_chains_are_consistent_across_runs() {
        let mut rng = crate::rng::StreamKey::root(77).rng();
        for _ in 0..20 {
            let rewards: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
            let mdp = ExplicitMdp::chain(rewards, 0.9);
            let a = evaluate(&mdp).unwrap();
            let b = evaluate(&mdp).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invalid_transition_mass_is_rejected() {
        let mdp = ExplicitMdp {
            rewards: vec![0.0, 0.0],
            transitions: vec![vec![(1, 0.5)], vec![]],
            terminal: vec![false, true],
            gamma: 0.9,
        };
        assert!(evaluate(&mdp).is_err());
    }
}
