//! Performance of a solved game: expected lifetime, success probability,
//! Monte Carlo cross-checks, sensitivity to the error model, and players
//! that solved the game under the wrong model.
//!
//! The recursions run over any [`Policy`], i.e. a rule giving both players'
//! mixed strategies per state. A [`StrategyTable`] is one; [`FixedPolicy`]
//! builds arbitrary ones.

mod simulate;

use serde::{Deserialize, Serialize};

use crate::channel_model::ErrorModel;
use crate::error::{domain, Error, Result};
use crate::game_solver::{
    action_sets, solve_full_game, transition_distribution, GameConfig, GameState, MixedStrategy, StrategyTable,
    Successor,
};
use crate::subgame::StagePayoffs;

pub use simulate::{sensitivity_sweep, simulate, SensitivitySpec, SimulationResult};

/// Mixed strategies of both players in every non-terminal state.
pub trait Policy: Sync {
    fn game(&self) -> &GameConfig;
    fn strategies(&self, state: GameState) -> Option<(&MixedStrategy, &MixedStrategy)>;
}

impl Policy for StrategyTable {
    fn game(&self) -> &GameConfig {
        self.config()
    }

    fn strategies(&self, state: GameState) -> Option<(&MixedStrategy, &MixedStrategy)> {
        self.entry(state).map(|e| (&e.strategy_t, &e.strategy_j))
    }
}

/// A policy given explicitly per state.
#[derive(Debug, Clone)]
pub struct FixedPolicy {
    config: GameConfig,
    entries: Vec<(MixedStrategy, MixedStrategy)>,
}

impl FixedPolicy {
    /// `rule(state, 𝒩_T, 𝒩_J)` returns both strategies for `state`.
    pub fn new(
        config: GameConfig,
        rule: impl Fn(GameState, &[u32], &[u32]) -> (MixedStrategy, MixedStrategy),
    ) -> Result<Self> {
        config.validate()?;
        let mut entries = Vec::with_capacity(config.state_count());
        for b_t in config.k_info..=config.b_t0 {
            for b_j in 0..=config.b_j0 {
                let state = GameState::new(b_t, b_j);
                let (ts, js) = action_sets(state, config.k_info)?;
                entries.push(rule(state, &ts, &js));
            }
        }
        Ok(Self { config, entries })
    }

    /// Both players always play the same action, capped by the battery.
    pub fn pure(config: GameConfig, n_t: u32, n_j: u32) -> Result<Self> {
        Self::new(config, |s, _, _| (MixedStrategy::pure(n_t.min(s.b_t)), MixedStrategy::pure(n_j.min(s.b_j))))
    }
}

impl Policy for FixedPolicy {
    fn game(&self) -> &GameConfig {
        &self.config
    }

    fn strategies(&self, state: GameState) -> Option<(&MixedStrategy, &MixedStrategy)> {
        self.config.state_index(state).map(|i| (&self.entries[i].0, &self.entries[i].1))
    }
}

/// Lifetime and success probability of every non-terminal state.
#[derive(Debug, Clone)]
pub struct StateMetrics {
    config: GameConfig,
    lifetime: Vec<f64>,
    success: Vec<f64>,
}

impl StateMetrics {
    /// Evaluates `policy` with frame outcomes drawn from `truth`.
    ///
    /// `E[L|S] = Σ P(a) (1 + E[L|S'])` and
    /// `P_S(S) = Σ P(a) (E[χ|a] + E[L|S'] P_S(S')) / (1 + E[L|S'])`,
    /// both zero at the terminal state. The second is the per-frame success
    /// rate averaged over the remaining lifetime.
    pub fn compute(policy: &impl Policy, truth: &ErrorModel) -> Result<Self> {
        let config = *policy.game();
        let stage = StagePayoffs::new(config.with_errors(truth.p_clear, truth.p_blocked).subgame_params())?;
        let n = config.state_count();
        let mut lifetime = vec![0.0; n];
        let mut success = vec![0.0; n];
        for b_t in config.k_info..=config.b_t0 {
            for b_j in 0..=config.b_j0 {
                let state = GameState::new(b_t, b_j);
                let (st, sj) = policy
                    .strategies(state)
                    .ok_or_else(|| domain(format!("policy has no entry for ({b_t}, {b_j})")))?;
                let (mut l, mut p) = (0.0, 0.0);
                for (pair, next, prob) in transition_distribution(state, st, sj, config.k_info)? {
                    let (l_next, p_next) = match next {
                        Successor::Terminal => (0.0, 0.0),
                        Successor::State(s) => {
                            let i = config
                                .state_index(s)
                                .ok_or_else(|| Error::Internal("successor outside grid".into()))?;
                            (lifetime[i], success[i])
                        }
                    };
                    let chi = stage.success(pair.n_t, pair.n_j);
                    l += prob * (1.0 + l_next);
                    p += prob * (chi + l_next * p_next) / (1.0 + l_next);
                }
                let i = config.state_index(state).expect("non-terminal state");
                lifetime[i] = l;
                success[i] = p;
            }
        }
        Ok(Self { config, lifetime, success })
    }

    fn index(&self, state: GameState) -> Result<Option<usize>> {
        if state.is_terminal(self.config.k_info) {
            return Ok(None);
        }
        self.config
            .state_index(state)
            .map(Some)
            .ok_or_else(|| domain(format!("state ({}, {}) outside the game", state.b_t, state.b_j)))
    }

    pub fn lifetime(&self, state: GameState) -> Result<f64> {
        Ok(self.index(state)?.map_or(0.0, |i| self.lifetime[i]))
    }

    pub fn success(&self, state: GameState) -> Result<f64> {
        Ok(self.index(state)?.map_or(0.0, |i| self.success[i]))
    }
}

/// Expected number of frames before the transmitter's battery runs out.
pub fn expected_lifetime(policy: &impl Policy, state: GameState) -> Result<f64> {
    let c = policy.game();
    StateMetrics::compute(policy, &ErrorModel::new(c.p_clear, c.p_blocked)?)?.lifetime(state)
}

/// Lifetime-averaged frame success probability under the policy's own
/// error model.
pub fn success_probability(policy: &impl Policy, state: GameState) -> Result<f64> {
    let c = policy.game();
    StateMetrics::compute(policy, &ErrorModel::new(c.p_clear, c.p_blocked)?)?.success(state)
}

/// Performance of a policy at its initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Game the strategies were solved for.
    pub config: GameConfig,
    /// Error probabilities the performance is measured under.
    pub truth: ErrorModel,
    pub lifetime: f64,
    pub success_prob: f64,
    /// Success probability of the first frame alone.
    pub subgame_success: f64,
    /// Expected packets sent in the first frame.
    pub mean_tx: f64,
    /// Expected slots jammed in the first frame.
    pub mean_jam: f64,
}

pub fn analyse(policy: &impl Policy, truth: &ErrorModel) -> Result<AnalysisReport> {
    let config = *policy.game();
    let metrics = StateMetrics::compute(policy, truth)?;
    let s0 = config.initial_state();
    let (st, sj) = policy.strategies(s0).ok_or_else(|| domain("policy has no initial state"))?;
    let stage = StagePayoffs::new(config.with_errors(truth.p_clear, truth.p_blocked).subgame_params())?;
    let subgame_success = transition_distribution(s0, st, sj, config.k_info)?
        .iter()
        .map(|(pair, _, p)| p * stage.success(pair.n_t, pair.n_j))
        .sum();
    Ok(AnalysisReport {
        config,
        truth: *truth,
        lifetime: metrics.lifetime(s0)?,
        success_prob: metrics.success(s0)?,
        subgame_success,
        mean_tx: st.mean(),
        mean_jam: sj.mean(),
    })
}

/// Solves under `solve_config` and measures under `truth`.
pub fn mismatch_evaluation(solve_config: &GameConfig, truth: &ErrorModel) -> Result<(StrategyTable, AnalysisReport)> {
    let table = solve_full_game(solve_config)?;
    let report = analyse(&table, truth)?;
    Ok((table, report))
}
