use rayon::prelude::*;

use super::matrix_game::{solve_matrix_game, PayoffMatrix};
use super::{
    action_sets, successor, GameConfig, GameState, JammerKind, MixedStrategy, StateEntry, StrategyTable, Successor,
};
use crate::error::{domain, Error, Result};
use crate::subgame::{ActionPair, StagePayoffs};

/// Source of `V_γ(S)` for successor states.
pub trait ContinuationValues {
    /// Transmitter value of non-terminal `state` with `gamma >= 1` stages
    /// to go, if known.
    fn continuation(&self, state: GameState, gamma: u32) -> Option<f64>;
}

impl ContinuationValues for StrategyTable {
    fn continuation(&self, state: GameState, gamma: u32) -> Option<f64> {
        let e = self.entry(state)?;
        e.horizon_values.get(gamma.checked_sub(1)? as usize).copied()
    }
}

/// Dense `(b_t, b_j, γ)` value store filled level by level.
struct ValueGrid {
    b_j0: u32,
    levels: u32,
    values: Vec<f64>,
}

impl ValueGrid {
    fn new(config: &GameConfig) -> Self {
        let levels = config.effective_horizon();
        let n = (config.b_t0 as usize + 1) * (config.b_j0 as usize + 1) * levels as usize;
        Self { b_j0: config.b_j0, levels, values: vec![f64::NAN; n] }
    }

    fn offset(&self, state: GameState) -> usize {
        (state.b_t as usize * (self.b_j0 as usize + 1) + state.b_j as usize) * self.levels as usize
    }

    fn store(&mut self, state: GameState, horizon_values: &[f64]) {
        let o = self.offset(state);
        self.values[o..o + horizon_values.len()].copy_from_slice(horizon_values);
    }
}

impl ContinuationValues for ValueGrid {
    fn continuation(&self, state: GameState, gamma: u32) -> Option<f64> {
        if gamma == 0 || gamma > self.levels || state.b_j > self.b_j0 {
            return None;
        }
        let v = *self.values.get(self.offset(state) + gamma as usize - 1)?;
        (!v.is_nan()).then_some(v)
    }
}

/// `E[U_T(γ)]` for every legal action pair in `state`: the stage payoff
/// plus `λ` times the successor's `γ - 1` value.
pub fn build_payoff_matrix(
    state: GameState,
    gamma: u32,
    values: &impl ContinuationValues,
    config: &GameConfig,
    stage: &StagePayoffs,
) -> Result<PayoffMatrix> {
    if gamma == 0 {
        return Err(domain("remaining horizon must be at least 1"));
    }
    let k = config.k_info;
    let (ts, js) = action_sets(state, k)?;
    let mut data = Vec::with_capacity(ts.len() * js.len());
    for &n_t in &ts {
        for &n_j in &js {
            let mut u = stage.payoff(n_t, n_j);
            if gamma > 1 {
                if let Successor::State(next) = successor(state, ActionPair::new(n_t, n_j), k)? {
                    let v = values.continuation(next, gamma - 1).ok_or_else(|| {
                        Error::Internal(format!("no value for ({}, {}) at horizon {}", next.b_t, next.b_j, gamma - 1))
                    })?;
                    u += config.discount * v;
                }
            }
            data.push(u);
        }
    }
    PayoffMatrix::new(ts.len(), js.len(), data)
}

fn solve_state(state: GameState, config: &GameConfig, stage: &StagePayoffs, values: &ValueGrid) -> Result<StateEntry> {
    let (ts, js) = action_sets(state, config.k_info)?;
    let levels = config.effective_horizon();
    let mut horizon_values = Vec::with_capacity(levels as usize);
    let mut strategies = None;
    for gamma in 1..=levels {
        let m = build_payoff_matrix(state, gamma, values, config, stage)?;
        let (row, col, value) = match config.jammer {
            JammerKind::Equilibrium => {
                let s = solve_matrix_game(&m)?;
                (s.row, s.col, s.value)
            }
            JammerKind::Dummy => {
                let j = config.dummy_jam(state.b_j) as usize;
                let mut best = 0;
                for i in 1..m.rows() {
                    if m.get(i, j) > m.get(best, j) {
                        best = i;
                    }
                }
                let row = (0..m.rows()).map(|i| if i == best { 1.0 } else { 0.0 }).collect();
                let col = (0..m.cols()).map(|c| if c == j { 1.0 } else { 0.0 }).collect();
                (row, col, m.get(best, j))
            }
        };
        horizon_values.push(value);
        if gamma == levels {
            strategies = Some((row, col));
        }
    }
    let (row, col) = strategies.expect("at least one horizon level");
    Ok(StateEntry {
        state,
        strategy_t: MixedStrategy { support: ts, probs: row },
        strategy_j: MixedStrategy { support: js, probs: col },
        value_t: *horizon_values.last().expect("at least one horizon level"),
        horizon_values,
    })
}

/// Solves every non-terminal state, in increasing `b_t`. States sharing a
/// `b_t` only depend on lower levels and are solved in parallel.
pub fn solve_full_game(config: &GameConfig) -> Result<StrategyTable> {
    config.validate()?;
    let stage = StagePayoffs::new(config.subgame_params())?;
    let mut grid = ValueGrid::new(config);
    let mut entries = Vec::with_capacity(config.state_count());
    for b_t in config.k_info..=config.b_t0 {
        let level: Vec<StateEntry> = (0..=config.b_j0)
            .into_par_iter()
            .map(|b_j| solve_state(GameState::new(b_t, b_j), config, &stage, &grid))
            .collect::<Result<_>>()?;
        for e in &level {
            grid.store(e.state, &e.horizon_values);
        }
        entries.extend(level);
    }
    StrategyTable::from_parts(*config, None, entries)
}

/// Worst unilateral pure-deviation gains over a table's states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    /// Largest gain of the transmitter over its stored strategy.
    pub transmitter_gain: f64,
    /// Largest gain of the jammer over its stored strategy.
    pub jammer_gain: f64,
    /// Largest `|x^T M y - value|` over states.
    pub value_error: f64,
    pub worst_state: GameState,
}

impl EquilibriumCheck {
    pub fn max_gain(&self) -> f64 {
        self.transmitter_gain.max(self.jammer_gain)
    }
}

/// Rebuilds each state's full-horizon matrix from the table's own stored
/// continuation values and measures the pure-deviation gains against the
/// stored strategies.
pub fn verify_equilibrium(table: &StrategyTable) -> Result<EquilibriumCheck> {
    let config = table.config();
    let stage = StagePayoffs::new(config.subgame_params())?;
    let gamma = config.effective_horizon();
    let mut check = EquilibriumCheck {
        transmitter_gain: f64::MIN,
        jammer_gain: f64::MIN,
        value_error: 0.0,
        worst_state: config.initial_state(),
    };
    let mut worst = f64::MIN;
    for e in table.entries() {
        let m = build_payoff_matrix(e.state, gamma, table, config, &stage)?;
        let (x, y) = (&e.strategy_t.probs, &e.strategy_j.probs);
        let v = m.expected(x, y);
        let t_gain = (0..m.rows()).map(|i| m.row_payoff(i, y) - v).fold(f64::MIN, f64::max);
        let j_gain = (0..m.cols()).map(|j| v - m.col_payoff(x, j)).fold(f64::MIN, f64::max);
        check.transmitter_gain = check.transmitter_gain.max(t_gain);
        check.jammer_gain = check.jammer_gain.max(j_gain);
        check.value_error = check.value_error.max((v - e.value_t).abs());
        if t_gain.max(j_gain) > worst {
            worst = t_gain.max(j_gain);
            check.worst_state = e.state;
        }
    }
    Ok(check)
}
