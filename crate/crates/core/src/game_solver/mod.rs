//! Multistage game over battery states.
//!
//! A state is the pair of remaining batteries `(b_t, b_j)` in packet quanta.
//! Every stage is one frame; the transmitter spends `n_t` quanta and the
//! jammer `n_j`. Once `b_t < K` the transmitter can no longer send a block
//! and the game ends in the aggregated terminal state with value zero.
//!
//! [`solve_full_game`] fills a [`StrategyTable`] bottom-up in `b_t`: the
//! matrix for horizon `γ` adds `λ V_{γ-1}` of the successor to the stage
//! payoff, and the strategy stored for a state is the equilibrium of the
//! full-horizon matrix.

mod dp;
pub mod matrix_game;
pub mod table;

use serde::{Deserialize, Serialize};

use crate::channel_model::PerMode;
use crate::error::{domain, Error, Result};
use crate::subgame::{ActionPair, SubgameParams};

pub use dp::{build_payoff_matrix, solve_full_game, verify_equilibrium, ContinuationValues, EquilibriumCheck};
pub use matrix_game::{solve_matrix_game, MatrixGameSolution, PayoffMatrix};
pub use table::{export_table, load_table, table_from_json, table_to_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GameState {
    pub b_t: u32,
    pub b_j: u32,
}

impl GameState {
    pub fn new(b_t: u32, b_j: u32) -> Self {
        Self { b_t, b_j }
    }

    pub fn is_terminal(&self, k_info: u32) -> bool {
        self.b_t < k_info
    }
}

/// Where a state goes after one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Successor {
    State(GameState),
    Terminal,
}

/// Number of stages the payoff looks ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HorizonRepr", into = "HorizonRepr")]
pub enum Horizon {
    Finite(u32),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum HorizonRepr {
    Stages(u32),
    Named(String),
}

impl TryFrom<HorizonRepr> for Horizon {
    type Error = String;

    fn try_from(r: HorizonRepr) -> std::result::Result<Self, String> {
        match r {
            HorizonRepr::Stages(n) => Ok(Horizon::Finite(n)),
            HorizonRepr::Named(s) if s == "infinite" => Ok(Horizon::Infinite),
            HorizonRepr::Named(s) => Err(format!("horizon must be a stage count or \"infinite\" (got \"{s}\")")),
        }
    }
}

impl From<Horizon> for HorizonRepr {
    fn from(h: Horizon) -> Self {
        match h {
            Horizon::Finite(n) => HorizonRepr::Stages(n),
            Horizon::Infinite => HorizonRepr::Named("infinite".into()),
        }
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(n) => write!(f, "{n}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinite" => Ok(Horizon::Infinite),
            _ => s
                .parse::<u32>()
                .map(Horizon::Finite)
                .map_err(|_| Error::Config(format!("horizon must be a stage count or 'infinite' (got '{s}')"))),
        }
    }
}

/// How the jammer picks its action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JammerKind {
    /// Plays its side of the zero-sum equilibrium.
    #[default]
    Equilibrium,
    /// Always jams `K + 1` slots (capped by the frame and its battery); the
    /// transmitter best-responds.
    Dummy,
}

impl JammerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JammerKind::Equilibrium => "equilibrium",
            JammerKind::Dummy => "dummy",
        }
    }
}

impl std::fmt::Display for JammerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub k_info: u32,
    /// Initial transmitter battery, packet quanta.
    pub b_t0: u32,
    /// Initial jammer battery, slot quanta.
    pub b_j0: u32,
    pub alpha: f64,
    pub horizon: Horizon,
    /// Discount `λ` applied per stage.
    pub discount: f64,
    pub p_clear: f64,
    pub p_blocked: f64,
    #[serde(default)]
    pub jammer: JammerKind,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.k_info == 0 {
            return bad("K must be at least 1".into());
        }
        if self.b_t0 < self.k_info {
            return bad(format!("transmitter battery {} cannot pay for one block of K = {}", self.b_t0, self.k_info));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad(format!("discount must lie in [0, 1] (got {})", self.discount));
        }
        match self.horizon {
            Horizon::Finite(0) => return bad("horizon must be at least one stage".into()),
            Horizon::Infinite if self.discount >= 1.0 => {
                return bad("an infinite horizon needs a discount below 1".into());
            }
            _ => {}
        }
        self.subgame_params().validate().map_err(|e| match e {
            Error::Domain(msg) => Error::Config(msg),
            other => other,
        })
    }

    pub fn subgame_params(&self) -> SubgameParams {
        SubgameParams { k_info: self.k_info, alpha: self.alpha, p_clear: self.p_clear, p_blocked: self.p_blocked }
    }

    /// Number of horizon levels the solver computes. An infinite horizon is
    /// exact at `⌊b_t0 / K⌋ + 1` because no game lasts longer.
    pub fn effective_horizon(&self) -> u32 {
        match self.horizon {
            Horizon::Finite(n) => n,
            Horizon::Infinite => self.b_t0 / self.k_info + 1,
        }
    }

    pub fn initial_state(&self) -> GameState {
        GameState::new(self.b_t0, self.b_j0)
    }

    /// Non-terminal states `(b_t, b_j)` with `K <= b_t <= b_t0`.
    pub fn state_count(&self) -> usize {
        (self.b_t0 - self.k_info + 1) as usize * (self.b_j0 as usize + 1)
    }

    pub fn contains(&self, state: GameState) -> bool {
        state.b_t <= self.b_t0 && state.b_j <= self.b_j0
    }

    /// Position of a non-terminal state in `(b_t, b_j)` order.
    pub fn state_index(&self, state: GameState) -> Option<usize> {
        if state.is_terminal(self.k_info) || !self.contains(state) {
            return None;
        }
        Some((state.b_t - self.k_info) as usize * (self.b_j0 as usize + 1) + state.b_j as usize)
    }

    /// The dummy jammer's fixed action in a state.
    pub fn dummy_jam(&self, b_j: u32) -> u32 {
        (self.k_info + 1).min(2 * self.k_info - 1).min(b_j)
    }

    /// Same game with different error probabilities.
    pub fn with_errors(&self, p_clear: f64, p_blocked: f64) -> Self {
        Self { p_clear, p_blocked, ..*self }
    }
}

/// Legal transmitter and jammer actions, both as contiguous ranges.
pub fn action_sets(state: GameState, k_info: u32) -> Result<(Vec<u32>, Vec<u32>)> {
    if k_info == 0 {
        return Err(domain("K must be at least 1"));
    }
    if state.is_terminal(k_info) {
        return Err(domain(format!("state ({}, {}) is terminal", state.b_t, state.b_j)));
    }
    let t = (k_info..=state.b_t.min(2 * k_info)).collect();
    let j = (0..=state.b_j.min(2 * k_info - 1)).collect();
    Ok((t, j))
}

/// Deterministic successor under a pure action pair.
pub fn successor(state: GameState, pair: ActionPair, k_info: u32) -> Result<Successor> {
    if pair.n_t > state.b_t || pair.n_j > state.b_j {
        return Err(domain(format!(
            "actions ({}, {}) exceed batteries ({}, {})",
            pair.n_t, pair.n_j, state.b_t, state.b_j
        )));
    }
    let next = GameState::new(state.b_t - pair.n_t, state.b_j - pair.n_j);
    Ok(if next.is_terminal(k_info) { Successor::Terminal } else { Successor::State(next) })
}

/// Probability distribution over actions of one player in one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub support: Vec<u32>,
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(support: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        let s = Self { support, probs };
        s.validate()?;
        Ok(s)
    }

    pub fn pure(action: u32) -> Self {
        Self { support: vec![action], probs: vec![1.0] }
    }

    /// Point mass on `action` over the given action set.
    pub fn pure_over(actions: &[u32], action: u32) -> Self {
        let probs = actions.iter().map(|&a| if a == action { 1.0 } else { 0.0 }).collect();
        Self { support: actions.to_vec(), probs }
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return Err(domain("strategy support and probabilities differ in length"));
        }
        if self.probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(domain("strategy probabilities must be non-negative"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("strategy probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn prob_of(&self, action: u32) -> f64 {
        self.support.iter().position(|&a| a == action).map_or(0.0, |i| self.probs[i])
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(&a, p)| a as f64 * p).sum()
    }

    /// Actions with positive probability.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied()).filter(|&(_, p)| p > 0.0)
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> u32 {
        let mut acc = 0.0;
        let mut last = self.support[0];
        for (a, p) in self.iter() {
            acc += p;
            last = a;
            if u < acc {
                return a;
            }
        }
        last
    }
}

/// Product distribution of next states under a pair of mixed strategies.
/// Only pairs with positive probability are listed.
pub fn transition_distribution(
    state: GameState,
    strat_t: &MixedStrategy,
    strat_j: &MixedStrategy,
    k_info: u32,
) -> Result<Vec<(ActionPair, Successor, f64)>> {
    let (ts, js) = action_sets(state, k_info)?;
    for (who, s, legal) in [("transmitter", strat_t, &ts), ("jammer", strat_j, &js)] {
        s.validate()?;
        if let Some((a, _)) = s.iter().find(|(a, _)| !legal.contains(a)) {
            return Err(domain(format!("{who} action {a} illegal in state ({}, {})", state.b_t, state.b_j)));
        }
    }
    let mut out = Vec::new();
    for (n_t, pt) in strat_t.iter() {
        for (n_j, pj) in strat_j.iter() {
            let pair = ActionPair::new(n_t, n_j);
            out.push((pair, successor(state, pair, k_info)?, pt * pj));
        }
    }
    Ok(out)
}

/// Solution stored for one non-terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEntry {
    pub state: GameState,
    pub strategy_t: MixedStrategy,
    pub strategy_j: MixedStrategy,
    /// Transmitter's value at the full horizon.
    pub value_t: f64,
    /// Transmitter's value for `γ = 1..=Γ`, index `γ - 1`.
    pub horizon_values: Vec<f64>,
}

impl StateEntry {
    pub fn value_j(&self) -> f64 {
        -self.value_t
    }
}

/// Provenance of a table: the scenario it was solved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableOrigin {
    pub distance_m: f64,
    pub per_mode: PerMode,
}

/// Solved strategies and values for every non-terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    config: GameConfig,
    origin: Option<TableOrigin>,
    entries: Vec<StateEntry>,
}

impl StrategyTable {
    pub(crate) fn from_parts(
        config: GameConfig,
        origin: Option<TableOrigin>,
        entries: Vec<StateEntry>,
    ) -> Result<Self> {
        if entries.len() != config.state_count() {
            return Err(Error::Internal(format!(
                "table has {} entries, expected {}",
                entries.len(),
                config.state_count()
            )));
        }
        let table = Self { config, origin, entries };
        for (i, e) in table.entries.iter().enumerate() {
            if table.index(e.state) != Some(i) {
                return Err(Error::Internal(format!("entry {i} out of order")));
            }
        }
        Ok(table)
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn origin(&self) -> Option<&TableOrigin> {
        self.origin.as_ref()
    }

    pub fn with_origin(mut self, origin: TableOrigin) -> Self {
        self.origin = Some(origin);
        self
    }

    /// Entries ordered by `b_t`, then `b_j`.
    pub fn entries(&self) -> &[StateEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn index(&self, state: GameState) -> Option<usize> {
        self.config.state_index(state)
    }

    pub fn entry(&self, state: GameState) -> Option<&StateEntry> {
        self.index(state).map(|i| &self.entries[i])
    }

    /// Full-horizon transmitter value; zero at the terminal state.
    pub fn value(&self, state: GameState) -> Result<f64> {
        if state.is_terminal(self.config.k_info) {
            return Ok(0.0);
        }
        self.entry(state)
            .map(|e| e.value_t)
            .ok_or_else(|| domain(format!("state ({}, {}) not in table", state.b_t, state.b_j)))
    }

    pub fn initial(&self) -> &StateEntry {
        &self.entries[self.index(self.config.initial_state()).expect("initial state is non-terminal")]
    }
}
