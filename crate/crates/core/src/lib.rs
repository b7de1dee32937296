//! Energy-depleting jamming game between a battery-powered underwater
//! transmitter and a jammer.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel_model`] turns an acoustic scenario into the pair of packet
//!   error probabilities `(p_clear, p_blocked)` for clear and jammed slots.
//! * [`subgame`] evaluates one `2K`-slot frame: collision statistics,
//!   success probability and expected payoffs for every action pair.
//! * [`game_solver`] runs the dynamic program over battery states and solves
//!   each induced zero-sum matrix game, producing a [`StrategyTable`].
//! * [`analysis`] evaluates a solved table: expected lifetime, success
//!   probability, Monte Carlo simulation, sensitivity and model mismatch.
//! * [`scenario`] holds the JSON scenario configuration used by the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel_model;
pub mod combinatorics;
pub mod error;
pub mod game_solver;
pub mod scenario;
pub mod subgame;

pub use error::{Error, Result};
pub use game_solver::{GameConfig, GameState, Horizon, MixedStrategy, StrategyTable};
pub use subgame::{ActionPair, SubgameParams};
