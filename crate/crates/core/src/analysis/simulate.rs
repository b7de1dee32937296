//! Monte Carlo play-out of whole games.
//!
//! Each run owns three ChaCha8 streams derived from `(seed, run)`: one for
//! the players' actions, one for the channel (slot placement and packet
//! losses) and one for the error-model perturbation. Runs are independent
//! and executed in parallel; results are aggregated in run order.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Policy;
use crate::channel_model::ErrorModel;
use crate::error::{domain, Result};
use crate::game_solver::GameState;

const STREAMS_PER_RUN: u64 = 4;
const ACTIONS: u64 = 0;
const CHANNEL: u64 = 1;
const PERTURB: u64 = 2;

/// Normal quantile for two-sided 95 % intervals.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub runs: u64,
    pub rng_seed: u64,
    /// Standard deviation of the error-model perturbation; zero for plain
    /// simulation.
    pub sigma: f64,
    pub mean_lifetime: f64,
    /// 95 % half-width.
    pub lifetime_ci: f64,
    pub lifetime_std_err: f64,
    /// Mean over runs of (successful frames / frames played).
    pub success_rate: f64,
    pub success_ci: f64,
    pub success_std_err: f64,
    /// Total successful frames over total frames.
    pub pooled_success_rate: f64,
    /// Delta-method standard error of the pooled rate.
    pub pooled_success_std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    /// Standard deviation of the Gaussian added to each error probability.
    pub sigma: f64,
    pub runs: u64,
}

fn stream(seed: u64, run: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run * STREAMS_PER_RUN + purpose);
    rng
}

/// Perturbed error model: clamp each probability to `[0, 1]`, then raise
/// the blocked one to the clear one if it fell below.
fn perturb(base: &ErrorModel, sigma: f64, rng: &mut ChaCha8Rng) -> ErrorModel {
    let z_c: f64 = rng.sample(StandardNormal);
    let z_b: f64 = rng.sample(StandardNormal);
    let p_clear = (base.p_clear + sigma * z_c).clamp(0.0, 1.0);
    let p_blocked = (base.p_blocked + sigma * z_b).clamp(0.0, 1.0).max(p_clear);
    ErrorModel { p_clear, p_blocked }
}

/// Plays one frame; returns whether at least `K` packets arrived.
fn play_frame(k: u32, n_t: u32, n_j: u32, model: &ErrorModel, rng: &mut ChaCha8Rng) -> bool {
    let open = (2 * k - 1) as usize;
    let mut jammed = vec![false; open];
    for s in sample(rng, open, n_j as usize).iter() {
        jammed[s] = true;
    }
    let tx = sample(rng, open, (n_t - 1) as usize);
    // The first slot is never jammed.
    let mut received = u32::from(rng.random::<f64>() >= model.p_clear);
    for s in tx.iter() {
        let p = if jammed[s] { model.p_blocked } else { model.p_clear };
        received += u32::from(rng.random::<f64>() >= p);
    }
    received >= k
}

fn play_game(policy: &impl Policy, truth: &ErrorModel, seed: u64, run: u64, sigma: Option<f64>) -> (u32, u32) {
    let config = policy.game();
    let model = match sigma {
        Some(s) => perturb(truth, s, &mut stream(seed, run, PERTURB)),
        None => *truth,
    };
    let mut actions = stream(seed, run, ACTIONS);
    let mut channel = stream(seed, run, CHANNEL);
    let mut state = config.initial_state();
    let (mut frames, mut successes) = (0u32, 0u32);
    while !state.is_terminal(config.k_info) {
        let (st, sj) = policy.strategies(state).expect("policy covers every reachable state");
        let n_t = st.sample_with(actions.random());
        let n_j = sj.sample_with(actions.random());
        successes += u32::from(play_frame(config.k_info, n_t, n_j, &model, &mut channel));
        frames += 1;
        state = GameState::new(state.b_t - n_t, state.b_j - n_j);
    }
    (frames, successes)
}

fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_batch(
    policy: &impl Policy,
    truth: &ErrorModel,
    runs: u64,
    seed: u64,
    sigma: Option<f64>,
) -> Result<SimulationResult> {
    if runs == 0 {
        return Err(domain("at least one simulation run is required"));
    }
    let config = policy.game();
    if !config.initial_state().is_terminal(config.k_info) && policy.strategies(config.initial_state()).is_none() {
        return Err(domain("policy does not cover the initial state"));
    }
    let outcomes: Vec<(u32, u32)> =
        (0..runs).into_par_iter().map(|r| play_game(policy, truth, seed, r, sigma)).collect();
    let lifetimes: Vec<f64> = outcomes.iter().map(|&(f, _)| f as f64).collect();
    let rates: Vec<f64> = outcomes.iter().map(|&(f, s)| if f == 0 { 0.0 } else { s as f64 / f as f64 }).collect();
    let (mean_lifetime, lifetime_se) = mean_and_std_err(&lifetimes);
    let (success_rate, success_se) = mean_and_std_err(&rates);
    let frames: u64 = outcomes.iter().map(|&(f, _)| f as u64).sum();
    let wins: u64 = outcomes.iter().map(|&(_, s)| s as u64).sum();
    let pooled = if frames == 0 { 0.0 } else { wins as f64 / frames as f64 };
    let n = runs as f64;
    let pooled_se = if runs < 2 || frames == 0 {
        0.0
    } else {
        let resid: f64 = outcomes.iter().map(|&(f, s)| (s as f64 - pooled * f as f64).powi(2)).sum();
        (resid / (n * (n - 1.0))).sqrt() / mean_lifetime
    };
    Ok(SimulationResult {
        runs,
        rng_seed: seed,
        sigma: sigma.unwrap_or(0.0),
        mean_lifetime,
        lifetime_ci: Z95 * lifetime_se,
        lifetime_std_err: lifetime_se,
        success_rate,
        success_ci: Z95 * success_se,
        success_std_err: success_se,
        pooled_success_rate: pooled,
        pooled_success_std_err: pooled_se,
    })
}

/// Plays `runs` complete games with strategies from `policy` and frame
/// outcomes drawn from `truth`.
pub fn simulate(policy: &impl Policy, truth: &ErrorModel, runs: u64, seed: u64) -> Result<SimulationResult> {
    run_batch(policy, truth, runs, seed, None)
}

/// As [`simulate`], but each run draws its own perturbed error model around
/// `truth` while the strategies stay fixed.
pub fn sensitivity_sweep(
    policy: &impl Policy,
    truth: &ErrorModel,
    spec: &SensitivitySpec,
    seed: u64,
) -> Result<SimulationResult> {
    if !(spec.sigma >= 0.0) || !spec.sigma.is_finite() {
        return Err(domain(format!("sigma must be non-negative (got {})", spec.sigma)));
    }
    run_batch(policy, truth, spec.runs, seed, Some(spec.sigma))
}

#[cfg(test)]
mod tests {
    use super::super::FixedPolicy;
    use super::*;
    use crate::game_solver::{GameConfig, Horizon, JammerKind, MixedStrategy};

    fn config(b_j0: u32) -> GameConfig {
        GameConfig {
            k_info: 4,
            b_t0: 200,
            b_j0,
            alpha: 0.4,
            horizon: Horizon::Finite(30),
            discount: 1.0,
            p_clear: 0.0,
            p_blocked: 1.0,
            jammer: JammerKind::Equilibrium,
        }
    }

    #[test]
    fn deterministic_game_without_jammer() {
        let p = FixedPolicy::pure(config(0), 6, 0).unwrap();
        let r = simulate(&p, &ErrorModel::new(0.0, 1.0).unwrap(), 50, 3).unwrap();
        // 200 = 33 * 6 + 2 and two quanta cannot pay for a block.
        assert_eq!(r.mean_lifetime, 33.0);
        assert_eq!(r.lifetime_ci, 0.0);
        assert_eq!(r.success_rate, 1.0);
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let c = config(40);
        let p = FixedPolicy::new(c, |_, ts, js| {
            let u = |xs: &[u32]| MixedStrategy::new(xs.to_vec(), vec![1.0 / xs.len() as f64; xs.len()]).unwrap();
            (u(ts), u(js))
        })
        .unwrap();
        let truth = ErrorModel::new(0.05, 0.6).unwrap();
        let a = simulate(&p, &truth, 200, 9).unwrap();
        assert_eq!(a, simulate(&p, &truth, 200, 9).unwrap());
        assert_ne!(a, simulate(&p, &truth, 200, 10).unwrap());
    }

    #[test]
    fn zero_sigma_matches_plain_simulation() {
        let p = FixedPolicy::pure(config(30), 5, 3).unwrap();
        let truth = ErrorModel::new(0.02, 0.7).unwrap();
        let plain = simulate(&p, &truth, 300, 1).unwrap();
        let sens = sensitivity_sweep(&p, &truth, &SensitivitySpec { sigma: 0.0, runs: 300 }, 1).unwrap();
        assert_eq!(plain, sens);
        let noisy = sensitivity_sweep(&p, &truth, &SensitivitySpec { sigma: 0.1, runs: 300 }, 1).unwrap();
        assert_eq!(noisy.mean_lifetime, plain.mean_lifetime);
    }

    #[test]
    fn perturbation_respects_ordering() {
        let mut rng = stream(5, 0, PERTURB);
        let base = ErrorModel::new(0.05, 0.97).unwrap();
        for _ in 0..10_000 {
            let m = perturb(&base, 0.3, &mut rng);
            assert!((0.0..=1.0).contains(&m.p_clear));
            assert!(m.p_blocked >= m.p_clear && m.p_blocked <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = FixedPolicy::pure(config(0), 4, 0).unwrap();
        let truth = ErrorModel::new(0.0, 1.0).unwrap();
        assert!(simulate(&p, &truth, 0, 1).is_err());
        assert!(sensitivity_sweep(&p, &truth, &SensitivitySpec { sigma: -0.1, runs: 5 }, 1).is_err());
    }
}
