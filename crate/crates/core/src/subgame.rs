//! One transmission frame of `2K` slots.
//!
//! The transmitter sends `n_t ∈ [K, 2K]` coded packets, always using the
//! first slot, which the jammer cannot reach; the remaining `n_t - 1` packets
//! and the jammer's `n_j ∈ [0, 2K-1]` bursts are spread uniformly over the
//! other `2K - 1` slots. The frame succeeds when at least `K` packets arrive.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_pmf};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgameParams {
    /// Information packets per block, `K`.
    pub k_info: u32,
    /// Weight of the energy term in the transmitter's payoff.
    pub alpha: f64,
    /// Packet error probability in a clear slot.
    pub p_clear: f64,
    /// Packet error probability in a jammed slot.
    pub p_blocked: f64,
}

impl SubgameParams {
    pub fn new(k_info: u32, alpha: f64, p_clear: f64, p_blocked: f64) -> Result<Self> {
        let params = Self { k_info, alpha, p_clear, p_blocked };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_info == 0 {
            return Err(domain("K must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(domain(format!("alpha must lie in [0, 1] (got {})", self.alpha)));
        }
        for (name, p) in [("p_clear", self.p_clear), ("p_blocked", self.p_blocked)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(domain(format!("{name} must lie in [0, 1] (got {p})")));
            }
        }
        Ok(())
    }

    /// Slots in a frame, `2K`.
    pub fn frame_slots(&self) -> u32 {
        2 * self.k_info
    }
}

/// Number of packets sent and number of slots jammed in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionPair {
    pub n_t: u32,
    pub n_j: u32,
}

impl ActionPair {
    pub fn new(n_t: u32, n_j: u32) -> Self {
        Self { n_t, n_j }
    }

    fn check(&self, k_info: u32) -> Result<()> {
        if k_info == 0 {
            return Err(domain("K must be at least 1"));
        }
        if self.n_t < k_info || self.n_t > 2 * k_info {
            return Err(domain(format!("n_t = {} outside [{k_info}, {}]", self.n_t, 2 * k_info)));
        }
        if self.n_j > 2 * k_info - 1 {
            return Err(domain(format!("n_j = {} outside [0, {}]", self.n_j, 2 * k_info - 1)));
        }
        Ok(())
    }
}

/// Distribution of the number of transmitted packets that land in jammed
/// slots, indexed by `N_B = 0..=min(n_t - 1, n_j)`.
pub fn blocked_count_distribution(n_t: u32, n_j: u32, k_info: u32) -> Result<Vec<f64>> {
    ActionPair::new(n_t, n_j).check(k_info)?;
    let open = 2 * k_info - 1;
    let exposed = n_t - 1;
    let total = binomial(open as u64, n_j as u64);
    Ok((0..=exposed.min(n_j))
        .map(|n_b| binomial(exposed as u64, n_b as u64) * binomial((open - exposed) as u64, (n_j - n_b) as u64) / total)
        .collect())
}

/// Probability that at least `K` of `n_t` packets arrive when `n_b` of them
/// were sent in jammed slots.
pub fn success_given_blocked(n_b: u32, n_t: u32, params: &SubgameParams) -> Result<f64> {
    if n_t == 0 || n_b > n_t - 1 {
        return Err(domain(format!("n_b = {n_b} infeasible for n_t = {n_t} (first slot is never jammed)")));
    }
    let n_c = n_t - n_b;
    let deliver_clear = 1.0 - params.p_clear;
    let deliver_blocked = 1.0 - params.p_blocked;
    let mut total = 0.0;
    for delivered in params.k_info..=n_t {
        let lo = delivered.saturating_sub(n_c);
        let hi = delivered.min(n_b);
        for d_b in lo..=hi {
            total += binomial_pmf(n_c, delivered - d_b, deliver_clear) * binomial_pmf(n_b, d_b, deliver_blocked);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `E[χ_T | n_t, n_j]`: the frame success probability.
pub fn expected_success(pair: ActionPair, params: &SubgameParams) -> Result<f64> {
    let dist = blocked_count_distribution(pair.n_t, pair.n_j, params.k_info)?;
    let mut total = 0.0;
    for (n_b, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            total += p * success_given_blocked(n_b as u32, pair.n_t, params)?;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Energy penalty `-n_t / (2K + 1)`.
pub fn energy_penalty(n_t: u32, k_info: u32) -> f64 {
    -(n_t as f64) / (2 * k_info + 1) as f64
}

/// Expected payoffs `(u_T, u_J)` of one frame; the game is zero-sum.
pub fn subgame_payoff(pair: ActionPair, params: &SubgameParams) -> Result<(f64, f64)> {
    params.validate()?;
    let chi = expected_success(pair, params)?;
    let u_t = params.alpha * energy_penalty(pair.n_t, params.k_info) + (1.0 - params.alpha) * chi;
    Ok((u_t, -u_t))
}

/// Frame success probabilities and transmitter payoffs for every action
/// pair of the unconstrained action sets, `n_t ∈ [K, 2K]`, `n_j ∈ [0, 2K-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePayoffs {
    params: SubgameParams,
    success: Vec<f64>,
    payoff: Vec<f64>,
}

impl StagePayoffs {
    pub fn new(params: SubgameParams) -> Result<Self> {
        params.validate()?;
        let k = params.k_info;
        let cols = (2 * k) as usize;
        let mut success = Vec::with_capacity((k as usize + 1) * cols);
        let mut payoff = Vec::with_capacity(success.capacity());
        for n_t in k..=2 * k {
            for n_j in 0..2 * k {
                let pair = ActionPair::new(n_t, n_j);
                let chi = expected_success(pair, &params)?;
                success.push(chi);
                payoff.push(params.alpha * energy_penalty(n_t, k) + (1.0 - params.alpha) * chi);
            }
        }
        Ok(Self { params, success, payoff })
    }

    pub fn params(&self) -> &SubgameParams {
        &self.params
    }

    fn index(&self, n_t: u32, n_j: u32) -> usize {
        let k = self.params.k_info;
        debug_assert!((k..=2 * k).contains(&n_t) && n_j < 2 * k);
        ((n_t - k) * 2 * k + n_j) as usize
    }

    pub fn success(&self, n_t: u32, n_j: u32) -> f64 {
        self.success[self.index(n_t, n_j)]
    }

    /// Transmitter payoff `E[u_T | n_t, n_j]`.
    pub fn payoff(&self, n_t: u32, n_j: u32) -> f64 {
        self.payoff[self.index(n_t, n_j)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(k: u32, alpha: f64, pc: f64, pb: f64) -> SubgameParams {
        SubgameParams::new(k, alpha, pc, pb).unwrap()
    }

    #[test]
    fn no_jamming_means_no_collisions() {
        assert_eq!(blocked_count_distribution(5, 0, 4).unwrap(), vec![1.0]);
    }

    #[test]
    fn full_frame_collides_with_every_burst() {
        for n_j in 0..8 {
            let d = blocked_count_distribution(8, n_j, 4).unwrap();
            assert_eq!(d[n_j as usize], 1.0);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_enumerated_case() {
        let d = blocked_count_distribution(4, 2, 4).unwrap();
        let want = [6.0 / 21.0, 12.0 / 21.0, 3.0 / 21.0];
        for (got, want) in d.iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_illegal_actions() {
        assert!(blocked_count_distribution(3, 0, 4).is_err());
        assert!(blocked_count_distribution(9, 0, 4).is_err());
        assert!(blocked_count_distribution(4, 8, 4).is_err());
        assert!(success_given_blocked(4, 4, &params(4, 0.4, 0.0, 1.0)).is_err());
    }

    #[test]
    fn success_given_blocked_extremes() {
        let p = params(4, 0.4, 0.0, 1.0);
        for n_t in 4..=8 {
            for n_b in 0..n_t {
                let want = if n_t - n_b >= 4 { 1.0 } else { 0.0 };
                assert_eq!(success_given_blocked(n_b, n_t, &p).unwrap(), want);
            }
        }
        let p = params(4, 0.4, 0.0, 0.0);
        for n_t in 4..=8 {
            for n_b in 0..n_t {
                assert!((success_given_blocked(n_b, n_t, &p).unwrap() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn success_given_blocked_monte_carlo() {
        let p = params(4, 0.4, 0.04, 0.9);
        let (n_t, n_b) = (5u32, 2u32);
        let trials = 1_000_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut wins = 0u32;
        for _ in 0..trials {
            let clear = (0..n_t - n_b).filter(|_| rng.random::<f64>() >= p.p_clear).count();
            let blocked = (0..n_b).filter(|_| rng.random::<f64>() >= p.p_blocked).count();
            if clear + blocked >= 4 {
                wins += 1;
            }
        }
        let mc = wins as f64 / trials as f64;
        let sigma = (mc * (1.0 - mc) / trials as f64).sqrt();
        let got = success_given_blocked(n_b, n_t, &p).unwrap();
        assert!((got - mc).abs() < 3.0 * sigma, "{got} vs {mc} ± {sigma}");
    }

    #[test]
    fn expected_success_extremes() {
        let p = params(4, 0.4, 0.0, 0.7);
        for n_t in 4..=8 {
            assert_eq!(expected_success(ActionPair::new(n_t, 0), &p).unwrap(), 1.0);
        }
        for k in 2..=5 {
            let p = params(k, 0.4, 0.0, 1.0);
            assert_eq!(expected_success(ActionPair::new(2 * k, 2 * k - 1), &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn expected_success_full_monte_carlo() {
        let p = params(4, 0.4, 0.04, 0.8);
        let (n_t, n_j) = (6u32, 4u32);
        let trials = 1_000_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut wins = 0u32;
        for _ in 0..trials {
            // slots 1..=7 are jammable; the first packet always sits in slot 0
            let tx = sample(&mut rng, 7, (n_t - 1) as usize);
            let jam = sample(&mut rng, 7, n_j as usize);
            let mut jam_mask = 0u32;
            for s in jam.iter() {
                jam_mask |= 1 << s;
            }
            let mut delivered = u32::from(rng.random::<f64>() >= p.p_clear);
            for s in tx.iter() {
                let pe = if jam_mask & (1 << s) != 0 { p.p_blocked } else { p.p_clear };
                if rng.random::<f64>() >= pe {
                    delivered += 1;
                }
            }
            if delivered >= 4 {
                wins += 1;
            }
        }
        let mc = wins as f64 / trials as f64;
        let sigma = (mc * (1.0 - mc) / trials as f64).sqrt();
        let got = expected_success(ActionPair::new(n_t, n_j), &p).unwrap();
        assert!((got - mc).abs() < 3.0 * sigma, "{got} vs {mc} ± {sigma}");
    }

    #[test]
    fn payoff_examples() {
        let p = params(4, 1.0, 0.3, 0.9);
        for n_j in 0..8 {
            let (u, _) = subgame_payoff(ActionPair::new(6, n_j), &p).unwrap();
            assert!((u + 6.0 / 9.0).abs() < 1e-15);
        }
        let p = params(4, 0.0, 0.0, 0.9);
        assert_eq!(subgame_payoff(ActionPair::new(5, 0), &p).unwrap(), (1.0, -1.0));
        let p = params(4, 0.4, 0.0, 0.9);
        let (u, j) = subgame_payoff(ActionPair::new(4, 0), &p).unwrap();
        assert!((u - 38.0 / 90.0).abs() < 1e-15);
        assert_eq!(u + j, 0.0);
    }

    #[test]
    fn stage_payoffs_match_pointwise() {
        let p = params(3, 0.3, 0.05, 0.6);
        let stage = StagePayoffs::new(p).unwrap();
        for n_t in 3..=6 {
            for n_j in 0..6 {
                let (u, _) = subgame_payoff(ActionPair::new(n_t, n_j), &p).unwrap();
                assert_eq!(stage.payoff(n_t, n_j), u);
            }
        }
    }

    fn probs() -> impl Strategy<Value = (f64, f64)> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one(k in 1u32..=6, t_off in 0u32..=6, n_j in 0u32..=11) {
            let n_t = k + t_off.min(k);
            let n_j = n_j.min(2 * k - 1);
            let d = blocked_count_distribution(n_t, n_j, k).unwrap();
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn success_monotone_in_actions(k in 1u32..=4, (pc, pb) in probs(), alpha in 0.0f64..=1.0) {
            let p = SubgameParams::new(k, alpha, pc, pb).unwrap();
            for n_t in k..=2 * k {
                for n_j in 0..2 * k {
                    let here = expected_success(ActionPair::new(n_t, n_j), &p).unwrap();
                    if n_j + 1 < 2 * k {
                        let more_jam = expected_success(ActionPair::new(n_t, n_j + 1), &p).unwrap();
                        prop_assert!(more_jam <= here + 1e-12);
                    }
                    if n_t < 2 * k {
                        let more_tx = expected_success(ActionPair::new(n_t + 1, n_j), &p).unwrap();
                        prop_assert!(more_tx >= here - 1e-12);
                    }
                }
            }
        }

        #[test]
        fn success_monotone_in_error_rates(k in 1u32..=4, (pc, pb) in probs(), bump in 0.0f64..0.5) {
            let base = SubgameParams::new(k, 0.5, pc, pb).unwrap();
            let worse_b = SubgameParams { p_blocked: (pb + bump).min(1.0), ..base };
            let worse_c = SubgameParams { p_clear: (pc + bump).min(pb), ..base };
            for n_t in k..=2 * k {
                for n_j in 0..2 * k {
                    let pair = ActionPair::new(n_t, n_j);
                    let here = expected_success(pair, &base).unwrap();
                    prop_assert!(expected_success(pair, &worse_b).unwrap() <= here + 1e-12);
                    prop_assert!(expected_success(pair, &worse_c).unwrap() <= here + 1e-12);
                }
            }
        }

        #[test]
        fn payoff_is_zero_sum_and_bounded(k in 1u32..=5, (pc, pb) in probs(), alpha in 0.0f64..=1.0,
                                          t_off in 0u32..=5, n_j in 0u32..=9) {
            let p = SubgameParams::new(k, alpha, pc, pb).unwrap();
            let pair = ActionPair::new(k + t_off.min(k), n_j.min(2 * k - 1));
            let (u_t, u_j) = subgame_payoff(pair, &p).unwrap();
            prop_assert_eq!((u_t + u_j).abs(), 0.0);
            prop_assert!(u_t > -1.0 && u_t <= 1.0);
        }
    }
}
