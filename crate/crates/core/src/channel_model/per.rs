//! Bit and packet error probabilities for the CSS/DQPSK link.

use serde::{Deserialize, Serialize};

use super::special::{bessel_i0e, marcum_q1};
use crate::combinatorics::ln_binomial;
use crate::error::{Error, Result};

/// Reed-Solomon code applied inside each packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsCode {
    pub rs_n: u32,
    pub rs_k: u32,
    pub sym_bits: u32,
    pub t_corr: u32,
}

impl RsCode {
    pub fn new(rs_n: u32, rs_k: u32, sym_bits: u32) -> Result<Self> {
        let code = Self { rs_n, rs_k, sym_bits, t_corr: rs_n.saturating_sub(rs_k) / 2 };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rs_k == 0 || self.rs_k > self.rs_n {
            return Err(Error::Config(format!("RS code needs 0 < k <= n (got n={}, k={})", self.rs_n, self.rs_k)));
        }
        if self.sym_bits == 0 || self.sym_bits >= 32 || self.rs_n >= 1u32 << self.sym_bits {
            return Err(Error::Config(format!("RS({},{}) needs n < 2^q (q={})", self.rs_n, self.rs_k, self.sym_bits)));
        }
        if self.t_corr != (self.rs_n - self.rs_k) / 2 {
            return Err(Error::Config(format!("RS code t must be floor((n-k)/2), got {}", self.t_corr)));
        }
        Ok(())
    }
}

impl Default for RsCode {
    /// RS(127, 78) over 7-bit symbols, correcting 24 symbol errors.
    fn default() -> Self {
        Self { rs_n: 127, rs_k: 78, sym_bits: 7, t_corr: 24 }
    }
}

/// Bit error probability of CSS with DQPSK under Gaussian jamming.
///
/// `ebn0` is `E_b/N_0` and `j0n0` is `J_0/N_0`, both linear. The jammer acts
/// as extra noise, so only `ebn0 / (1 + j0n0)` matters. Clamped to `[0, 1/2]`.
pub fn css_bit_error(ebn0: f64, j0n0: f64) -> f64 {
    assert!(ebn0 >= 0.0 && j0n0 >= 0.0, "css_bit_error needs non-negative ratios");
    let effective = 2.0 * ebn0 / (1.0 + j0n0);
    if effective.is_infinite() {
        return 0.0;
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let a = (effective * (1.0 - half)).sqrt();
    let b = (effective * (1.0 + half)).sqrt();
    // e^{-(a²+b²)/2} I0(ab) = e^{-(b-a)²/2} e^{-ab} I0(ab)
    let gap = b - a;
    let bessel_term = 0.5 * (-0.5 * gap * gap).exp() * bessel_i0e(a * b);
    let q = marcum_q1(a, b).expect("arguments are non-negative");
    (q - bessel_term).clamp(0.0, 0.5)
}

/// Uncoded packet error probability `1 - (1 - p_bit)^L`.
pub fn per_uncoded(p_bit: f64, packet_bits: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_bit));
    if p_bit >= 1.0 {
        return 1.0;
    }
    (-(packet_bits as f64 * (-p_bit).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// Packet error probability when an RS codeword fails beyond `t` symbol
/// errors. The binomial tail is summed in the log domain; whichever tail is
/// smaller is summed directly to keep relative precision.
pub fn per_coded(p_bit: f64, code: &RsCode) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_bit));
    if p_bit <= 0.0 {
        return 0.0;
    }
    if p_bit >= 1.0 {
        return 1.0;
    }
    let ln_symbol_ok = code.sym_bits as f64 * (-p_bit).ln_1p();
    let p_sym = -ln_symbol_ok.exp_m1();
    if p_sym >= 1.0 {
        return 1.0;
    }
    let ln_p = p_sym.ln();
    let n = code.rs_n;
    let term = |i: u32| (ln_binomial(n as u64, i as u64) + i as f64 * ln_p + (n - i) as f64 * ln_symbol_ok).exp();
    let upper: f64 = (code.t_corr + 1..=n).map(term).sum();
    if upper <= 0.5 {
        upper.clamp(0.0, 1.0)
    } else {
        let lower: f64 = (0..=code.t_corr).map(term).sum();
        (1.0 - lower).clamp(0.0, 1.0)
    }
}
