//! From acoustic scenario to per-slot packet error probabilities.
//!
//! The transmitter-receiver link and the jammer-receiver link each get a
//! [`LinkBudget`]; the jammer's received power enters the bit error rate as
//! extra white noise `J_0` over the signal band. A clear slot is the same
//! computation with `J_0 = 0`.

pub mod acoustic;
pub mod empirical;
pub mod per;
pub mod special;

use serde::{Deserialize, Serialize};

pub use acoustic::{absorption_db_per_km, channel_gain, noise_psd, noise_psd_db, AcousticEnvironment};
pub use empirical::EmpiricalPerTable;
pub use per::{css_bit_error, per_coded, per_uncoded, RsCode};
pub use special::{bessel_i0, bessel_i0e, marcum_q1};

use crate::error::{domain, Error, Result};

/// Transmitter-side link parameters shared by every jammer placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    /// Transmitter-receiver distance, m.
    pub d_tr_m: f64,
    /// Transmitter source level, dB re 1 µPa at 1 m.
    pub tx_power_db: f64,
    /// Jammer source level, dB re 1 µPa at 1 m.
    pub jam_power_db: f64,
    /// Packet length in bits.
    pub packet_bits: u32,
    /// Modem bit rate, bit/s.
    pub bitrate_bps: f64,
    pub rs_code: RsCode,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            d_tr_m: 78.0,
            tx_power_db: 180.0,
            jam_power_db: 180.0,
            packet_bits: 512,
            bitrate_bps: 1000.0,
            rs_code: RsCode::default(),
        }
    }
}

impl LinkParams {
    /// Duration of one packet (and of one slot), s.
    pub fn slot_duration_s(&self) -> f64 {
        self.packet_bits as f64 / self.bitrate_bps
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_tr_m > 0.0) {
            return Err(Error::Config(format!("d_tr must be positive (got {})", self.d_tr_m)));
        }
        if self.packet_bits == 0 {
            return Err(Error::Config("packet_bits must be at least 1".into()));
        }
        if !(self.bitrate_bps > 0.0) {
            return Err(Error::Config("bitrate must be positive".into()));
        }
        if !self.tx_power_db.is_finite() || !self.jam_power_db.is_finite() {
            return Err(Error::Config("source levels must be finite".into()));
        }
        self.rs_code.validate()
    }
}

/// Received-side quantities at `R` for one jammer placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_db: f64,
    pub distance_m: f64,
    /// Linear power gain of the transmitter-receiver channel.
    pub gain: f64,
    pub packet_bits: u32,
    pub slot_duration_s: f64,
    pub bandwidth_hz: f64,
    /// Received energy per bit.
    pub eb: f64,
    /// Ambient noise PSD.
    pub n0: f64,
    /// Jammer PSD at the receiver; zero for a clear slot.
    pub j0: f64,
}

impl LinkBudget {
    /// Budget of the transmitter link with the jammer at `d_jr` (`None` for
    /// a clear slot).
    pub fn new(link: &LinkParams, env: &AcousticEnvironment, d_jr: Option<f64>) -> Result<Self> {
        let gain = channel_gain(link.d_tr_m, env)?;
        let tau = link.slot_duration_s();
        let p_tx = db_to_linear(link.tx_power_db);
        let eb = tau / link.packet_bits as f64 * p_tx * gain;
        let j0 = match d_jr {
            Some(d) => db_to_linear(link.jam_power_db) * channel_gain(d, env)? / env.bandwidth_hz,
            None => 0.0,
        };
        Ok(Self {
            tx_power_db: link.tx_power_db,
            distance_m: link.d_tr_m,
            gain,
            packet_bits: link.packet_bits,
            slot_duration_s: tau,
            bandwidth_hz: env.bandwidth_hz,
            eb,
            n0: noise_psd(env),
            j0,
        })
    }

    pub fn ebn0(&self) -> f64 {
        self.eb / self.n0
    }

    pub fn j0n0(&self) -> f64 {
        self.j0 / self.n0
    }

    /// `E_b L / τ` over `(N_0 + J_0) B`.
    pub fn sinr(&self) -> f64 {
        self.eb * self.packet_bits as f64
            / self.slot_duration_s
            / (self.n0 * self.bandwidth_hz + self.j0 * self.bandwidth_hz)
    }

    pub fn bit_error(&self) -> f64 {
        css_bit_error(self.ebn0(), self.j0n0())
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Packet error probabilities for a clear and for a jammed slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub p_clear: f64,
    pub p_blocked: f64,
}

impl ErrorModel {
    pub fn new(p_clear: f64, p_blocked: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_clear) || !(0.0..=1.0).contains(&p_blocked) {
            return Err(domain(format!("error probabilities must lie in [0, 1] ({p_clear}, {p_blocked})")));
        }
        Ok(Self { p_clear, p_blocked })
    }
}

/// Name of a packet error model, as used in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerMode {
    Uncoded,
    Coded,
    Empirical,
}

impl PerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PerMode::Uncoded => "uncoded",
            PerMode::Coded => "coded",
            PerMode::Empirical => "empirical",
        }
    }
}

impl std::fmt::Display for PerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncoded" => Ok(PerMode::Uncoded),
            "coded" => Ok(PerMode::Coded),
            "empirical" => Ok(PerMode::Empirical),
            other => Err(Error::Config(format!("unknown PER mode '{other}' (uncoded|coded|empirical)"))),
        }
    }
}

/// A resolved packet error model.
#[derive(Debug, Clone, PartialEq)]
pub enum PerModel {
    Uncoded,
    Coded,
    Empirical(EmpiricalPerTable),
}

impl PerModel {
    pub fn mode(&self) -> PerMode {
        match self {
            PerModel::Uncoded => PerMode::Uncoded,
            PerModel::Coded => PerMode::Coded,
            PerModel::Empirical(_) => PerMode::Empirical,
        }
    }
}

/// `(p_clear, p_blocked)` for a jammer at `d_jr` metres from the receiver.
pub fn error_model_for_distance(
    d_jr: f64,
    link: &LinkParams,
    env: &AcousticEnvironment,
    model: &PerModel,
) -> Result<ErrorModel> {
    if !(d_jr > 0.0) {
        return Err(domain(format!("jammer distance must be positive (got {d_jr})")));
    }
    let packet_error = |p_bit: f64| match model {
        PerModel::Coded => per_coded(p_bit, &link.rs_code),
        _ => per_uncoded(p_bit, link.packet_bits),
    };
    match model {
        PerModel::Empirical(table) => ErrorModel::new(table.per_clear(), table.per_blocked_at(d_jr)),
        PerModel::Uncoded | PerModel::Coded => {
            let clear = LinkBudget::new(link, env, None)?;
            let jammed = LinkBudget::new(link, env, Some(d_jr))?;
            ErrorModel::new(packet_error(clear.bit_error()), packet_error(jammed.bit_error()))
        }
    }
}
