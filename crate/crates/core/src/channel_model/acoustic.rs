//! Line-of-sight acoustic propagation: Thorp absorption, spreading loss and
//! the four-component ambient noise model.
//!
//! Frequencies are in kHz throughout, distances in metres, and levels in dB
//! re 1 µPa (re 1 µPa²/Hz for spectral densities).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Reference distance of the source level convention (dB re 1 µPa at 1 m).
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticEnvironment {
    /// Carrier frequency, kHz.
    pub carrier_khz: f64,
    /// Signal bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Geometric spreading exponent (1 cylindrical, 2 spherical).
    pub spreading_exp: f64,
    /// Shipping activity factor in `[0, 1]`.
    pub shipping: f64,
    /// Wind speed, m/s.
    pub wind_speed: f64,
}

impl Default for AcousticEnvironment {
    fn default() -> Self {
        Self { carrier_khz: 26.0, bandwidth_hz: 16_000.0, spreading_exp: 1.75, shipping: 1.0, wind_speed: 3.0 }
    }
}

impl AcousticEnvironment {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("acoustic environment: {what}")));
        if !(self.carrier_khz > 0.0 && self.carrier_khz.is_finite()) {
            return bad("carrier frequency must be positive");
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if !(1.0..=2.0).contains(&self.spreading_exp) {
            return bad("spreading exponent must lie in [1, 2]");
        }
        if !(0.0..=1.0).contains(&self.shipping) {
            return bad("shipping factor must lie in [0, 1]");
        }
        if !(self.wind_speed >= 0.0 && self.wind_speed.is_finite()) {
            return bad("wind speed must be non-negative");
        }
        Ok(())
    }
}

/// Thorp absorption coefficient in dB/km, `f` in kHz.
pub fn absorption_db_per_km(freq_khz: f64) -> Result<f64> {
    if !(freq_khz > 0.0) || !freq_khz.is_finite() {
        return Err(domain(format!("absorption needs a positive frequency (got {freq_khz})")));
    }
    let f2 = freq_khz * freq_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Path loss `10 log10 A(d, f)` in dB.
pub fn path_loss_db(distance_m: f64, env: &AcousticEnvironment) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(domain(format!("distance must be positive (got {distance_m})")));
    }
    let spreading = 10.0 * env.spreading_exp * (distance_m / REFERENCE_DISTANCE_M).log10();
    let absorption = absorption_db_per_km(env.carrier_khz)? * distance_m / 1000.0;
    Ok(spreading + absorption)
}

/// Linear power gain `1 / A(d, f)`.
pub fn channel_gain(distance_m: f64, env: &AcousticEnvironment) -> Result<f64> {
    Ok(10f64.powf(-path_loss_db(distance_m, env)? / 10.0))
}

/// Ambient noise power spectral density at the carrier, dB re 1 µPa²/Hz.
pub fn noise_psd_db(env: &AcousticEnvironment) -> f64 {
    let f = env.carrier_khz;
    let lf = f.log10();
    let turbulence = 17.0 - 30.0 * lf;
    let shipping = 40.0 + 20.0 * (env.shipping - 0.5) + 26.0 * lf - 60.0 * (f + 0.03).log10();
    let wind = 50.0 + 7.5 * env.wind_speed.sqrt() + 20.0 * lf - 40.0 * (f + 0.4).log10();
    let thermal = -15.0 + 20.0 * lf;
    let linear: f64 = [turbulence, shipping, wind, thermal].iter().map(|db| 10f64.powf(db / 10.0)).sum();
    10.0 * linear.log10()
}

/// Ambient noise PSD `N_0` at the carrier in linear units (µPa²/Hz).
pub fn noise_psd(env: &AcousticEnvironment) -> f64 {
    10f64.powf(noise_psd_db(env) / 10.0)
}
