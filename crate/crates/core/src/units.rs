//! Physical unit conventions.
//!
//! Everything inside the crate is an angular frequency in rad/ps with ħ = 1.
//! Wavenumbers (cm⁻¹) and kelvin only appear at construction and reporting
//! boundaries.

use crate::error::{Error, Result};

/// Speed of light in cm/s (exact).
const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;

/// Conversion constants between wavenumbers, angular frequencies and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConstants {
    /// ħ in cm⁻¹·ps, i.e. 10¹² / (2π c).
    pub hbar_cm_ps: f64,
    /// k_B in cm⁻¹/K.
    pub kb_cm_per_k: f64,
}

impl UnitConstants {
    /// CODATA 2018 values.
    pub const CODATA: UnitConstants = UnitConstants {
        hbar_cm_ps: 1.0e12 / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_S),
        kb_cm_per_k: 0.695_034_800_9,
    };
}

impl Default for UnitConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Unit tag carried by Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EnergyUnit {
    /// Angular frequency, rad/ps (ħ = 1).
    #[default]
    RadPerPs,
    /// Wavenumber, cm⁻¹.
    Wavenumber,
}

impl EnergyUnit {
    /// Factor that converts a value in `self` to `target`.
    pub fn factor_to(self, target: EnergyUnit) -> f64 {
        let hbar = UnitConstants::CODATA.hbar_cm_ps;
        match (self, target) {
            (EnergyUnit::RadPerPs, EnergyUnit::Wavenumber) => hbar,
            (EnergyUnit::Wavenumber, EnergyUnit::RadPerPs) => 1.0 / hbar,
            _ => 1.0,
        }
    }
}

pub fn cm_to_radps(x_cm: f64) -> f64 {
    x_cm / UnitConstants::CODATA.hbar_cm_ps
}

pub fn radps_to_cm(x_radps: f64) -> f64 {
    x_radps * UnitConstants::CODATA.hbar_cm_ps
}

/// Thermal energy k_B T expressed as an angular frequency (rad/ps).
pub fn kbt_radps(temperature_k: f64) -> Result<f64> {
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature_k} K"
        )));
    }
    let c = UnitConstants::CODATA;
    Ok(c.kb_cm_per_k * temperature_k / c.hbar_cm_ps)
}

/// Inverse temperature β = 1/(k_B T) in units of 1/(rad/ps), i.e. ps.
pub fn beta_from_kelvin(temperature_k: f64) -> Result<f64> {
    kbt_radps(temperature_k).map(|kt| 1.0 / kt)
}

/// ħα / (k_B T) for a bath splitting α in rad/ps.
pub fn alpha_over_kbt(alpha_radps: f64, temperature_k: f64) -> Result<f64> {
    Ok(alpha_radps / kbt_radps(temperature_k)?)
}

/// Inverse of [`alpha_over_kbt`]: the splitting that gives a prescribed ratio.
pub fn alpha_from_ratio(ratio: f64, temperature_k: f64) -> Result<f64> {
    Ok(ratio * kbt_radps(temperature_k)?)
}
