//! Mean thermal photon numbers at the detector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;
pub const PLANCK: f64 = 6.626e-34;
pub const BOLTZMANN: f64 = 1.3807e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionWindow {
    /// Spectral filter width Δλ (m).
    pub delta_lambda: f64,
    /// Time window Δt (s).
    pub delta_t: f64,
    /// Field of view Ω_fov (sr).
    pub field_of_view: f64,
    /// Aperture radius a_R (m).
    pub aperture: f64,
    /// Sky temperature T (K).
    pub temperature: f64,
}

/// Bose occupation [e^(hc/λk_BT) − 1]^(−1) of a mode at wavelength `lambda`.
pub fn mode_occupancy(lambda: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = PLANCK * SPEED_OF_LIGHT / (lambda * BOLTZMANN * temperature);
    // exp_m1 overflows to +inf for large x, giving the 0 photon limit.
    1.0 / x.exp_m1()
}

/// Black-body photon number per unit collection parameter,
/// N_BB = 2cλ^(−4) [e^(hc/λk_BT) − 1]^(−1).
pub fn black_body_photons(lambda: f64, temperature: f64) -> f64 {
    2.0 * SPEED_OF_LIGHT / lambda.powi(4) * mode_occupancy(lambda, temperature)
}

/// n = Γ_R N_BB with Γ_R = Δλ Δt Ω_fov a_R².
pub fn mean_thermal_photons_optical(window: &DetectionWindow, lambda: f64) -> f64 {
    let gamma_r = window.delta_lambda
        * window.delta_t
        * window.field_of_view
        * window.aperture
        * window.aperture;
    gamma_r * black_body_photons(lambda, window.temperature)
}

/// n with a time-bandwidth product of one, Γ_R = λ²Ω_fov a_R²/c.
pub fn mean_thermal_photons_microwave(
    field_of_view: f64,
    aperture: f64,
    lambda: f64,
    temperature: f64,
) -> f64 {
    let gamma_r = lambda * lambda * field_of_view * aperture * aperture / SPEED_OF_LIGHT;
    gamma_r * black_body_photons(lambda, temperature)
}

/// Background photon numbers adopted for the named scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThermalPreset {
    DownDay,
    DownNight,
    UpDay,
    UpNight,
    HorizDay,
    HorizNight,
    Intersat,
    OpticalRain,
}

impl ThermalPreset {
    pub const ALL: [ThermalPreset; 8] = [
        ThermalPreset::DownDay,
        ThermalPreset::DownNight,
        ThermalPreset::UpDay,
        ThermalPreset::UpNight,
        ThermalPreset::HorizDay,
        ThermalPreset::HorizNight,
        ThermalPreset::Intersat,
        ThermalPreset::OpticalRain,
    ];

    pub fn photons(self) -> f64 {
        match self {
            ThermalPreset::DownDay => 0.30,
            ThermalPreset::DownNight => 3.40e-6,
            ThermalPreset::UpDay => 0.22,
            ThermalPreset::UpNight => 5.43e-7,
            ThermalPreset::HorizDay => 4.75e-3,
            ThermalPreset::HorizNight => 4.75e-8,
            ThermalPreset::Intersat => 8.48e-9,
            ThermalPreset::OpticalRain => 13.57,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThermalPreset::DownDay => "down-day",
            ThermalPreset::DownNight => "down-night",
            ThermalPreset::UpDay => "up-day",
            ThermalPreset::UpNight => "up-night",
            ThermalPreset::HorizDay => "horiz-day",
            ThermalPreset::HorizNight => "horiz-night",
            ThermalPreset::Intersat => "intersat",
            ThermalPreset::OpticalRain => "optical-rain",
        }
    }
}

impl fmt::Display for ThermalPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThermalPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ThermalPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown thermal preset `{s}`")))
    }
}

/// Environment quadrature variance m = 1 + 2 τ_eff n.
pub fn environment_variance(tau_eff: f64, photons: f64) -> f64 {
    1.0 + 2.0 * tau_eff * photons
}
