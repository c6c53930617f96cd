//! Gaussian-beam propagation: waist growth, diffraction loss, the
//! spherical-wave coherence length and the turbulent short/long-term waists.

use std::f64::consts::PI;

use crate::atmosphere::{cn2, path_breakpoints, TurbulenceProfile};
use crate::error::{Error, Result};
use crate::geometry::{altitude_unchecked, slant_distance, LinkGeometry};
use crate::numerics::{integrate_breaks, QuadratureSpec};

/// Angular pointing jitter of a transmitter (rad); σ_P = jitter · z.
pub const POINTING_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Collimation {
    Collimated,
    /// Wavefront curvature matched to the receiver distance.
    FocusedAtReceiver,
    /// Fixed wavefront curvature radius (m).
    Focused(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    /// Wavelength λ (m).
    pub wavelength: f64,
    /// Initial waist ϖ0 (m).
    pub waist: f64,
    pub collimation: Collimation,
}

impl Beam {
    pub fn collimated(wavelength: f64, waist: f64) -> Result<Self> {
        Self::new(wavelength, waist, Collimation::Collimated)
    }

    pub fn new(wavelength: f64, waist: f64, collimation: Collimation) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::domain(format!(
                "beam waist must be positive, got {waist}"
            )));
        }
        if let Collimation::Focused(r0) = collimation {
            if !(r0 > 0.0) {
                return Err(Error::domain(format!(
                    "curvature radius must be positive, got {r0}"
                )));
            }
        }
        Ok(Self {
            wavelength,
            waist,
            collimation,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    /// Aperture radius a_R (m).
    pub aperture: f64,
    /// Detector efficiency τ_eff.
    pub efficiency: f64,
    /// Field of view Ω_fov (sr).
    pub field_of_view: f64,
}

impl Receiver {
    pub fn new(aperture: f64, efficiency: f64, field_of_view: f64) -> Result<Self> {
        if !(aperture > 0.0 && aperture.is_finite()) {
            return Err(Error::domain(format!(
                "aperture must be positive, got {aperture}"
            )));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::domain(format!(
                "detector efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        if !(field_of_view > 0.0) {
            return Err(Error::domain("field of view must be positive"));
        }
        Ok(Self {
            aperture,
            efficiency,
            field_of_view,
        })
    }
}

/// Propagation direction of a slant path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Ground to space: turbulence sits near the transmitter.
    Up,
    /// Space to ground: turbulence sits near the receiver.
    Down,
}

pub fn rayleigh_range(beam: &Beam) -> f64 {
    PI * beam.waist * beam.waist / beam.wavelength
}

/// Beam waist after propagating a distance `z`.
pub fn waist_at(beam: &Beam, z: f64) -> f64 {
    let zr = rayleigh_range(beam);
    let focus = match beam.collimation {
        Collimation::Collimated => 1.0,
        Collimation::FocusedAtReceiver => 0.0,
        Collimation::Focused(r0) => 1.0 - z / r0,
    };
    beam.waist * (focus * focus + (z / zr) * (z / zr)).sqrt()
}

/// Fraction of a centred Gaussian beam of waist `w` collected by an aperture
/// of radius `aperture`.
pub fn tau_diffraction(w: f64, aperture: f64) -> f64 {
    let ratio = aperture / w;
    -(-2.0 * ratio * ratio).exp_m1()
}

fn rho0_from_integral(k: f64, integral: f64) -> f64 {
    let s = 1.46 * k * k * integral;
    if s < 1e-300 {
        f64::INFINITY
    } else {
        s.powf(-0.6)
    }
}

/// Spherical-wave coherence length ρ0 over a slant path.
pub fn coherence_length(
    geom: &LinkGeometry,
    profile: &TurbulenceProfile,
    direction: Direction,
    wavelength: f64,
) -> Result<f64> {
    let z = slant_distance(geom)?;
    if z == 0.0 {
        return Ok(f64::INFINITY);
    }
    let reversed = direction == Direction::Down;
    let points = path_breakpoints(geom, z, reversed);
    let integrand = |xi: f64| {
        let along = if reversed { z - xi } else { xi };
        let weight = (1.0 - xi / z).max(0.0).powf(5.0 / 3.0);
        weight * cn2(altitude_unchecked(along, geom), profile)
    };
    let est = integrate_breaks(integrand, &points, QuadratureSpec::default())?;
    Ok(rho0_from_integral(2.0 * PI / wavelength, est.value))
}

/// ρ0 for a path of length `z` through constant C_n².
pub fn coherence_length_horizontal(wavelength: f64, cn2: f64, z: f64) -> f64 {
    // ∫₀^z (1−ξ/z)^(5/3) dξ = 3z/8
    rho0_from_integral(2.0 * PI / wavelength, 0.375 * cn2 * z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulentWaists {
    pub w_z: f64,
    pub w_st: f64,
    pub w_lt: f64,
    pub rho0: f64,
    pub phi: f64,
    pub sigma_tb2: f64,
    pub sigma_p2: f64,
    pub sigma2: f64,
    /// The linearised short-term correction would have shrunk the beam
    /// below its diffraction waist and was dropped.
    pub phi_clamped: bool,
}

impl TurbulentWaists {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Short- and long-term waists after a distance `z` through turbulence of
/// coherence length `rho0`, with transmitter pointing jitter `jitter` (rad).
pub fn turbulent_waists(beam: &Beam, z: f64, rho0: f64, jitter: f64) -> Result<TurbulentWaists> {
    if !(z >= 0.0) || !(rho0 > 0.0) {
        return Err(Error::domain("turbulent waists need z >= 0 and rho0 > 0"));
    }
    let w_z = waist_at(beam, z);
    let sigma_p2 = (jitter * z) * (jitter * z);
    if rho0.is_infinite() || z == 0.0 {
        return Ok(TurbulentWaists {
            w_z,
            w_st: w_z,
            w_lt: w_z,
            rho0,
            phi: f64::INFINITY,
            sigma_tb2: 0.0,
            sigma_p2,
            sigma2: sigma_p2,
            phi_clamped: false,
        });
    }
    let phi = 0.33 * (rho0 / beam.waist).cbrt();
    let spread = beam.wavelength * z / (PI * rho0);
    let b = spread * spread;
    let w_lt2 = w_z * w_z + 2.0 * b;
    let (w_st2, sigma_tb2, phi_clamped) = if 1.0 - 2.0 * phi < 0.0 {
        (w_z * w_z, 2.0 * b, true)
    } else {
        (
            w_z * w_z + 2.0 * b * (1.0 - 2.0 * phi),
            4.0 * b * phi,
            false,
        )
    };
    if !(w_st2 > 0.0) {
        return Err(Error::Regime(format!(
            "short-term waist squared is {w_st2:e}"
        )));
    }
    Ok(TurbulentWaists {
        w_z,
        w_st: w_st2.sqrt(),
        w_lt: w_lt2.sqrt(),
        rho0,
        phi,
        sigma_tb2,
        sigma_p2,
        sigma2: sigma_tb2 + sigma_p2,
        phi_clamped,
    })
}

/// Weak-turbulence margin k·min(2a_R, ρ0)²/z; values ≥ 1 satisfy the
/// criterion.
pub fn weak_turbulence_margin(wavelength: f64, aperture: f64, rho0: f64, z: f64) -> f64 {
    if z == 0.0 {
        return f64::INFINITY;
    }
    let scale = (2.0 * aperture).min(rho0);
    2.0 * PI / wavelength * scale * scale / z
}
