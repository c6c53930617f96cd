//! Optical extinction, microwave absorption and the Hufnagel-Valley
//! refractive-index structure constant.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{altitude_unchecked, slant_distance, LinkGeometry};
use crate::numerics::{integrate_breaks, QuadratureSpec};

/// Default extinction scale height (m).
pub const SCALE_HEIGHT: f64 = 6600.0;
/// Default high-altitude wind speed in the Hufnagel-Valley profile (m/s).
pub const WIND_SPEED: f64 = 21.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceProfile {
    /// Wind speed v (m/s).
    pub wind_speed: f64,
    /// Ground-level turbulence A (m^-2/3).
    pub ground_turbulence: f64,
}

impl TurbulenceProfile {
    pub fn new(wind_speed: f64, ground_turbulence: f64) -> Result<Self> {
        if !(wind_speed >= 0.0 && ground_turbulence >= 0.0) {
            return Err(Error::domain(
                "turbulence profile parameters must be non-negative",
            ));
        }
        Ok(Self {
            wind_speed,
            ground_turbulence,
        })
    }

    /// A profile with no turbulence at all.
    pub fn calm() -> Self {
        Self {
            wind_speed: 0.0,
            ground_turbulence: 0.0,
        }
    }
}

/// Hufnagel-Valley C_n² at altitude `h` (m).
pub fn cn2(h: f64, profile: &TurbulenceProfile) -> f64 {
    if profile.wind_speed == 0.0 && profile.ground_turbulence == 0.0 {
        return 0.0;
    }
    let v = profile.wind_speed / 27.0;
    5.94e-53 * v * v * h.powi(10) * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + profile.ground_turbulence * (-h / 100.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalExtinction {
    /// Sea-level extinction factor α0 (1/m).
    pub alpha0: f64,
    /// Scale height h̃ (m).
    pub h_tilde: f64,
}

impl OpticalExtinction {
    pub fn new(alpha0: f64, h_tilde: f64) -> Result<Self> {
        if !(alpha0 >= 0.0 && h_tilde > 0.0) {
            return Err(Error::domain(
                "extinction needs alpha0 >= 0 and a positive scale height",
            ));
        }
        Ok(Self { alpha0, h_tilde })
    }
}

/// Microwave absorption model. Coefficients are per km, altitudes in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveAbsorption {
    /// Ground water-vapour density (g/m³).
    pub p0: f64,
    /// Oxygen absorption (1/km).
    pub alpha_o: f64,
    /// Water-vapour absorption per unit density (1/km per g/m³).
    pub water_coeff: f64,
    /// Water-vapour scale height (km).
    pub water_scale_height: f64,
    /// Altitude above which oxygen absorption is dropped (km).
    pub oxygen_cutoff: f64,
}

impl MicrowaveAbsorption {
    pub fn with_water_vapour(p0: f64) -> Self {
        Self {
            p0,
            ..Self::default()
        }
    }

    /// α(h) in 1/km for `h_km` in km.
    pub fn coefficient(&self, h_km: f64) -> f64 {
        let oxygen = if h_km <= self.oxygen_cutoff {
            self.alpha_o
        } else {
            0.0
        };
        oxygen + self.water_coeff * self.p0 * (-h_km / self.water_scale_height).exp()
    }
}

impl Default for MicrowaveAbsorption {
    fn default() -> Self {
        Self {
            p0: 7.5,
            alpha_o: 1.44e-3,
            water_coeff: 4.44e-5,
            water_scale_height: 2.0,
            oxygen_cutoff: 20.0,
        }
    }
}

/// Named weather conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weather {
    ClearDay,
    ClearNight,
    RainDay,
    RainNight,
}

impl Weather {
    pub const ALL: [Weather; 4] = [
        Weather::ClearDay,
        Weather::ClearNight,
        Weather::RainDay,
        Weather::RainNight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Weather::ClearDay => "clear-day",
            Weather::ClearNight => "clear-night",
            Weather::RainDay => "rain-day",
            Weather::RainNight => "rain-night",
        }
    }

    pub fn is_day(self) -> bool {
        matches!(self, Weather::ClearDay | Weather::RainDay)
    }

    pub fn is_rain(self) -> bool {
        matches!(self, Weather::RainDay | Weather::RainNight)
    }

    pub fn turbulence(self) -> TurbulenceProfile {
        let a = match self {
            Weather::ClearDay => 2.75e-14,
            Weather::ClearNight => 1.7e-14,
            Weather::RainDay => 3.15e-14,
            Weather::RainNight => 2.15e-14,
        };
        TurbulenceProfile {
            wind_speed: WIND_SPEED,
            ground_turbulence: a,
        }
    }

    pub fn extinction(self) -> OpticalExtinction {
        let alpha0 = if self.is_rain() { 3.4e-4 } else { 5e-6 };
        OpticalExtinction {
            alpha0,
            h_tilde: SCALE_HEIGHT,
        }
    }

    pub fn microwave(self) -> MicrowaveAbsorption {
        MicrowaveAbsorption::with_water_vapour(if self.is_rain() { 12.0 } else { 7.5 })
    }
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weather {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Weather::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown weather preset `{s}`")))
    }
}

/// Altitudes (m) at which atmospheric profiles change character.
const ALTITUDE_MARKS: [f64; 10] = [50.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5];

/// Quadrature breakpoints in path distance for a path over `geom`, covering
/// `[0, z]`. With `reversed` the path is traversed from the far end, as in
/// a downlink.
pub(crate) fn path_breakpoints(geom: &LinkGeometry, z: f64, reversed: bool) -> Vec<f64> {
    let mut marks: Vec<f64> = ALTITUDE_MARKS.to_vec();
    let mut next = 2e5;
    while next < geom.h {
        marks.push(next);
        next *= 2.0;
    }
    let mut points = vec![0.0, z];
    for mark in marks {
        if mark <= geom.h0 || mark >= geom.h {
            continue;
        }
        let partial = LinkGeometry { h: mark, ..*geom };
        if let Ok(d) = slant_distance(&partial) {
            if d > 0.0 && d < z {
                points.push(if reversed { z - d } else { d });
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// g(h, θ) = ∫₀^z e^(−h(y)/h̃) dy along the slant path.
pub fn extinction_integral(geom: &LinkGeometry, ext: &OpticalExtinction) -> Result<f64> {
    let z = slant_distance(geom)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    let points = path_breakpoints(geom, z, false);
    let est = integrate_breaks(
        |y| (-altitude_unchecked(y, geom) / ext.h_tilde).exp(),
        &points,
        QuadratureSpec::default(),
    )?;
    Ok(est.value)
}

/// Constant-altitude variant of [`extinction_integral`].
pub fn extinction_integral_horizontal(z: f64, h: f64, ext: &OpticalExtinction) -> f64 {
    z * (-h / ext.h_tilde).exp()
}

/// Optical transmissivity e^(−α0 g) along a slant path.
pub fn tau_atm_optical(geom: &LinkGeometry, ext: &OpticalExtinction) -> Result<f64> {
    if ext.alpha0 == 0.0 {
        geom.validate()?;
        return Ok(1.0);
    }
    Ok((-ext.alpha0 * extinction_integral(geom, ext)?).exp())
}

/// Optical transmissivity over a horizontal path of length `z` at altitude `h`.
pub fn tau_atm_optical_horizontal(z: f64, h: f64, ext: &OpticalExtinction) -> f64 {
    (-ext.alpha0 * extinction_integral_horizontal(z, h, ext)).exp()
}

/// Microwave transmissivity exp[−secθ ∫ α(h′) dh′] between the path ends.
pub fn tau_atm_microwave(geom: &LinkGeometry, abs: &MicrowaveAbsorption) -> Result<f64> {
    geom.validate()?;
    let lo = geom.h0 / 1e3;
    let hi = geom.h / 1e3;
    if hi == lo {
        return Ok(1.0);
    }
    let mut points = vec![lo, hi];
    for mark in [
        abs.oxygen_cutoff,
        abs.water_scale_height,
        5.0 * abs.water_scale_height,
    ] {
        if mark > lo && mark < hi {
            points.push(mark);
        }
    }
    // Past ~80 scale heights the water term is below 1e-35 of its ground value.
    let water_end = 80.0 * abs.water_scale_height;
    if water_end > lo && water_end < hi {
        points.push(water_end);
    }
    points.sort_by(f64::total_cmp);
    let column = integrate_breaks(
        |h| abs.coefficient(h),
        &points,
        QuadratureSpec::with_rel_tol(1e-12),
    )?;
    Ok((-column.value / geom.theta.cos()).exp())
}
