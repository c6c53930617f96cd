//! Slant-path geometry between a ground station and a point above the
//! Earth's surface along a fixed zenith angle.

use crate::error::{Error, Result};

/// Mean Earth radius (m).
pub const EARTH_RADIUS: f64 = 6.371e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Ground-station altitude (m).
    pub h0: f64,
    /// Endpoint altitude above the surface (m).
    pub h: f64,
    /// Zenith angle (rad).
    pub theta: f64,
    pub earth_radius: f64,
}

impl LinkGeometry {
    pub fn new(h0: f64, h: f64, theta: f64) -> Result<Self> {
        let geom = Self {
            h0,
            h,
            theta,
            earth_radius: EARTH_RADIUS,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn zenith(h0: f64, h: f64) -> Result<Self> {
        Self::new(h0, h, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0 >= 0.0 && self.h0.is_finite()) {
            return Err(Error::domain(format!(
                "ground altitude must be finite and non-negative, got {}",
                self.h0
            )));
        }
        if !(self.h >= self.h0 && self.h.is_finite()) {
            return Err(Error::domain(format!(
                "endpoint altitude {} must not lie below the ground station at {}",
                self.h, self.h0
            )));
        }
        if !(self.theta >= 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!(
                "zenith angle must lie in [0, pi/2), got {}",
                self.theta
            )));
        }
        if !(self.earth_radius > 0.0) {
            return Err(Error::domain("earth radius must be positive"));
        }
        Ok(())
    }

    fn r(&self) -> f64 {
        self.earth_radius + self.h0
    }
}

/// Distance between the ground station and the endpoint.
pub fn slant_distance(geom: &LinkGeometry) -> Result<f64> {
    geom.validate()?;
    let dh = geom.h - geom.h0;
    if geom.theta == 0.0 {
        return Ok(dh);
    }
    let r = geom.r();
    let cos = geom.theta.cos();
    // √(Δh² + 2ΔhR + R²cos²θ) − R cosθ, rationalised to avoid cancellation
    // when Δh ≪ R.
    let root = (dh * dh + 2.0 * dh * r + r * r * cos * cos).sqrt();
    Ok(dh * (dh + 2.0 * r) / (root + r * cos))
}

/// Altitude above the surface at distance `y` along the path.
pub fn altitude_along_path(y: f64, geom: &LinkGeometry) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!(
            "path distance must be non-negative, got {y}"
        )));
    }
    Ok(altitude_unchecked(y, geom))
}

/// [`altitude_along_path`] without argument checks, for integrands.
pub(crate) fn altitude_unchecked(y: f64, geom: &LinkGeometry) -> f64 {
    let r = geom.r();
    let cos = geom.theta.cos();
    // √(R² + y² + 2yR cosθ) − R, rationalised.
    let num = y * y + 2.0 * y * r * cos;
    num / ((r * r + num).sqrt() + r) + geom.h0
}
