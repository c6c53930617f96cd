//! One propagation leg between a transmitter and a receiver.

use crate::atmosphere::{cn2, tau_atm_microwave, tau_atm_optical, tau_atm_optical_horizontal};
use crate::beam::{
    coherence_length, coherence_length_horizontal, tau_diffraction, turbulent_waists, waist_at,
    weak_turbulence_margin, Direction,
};
use crate::error::Result;
use crate::fading::{fit_fading_params, FadingParams};
use crate::geometry::{slant_distance, LinkGeometry};

use super::{Flag, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Medium {
    Optical,
    /// Constant-altitude optical path.
    Horizontal,
    /// No atmosphere at all.
    Vacuum,
    Microwave,
}

/// A leg between altitudes (or, off the slant kinds, distances along the
/// path) `lower` and `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Segment {
    pub lower: f64,
    pub upper: f64,
    pub direction: Direction,
    /// Detection efficiency at the end of this leg; 1 for an intermediate lens.
    pub efficiency: f64,
    pub medium: Medium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    pub lower: f64,
    pub upper: f64,
    /// Propagation distance (m).
    pub length: f64,
    pub rho0: f64,
    pub w_st: f64,
    pub w_lt: f64,
    pub tau_atm: f64,
    pub fading: FadingParams,
    pub weak_turbulence_margin: f64,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakTurbulence {
    pub satisfied: bool,
    /// k·min(2a_R, ρ0)²/z for the tightest segment.
    pub margin: f64,
}

fn zero_length(seg: &Segment, w0: f64) -> SegmentReport {
    // A vanishing leg only keeps its detector.
    SegmentReport {
        lower: seg.lower,
        upper: seg.upper,
        length: 0.0,
        rho0: f64::INFINITY,
        w_st: w0,
        w_lt: w0,
        tau_atm: 1.0,
        fading: FadingParams::deterministic(seg.efficiency),
        weak_turbulence_margin: f64::INFINITY,
        flags: Vec::new(),
    }
}

pub(super) fn evaluate_segment(cfg: &ScenarioConfig, seg: &Segment) -> Result<SegmentReport> {
    let beam = &cfg.beam;
    let aperture = cfg.receiver.aperture;
    let weather = cfg.weather;

    let (length, geom) = match seg.medium {
        Medium::Optical | Medium::Microwave => {
            let geom = LinkGeometry::new(seg.lower, seg.upper, cfg.zenith)?;
            (slant_distance(&geom)?, Some(geom))
        }
        Medium::Horizontal | Medium::Vacuum => (seg.upper - seg.lower, None),
    };
    if length == 0.0 {
        return Ok(zero_length(seg, beam.waist));
    }

    if seg.medium == Medium::Microwave {
        let geom = geom.expect("slant medium has a geometry");
        let w = waist_at(beam, length);
        let tau_atm = tau_atm_microwave(&geom, &weather.microwave())?;
        let tau = tau_diffraction(w, aperture) * tau_atm * seg.efficiency;
        return Ok(SegmentReport {
            lower: seg.lower,
            upper: seg.upper,
            length,
            rho0: f64::INFINITY,
            w_st: w,
            w_lt: w,
            tau_atm,
            fading: FadingParams::deterministic(tau),
            weak_turbulence_margin: f64::INFINITY,
            flags: Vec::new(),
        });
    }

    let (rho0, tau_atm) = match seg.medium {
        Medium::Optical => {
            let geom = geom.expect("slant medium has a geometry");
            (
                coherence_length(&geom, &weather.turbulence(), seg.direction, beam.wavelength)?,
                tau_atm_optical(&geom, &weather.extinction())?,
            )
        }
        Medium::Horizontal => {
            let h = cfg.horizontal_altitude;
            (
                coherence_length_horizontal(beam.wavelength, cn2(h, &weather.turbulence()), length),
                tau_atm_optical_horizontal(length, h, &weather.extinction()),
            )
        }
        Medium::Vacuum => (f64::INFINITY, 1.0),
        Medium::Microwave => unreachable!(),
    };

    let waists = turbulent_waists(beam, length, rho0, cfg.pointing_jitter)?;
    let fading = fit_fading_params(
        waists.w_st,
        aperture,
        tau_atm,
        seg.efficiency,
        waists.sigma(),
    )?;
    // Without turbulence there is no scintillation to bound.
    let margin = if seg.medium == Medium::Vacuum {
        f64::INFINITY
    } else {
        weak_turbulence_margin(beam.wavelength, aperture, rho0, length)
    };

    let mut flags = Vec::new();
    if margin < 1.0 {
        flags.push(Flag::WeakTurbulenceViolated);
    }
    if waists.phi_clamped {
        flags.push(Flag::PhiClamped);
    }
    Ok(SegmentReport {
        lower: seg.lower,
        upper: seg.upper,
        length,
        rho0,
        w_st: waists.w_st,
        w_lt: waists.w_lt,
        tau_atm,
        fading,
        weak_turbulence_margin: margin,
        flags,
    })
}
