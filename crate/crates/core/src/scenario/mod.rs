//! Named link scenarios: ground-satellite links with and without a relay,
//! horizontal ground and inter-satellite paths, and microwave slant links.

mod optimize;
mod segment;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::atmosphere::Weather;
use crate::beam::{Beam, Collimation, Direction, Receiver, POINTING_JITTER};
use crate::error::{Error, Result};
use crate::fading::FadingParams;
use crate::gaussian::{tmst, Channel, ChannelMoments, Observable, Regime, TwoModeCM};
use crate::thermal::{environment_variance, mean_thermal_photons_microwave, ThermalPreset};

pub use optimize::{
    baseline, optimize_station, Objective, StationOptimum, GRID_POINTS, POSITION_TOL,
};
pub use segment::{SegmentReport, WeakTurbulence};

use segment::{evaluate_segment, Medium, Segment};

/// Shortest horizontal path over which the weak-turbulence treatment is
/// trusted (m).
pub const HORIZONTAL_MIN: f64 = 200.0;
/// Longest such path (m).
pub const HORIZONTAL_MAX: f64 = 1066.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relay {
    Direct,
    /// The entangled pair is produced at the station and both modes travel.
    Generation,
    /// The beam is collected and re-emitted at the station.
    Lens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Source on the satellite, one mode sent to the ground.
    Downlink,
    /// Source on the ground, one mode sent to the satellite.
    Uplink,
    /// Source at a station between ground and satellite.
    IntermediateGeneration,
    /// Refocusing lens between ground and satellite.
    IntermediateLens(Direction),
    /// Two ground stations at constant altitude.
    HorizontalGround,
    /// Two satellites outside the atmosphere.
    Intersatellite,
    /// Microwave uplink from a ground station.
    MicrowaveSlant(Relay),
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Downlink => "downlink",
            ScenarioKind::Uplink => "uplink",
            ScenarioKind::IntermediateGeneration => "intermediate-generation",
            ScenarioKind::IntermediateLens(_) => "intermediate-lens",
            ScenarioKind::HorizontalGround => "horizontal-ground",
            ScenarioKind::Intersatellite => "intersatellite",
            ScenarioKind::MicrowaveSlant(_) => "microwave-slant",
        }
    }

    /// Uses an intermediate station whose position can be chosen.
    pub fn has_station(self) -> bool {
        matches!(
            self,
            ScenarioKind::IntermediateGeneration
                | ScenarioKind::IntermediateLens(_)
                | ScenarioKind::MicrowaveSlant(Relay::Generation | Relay::Lens)
        )
    }

    /// Path length is a horizontal distance rather than an altitude.
    pub fn is_horizontal(self) -> bool {
        matches!(
            self,
            ScenarioKind::HorizontalGround | ScenarioKind::Intersatellite
        )
    }

    pub fn is_microwave(self) -> bool {
        matches!(self, ScenarioKind::MicrowaveSlant(_))
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "downlink" => ScenarioKind::Downlink,
            "uplink" => ScenarioKind::Uplink,
            "intermediate-generation" => ScenarioKind::IntermediateGeneration,
            "intermediate-lens" => ScenarioKind::IntermediateLens(Direction::Up),
            "horizontal-ground" => ScenarioKind::HorizontalGround,
            "intersatellite" => ScenarioKind::Intersatellite,
            "microwave-slant" => ScenarioKind::MicrowaveSlant(Relay::Direct),
            _ => return Err(Error::domain(format!("unknown scenario `{s}`"))),
        })
    }
}

/// Everything needed to evaluate one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub beam: Beam,
    pub receiver: Receiver,
    pub weather: Weather,
    pub regime: Regime,
    /// Two-mode squeezing r of the source.
    pub squeezing: f64,
    /// Thermal photons per mode in the source (0 for a squeezed vacuum).
    pub source_photons: f64,
    /// Ground-station altitude h0 (m).
    pub ground_altitude: f64,
    /// Satellite altitude h for slant links (m).
    pub altitude: f64,
    /// Path length for horizontal and inter-satellite links (m).
    pub distance: f64,
    /// Constant altitude of a horizontal ground path (m).
    pub horizontal_altitude: f64,
    /// Altitude of the relay station or lens (m); midpoint when unset.
    pub station: Option<f64>,
    /// Zenith angle (rad).
    pub zenith: f64,
    /// Background photons at the receivers, overriding the presets.
    pub thermal_photons: Option<f64>,
    /// Transmitter pointing jitter (rad).
    pub pointing_jitter: f64,
    /// Sky temperature for the microwave background (K).
    pub temperature: f64,
}

impl ScenarioConfig {
    /// Optical ground-satellite link: 800 nm, 20 cm waist, 40 cm aperture,
    /// r = 1, clear night, fast fading.
    pub fn optical_slant(kind: ScenarioKind, altitude: f64) -> Self {
        Self {
            kind,
            beam: Beam {
                wavelength: 800e-9,
                waist: 0.2,
                collimation: Collimation::Collimated,
            },
            receiver: Receiver {
                aperture: 0.4,
                efficiency: 1.0,
                field_of_view: 1e-10,
            },
            weather: Weather::ClearNight,
            regime: Regime::Fast,
            squeezing: 1.0,
            source_photons: 0.0,
            ground_altitude: 0.0,
            altitude,
            distance: 0.0,
            horizontal_altitude: 30.0,
            station: None,
            zenith: 0.0,
            thermal_photons: None,
            pointing_jitter: POINTING_JITTER,
            temperature: 288.0,
        }
    }

    /// Horizontal optical link: 800 nm, 5 cm waist, 5 cm aperture at 30 m.
    pub fn horizontal(kind: ScenarioKind, distance: f64) -> Self {
        Self {
            beam: Beam {
                wavelength: 800e-9,
                waist: 0.05,
                collimation: Collimation::Collimated,
            },
            receiver: Receiver {
                aperture: 0.05,
                efficiency: 1.0,
                field_of_view: 1e-10,
            },
            distance,
            altitude: 0.0,
            ..Self::optical_slant(kind, 0.0)
        }
    }

    /// Microwave uplink in rain: 6 cm wavelength, 1 m waist, 2 m aperture,
    /// ground station at 10 m, squeezed thermal source with 0.01 photons.
    pub fn microwave(relay: Relay, distance: f64) -> Self {
        Self {
            kind: ScenarioKind::MicrowaveSlant(relay),
            beam: Beam {
                wavelength: 0.06,
                waist: 1.0,
                collimation: Collimation::Collimated,
            },
            receiver: Receiver {
                aperture: 2.0,
                efficiency: 1.0,
                field_of_view: 1e-4,
            },
            weather: Weather::RainDay,
            source_photons: 0.01,
            ground_altitude: 10.0,
            altitude: 10.0 + distance,
            ..Self::optical_slant(ScenarioKind::MicrowaveSlant(relay), 0.0)
        }
    }

    /// Default configuration for a scenario kind.
    pub fn for_kind(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::HorizontalGround => Self::horizontal(kind, 500.0),
            ScenarioKind::Intersatellite => Self::horizontal(kind, 1e5),
            ScenarioKind::MicrowaveSlant(relay) => Self::microwave(relay, 30.0),
            _ => Self::optical_slant(kind, 5e5),
        }
    }

    pub fn source(&self) -> TwoModeCM {
        tmst(self.squeezing, self.source_photons)
    }

    /// Length of the whole link: altitude above the ground station for
    /// slant links, distance for horizontal ones.
    pub fn total_length(&self) -> f64 {
        if self.kind.is_horizontal() {
            self.distance
        } else {
            self.altitude - self.ground_altitude
        }
    }

    /// Station altitude, defaulting to the midpoint of the link.
    pub fn station_altitude(&self) -> f64 {
        self.station
            .unwrap_or(0.5 * (self.ground_altitude + self.altitude))
    }

    pub fn validate(&self) -> Result<()> {
        Beam::new(self.beam.wavelength, self.beam.waist, self.beam.collimation)?;
        Receiver::new(
            self.receiver.aperture,
            self.receiver.efficiency,
            self.receiver.field_of_view,
        )?;
        if !(self.squeezing >= 0.0 && self.squeezing.is_finite()) {
            return Err(Error::domain("squeezing must be finite and non-negative"));
        }
        if !(self.source_photons >= 0.0) {
            return Err(Error::domain("source photons must be non-negative"));
        }
        if let Some(n) = self.thermal_photons {
            if !(n >= 0.0) {
                return Err(Error::domain("thermal photons must be non-negative"));
            }
        }
        if self.kind.is_horizontal() {
            if !(self.distance >= 0.0 && self.distance.is_finite()) {
                return Err(Error::domain(format!(
                    "distance must be non-negative, got {}",
                    self.distance
                )));
            }
        } else if !(self.altitude >= self.ground_altitude && self.ground_altitude >= 0.0) {
            return Err(Error::domain(format!(
                "altitude {} must not lie below the ground station at {}",
                self.altitude, self.ground_altitude
            )));
        }
        if self.kind.has_station() {
            let s = self.station_altitude();
            if !(s >= self.ground_altitude && s <= self.altitude) {
                return Err(Error::domain(format!(
                    "station altitude {s} lies outside the link [{}, {}]",
                    self.ground_altitude, self.altitude
                )));
            }
        }
        Ok(())
    }

    /// Background photons at a receiver at the end of a segment travelling
    /// in `direction`.
    fn background(&self, direction: Direction) -> f64 {
        if let Some(n) = self.thermal_photons {
            return n;
        }
        let day = self.weather.is_day();
        let preset = match self.kind {
            ScenarioKind::MicrowaveSlant(_) => {
                return mean_thermal_photons_microwave(
                    self.receiver.field_of_view,
                    self.receiver.aperture,
                    self.beam.wavelength,
                    self.temperature,
                )
            }
            ScenarioKind::HorizontalGround if day => ThermalPreset::HorizDay,
            ScenarioKind::HorizontalGround => ThermalPreset::HorizNight,
            ScenarioKind::Intersatellite => ThermalPreset::Intersat,
            _ if self.weather.is_rain() => ThermalPreset::OpticalRain,
            _ => match (direction, day) {
                (Direction::Down, true) => ThermalPreset::DownDay,
                (Direction::Down, false) => ThermalPreset::DownNight,
                (Direction::Up, true) => ThermalPreset::UpDay,
                (Direction::Up, false) => ThermalPreset::UpNight,
            },
        };
        preset.photons()
    }

    fn env(&self, direction: Direction) -> f64 {
        environment_variance(self.receiver.efficiency, self.background(direction))
    }
}

/// Diagnostics attached to a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    WeakTurbulenceViolated,
    PhiClamped,
    OutsideValidityWindow,
    DegenerateOptimum,
    BoundaryOptimum,
    QuadratureFallback,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::WeakTurbulenceViolated => "weak-turbulence-violated",
            Flag::PhiClamped => "phi-clamped",
            Flag::OutsideValidityWindow => "outside-validity-window",
            Flag::DegenerateOptimum => "degenerate-optimum",
            Flag::BoundaryOptimum => "boundary-optimum",
            Flag::QuadratureFallback => "quadrature-fallback",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `;`-separated flag names, empty when there are none.
pub fn format_flags(flags: &BTreeSet<Flag>) -> String {
    flags.iter().map(|f| f.name()).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub tau_mean: f64,
    pub sqrt_tau_mean: f64,
    pub tau_max: f64,
    pub negativity: f64,
    pub fidelity: f64,
    pub regime: Regime,
    pub flags: BTreeSet<Flag>,
    /// Averaged covariance matrix; only defined for fast fading.
    pub output_state: Option<TwoModeCM>,
    pub segments: Vec<SegmentReport>,
}

/// The channel a configuration describes, with per-segment reports.
pub fn build_channel(cfg: &ScenarioConfig) -> Result<(Channel, Vec<SegmentReport>)> {
    cfg.validate()?;
    let eff = cfg.receiver.efficiency;
    let (h0, h) = (cfg.ground_altitude, cfg.altitude);
    let medium = if cfg.kind.is_microwave() {
        Medium::Microwave
    } else {
        Medium::Optical
    };
    let slant = |lower, upper, direction, efficiency| Segment {
        lower,
        upper,
        direction,
        efficiency,
        medium,
    };
    match cfg.kind {
        ScenarioKind::Downlink
        | ScenarioKind::Uplink
        | ScenarioKind::MicrowaveSlant(Relay::Direct) => {
            let direction = if cfg.kind == ScenarioKind::Downlink {
                Direction::Down
            } else {
                Direction::Up
            };
            let seg = evaluate_segment(cfg, &slant(h0, h, direction, eff))?;
            let channel = Channel::OneSided {
                link: seg.fading,
                m: cfg.env(direction),
            };
            Ok((channel, vec![seg]))
        }
        ScenarioKind::IntermediateGeneration | ScenarioKind::MicrowaveSlant(Relay::Generation) => {
            let s = cfg.station_altitude();
            let down = evaluate_segment(cfg, &slant(h0, s, Direction::Down, eff))?;
            let up = evaluate_segment(cfg, &slant(s, h, Direction::Up, eff))?;
            let channel = Channel::TwoSided {
                down: down.fading,
                up: up.fading,
                m_down: cfg.env(Direction::Down),
                m_up: cfg.env(Direction::Up),
            };
            Ok((channel, vec![down, up]))
        }
        ScenarioKind::IntermediateLens(_) | ScenarioKind::MicrowaveSlant(Relay::Lens) => {
            let direction = match cfg.kind {
                ScenarioKind::IntermediateLens(d) => d,
                _ => Direction::Up,
            };
            let s = cfg.station_altitude();
            // Only the final receiver has a detector.
            let (first, second) = match direction {
                Direction::Up => (slant(h0, s, direction, 1.0), slant(s, h, direction, eff)),
                Direction::Down => (slant(s, h, direction, 1.0), slant(h0, s, direction, eff)),
            };
            let first = evaluate_segment(cfg, &first)?;
            let second = evaluate_segment(cfg, &second)?;
            let channel = Channel::Relayed {
                first: first.fading,
                second: second.fading,
                m: cfg.env(direction),
            };
            Ok((channel, vec![first, second]))
        }
        ScenarioKind::HorizontalGround | ScenarioKind::Intersatellite => {
            let medium = if cfg.kind == ScenarioKind::Intersatellite {
                Medium::Vacuum
            } else {
                Medium::Horizontal
            };
            let seg = evaluate_segment(
                cfg,
                &Segment {
                    lower: 0.0,
                    upper: cfg.distance,
                    direction: Direction::Up,
                    efficiency: eff,
                    medium,
                },
            )?;
            let channel = Channel::OneSided {
                link: seg.fading,
                m: cfg.env(Direction::Up),
            };
            Ok((channel, vec![seg]))
        }
    }
}

fn links(channel: &Channel) -> Vec<FadingParams> {
    match channel {
        Channel::OneSided { link, .. } => vec![*link],
        Channel::Relayed { first, second, .. } => vec![*first, *second],
        Channel::TwoSided { down, up, .. } => vec![*down, *up],
    }
}

/// Evaluate the observables of a configured link.
pub fn evaluate(cfg: &ScenarioConfig) -> Result<LinkResult> {
    let (channel, segments) = build_channel(cfg)?;
    let source = cfg.source();
    let mut flags = BTreeSet::new();
    for seg in &segments {
        flags.extend(seg.flags.iter().copied());
    }
    if cfg.kind == ScenarioKind::HorizontalGround
        && !(HORIZONTAL_MIN..=HORIZONTAL_MAX).contains(&cfg.distance)
    {
        flags.insert(Flag::OutsideValidityWindow);
    }

    let mut tau_mean = 1.0;
    let mut sqrt_tau_mean = 1.0;
    let mut tau_max = 1.0;
    for link in links(&channel) {
        let m = ChannelMoments::of(&link)?;
        tau_mean *= m.t1;
        sqrt_tau_mean *= m.t2;
        tau_max *= link.tau_max;
    }

    let negativity = channel.average(&source, Observable::Negativity, cfg.regime)?;
    let fidelity = channel.average(&source, Observable::Fidelity, cfg.regime)?;
    if negativity.fallback || fidelity.fallback {
        flags.insert(Flag::QuadratureFallback);
    }
    let output_state = match cfg.regime {
        Regime::Fast => Some(channel.output_state(&source)?),
        Regime::Slow => None,
    };
    Ok(LinkResult {
        tau_mean,
        sqrt_tau_mean,
        tau_max,
        negativity: negativity.value,
        fidelity: fidelity.value,
        regime: cfg.regime,
        flags,
        output_state,
        segments,
    })
}

/// Weak-turbulence criterion for the most demanding segment of the link.
pub fn weak_turbulence_check(cfg: &ScenarioConfig) -> Result<WeakTurbulence> {
    let (_, segments) = build_channel(cfg)?;
    let margin = segments
        .iter()
        .map(|s| s.weak_turbulence_margin)
        .fold(f64::INFINITY, f64::min);
    Ok(WeakTurbulence {
        satisfied: margin >= 1.0,
        margin,
    })
}
