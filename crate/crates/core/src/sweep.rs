//! Parameter sweeps and their CSV rendering.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::{
    evaluate, format_flags, optimize_station, LinkResult, Objective, ScenarioConfig,
};

pub const CSV_HEADER: &str =
    "param,tau_mean,sqrt_tau_mean,tau_max,negativity,fidelity,regime,flags";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Satellite altitude for slant links.
    Altitude,
    /// Path length: horizontal distance, or height above the ground
    /// station for slant links.
    Distance,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Altitude => "altitude",
            SweepParam::Distance => "distance",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "altitude" => Ok(SweepParam::Altitude),
            "distance" => Ok(SweepParam::Distance),
            _ => Err(Error::domain(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::domain(format!("unknown spacing `{s}`"))),
        }
    }
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Re-optimise the station at every point instead of using the
    /// configured position.
    pub optimize: Option<Objective>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::domain(format!(
                "sweep needs start < stop, got {} and {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::domain("a sweep needs at least two points"));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err(Error::domain("log spacing needs a positive start"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    return self.start;
                }
                if i + 1 == self.points {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + t * (self.stop / self.start).ln()).exp(),
                }
            })
            .map(|x| x.clamp(self.start, self.stop))
            .collect()
    }
}

/// `cfg` with the swept parameter set to `value`. A configured station
/// keeps its height relative to the link.
pub fn with_param(cfg: &ScenarioConfig, param: SweepParam, value: f64) -> ScenarioConfig {
    let mut out = *cfg;
    if cfg.kind.is_horizontal() {
        out.distance = value;
        return out;
    }
    out.altitude = match param {
        SweepParam::Altitude => value,
        SweepParam::Distance => cfg.ground_altitude + value,
    };
    if let Some(s) = cfg.station {
        let old = cfg.altitude - cfg.ground_altitude;
        if old > 0.0 {
            out.station = Some(
                cfg.ground_altitude
                    + (s - cfg.ground_altitude) / old * (out.altitude - cfg.ground_altitude),
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub result: LinkResult,
    /// Station altitude used for the row, if any.
    pub station: Option<f64>,
}

/// Evaluate every grid point. Points run in parallel; rows come back in
/// grid order.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.grid()
        .par_iter()
        .map(|&x| {
            let point = with_param(cfg, spec.param, x);
            match spec.optimize {
                Some(objective) => {
                    let opt = optimize_station(&point, objective)?;
                    Ok(SweepRow {
                        param: x,
                        result: opt.result,
                        station: Some(opt.position),
                    })
                }
                None => Ok(SweepRow {
                    param: x,
                    result: evaluate(&point)?,
                    station: point.kind.has_station().then(|| point.station_altitude()),
                }),
            }
        })
        .collect()
}

/// Write `rows` as CSV, preceded by `comments` as `#` lines.
pub fn write_csv<W: Write>(mut out: W, comments: &[String], rows: &[SweepRow]) -> io::Result<()> {
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let r = &row.result;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.param,
            r.tau_mean,
            r.sqrt_tau_mean,
            r.tau_max,
            r.negativity,
            r.fidelity,
            r.regime,
            format_flags(&r.flags)
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    fn spec(points: usize, spacing: Spacing) -> SweepSpec {
        SweepSpec {
            param: SweepParam::Altitude,
            start: 1e5,
            stop: 2e6,
            points,
            spacing,
            optimize: None,
        }
    }

    #[test]
    fn grids_hit_both_ends() {
        for spacing in [Spacing::Linear, Spacing::Log] {
            let g = spec(17, spacing).grid();
            assert_eq!(g.len(), 17);
            assert_eq!(g[0], 1e5);
            assert_eq!(g[16], 2e6);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(spec(1, Spacing::Linear).validate().is_err());
        assert!(SweepSpec {
            stop: 1e4,
            ..spec(4, Spacing::Linear)
        }
        .validate()
        .is_err());
        assert!(SweepSpec {
            start: 0.0,
            ..spec(4, Spacing::Log)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn downlink_negativity_never_rises() {
        let cfg = ScenarioConfig::optical_slant(ScenarioKind::Downlink, 5e5);
        let s = SweepSpec {
            start: 1e3,
            ..spec(64, Spacing::Log)
        };
        let rows = run_sweep(&cfg, &s).unwrap();
        assert!(rows
            .windows(2)
            .all(|w| w[1].result.negativity <= w[0].result.negativity));
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = ScenarioConfig::optical_slant(ScenarioKind::Uplink, 5e5);
        let render = || {
            let rows = run_sweep(&cfg, &spec(8, Spacing::Log)).unwrap();
            let mut buf = Vec::new();
            write_csv(&mut buf, &["kind = uplink".to_string()], &rows).unwrap();
            buf
        };
        let (a, b) = (render(), render());
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# kind = uplink"));
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 8);
    }

    #[test]
    fn station_scales_with_the_link() {
        let mut cfg = ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, 4e5);
        cfg.station = Some(1e5);
        let moved = with_param(&cfg, SweepParam::Altitude, 8e5);
        assert_eq!(moved.station, Some(2e5));
    }
}
