//! Placement of the intermediate station or lens.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::beam::Direction;
use crate::error::{Error, Result};
use crate::numerics::{golden_section_max, OptimumFlag};

use super::{evaluate, Flag, LinkResult, Relay, ScenarioConfig, ScenarioKind};

/// Number of coarse grid points.
pub const GRID_POINTS: usize = 64;
/// Relative tolerance of the refined position.
pub const POSITION_TOL: f64 = 1e-3;
/// Closest approach of the grid to either end, relative to the link length.
const END_GAP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Negativity,
    Fidelity,
    TauMean,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Negativity => "negativity",
            Objective::Fidelity => "fidelity",
            Objective::TauMean => "tau_mean",
        }
    }

    pub fn of(self, r: &LinkResult) -> f64 {
        match self {
            Objective::Negativity => r.negativity,
            Objective::Fidelity => r.fidelity,
            Objective::TauMean => r.tau_mean,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negativity" => Ok(Objective::Negativity),
            "fidelity" => Ok(Objective::Fidelity),
            "tau_mean" | "tau-mean" => Ok(Objective::TauMean),
            _ => Err(Error::domain(format!("unknown objective `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationOptimum {
    /// Station altitude (m).
    pub position: f64,
    pub value: f64,
    pub result: LinkResult,
    /// Positions and objective values of the coarse grid.
    pub grid: Vec<(f64, f64)>,
}

fn at_station(cfg: &ScenarioConfig, position: f64) -> ScenarioConfig {
    ScenarioConfig {
        station: Some(position),
        ..*cfg
    }
}

/// Maximise `objective` over the station altitude: a log-spaced grid of
/// offsets from the ground station followed by golden-section refinement
/// around the best grid point. The returned value is never below the best
/// grid value.
pub fn optimize_station(cfg: &ScenarioConfig, objective: Objective) -> Result<StationOptimum> {
    if !cfg.kind.has_station() {
        return Err(Error::domain(format!(
            "scenario `{}` has no intermediate station",
            cfg.kind
        )));
    }
    cfg.validate()?;
    let (h0, length) = (cfg.ground_altitude, cfg.altitude - cfg.ground_altitude);
    if !(length > 0.0) {
        return Err(Error::domain(
            "station placement needs a link of positive length",
        ));
    }
    let lo = (END_GAP * length).ln();
    let hi = ((1.0 - END_GAP) * length).ln();
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let log_offsets: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();

    let eval = |log_offset: f64| -> Result<LinkResult> {
        evaluate(&at_station(cfg, h0 + log_offset.exp()))
    };
    let results: Vec<LinkResult> = log_offsets
        .par_iter()
        .map(|&u| eval(u))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|r| objective.of(r)).collect();

    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });

    let a = log_offsets[best.saturating_sub(1)];
    let b = log_offsets[(best + 1).min(GRID_POINTS - 1)];
    let mut failure = None;
    let refined = golden_section_max(
        |u| match eval(u) {
            Ok(r) => objective.of(&r),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        a,
        b,
        // A log-offset bracket of width POSITION_TOL is a relative position tolerance.
        (POSITION_TOL / (b - a)).min(0.5),
    );
    if let Some(e) = failure {
        return Err(e);
    }

    let (position, mut result) = if refined.value > values[best] {
        let position = h0 + refined.x.exp();
        (position, eval(refined.x)?)
    } else {
        (h0 + log_offsets[best].exp(), results[best].clone())
    };
    let value = objective.of(&result);

    let lo_v = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_v = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi_v - lo_v).abs() <= 1e-12 * hi_v.abs().max(lo_v.abs()) {
        result.flags.insert(Flag::DegenerateOptimum);
    } else if (best == 0 || best == GRID_POINTS - 1) && refined.flag == Some(OptimumFlag::Boundary)
    {
        result.flags.insert(Flag::BoundaryOptimum);
    }

    let grid = log_offsets
        .iter()
        .map(|u| h0 + u.exp())
        .zip(values)
        .collect();
    Ok(StationOptimum {
        position,
        value,
        result,
        grid,
    })
}

/// The objective without any station: for a lens the plain link in the
/// same direction, for generation the better of the plain downlink and
/// uplink.
pub fn baseline(cfg: &ScenarioConfig, objective: Objective) -> Result<f64> {
    let plain = |kind| {
        evaluate(&ScenarioConfig {
            kind,
            station: None,
            ..*cfg
        })
        .map(|r| objective.of(&r))
    };
    match cfg.kind {
        ScenarioKind::IntermediateLens(Direction::Up) => plain(ScenarioKind::Uplink),
        ScenarioKind::IntermediateLens(Direction::Down) => plain(ScenarioKind::Downlink),
        ScenarioKind::IntermediateGeneration => {
            Ok(plain(ScenarioKind::Downlink)?.max(plain(ScenarioKind::Uplink)?))
        }
        ScenarioKind::MicrowaveSlant(Relay::Generation | Relay::Lens) => {
            plain(ScenarioKind::MicrowaveSlant(Relay::Direct))
        }
        _ => plain(cfg.kind),
    }
}
