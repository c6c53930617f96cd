//! Built-in acceptance checks. Each check reports what it measured next
//! to what it expected.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atmosphere::{cn2, tau_atm_optical, OpticalExtinction, Weather, SCALE_HEIGHT};
use crate::beam::Direction;
use crate::error::Result;
use crate::fading::{fit_fading_params, stratified_moments, weber_q0, FadingParams};
use crate::gaussian::{
    entanglement_threshold_asym, entanglement_threshold_sym, tmst, tmsv, Regime, TwoModeCM,
};
use crate::geometry::LinkGeometry;
use crate::scenario::{evaluate, optimize_station, Objective, Relay, ScenarioConfig, ScenarioKind};
use crate::sweep::{run_sweep, write_csv, Spacing, SweepParam, SweepSpec};
use crate::thermal::{mean_thermal_photons_microwave, mode_occupancy};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u8, &str, Check); 12] = [
    (1, "ground-level turbulence strength", cn2_reproduction),
    (2, "microwave thermal photons", microwave_photons),
    (3, "microwave entanglement thresholds", microwave_thresholds),
    (4, "squeezed-vacuum identities", tmsv_identities),
    (5, "zenith optical column", zenith_column),
    (6, "fading statistics against Monte Carlo", fading_oracle),
    (7, "downlink teleportation range", downlink_range),
    (8, "link ordering over LEO altitudes", ordering),
    (9, "microwave ranges", microwave_ranges),
    (10, "symmetric states teleport better", symmetry_property),
    (
        11,
        "inter-satellite fast and slow fading agree",
        intersatellite_regimes,
    ),
    (12, "sweep determinism", determinism),
];

/// Run criterion `id` (1 to 12).
pub fn run(id: u8) -> Option<CriterionReport> {
    let &(id, title, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionReport {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

fn within_rel(x: f64, target: f64, tol: f64) -> bool {
    ((x - target) / target).abs() <= tol
}

/// Bisect for the point in `[lo, hi]` where `pred` turns from true to
/// false, to an absolute width `tol`.
fn crossing<F: FnMut(f64) -> Result<bool>>(
    mut pred: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<Option<f64>> {
    if !pred(lo)? || pred(hi)? {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn cn2_reproduction() -> Result<(bool, String)> {
    let start = Instant::now();
    let day = cn2(30.0, &Weather::ClearDay.turbulence());
    let night = cn2(30.0, &Weather::ClearNight.turbulence());
    let elapsed = start.elapsed();
    let ok = within_rel(day, 2.06e-14, 0.01)
        && within_rel(night, 1.29e-14, 0.01)
        && elapsed < Duration::from_millis(1);
    Ok((
        ok,
        format!(
            "day {day:.4e} (2.06e-14), night {night:.4e} (1.29e-14), 1% tolerance, {elapsed:?}"
        ),
    ))
}

fn microwave_photons() -> Result<(bool, String)> {
    let n = mean_thermal_photons_microwave(1e-4, 2.0, 0.06, 288.0);
    Ok(((n - 266.0).abs() <= 3.0, format!("{n:.3} (266 ± 3)")))
}

fn microwave_thresholds() -> Result<(bool, String)> {
    // The microwave source: r = 1 with 0.01 thermal photons per mode.
    let t = tmst(1.0, 0.01);
    let m_raw = 1.0 + 2.0 * mode_occupancy(0.06, 288.0);
    let asym_raw = entanglement_threshold_asym(t.a, t.c, m_raw)?;
    let sym_raw = entanglement_threshold_sym(t.a, t.c, m_raw)?;
    let m = 1.0 + 2.0 * 266.0;
    let asym = entanglement_threshold_asym(t.a, t.c, m)?;
    let sym = entanglement_threshold_sym(t.a, t.c, m)?;
    let ok = (asym_raw - 0.9992).abs() <= 1e-4
        && (sym_raw - 0.9997).abs() <= 1e-4
        && (asym - 0.996).abs() <= 5e-4
        && (sym - 0.998).abs() <= 5e-4;
    Ok((
        ok,
        format!(
            "occupancy: {asym_raw:.5}/{sym_raw:.5} (0.9992/0.9997 ± 1e-4); n=266: {asym:.5}/{sym:.5} (0.996/0.998 ± 5e-4)"
        ),
    ))
}

fn tmsv_identities() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.5, 1.0, 2.0] {
        let s = tmsv(r);
        let e = (-2.0 * r).exp();
        worst = worst
            .max((s.pt_symplectic_eig() - e).abs())
            .max((s.fidelity() - 1.0 / (1.0 + e)).abs());
    }
    let f0 = tmsv(0.0).fidelity();
    Ok((
        worst <= 1e-12 && f0 == 0.5,
        format!("max deviation {worst:.1e} (1e-12), F(r=0) = {f0}"),
    ))
}

fn zenith_column() -> Result<(bool, String)> {
    let ext = OpticalExtinction::new(5e-6, SCALE_HEIGHT)?;
    let start = Instant::now();
    let tau = tau_atm_optical(&LinkGeometry::zenith(0.0, 1e5)?, &ext)?;
    let elapsed = start.elapsed();
    let oracle = (-5e-6 * SCALE_HEIGHT * (1.0 - (-1e5 / SCALE_HEIGHT).exp())).exp();
    let ok = (tau - 0.9675).abs() <= 1e-4
        && (tau - oracle).abs() <= 1e-10
        && elapsed < Duration::from_millis(10);
    Ok((
        ok,
        format!("{tau:.6} (0.9675 ± 1e-4, closed form {oracle:.6}), {elapsed:?}"),
    ))
}

/// Fading laws spanning near-field to far-field beams and weak to strong
/// wandering.
pub fn random_fading_params(seed: u64, count: usize) -> Result<Vec<FadingParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let aperture = 0.4;
            let w_st = aperture * 10f64.powf(rng.random_range(-0.5..1.0));
            let sigma = aperture * 10f64.powf(rng.random_range(-1.5..0.5));
            let tau_atm = rng.random_range(0.5..1.0);
            let eff = rng.random_range(0.4..1.0);
            fit_fading_params(w_st, aperture, tau_atm, eff, sigma)
        })
        .collect()
}

fn fading_oracle() -> Result<(bool, String)> {
    let start = Instant::now();
    let params = random_fading_params(2024, 20)?;
    let mut worst_moment: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for (i, p) in params.iter().enumerate() {
        let (q1, q2) = p.moments()?;
        let (m1, m2) = stratified_moments(p, 1000 + i as u64, 1_000_000);
        worst_moment = worst_moment
            .max(((q1 - m1) / m1).abs())
            .max(((q2 - m2) / m2).abs());
        worst_norm = worst_norm.max((p.expect_tau_space(|_| 1.0)? - 1.0).abs());
    }
    let mut worst_weber: f64 = 0.0;
    for i in 0..=20 {
        let x = 0.1 + (10.0 - 0.1) * i as f64 / 20.0;
        let q = weber_q0(x, f64::INFINITY)?;
        worst_weber = worst_weber.max((q / (2.0 * x).exp() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    let ok = worst_moment <= 1e-3
        && worst_norm <= 1e-6
        && worst_weber <= 1e-8
        && elapsed < Duration::from_secs(30);
    Ok((
        ok,
        format!(
            "20 laws: moments vs 1e6 stratified draws {worst_moment:.1e} (1e-3), normalisation {worst_norm:.1e} (1e-6), Q0(x,inf)/e^(2x) {worst_weber:.1e} (1e-8)"
        ),
    ))
}

/// Altitude (m) at which the fast-fading night downlink loses its
/// teleportation advantage.
pub fn downlink_fidelity_crossing() -> Result<Option<f64>> {
    let cfg = ScenarioConfig::optical_slant(ScenarioKind::Downlink, 0.0);
    crossing(
        |h| Ok(evaluate(&ScenarioConfig { altitude: h, ..cfg })?.fidelity > 0.5),
        1e5,
        2e6,
        100.0,
    )
}

fn downlink_range() -> Result<(bool, String)> {
    let start = Instant::now();
    let h = downlink_fidelity_crossing()?;
    let elapsed = start.elapsed();
    Ok(match h {
        Some(h) => (
            (3e5..=5e5).contains(&h) && elapsed < Duration::from_secs(60),
            format!("fidelity crosses 1/2 at {:.1} km ([300, 500] km)", h / 1e3),
        ),
        None => (false, "no crossing between 100 and 2000 km".into()),
    })
}

/// 32 altitudes across low Earth orbit.
pub fn leo_grid() -> Vec<f64> {
    (0..32)
        .map(|i| 2e5 + (2e6 - 2e5) * i as f64 / 31.0)
        .collect()
}

fn ordering() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for weather in [Weather::ClearNight, Weather::ClearDay] {
        for h in leo_grid() {
            let base = ScenarioConfig {
                weather,
                ..ScenarioConfig::optical_slant(ScenarioKind::Downlink, h)
            };
            let down = evaluate(&base)?;
            let up = evaluate(&ScenarioConfig {
                kind: ScenarioKind::Uplink,
                ..base
            })?;
            let gen = optimize_station(
                &ScenarioConfig {
                    kind: ScenarioKind::IntermediateGeneration,
                    ..base
                },
                Objective::Fidelity,
            )?;
            let lens = optimize_station(
                &ScenarioConfig {
                    kind: ScenarioKind::IntermediateLens(Direction::Up),
                    ..base
                },
                Objective::TauMean,
            )?;
            checked += 1;
            let km = h / 1e3;
            if down.negativity < up.negativity {
                failures.push(format!(
                    "{weather} {km:.0} km: downlink negativity below uplink"
                ));
            }
            if gen.value < down.fidelity.max(up.fidelity) {
                failures.push(format!(
                    "{weather} {km:.0} km: station fidelity {:.6} below direct",
                    gen.value
                ));
            }
            if lens.value < up.tau_mean {
                failures.push(format!("{weather} {km:.0} km: lens <tau> below uplink"));
            }
        }
    }
    Ok(if failures.is_empty() {
        (
            true,
            format!("{checked} points (clear day and night, 200 to 2000 km), all orderings hold"),
        )
    } else {
        (
            false,
            format!("{} violations: {}", failures.len(), failures.join("; ")),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveRange {
    pub relay: Relay,
    /// Longest distance keeping the state entangled (m).
    pub entanglement: f64,
    /// Longest distance with fidelity above 1/2 (m).
    pub teleportation: f64,
}

/// Crossing distances of the rainy microwave link, with the station at
/// the midpoint for the relayed variants.
pub fn microwave_ranges_for(relay: Relay) -> Result<MicrowaveRange> {
    let at = |d: f64| evaluate(&ScenarioConfig::microwave(relay, d));
    let missing =
        || crate::Error::Numerical(format!("no microwave crossing below 1 km for {relay:?}"));
    let entanglement =
        crossing(|d| Ok(at(d)?.negativity > 0.0), 1.0, 1e3, 1e-4)?.ok_or_else(missing)?;
    let teleportation =
        crossing(|d| Ok(at(d)?.fidelity > 0.5), 1.0, 1e3, 1e-4)?.ok_or_else(missing)?;
    Ok(MicrowaveRange {
        relay,
        entanglement,
        teleportation,
    })
}

fn microwave_ranges() -> Result<(bool, String)> {
    let targets = [
        (Relay::Direct, 44.0, Some(43.0)),
        (Relay::Generation, 49.0, None),
        (Relay::Lens, 52.0, Some(49.0)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (relay, ent, tel) in targets {
        let r = microwave_ranges_for(relay)?;
        ok &= within_rel(r.entanglement, ent, 0.25) && r.teleportation <= r.entanglement;
        let tel_text = match tel {
            Some(t) => {
                ok &= within_rel(r.teleportation, t, 0.25);
                format!("{:.1}/{:.0}", r.teleportation, t)
            }
            None => format!("{:.1}/-", r.teleportation),
        };
        parts.push(format!(
            "{relay:?}: entanglement {:.1}/{ent:.0} m, teleportation {tel_text} m",
            r.entanglement
        ));
    }
    Ok((ok, format!("{} (collimated beams, ±25%)", parts.join("; "))))
}

fn symmetry_property() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut counterexamples = 0;
    let mut pairs = 0;
    while pairs < 10_000 {
        let a: f64 = rng.random_range(1.0..30.0);
        // Every tenth pair compares a symmetric state with itself.
        let b: f64 = if pairs % 10 == 0 {
            a
        } else {
            rng.random_range(1.0..30.0)
        };
        let cmax = ((a - 1.0) * (b + 1.0)).min((a + 1.0) * (b - 1.0)).sqrt();
        let asym = TwoModeCM::new(a, b, rng.random_range(0.0..1.0) * cmax);
        let nu = asym.pt_symplectic_eig();
        if !(nu < 1.0) {
            continue;
        }
        let mean = 0.5 * (a + b);
        let Some(sym) = TwoModeCM::with_pt_eig(mean, mean, nu) else {
            continue;
        };
        pairs += 1;
        let (fs, fa) = (sym.fidelity(), asym.fidelity());
        let equal = (fs - fa).abs() <= 1e-12 * fs;
        if fs < fa * (1.0 - 1e-12) || (equal && (a - b).abs() > 1e-6 * a) || (!equal && a == b) {
            counterexamples += 1;
        }
    }
    Ok((
        counterexamples == 0,
        format!("{pairs} equal-negativity pairs, {counterexamples} counterexamples"),
    ))
}

/// Largest fast/slow fidelity gap over the inter-satellite sweep.
pub fn intersatellite_gap() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for eff in [1.0, 0.4] {
        let mut cfg = ScenarioConfig::horizontal(ScenarioKind::Intersatellite, 0.0);
        cfg.receiver.efficiency = eff;
        let spec = SweepSpec {
            param: SweepParam::Distance,
            start: 1e3,
            stop: 1e5,
            points: 32,
            spacing: Spacing::Log,
            optimize: None,
        };
        let fast = run_sweep(&cfg, &spec)?;
        let slow = run_sweep(
            &ScenarioConfig {
                regime: Regime::Slow,
                ..cfg
            },
            &spec,
        )?;
        for (f, s) in fast.iter().zip(&slow) {
            worst = worst.max((f.result.fidelity - s.result.fidelity).abs());
        }
    }
    Ok(worst)
}

fn intersatellite_regimes() -> Result<(bool, String)> {
    let gap = intersatellite_gap()?;
    Ok((
        gap < 1e-3,
        format!("max |F_fast - F_slow| = {gap:.2e} over 1 to 100 km (< 1e-3)"),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let cfg = ScenarioConfig {
        regime: Regime::Slow,
        ..ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, 5e5)
    };
    let spec = SweepSpec {
        param: SweepParam::Altitude,
        start: 1e5,
        stop: 2e6,
        points: 16,
        spacing: Spacing::Log,
        optimize: None,
    };
    let render = || -> Result<Vec<u8>> {
        let rows = run_sweep(&cfg, &spec)?;
        let mut buf = Vec::new();
        write_csv(&mut buf, &[], &rows).map_err(|e| crate::Error::Numerical(e.to_string()))?;
        Ok(buf)
    };
    let (a, b) = (render()?, render()?);
    Ok((
        a == b,
        format!(
            "two {}-byte renderings {}",
            a.len(),
            if a == b { "identical" } else { "differ" }
        ),
    ))
}
