use approx::assert_relative_eq;
use cvlink::atmosphere::Weather;
use cvlink::beam::Direction;
use cvlink::gaussian::{apply_one_sided, tmsv, Channel, ChannelMoments, Regime};
use cvlink::scenario::{
    baseline, build_channel, evaluate, optimize_station, Flag, Objective, Relay, ScenarioConfig,
    ScenarioKind,
};
use cvlink::sweep::{run_sweep, Spacing, SweepParam, SweepSpec};
use proptest::prelude::*;

fn all_kinds() -> Vec<ScenarioConfig> {
    vec![
        ScenarioConfig::for_kind(ScenarioKind::Downlink),
        ScenarioConfig::for_kind(ScenarioKind::Uplink),
        ScenarioConfig::for_kind(ScenarioKind::IntermediateGeneration),
        ScenarioConfig::for_kind(ScenarioKind::IntermediateLens(Direction::Up)),
        ScenarioConfig::for_kind(ScenarioKind::IntermediateLens(Direction::Down)),
        ScenarioConfig::for_kind(ScenarioKind::HorizontalGround),
        ScenarioConfig::for_kind(ScenarioKind::Intersatellite),
        ScenarioConfig::microwave(Relay::Direct, 30.0),
        ScenarioConfig::microwave(Relay::Generation, 30.0),
        ScenarioConfig::microwave(Relay::Lens, 30.0),
    ]
}

fn span(cfg: &ScenarioConfig) -> (f64, f64) {
    match cfg.kind {
        ScenarioKind::HorizontalGround => (50.0, 2000.0),
        ScenarioKind::Intersatellite => (1e3, 2e5),
        ScenarioKind::MicrowaveSlant(_) => (1.0, 120.0),
        _ => (1e4, 2e6),
    }
}

#[test]
fn observables_never_improve_with_length() {
    for base in all_kinds() {
        for regime in [Regime::Fast, Regime::Slow] {
            let cfg = ScenarioConfig { regime, ..base };
            let (start, stop) = span(&cfg);
            let spec = SweepSpec {
                param: SweepParam::Distance,
                start,
                stop,
                points: 24,
                spacing: Spacing::Log,
                optimize: None,
            };
            let rows = run_sweep(&cfg, &spec).unwrap();
            for w in rows.windows(2) {
                let (a, b) = (&w[0].result, &w[1].result);
                let tag = format!("{} {regime} at {}", cfg.kind, w[1].param);
                assert!(
                    b.negativity <= a.negativity * (1.0 + 1e-9) + 1e-12,
                    "negativity rose: {tag}"
                );
                assert!(
                    b.fidelity <= a.fidelity * (1.0 + 1e-9),
                    "fidelity rose: {tag}"
                );
            }
        }
    }
}

#[test]
fn separable_outputs_never_beat_the_classical_bound() {
    for base in all_kinds() {
        for weather in Weather::ALL {
            for regime in [Regime::Fast, Regime::Slow] {
                let cfg = ScenarioConfig {
                    regime,
                    weather,
                    ..base
                };
                let (start, stop) = span(&cfg);
                let spec = SweepSpec {
                    param: SweepParam::Distance,
                    start,
                    stop: stop * 5.0,
                    points: 12,
                    spacing: Spacing::Log,
                    optimize: None,
                };
                for row in run_sweep(&cfg, &spec).unwrap() {
                    if row.result.negativity == 0.0 {
                        assert!(
                            row.result.fidelity <= 0.5 + 1e-12,
                            "{} {weather} {regime}",
                            cfg.kind
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn generation_outputs_are_more_symmetric() {
    for h in [3e5, 6e5, 1.2e6] {
        let cfg = ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, h);
        let (channel, _) = build_channel(&cfg).unwrap();
        let Channel::TwoSided {
            down, up, m_down, ..
        } = channel
        else {
            panic!("generation must be two-sided")
        };
        let (d, u) = (
            ChannelMoments::of(&down).unwrap(),
            ChannelMoments::of(&up).unwrap(),
        );
        let two = channel.output_state(&tmsv(1.0)).unwrap();
        // Same total loss applied to one mode only.
        let one = apply_one_sided(
            &tmsv(1.0),
            ChannelMoments {
                t1: d.t1 * u.t1,
                t2: d.t2 * u.t2,
            },
            m_down,
        );
        assert!((two.a - two.b).abs() < (one.a - one.b).abs(), "h={h}");
    }
}

#[test]
fn lens_optima_sit_low_for_leo_uplinks() {
    for h in [3e5, 6e5, 1e6, 1.5e6, 2e6] {
        let cfg = ScenarioConfig::optical_slant(ScenarioKind::IntermediateLens(Direction::Up), h);
        let opt = optimize_station(&cfg, Objective::TauMean).unwrap();
        assert!(opt.position < 1e5, "h={h}: optimum at {}", opt.position);
        assert!(opt.value > baseline(&cfg, Objective::TauMean).unwrap());
    }
}

#[test]
fn generation_beats_both_direct_links() {
    for h in [3e5, 5e5, 8e5] {
        for regime in [Regime::Fast, Regime::Slow] {
            let cfg = ScenarioConfig {
                regime,
                ..ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, h)
            };
            let opt = optimize_station(&cfg, Objective::Fidelity).unwrap();
            let down = evaluate(&ScenarioConfig {
                kind: ScenarioKind::Downlink,
                ..cfg
            })
            .unwrap();
            let up = evaluate(&ScenarioConfig {
                kind: ScenarioKind::Uplink,
                ..cfg
            })
            .unwrap();
            assert!(
                opt.value > down.fidelity && opt.value > up.fidelity,
                "h={h} {regime}"
            );
        }
    }
}

#[test]
fn optimizer_contract() {
    let cfg = ScenarioConfig {
        regime: Regime::Slow,
        ..ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, 7e5)
    };
    for objective in [
        Objective::Negativity,
        Objective::Fidelity,
        Objective::TauMean,
    ] {
        let opt = optimize_station(&cfg, objective).unwrap();
        for &(x, v) in &opt.grid {
            assert!(
                opt.value >= v,
                "{objective}: grid point {x} gives {v} > {}",
                opt.value
            );
        }
        assert!(opt.position > cfg.ground_altitude && opt.position < cfg.altitude);
        let again = evaluate(&ScenarioConfig {
            station: Some(opt.position),
            ..cfg
        })
        .unwrap();
        assert_relative_eq!(objective.of(&again), opt.value, max_relative = 1e-12);
    }
}

#[test]
fn flat_objective_is_flagged() {
    // Far beyond the entanglement range the negativity is zero everywhere.
    let cfg = ScenarioConfig {
        weather: Weather::ClearDay,
        ..ScenarioConfig::optical_slant(ScenarioKind::IntermediateGeneration, 5e6)
    };
    let opt = optimize_station(&cfg, Objective::Negativity).unwrap();
    assert_eq!(opt.value, 0.0);
    assert!(opt.result.flags.contains(&Flag::DegenerateOptimum));
}

#[test]
fn intersatellite_regimes_overlap() {
    for z in [1e3, 1e4, 3e4, 1e5] {
        let fast = evaluate(&ScenarioConfig::horizontal(ScenarioKind::Intersatellite, z)).unwrap();
        let slow = evaluate(&ScenarioConfig {
            regime: Regime::Slow,
            ..ScenarioConfig::horizontal(ScenarioKind::Intersatellite, z)
        })
        .unwrap();
        assert!((fast.fidelity - slow.fidelity).abs() < 1e-3, "z={z}");
    }
}

#[test]
fn microwave_teleportation_limit_precedes_entanglement_limit() {
    for relay in [Relay::Direct, Relay::Generation, Relay::Lens] {
        let r = cvlink::validation::microwave_ranges_for(relay).unwrap();
        assert!(r.teleportation <= r.entanglement, "{relay:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn results_respect_bounds(h in 1e4f64..3e6, eff in 0.2f64..1.0, r in 0.0f64..2.0, day in any::<bool>(), slow in any::<bool>(), k in 0usize..4) {
        let kind = [
            ScenarioKind::Downlink,
            ScenarioKind::Uplink,
            ScenarioKind::IntermediateGeneration,
            ScenarioKind::IntermediateLens(Direction::Up),
        ][k];
        let mut cfg = ScenarioConfig::optical_slant(kind, h);
        cfg.receiver.efficiency = eff;
        cfg.squeezing = r;
        cfg.weather = if day { Weather::ClearDay } else { Weather::ClearNight };
        cfg.regime = if slow { Regime::Slow } else { Regime::Fast };
        let res = evaluate(&cfg).unwrap();
        prop_assert!(res.tau_mean >= 0.0 && res.tau_mean <= res.tau_max * (1.0 + 1e-12) && res.tau_max <= 1.0);
        prop_assert!(res.negativity >= 0.0);
        prop_assert!(res.fidelity > 0.0 && res.fidelity <= 1.0);
    }

    #[test]
    fn efficiency_enters_once_per_detector(h in 1e5f64..2e6, eff in 0.1f64..1.0, k in 0usize..4) {
        let kind = [
            ScenarioKind::Downlink,
            ScenarioKind::Uplink,
            ScenarioKind::IntermediateGeneration,
            ScenarioKind::IntermediateLens(Direction::Down),
        ][k];
        let ideal = ScenarioConfig::optical_slant(kind, h);
        let mut lossy = ideal;
        lossy.receiver.efficiency = eff;
        let events = if kind == ScenarioKind::IntermediateGeneration { 2 } else { 1 };
        let (a, b) = (evaluate(&ideal).unwrap(), evaluate(&lossy).unwrap());
        prop_assert!((b.tau_max / a.tau_max / eff.powi(events) - 1.0).abs() < 1e-12);
    }
}
