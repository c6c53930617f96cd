//! TOML run configuration. Quantities are SI with the unit in the key name.
//!
//! ```toml
//! [scenario]
//! kind = "downlink"
//! weather = "clear-night"
//! regime = "fast"
//!
//! [geometry]
//! altitude_m = 4.0e5
//! ```

use cvlink::beam::{Collimation, Direction};
use cvlink::scenario::{Objective, Relay, ScenarioConfig, ScenarioKind};
use cvlink::sweep::{Spacing, SweepParam, SweepSpec};
use cvlink::thermal::ThermalPreset;
use cvlink::{Error, Result};
use toml::{Table, Value};

/// Every key the loader understands, by section.
const KNOWN: &[(&str, &[&str])] = &[
    (
        "scenario",
        &["kind", "direction", "relay", "weather", "regime"],
    ),
    (
        "beam",
        &[
            "wavelength_m",
            "waist_m",
            "collimation",
            "curvature_radius_m",
        ],
    ),
    (
        "receiver",
        &["aperture_m", "efficiency", "field_of_view_sr"],
    ),
    ("source", &["squeezing", "thermal_photons"]),
    (
        "geometry",
        &[
            "ground_altitude_m",
            "altitude_m",
            "distance_m",
            "station_altitude_m",
            "zenith_rad",
            "horizontal_altitude_m",
        ],
    ),
    (
        "noise",
        &[
            "thermal_photons",
            "thermal_preset",
            "pointing_jitter_rad",
            "temperature_k",
        ],
    ),
    (
        "sweep",
        &[
            "parameter",
            "start_m",
            "stop_m",
            "points",
            "spacing",
            "optimize",
            "output",
        ],
    ),
    (
        "optimize",
        &[
            "objective",
            "start_m",
            "stop_m",
            "points",
            "spacing",
            "heights_m",
        ],
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub sweep: Option<SweepSpec>,
    pub sweep_output: Option<String>,
    pub optimize: Option<OptimizeSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub objective: Objective,
    /// Total link heights (m) at which to place the station.
    pub heights: Vec<f64>,
}

fn err(key: &str, message: impl Into<String>) -> Error {
    Error::config(key, message)
}

/// Parse a configuration document, then apply `section.key=value`
/// overrides whose values are TOML literals (bare words count as strings).
pub fn load(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| {
        let key = e
            .span()
            .map(|s| locate(text, s.start))
            .unwrap_or_else(|| "<document>".into());
        err(&key, e.message().trim().to_string())
    })?;
    for ov in overrides {
        apply_override(&mut table, ov)?;
    }
    from_table(&table)
}

/// "line N" for a byte offset into the document.
fn locate(text: &str, offset: usize) -> String {
    let line = text[..offset.min(text.len())].matches('\n').count() + 1;
    format!("line {line}")
}

fn apply_override(table: &mut Table, ov: &str) -> Result<()> {
    let (path, raw) = ov
        .split_once('=')
        .ok_or_else(|| err(ov, "override must look like section.key=value"))?;
    let path = path.trim();
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| err(path, "override key must be section.key"))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(err(section, "expected a table")),
    }
}

struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(err(
                &self.key(key),
                format!("expected a number, found {}", v.type_str()),
            )),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(err(
                &self.key(key),
                format!("expected a string, found {}", v.type_str()),
            )),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(err(
                &self.key(key),
                format!("expected a non-negative integer, found {v}"),
            )),
        }
    }

    fn parsed<T: std::str::FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.str(key)?
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| err(&self.key(key), e.to_string()))
            })
            .transpose()
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| err(&self.key(key), "missing"))
    }
}

fn check_keys(table: &Table) -> Result<()> {
    for (name, value) in table {
        let Some((_, keys)) = KNOWN.iter().find(|(s, _)| s == name) else {
            return Err(err(name, "unknown section"));
        };
        let Value::Table(inner) = value else {
            return Err(err(name, "expected a table"));
        };
        for key in inner.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(err(&format!("{name}.{key}"), "unknown key"));
            }
        }
    }
    Ok(())
}

fn section<'a>(table: &'a Table, name: &'a str) -> Section<'a> {
    Section {
        name,
        table: table.get(name).and_then(Value::as_table),
    }
}

fn parse_kind(s: &Section) -> Result<ScenarioKind> {
    let name = s
        .str("kind")?
        .ok_or_else(|| err("scenario.kind", "missing"))?;
    let mut kind: ScenarioKind = name
        .parse()
        .map_err(|e: Error| err("scenario.kind", e.to_string()))?;
    if let Some(d) = s.str("direction")? {
        let direction = match d {
            "up" => Direction::Up,
            "down" => Direction::Down,
            _ => {
                return Err(err(
                    "scenario.direction",
                    format!("expected `up` or `down`, found `{d}`"),
                ))
            }
        };
        match kind {
            ScenarioKind::IntermediateLens(_) => kind = ScenarioKind::IntermediateLens(direction),
            _ => {
                return Err(err(
                    "scenario.direction",
                    "only applies to intermediate-lens",
                ))
            }
        }
    }
    if let Some(r) = s.str("relay")? {
        let relay = match r {
            "direct" => Relay::Direct,
            "generation" => Relay::Generation,
            "lens" => Relay::Lens,
            _ => {
                return Err(err(
                    "scenario.relay",
                    format!("expected direct, generation or lens, found `{r}`"),
                ))
            }
        };
        match kind {
            ScenarioKind::MicrowaveSlant(_) => kind = ScenarioKind::MicrowaveSlant(relay),
            _ => return Err(err("scenario.relay", "only applies to microwave-slant")),
        }
    }
    Ok(kind)
}

fn spacing(s: &Section) -> Result<Spacing> {
    Ok(s.parsed("spacing")?.unwrap_or(Spacing::Linear))
}

pub fn from_table(table: &Table) -> Result<RunConfig> {
    check_keys(table)?;
    let scen = section(table, "scenario");
    let kind = parse_kind(&scen)?;
    let mut cfg = ScenarioConfig::for_kind(kind);
    if let Some(w) = scen.parsed("weather")? {
        cfg.weather = w;
    }
    if let Some(r) = scen.parsed("regime")? {
        cfg.regime = r;
    }

    let beam = section(table, "beam");
    if let Some(x) = beam.f64("wavelength_m")? {
        cfg.beam.wavelength = x;
    }
    if let Some(x) = beam.f64("waist_m")? {
        cfg.beam.waist = x;
    }
    let radius = beam.f64("curvature_radius_m")?;
    match (beam.str("collimation")?, radius) {
        (None | Some("collimated"), None) => {}
        (Some("focused"), None) => cfg.beam.collimation = Collimation::FocusedAtReceiver,
        (Some("focused") | None, Some(r)) => cfg.beam.collimation = Collimation::Focused(r),
        (Some("collimated"), Some(_)) => {
            return Err(err(
                "beam.curvature_radius_m",
                "a collimated beam has no curvature radius",
            ))
        }
        (Some(other), _) => {
            return Err(err(
                "beam.collimation",
                format!("expected `collimated` or `focused`, found `{other}`"),
            ))
        }
    }

    let rx = section(table, "receiver");
    if let Some(x) = rx.f64("aperture_m")? {
        cfg.receiver.aperture = x;
    }
    if let Some(x) = rx.f64("efficiency")? {
        cfg.receiver.efficiency = x;
    }
    if let Some(x) = rx.f64("field_of_view_sr")? {
        cfg.receiver.field_of_view = x;
    }

    let src = section(table, "source");
    if let Some(x) = src.f64("squeezing")? {
        cfg.squeezing = x;
    }
    if let Some(x) = src.f64("thermal_photons")? {
        cfg.source_photons = x;
    }

    let geo = section(table, "geometry");
    if let Some(x) = geo.f64("ground_altitude_m")? {
        if kind.is_microwave()
            && geo.f64("altitude_m")?.is_none()
            && geo.f64("distance_m")?.is_none()
        {
            cfg.altitude += x - cfg.ground_altitude;
        }
        cfg.ground_altitude = x;
    }
    if let Some(x) = geo.f64("altitude_m")? {
        cfg.altitude = x;
    }
    if let Some(x) = geo.f64("distance_m")? {
        if kind.is_horizontal() {
            cfg.distance = x;
        } else if geo.f64("altitude_m")?.is_some() {
            return Err(err(
                "geometry.distance_m",
                "give either altitude_m or distance_m for a slant link",
            ));
        } else {
            cfg.altitude = cfg.ground_altitude + x;
        }
    }
    if let Some(x) = geo.f64("station_altitude_m")? {
        if !kind.has_station() {
            return Err(err(
                "geometry.station_altitude_m",
                format!("scenario `{kind}` has no station"),
            ));
        }
        cfg.station = Some(x);
    }
    if let Some(x) = geo.f64("zenith_rad")? {
        cfg.zenith = x;
    }
    if let Some(x) = geo.f64("horizontal_altitude_m")? {
        cfg.horizontal_altitude = x;
    }

    let noise = section(table, "noise");
    match (
        noise.f64("thermal_photons")?,
        noise.parsed::<ThermalPreset>("thermal_preset")?,
    ) {
        (Some(_), Some(_)) => {
            return Err(err(
                "noise.thermal_preset",
                "give either thermal_photons or thermal_preset",
            ));
        }
        (Some(n), None) => cfg.thermal_photons = Some(n),
        (None, Some(p)) => cfg.thermal_photons = Some(p.photons()),
        (None, None) => {}
    }
    if let Some(x) = noise.f64("pointing_jitter_rad")? {
        cfg.pointing_jitter = x;
    }
    if let Some(x) = noise.f64("temperature_k")? {
        cfg.temperature = x;
    }

    cfg.validate().map_err(|e| err(&blame(&e), e.to_string()))?;

    let sw = section(table, "sweep");
    let (sweep, sweep_output) = if sw.table.is_some() {
        let spec = SweepSpec {
            param: sw.parsed("parameter")?.unwrap_or(if kind.is_horizontal() {
                SweepParam::Distance
            } else {
                SweepParam::Altitude
            }),
            start: sw.require_f64("start_m")?,
            stop: sw.require_f64("stop_m")?,
            points: sw.usize("points")?.unwrap_or(64),
            spacing: spacing(&sw)?,
            optimize: sw.parsed("optimize")?,
        };
        spec.validate().map_err(|e| err("sweep", e.to_string()))?;
        if spec.optimize.is_some() && !kind.has_station() {
            return Err(err(
                "sweep.optimize",
                format!("scenario `{kind}` has no station to optimise"),
            ));
        }
        (Some(spec), sw.str("output")?.map(str::to_string))
    } else {
        (None, None)
    };

    let op = section(table, "optimize");
    let optimize = if op.table.is_some() {
        let objective = op.parsed("objective")?.unwrap_or(Objective::Fidelity);
        let heights = match op.get("heights_m") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(err("optimize.heights_m", "expected an array of numbers")),
                })
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(err("optimize.heights_m", "expected an array of numbers")),
            None => {
                let spec = SweepSpec {
                    param: SweepParam::Altitude,
                    start: op.require_f64("start_m")?,
                    stop: op.require_f64("stop_m")?,
                    points: op.usize("points")?.unwrap_or(16),
                    spacing: spacing(&op)?,
                    optimize: None,
                };
                spec.validate()
                    .map_err(|e| err("optimize", e.to_string()))?;
                spec.grid()
            }
        };
        if heights.is_empty() {
            return Err(err("optimize.heights_m", "no heights given"));
        }
        Some(OptimizeSpec { objective, heights })
    } else {
        None
    };

    Ok(RunConfig {
        scenario: cfg,
        sweep,
        sweep_output,
        optimize,
    })
}

/// Best guess at the key behind a validation failure.
fn blame(e: &Error) -> String {
    let text = e.to_string();
    let table = [
        ("wavelength", "beam.wavelength_m"),
        ("waist", "beam.waist_m"),
        ("curvature", "beam.curvature_radius_m"),
        ("aperture", "receiver.aperture_m"),
        ("efficiency", "receiver.efficiency"),
        ("field of view", "receiver.field_of_view_sr"),
        ("squeezing", "source.squeezing"),
        ("source photons", "source.thermal_photons"),
        ("thermal photons", "noise.thermal_photons"),
        ("below the ground", "geometry.altitude_m"),
        ("station", "geometry.station_altitude_m"),
        ("distance", "geometry.distance_m"),
        ("altitude", "geometry.altitude_m"),
    ];
    table
        .iter()
        .find(|(needle, _)| text.contains(needle))
        .map(|(_, key)| key.to_string())
        .unwrap_or_else(|| "scenario".into())
}

/// The resolved configuration as `section.key = value` lines.
pub fn describe(cfg: &ScenarioConfig) -> Vec<String> {
    let mut lines = vec![format!("scenario.kind = {}", cfg.kind)];
    match cfg.kind {
        ScenarioKind::IntermediateLens(d) => lines.push(format!(
            "scenario.direction = {}",
            if d == Direction::Up { "up" } else { "down" }
        )),
        ScenarioKind::MicrowaveSlant(r) => lines.push(format!(
            "scenario.relay = {}",
            match r {
                Relay::Direct => "direct",
                Relay::Generation => "generation",
                Relay::Lens => "lens",
            }
        )),
        _ => {}
    }
    lines.push(format!("scenario.weather = {}", cfg.weather));
    lines.push(format!("scenario.regime = {}", cfg.regime));
    lines.push(format!("beam.wavelength_m = {}", cfg.beam.wavelength));
    lines.push(format!("beam.waist_m = {}", cfg.beam.waist));
    lines.push(match cfg.beam.collimation {
        Collimation::Collimated => "beam.collimation = collimated".into(),
        Collimation::FocusedAtReceiver => "beam.collimation = focused".into(),
        Collimation::Focused(r) => format!("beam.curvature_radius_m = {r}"),
    });
    lines.push(format!("receiver.aperture_m = {}", cfg.receiver.aperture));
    lines.push(format!("receiver.efficiency = {}", cfg.receiver.efficiency));
    lines.push(format!(
        "receiver.field_of_view_sr = {}",
        cfg.receiver.field_of_view
    ));
    lines.push(format!("source.squeezing = {}", cfg.squeezing));
    lines.push(format!("source.thermal_photons = {}", cfg.source_photons));
    if cfg.kind.is_horizontal() {
        lines.push(format!("geometry.distance_m = {}", cfg.distance));
        if cfg.kind == ScenarioKind::HorizontalGround {
            lines.push(format!(
                "geometry.horizontal_altitude_m = {}",
                cfg.horizontal_altitude
            ));
        }
    } else {
        lines.push(format!(
            "geometry.ground_altitude_m = {}",
            cfg.ground_altitude
        ));
        lines.push(format!("geometry.altitude_m = {}", cfg.altitude));
        lines.push(format!("geometry.zenith_rad = {}", cfg.zenith));
        if cfg.kind.has_station() {
            lines.push(format!(
                "geometry.station_altitude_m = {}",
                cfg.station_altitude()
            ));
        }
    }
    match cfg.thermal_photons {
        Some(n) => lines.push(format!("noise.thermal_photons = {n}")),
        None => lines.push("noise.thermal_photons = preset".into()),
    }
    lines.push(format!(
        "noise.pointing_jitter_rad = {}",
        cfg.pointing_jitter
    ));
    if cfg.kind.is_microwave() {
        lines.push(format!("noise.temperature_k = {}", cfg.temperature));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use cvlink::atmosphere::Weather;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_downlink() {
        let run = load(
            "[scenario]\nkind = \"downlink\"\n[geometry]\naltitude_m = 4e5\n",
            &[],
        )
        .unwrap();
        assert_eq!(run.scenario.kind, ScenarioKind::Downlink);
        assert_eq!(run.scenario.altitude, 4e5);
        assert_eq!(run.scenario.weather, Weather::ClearNight);
        assert!(run.sweep.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("[scenario]\nkind = \"sideways\"\n", "scenario.kind"),
            (
                "[scenario]\nkind = \"downlink\"\nweathr = \"x\"\n",
                "scenario.weathr",
            ),
            (
                "[scenario]\nkind = \"downlink\"\n[beam]\nwaist_m = \"wide\"\n",
                "beam.waist_m",
            ),
            (
                "[scenario]\nkind = \"downlink\"\n[beam]\nwaist_m = -1.0\n",
                "beam.waist_m",
            ),
            (
                "[scenario]\nkind = \"downlink\"\n[geometry]\nstation_altitude_m = 1.0\n",
                "geometry.station_altitude_m",
            ),
            (
                "[scenario]\nkind = \"downlink\"\n[sweep]\nstart_m = 1.0\n",
                "sweep.stop_m",
            ),
            ("[scenario]\nkind = \"downlink\"\n[extra]\n", "extra"),
            ("[geometry]\naltitude_m = 1.0\n", "scenario.kind"),
            (
                "[scenario]\nkind = \"downlink\"\n[receiver]\nefficiency = 1.5\n",
                "receiver.efficiency",
            ),
        ];
        for (text, key) in cases {
            assert_eq!(key_of(load(text, &[]).unwrap_err()), key, "{text}");
        }
        assert_eq!(
            key_of(load("[scenario\nkind=1", &[]).unwrap_err()),
            "line 1"
        );
    }

    #[test]
    fn overrides_apply() {
        let run = load(
            "[scenario]\nkind = \"intermediate-lens\"\n",
            &[
                "scenario.direction=down".into(),
                "geometry.altitude_m=6e5".into(),
                "receiver.efficiency = 0.4".into(),
            ],
        )
        .unwrap();
        assert_eq!(
            run.scenario.kind,
            ScenarioKind::IntermediateLens(Direction::Down)
        );
        assert_eq!(run.scenario.altitude, 6e5);
        assert_eq!(run.scenario.receiver.efficiency, 0.4);
        assert!(load("", &["nodot=1".into()]).is_err());
    }

    #[test]
    fn microwave_distance() {
        let run = load("[scenario]\nkind = \"microwave-slant\"\nrelay = \"lens\"\n[geometry]\ndistance_m = 45\n", &[]).unwrap();
        assert_eq!(run.scenario.kind, ScenarioKind::MicrowaveSlant(Relay::Lens));
        assert_eq!(run.scenario.altitude, 55.0);
    }

    #[test]
    fn optimize_heights() {
        let run = load(
            "[scenario]\nkind = \"intermediate-generation\"\n[optimize]\nobjective = \"negativity\"\nheights_m = [3e5, 5e5]\n",
            &[],
        )
        .unwrap();
        let op = run.optimize.unwrap();
        assert_eq!(op.objective, Objective::Negativity);
        assert_eq!(op.heights, vec![3e5, 5e5]);
    }

    #[test]
    fn describe_round_trips_kind() {
        let cfg = ScenarioConfig::for_kind(ScenarioKind::HorizontalGround);
        let lines = describe(&cfg);
        assert_eq!(lines[0], "scenario.kind = horizontal-ground");
        assert!(lines.iter().any(|l| l == "geometry.distance_m = 500"));
    }
}
