mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use cvlink::gaussian::{entanglement_threshold_asym, entanglement_threshold_sym, tmst};
use cvlink::scenario::{baseline, evaluate, format_flags, optimize_station, weak_turbulence_check};
use cvlink::sweep::{run_sweep, write_csv};
use cvlink::thermal::{mean_thermal_photons_microwave, mode_occupancy};
use cvlink::{validation, Error};

use config::{describe, RunConfig};

#[derive(Parser)]
#[command(
    name = "cvlink",
    version,
    about = "Entanglement distribution and teleportation over free-space links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    config: PathBuf,
    /// Override a configuration value, e.g. `--set geometry.altitude_m=5e5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single link.
    Link(ConfigArgs),
    /// Sweep altitude or distance and write CSV.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// Output file; defaults to `sweep.output`, then standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Optimise the station position for a list of link heights.
    Optimize {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entanglement thresholds for a microwave link.
    Thresholds {
        #[arg(long, default_value_t = 0.06)]
        wavelength_m: f64,
        #[arg(long, default_value_t = 288.0)]
        temperature_k: f64,
        #[arg(long, default_value_t = 1e-4)]
        field_of_view_sr: f64,
        #[arg(long, default_value_t = 2.0)]
        aperture_m: f64,
        #[arg(long, default_value_t = 1.0)]
        squeezing: f64,
        #[arg(long, default_value_t = 0.01)]
        source_photons: f64,
    },
    /// Run the acceptance checks.
    Validate {
        /// Run only these criteria.
        #[arg(long)]
        only: Vec<u8>,
    },
}

enum Failure {
    Validation,
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Domain(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Numerical(format!("{}: {e}", path.display()))
}

fn load(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.config.display())))?;
    Ok(config::load(&text, &args.overrides)?)
}

/// Write `render`'s output to `path`, or to standard output. A file left
/// half-written by an error is removed.
fn emit(
    path: Option<&Path>,
    render: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock).map_err(|e| Failure::Numerical(e.to_string()))
        }
        Some(p) => {
            let written = fs::File::create(p).and_then(|f| {
                let mut w = io::BufWriter::new(f);
                render(&mut w)?;
                w.flush()
            });
            written.map_err(|e| {
                let _ = fs::remove_file(p);
                io_failure(p, e)
            })
        }
    }
}

fn comments(run: &RunConfig) -> Vec<String> {
    describe(&run.scenario)
}

fn cmd_link(args: &ConfigArgs) -> Result<(), Failure> {
    let run = load(args)?;
    let result = evaluate(&run.scenario)?;
    let margin = weak_turbulence_check(&run.scenario)?.margin;
    let mut out = io::stdout().lock();
    let mut lines: Vec<String> = comments(&run)
        .into_iter()
        .map(|l| format!("# {l}"))
        .collect();
    lines.extend([
        format!("tau_mean={}", result.tau_mean),
        format!("sqrt_tau_mean={}", result.sqrt_tau_mean),
        format!("tau_max={}", result.tau_max),
        format!("negativity={}", result.negativity),
        format!("fidelity={}", result.fidelity),
        format!("regime={}", result.regime),
        format!("weak_turbulence_margin={margin}"),
        format!("flags={}", format_flags(&result.flags)),
    ]);
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    Ok(())
}

fn cmd_sweep(args: &ConfigArgs, output: Option<&Path>) -> Result<(), Failure> {
    let run = load(args)?;
    let spec = run
        .sweep
        .ok_or_else(|| Failure::Config("config error at `sweep`: missing section".into()))?;
    let rows = run_sweep(&run.scenario, &spec)?;
    let mut header = comments(&run);
    header.push(format!("sweep.parameter = {}", spec.param));
    header.push(format!("sweep.start_m = {}", spec.start));
    header.push(format!("sweep.stop_m = {}", spec.stop));
    header.push(format!("sweep.points = {}", spec.points));
    header.push(format!("sweep.spacing = {}", spec.spacing.name()));
    if let Some(obj) = spec.optimize {
        header.push(format!("sweep.optimize = {obj}"));
    }
    let path = output
        .map(Path::to_path_buf)
        .or(run.sweep_output.map(PathBuf::from));
    emit(path.as_deref(), |w| write_csv(w, &header, &rows))
}

fn cmd_optimize(args: &ConfigArgs, output: Option<&Path>) -> Result<(), Failure> {
    let run = load(args)?;
    let spec = run
        .optimize
        .clone()
        .ok_or_else(|| Failure::Config("config error at `optimize`: missing section".into()))?;
    if !run.scenario.kind.has_station() {
        return Err(Failure::Config(format!(
            "config error at `scenario.kind`: `{}` has no intermediate station",
            run.scenario.kind
        )));
    }
    let rows: Vec<String> = spec
        .heights
        .par_iter()
        .map(|&h| -> Result<String, Error> {
            let cfg =
                cvlink::sweep::with_param(&run.scenario, cvlink::sweep::SweepParam::Altitude, h);
            let cfg = cvlink::scenario::ScenarioConfig {
                station: None,
                ..cfg
            };
            let opt = optimize_station(&cfg, spec.objective)?;
            let base = baseline(&cfg, spec.objective)?;
            Ok(format!(
                "{h},{},{},{base},{}",
                opt.position,
                opt.value,
                format_flags(&opt.result.flags)
            ))
        })
        .collect::<Result<_, _>>()?;
    let mut header = comments(&run);
    header.push(format!("optimize.objective = {}", spec.objective));
    emit(output, |w| {
        for line in &header {
            writeln!(w, "# {line}")?;
        }
        writeln!(
            w,
            "total_height,optimal_position,objective_value,baseline_value,flags"
        )?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        Ok(())
    })
}

fn cmd_thresholds(
    wavelength: f64,
    temperature: f64,
    fov: f64,
    aperture: f64,
    squeezing: f64,
    source_photons: f64,
) -> Result<(), Failure> {
    if !(wavelength > 0.0
        && temperature > 0.0
        && fov > 0.0
        && aperture > 0.0
        && squeezing > 0.0
        && source_photons >= 0.0)
    {
        return Err(Failure::Config(
            "config error at `thresholds`: arguments must be positive".into(),
        ));
    }
    let state = tmst(squeezing, source_photons);
    let occupancy = mode_occupancy(wavelength, temperature);
    let detected = mean_thermal_photons_microwave(fov, aperture, wavelength, temperature);
    let mut out = io::stdout().lock();
    let mut lines = vec![
        format!("# wavelength_m = {wavelength}"),
        format!("# temperature_k = {temperature}"),
        format!("# field_of_view_sr = {fov}"),
        format!("# aperture_m = {aperture}"),
        format!("# squeezing = {squeezing}"),
        format!("# source_photons = {source_photons}"),
        format!("photons_occupancy={occupancy}"),
        format!("photons_detected={detected}"),
    ];
    for (label, n) in [("occupancy", occupancy), ("detected", detected)] {
        let m = 1.0 + 2.0 * n;
        lines.push(format!(
            "threshold_asym_{label}={}",
            entanglement_threshold_asym(state.a, state.c, m)?
        ));
        lines.push(format!(
            "threshold_sym_{label}={}",
            entanglement_threshold_sym(state.a, state.c, m)?
        ));
    }
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    Ok(())
}

fn cmd_validate(only: &[u8]) -> Result<(), Failure> {
    let reports: Vec<_> = if only.is_empty() {
        validation::run_all()
    } else {
        let mut reports = Vec::new();
        for &id in only {
            reports.push(validation::run(id).ok_or_else(|| {
                Failure::Config(format!("config error at `--only`: no criterion {id}"))
            })?);
        }
        reports
    };
    let mut all = true;
    for r in &reports {
        println!("{r}");
        all &= r.passed;
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Link(args) => cmd_link(args),
        Command::Sweep { args, output } => cmd_sweep(args, output.as_deref()),
        Command::Optimize { args, output } => cmd_optimize(args, output.as_deref()),
        Command::Thresholds {
            wavelength_m,
            temperature_k,
            field_of_view_sr,
            aperture_m,
            squeezing,
            source_photons,
        } => cmd_thresholds(
            *wavelength_m,
            *temperature_k,
            *field_of_view_sr,
            *aperture_m,
            *squeezing,
            *source_photons,
        ),
        Command::Validate { only } => cmd_validate(only),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("cvlink: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("cvlink: {msg}");
            ExitCode::from(3)
        }
    }
}
