use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nearfield_core::channel::{channel, normalized_correlation};
use nearfield_core::config::{self, RunConfig};
use nearfield_core::experiments::{self, ExperimentResult};
use nearfield_core::geometry::fraunhofer_distance;
use nearfield_core::units::wavelength;
use nearfield_core::{exec, ChannelModel, Error, ErrorKind, SourceLocation, Vec3};

/// Near-field massive MIMO link-level experiments.
#[derive(Debug, Parser)]
#[command(name = "nearfield", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file (TOML, JSON or an experiment sidecar); `defaults` uses
    /// built-in values.
    #[arg(long, global = true, default_value = config::DEFAULTS_NAME)]
    config: PathBuf,
    /// Output directory for CSV tables and the JSON sidecar.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// RNG seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Config override `key=value` (dotted keys, repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Amplitude and phase deviation across the array.
    Deviation,
    /// Normalized single-UE gain against distance.
    GainVsDistance,
    /// Interference gain heat maps around a fixed UE.
    InterferenceMap,
    /// Monte Carlo SE samples and CDFs.
    SeCdf,
    /// Mean SE per UE against the number of UEs.
    SeVsK,
    /// Print geometry and channel quantities for one UE position.
    ChannelProbe {
        /// UE position `x,y,z` in metres.
        #[arg(long, value_parser = parse_position, allow_hyphen_values = true)]
        pos: Vec3,
        /// Carrier frequency in Hz (defaults to the config carrier).
        #[arg(long)]
        carrier: Option<f64>,
    },
}

fn parse_position(s: &str) -> Result<Vec3, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("invalid coordinate in {s:?}: {e}"))?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn probe(config: &RunConfig, pos: Vec3, carrier: Option<f64>) -> nearfield_core::Result<String> {
    let carrier = carrier.unwrap_or(config.scenario.carrier_hz);
    if !(carrier.is_finite() && carrier > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "carrier must be positive, got {carrier}"
        )));
    }
    let lambda = wavelength(carrier);
    let geometry = config.scenario.array.build(lambda)?;
    let source = SourceLocation::from_position(pos)?;
    let exact = channel(ChannelModel::Exact, &source, &geometry, lambda)?;
    let far_field = channel(ChannelModel::FarField, &source, &geometry, lambda)?;
    let mut out = String::new();
    out += &format!("carrier_hz={carrier}\n");
    out += &format!("wavelength_m={lambda}\n");
    out += &format!(
        "array n_h={} n_v={} antennas={}\n",
        geometry.n_h(),
        geometry.n_v(),
        geometry.len()
    );
    out += &format!("distance_m={}\n", source.distance());
    out += &format!("azimuth_rad={}\n", source.azimuth());
    out += &format!("elevation_rad={}\n", source.elevation());
    out += &format!("fraunhofer_m={}\n", fraunhofer_distance(&geometry, lambda));
    for h in [&exact, &far_field] {
        out += &format!("norm_sqr[{}]={}\n", h.model(), h.norm_sqr());
    }
    out += &format!("correlation={}", normalized_correlation(&exact, &far_field));
    Ok(out)
}

fn run_pipeline(command: &Command, config: &RunConfig) -> nearfield_core::Result<ExperimentResult> {
    match command {
        Command::Deviation => experiments::run_deviation_study(config),
        Command::GainVsDistance => experiments::run_gain_vs_distance(config),
        Command::InterferenceMap => experiments::run_interference_maps(config),
        Command::SeCdf => experiments::run_se_cdf(config),
        Command::SeVsK => experiments::run_se_vs_k(config),
        Command::ChannelProbe { .. } => unreachable!("probe has no pipeline"),
    }
}

fn run(cli: &Cli) -> nearfield_core::Result<()> {
    let start = Instant::now();
    let config = config::load(&cli.common.config, &cli.common.overrides, cli.common.seed)?;
    let threads = cli.common.threads.map(|n| n as usize);
    if let Command::ChannelProbe { pos, carrier } = &cli.command {
        let text = exec::install(threads, || probe(&config, *pos, *carrier))?;
        println!("{text}");
        return Ok(());
    }
    let result = exec::install(threads, || run_pipeline(&cli.command, &config))?;
    let written = result.write(&cli.common.out)?;
    println!(
        "{}: {} rows in {} files under {} ({}) in {:.2} s",
        result.experiment_id,
        result.total_rows(),
        written.len(),
        cli.common.out.display(),
        result.describe(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
