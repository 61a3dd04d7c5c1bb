use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Time-optimal bang-bang qubit control and its finite-bandwidth Fourier
/// approximation.
///
/// Frequencies are in units of ω₀ unless stated otherwise; angles are in
/// radians. Every command is deterministic.
#[derive(Parser, Debug)]
#[command(name = "fato", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the time-optimal bang-bang sequence for a π rotation.
    Synth(SynthArgs),
    /// Sample the truncated Fourier waveform of a sequence as CSV.
    Waveform(WaveformArgs),
    /// Simulate one FATO waveform and compare with the closed-form estimates.
    Fidelity(FidelityArgs),
    /// Run a parameter sweep and emit one row per grid point.
    Sweep(SweepArgs),
    /// Two-qubit SWAP from ZZ evolution and collective pulses.
    Swap2q(SwapArgs),
}

/// Drift frequency and drive strength. Give exactly one of `--omega-bar`,
/// `--theta` or `--theta-frac`.
#[derive(Args, Debug, Clone)]
struct Drive {
    /// Drift frequency ω₀.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    omega0: f64,
    #[command(flatten)]
    strength: Strength,
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
struct Strength {
    /// Maximum drive amplitude Ω̄.
    #[arg(long, value_parser = positive)]
    omega_bar: Option<f64>,
    /// Drive angle θ = arctan(Ω̄/ω₀), in (0, π/2).
    #[arg(long, value_parser = positive)]
    theta: Option<f64>,
    /// Shorthand for θ = π/(2n).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(2..))]
    theta_frac: Option<u32>,
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
struct Truncation {
    /// Bandwidth Δω; the order is K = ⌊ΔωT/2π⌋.
    #[arg(long, value_parser = positive)]
    bandwidth: Option<f64>,
    /// Harmonic order K, overriding the bandwidth rule.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GateArg {
    X,
    Y,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SweepGateArg {
    X,
    Y,
    Swap,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum NormalizeArg {
    Omega0,
    OmegaBar,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SwapMode {
    /// JSON with the schedule and its rectangular and FATO fidelities.
    Summary,
    /// CSV of the truncated and rectangular x/y drive profiles.
    Profiles,
    /// Sweep over `--grid` bandwidths (units of J) at fixed `--amp`.
    Bandwidth,
    /// Sweep over `--grid` amplitudes (units of J) at fixed `--bandwidth`.
    Amp,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    drive: Drive,
    /// Target π rotation.
    #[arg(long, value_enum)]
    gate: GateArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WaveformArgs {
    #[command(flatten)]
    drive: Drive,
    /// Target π rotation (not needed with `--sequence`).
    #[arg(long, value_enum, required_unless_present = "sequence")]
    gate: Option<GateArg>,
    /// JSON file with a `bangs` list of `{level, duration}` (e.g. `synth` output).
    #[arg(long)]
    sequence: Option<PathBuf>,
    #[command(flatten)]
    truncation: Truncation,
    /// Number of equally spaced samples over the played interval.
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Hard-limit samples to [-1, 1].
    #[arg(long)]
    clamp: bool,
    /// Expand the odd one-bang extension of the sequence instead.
    #[arg(long)]
    odd_extension: bool,
    /// Write a JSON summary (order, tail error, Gibbs maximum) here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[command(flatten)]
    drive: Drive,
    /// Target π rotation; also the fidelity target with `--sequence`.
    #[arg(long, value_enum)]
    gate: GateArg,
    #[arg(long)]
    sequence: Option<PathBuf>,
    #[command(flatten)]
    truncation: Truncation,
    #[arg(long)]
    odd_extension: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// bandwidth, theta, detune_omega0, detune_amp, time_ratio, swap_bandwidth or swap_amp.
    #[arg(long, value_parser = parse_kind)]
    kind: fato::SweepKind,
    #[arg(long, value_enum, default_value = "x")]
    gate: SweepGateArg,
    /// `a:b:n` (n points from a to b inclusive), a comma list, or `weak`
    /// for θ = π/(2n), n = 2..16, with the gate's parity.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    omega0: f64,
    #[command(flatten)]
    strength: Strength,
    /// Fixed bandwidth for kinds that do not sweep it.
    #[arg(long, value_parser = positive)]
    bandwidth: Option<f64>,
    /// Fixed order, taking precedence over `--bandwidth`.
    #[arg(long)]
    order: Option<usize>,
    /// Unit of single-qubit bandwidth values.
    #[arg(long, value_enum, default_value = "omega0")]
    normalize: NormalizeArg,
    /// ZZ coupling J for the SWAP kinds.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    j: f64,
    /// SWAP pulse amplitude in units of J.
    #[arg(long, default_value_t = 100.0, value_parser = positive)]
    amp: f64,
    /// Worker threads; 0 uses the default pool.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SwapArgs {
    #[arg(long, value_enum, default_value = "summary")]
    mode: SwapMode,
    /// ZZ coupling J.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    j: f64,
    /// Pulse amplitude Ω in units of J.
    #[arg(long, default_value_t = 100.0, value_parser = positive)]
    amp: f64,
    /// Bandwidth Δω in units of J.
    #[arg(long, default_value_t = 400.0, value_parser = positive)]
    bandwidth: f64,
    /// Grid for the sweep modes, as for `sweep --grid`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, default_value_t = 2048, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Switch the coupling off while rectangular pulses play (summary only).
    #[arg(long)]
    coupling_off_during_pulses: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite positive number, got {s}"))
    }
}

fn parse_kind(s: &str) -> Result<fato::SweepKind, String> {
    s.parse()
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum CliError {
    /// Bad input, exit 2.
    Usage(String),
    /// Numerical failure, exit 3.
    Numerical(String),
}

impl CliError {
    fn usage(flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{flag}: {msg}"))
    }
}

impl From<fato::Error> for CliError {
    fn from(e: fato::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Waveform(a) => commands::waveform(a),
        Command::Fidelity(a) => commands::fidelity(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Swap2q(a) => commands::swap2q(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn numerical_errors_map_to_exit_three() {
        let e = CliError::from(fato::Error::NoConvergence { defect: 1e-3, steps: 10 });
        assert!(matches!(e, CliError::Numerical(_)));
        let e = CliError::from(fato::Error::EmptySequence);
        assert!(matches!(e, CliError::Usage(_)));
    }

    #[test]
    fn positive_rejects_bad_numbers() {
        assert_eq!(positive("2.5"), Ok(2.5));
        assert!(positive("0").is_err());
        assert!(positive("-1").is_err());
        assert!(positive("nan").is_err());
        assert!(positive("inf").is_err());
        assert!(positive("abc").is_err());
    }
}
