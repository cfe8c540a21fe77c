//! `meascoh`: sweeps and Monte Carlo runs of the variance-gap criterion.
//!
//! Angles on the command line are degrees. Exit status is 0 on success,
//! 2 on a usage error, 1 on a runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meascoh::photonic::GateParams;
use meascoh::sweep::{run_to_output, Axis, Command, Format, SweepSpec};
use meascoh::Error;

#[derive(Parser, Debug)]
#[command(
    name = "meascoh",
    version,
    about = "Certify coherence between two measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// ΔV over (p, θ) for pure states (γ = 1 unless --gamma is given)
    SweepPure(Flags),
    /// ΔV over (γ, θ) at a fixed preparation angle (default α = 12°)
    SweepMixed(Flags),
    /// ΔV and squared trace norm at θ = 90° versus p (γ fixed) or γ (α fixed, default 22.5°)
    MaxViolation(Flags),
    /// Unperturbed and perturbed runs through the simulated apparatus
    /// (default T_H = 0.985, T_V = 0.324)
    Simulate(Flags),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    P,
    Gamma,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Flags {
    /// First grid axis
    #[arg(long, value_enum)]
    axis1: Option<AxisArg>,
    #[arg(long = "a1-min")]
    a1_min: Option<f64>,
    #[arg(long = "a1-max")]
    a1_max: Option<f64>,
    #[arg(long = "a1-steps")]
    a1_steps: Option<usize>,
    /// Analyzer angle grid start, degrees
    #[arg(long = "theta-min", allow_negative_numbers = true)]
    theta_min: Option<f64>,
    /// Analyzer angle grid end, degrees
    #[arg(long = "theta-max", allow_negative_numbers = true)]
    theta_max: Option<f64>,
    #[arg(long = "theta-steps")]
    theta_steps: Option<usize>,
    /// Coherence γ used when the first axis is p
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Preparation half-wave plate angle, degrees, used when the first axis is gamma
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Gate transmittivity for H
    #[arg(long)]
    th: Option<f64>,
    /// Gate transmittivity for V
    #[arg(long)]
    tv: Option<f64>,
    /// Two-photon interference visibility
    #[arg(long)]
    visibility: Option<f64>,
    /// Expected coincidences per setting and configuration
    #[arg(long)]
    flux: Option<f64>,
    /// Master seed for the Poisson sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

impl Flags {
    fn into_spec(self, command: Command) -> SweepSpec {
        let mut spec = SweepSpec::defaults_for(command);
        if let Some(a) = self.axis1 {
            spec.axis1 = match a {
                AxisArg::P => Axis::P,
                AxisArg::Gamma => Axis::Gamma,
            };
        }
        if let Some(v) = self.a1_min {
            spec.a1.min = v;
        }
        if let Some(v) = self.a1_max {
            spec.a1.max = v;
        }
        if let Some(v) = self.a1_steps {
            spec.a1.steps = v;
        }
        if let Some(v) = self.theta_min {
            spec.theta_deg.min = v;
        }
        if let Some(v) = self.theta_max {
            spec.theta_deg.max = v;
        }
        if let Some(v) = self.theta_steps {
            spec.theta_deg.steps = v;
        }
        if let Some(v) = self.gamma {
            spec.gamma = v;
        }
        if let Some(v) = self.alpha {
            spec.alpha_deg = v;
        }
        spec.gate = GateParams {
            t_h: self.th.unwrap_or(spec.gate.t_h),
            t_v: self.tv.unwrap_or(spec.gate.t_v),
            visibility: self.visibility.unwrap_or(spec.gate.visibility),
        };
        if let Some(v) = self.flux {
            spec.flux = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        spec.output = self.out;
        spec.format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        spec
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::SweepPure(f) => (Command::SweepPure, f),
        Cmd::SweepMixed(f) => (Command::SweepMixed, f),
        Cmd::MaxViolation(f) => (Command::MaxViolation, f),
        Cmd::Simulate(f) => (Command::Simulate, f),
    };
    let spec = flags.into_spec(command);
    if let Err(e) = spec.validate(command) {
        eprintln!("meascoh: {e}");
        return ExitCode::from(2);
    }
    match run_to_output(command, &spec) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e @ Error::InvalidSweep(_)) => {
            eprintln!("meascoh: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("meascoh: {e}");
            ExitCode::from(1)
        }
    }
}
