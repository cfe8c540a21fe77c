//! Parameter grids over `(p or γ, θ)` and their CSV / JSON output.
//!
//! Every grid point carries the noiseless prediction, a Monte Carlo
//! estimate from the simulated apparatus, and `‖ρ - ρ'‖₁²`. Points are
//! evaluated in parallel; output order is the grid order (axis1 outer,
//! θ inner) and per-point seeds derive from `(seed, index)`, so a spec
//! always produces the same bytes.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{observable_x, observable_y};
use crate::criterion::{delta_v, z_score};
use crate::error::{Error, Result};
use crate::photonic::{prepare_signal, simulate_point, GateParams, PrepConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    P,
    Gamma,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::P => "p",
            Axis::Gamma => "gamma",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Axis::P),
            "gamma" => Ok(Axis::Gamma),
            other => Err(Error::InvalidSweep(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidSweep(format!("unknown format '{other}'"))),
        }
    }
}

/// Which data set to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// ΔV over `(p, θ)` for pure states.
    SweepPure,
    /// ΔV over `(γ, θ)` at a fixed plate angle.
    SweepMixed,
    /// ΔV and `‖ρ - ρ'‖₁²` at `θ = 90°` versus `p` or `γ`.
    MaxViolation,
    /// Both configurations through the (imperfect) apparatus.
    Simulate,
}

/// Evenly spaced grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    fn validate(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidSweep(format!(
                "{name}: steps must be at least 2"
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(Error::InvalidSweep(format!(
                "{name}: min {} must be below max {}",
                self.min, self.max
            )));
        }
        if self.min < lo || self.max > hi {
            return Err(Error::InvalidSweep(format!(
                "{name}: range [{}, {}] outside [{lo}, {hi}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub a1: Range,
    /// Analyzer angle grid, degrees.
    pub theta_deg: Range,
    /// Coherence used when `axis1 = p`.
    pub gamma: f64,
    /// Preparation plate angle (degrees) used when `axis1 = gamma`.
    pub alpha_deg: f64,
    pub phi: f64,
    pub gate: GateParams,
    /// Expected coincidences per setting and configuration.
    pub flux: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_STEPS: usize = 50;
pub const DEFAULT_FLUX: f64 = 1e5;
pub const DEFAULT_SEED: u64 = 42;
/// Plate angle of the mixed-state data set (`p = sin²24° ≈ 0.1654`).
pub const MIXED_ALPHA_DEG: f64 = 12.0;
/// Plate angle giving `p = 1/2`.
pub const BALANCED_ALPHA_DEG: f64 = 22.5;

impl SweepSpec {
    /// Defaults per command: 50×50 grids, θ over 0–180°, flux 1e5, seed 42.
    /// Grid sweeps use the ideal gate, `simulate` the measured one.
    pub fn defaults_for(command: Command) -> Self {
        let (axis1, alpha_deg, gate) = match command {
            Command::SweepPure => (Axis::P, BALANCED_ALPHA_DEG, GateParams::ideal()),
            Command::SweepMixed => (Axis::Gamma, MIXED_ALPHA_DEG, GateParams::ideal()),
            Command::MaxViolation => (Axis::P, BALANCED_ALPHA_DEG, GateParams::ideal()),
            Command::Simulate => (Axis::P, MIXED_ALPHA_DEG, GateParams::measured()),
        };
        Self {
            axis1,
            a1: Range::new(0.0, 1.0, DEFAULT_STEPS),
            theta_deg: Range::new(0.0, 180.0, DEFAULT_STEPS),
            gamma: 1.0,
            alpha_deg,
            phi: 0.0,
            gate,
            flux: DEFAULT_FLUX,
            seed: DEFAULT_SEED,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self, command: Command) -> Result<()> {
        match (command, self.axis1) {
            (Command::SweepPure, Axis::Gamma) => {
                return Err(Error::InvalidSweep("sweep-pure runs over p".into()))
            }
            (Command::SweepMixed, Axis::P) => {
                return Err(Error::InvalidSweep("sweep-mixed runs over gamma".into()))
            }
            _ => {}
        }
        match self.axis1 {
            Axis::P => self.a1.validate("p", 0.0, 1.0)?,
            Axis::Gamma => self.a1.validate("gamma", -1.0, 1.0)?,
        }
        if command != Command::MaxViolation {
            self.theta_deg.validate("theta", f64::MIN, f64::MAX)?;
        }
        if !(-1.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidSweep(format!(
                "gamma = {} outside [-1, 1]",
                self.gamma
            )));
        }
        if !self.alpha_deg.is_finite() || !self.phi.is_finite() {
            return Err(Error::InvalidSweep("alpha and phi must be finite".into()));
        }
        GateParams::new(self.gate.t_h, self.gate.t_v, self.gate.visibility)
            .map_err(|e| Error::InvalidSweep(e.to_string()))?;
        if !(self.flux > 0.0 && self.flux.is_finite()) {
            return Err(Error::InvalidSweep(format!(
                "flux {} must be positive",
                self.flux
            )));
        }
        Ok(())
    }

    fn prep_for(&self, a1: f64) -> Result<PrepConfig> {
        let mut cfg = match self.axis1 {
            Axis::P => PrepConfig::from_p_gamma(a1, self.gamma)?,
            Axis::Gamma => PrepConfig::new(self.alpha_deg, 0.5 * (1.0 + a1), 0.0)?,
        };
        cfg.phi = self.phi;
        Ok(cfg)
    }
}

/// One grid point. Field names are the output column names.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis1: f64,
    /// Degrees.
    pub theta: f64,
    pub analytic_dv: f64,
    pub sampled_dv: f64,
    pub std_err: f64,
    /// `sampled_dv / std_err`, or 0 when the error vanishes.
    pub z: f64,
    pub trdist_sq: f64,
}

pub const CSV_HEADER: &str = "axis1,theta,analytic_dv,sampled_dv,std_err,z,trdist_sq";

fn evaluate(
    spec: &SweepSpec,
    a1: f64,
    theta_deg: f64,
    theta: f64,
    index: usize,
    use_model: bool,
) -> Result<SweepRecord> {
    let cfg = spec.prep_for(a1)?;
    let rho = prepare_signal(&cfg)?;
    let report = delta_v(&rho, &observable_x(), &observable_y(theta))?;
    let sim = simulate_point(&cfg, &spec.gate, theta, spec.flux, spec.seed, index as u64)?;
    let analytic_dv = if use_model {
        sim.model_delta_v
    } else {
        report.delta_v
    };
    Ok(SweepRecord {
        axis1: a1,
        theta: theta_deg,
        analytic_dv,
        sampled_dv: sim.estimate.delta_v,
        std_err: sim.estimate.std_error,
        z: z_score(sim.estimate.delta_v, sim.estimate.std_error).unwrap_or(0.0),
        trdist_sq: report.trace_norm_sq,
    })
}

/// Runs `command` over the grid of `spec`.
pub fn run_sweep(command: Command, spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate(command)?;
    let a1_values = spec.a1.values();
    let thetas: Vec<(f64, f64)> = if command == Command::MaxViolation {
        vec![(90.0, FRAC_PI_2)]
    } else {
        spec.theta_deg
            .values()
            .into_iter()
            .map(|t| (t, t.to_radians()))
            .collect()
    };
    let use_model = command == Command::Simulate;
    let points: Vec<(usize, f64, f64, f64)> = a1_values
        .iter()
        .flat_map(|&a| thetas.iter().map(move |&(td, tr)| (a, td, tr)))
        .enumerate()
        .map(|(i, (a, td, tr))| (i, a, td, tr))
        .collect();
    points
        .par_iter()
        .map(|&(i, a, td, tr)| evaluate(spec, a, td, tr, i, use_model))
        .collect()
}

pub fn sweep_pure(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep(Command::SweepPure, spec)
}

pub fn sweep_mixed(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep(Command::SweepMixed, spec)
}

pub fn max_violation(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep(Command::MaxViolation, spec)
}

pub fn simulate(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep(Command::Simulate, spec)
}

pub fn write_records<W: Write>(records: &[SweepRecord], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            if records.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Runs the sweep and writes it to `spec.output`, or to `stdout` if unset.
pub fn run_to_output(command: Command, spec: &SweepSpec) -> Result<usize> {
    let records = run_sweep(command, spec)?;
    match &spec.output {
        Some(path) => {
            let file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_records(&records, spec.format, file)?;
        }
        None => write_records(&records, spec.format, std::io::stdout().lock())?,
    }
    Ok(records.len())
}
