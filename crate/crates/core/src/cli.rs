//! Command-line front end. Each subcommand parses flags, calls the library
//! and formats the results; no numeric work happens here.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, LinkBudget};
use crate::meshgen::{self, export, ExcitationSpec, MeshError, MeshParams};
use crate::scatter::{self, PlateSpec, ScatterError};
use crate::scene::{self, SceneError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Scene(#[from] SceneError),
    #[error("{0}")]
    Mesh(#[from] MeshError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Scatter(#[from] ScatterError),
    #[error("{path}: malformed channel file: {message}")]
    Channels { path: PathBuf, message: String },
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "emgrid", version, about = "FDTD grid generation and RF analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a rectilinear grid for a scene file.
    Mesh(MeshArgs),
    /// Evaluate a link budget.
    Linkbudget(LinkBudgetArgs),
    /// Compute optimal reflecting-surface phases for a channel file.
    RisPhase(RisPhaseArgs),
    /// Compute a plate scattering pattern.
    Scatter(ScatterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Lowest excitation frequency (Hz).
    #[arg(long)]
    pub fmin: f64,
    /// Highest excitation frequency (Hz).
    #[arg(long)]
    pub fmax: f64,
    #[arg(long)]
    pub max_cell_model: f64,
    #[arg(long)]
    pub max_cell_space: f64,
    #[arg(long)]
    pub min_cell_global: f64,
    /// Refinement lines per side, per axis.
    #[arg(long, value_parser = parse_triple::<u32>, default_value = "3,3,3")]
    pub n: [u32; 3],
    #[arg(long, value_parser = parse_triple::<f64>, default_value = "6,6,6")]
    pub res_fraction: [f64; 3],
    #[arg(long, default_value_t = 8)]
    pub pml_n: u32,
    #[arg(long, default_value_t = 2.0)]
    pub grading_ratio: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GridFormat::Json)]
    pub format: GridFormat,
}

#[derive(Debug, Args)]
pub struct LinkBudgetArgs {
    /// Transmit power (dBm).
    #[arg(long, allow_negative_numbers = true)]
    pub ptx: f64,
    /// Gain term (dB); the first one is taken as the transmit antenna gain.
    #[arg(long, allow_negative_numbers = true)]
    pub gain: Vec<f64>,
    /// Loss term (dB); the first one is taken as the transmit-side loss.
    #[arg(long, allow_negative_numbers = true)]
    pub loss: Vec<f64>,
    /// Distance for an added free-space path loss term (m).
    #[arg(long, requires = "fspl_f")]
    pub fspl_d: Option<f64>,
    /// Frequency for the free-space path loss term (Hz).
    #[arg(long, requires = "fspl_d")]
    pub fspl_f: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RisPhaseArgs {
    #[arg(long)]
    pub channels: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Plate side in wavelengths.
    #[arg(long)]
    pub p: f64,
    /// Incidence angle from the normal (degrees).
    #[arg(long, default_value_t = 0.0)]
    pub theta_i: f64,
    #[arg(long, default_value_t = 3601)]
    pub samples: usize,
    /// Excitation frequency (Hz); only scales absolute intensity.
    #[arg(long, default_value_t = 30e9)]
    pub freq: f64,
    /// Append a 10 log10 column to the export.
    #[arg(long)]
    pub db: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Runs one subcommand. Results go to `out`, warnings to `diag`.
pub fn run(cli: &Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Mesh(args) => run_mesh(args, out, diag),
        Command::Linkbudget(args) => run_linkbudget(args, out),
        Command::RisPhase(args) => run_ris_phase(args, out),
        Command::Scatter(args) => run_scatter(args, out),
    }
}

fn parse_triple<T: std::str::FromStr + Copy>(s: &str) -> Result<[T; 3], String>
where
    T::Err: std::fmt::Display,
{
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<T>, _>>()?;
    match v[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(format!("expected 3 comma-separated values, got {}", v.len())),
    }
}

fn run_mesh(args: &MeshArgs, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    let root = scene::parse_scene(&read(&args.scene)?)?;
    let exc = ExcitationSpec::new(args.fmin, args.fmax);
    let params = MeshParams {
        n: args.n,
        res_fraction: args.res_fraction,
        pml_n: args.pml_n,
        grading_ratio: args.grading_ratio,
        ..MeshParams::new(args.max_cell_model, args.max_cell_space, args.min_cell_global)
    };
    let grid = meshgen::generate(&root, &exc, &params)?;
    for w in &grid.warnings {
        writeln!(diag, "warning: {w}")?;
    }
    let body = match args.format {
        GridFormat::Json => export::to_json(&grid),
        GridFormat::Text => export::to_text(&grid),
    };
    write(&args.out, &body)?;
    let c = meshgen::cell_counts(&grid);
    writeln!(
        out,
        "cells: {}×{}×{} = {}, dt_max = {:e}",
        c.nx, c.ny, c.nz, c.total, grid.dt_max
    )?;
    Ok(())
}

fn run_linkbudget(args: &LinkBudgetArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut budget = LinkBudget::new(args.ptx);
    for (i, g) in args.gain.iter().enumerate() {
        budget = budget.gain(format!("gain[{}]", i + 1), *g);
    }
    for (i, l) in args.loss.iter().enumerate() {
        budget = budget.loss(format!("loss[{}]", i + 1), *l);
    }
    let mut fspl_note = None;
    if let (Some(d), Some(f)) = (args.fspl_d, args.fspl_f) {
        let loss = analysis::fspl(d, f, meshgen::C0)?;
        budget = budget.loss("L_FS", loss);
        fspl_note = Some((d, f));
    }
    budget.validate()?;

    writeln!(out, "P_TX = {:.2} dBm", budget.p_tx)?;
    for (label, g) in &budget.gains {
        writeln!(out, "+ {label} = {g:.2} dB")?;
    }
    for (label, l) in &budget.losses {
        match fspl_note {
            Some((d, f)) if label == "L_FS" => {
                writeln!(out, "- {label} = {l:.2} dB (d = {d} m, f = {f:e} Hz)")?
            }
            _ => writeln!(out, "- {label} = {l:.2} dB")?,
        }
    }
    if let (Some(g_tx), Some(l_tx)) = (args.gain.first(), args.loss.first()) {
        writeln!(out, "EIRP = {:.2} dBm", analysis::eirp(budget.p_tx, *l_tx, *g_tx))?;
    }
    writeln!(out, "P_RX = {:.2} dBm", analysis::received_power(&budget))?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    g: Vec<[f64; 2]>,
    h: Vec<[f64; 2]>,
}

fn run_ris_phase(args: &RisPhaseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file: ChannelFile =
        serde_json::from_str(&read(&args.channels)?).map_err(|e| CliError::Channels {
            path: args.channels.clone(),
            message: e.to_string(),
        })?;
    let complex = |v: &[[f64; 2]]| v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    let g: Vec<Complex64> = complex(&file.g);
    let h: Vec<Complex64> = complex(&file.h);

    let phases = analysis::optimal_phases(&g, &h)?;
    let before = analysis::composite(&g, &h, &vec![0.0; g.len()])?.norm();
    let after = analysis::composite(&g, &h, &phases)?.norm();
    for (i, phi) in phases.iter().enumerate() {
        writeln!(out, "phi[{i}] = {phi} rad")?;
    }
    writeln!(out, "|k| before = {before}")?;
    writeln!(out, "|k| after = {after}")?;
    Ok(())
}

fn run_scatter(args: &ScatterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let lambda = analysis_wavelength(args.freq)?;
    let plate = PlateSpec::new(args.p, lambda, args.theta_i.to_radians())?;
    let pattern = scatter::po_pattern(&plate, args.samples)?;
    write(&args.out, &pattern.to_text(args.db))?;
    writeln!(out, "peak angle = {} deg", pattern.peak_angle().to_degrees())?;
    writeln!(out, "sidelobes = {}", scatter::count_sidelobes(&pattern))?;
    match scatter::hpbw(&pattern) {
        Ok(w) => writeln!(out, "HPBW = {} deg", w.to_degrees())?,
        Err(e) => writeln!(out, "HPBW = n/a ({e})")?,
    }
    Ok(())
}

fn analysis_wavelength(freq: f64) -> Result<f64, CliError> {
    let (lambda, _) = meshgen::wavelengths(&ExcitationSpec::single(freq))?;
    Ok(lambda)
}
