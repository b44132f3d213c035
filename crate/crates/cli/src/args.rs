use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use planar_qed::analysis::{Grid, SweepSpec};
use planar_qed::observables::Backend;
use planar_qed::units::DipoleOrientation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "planar-qed", version, about = "vdW potential, force and decay rate near a slab on a mirror")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Potential, force and rate along a sweep (CSV or JSON)
    Potential,
    /// Decay rate along a sweep; also inside the shadow of the ideal slab
    Decay,
    /// Scattering Green tensor and its height derivative
    Green,
    /// Barrier search, plus a levitation check when atom data are given
    Barrier,
    /// Surface-plasmon pole search
    Spp,
    /// Barrier height against the thermal energy
    Trap,
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Potential | Command::Decay | Command::Green => Format::Csv,
            Command::Barrier | Command::Spp | Command::Trap => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Slab permittivity, e.g. -1+1e-3i
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_complex)]
    pub eps: Option<Complex64>,
    /// Slab permeability, e.g. -1+1e-3i
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_complex)]
    pub mu: Option<Complex64>,
    /// Slab thickness in c/ω₁₀
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// parallel, perpendicular, random, or the parallel weight p∥ in [0, 1]
    #[arg(long, global = true, value_parser = parse_orientation)]
    pub orientation: Option<DipoleOrientation>,
    /// Atom heights as min:max:count[:log]
    #[arg(long, global = true, value_parser = parse_sweep)]
    pub z: Option<SweepSpec>,
    /// numeric, ideal, near_surface or interface (default: chosen from the medium)
    #[arg(long, global = true, value_parser = parse_backend)]
    pub backend: Option<Backend>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps
    #[arg(long, global = true, env = "PLANAR_QED_JOBS")]
    pub jobs: Option<usize>,
    /// JSON file with defaults for any of these options
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Free-space decay rate Γ₀ in 1/s
    #[arg(long, global = true)]
    pub gamma0: Option<f64>,
    /// Transition wavelength λ₁₀ in m
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Atomic mass in kg
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// Temperature in K
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Smallest barrier height, in ħΓ₀, that counts as a barrier
    #[arg(long, global = true)]
    pub min_height: Option<f64>,
    /// Flag points below this height (c/ω₁₀) as below the lattice scale
    #[arg(long, global = true)]
    pub lattice_scale: Option<f64>,
    /// Relative quadrature tolerance
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
}

/// `a+bi`, `a-bi`, `a` or `bi`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    Complex64::from_str(s.trim()).map_err(|_| format!("`{s}` is not a complex number of the form a+bi"))
}

pub fn parse_orientation(s: &str) -> Result<DipoleOrientation, String> {
    match s {
        "parallel" => Ok(DipoleOrientation::parallel()),
        "perpendicular" => Ok(DipoleOrientation::perpendicular()),
        "random" => Ok(DipoleOrientation::random()),
        _ => {
            let p: f64 = s
                .parse()
                .map_err(|_| format!("`{s}`: expected parallel, perpendicular, random or a number in [0, 1]"))?;
            DipoleOrientation::from_parallel_fraction(p).map_err(|e| e.to_string())
        }
    }
}

/// `min:max:count[:log]`
pub fn parse_sweep(s: &str) -> Result<SweepSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [_, _, _] => Grid::Linear,
        [_, _, _, "log"] => Grid::Log,
        [_, _, _, "lin" | "linear"] => Grid::Linear,
        _ => return Err(format!("`{s}`: expected min:max:count[:log]")),
    };
    let num = |i: usize| parts[i].parse::<f64>().map_err(|_| format!("`{}` is not a number", parts[i]));
    let count = parts[2]
        .parse::<usize>()
        .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
    SweepSpec::new(num(0)?, num(1)?, count, grid).map_err(|e| e.to_string())
}

pub fn parse_backend(s: &str) -> Result<Backend, String> {
    Backend::from_str(s).map_err(|e| e.to_string())
}
