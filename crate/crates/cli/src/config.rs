use std::path::{Path, PathBuf};

use num_complex::Complex64;
use planar_qed::analysis::SweepSpec;
use planar_qed::green::QuadratureConfig;
use planar_qed::observables::Backend;
use planar_qed::spp::SearchBox;
use planar_qed::units::{AtomSI, DipoleOrientation, MediumResponse, STANDARD_GRAVITY};
use serde::{Deserialize, Serialize};

use crate::args::{parse_complex, parse_orientation, parse_sweep, CommonArgs, Command, Format};
use crate::error::CliError;

/// Default barrier sweep when none is given.
pub const BARRIER_SWEEP: &str = "0.05:5:200";

/// Contents of a `--config` file. Strings use the same syntax as the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eps: Option<String>,
    pub mu: Option<String>,
    pub d: Option<f64>,
    pub orientation: Option<String>,
    pub z: Option<String>,
    pub backend: Option<Backend>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub gamma0: Option<f64>,
    pub lambda: Option<f64>,
    pub mass: Option<f64>,
    pub temperature: Option<f64>,
    pub min_height: Option<f64>,
    pub lattice_scale: Option<f64>,
    pub gravity: Option<f64>,
    pub quadrature: Option<QuadratureConfig>,
    pub search_box: Option<SearchBox>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved run. Serialized into JSON reports; `out` and `jobs` are
/// left out so that they cannot change the report bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub medium: MediumResponse,
    pub d: f64,
    pub orientation: DipoleOrientation,
    pub sweep: Option<SweepSpec>,
    pub backend: Option<Backend>,
    pub quadrature: QuadratureConfig,
    pub atom_si: Option<AtomSI>,
    pub temperature: Option<f64>,
    pub gravity: f64,
    pub min_height: Option<f64>,
    pub lattice_scale: Option<f64>,
    pub search_box: Option<SearchBox>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

fn missing(name: &str) -> CliError {
    CliError::Validation(format!("missing required option --{name}"))
}

fn from_file<T>(s: Option<String>, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
    s.map(|s| f(&s).map_err(CliError::Validation)).transpose()
}

impl RunConfig {
    /// Flags take precedence over the config file.
    pub fn resolve(command: Command, a: CommonArgs) -> Result<Self, CliError> {
        let file = match &a.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let eps: Complex64 = a.eps.or(from_file(file.eps, parse_complex)?).ok_or_else(|| missing("eps"))?;
        let mu: Complex64 = a.mu.or(from_file(file.mu, parse_complex)?).ok_or_else(|| missing("mu"))?;
        let medium = MediumResponse::new(eps, mu)?;
        let d = a.d.or(file.d).ok_or_else(|| missing("d"))?;
        let orientation = a
            .orientation
            .or(from_file(file.orientation, parse_orientation)?)
            .unwrap_or_else(DipoleOrientation::parallel);

        let mut sweep = a.z.or(from_file(file.z, parse_sweep)?);
        match command {
            Command::Potential | Command::Decay | Command::Green if sweep.is_none() => return Err(missing("z")),
            Command::Barrier | Command::Trap if sweep.is_none() => {
                sweep = Some(parse_sweep(BARRIER_SWEEP).map_err(CliError::Validation)?);
            }
            Command::Spp => sweep = None,
            _ => {}
        }

        let mut quadrature = file.quadrature.unwrap_or_default();
        if let Some(t) = a.rel_tol {
            quadrature.rel_tol = t;
        }
        quadrature.validate()?;

        let gamma0 = a.gamma0.or(file.gamma0);
        let lambda = a.lambda.or(file.lambda);
        let mass = a.mass.or(file.mass);
        let atom_si = match (gamma0, lambda, mass) {
            (Some(g), Some(l), Some(m)) => Some(AtomSI::new(g, l, m)?),
            (None, None, None) => None,
            _ => {
                return Err(CliError::Validation(
                    "--gamma0, --lambda and --mass must be given together".into(),
                ))
            }
        };
        let temperature = a.temperature.or(file.temperature);
        if command == Command::Trap {
            if atom_si.is_none() {
                return Err(missing("gamma0, --lambda and --mass"));
            }
            if temperature.is_none() {
                return Err(missing("temperature"));
            }
        }

        let format = a.format.or(file.format).unwrap_or(command.default_format());
        if format == Format::Csv && command.default_format() == Format::Json {
            return Err(CliError::Validation(format!(
                "{} writes a JSON report; CSV is only available for sweeps",
                serde_json::to_string(&command).unwrap_or_default().trim_matches('"')
            )));
        }

        Ok(RunConfig {
            command,
            medium,
            d,
            orientation,
            sweep,
            backend: a.backend.or(file.backend),
            quadrature,
            atom_si,
            temperature,
            gravity: file.gravity.unwrap_or(STANDARD_GRAVITY),
            min_height: a.min_height.or(file.min_height),
            lattice_scale: a.lattice_scale.or(file.lattice_scale),
            search_box: file.search_box,
            out: a.out.or(file.out),
            format,
            jobs: a.jobs.or(file.jobs),
        })
    }
}
