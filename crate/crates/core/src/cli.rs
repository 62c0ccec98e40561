//! Command-line front end. Every command reads an optional JSON config,
//! applies flag overrides and writes its artifacts into the output
//! directory with the resolved config embedded.

use std::cell::RefCell;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::charge::{GaussianCharge, RadialCharge};
use crate::crosscheck::crosscheck;
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_header};
use crate::lattice::{build_lattice, density_of, periodize, ChargeDensity, CutoffShape, FourierLattice};
use crate::numerics::C64;
use crate::pauli_villars::{f2_energy, m_table, pv_scheme, FieldSample, F2Energy, PvScheme};
use crate::renorm::{
    b0, bare_from_physical, cutoff_from_z3, density_series, linear_grid, log_grid, physical_density_linear,
    renorm_point_from_bare, series_partial_sum, uehling_potential, uehling_potential_fourier, MultiplierKind,
    MultiplierTable, RenormPoint, SampledFunction,
};
use crate::scf::{scf_charge_sector, scf_solve, Damping, PeriodicSystem, ScfOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Multipliers,
    Scf,
    Renorm,
    Pv,
    Crosscheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RenormMode {
    /// Bare coupling `alpha` and cutoff given.
    FromBare,
    /// Physical coupling and cutoff given.
    FromPhysical,
    /// Physical coupling and `Z3` given; the cutoff is solved for.
    FromZ3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensitySpec {
    Gaussian { charge: f64, width: f64 },
    /// CSV of `k,value` samples of the unitary Fourier transform.
    File(PathBuf),
}

/// Contents of the JSON config file. Every field is optional; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub box_length: Option<f64>,
    pub cutoff: Option<f64>,
    pub shape: Option<CutoffShape>,
    pub mass: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_ph: Option<f64>,
    pub z3: Option<f64>,
    pub q: Option<f64>,
    pub masses: Option<[f64; 3]>,
    pub density: Option<DensitySpec>,
    pub renorm_mode: Option<RenormMode>,
    pub output_dir: Option<PathBuf>,
    pub residual_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub degeneracy_tol: Option<f64>,
    pub potential_tol: Option<f64>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_points: Option<usize>,
    pub k_spacing: Option<GridSpacing>,
    pub x_points: Option<Vec<f64>>,
}

/// Fully resolved settings of one run, as embedded in every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub box_length: f64,
    pub cutoff: f64,
    pub shape: CutoffShape,
    pub mass: f64,
    pub alpha: Option<f64>,
    pub alpha_ph: Option<f64>,
    pub z3: Option<f64>,
    pub q: Option<f64>,
    pub masses: Option<[f64; 3]>,
    pub density: Option<DensitySpec>,
    pub renorm_mode: Option<RenormMode>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub degeneracy_tol: f64,
    pub potential_tol: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub k_spacing: GridSpacing,
    pub x_points: Vec<f64>,
}

#[derive(Debug, Parser)]
#[command(name = "vacpol", version, about = "Polarized Dirac vacuum, charge renormalization and Pauli-Villars multipliers")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Tabulate U, B_Lambda, U_Lambda and (with --masses) M on the k-grid.
    Multipliers,
    /// Self-consistent vacuum (or charge sector with --q) on the lattice.
    Scf,
    /// Renormalization point, density series and Uehling potential.
    Renorm,
    /// Pauli-Villars scheme, M table and F2 of the Coulomb field of the density.
    Pv,
    /// Lattice SCF density against the continuum linear response.
    Crosscheck,
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "out", global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    box_length: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    #[arg(long, global = true, value_parser = parse_shape)]
    shape: Option<CutoffShape>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha_ph: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    z3: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Pauli-Villars masses `m0,m1,m2`.
    #[arg(long, global = true, value_delimiter = ',')]
    masses: Option<Vec<f64>>,
    /// Gaussian density `charge,width`.
    #[arg(long, global = true, value_delimiter = ',', conflicts_with = "density_file")]
    gaussian: Option<Vec<f64>>,
    #[arg(long, global = true)]
    density_file: Option<PathBuf>,
    #[arg(long, global = true)]
    renorm_mode: Option<RenormMode>,
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    #[arg(long, global = true)]
    degeneracy_tol: Option<f64>,
    #[arg(long, global = true)]
    potential_tol: Option<f64>,
    #[arg(long, global = true)]
    k_min: Option<f64>,
    #[arg(long, global = true)]
    k_max: Option<f64>,
    #[arg(long, global = true)]
    k_points: Option<usize>,
    #[arg(long, global = true)]
    k_spacing: Option<GridSpacing>,
    #[arg(long, global = true, value_delimiter = ',')]
    x_points: Option<Vec<f64>>,
}

fn parse_shape(s: &str) -> std::result::Result<CutoffShape, String> {
    match s {
        "sharp" => Ok(CutoffShape::Sharp),
        "quadratic" => Ok(CutoffShape::Quadratic),
        _ => Err(format!("unknown cutoff shape {s:?}, expected sharp or quadratic")),
    }
}

impl Overrides {
    fn apply(self, file: ConfigFile) -> Result<ConfigFile> {
        if self.masses.as_ref().is_some_and(|m| m.len() != 3) {
            return Err(invalid("--masses takes three values m0,m1,m2"));
        }
        if self.gaussian.as_ref().is_some_and(|g| g.len() != 2) {
            return Err(invalid("--gaussian takes two values charge,width"));
        }
        Ok(ConfigFile {
            box_length: self.box_length.or(file.box_length),
            cutoff: self.cutoff.or(file.cutoff),
            shape: self.shape.or(file.shape),
            mass: self.mass.or(file.mass),
            alpha: self.alpha.or(file.alpha),
            alpha_ph: self.alpha_ph.or(file.alpha_ph),
            z3: self.z3.or(file.z3),
            q: self.q.or(file.q),
            masses: self.masses.map(|m| [m[0], m[1], m[2]]).or(file.masses),
            density: match (self.gaussian, self.density_file) {
                (Some(g), _) => Some(DensitySpec::Gaussian { charge: g[0], width: g[1] }),
                (None, Some(p)) => Some(DensitySpec::File(p)),
                (None, None) => file.density,
            },
            renorm_mode: self.renorm_mode.or(file.renorm_mode),
            output_dir: self.output_dir.or(file.output_dir),
            residual_tol: self.residual_tol.or(file.residual_tol),
            max_iterations: self.max_iterations.or(file.max_iterations),
            degeneracy_tol: self.degeneracy_tol.or(file.degeneracy_tol),
            potential_tol: self.potential_tol.or(file.potential_tol),
            k_min: self.k_min.or(file.k_min),
            k_max: self.k_max.or(file.k_max),
            k_points: self.k_points.or(file.k_points),
            k_spacing: self.k_spacing.or(file.k_spacing),
            x_points: self.x_points.or(file.x_points),
        })
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    /// Fills defaults and checks the fields the command needs.
    pub fn resolve(command: Command, file: ConfigFile) -> Result<Self> {
        let defaults = ScfOptions::default();
        let cfg = RunConfig {
            command,
            box_length: file.box_length.unwrap_or(2.0 * std::f64::consts::PI),
            cutoff: file.cutoff.unwrap_or(1.2),
            shape: file.shape.unwrap_or(CutoffShape::Sharp),
            mass: file.mass.unwrap_or(1.0),
            alpha: file.alpha,
            alpha_ph: file.alpha_ph,
            z3: file.z3,
            q: file.q,
            masses: file.masses,
            density: file.density,
            renorm_mode: file.renorm_mode,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            residual_tol: file.residual_tol.unwrap_or(defaults.residual_tol),
            max_iterations: file.max_iterations.unwrap_or(defaults.max_iterations),
            degeneracy_tol: file.degeneracy_tol.unwrap_or(defaults.degeneracy_tol),
            potential_tol: file.potential_tol.unwrap_or(1e-8),
            k_min: file.k_min.unwrap_or(1e-2),
            k_max: file.k_max.unwrap_or(1e2),
            k_points: file.k_points.unwrap_or(200),
            k_spacing: file.k_spacing.unwrap_or(GridSpacing::Log),
            x_points: file.x_points.unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0, 4.0]),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        positive("box_length", self.box_length)?;
        positive("cutoff", self.cutoff)?;
        positive("mass", self.mass)?;
        positive("residual_tol", self.residual_tol)?;
        positive("degeneracy_tol", self.degeneracy_tol)?;
        positive("potential_tol", self.potential_tol)?;
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if self.k_points < 2 {
            return Err(invalid(format!("k_points must be at least 2, got {}", self.k_points)));
        }
        let k_lo_ok = match self.k_spacing {
            GridSpacing::Log => self.k_min > 0.0,
            GridSpacing::Linear => self.k_min >= 0.0,
        };
        if !(k_lo_ok && self.k_max > self.k_min && self.k_max.is_finite()) {
            return Err(invalid(format!("k-grid [{}, {}] is not valid for {:?} spacing", self.k_min, self.k_max, self.k_spacing)));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(invalid(format!("alpha must be nonnegative, got {a}")));
            }
        }
        if let Some(DensitySpec::Gaussian { charge, width }) = &self.density {
            if !charge.is_finite() {
                return Err(invalid(format!("Gaussian charge must be finite, got {charge}")));
            }
            positive("Gaussian width", *width)?;
        }
        let require = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(invalid(format!("command {:?} needs {what}", self.command)))
            }
        };
        match self.command {
            Command::Multipliers => {}
            Command::Scf | Command::Crosscheck => {
                require(self.alpha.is_some(), "alpha")?;
                require(self.density.is_some(), "a density (gaussian or file)")?;
            }
            Command::Renorm => {
                require(self.density.is_some(), "a density (gaussian or file)")?;
                match self.renorm_mode()? {
                    RenormMode::FromBare => require(self.alpha.is_some(), "alpha")?,
                    RenormMode::FromPhysical => require(self.alpha_ph.is_some(), "alpha_ph")?,
                    RenormMode::FromZ3 => require(self.alpha_ph.is_some() && self.z3.is_some(), "alpha_ph and z3")?,
                }
            }
            Command::Pv => {
                require(self.masses.is_some(), "masses")?;
                require(self.density.is_some(), "a density (gaussian or file)")?;
            }
        }
        Ok(())
    }

    /// Explicit mode, or the one implied by which couplings are present.
    fn renorm_mode(&self) -> Result<RenormMode> {
        if let Some(m) = self.renorm_mode {
            return Ok(m);
        }
        match (self.alpha, self.alpha_ph, self.z3) {
            (Some(_), None, None) => Ok(RenormMode::FromBare),
            (None, Some(_), Some(_)) => Ok(RenormMode::FromZ3),
            (None, Some(_), None) => Ok(RenormMode::FromPhysical),
            _ => Err(invalid("renorm needs renorm_mode, or exactly one of alpha, alpha_ph, (alpha_ph, z3)")),
        }
    }

    fn k_grid(&self) -> Vec<f64> {
        match self.k_spacing {
            GridSpacing::Log => log_grid(self.k_min, self.k_max, self.k_points),
            GridSpacing::Linear => linear_grid(self.k_min, self.k_max, self.k_points),
        }
    }

    fn scf_options(&self) -> ScfOptions {
        ScfOptions {
            max_iterations: self.max_iterations,
            residual_tol: self.residual_tol,
            damping: Damping::OptimalDamping,
            degeneracy_tol: self.degeneracy_tol,
        }
    }

    fn header(&self) -> Result<String> {
        Ok(format!("config: {}", serde_json::to_string(self)?))
    }
}

/// External density as either a closed-form Gaussian or tabulated samples.
enum Density {
    Gaussian(GaussianCharge),
    Table(SampledFunction),
}

const TABLE_MATCH_TOL: f64 = 1e-9;

impl Density {
    fn load(spec: &DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Gaussian { charge, width } => Ok(Density::Gaussian(GaussianCharge::new(*charge, *width))),
            DensitySpec::File(path) => Ok(Density::Table(read_density_table(path)?)),
        }
    }

    /// Transform at `|k|`; tables must contain the wavenumber exactly.
    fn fourier(&self, k: f64) -> Result<f64> {
        match self {
            Density::Gaussian(g) => Ok(g.fourier(k)),
            Density::Table(t) => t
                .grid()
                .iter()
                .position(|g| (g - k).abs() <= TABLE_MATCH_TOL * k.max(1.0))
                .map(|i| t.values()[i])
                .ok_or_else(|| invalid(format!("density table has no sample at |k| = {k}"))),
        }
    }

    fn sampled(&self, grid: Vec<f64>) -> Result<SampledFunction> {
        match self {
            Density::Gaussian(g) => SampledFunction::from_fn(grid, |k| g.fourier(k)),
            Density::Table(t) => Ok(t.clone()),
        }
    }

    fn on_lattice(&self, lat: &Arc<FourierLattice>) -> Result<ChargeDensity> {
        let failure = RefCell::new(None);
        let rho = periodize(
            |k| {
                let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                match self.fourier(norm) {
                    Ok(v) => C64::new(v, 0.0),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        C64::new(0.0, 0.0)
                    }
                }
            },
            lat,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(rho),
        }
    }
}

/// Reads `k,value` rows; `#` lines, blank lines and a non-numeric first
/// row are skipped.
fn read_density_table(path: &Path) -> Result<SampledFunction> {
    let text = fs::read_to_string(path)?;
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [k, v] => k.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((k, v)) => {
                grid.push(k);
                values.push(v);
            }
            None if first => {}
            None => return Err(invalid(format!("{}:{}: expected `k,value`", path.display(), lineno + 1))),
        }
        first = false;
    }
    SampledFunction::new(grid, values)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, config: &RunConfig, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct WithConfig<'a, T> {
        config: &'a RunConfig,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, &WithConfig { config, body })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn lattice_and_system(cfg: &RunConfig) -> Result<(Arc<FourierLattice>, PeriodicSystem)> {
    let lat = build_lattice(cfg.box_length, cfg.cutoff, cfg.shape)?;
    let sys = PeriodicSystem::new(&lat, cfg.mass)?;
    Ok((lat, sys))
}

fn run_multipliers(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.k_grid();
    // the cutoff multipliers are only defined up to k = 2 Lambda
    let inside: Vec<f64> = grid.iter().copied().filter(|k| *k <= 2.0 * cfg.cutoff).collect();
    let mut tables = vec![MultiplierTable::tabulate(MultiplierKind::U, grid.clone(), None)?];
    if !inside.is_empty() {
        tables.push(MultiplierTable::tabulate(MultiplierKind::Bk, inside.clone(), Some(cfg.cutoff))?);
        tables.push(MultiplierTable::tabulate(MultiplierKind::ULambda, inside, Some(cfg.cutoff))?);
    }
    if let Some([m0, m1, m2]) = cfg.masses {
        tables.push(m_table(&pv_scheme(m0, m1, m2)?, grid)?);
    }
    let mut w = create(&cfg.output_dir, "multipliers.csv")?;
    write_header(&mut w, &cfg.header()?)?;
    for (i, t) in tables.iter().enumerate() {
        t.write_csv(&mut w, "", i == 0)?;
    }
    w.flush()?;
    Ok(())
}

fn run_scf(cfg: &RunConfig) -> Result<()> {
    let (lat, sys) = lattice_and_system(cfg)?;
    let nu = Density::load(cfg.density.as_ref().expect("validated"))?.on_lattice(&lat)?;
    let alpha = cfg.alpha.expect("validated");
    let opts = cfg.scf_options();
    let outcome = match cfg.q {
        Some(q) if q != 0.0 => scf_charge_sector(&sys, &nu, alpha, q, &opts),
        _ => scf_solve(&sys, &nu, alpha, &opts),
    };
    let (gamma, report) = match outcome {
        Ok(pair) => pair,
        Err(Error::NoConvergence { state, report }) => {
            // keep the best iterate on disk before reporting the failure
            write_json(&cfg.output_dir, "scf_report.json", cfg, &*report)?;
            write_density(cfg, &density_of(&state, &lat)?)?;
            return Err(Error::NoConvergence { state, report });
        }
        Err(e) => return Err(e),
    };
    write_json(&cfg.output_dir, "scf_report.json", cfg, &report)?;
    write_density(cfg, &density_of(&gamma, &lat)?)
}

fn write_density(cfg: &RunConfig, rho: &ChargeDensity) -> Result<()> {
    let mut w = create(&cfg.output_dir, "density.csv")?;
    rho.write_csv(&mut w, &cfg.header()?)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RenormRecord {
    #[serde(flatten)]
    point: RenormPoint,
    b0: f64,
    mode: RenormMode,
}

fn run_renorm(cfg: &RunConfig) -> Result<()> {
    let mode = cfg.renorm_mode()?;
    let point = match mode {
        RenormMode::FromBare => renorm_point_from_bare(cfg.alpha.expect("validated"), cfg.cutoff)?,
        RenormMode::FromPhysical => bare_from_physical(cfg.alpha_ph.expect("validated"), cfg.cutoff)?,
        RenormMode::FromZ3 => {
            let alpha_ph = cfg.alpha_ph.expect("validated");
            let cutoff = cutoff_from_z3(alpha_ph, cfg.z3.expect("validated"))?;
            bare_from_physical(alpha_ph, cutoff)?
        }
    };
    let b0 = b0(point.lambda)?;
    write_json(&cfg.output_dir, "renorm_point.json", cfg, &RenormRecord { point, b0, mode })?;

    let density = Density::load(cfg.density.as_ref().expect("validated"))?;
    let nu = density.sampled(cfg.k_grid())?;
    let terms = density_series(&nu, 2)?;
    let partial = series_partial_sum(&terms, point.alpha_ph)?;
    let physical = physical_density_linear(&nu, point.alpha_ph, point.lambda)?;
    let mut w = create(&cfg.output_dir, "density_series.csv")?;
    write_header(&mut w, &cfg.header()?)?;
    writeln!(w, "k,nu0,nu1,nu2,partial_sum,physical_linear")?;
    for i in 0..nu.len() {
        let row = [nu.grid()[i], terms[0].values()[i], terms[1].values()[i], terms[2].values()[i], partial.values()[i], physical.values()[i]];
        writeln!(w, "{}", row.map(fmt_num).join(","))?;
    }
    w.flush()?;

    match density {
        Density::Gaussian(g) => {
            let mut w = create(&cfg.output_dir, "uehling_potential.csv")?;
            write_header(&mut w, &cfg.header()?)?;
            writeln!(w, "x,real_space,fourier")?;
            for &x in &cfg.x_points {
                let direct = uehling_potential(&g, point.alpha_ph, x, cfg.potential_tol)?;
                let fourier = uehling_potential_fourier(&g, point.alpha_ph, x, cfg.potential_tol)?;
                writeln!(w, "{},{},{}", fmt_num(x), fmt_num(direct), fmt_num(fourier))?;
            }
            w.flush()?;
        }
        Density::Table(_) => eprintln!("note: Uehling potential samples need a closed-form density; skipped for tabulated input"),
    }
    Ok(())
}

#[derive(Serialize)]
struct PvRecord {
    #[serde(flatten)]
    scheme: PvScheme,
    log_lambda_sq: f64,
    sum_rule_residuals: (f64, f64),
    f2: F2Energy,
}

/// Coulomb field `E_hat(k) = -i k 4 pi nu_hat(k) / |k|^2` of the density on
/// the nonzero lattice wavevectors inside the cutoff ball, each carrying the
/// volume `(2 pi / L)^3` of its cell.
fn coulomb_field_sample(cfg: &RunConfig, density: &Density) -> Result<FieldSample> {
    let lat = build_lattice(cfg.box_length, cfg.cutoff, cfg.shape)?;
    let cell = lat.spacing().powi(3);
    let (mut ks, mut es) = (Vec::new(), Vec::new());
    for d in lat.diff_modes() {
        let norm = lat.norm(d);
        if *d == [0, 0, 0] || norm > cfg.cutoff * (1.0 + 1e-12) {
            continue;
        }
        let k = lat.wavevector(d);
        let v = 4.0 * std::f64::consts::PI * density.fourier(norm)? / (norm * norm);
        ks.push(k);
        es.push(k.map(|x| C64::new(0.0, -x * v)));
    }
    let n = ks.len();
    FieldSample::new(ks, es, vec![[C64::new(0.0, 0.0); 3]; n], vec![cell; n])
}

fn run_pv(cfg: &RunConfig) -> Result<()> {
    let [m0, m1, m2] = cfg.masses.expect("validated");
    let scheme = pv_scheme(m0, m1, m2)?;
    let density = Density::load(cfg.density.as_ref().expect("validated"))?;
    let f2 = f2_energy(&coulomb_field_sample(cfg, &density)?, &scheme)?;
    let record = PvRecord { scheme, log_lambda_sq: scheme.log_lambda_sq(), sum_rule_residuals: scheme.sum_rule_residuals(), f2 };
    write_json(&cfg.output_dir, "pv_scheme.json", cfg, &record)?;
    let mut w = create(&cfg.output_dir, "multipliers.csv")?;
    m_table(&scheme, cfg.k_grid())?.write_csv(&mut w, &cfg.header()?, true)?;
    w.flush()?;
    Ok(())
}

fn run_crosscheck(cfg: &RunConfig) -> Result<()> {
    let (lat, sys) = lattice_and_system(cfg)?;
    let nu = Density::load(cfg.density.as_ref().expect("validated"))?.on_lattice(&lat)?;
    let report = crosscheck(&sys, &nu, cfg.alpha.expect("validated"), &cfg.scf_options())?;
    write_json(&cfg.output_dir, "crosscheck.json", cfg, &report)
}

/// Runs one resolved command.
pub fn run(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    match cfg.command {
        Command::Multipliers => run_multipliers(cfg),
        Command::Scf => run_scf(cfg),
        Command::Renorm => run_renorm(cfg),
        Command::Pv => run_pv(cfg),
        Command::Crosscheck => run_crosscheck(cfg),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

fn resolve_from_cli(cli: Cli) -> Result<RunConfig> {
    let command = match cli.command {
        CliCommand::Multipliers => Command::Multipliers,
        CliCommand::Scf => Command::Scf,
        CliCommand::Renorm => Command::Renorm,
        CliCommand::Pv => Command::Pv,
        CliCommand::Crosscheck => Command::Crosscheck,
    };
    let file = match &cli.overrides.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => ConfigFile::default(),
    };
    RunConfig::resolve(command, cli.overrides.apply(file)?)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = resolve_from_cli(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
