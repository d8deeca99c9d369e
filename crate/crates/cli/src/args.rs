use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use siegel_core::catalog::TestFunction;
use siegel_core::orbits::OrbitSpec;

#[derive(Debug, Parser)]
#[command(name = "siegel", version, about = "Counting, Siegel transforms and cylinder spectra in the plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

/// Options shared by all subcommands. Apart from the seed they do not change
/// the computed values and are left out of the config hash.
#[derive(Debug, Args)]
pub struct Global {
    /// Output format of the main artifact.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the main artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Also write the plot table as CSV.
    #[arg(long, global = true)]
    pub plot_data: Option<PathBuf>,

    /// Seed for every randomized step. Recorded in the header and hashed.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Worker threads; defaults to all cores.
    #[arg(long, env = "SIEGEL_THREADS", global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Spherical integral F_N(λ) of a diagonal ellipsoid.
    Spherical(SphericalArgs),
    /// Two sides of the radial counting identity along a(t) = diag(e^t, e^-t).
    Identity(IdentityArgs),
    /// Orbit counts in a disc and the growth ratio N(R)/R².
    Count(CountArgs),
    /// Monte Carlo mean of the Siegel transform over random lattices.
    SiegelMc(SiegelArgs),
    /// Eisenstein series values, residue probe and Stieltjes check.
    Eisenstein(EisensteinArgs),
    /// Cylinders and holonomy spectra of a square-tiled surface.
    Origami(OrigamiArgs),
    /// Weyl-type equidistribution probes for an orbit measure.
    Equidist(EquidistArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spherical(_) => "spherical",
            Command::Identity(_) => "identity",
            Command::Count(_) => "count",
            Command::SiegelMc(_) => "siegel-mc",
            Command::Eisenstein(_) => "eisenstein",
            Command::Origami(_) => "origami",
            Command::Equidist(_) => "equidist",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SphericalArgs {
    /// Diagonal entries, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub lambda: Vec<f64>,

    /// Also run the Monte Carlo oracle with this many samples.
    #[arg(long)]
    pub oracle_samples: Option<usize>,

    /// Also evaluate the gradient identity residual at this c > 1.
    #[arg(long)]
    pub gradient_c: Option<f64>,

    #[arg(long, default_value_t = 64)]
    pub panels: usize,

    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentityArgs {
    /// Orbit measure: full, primitive or gamma0:M.
    #[arg(long, default_value = "full")]
    #[serde(serialize_with = "display")]
    pub orbit: OrbitSpec,

    /// Unimodular matrix a,b,c,d (row major).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub g: Vec<f64>,

    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,2.5,3,3.5,4")]
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    #[arg(long, default_value = "full")]
    #[serde(serialize_with = "display")]
    pub orbit: OrbitSpec,

    /// Largest radius.
    #[arg(long = "R")]
    pub r: f64,

    /// Number of equally spaced radii up to R.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub points: u32,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub g: Vec<f64>,

    /// Write the orbit points inside B(0, R) as a point set.
    #[arg(long)]
    #[serde(skip)]
    pub atoms_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SiegelArgs {
    /// Test function: ball:r, box:a, hat:r, gauss:σ:r or zero.
    #[arg(long, default_value = "ball:1")]
    #[serde(serialize_with = "display")]
    pub psi: TestFunction,

    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    /// Sum over primitive vectors only.
    #[arg(long)]
    pub primitive: bool,

    /// Also report E|N_L(R)/R² - π| on these radii.
    #[arg(long, value_delimiter = ',')]
    pub l1_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EisensteinMode {
    Value,
    Residue,
    Stieltjes,
}

#[derive(Debug, Args, Serialize)]
pub struct EisensteinArgs {
    #[arg(long, value_enum, default_value_t = EisensteinMode::Value)]
    pub mode: EisensteinMode,

    /// Point z = x + iy as x,y.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1")]
    pub z: Vec<f64>,

    /// Exponent s as re or re,im (value and stieltjes modes).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "2")]
    pub s: Vec<f64>,

    /// Truncation radius; defaults to 200, or 1500 for the residue probe.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Fail with exit 3 when the tail bound exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,

    #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
    pub eps: Vec<f64>,

    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrigamiMode {
    Cylinders,
    Spectrum,
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Torus,
    Staircase,
}

#[derive(Debug, Args, Serialize)]
pub struct OrigamiArgs {
    #[arg(long, value_enum, default_value_t = OrigamiMode::Cylinders)]
    pub mode: OrigamiMode,

    /// Origami text file with n, h and v lines.
    #[arg(long, conflicts_with = "preset")]
    pub file: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Primitive direction p,q for cylinder mode.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub direction: Vec<i64>,

    /// Area threshold s in [0, 1) for the spectrum.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,

    /// Spectrum radius.
    #[arg(long = "R", default_value_t = 10.0)]
    pub r: f64,

    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75")]
    pub s_grid: Vec<f64>,

    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    pub r_grid: Vec<f64>,

    /// Keep square side 1 instead of normalizing the area to 1.
    #[arg(long)]
    pub unnormalized: bool,

    /// Write the spectrum as a point set.
    #[arg(long)]
    #[serde(skip)]
    pub atoms_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EquidistArgs {
    #[arg(long, default_value = "primitive")]
    #[serde(serialize_with = "display")]
    pub orbit: OrbitSpec,

    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
    pub r_grid: Vec<f64>,

    /// Number of random probes (g, t).
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub probes: u32,

    /// Test function for the averaged sum R^-2 Σ ψ(x/R).
    #[arg(long, default_value = "hat:1")]
    #[serde(serialize_with = "display")]
    pub psi: TestFunction,

}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
