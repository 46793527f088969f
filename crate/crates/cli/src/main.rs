//! `sfvem`: mesh generation, local stability audits, single solves and
//! convergence studies for the stabilization-free virtual element method.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "sfvem", version, about = "Stabilization-free virtual elements: experiments and diagnostics")]
pub struct Cli {
    /// File of `key = value` lines using long flag names as keys; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated unit-square mesh in the text mesh format.
    GenerateMesh {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular-value audit of local diffusion matrices.
    CheckPolygon {
        /// Polygon file with one `x y` pair per line; defaults to the built-in catalog.
        #[arg(long)]
        polygon: Option<PathBuf>,
        /// Shift of the degree rule (negative values probe instability).
        #[arg(long, allow_hyphen_values = true)]
        ell_offset: Option<i32>,
        /// Audit CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble and solve once, writing nodal values as CSV.
    Solve {
        /// Mesh file; when omitted a mesh is generated.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[command(flatten)]
        mesh_gen: MeshArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        disc: DiscArgs,
        /// Solution CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error norms and fitted rates over a sequence of generated meshes.
    Convergence(StudyArgs),
    /// Same as `convergence` with both methods.
    Compare(StudyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MeshArgs {
    #[arg(long, value_enum)]
    pub generator: Option<Generator>,
    /// Grid cells per side; for Voronoi meshes the seed count defaults to n^2.
    #[arg(long)]
    pub n: Option<usize>,
    /// Voronoi seed count.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Grid distortion fraction in [0, 0.5).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Voronoi vertex distortion fraction in [0, 1).
    #[arg(long)]
    pub distortion: Option<f64>,
    /// Lloyd relaxation sweeps for Voronoi meshes.
    #[arg(long)]
    pub lloyd: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    /// Rotation angle of the anisotropic tensor, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct DiscArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Shift of the degree rule.
    #[arg(long, allow_hyphen_values = true)]
    pub ell_offset: Option<i32>,
    /// Fixed polygon quadrature degree (default: exact for the data).
    #[arg(long)]
    pub quad_degree: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct StudyArgs {
    /// Comma-separated refinement levels (grid cells per side).
    #[arg(long)]
    pub levels: Option<String>,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub disc: DiscArgs,
    /// Output directory for `convergence.csv` and `convergence.svg`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Grid,
    Voronoi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Anisotropic advection-diffusion-reaction benchmark, u = beta1.
    Benchmark,
    /// u = x(1-x)y(1-y), K = I.
    Bubble,
    /// -lap u = 1, no exact solution.
    Poisson,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Sfvem,
    Vem,
    Both,
}

macro_rules! from_str_via_value_enum {
    ($($t:ty),*) => {$(
        impl std::str::FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}
from_str_via_value_enum!(Generator, Problem, MethodChoice);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
