//! Command-line arguments. Every command is also serializable so a run can
//! write its effective configuration and be replayed from it.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rheoflow::icnn::Activation;

#[derive(Debug, Parser)]
#[command(
    name = "rheoflow",
    version,
    about = "Convex network viscosity fits, well-posedness checks and Stokes solves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fit a convex or concave network to a viscosity CSV.
    Fit(FitArgs),
    /// Search constants that certify a viscosity law.
    Verify(VerifyArgs),
    /// Solve the manufactured Stokes problem on one mesh.
    Solve(SolveArgs),
    /// Run a mesh-refinement or fitting study.
    #[command(subcommand)]
    Study(StudyCommand),
    /// Replay a run from the configuration file it wrote.
    #[serde(skip)]
    Rerun {
        /// Configuration file written by an earlier run.
        config: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyCommand {
    /// Error rates against the exact solution for an analytic law.
    Convergence(ConvergenceArgs),
    /// Errors of network-viscosity solves against the exact Carreau solution.
    Plateau(PlateauArgs),
    /// Sensitivity of the solution to a perturbation of k0.
    Perturb(PerturbArgs),
    /// Network fits of the Carreau family.
    FitFamily(FitFamilyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationArg {
    Softplus,
    Relu,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Softplus => Activation::Softplus,
            ActivationArg::Relu => Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Layer widths, input first.
    #[arg(long, value_delimiter = ',', default_value = "1,120,56,1")]
    pub arch: Vec<usize>,
    #[arg(long, default_value_t = 20_000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value = "softplus")]
    pub activation: ActivationArg,
    /// Seed; RHEOFLOW_SEED takes precedence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// CSV with columns shear_rate, viscosity.
    pub dataset: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Network model file.
    #[arg(conflicts_with_all = ["carreau", "power"], required_unless_present_any = ["carreau", "power"])]
    pub model: Option<PathBuf>,
    /// Carreau law `k0,k_inf,lambda,n`.
    #[arg(long, value_delimiter = ',', conflicts_with = "power")]
    pub carreau: Option<Vec<f64>>,
    /// Power law `k0,n`.
    #[arg(long, value_delimiter = ',')]
    pub power: Option<Vec<f64>>,
    /// Upper end of the certified shear-rate range.
    #[arg(long, default_value_t = 70.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub generations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Certificate file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Viscosity: a network model file, `carreau:k0,k_inf,lambda,n` or
    /// `power:k0,n`.
    #[arg(long)]
    pub viscosity: String,
    /// Law whose exact solution defines the load; defaults to the viscosity
    /// when that is analytic.
    #[arg(long)]
    pub forcing: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub mesh: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Error exponent; defaults to the power index of the forcing law.
    #[arg(long)]
    pub r: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergenceArgs {
    /// Velocity degrees.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub degree: Vec<usize>,
    /// Exponent r; the Carreau power index is n = r.
    #[arg(long, default_value_t = 1.6)]
    pub r: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub meshes: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PlateauArgs {
    /// Exponent r; the Carreau power index is n = r.
    #[arg(long, default_value_t = 1.2)]
    pub r: f64,
    /// Network model; trained on the Carreau law when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,96")]
    pub meshes: Vec<usize>,
    /// Also report rates toward the solution on this mesh, which must be
    /// one of `meshes` and a multiple of the others below it.
    #[arg(long)]
    pub reference_mesh: Option<usize>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PerturbArgs {
    #[arg(long, default_value_t = 1.6)]
    pub n: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    #[arg(long, default_value_t = 32)]
    pub mesh: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitFamilyArgs {
    #[arg(long, value_delimiter = ',', default_value = "1.2,1.6,2,2.4,2.8")]
    pub n: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out: PathBuf,
}
