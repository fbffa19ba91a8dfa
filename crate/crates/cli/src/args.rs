use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "radon-hgf", version, about = "Radon hypergeometric functions: evaluation, normal forms and checks")]
pub struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Print θ_1..θ_{p-1} as noncommutative polynomials.
    Theta(ThetaArgs),
    /// Evaluate the character χ_λ(h; α).
    Chi(ChiArgs),
    /// Test membership of z in Z_λ.
    Zcheck(ZcheckArgs),
    /// Reduce z to its table normal form.
    NormalForm(NormalFormArgs),
    /// Integrate a named Hermitian-matrix family.
    Eval(EvalArgs),
    /// Evaluate F_λ(z, α).
    Radon(RadonArgs),
    /// Γ_r(a) by quadrature against the closed form.
    VerifyGamma(VerifyGammaArgs),
    /// B_r(a, b) by quadrature against the closed form.
    VerifyBeta(VerifyBetaArgs),
    /// (1,1,1,1) at r = 1 against ₂F₁.
    VerifyClassical(VerifyClassicalArgs),
    /// Covariance of F under H_λ and GL_2 at r = 1.
    VerifyCovariance(VerifyCovarianceArgs),
    /// D_{I,J} F = 0 for every (I, J).
    VerifyPde(VerifyPdeArgs),
    /// Run the acceptance criteria.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct ThetaArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub latex: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct WeightArgs {
    /// Comma-separated flat weights α_1..α_n (real).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "alpha_json")]
    pub alpha: Option<Vec<f64>>,
    /// JSON array of weights, each a number or [re, im].
    #[arg(long)]
    pub alpha_json: Option<PathBuf>,
    /// The weights given are α_2..α_n; α_1 is fixed by Σ α_0 = -m.
    #[arg(long)]
    pub fix_leading: bool,
    /// strict or relaxed weight validation.
    #[arg(long, default_value = "strict")]
    pub validation: String,
    /// Row count m of z (default 2r).
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChiArgs {
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[command(flatten)]
    pub weight: WeightArgs,
    /// JSON {"blocks": [[matrix, ...], ...]}: per block, the coefficients h_0..h_{p-1}.
    #[arg(long)]
    pub element_json: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ZcheckArgs {
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[arg(long)]
    pub z_json: PathBuf,
    /// Rank r (default: rows of z / 2).
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct NormalFormArgs {
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[arg(long)]
    pub z_json: PathBuf,
    #[arg(long)]
    pub r: Option<usize>,
    /// Table column x_1, x_2 or x_3 for |λ| = 4.
    #[arg(long, default_value_t = 1)]
    pub variant: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    /// beta_r, gamma_r, gaussian_r, gauss, kummer, bessel, hermite_weber, airy or lauricella_fd.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// One value, or a comma-separated list for lauricella_fd.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// A matrix, or an array of matrices for lauricella_fd.
    #[arg(long = "X-json")]
    pub x_json: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// interval, half-line, line or rays:<angle>.
    #[arg(long)]
    pub chain: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct BudgetArgs {
    /// adaptive-1d, gauss-1d, eigen-tensor or haar-mc.
    #[arg(long)]
    pub method: Option<String>,
    /// Monte Carlo samples (accepts 1e6).
    #[arg(long)]
    pub samples: Option<f64>,
    /// Gauss nodes per eigenvalue.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct RadonArgs {
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long)]
    pub z_json: PathBuf,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub variant: usize,
    /// Fixed composite rule "panels,nodes" instead of adaptive quadrature (r = 1).
    #[arg(long)]
    pub fixed_rule: Option<String>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyGammaArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyBetaArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyClassicalArgs {
    #[arg(long, default_value_t = 0.63, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.27, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 2.41, allow_negative_numbers = true)]
    pub c: f64,
    /// Comma-separated points (default: ten points in [-0.5, 0.5]).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyCovarianceArgs {
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long)]
    pub z_json: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub gl_trials: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyPdeArgs {
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<usize>,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long)]
    pub z_json: PathBuf,
    /// Base step; each entry uses h·(1 + |z_ij|).
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub no_richardson: bool,
    #[arg(long, default_value = "8,48")]
    pub fixed_rule: String,
}

#[derive(Args, Debug, Serialize)]
pub struct SuiteArgs {
    /// quick or desk.
    #[arg(long, default_value = "desk")]
    pub level: String,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<usize>>,
}
