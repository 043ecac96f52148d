use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "ruelle",
    version,
    about = "Transfer operators and Gibbs measures for product-type potentials"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct GlobalArgs {
    /// Tolerance override for truncations and certificates.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Append a JSON line describing the run to this file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub log: Option<PathBuf>,
    /// Potential specification file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub potential: Option<PathBuf>,
    /// Dyson exponent; builds `log gₙ(±1) = ±c·n^{-γ}` or overrides the file's value.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub gamma: Option<f64>,
    /// Dyson scale `c`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip)]
    pub scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    H,
    HMu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureArg {
    Eigen,
    Conformal,
    Equilibrium,
    Uniform,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Regularity classification.
    Classify {
        #[arg(long, default_value_t = 256)]
        depth_budget: usize,
    },
    /// Leading eigenvalue, equilibrium weights and conformal limit.
    Spectrum {
        #[arg(long, default_value_t = 64)]
        conformal_depth: usize,
    },
    /// Eigenfunction coefficients, pointwise evaluations and the three-series diagnostic.
    Eigen {
        #[arg(long, default_value_t = 20)]
        i_max: usize,
        /// Comma-separated symbol labels; repeat for several prefixes.
        #[arg(long = "prefix", allow_hyphen_values = true)]
        prefixes: Vec<String>,
        #[arg(long, value_enum, default_value_t = TargetArg::H)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = MeasureArg::Eigen)]
        reference: MeasureArg,
        #[arg(long, default_value_t = 1000)]
        j_max: usize,
    },
    /// Certified checks of the operator identities; exit 2 if any fails.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Prefixes used for the eigen-equation residual.
        #[arg(long, default_value_t = 100)]
        prefixes: usize,
        #[arg(long, default_value_t = 10_000)]
        mc_samples: usize,
    },
    /// Drift curves of the truncated log eigenfunction over seeded samples.
    Sample {
        #[arg(long, value_enum, default_value_t = MeasureArg::Eigen)]
        measure: MeasureArg,
        #[arg(long, value_enum, default_value_t = TargetArg::H)]
        target: TargetArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        max_depth: usize,
        /// Comma-separated depths; defaults to a 1-2-5 ladder up to the maximum depth.
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
    },
    /// Oscillation witness for the Dyson family.
    Probe {
        /// Comma-separated symbol labels fixing the cylinder.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        cylinder: String,
        #[arg(long, default_value_t = 5.0)]
        threshold: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        tail_depth: usize,
    },
    /// Regime report for one Dyson exponent or a scan over exponents.
    Regimes {
        /// `start:stop:step`, inclusive.
        #[arg(long)]
        scan: Option<String>,
    },
    /// Temperature scan of `log λ` for the potentials `g^t`.
    Scan {
        /// `start:stop:step`, inclusive.
        #[arg(long)]
        t: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Spectrum { .. } => "spectrum",
            Command::Eigen { .. } => "eigen",
            Command::Verify { .. } => "verify",
            Command::Sample { .. } => "sample",
            Command::Probe { .. } => "probe",
            Command::Regimes { .. } => "regimes",
            Command::Scan { .. } => "scan",
        }
    }
}
