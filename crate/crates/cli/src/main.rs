use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Parser, Debug)]
#[command(name = "spinnet", version, about = "Transport through spin-bath dephased quantum networks")]
pub struct Cli {
    /// Directory for CSV and record output [default: out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key=value file supplying defaults for any long flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for scans and sweeps [default: all cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Unit of energies, couplings and α given on the command line [default: radps]
    #[arg(long, global = true, value_enum)]
    pub units: Option<Units>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Units {
    Radps,
    Cm,
}

impl std::str::FromStr for Units {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Units as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Maximum transfer across a dimer against both bath couplings
    Dimer(DimerArgs),
    /// Fully connected N-site network with baths on chosen sites
    Network(NetworkArgs),
    /// FMO spin-distribution experiments
    Fmo {
        #[command(subcommand)]
        command: FmoCommand,
    },
    /// Three-block network whose maximum stays below the 4/k² bound
    Appendix(AppendixArgs),
    /// Sector reduction against brute-force product-state sums
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct BathArgs {
    /// Bath splitting α [default: 150 rad/ps]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bath temperature in K, 0 for the ground state [default: 300]
    #[arg(long)]
    pub temp: Option<f64>,
    /// Length of the time window in ps [default: 1]
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Largest γ of the scan grid [default: 200 rad/ps]
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// γ grid step [default: 2 rad/ps]
    #[arg(long)]
    pub gamma_step: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DimerArgs {
    /// Coupling J [default: 10 rad/ps]
    #[arg(long)]
    pub j: Option<f64>,
    /// Site energies ε₁,ε₂ [default: 0,0]
    #[arg(long)]
    pub energies: Option<String>,
    /// Spins in the two baths [default: 10,10]
    #[arg(long)]
    pub nspins: Option<String>,
    #[command(flatten)]
    pub bath: BathArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    /// Number of sites [default: 10]
    #[arg(long)]
    pub n: Option<usize>,
    /// Homogeneous coupling J [default: 10 rad/ps]
    #[arg(long)]
    pub j: Option<f64>,
    /// Common bare site energy ε [default: 0]
    #[arg(long)]
    pub energy: Option<f64>,
    /// Bath placement: none, I, F, I,F or intermediate [default: I,F]
    #[arg(long)]
    pub baths: Option<String>,
    /// Spins per bath, comma separated [default: 10,10 for I,F; 2,8 for intermediate]
    #[arg(long)]
    pub nspins: Option<String>,
    /// Couplings γ per bath (or one shared value) when not scanning [default: 0]
    #[arg(long)]
    pub gamma: Option<String>,
    /// Initial site, 1-based [default: 1]
    #[arg(long)]
    pub initial: Option<usize>,
    /// Final site, 1-based [default: N]
    #[arg(long = "final")]
    pub final_site: Option<usize>,
    /// Scan γ over the grid instead of using --gamma
    #[arg(long)]
    pub scan_gamma: bool,
    #[command(flatten)]
    pub bath: BathArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Subcommand, Debug)]
pub enum FmoCommand {
    /// Every even spin distribution against a γ grid, resumable
    Sweep(FmoSweepArgs),
    /// Cumulative distribution of per-distribution maxima from a record file
    Cdf(FmoCdfArgs),
    /// Maximum transfer against α/k_BT for one distribution
    AlphaScan(FmoAlphaArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SitePair {
    /// Initial FMO site, 1-based [default: 1]
    #[arg(long)]
    pub from: Option<usize>,
    /// Final FMO site, 1-based [default: 3]
    #[arg(long)]
    pub to: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FmoSweepArgs {
    #[command(flatten)]
    pub sites: SitePair,
    /// Total number of bath spins [default: 10]
    #[arg(long)]
    pub total_spins: Option<u32>,
    /// Record file [default: <out>/fmo_records_<from>_<to>.jsonl]
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[command(flatten)]
    pub bath: BathArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct FmoCdfArgs {
    /// Record file written by `fmo sweep`
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Window used for the bare-network reference, ps [default: 1]
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FmoAlphaArgs {
    #[command(flatten)]
    pub sites: SitePair,
    /// Spins per site n1..n7 [default: 2,0,0,8,0,0,0]
    #[arg(long)]
    pub distribution: Option<String>,
    /// Coupling γ [default: 32.0222 rad/ps, i.e. 170 cm⁻¹]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Largest α/k_BT [default: 10]
    #[arg(long)]
    pub ratio_max: Option<f64>,
    /// α/k_BT step [default: 0.1]
    #[arg(long)]
    pub ratio_step: Option<f64>,
    /// Bath temperature in K [default: 300]
    #[arg(long)]
    pub temp: Option<f64>,
    /// Length of the time window in ps [default: 1]
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AppendixArgs {
    /// Samples over one period [default: 20001]
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Seed for the random configurations [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random configurations [default: 50]
    #[arg(long)]
    pub cases: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
