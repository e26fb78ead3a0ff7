use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::ledger::PolicySpec;

#[derive(Debug, Parser)]
#[command(
    name = "platoon",
    version,
    about = "Aggregated ZKP authentication, ledger and platoon-formation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Issue one key pair per company and the digest-chain head for a truck.
    Keygen(KeygenArgs),
    /// Register a wallet's truck (and any missing companies) on a ledger.
    Register(RegisterArgs),
    /// Prove, aggregate and submit one authentication round.
    Authenticate(AuthenticateArgs),
    /// Query platoon records as some participant.
    Retrieve(RetrieveArgs),
    /// Time aggregated vs sequential verification for n = 1..N.
    BenchVerify(BenchVerifyArgs),
    /// Sweep the endorsement queueing model over policies and send rates.
    BenchLedger(BenchLedgerArgs),
    /// Compute formation timelines over an n range.
    SimulateFormation(SimulateFormationArgs),
    /// Parse a rules file and optionally evaluate one request.
    RulesCheck(RulesCheckArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub truck: String,
    /// Number of companies in the network.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Identity secret, as text. Random when omitted.
    #[arg(long)]
    pub mac: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long)]
    pub wallet: PathBuf,
    /// Endorsement policy for a new ledger.
    #[arg(long, default_value = "2-of-3")]
    pub policy: PolicySpec,
    /// Rules file for a new ledger; the bundled policy otherwise.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Endorsement sampling seed for a new ledger.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AuthenticateArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long)]
    pub wallet: PathBuf,
    /// Resubmit the wallet's previous aggregated proof.
    #[arg(long)]
    pub replay_last_proof: bool,
    /// Platoon id written to the record on success.
    #[arg(long, default_value = "P1")]
    pub platoon: String,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("query").required(true).args(["truck", "owner", "platoon"]))]
pub struct RetrieveArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long)]
    pub requester: String,
    #[arg(long)]
    pub truck: Option<String>,
    #[arg(long)]
    pub owner: Option<String>,
    #[arg(long)]
    pub platoon: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchVerifyArgs {
    /// Largest number of companies.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchLedgerArgs {
    /// Policies to sweep; 1-of-3, 2-of-3 and 3-of-3 by default.
    #[arg(long, value_delimiter = ',')]
    pub policy: Vec<PolicySpec>,
    /// Send rates in tx/s.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0])]
    pub send_rate: Vec<f64>,
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateFormationArgs {
    /// Scenario file; the reference parameters when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Comma-separated strategies; all three by default, or the file's `strategy`.
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Company counts, `A..B` (inclusive) or a single value.
    #[arg(long, default_value = "2..10")]
    pub n: String,
    /// Integrator step in seconds.
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RulesCheckArgs {
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long, requires_all = ["operation", "resource"])]
    pub participant: Option<String>,
    #[arg(long)]
    pub operation: Option<String>,
    #[arg(long)]
    pub resource: Option<String>,
    /// Resource attribute `key=value`, repeatable.
    #[arg(long = "attr")]
    pub attrs: Vec<String>,
}
