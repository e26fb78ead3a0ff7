//! Command-line workflows: issue keys, register, authenticate, retrieve, and
//! the verification, ledger and formation sweeps.
//!
//! Exit codes: 0 success, 1 verification or authorization failure, 2 usage
//! or input error.

pub mod cli;
mod commands;
mod wallet;

use std::io::Write;

use thiserror::Error;

pub use cli::{Cli, Command};
pub use commands::{
    bench_verify_rows, cmd_authenticate, cmd_bench_ledger, cmd_bench_verify, cmd_keygen, cmd_register, cmd_retrieve,
    cmd_rules_check, cmd_simulate_formation, formation_rows, FormationRow, VerifyBenchRow, DISAGREEMENT_TOLERANCE,
    VERIFY_CSV_HEADER,
};
pub use wallet::{company_name, Wallet, WalletKey};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    /// Verification failed or access was denied.
    #[error("{0}")]
    Failure(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

/// Runs one parsed command and returns its exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Keygen(a) => cmd_keygen(a, out),
        Command::Register(a) => cmd_register(a, out),
        Command::Authenticate(a) => cmd_authenticate(a, out),
        Command::Retrieve(a) => cmd_retrieve(a, out),
        Command::BenchVerify(a) => cmd_bench_verify(a, out),
        Command::BenchLedger(a) => cmd_bench_ledger(a, out),
        Command::SimulateFormation(a) => cmd_simulate_formation(a, out, err),
        Command::RulesCheck(a) => cmd_rules_check(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
