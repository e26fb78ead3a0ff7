//! Permissioned ledger simulator.
//!
//! Blocks are hash-chained and committed under k-of-n endorsement with
//! simulated latency. The ledger keeps the verifier-key and digest-chain
//! registries, stores platoon records behind the access-control rules, and
//! logs every retrieval attempt.

mod bench;
mod block;
mod clock;
mod policy;
mod records;
mod snapshot;
mod store;

use thiserror::Error;

use crate::acl::{AclError, Operation};
use crate::zkp::ZkpError;

pub use bench::{run_bench, run_bench_with, BenchConfig, BenchReport, BENCH_CSV_HEADER, BENCH_ENDORSER_LATENCY};
pub use block::{block_hash, tx_id, Block, Endorsement, Transaction, TxKind};
pub use clock::VirtualClock;
pub use policy::{EndorsementPolicy, EndorserLatency, PolicySpec};
pub use records::{AccessLogEntry, PlatoonRecord, RecordQuery};
pub use snapshot::SNAPSHOT_MAGIC;
pub use store::{
    verifier_key_from_hex, AuthOutcome, Ledger, LedgerConfig, Receipt, StoredRecord, TruckEntry, AUTHORITY, VERIFIER,
};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("company {0} is not registered")]
    UnknownCompany(String),
    #[error("company {0} is already registered")]
    DuplicateCompany(String),
    #[error("truck {0} is not registered")]
    UnknownTruck(String),
    #[error("truck {0} is already registered")]
    DuplicateTruck(String),
    #[error("expected one verifier key per company ({expected}), got {found}")]
    KeyCount { expected: usize, found: usize },
    #[error("verifier key rejected: {0}")]
    KeyMismatch(String),
    #[error("invalid platoon record: {0}")]
    InvalidRecord(String),
    #[error("{participant} may not {operation} {resource}")]
    Denied {
        participant: String,
        resource: String,
        operation: Operation,
    },
    #[error("invalid endorsement policy: {0}")]
    InvalidPolicy(String),
    #[error("corrupt ledger data: {0}")]
    Corrupt(&'static str),
    #[error("undecodable payload: {0}")]
    Payload(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Rules(#[from] AclError),
    #[error(transparent)]
    Zkp(#[from] ZkpError),
}
