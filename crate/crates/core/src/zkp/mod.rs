//! Aggregated one-time proofs over a bilinear pairing.
//!
//! Each company holds a prover key `sk` for a truck and publishes `pk = g^sk`.
//! For the current digest `h` the truck produces one proof per company,
//! multiplies them into a single proof and the verifier checks it against the
//! product of the verifier keys with two pairings, independent of the number
//! of companies.

mod digest;
mod group;
mod keys;
mod proof;
pub mod vectors;

use thiserror::Error;

pub use digest::{advance_digest, derive_digest, Digest, DigestChain, TruckIdentity, DIGEST_BYTES, SALT_BYTES};
pub use group::{
    count_pairings, hash_to_group, pairing, pairing_count, reset_pairing_count, KeyElement, PairingOutput,
    ProofElement, Scalar, HASH_TO_GROUP_DST, KEY_ELEMENT_BYTES, PROOF_ELEMENT_BYTES, SCALAR_BYTES,
};
pub use keys::{key_gen, key_gen_with_rng, ProverKey, VerifierKey};
pub use proof::{
    proof_aggregate, proof_gen, verifier_key_aggregate, verify, verify_at, verify_sequential, AggregatedProof,
    AggregatedVerifierKey, Proof, AGGREGATED_KEY_BYTES, AGGREGATED_PROOF_BYTES,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZkpError {
    #[error("cannot aggregate an empty set")]
    EmptyAggregation,
    #[error("proof from round {found} mixed into round {expected}")]
    MixedRounds { expected: u64, found: u64 },
    #[error("aggregated proof has {proofs} constituents but the key has {keys}")]
    CountMismatch { proofs: usize, keys: usize },
    #[error("{proofs} proofs cannot be checked against {keys} keys")]
    LengthMismatch { proofs: usize, keys: usize },
    #[error("proof and key at index {index} belong to different companies")]
    CompanyMismatch { index: usize },
    #[error("prover key must be non-zero")]
    ZeroProverKey,
    #[error("verifier key must not be the identity")]
    IdentityVerifierKey,
    #[error("decode error: {0}")]
    Decode(&'static str),
}
