//! Proof generation, aggregation and the two verification routes.

use super::digest::{Digest, DigestChain};
use super::group::{hash_to_group, pairing, KeyElement, ProofElement, KEY_ELEMENT_BYTES, PROOF_ELEMENT_BYTES};
use super::keys::{ProverKey, VerifierKey};
use super::ZkpError;

/// One company's one-time proof `omega = H(h)^sk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub omega: ProofElement,
    pub company_id: String,
    pub round: u64,
}

/// Product of `n` same-round proofs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AggregatedProof {
    omega: ProofElement,
    n: usize,
    round: u64,
}

/// Product of `n` verifier keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AggregatedVerifierKey {
    pk: KeyElement,
    n: usize,
}

/// Serialized size of an [`AggregatedProof`]: round (u64) | n (u32) | omega.
pub const AGGREGATED_PROOF_BYTES: usize = 8 + 4 + PROOF_ELEMENT_BYTES;
/// Serialized size of an [`AggregatedVerifierKey`]: n (u32) | pk.
pub const AGGREGATED_KEY_BYTES: usize = 4 + KEY_ELEMENT_BYTES;

impl AggregatedProof {
    pub fn omega(&self) -> &ProofElement {
        &self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn to_bytes(&self) -> [u8; AGGREGATED_PROOF_BYTES] {
        let mut out = [0u8; AGGREGATED_PROOF_BYTES];
        out[..8].copy_from_slice(&self.round.to_be_bytes());
        out[8..12].copy_from_slice(&(self.n as u32).to_be_bytes());
        out[12..].copy_from_slice(&self.omega.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ZkpError> {
        if bytes.len() != AGGREGATED_PROOF_BYTES {
            return Err(ZkpError::Decode("aggregated proof has wrong length"));
        }
        let round = u64::from_be_bytes(bytes[..8].try_into().unwrap());
        let n = u32::from_be_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if n == 0 {
            return Err(ZkpError::Decode("aggregated proof with zero constituents"));
        }
        let omega = ProofElement::from_bytes(bytes[12..].try_into().unwrap())?;
        Ok(AggregatedProof { omega, n, round })
    }
}

impl AggregatedVerifierKey {
    pub fn pk(&self) -> &KeyElement {
        &self.pk
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn to_bytes(&self) -> [u8; AGGREGATED_KEY_BYTES] {
        let mut out = [0u8; AGGREGATED_KEY_BYTES];
        out[..4].copy_from_slice(&(self.n as u32).to_be_bytes());
        out[4..].copy_from_slice(&self.pk.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ZkpError> {
        if bytes.len() != AGGREGATED_KEY_BYTES {
            return Err(ZkpError::Decode("aggregated key has wrong length"));
        }
        let n = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        if n == 0 {
            return Err(ZkpError::Decode("aggregated key with zero constituents"));
        }
        let pk = KeyElement::from_bytes(bytes[4..].try_into().unwrap())?;
        Ok(AggregatedVerifierKey { pk, n })
    }
}

/// `omega = hash_to_group(h)^sk`, tagged with the chain's round.
pub fn proof_gen(chain: &DigestChain, sk: &ProverKey) -> Proof {
    assert!(!sk.scalar().is_zero(), "zero prover keys are never issued");
    Proof {
        omega: hash_to_group(chain.current()).mul(sk.scalar()),
        company_id: sk.company_id().to_owned(),
        round: chain.round(),
    }
}

pub fn proof_aggregate(proofs: &[Proof]) -> Result<AggregatedProof, ZkpError> {
    let first = proofs.first().ok_or(ZkpError::EmptyAggregation)?;
    if let Some(stale) = proofs.iter().find(|p| p.round != first.round) {
        return Err(ZkpError::MixedRounds {
            expected: first.round,
            found: stale.round,
        });
    }
    Ok(AggregatedProof {
        omega: ProofElement::product(proofs.iter().map(|p| &p.omega)),
        n: proofs.len(),
        round: first.round,
    })
}

pub fn verifier_key_aggregate(keys: &[VerifierKey]) -> Result<AggregatedVerifierKey, ZkpError> {
    if keys.is_empty() {
        return Err(ZkpError::EmptyAggregation);
    }
    Ok(AggregatedVerifierKey {
        pk: KeyElement::product(keys.iter().map(|k| k.pk())),
        n: keys.len(),
    })
}

/// Checks `e(omega, g) == e(hash_to_group(h), pk)`. Always two pairings.
pub fn verify(agg: &AggregatedProof, expected_digest: &Digest, apk: &AggregatedVerifierKey) -> Result<bool, ZkpError> {
    if agg.n != apk.n {
        return Err(ZkpError::CountMismatch {
            proofs: agg.n,
            keys: apk.n,
        });
    }
    let lhs = pairing(&agg.omega, &KeyElement::generator());
    let rhs = pairing(&hash_to_group(expected_digest), &apk.pk);
    Ok(lhs == rhs)
}

/// [`verify`] against a chain head, additionally requiring the proof's
/// round to be the chain's round.
pub fn verify_at(agg: &AggregatedProof, chain: &DigestChain, apk: &AggregatedVerifierKey) -> Result<bool, ZkpError> {
    let ok = verify(agg, chain.current(), apk)?;
    Ok(ok && agg.round == chain.round())
}

/// The non-aggregated baseline: one pairing check per proof, `2n` pairings.
pub fn verify_sequential(proofs: &[Proof], expected_digest: &Digest, keys: &[VerifierKey]) -> Result<bool, ZkpError> {
    if proofs.len() != keys.len() || proofs.is_empty() {
        return Err(ZkpError::LengthMismatch {
            proofs: proofs.len(),
            keys: keys.len(),
        });
    }
    if let Some(index) = proofs
        .iter()
        .zip(keys)
        .position(|(p, k)| p.company_id != k.company_id())
    {
        return Err(ZkpError::CompanyMismatch { index });
    }
    let h = hash_to_group(expected_digest);
    let g = KeyElement::generator();
    // Every proof is checked so the pairing count does not depend on where a forgery sits.
    let mut all = true;
    for (proof, key) in proofs.iter().zip(keys) {
        all &= pairing(&proof.omega, &g) == pairing(&h, key.pk());
    }
    Ok(all)
}
