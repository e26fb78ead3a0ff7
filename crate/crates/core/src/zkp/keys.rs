use std::fmt;

use rand::rngs::ChaCha20Rng;
use rand::{CryptoRng, SeedableRng};
use sha2::{Digest as _, Sha256};

use super::group::{KeyElement, Scalar, KEY_ELEMENT_BYTES};
use super::ZkpError;

/// A company's prover key `sk` for one truck.
#[derive(Clone, PartialEq, Eq)]
pub struct ProverKey {
    sk: Scalar,
    company_id: String,
    truck_id: String,
}

impl ProverKey {
    /// Wraps an explicit scalar. Zero is refused: it would make every proof the identity.
    pub fn from_scalar(
        sk: Scalar,
        company_id: impl Into<String>,
        truck_id: impl Into<String>,
    ) -> Result<Self, ZkpError> {
        if sk.is_zero() {
            return Err(ZkpError::ZeroProverKey);
        }
        Ok(ProverKey {
            sk,
            company_id: company_id.into(),
            truck_id: truck_id.into(),
        })
    }

    pub fn scalar(&self) -> &Scalar {
        &self.sk
    }

    pub fn company_id(&self) -> &str {
        &self.company_id
    }

    pub fn truck_id(&self) -> &str {
        &self.truck_id
    }

    /// The matching `pk = g^sk`.
    pub fn verifier_key(&self) -> VerifierKey {
        VerifierKey {
            pk: KeyElement::generator().mul(&self.sk),
            company_id: self.company_id.clone(),
            truck_id: self.truck_id.clone(),
        }
    }
}

impl fmt::Debug for ProverKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProverKey")
            .field("sk", &"<redacted>")
            .field("company_id", &self.company_id)
            .field("truck_id", &self.truck_id)
            .finish()
    }
}

/// A company's verifier key `pk = g^sk` for one truck.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierKey {
    pk: KeyElement,
    company_id: String,
    truck_id: String,
}

impl VerifierKey {
    pub fn new(pk: KeyElement, company_id: impl Into<String>, truck_id: impl Into<String>) -> Result<Self, ZkpError> {
        if pk.is_identity() {
            return Err(ZkpError::IdentityVerifierKey);
        }
        Ok(VerifierKey {
            pk,
            company_id: company_id.into(),
            truck_id: truck_id.into(),
        })
    }

    pub fn from_bytes(
        bytes: &[u8; KEY_ELEMENT_BYTES],
        company_id: impl Into<String>,
        truck_id: impl Into<String>,
    ) -> Result<Self, ZkpError> {
        VerifierKey::new(KeyElement::from_bytes(bytes)?, company_id, truck_id)
    }

    pub fn pk(&self) -> &KeyElement {
        &self.pk
    }

    pub fn company_id(&self) -> &str {
        &self.company_id
    }

    pub fn truck_id(&self) -> &str {
        &self.truck_id
    }
}

/// Issues a key pair for `(company_id, truck_id)`.
///
/// With a seed the pair is a pure function of `(seed, company_id, truck_id)`;
/// without one the thread RNG is used.
pub fn key_gen(rng_seed: Option<u64>, company_id: &str, truck_id: &str) -> (ProverKey, VerifierKey) {
    match rng_seed {
        Some(seed) => {
            let mut rng = ChaCha20Rng::from_seed(keygen_seed(seed, company_id, truck_id));
            key_gen_with_rng(&mut rng, company_id, truck_id)
        }
        None => key_gen_with_rng(&mut rand::rng(), company_id, truck_id),
    }
}

pub fn key_gen_with_rng<R: CryptoRng + ?Sized>(
    rng: &mut R,
    company_id: &str,
    truck_id: &str,
) -> (ProverKey, VerifierKey) {
    let sk = loop {
        let candidate = Scalar::random(rng);
        if !candidate.is_zero() {
            break candidate;
        }
    };
    let prover = ProverKey::from_scalar(sk, company_id, truck_id).expect("non-zero by construction");
    let verifier = prover.verifier_key();
    (prover, verifier)
}

fn keygen_seed(seed: u64, company_id: &str, truck_id: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"platoon-keygen");
    h.update(seed.to_be_bytes());
    h.update((company_id.len() as u64).to_be_bytes());
    h.update(company_id.as_bytes());
    h.update((truck_id.len() as u64).to_be_bytes());
    h.update(truck_id.as_bytes());
    h.finalize().into()
}
