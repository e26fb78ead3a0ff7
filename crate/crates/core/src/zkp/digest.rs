//! Truck identities and the one-time digest chain.
//!
//! `h_0 = SHA-256(m || salt)` and `h_{k+1} = SHA-256(h_k)`. The secret `m`
//! is consumed only by [`derive_digest`]; nothing in this crate encodes it.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::ZkpError;

pub const DIGEST_BYTES: usize = 32;
pub const SALT_BYTES: usize = 16;

/// A fixed-width SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Digest([u8; DIGEST_BYTES]);

impl Digest {
    pub const ZERO: Digest = Digest([0u8; DIGEST_BYTES]);

    pub fn of(bytes: &[u8]) -> Self {
        Digest(Sha256::digest(bytes).into())
    }

    pub fn from_bytes(bytes: [u8; DIGEST_BYTES]) -> Self {
        Digest(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, ZkpError> {
        <[u8; DIGEST_BYTES]>::try_from(bytes)
            .map(Digest)
            .map_err(|_| ZkpError::Decode("digest must be 32 bytes"))
    }

    pub fn as_bytes(&self) -> &[u8; DIGEST_BYTES] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, ZkpError> {
        let raw = hex::decode(s).map_err(|_| ZkpError::Decode("digest is not hex"))?;
        Digest::from_slice(&raw)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<Digest> for String {
    fn from(d: Digest) -> String {
        d.to_hex()
    }
}

impl TryFrom<String> for Digest {
    type Error = ZkpError;
    fn try_from(s: String) -> Result<Self, ZkpError> {
        Digest::from_hex(&s)
    }
}

/// The truck's secret identifying message together with its registration salt.
///
/// Deliberately neither `Serialize` nor `Clone`; `Debug` redacts `m`.
pub struct TruckIdentity {
    m: Vec<u8>,
    salt: [u8; SALT_BYTES],
}

impl TruckIdentity {
    pub fn new(m: impl Into<Vec<u8>>, salt: [u8; SALT_BYTES]) -> Self {
        TruckIdentity { m: m.into(), salt }
    }

    /// Registers `m` under a freshly drawn salt.
    pub fn register<R: Rng + ?Sized>(m: impl Into<Vec<u8>>, rng: &mut R) -> Self {
        let mut salt = [0u8; SALT_BYTES];
        rng.fill_bytes(&mut salt);
        TruckIdentity::new(m, salt)
    }

    pub fn salt(&self) -> &[u8; SALT_BYTES] {
        &self.salt
    }
}

impl fmt::Debug for TruckIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruckIdentity")
            .field("m", &"<redacted>")
            .field("salt", &hex::encode(self.salt))
            .finish()
    }
}

/// The evolving one-time digest and the round it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigestChain {
    current: Digest,
    round: u64,
}

impl DigestChain {
    /// Rebuilds a chain head from stored state (e.g. a ledger registry).
    pub fn at(current: Digest, round: u64) -> Self {
        DigestChain { current, round }
    }

    pub fn current(&self) -> &Digest {
        &self.current
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// `current' = H(current)`, `round' = round + 1`.
    #[must_use]
    pub fn advance(&self) -> DigestChain {
        DigestChain {
            current: Digest::of(self.current.as_bytes()),
            round: self.round + 1,
        }
    }
}

/// Round-0 chain head `H(m || salt)`.
pub fn derive_digest(identity: &TruckIdentity) -> DigestChain {
    let mut hasher = Sha256::new();
    hasher.update(&identity.m);
    hasher.update(identity.salt);
    DigestChain {
        current: Digest(hasher.finalize().into()),
        round: 0,
    }
}

pub fn advance_digest(chain: &DigestChain) -> DigestChain {
    chain.advance()
}
