//! Group plumbing over BLS12-381.
//!
//! Proofs and hashed digests live in G1 (the proof side), the public
//! generator and verifier keys live in G2 (the key side). Every pairing goes
//! through [`pairing`] so that the evaluation count can be observed.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul};

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{G1Affine, G1Projective, G2Affine, G2Projective, Gt};
use rand::Rng;

use super::digest::Digest;
use super::ZkpError;

pub const SCALAR_BYTES: usize = 32;
pub const PROOF_ELEMENT_BYTES: usize = 48;
pub const KEY_ELEMENT_BYTES: usize = 96;

/// Domain separation tag for lifting digests into G1.
pub const HASH_TO_GROUP_DST: &[u8] = b"PLATOON-AGGZKP-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";

/// An element of Z_p, p being the order of G1/G2/GT.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar(pub(crate) bls12_381::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(bls12_381::Scalar::zero())
    }

    pub fn one() -> Self {
        Scalar(bls12_381::Scalar::one())
    }

    pub fn from_u64(value: u64) -> Self {
        Scalar(bls12_381::Scalar::from(value))
    }

    /// Samples a scalar by reducing 512 random bits, which is statistically
    /// uniform over Z_p.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Scalar(bls12_381::Scalar::from_bytes_wide(&wide))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == bls12_381::Scalar::zero()
    }

    /// Fixed-width big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let mut bytes = self.0.to_bytes();
        bytes.reverse();
        bytes
    }

    /// Decodes a canonical big-endian scalar; values `>= p` are rejected.
    pub fn from_bytes(bytes: &[u8; SCALAR_BYTES]) -> Result<Self, ZkpError> {
        let mut le = *bytes;
        le.reverse();
        Option::<bls12_381::Scalar>::from(bls12_381::Scalar::from_bytes(&le))
            .map(Scalar)
            .ok_or(ZkpError::Decode("scalar is not canonical"))
    }

    pub fn inner(&self) -> &bls12_381::Scalar {
        &self.0
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(0x{})", hex::encode(self.to_bytes()))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

/// A point of the proof-side group G1.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ProofElement(pub(crate) G1Affine);

impl ProofElement {
    pub fn identity() -> Self {
        ProofElement(G1Affine::identity())
    }

    pub fn generator() -> Self {
        ProofElement(G1Affine::generator())
    }

    pub fn from_affine(point: G1Affine) -> Self {
        ProofElement(point)
    }

    pub fn as_affine(&self) -> &G1Affine {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn is_in_subgroup(&self) -> bool {
        bool::from(self.0.is_on_curve() & self.0.is_torsion_free())
    }

    pub fn mul(&self, scalar: &Scalar) -> Self {
        ProofElement(G1Affine::from(self.0 * scalar.0))
    }

    /// Group product of all elements (written additively by the curve library).
    pub fn product<'a, I: IntoIterator<Item = &'a ProofElement>>(elements: I) -> Self {
        let sum = elements.into_iter().fold(G1Projective::identity(), |acc, e| acc + e.0);
        ProofElement(G1Affine::from(sum))
    }

    /// Compressed point encoding.
    pub fn to_bytes(&self) -> [u8; PROOF_ELEMENT_BYTES] {
        self.0.to_compressed()
    }

    /// Decodes a compressed point; off-curve and out-of-subgroup encodings are rejected.
    pub fn from_bytes(bytes: &[u8; PROOF_ELEMENT_BYTES]) -> Result<Self, ZkpError> {
        Option::<G1Affine>::from(G1Affine::from_compressed(bytes))
            .map(ProofElement)
            .ok_or(ZkpError::Decode("invalid proof-side group element"))
    }
}

impl fmt::Debug for ProofElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProofElement(0x{})", hex::encode(self.to_bytes()))
    }
}

/// A point of the key-side group G2.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct KeyElement(pub(crate) G2Affine);

impl KeyElement {
    pub fn identity() -> Self {
        KeyElement(G2Affine::identity())
    }

    /// The fixed public generator `g`.
    pub fn generator() -> Self {
        KeyElement(G2Affine::generator())
    }

    pub fn from_affine(point: G2Affine) -> Self {
        KeyElement(point)
    }

    pub fn as_affine(&self) -> &G2Affine {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn is_in_subgroup(&self) -> bool {
        bool::from(self.0.is_on_curve() & self.0.is_torsion_free())
    }

    pub fn mul(&self, scalar: &Scalar) -> Self {
        KeyElement(G2Affine::from(self.0 * scalar.0))
    }

    pub fn product<'a, I: IntoIterator<Item = &'a KeyElement>>(elements: I) -> Self {
        let sum = elements.into_iter().fold(G2Projective::identity(), |acc, e| acc + e.0);
        KeyElement(G2Affine::from(sum))
    }

    pub fn to_bytes(&self) -> [u8; KEY_ELEMENT_BYTES] {
        self.0.to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; KEY_ELEMENT_BYTES]) -> Result<Self, ZkpError> {
        Option::<G2Affine>::from(G2Affine::from_compressed(bytes))
            .map(KeyElement)
            .ok_or(ZkpError::Decode("invalid key-side group element"))
    }
}

impl fmt::Debug for KeyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyElement(0x{})", hex::encode(self.to_bytes()))
    }
}

/// An element of the pairing target group GT.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PairingOutput(pub(crate) Gt);

impl PairingOutput {
    pub fn pow(&self, scalar: &Scalar) -> Self {
        PairingOutput(self.0 * scalar.0)
    }

    pub fn combine(&self, other: &PairingOutput) -> Self {
        PairingOutput(self.0 + other.0)
    }
}

thread_local! {
    static PAIRINGS: Cell<u64> = const { Cell::new(0) };
}

/// Evaluates `e(proof_side, key_side)` and bumps the calling thread's
/// pairing counter.
pub fn pairing(proof_side: &ProofElement, key_side: &KeyElement) -> PairingOutput {
    PAIRINGS.with(|c| c.set(c.get() + 1));
    PairingOutput(bls12_381::pairing(&proof_side.0, &key_side.0))
}

/// Number of pairings evaluated on this thread since the last reset.
pub fn pairing_count() -> u64 {
    PAIRINGS.with(|c| c.get())
}

pub fn reset_pairing_count() {
    PAIRINGS.with(|c| c.set(0));
}

/// Runs `f` and reports how many pairings it evaluated on this thread.
pub fn count_pairings<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = pairing_count();
    let out = f();
    (out, pairing_count() - before)
}

/// Lifts a digest into G1 with the SSWU random-oracle map (SHA-256 expander).
pub fn hash_to_group(digest: &Digest) -> ProofElement {
    let point = <G1Projective as HashToCurve<ExpandMsgXmd<sha2::Sha256>>>::hash_to_curve(
        [digest.as_bytes()],
        HASH_TO_GROUP_DST,
    );
    ProofElement(G1Affine::from(point))
}
