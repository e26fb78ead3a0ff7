//! Line-oriented golden test vectors.
//!
//! One record per line, comma separated:
//!
//! ```text
//! round,sk_hex;sk_hex;...,pk_hex;pk_hex;...,digest_hex,omega_hex,apk_hex,expect_bool
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Scalars are 32-byte
//! big-endian, points use compressed encodings.

use rand::rngs::ChaCha20Rng;
use rand::{Rng, RngExt, SeedableRng};

use super::digest::{derive_digest, Digest, DigestChain, TruckIdentity};
use super::group::{KeyElement, ProofElement, Scalar, KEY_ELEMENT_BYTES, PROOF_ELEMENT_BYTES};
use super::keys::{key_gen_with_rng, VerifierKey};
use super::proof::{proof_aggregate, proof_gen, verifier_key_aggregate, verify};
use super::ZkpError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVector {
    pub round: u64,
    pub sks: Vec<Scalar>,
    pub pks: Vec<KeyElement>,
    pub digest: Digest,
    pub omega: ProofElement,
    pub apk: KeyElement,
    pub expect: bool,
}

impl TestVector {
    pub fn to_line(&self) -> String {
        let sks: Vec<_> = self.sks.iter().map(|s| hex::encode(s.to_bytes())).collect();
        let pks: Vec<_> = self.pks.iter().map(|p| hex::encode(p.to_bytes())).collect();
        format!(
            "{},{},{},{},{},{},{}",
            self.round,
            sks.join(";"),
            pks.join(";"),
            self.digest.to_hex(),
            hex::encode(self.omega.to_bytes()),
            hex::encode(self.apk.to_bytes()),
            self.expect
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, ZkpError> {
        let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        let [round, sks, pks, digest, omega, apk, expect] = fields[..] else {
            return Err(ZkpError::Decode("test vector needs 7 fields"));
        };
        let round = round.parse().map_err(|_| ZkpError::Decode("round is not an integer"))?;
        let sks = sks
            .split(';')
            .map(|s| Scalar::from_bytes(&fixed_hex::<32>(s)?))
            .collect::<Result<Vec<_>, _>>()?;
        let pks = pks
            .split(';')
            .map(|s| KeyElement::from_bytes(&fixed_hex::<KEY_ELEMENT_BYTES>(s)?))
            .collect::<Result<Vec<_>, _>>()?;
        let expect = match expect {
            "true" => true,
            "false" => false,
            _ => return Err(ZkpError::Decode("expect must be true or false")),
        };
        Ok(TestVector {
            round,
            sks,
            pks,
            digest: Digest::from_hex(digest)?,
            omega: ProofElement::from_bytes(&fixed_hex::<PROOF_ELEMENT_BYTES>(omega)?)?,
            apk: KeyElement::from_bytes(&fixed_hex::<KEY_ELEMENT_BYTES>(apk)?)?,
            expect,
        })
    }
}

fn fixed_hex<const N: usize>(s: &str) -> Result<[u8; N], ZkpError> {
    let raw = hex::decode(s).map_err(|_| ZkpError::Decode("field is not hex"))?;
    raw.try_into()
        .map_err(|_| ZkpError::Decode("hex field has wrong width"))
}

pub fn parse_file(text: &str) -> Result<Vec<TestVector>, ZkpError> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(TestVector::parse_line)
        .collect()
}

/// Generates `count` vectors from `seed`. Every third vector is checked
/// against the next round's digest and is expected to fail.
pub fn generate(seed: u64, count: usize) -> Vec<TestVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(1..=5usize);
            let mut mac = [0u8; 6];
            rng.fill_bytes(&mut mac);
            let identity = TruckIdentity::register(mac.to_vec(), &mut rng);
            let mut chain: DigestChain = derive_digest(&identity);
            for _ in 0..rng.random_range(0..3u32) {
                chain = chain.advance();
            }
            let pairs: Vec<_> = (0..n)
                .map(|c| key_gen_with_rng(&mut rng, &format!("Company_{}", c + 1), "T"))
                .collect();
            let proofs: Vec<_> = pairs.iter().map(|(sk, _)| proof_gen(&chain, sk)).collect();
            let keys: Vec<VerifierKey> = pairs.iter().map(|(_, pk)| pk.clone()).collect();
            let agg = proof_aggregate(&proofs).expect("non-empty");
            let apk = verifier_key_aggregate(&keys).expect("non-empty");
            let digest = if i % 3 == 2 {
                *chain.advance().current()
            } else {
                *chain.current()
            };
            let expect = verify(&agg, &digest, &apk).expect("counts match");
            TestVector {
                round: chain.round(),
                sks: pairs.iter().map(|(sk, _)| *sk.scalar()).collect(),
                pks: keys.iter().map(|k| *k.pk()).collect(),
                digest,
                omega: *agg.omega(),
                apk: *apk.pk(),
                expect,
            }
        })
        .collect()
}
