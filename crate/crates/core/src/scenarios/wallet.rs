use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::zkp::{key_gen, AggregatedProof, DigestChain, ProverKey, Scalar, VerifierKey, SCALAR_BYTES};

use super::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalletKey {
    pub company_id: String,
    pub sk: String,
    pub pk: String,
}

/// A truck's key material and current chain head. The identity secret `m`
/// is consumed at issuance and never written here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wallet {
    pub truck_id: String,
    pub owner: String,
    pub chain: DigestChain,
    pub keys: Vec<WalletKey>,
    #[serde(default)]
    pub last_proof: Option<String>,
}

/// `Company_A`, `Company_B`, ... then `Company_27`, `Company_28`, ...
pub fn company_name(index: usize) -> String {
    if index < 26 {
        format!("Company_{}", (b'A' + index as u8) as char)
    } else {
        format!("Company_{}", index + 1)
    }
}

impl Wallet {
    pub fn issue(truck_id: &str, n: usize, chain: DigestChain, seed: Option<u64>) -> Wallet {
        let keys = (0..n)
            .map(|i| {
                let company = company_name(i);
                let (sk, vk) = key_gen(seed, &company, truck_id);
                WalletKey {
                    company_id: company,
                    sk: hex::encode(sk.scalar().to_bytes()),
                    pk: hex::encode(vk.pk().to_bytes()),
                }
            })
            .collect();
        Wallet {
            truck_id: truck_id.to_owned(),
            owner: company_name(0),
            chain,
            keys,
            last_proof: None,
        }
    }

    pub fn prover_keys(&self) -> Result<Vec<ProverKey>, CliError> {
        self.keys
            .iter()
            .map(|k| {
                let bytes: [u8; SCALAR_BYTES] = hex::decode(&k.sk)
                    .ok()
                    .and_then(|b| b.try_into().ok())
                    .ok_or_else(|| CliError::Usage(format!("wallet: bad prover key for {}", k.company_id)))?;
                let sk = Scalar::from_bytes(&bytes).map_err(|e| CliError::Usage(format!("wallet: {e}")))?;
                ProverKey::from_scalar(sk, k.company_id.clone(), self.truck_id.clone())
                    .map_err(|e| CliError::Usage(format!("wallet: {e}")))
            })
            .collect()
    }

    pub fn verifier_keys(&self) -> Result<Vec<VerifierKey>, CliError> {
        self.keys
            .iter()
            .map(|k| {
                crate::ledger::verifier_key_from_hex(&k.pk, &k.company_id, &self.truck_id)
                    .map_err(|e| CliError::Usage(format!("wallet: {e}")))
            })
            .collect()
    }

    pub fn last_proof(&self) -> Result<Option<AggregatedProof>, CliError> {
        self.last_proof
            .as_deref()
            .map(|h| {
                let bytes = hex::decode(h).map_err(|e| CliError::Usage(format!("wallet: {e}")))?;
                AggregatedProof::from_bytes(&bytes).map_err(|e| CliError::Usage(format!("wallet: {e}")))
            })
            .transpose()
    }

    pub fn load(path: &Path) -> Result<Wallet, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("wallet serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
