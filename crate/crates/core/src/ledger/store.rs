use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::ChaCha20Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::acl::{self, AccessControlRule, AccessRequest, Action, Operation};
use crate::zkp::{
    verifier_key_aggregate, verify_at, AggregatedProof, Digest, DigestChain, KeyElement, VerifierKey, ZkpError,
    KEY_ELEMENT_BYTES,
};

use super::block::{Block, Endorsement, Transaction, TxKind};
use super::clock::VirtualClock;
use super::policy::{EndorsementPolicy, EndorserLatency};
use super::records::{AccessLogEntry, PlatoonRecord, RecordQuery};
use super::LedgerError;

/// Participant id of the verification pipeline.
pub const VERIFIER: &str = "Verifier";
/// Participant id of the certificate authority that registers trucks.
pub const AUTHORITY: &str = "CA";

const GENESIS_SUBMITTER: &str = "genesis";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerConfig {
    pub policy: EndorsementPolicy,
    /// Rule language text; parsed whenever the ledger is built or loaded.
    pub rules: String,
    pub seed: u64,
    pub epoch_ms: u64,
    /// Modeled cost of one aggregated verification, added to auth latency.
    pub verify_cost_ms: f64,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            policy: EndorsementPolicy::any(2, 3, EndorserLatency::Fixed { ms: 1100.0 }).expect("valid default policy"),
            rules: acl::DEFAULT_POLICY.to_owned(),
            seed: 0,
            epoch_ms: 1_600_000_000_000,
            verify_cost_ms: 512.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruckEntry {
    pub company_id: String,
    pub chain: DigestChain,
    pub keys: Vec<VerifierKey>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoredRecord {
    pub resource_id: String,
    pub record: PlatoonRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Receipt {
    pub height: u64,
    pub tx_ids: Vec<Digest>,
    pub timestamp: u64,
    pub latency_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuthOutcome {
    pub verified: bool,
    pub reason: Option<String>,
    /// Slowest of the `k` endorsements plus the modeled verify cost.
    pub latency_ms: f64,
    pub endorsement_ms: f64,
    pub verify_ms: f64,
    /// Round of the submitted proof.
    pub round: u64,
    pub tx_id: Digest,
}

#[derive(Serialize, Deserialize)]
struct CompanyPayload {
    company_id: String,
}

#[derive(Serialize, Deserialize)]
struct TruckPayload {
    truck_id: String,
    company_id: String,
    chain: DigestChain,
}

#[derive(Serialize, Deserialize)]
struct KeyEntry {
    company_id: String,
    pk: String,
}

#[derive(Serialize, Deserialize)]
struct KeysPayload {
    truck_id: String,
    keys: Vec<KeyEntry>,
}

#[derive(Serialize, Deserialize)]
struct AuthPayload {
    truck_id: String,
    round: u64,
    verified: bool,
    reason: Option<String>,
    latency_ms: f64,
    proof: String,
}

#[derive(Serialize, Deserialize)]
struct RecordPayload {
    resource_id: String,
    record: PlatoonRecord,
}

#[derive(Serialize, Deserialize)]
struct RetrievalPayload {
    query: RecordQuery,
    returned: Vec<String>,
    entry: AccessLogEntry,
}

#[derive(Serialize, Deserialize)]
struct RejectedPayload {
    entry: AccessLogEntry,
}

#[derive(Clone, Debug, Default)]
struct State {
    companies: BTreeSet<String>,
    trucks: BTreeMap<String, TruckEntry>,
    records: Vec<StoredRecord>,
    access_log: Vec<AccessLogEntry>,
}

fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("payloads serialize")
}

fn decode<'a, T: Deserialize<'a>>(tx: &'a Transaction) -> Result<T, LedgerError> {
    serde_json::from_slice(&tx.payload).map_err(|e| LedgerError::Payload(format!("{:?}: {e}", tx.kind)))
}

impl State {
    fn apply(&mut self, tx: &Transaction) -> Result<(), LedgerError> {
        match tx.kind {
            TxKind::Genesis => return Err(LedgerError::Corrupt("genesis transaction after height 0")),
            TxKind::RegisterCompany => {
                let p: CompanyPayload = decode(tx)?;
                if !self.companies.insert(p.company_id.clone()) {
                    return Err(LedgerError::DuplicateCompany(p.company_id));
                }
            }
            TxKind::RegisterTruck => {
                let p: TruckPayload = decode(tx)?;
                if !self.companies.contains(&p.company_id) {
                    return Err(LedgerError::UnknownCompany(p.company_id));
                }
                if self.trucks.contains_key(&p.truck_id) {
                    return Err(LedgerError::DuplicateTruck(p.truck_id));
                }
                self.trucks.insert(
                    p.truck_id,
                    TruckEntry {
                        company_id: p.company_id,
                        chain: p.chain,
                        keys: Vec::new(),
                    },
                );
            }
            TxKind::StoreVerifierKeys => {
                let p: KeysPayload = decode(tx)?;
                let mut keys = Vec::with_capacity(p.keys.len());
                for k in p.keys {
                    keys.push(verifier_key_from_hex(&k.pk, &k.company_id, &p.truck_id)?);
                }
                let entry = self
                    .trucks
                    .get_mut(&p.truck_id)
                    .ok_or_else(|| LedgerError::UnknownTruck(p.truck_id.clone()))?;
                if !entry.keys.is_empty() {
                    return Err(LedgerError::DuplicateTruck(p.truck_id));
                }
                entry.keys = keys;
            }
            TxKind::AuthResult => {
                let p: AuthPayload = decode(tx)?;
                let entry = self
                    .trucks
                    .get_mut(&p.truck_id)
                    .ok_or_else(|| LedgerError::UnknownTruck(p.truck_id.clone()))?;
                if p.verified {
                    if p.round != entry.chain.round() {
                        return Err(LedgerError::Corrupt("accepted proof for a different round"));
                    }
                    entry.chain = entry.chain.advance();
                }
            }
            TxKind::PlatoonRecord => {
                let p: RecordPayload = decode(tx)?;
                self.records.push(StoredRecord {
                    resource_id: p.resource_id,
                    record: p.record,
                });
            }
            TxKind::RetrievalEvent => {
                let p: RetrievalPayload = decode(tx)?;
                self.access_log.push(p.entry);
            }
            TxKind::WriteRejected => {
                let p: RejectedPayload = decode(tx)?;
                self.access_log.push(p.entry);
            }
        }
        Ok(())
    }
}

/// The append-only, hash-chained ledger.
///
/// Mutating operations take `&mut self`, so commits are serialized by the
/// borrow checker; wrap the ledger in a `RwLock` to share it between readers.
#[derive(Clone, Debug)]
pub struct Ledger {
    config: LedgerConfig,
    rules: Vec<AccessControlRule>,
    /// Canonical encoding of each committed block, as written to snapshots.
    committed: Vec<Vec<u8>>,
    blocks: Vec<Block>,
    state: State,
    clock: VirtualClock,
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger::new(LedgerConfig::default()).expect("default config is valid")
    }
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Result<Self, LedgerError> {
        config.policy.validate()?;
        let rules = acl::parse_rules(&config.rules)?;
        let clock = VirtualClock::starting_at(config.epoch_ms);
        let genesis = Transaction::new(TxKind::Genesis, encode(&config), GENESIS_SUBMITTER, clock.now());
        let block = Block::new(0, Digest::ZERO, vec![genesis]);
        let mut ledger = Ledger {
            config,
            rules,
            committed: vec![block.encode()],
            blocks: vec![block],
            state: State::default(),
            clock,
        };
        ledger.clock.advance(1);
        Ok(ledger)
    }

    /// Rebuilds a ledger from committed blocks, revalidating every link and
    /// replaying every transaction.
    pub(crate) fn from_blocks(records: Vec<Vec<u8>>) -> Result<Self, LedgerError> {
        let first = records.first().ok_or(LedgerError::Corrupt("no genesis block"))?;
        let genesis = Block::decode(first)?;
        let config: LedgerConfig = match genesis.tx_list.as_slice() {
            [tx] if tx.kind == TxKind::Genesis => decode(tx)?,
            _ => return Err(LedgerError::Corrupt("malformed genesis block")),
        };
        let mut ledger = Ledger::new(config)?;
        ledger.committed = records;
        ledger.blocks = ledger
            .committed
            .iter()
            .map(|r| Block::decode(r))
            .collect::<Result<_, _>>()?;
        if !ledger.verify_chain() {
            return Err(LedgerError::Corrupt("chain verification failed"));
        }
        let mut state = State::default();
        let mut last = ledger.config.epoch_ms;
        for block in &ledger.blocks[1..] {
            for tx in &block.tx_list {
                state.apply(tx)?;
                last = last.max(tx.timestamp);
            }
        }
        ledger.state = state;
        ledger.clock = VirtualClock::starting_at(last + 1);
        Ok(ledger)
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn policy(&self) -> &EndorsementPolicy {
        &self.config.policy
    }

    pub fn rules(&self) -> &[AccessControlRule] {
        &self.rules
    }

    pub fn height(&self) -> u64 {
        self.blocks.len() as u64 - 1
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    pub fn advance_clock(&mut self, ms: u64) {
        self.clock.advance(ms);
    }

    pub fn companies(&self) -> impl Iterator<Item = &str> {
        self.state.companies.iter().map(String::as_str)
    }

    pub fn truck(&self, truck_id: &str) -> Option<&TruckEntry> {
        self.state.trucks.get(truck_id)
    }

    pub fn truck_count(&self) -> usize {
        self.state.trucks.len()
    }

    pub fn records(&self) -> &[StoredRecord] {
        &self.state.records
    }

    pub fn access_log(&self) -> &[AccessLogEntry] {
        &self.state.access_log
    }

    pub(crate) fn committed_records(&self) -> &[Vec<u8>] {
        &self.committed
    }

    fn authorize(&self, request: &AccessRequest) -> acl::Decision {
        acl::evaluate(&self.rules, request)
    }

    fn endorse(&self, tx: &mut Transaction) -> f64 {
        let mut h = Sha256::new();
        h.update(self.config.seed.to_be_bytes());
        h.update(tx.tx_id.as_bytes());
        let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
        let policy = &self.config.policy;
        let mut peers: Vec<&String> = policy.endorsers().iter().collect();
        peers.shuffle(&mut rng);
        let mut slowest = 0.0f64;
        for peer in peers.into_iter().take(policy.k()) {
            slowest = slowest.max(policy.latency().sample(&mut rng));
            tx.endorsements.push(Endorsement::new(peer.clone(), &tx.tx_id));
        }
        slowest
    }

    /// Endorses, orders and commits `txs` as one block. `extra_ms` is added
    /// to the modeled latency.
    fn commit(&mut self, kinds: Vec<(TxKind, Vec<u8>, String)>, extra_ms: f64) -> Result<Receipt, LedgerError> {
        let timestamp = self.clock.now();
        let mut latency = 0.0f64;
        let mut txs = Vec::with_capacity(kinds.len());
        for (kind, payload, submitter) in kinds {
            let mut tx = Transaction::new(kind, payload, submitter, timestamp);
            latency = latency.max(self.endorse(&mut tx));
            txs.push(tx);
        }
        let mut next = self.state.clone();
        for tx in &txs {
            next.apply(tx)?;
        }
        let prev = self.blocks.last().expect("genesis exists").block_hash;
        let block = Block::new(self.height() + 1, prev, txs);
        let receipt = Receipt {
            height: block.height,
            tx_ids: block.tx_list.iter().map(|t| t.tx_id).collect(),
            timestamp,
            latency_ms: latency + extra_ms,
        };
        self.committed.push(block.encode());
        self.blocks.push(block);
        self.state = next;
        self.clock.advance((receipt.latency_ms.ceil() as u64).max(1));
        Ok(receipt)
    }

    pub fn register_company(&mut self, company_id: &str) -> Result<Receipt, LedgerError> {
        if self.state.companies.contains(company_id) {
            return Err(LedgerError::DuplicateCompany(company_id.to_owned()));
        }
        let payload = encode(&CompanyPayload {
            company_id: company_id.to_owned(),
        });
        self.commit(vec![(TxKind::RegisterCompany, payload, AUTHORITY.to_owned())], 0.0)
    }

    /// One-time key issuance: stores the chain head and one verifier key per
    /// registered company.
    pub fn register_truck(
        &mut self,
        company_id: &str,
        truck_id: &str,
        chain: DigestChain,
        keys: &[VerifierKey],
    ) -> Result<Receipt, LedgerError> {
        if !self.state.companies.contains(company_id) {
            return Err(LedgerError::UnknownCompany(company_id.to_owned()));
        }
        if self.state.trucks.contains_key(truck_id) {
            return Err(LedgerError::DuplicateTruck(truck_id.to_owned()));
        }
        let n = self.state.companies.len();
        if keys.len() != n {
            return Err(LedgerError::KeyCount {
                expected: n,
                found: keys.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for key in keys {
            if key.truck_id() != truck_id {
                return Err(LedgerError::KeyMismatch(format!(
                    "key for truck {} submitted for {truck_id}",
                    key.truck_id()
                )));
            }
            if !self.state.companies.contains(key.company_id()) || !seen.insert(key.company_id()) {
                return Err(LedgerError::KeyMismatch(format!(
                    "company {} is unknown or has more than one key",
                    key.company_id()
                )));
            }
        }
        let truck = encode(&TruckPayload {
            truck_id: truck_id.to_owned(),
            company_id: company_id.to_owned(),
            chain,
        });
        let keys = encode(&KeysPayload {
            truck_id: truck_id.to_owned(),
            keys: keys
                .iter()
                .map(|k| KeyEntry {
                    company_id: k.company_id().to_owned(),
                    pk: hex::encode(k.pk().to_bytes()),
                })
                .collect(),
        });
        self.commit(
            vec![
                (TxKind::RegisterTruck, truck, AUTHORITY.to_owned()),
                (TxKind::StoreVerifierKeys, keys, AUTHORITY.to_owned()),
            ],
            0.0,
        )
    }

    /// Aggregates the stored keys, verifies against the stored digest, and
    /// commits the result. A successful check advances the stored chain.
    pub fn submit_auth(&mut self, agg: &AggregatedProof, truck_id: &str) -> Result<AuthOutcome, LedgerError> {
        let entry = self
            .state
            .trucks
            .get(truck_id)
            .ok_or_else(|| LedgerError::UnknownTruck(truck_id.to_owned()))?;
        let key_request = AccessRequest::new(VERIFIER, Operation::Read, format!("Verifier_Key#{truck_id}"))
            .with_resource_attr("owner", entry.company_id.clone());
        if !self.authorize(&key_request).is_allowed() {
            return Err(LedgerError::Denied {
                participant: VERIFIER.to_owned(),
                resource: key_request.resource_id,
                operation: Operation::Read,
            });
        }
        let (verified, reason) = if agg.round() != entry.chain.round() {
            (false, Some("stale round".to_owned()))
        } else {
            let apk = verifier_key_aggregate(&entry.keys)?;
            match verify_at(agg, &entry.chain, &apk) {
                Ok(true) => (true, None),
                Ok(false) => (false, Some("invalid proof".to_owned())),
                Err(ZkpError::CountMismatch { .. }) => (false, Some("proof count mismatch".to_owned())),
                Err(e) => return Err(e.into()),
            }
        };
        let verify_ms = self.config.verify_cost_ms;
        let payload = AuthPayload {
            truck_id: truck_id.to_owned(),
            round: agg.round(),
            verified,
            reason: reason.clone(),
            latency_ms: verify_ms,
            proof: hex::encode(agg.to_bytes()),
        };
        let receipt = self.commit(
            vec![(TxKind::AuthResult, encode(&payload), VERIFIER.to_owned())],
            verify_ms,
        )?;
        Ok(AuthOutcome {
            verified,
            reason,
            latency_ms: receipt.latency_ms,
            endorsement_ms: receipt.latency_ms - verify_ms,
            verify_ms,
            round: agg.round(),
            tx_id: receipt.tx_ids[0],
        })
    }

    fn record_request(&self, op: Operation, resource_id: &str, record: &PlatoonRecord, who: &str) -> AccessRequest {
        AccessRequest::new(who, op, resource_id)
            .with_resource_attr("owner", record.owner.clone())
            .with_resource_attr("truck", record.truck_id.clone())
            .with_resource_attr("platoon", record.platoon_id.clone())
    }

    pub fn store_platoon_record(&mut self, record: PlatoonRecord, submitter: &str) -> Result<Receipt, LedgerError> {
        if !record.interval_is_ordered() {
            return Err(LedgerError::InvalidRecord("joined_at is after left_at".into()));
        }
        if !self.state.companies.contains(&record.owner) {
            return Err(LedgerError::InvalidRecord(format!(
                "owner {} is not registered",
                record.owner
            )));
        }
        let resource_id = format!("Platoon_Record#{}#{}", record.truck_id, self.state.records.len());
        let request = self.record_request(Operation::Write, &resource_id, &record, submitter);
        if !self.authorize(&request).is_allowed() {
            let entry = AccessLogEntry {
                participant_id: submitter.to_owned(),
                resource_id: resource_id.clone(),
                operation: Operation::Write,
                decision: Action::Deny,
                timestamp: self.clock.now(),
            };
            self.commit(
                vec![(
                    TxKind::WriteRejected,
                    encode(&RejectedPayload { entry }),
                    submitter.to_owned(),
                )],
                0.0,
            )?;
            return Err(LedgerError::Denied {
                participant: submitter.to_owned(),
                resource: resource_id,
                operation: Operation::Write,
            });
        }
        let payload = encode(&RecordPayload { resource_id, record });
        self.commit(vec![(TxKind::PlatoonRecord, payload, submitter.to_owned())], 0.0)
    }

    /// Returns the matching records `requester` may READ and logs the attempt.
    /// A denied query yields an empty list, never an error.
    pub fn retrieve_records(&mut self, query: &RecordQuery, requester: &str) -> Vec<PlatoonRecord> {
        let candidates: Vec<&StoredRecord> = self.state.records.iter().filter(|r| query.matches(&r.record)).collect();
        let allowed: Vec<&StoredRecord> = candidates
            .iter()
            .copied()
            .filter(|r| {
                self.authorize(&self.record_request(Operation::Read, &r.resource_id, &r.record, requester))
                    .is_allowed()
            })
            .collect();
        let decision = if candidates.is_empty() {
            // Nothing to leak: ask whether the owner the query implies may read.
            let owner = match query {
                RecordQuery::Owner(o) => o.clone(),
                RecordQuery::Truck(t) => self
                    .state
                    .trucks
                    .get(t)
                    .map_or_else(|| requester.to_owned(), |e| e.company_id.clone()),
                RecordQuery::Platoon(_) => requester.to_owned(),
            };
            let request =
                AccessRequest::new(requester, Operation::Read, "Platoon_Record").with_resource_attr("owner", owner);
            self.authorize(&request).action
        } else if allowed.is_empty() {
            Action::Deny
        } else {
            Action::Allow
        };
        let records: Vec<PlatoonRecord> = allowed.iter().map(|r| r.record.clone()).collect();
        let payload = RetrievalPayload {
            query: query.clone(),
            returned: allowed.iter().map(|r| r.resource_id.clone()).collect(),
            entry: AccessLogEntry {
                participant_id: requester.to_owned(),
                resource_id: query.resource_id(),
                operation: Operation::Read,
                decision,
                timestamp: self.clock.now(),
            },
        };
        self.commit(
            vec![(TxKind::RetrievalEvent, encode(&payload), requester.to_owned())],
            0.0,
        )
        .expect("retrieval events always apply");
        records
    }

    /// True iff every committed record decodes, every hash recomputes, every
    /// block links to its predecessor and every transaction carries exactly
    /// `k` valid, distinct endorsements from policy peers.
    pub fn verify_chain(&self) -> bool {
        let policy = &self.config.policy;
        let mut prev = Digest::ZERO;
        for (height, record) in self.committed.iter().enumerate() {
            let Ok(block) = Block::decode(record) else {
                return false;
            };
            if block.height != height as u64 || block.prev_hash != prev || block.recompute_hash() != block.block_hash {
                return false;
            }
            if height == 0 {
                let genesis_ok = matches!(block.tx_list.as_slice(),
                    [tx] if tx.kind == TxKind::Genesis && tx.endorsements.is_empty());
                if !genesis_ok {
                    return false;
                }
            }
            for tx in &block.tx_list {
                if tx.recompute_id() != tx.tx_id {
                    return false;
                }
                if height == 0 {
                    continue;
                }
                if tx.kind == TxKind::Genesis || tx.endorsements.len() != policy.k() {
                    return false;
                }
                let mut seen = BTreeSet::new();
                for e in &tx.endorsements {
                    if !policy.endorsers().contains(&e.endorser)
                        || !seen.insert(&e.endorser)
                        || !e.is_valid_for(&tx.tx_id)
                    {
                        return false;
                    }
                }
            }
            prev = block.block_hash;
        }
        true
    }

    /// Total length of all committed block records.
    #[doc(hidden)]
    pub fn committed_len(&self) -> usize {
        self.committed.iter().map(Vec::len).sum()
    }

    /// Test hook: XORs `mask` into the committed byte at `offset`, counting
    /// across all block records in height order. Returns false if out of range.
    #[doc(hidden)]
    pub fn tamper_committed_byte(&mut self, mut offset: usize, mask: u8) -> bool {
        for record in &mut self.committed {
            if offset < record.len() {
                record[offset] ^= mask;
                return mask != 0;
            }
            offset -= record.len();
        }
        false
    }
}

/// Decodes a verifier key in the hex form used by transaction payloads.
pub fn verifier_key_from_hex(pk_hex: &str, company_id: &str, truck_id: &str) -> Result<VerifierKey, LedgerError> {
    let bytes: [u8; KEY_ELEMENT_BYTES] = hex::decode(pk_hex)
        .ok()
        .and_then(|b| b.try_into().ok())
        .ok_or(LedgerError::Corrupt("verifier key encoding"))?;
    Ok(VerifierKey::new(KeyElement::from_bytes(&bytes)?, company_id, truck_id)?)
}
