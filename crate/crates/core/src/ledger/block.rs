use sha2::{Digest as _, Sha256};

use crate::zkp::Digest;

use super::LedgerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TxKind {
    Genesis,
    RegisterCompany,
    RegisterTruck,
    StoreVerifierKeys,
    AuthResult,
    PlatoonRecord,
    RetrievalEvent,
    WriteRejected,
}

impl TxKind {
    pub const ALL: [TxKind; 8] = [
        TxKind::Genesis,
        TxKind::RegisterCompany,
        TxKind::RegisterTruck,
        TxKind::StoreVerifierKeys,
        TxKind::AuthResult,
        TxKind::PlatoonRecord,
        TxKind::RetrievalEvent,
        TxKind::WriteRejected,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        TxKind::ALL.get(tag as usize).copied()
    }
}

/// An endorser's approval. The tag binds the endorser to the transaction id,
/// so rewriting either one is detectable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endorsement {
    pub endorser: String,
    pub tag: Digest,
}

impl Endorsement {
    pub fn new(endorser: impl Into<String>, tx_id: &Digest) -> Self {
        let endorser = endorser.into();
        let tag = endorsement_tag(&endorser, tx_id);
        Endorsement { endorser, tag }
    }

    pub fn is_valid_for(&self, tx_id: &Digest) -> bool {
        self.tag == endorsement_tag(&self.endorser, tx_id)
    }
}

fn endorsement_tag(endorser: &str, tx_id: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update(b"endorse");
    h.update((endorser.len() as u32).to_be_bytes());
    h.update(endorser.as_bytes());
    h.update(tx_id.as_bytes());
    Digest::from_bytes(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub tx_id: Digest,
    pub kind: TxKind,
    pub payload: Vec<u8>,
    pub submitter: String,
    /// Milliseconds on the ledger's virtual clock.
    pub timestamp: u64,
    pub endorsements: Vec<Endorsement>,
}

impl Transaction {
    pub fn new(kind: TxKind, payload: Vec<u8>, submitter: impl Into<String>, timestamp: u64) -> Self {
        let submitter = submitter.into();
        Transaction {
            tx_id: tx_id(kind, &payload, &submitter, timestamp),
            kind,
            payload,
            submitter,
            timestamp,
            endorsements: Vec::new(),
        }
    }

    pub fn recompute_id(&self) -> Digest {
        tx_id(self.kind, &self.payload, &self.submitter, self.timestamp)
    }
}

/// `H(kind ‖ payload ‖ submitter ‖ timestamp)` with length-prefixed variable fields.
pub fn tx_id(kind: TxKind, payload: &[u8], submitter: &str, timestamp: u64) -> Digest {
    let mut h = Sha256::new();
    h.update([kind.tag()]);
    h.update((payload.len() as u32).to_be_bytes());
    h.update(payload);
    h.update((submitter.len() as u32).to_be_bytes());
    h.update(submitter.as_bytes());
    h.update(timestamp.to_be_bytes());
    Digest::from_bytes(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub prev_hash: Digest,
    pub tx_list: Vec<Transaction>,
    pub block_hash: Digest,
}

impl Block {
    pub fn new(height: u64, prev_hash: Digest, tx_list: Vec<Transaction>) -> Self {
        let block_hash = block_hash(height, &prev_hash, &tx_list);
        Block {
            height,
            prev_hash,
            tx_list,
            block_hash,
        }
    }

    pub fn recompute_hash(&self) -> Digest {
        block_hash(self.height, &self.prev_hash, &self.tx_list)
    }

    /// Canonical record: every field in fixed order, big-endian lengths.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(self.prev_hash.as_bytes());
        out.extend_from_slice(self.block_hash.as_bytes());
        out.extend_from_slice(&(self.tx_list.len() as u32).to_be_bytes());
        for tx in &self.tx_list {
            out.extend_from_slice(tx.tx_id.as_bytes());
            out.push(tx.kind.tag());
            put_bytes(&mut out, &tx.payload);
            put_bytes(&mut out, tx.submitter.as_bytes());
            out.extend_from_slice(&tx.timestamp.to_be_bytes());
            out.extend_from_slice(&(tx.endorsements.len() as u32).to_be_bytes());
            for e in &tx.endorsements {
                put_bytes(&mut out, e.endorser.as_bytes());
                out.extend_from_slice(e.tag.as_bytes());
            }
        }
        out
    }

    /// Parses a record produced by [`Block::encode`]. Hashes are not checked.
    pub fn decode(bytes: &[u8]) -> Result<Block, LedgerError> {
        let mut r = Reader { bytes, pos: 0 };
        let height = r.u64()?;
        let prev_hash = r.digest()?;
        let block_hash = r.digest()?;
        let count = r.u32()? as usize;
        let mut tx_list = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let tx_id = r.digest()?;
            let kind = TxKind::from_tag(r.take(1)?[0]).ok_or(LedgerError::Corrupt("unknown tx kind"))?;
            let payload = r.bytes()?.to_vec();
            let submitter = r.string()?;
            let timestamp = r.u64()?;
            let n = r.u32()? as usize;
            let mut endorsements = Vec::with_capacity(n.min(64));
            for _ in 0..n {
                let endorser = r.string()?;
                let tag = r.digest()?;
                endorsements.push(Endorsement { endorser, tag });
            }
            tx_list.push(Transaction {
                tx_id,
                kind,
                payload,
                submitter,
                timestamp,
                endorsements,
            });
        }
        if r.pos != bytes.len() {
            return Err(LedgerError::Corrupt("trailing bytes in block record"));
        }
        Ok(Block {
            height,
            prev_hash,
            tx_list,
            block_hash,
        })
    }
}

/// `H(height ‖ prev_hash ‖ tx_id_1 ‖ … ‖ tx_id_m)`.
pub fn block_hash(height: u64, prev_hash: &Digest, txs: &[Transaction]) -> Digest {
    let mut h = Sha256::new();
    h.update(height.to_be_bytes());
    h.update(prev_hash.as_bytes());
    for tx in txs {
        h.update(tx.tx_id.as_bytes());
    }
    Digest::from_bytes(h.finalize().into())
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

pub(crate) struct Reader<'a> {
    pub(crate) bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], LedgerError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or(LedgerError::Corrupt("truncated record"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self) -> Result<u32, LedgerError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, LedgerError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn digest(&mut self) -> Result<Digest, LedgerError> {
        Ok(Digest::from_bytes(self.take(32)?.try_into().unwrap()))
    }

    pub(crate) fn bytes(&mut self) -> Result<&'a [u8], LedgerError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    fn string(&mut self) -> Result<String, LedgerError> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| LedgerError::Corrupt("invalid utf-8"))
    }
}
