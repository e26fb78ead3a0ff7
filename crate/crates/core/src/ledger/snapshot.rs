use std::fs;
use std::io::Write;
use std::path::Path;

use super::block::Reader;
use super::{Ledger, LedgerError};

pub const SNAPSHOT_MAGIC: &[u8; 5] = b"PLGR1";

impl Ledger {
    /// `PLGR1` followed by each block record prefixed with its u32 length.
    pub fn to_snapshot_bytes(&self) -> Vec<u8> {
        let mut out = SNAPSHOT_MAGIC.to_vec();
        for record in self.committed_records() {
            out.extend_from_slice(&(record.len() as u32).to_be_bytes());
            out.extend_from_slice(record);
        }
        out
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Ledger, LedgerError> {
        let body = bytes
            .strip_prefix(SNAPSHOT_MAGIC.as_slice())
            .ok_or_else(|| LedgerError::Snapshot("missing PLGR1 magic".into()))?;
        let mut reader = Reader { bytes: body, pos: 0 };
        let mut records = Vec::new();
        while reader.pos < body.len() {
            records.push(reader.bytes()?.to_vec());
        }
        Ledger::from_blocks(records)
    }

    pub fn save(&self, path: &Path) -> Result<(), LedgerError> {
        let tmp = path.with_extension("tmp");
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&self.to_snapshot_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Ledger, LedgerError> {
        Ledger::from_snapshot_bytes(&fs::read(path)?)
    }
}
