use serde::{Deserialize, Serialize};

/// A manually driven millisecond clock. Nothing in the ledger reads wall time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualClock {
    now_ms: u64,
}

impl VirtualClock {
    pub fn starting_at(now_ms: u64) -> Self {
        VirtualClock { now_ms }
    }

    pub fn now(&self) -> u64 {
        self.now_ms
    }

    pub fn advance(&mut self, ms: u64) -> u64 {
        self.now_ms = self.now_ms.saturating_add(ms);
        self.now_ms
    }

    /// Moves forward to `ms` if it is in the future.
    pub fn advance_to(&mut self, ms: u64) {
        self.now_ms = self.now_ms.max(ms);
    }
}
