use serde::{Deserialize, Serialize};

use crate::acl::{Action, Operation};

/// A truck's membership interval in one platoon, owned by its company.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatoonRecord {
    pub truck_id: String,
    pub owner: String,
    pub platoon_id: String,
    pub joined_at: Option<u64>,
    pub left_at: Option<u64>,
    pub route_segment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_trace: Option<Vec<(u64, f64)>>,
}

impl PlatoonRecord {
    pub fn new(truck_id: impl Into<String>, owner: impl Into<String>, platoon_id: impl Into<String>) -> Self {
        PlatoonRecord {
            truck_id: truck_id.into(),
            owner: owner.into(),
            platoon_id: platoon_id.into(),
            joined_at: None,
            left_at: None,
            route_segment: String::new(),
            position_trace: None,
        }
    }

    pub fn interval_is_ordered(&self) -> bool {
        match (self.joined_at, self.left_at) {
            (Some(j), Some(l)) => j <= l,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLogEntry {
    pub participant_id: String,
    pub resource_id: String,
    pub operation: Operation,
    pub decision: Action,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordQuery {
    Owner(String),
    Truck(String),
    Platoon(String),
}

impl RecordQuery {
    pub fn matches(&self, record: &PlatoonRecord) -> bool {
        match self {
            RecordQuery::Owner(o) => &record.owner == o,
            RecordQuery::Truck(t) => &record.truck_id == t,
            RecordQuery::Platoon(p) => &record.platoon_id == p,
        }
    }

    /// Resource id used in the access log for this query.
    pub fn resource_id(&self) -> String {
        match self {
            RecordQuery::Owner(o) => format!("Platoon_Record?owner={o}"),
            RecordQuery::Truck(t) => format!("Platoon_Record?truck={t}"),
            RecordQuery::Platoon(p) => format!("Platoon_Record?platoon={p}"),
        }
    }
}
