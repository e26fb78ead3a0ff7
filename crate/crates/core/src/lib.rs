//! Aggregated zero-knowledge authentication for mixed-fleet truck platoons,
//! with a permissioned-ledger simulator, an access-control rule engine and a
//! platoon-formation kinematics model.

pub mod acl;
pub mod formation;
pub mod ledger;
pub mod scenarios;
pub mod zkp;
