//! Access-control rules: participant, operation, resource, condition, action.
//!
//! Rules are evaluated in order and the first rule whose patterns match and
//! whose condition holds decides; with no match the answer is DENY.

mod ast;
mod eval;
mod parser;

use thiserror::Error;

pub use ast::{AccessControlRule, Action, CmpOp, ConditionExpr, Operation, Subject};
pub use eval::{
    evaluate, evaluate_condition, pattern_matches, AccessRequest, Decision, EvalError, MatchedRule, SkippedRule,
};
pub use parser::{parse_condition, parse_rule, parse_rules};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AclError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unknown operation `{found}` (expected READ or WRITE)")]
    UnknownOperation { line: usize, col: usize, found: String },
    #[error("{line}:{col}: unknown action `{found}` (expected ALLOW or DENY)")]
    UnknownAction { line: usize, col: usize, found: String },
}

/// The company-reads-own-records rule, with `===` written as `==`.
pub const REFERENCE_RULE: &str = r#"rule CompanyCanReadPlatoonRecord {
  description: "Allow company A to read
        platoon records."
  participant(p): "Company_A"
  operation: READ
  resource(r): "Platoon_Record"
  condition: "r.owner.getIdentifier() ==
        p.getIdentifier()"
  action: ALLOW
}
"#;

/// Policy installed on a fresh ledger: companies read their own records,
/// only the verification pipeline writes records and reads verifier keys.
pub const DEFAULT_POLICY: &str = include_str!("default_policy.acl");

pub fn default_rules() -> Vec<AccessControlRule> {
    parse_rules(DEFAULT_POLICY).expect("bundled policy parses")
}
