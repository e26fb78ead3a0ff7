use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{AccessControlRule, Action, CmpOp, ConditionExpr, Operation, Subject};

/// A request to perform `operation` on a resource.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AccessRequest {
    pub participant_id: String,
    pub participant_attributes: BTreeMap<String, String>,
    pub operation: Option<Operation>,
    pub resource_id: String,
    pub resource_attributes: BTreeMap<String, String>,
}

impl AccessRequest {
    pub fn new(participant_id: impl Into<String>, operation: Operation, resource_id: impl Into<String>) -> Self {
        AccessRequest {
            participant_id: participant_id.into(),
            operation: Some(operation),
            resource_id: resource_id.into(),
            ..Default::default()
        }
    }

    pub fn with_participant_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.participant_attributes.insert(key.into(), value.into());
        self
    }

    pub fn with_resource_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.resource_attributes.insert(key.into(), value.into());
        self
    }

    // `id` falls back to the request's own identifier.
    fn lookup(&self, subject: Subject, name: &str) -> Option<&str> {
        let (attrs, id) = match subject {
            Subject::Participant => (&self.participant_attributes, &self.participant_id),
            Subject::Resource => (&self.resource_attributes, &self.resource_id),
        };
        attrs
            .get(name)
            .map(String::as_str)
            .or_else(|| (name == "id").then_some(id.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("attribute {var}.{name} is not present")]
    MissingAttribute { var: &'static str, name: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Value<'a> {
    Str(&'a str),
    Bool(bool),
}

fn eval<'a>(expr: &'a ConditionExpr, req: &'a AccessRequest) -> Result<Value<'a>, EvalError> {
    Ok(match expr {
        ConditionExpr::Attr { subject, name } => {
            Value::Str(req.lookup(*subject, name).ok_or_else(|| EvalError::MissingAttribute {
                var: subject.var(),
                name: name.clone(),
            })?)
        }
        ConditionExpr::Literal(s) => Value::Str(s),
        ConditionExpr::Bool(b) => Value::Bool(*b),
        ConditionExpr::Cmp { op, lhs, rhs } => {
            let (l, r) = (eval(lhs, req)?, eval(rhs, req)?);
            let same = match (&l, &r) {
                (Value::Str(a), Value::Str(b)) => a == b,
                (Value::Bool(a), Value::Bool(b)) => a == b,
                _ => return Err(EvalError::TypeMismatch("comparing a string with a boolean")),
            };
            Value::Bool(match op {
                CmpOp::Eq => same,
                CmpOp::Ne => !same,
            })
        }
        ConditionExpr::And(l, r) => Value::Bool(truth(l, req)? && truth(r, req)?),
        ConditionExpr::Or(l, r) => Value::Bool(truth(l, req)? || truth(r, req)?),
        ConditionExpr::Not(inner) => Value::Bool(!truth(inner, req)?),
    })
}

fn truth(expr: &ConditionExpr, req: &AccessRequest) -> Result<bool, EvalError> {
    match eval(expr, req)? {
        Value::Bool(b) => Ok(b),
        Value::Str(_) => Err(EvalError::TypeMismatch("a string is not a condition")),
    }
}

/// Evaluates a condition against a request.
pub fn evaluate_condition(expr: &ConditionExpr, req: &AccessRequest) -> Result<bool, EvalError> {
    truth(expr, req)
}

/// `*` matches anything, `prefix*` matches by prefix, and a plain name
/// matches itself or any instance `name#...`.
pub fn pattern_matches(pattern: &str, id: &str) -> bool {
    if pattern == "*" {
        return true;
    }
    if let Some(prefix) = pattern.strip_suffix('*') {
        return id.starts_with(prefix);
    }
    id == pattern || id.strip_prefix(pattern).is_some_and(|rest| rest.starts_with('#'))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchedRule {
    Rule(String),
    Default,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedRule {
    pub rule: String,
    pub error: EvalError,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub action: Action,
    pub matched: MatchedRule,
    /// Rules whose condition could not be evaluated for this request.
    pub skipped: Vec<SkippedRule>,
}

impl Decision {
    pub fn is_allowed(&self) -> bool {
        self.action == Action::Allow
    }

    pub fn rule_name(&self) -> &str {
        match &self.matched {
            MatchedRule::Rule(name) => name,
            MatchedRule::Default => "default",
        }
    }
}

/// First matching rule wins; no match is a DENY.
pub fn evaluate(rules: &[AccessControlRule], request: &AccessRequest) -> Decision {
    let mut skipped = Vec::new();
    for rule in rules {
        if Some(rule.operation) != request.operation
            || !pattern_matches(&rule.participant_pattern, &request.participant_id)
            || !pattern_matches(&rule.resource_pattern, &request.resource_id)
        {
            continue;
        }
        match evaluate_condition(&rule.condition, request) {
            Ok(true) => {
                return Decision {
                    action: rule.action,
                    matched: MatchedRule::Rule(rule.name.clone()),
                    skipped,
                }
            }
            Ok(false) => {}
            Err(error) => {
                log::warn!("rule {} skipped: {error}", rule.name);
                skipped.push(SkippedRule {
                    rule: rule.name.clone(),
                    error,
                });
            }
        }
    }
    Decision {
        action: Action::Deny,
        matched: MatchedRule::Default,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acl::parse_rule;

    fn paper_rules() -> Vec<AccessControlRule> {
        vec![parse_rule(crate::acl::REFERENCE_RULE).unwrap()]
    }

    fn read(who: &str, owner: &str) -> AccessRequest {
        AccessRequest::new(who, Operation::Read, "Platoon_Record#T1#0").with_resource_attr("owner", owner)
    }

    #[test]
    fn owner_allowed() {
        let d = evaluate(&paper_rules(), &read("Company_A", "Company_A"));
        assert!(d.is_allowed());
        assert_eq!(d.rule_name(), "CompanyCanReadPlatoonRecord");
    }

    #[test]
    fn other_company_denied_by_default() {
        let d = evaluate(&paper_rules(), &read("Company_B", "Company_A"));
        assert_eq!(d.action, Action::Deny);
        assert_eq!(d.matched, MatchedRule::Default);
    }

    #[test]
    fn empty_rules_deny() {
        assert_eq!(evaluate(&[], &read("Company_A", "Company_A")).action, Action::Deny);
    }

    #[test]
    fn missing_attribute_skips_rule() {
        let req = AccessRequest::new("Company_A", Operation::Read, "Platoon_Record");
        let d = evaluate(&paper_rules(), &req);
        assert_eq!(d.action, Action::Deny);
        assert_eq!(d.skipped.len(), 1);
        assert!(matches!(
            d.skipped[0].error,
            EvalError::MissingAttribute { var: "r", .. }
        ));
    }

    #[test]
    fn write_does_not_match_a_read_rule() {
        let mut req = read("Company_A", "Company_A");
        req.operation = Some(Operation::Write);
        assert_eq!(evaluate(&paper_rules(), &req).action, Action::Deny);
    }

    #[test]
    fn patterns() {
        assert!(pattern_matches("*", "x"));
        assert!(pattern_matches("Company_*", "Company_B"));
        assert!(pattern_matches("Platoon_Record", "Platoon_Record"));
        assert!(pattern_matches("Platoon_Record", "Platoon_Record#T1#3"));
        assert!(!pattern_matches("Platoon_Record", "Platoon_Records"));
        assert!(!pattern_matches("Company_A", "Company_AB"));
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let e = crate::acl::parse_condition("p.id").unwrap();
        assert!(evaluate_condition(&e, &read("a", "b")).is_err());
        let e = crate::acl::parse_condition("p.id == true").unwrap();
        assert!(evaluate_condition(&e, &read("a", "b")).is_err());
    }
}
