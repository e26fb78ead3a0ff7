use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Operation {
    Read,
    Write,
}

impl Operation {
    pub fn keyword(self) -> &'static str {
        match self {
            Operation::Read => "READ",
            Operation::Write => "WRITE",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "READ" => Some(Operation::Read),
            "WRITE" => Some(Operation::Write),
            _ => None,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Allow,
    Deny,
}

impl Action {
    pub fn keyword(self) -> &'static str {
        match self {
            Action::Allow => "ALLOW",
            Action::Deny => "DENY",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "ALLOW" => Some(Action::Allow),
            "DENY" => Some(Action::Deny),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Which bound variable an attribute is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    /// `p`, the requesting participant.
    Participant,
    /// `r`, the requested resource.
    Resource,
}

impl Subject {
    pub fn var(self) -> &'static str {
        match self {
            Subject::Participant => "p",
            Subject::Resource => "r",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionExpr {
    Attr {
        subject: Subject,
        name: String,
    },
    Literal(String),
    Bool(bool),
    Cmp {
        op: CmpOp,
        lhs: Box<ConditionExpr>,
        rhs: Box<ConditionExpr>,
    },
    And(Box<ConditionExpr>, Box<ConditionExpr>),
    Or(Box<ConditionExpr>, Box<ConditionExpr>),
    Not(Box<ConditionExpr>),
}

impl ConditionExpr {
    pub fn attr(subject: Subject, name: impl Into<String>) -> Self {
        ConditionExpr::Attr {
            subject,
            name: name.into(),
        }
    }

    pub fn eq(lhs: ConditionExpr, rhs: ConditionExpr) -> Self {
        ConditionExpr::Cmp {
            op: CmpOp::Eq,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    // Binding strength used by the printer: higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            ConditionExpr::Or(..) => 1,
            ConditionExpr::And(..) => 2,
            ConditionExpr::Cmp { .. } => 3,
            ConditionExpr::Not(_) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            ConditionExpr::Attr { subject, name } => write!(f, "{}.{}", subject.var(), name)?,
            ConditionExpr::Literal(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    if c == '\'' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("'")?;
            }
            ConditionExpr::Bool(b) => write!(f, "{b}")?,
            ConditionExpr::Cmp { op, lhs, rhs } => {
                lhs.write_at(f, 4)?;
                f.write_str(match op {
                    CmpOp::Eq => " == ",
                    CmpOp::Ne => " != ",
                })?;
                rhs.write_at(f, 4)?;
            }
            ConditionExpr::And(l, r) => {
                l.write_at(f, 2)?;
                f.write_str(" && ")?;
                r.write_at(f, 3)?;
            }
            ConditionExpr::Or(l, r) => {
                l.write_at(f, 1)?;
                f.write_str(" || ")?;
                r.write_at(f, 2)?;
            }
            ConditionExpr::Not(inner) => {
                f.write_str("!")?;
                inner.write_at(f, 4)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ConditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// One `rule Name { ... }` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessControlRule {
    pub name: String,
    pub description: String,
    pub participant_pattern: String,
    pub operation: Operation,
    pub resource_pattern: String,
    pub condition: ConditionExpr,
    pub action: Action,
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("\"")
}

impl fmt::Display for AccessControlRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {} {{", self.name)?;
        f.write_str("  description: ")?;
        write_quoted(f, &self.description)?;
        f.write_str("\n  participant(p): ")?;
        write_quoted(f, &self.participant_pattern)?;
        writeln!(f, "\n  operation: {}", self.operation)?;
        f.write_str("  resource(r): ")?;
        write_quoted(f, &self.resource_pattern)?;
        f.write_str("\n  condition: ")?;
        write_quoted(f, &self.condition.to_string())?;
        writeln!(f, "\n  action: {}", self.action)?;
        f.write_str("}")
    }
}
