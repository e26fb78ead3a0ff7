//! Recursive-descent parser for rule files.
//!
//! ```text
//! rule <Ident> {
//!   description: "<string>"
//!   participant(p): "<pattern>"
//!   operation: READ | WRITE
//!   resource(r): "<pattern>"
//!   condition: "<expr>"
//!   action: ALLOW | DENY
//! }
//! ```
//!
//! `expr` uses `p.<attr>`, `r.<attr>`, quoted literals, `true`/`false`,
//! `==`, `!=`, `&&`, `||`, `!` and parentheses. `===`/`!==` are read as
//! `==`/`!=`, and `x.getIdentifier()` as the identifier attribute (`p.id`
//! for the participant itself, `r.owner` for `r.owner.getIdentifier()`).

use super::ast::{AccessControlRule, Action, CmpOp, ConditionExpr, Operation, Subject};
use super::AclError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Dot,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            _ => "",
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
    // Rule files allow `#` comments; condition bodies do not.
    comments: bool,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, start: Pos, comments: bool) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            pos: start,
            comments,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> AclError {
        AclError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, AclError> {
        let mut out = Vec::new();
        loop {
            let tok = self.next_token()?;
            let done = tok.0 == Tok::Eof;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), AclError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') if self.comments => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, start));
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '=' => {
                if self.bump() != Some('=') {
                    return Err(self.err(start, "expected `==`"));
                }
                if self.chars.peek() == Some(&'=') {
                    self.bump();
                }
                Tok::EqEq
            }
            '!' => {
                if self.chars.peek() == Some(&'=') {
                    self.bump();
                    if self.chars.peek() == Some(&'=') {
                        self.bump();
                    }
                    Tok::NotEq
                } else {
                    Tok::Bang
                }
            }
            '&' => {
                if self.bump() != Some('&') {
                    return Err(self.err(start, "expected `&&`"));
                }
                Tok::AndAnd
            }
            '|' => {
                if self.bump() != Some('|') {
                    return Err(self.err(start, "expected `||`"));
                }
                Tok::OrOr
            }
            '"' | '\'' => Tok::Str(self.string_body(c, start)?),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::from(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        ident.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(ident)
            }
            other => return Err(self.err(start, format!("unexpected character `{other}`"))),
        };
        Ok((tok, start))
    }

    fn string_body(&mut self, quote: char, start: Pos) -> Result<String, AclError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(start, "unterminated string")),
                Some('\\') => match self.bump() {
                    Some(e @ ('\\' | '"' | '\'')) => s.push(e),
                    Some('n') => s.push('\n'),
                    _ => return Err(self.err(start, "invalid escape in string")),
                },
                Some(c) if c == quote => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> AclError {
        AclError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, AclError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(pos)
        } else {
            Err(self.err(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), AclError> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(self.err(pos, format!("expected identifier, found {}", tok.describe()))),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), AclError> {
        let (s, pos) = self.ident()?;
        if s == word {
            Ok(())
        } else {
            Err(self.err(pos, format!("expected `{word}`, found `{s}`")))
        }
    }

    fn string(&mut self) -> Result<(String, Pos), AclError> {
        match self.next() {
            (Tok::Str(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(self.err(pos, format!("expected string, found {}", tok.describe()))),
        }
    }

    // `name:` or `name(var):`
    fn field(&mut self, name: &str, var: Option<&str>) -> Result<(), AclError> {
        self.keyword(name)?;
        if let Some(v) = var {
            self.expect(Tok::LParen)?;
            self.keyword(v)?;
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Colon)?;
        Ok(())
    }

    fn rule(&mut self) -> Result<AccessControlRule, AclError> {
        self.keyword("rule")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;

        self.field("description", None)?;
        let (description, _) = self.string()?;

        self.field("participant", Some("p"))?;
        let (participant_pattern, _) = self.string()?;

        self.field("operation", None)?;
        let (op, op_pos) = self.ident()?;
        let operation = Operation::from_keyword(&op).ok_or(AclError::UnknownOperation {
            line: op_pos.line,
            col: op_pos.col,
            found: op,
        })?;

        self.field("resource", Some("r"))?;
        let (resource_pattern, _) = self.string()?;

        self.field("condition", None)?;
        let (cond_src, cond_pos) = self.string()?;
        let condition = parse_condition_at(
            &cond_src,
            Pos {
                line: cond_pos.line,
                col: cond_pos.col + 1,
            },
        )?;

        self.field("action", None)?;
        let (act, act_pos) = self.ident()?;
        let action = Action::from_keyword(&act).ok_or(AclError::UnknownAction {
            line: act_pos.line,
            col: act_pos.col,
            found: act,
        })?;

        self.expect(Tok::RBrace)?;
        Ok(AccessControlRule {
            name,
            description,
            participant_pattern,
            operation,
            resource_pattern,
            condition,
            action,
        })
    }

    fn expr(&mut self) -> Result<ConditionExpr, AclError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::OrOr {
            self.next();
            let rhs = self.and_expr()?;
            lhs = ConditionExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<ConditionExpr, AclError> {
        let mut lhs = self.cmp_expr()?;
        while *self.peek() == Tok::AndAnd {
            self.next();
            let rhs = self.cmp_expr()?;
            lhs = ConditionExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<ConditionExpr, AclError> {
        let lhs = self.unary()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.unary()?;
        if matches!(self.peek(), Tok::EqEq | Tok::NotEq) {
            return Err(self.err(self.pos(), "comparisons do not chain; add parentheses"));
        }
        Ok(ConditionExpr::Cmp {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn unary(&mut self) -> Result<ConditionExpr, AclError> {
        if *self.peek() == Tok::Bang {
            self.next();
            return Ok(ConditionExpr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ConditionExpr, AclError> {
        match self.next() {
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            (Tok::Str(s), _) => Ok(ConditionExpr::Literal(s)),
            (Tok::Ident(word), pos) => match word.as_str() {
                "true" => Ok(ConditionExpr::Bool(true)),
                "false" => Ok(ConditionExpr::Bool(false)),
                "p" => self.attribute(Subject::Participant),
                "r" => self.attribute(Subject::Resource),
                _ => Err(self.err(
                    pos,
                    format!("unknown variable `{word}`; conditions may only use `p` and `r`"),
                )),
            },
            (tok, pos) => Err(self.err(pos, format!("expected expression, found {}", tok.describe()))),
        }
    }

    fn attribute(&mut self, subject: Subject) -> Result<ConditionExpr, AclError> {
        let mut path = Vec::new();
        while *self.peek() == Tok::Dot {
            self.next();
            let (seg, pos) = self.ident()?;
            if *self.peek() == Tok::LParen {
                if seg != "getIdentifier" {
                    return Err(self.err(pos, format!("unsupported method `{seg}`")));
                }
                self.next();
                self.expect(Tok::RParen)?;
                if path.is_empty() {
                    path.push("id".to_owned());
                }
                break;
            }
            path.push(seg);
        }
        match path.len() {
            1 => Ok(ConditionExpr::attr(subject, path.pop().unwrap())),
            0 => Err(self.err(self.pos(), format!("`{}` needs an attribute", subject.var()))),
            _ => Err(self.err(self.pos(), "nested attributes are not supported")),
        }
    }
}

fn parse_condition_at(src: &str, start: Pos) -> Result<ConditionExpr, AclError> {
    let toks = Lexer::new(src, start, false).tokens()?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(p.pos(), format!("unexpected {} after expression", p.peek().describe())));
    }
    Ok(e)
}

/// Parses a bare condition expression.
pub fn parse_condition(src: &str) -> Result<ConditionExpr, AclError> {
    parse_condition_at(src, Pos { line: 1, col: 1 })
}

/// Parses every rule in a file, in order.
pub fn parse_rules(text: &str) -> Result<Vec<AccessControlRule>, AclError> {
    let toks = Lexer::new(text, Pos { line: 1, col: 1 }, true).tokens()?;
    let mut p = Parser { toks, at: 0 };
    let mut rules = Vec::new();
    while *p.peek() != Tok::Eof {
        rules.push(p.rule()?);
    }
    Ok(rules)
}

/// Parses exactly one rule.
pub fn parse_rule(text: &str) -> Result<AccessControlRule, AclError> {
    let mut rules = parse_rules(text)?;
    match rules.len() {
        1 => Ok(rules.pop().unwrap()),
        n => Err(AclError::Syntax {
            line: 1,
            col: 1,
            message: format!("expected exactly one rule, found {n}"),
        }),
    }
}
