//! Event filter predicates and their textual form.
//!
//! ```text
//! predicate := term { "and" term }
//! term      := name op literal
//!            | name "!=" "null" | name "==" "null"
//!            | name "in" "[" literal "," literal "]"
//! op        := "==" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! Literals are quoted text (`"..."` or `'...'`), decimal numbers, ISO dates
//! (`2020-01-31`, optionally with a time), or bare words, which are read as
//! text.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ingest::timestamp::{format_millis, parse_iso8601};
use crate::log::{AttributeValue, Event, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown operator `{op}` at column {column}")]
    UnknownOperator { column: usize, op: String },
    #[error("type error at column {column}: {message}")]
    LiteralType { column: usize, message: String },
    #[error("type error in term `{term}`: {message}")]
    TermType { term: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Text(String),
    Number(f64),
    /// Epoch milliseconds.
    Date(i64),
}

impl Literal {
    fn is_ordered(&self) -> bool {
        !matches!(self, Literal::Text(_))
    }

    fn accepts(&self, kind: ValueKind) -> bool {
        match self {
            Literal::Text(_) => kind == ValueKind::Text,
            Literal::Number(_) => kind.is_ordered(),
            Literal::Date(_) => kind == ValueKind::Timestamp,
        }
    }

    fn compare(&self, value: &AttributeValue) -> Option<Ordering> {
        match (self, value) {
            (Literal::Text(l), AttributeValue::Text(v)) => Some(v.as_str().cmp(l)),
            (Literal::Date(l), AttributeValue::Timestamp(v)) => Some(v.cmp(l)),
            (Literal::Number(l), v) => v.as_f64()?.partial_cmp(l),
            _ => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Text(s) => write!(f, "{s:?}"),
            Literal::Number(n) => write!(f, "{n}"),
            Literal::Date(d) => f.write_str(&format_millis(*d)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl Operator {
    fn is_ordering(self) -> bool {
        !matches!(self, Operator::Eq | Operator::Neq)
    }

    fn symbol(self) -> &'static str {
        match self {
            Operator::Eq => "==",
            Operator::Neq => "!=",
            Operator::Lt => "<",
            Operator::Leq => "<=",
            Operator::Gt => ">",
            Operator::Geq => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Compare(Operator, Literal),
    Present,
    Absent,
    /// Inclusive on both ends.
    InRange(Literal, Literal),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub attribute: String,
    pub condition: Condition,
}

impl Term {
    pub fn new(attribute: impl Into<String>, condition: Condition) -> Self {
        Term {
            attribute: attribute.into(),
            condition,
        }
    }

    /// Comparisons are false on absent values.
    pub fn matches(&self, event: &Event) -> bool {
        let value = event.attribute(&self.attribute);
        match &self.condition {
            Condition::Present => !value.is_absent(),
            Condition::Absent => value.is_absent(),
            Condition::Compare(op, lit) => match lit.compare(value) {
                None => false,
                Some(ord) => match op {
                    Operator::Eq => ord == Ordering::Equal,
                    Operator::Neq => ord != Ordering::Equal,
                    Operator::Lt => ord == Ordering::Less,
                    Operator::Leq => ord != Ordering::Greater,
                    Operator::Gt => ord == Ordering::Greater,
                    Operator::Geq => ord != Ordering::Less,
                },
            },
            Condition::InRange(lo, hi) => {
                matches!(lo.compare(value), Some(Ordering::Greater | Ordering::Equal))
                    && matches!(hi.compare(value), Some(Ordering::Less | Ordering::Equal))
            }
        }
    }

    fn check(&self, kinds: Option<&BTreeSet<ValueKind>>) -> Result<(), PredicateError> {
        let err = |message: String| PredicateError::TermType {
            term: self.to_string(),
            message,
        };
        let literals: Vec<&Literal> = match &self.condition {
            Condition::Present | Condition::Absent => return Ok(()),
            Condition::Compare(op, lit) => {
                if op.is_ordering() && !lit.is_ordered() {
                    return Err(err(format!(
                        "`{}` needs a numeric or date literal",
                        op.symbol()
                    )));
                }
                vec![lit]
            }
            Condition::InRange(lo, hi) => {
                if !lo.is_ordered() || !hi.is_ordered() {
                    return Err(err("`in` needs numeric or date bounds".into()));
                }
                vec![lo, hi]
            }
        };
        let Some(kinds) = kinds else {
            return Ok(());
        };
        for kind in kinds {
            for lit in &literals {
                if !lit.accepts(*kind) {
                    return Err(err(format!(
                        "attribute `{}` holds {kind} values, literal is {lit}",
                        self.attribute
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.condition {
            Condition::Compare(op, lit) => write!(f, "{} {} {lit}", self.attribute, op.symbol()),
            Condition::Present => write!(f, "{} != null", self.attribute),
            Condition::Absent => write!(f, "{} == null", self.attribute),
            Condition::InRange(lo, hi) => write!(f, "{} in [{lo}, {hi}]", self.attribute),
        }
    }
}

/// A conjunction of terms. The empty conjunction accepts every event.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterPredicate {
    pub terms: Vec<Term>,
}

impl FilterPredicate {
    pub fn all() -> Self {
        FilterPredicate::default()
    }

    pub fn with(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    /// Conjunction of both predicates.
    pub fn and(mut self, other: &FilterPredicate) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn matches(&self, event: &Event) -> bool {
        self.terms.iter().all(|t| t.matches(event))
    }

    /// Checks every term against the value kinds observed in a log.
    pub fn check(
        &self,
        observed: &BTreeMap<&str, BTreeSet<ValueKind>>,
    ) -> Result<(), PredicateError> {
        for t in &self.terms {
            t.check(observed.get(t.attribute.as_str()))?;
        }
        Ok(())
    }
}

impl fmt::Display for FilterPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Number(f64),
    Date(i64),
    Op(Operator),
    LBracket,
    RBracket,
    Comma,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

fn syntax(column: usize, message: impl Into<String>) -> PredicateError {
    PredicateError::Syntax {
        column,
        message: message.into(),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | ':' | '.' | '-')
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.pos += 1;
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, PredicateError> {
        let mut out = Vec::new();
        loop {
            self.take_while(char::is_whitespace);
            let Some(c) = self.peek() else { break };
            let col = self.column();
            let tok = match c {
                '[' => {
                    self.pos += 1;
                    Tok::LBracket
                }
                ']' => {
                    self.pos += 1;
                    Tok::RBracket
                }
                ',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                '"' | '\'' => {
                    self.pos += 1;
                    let mut s = String::new();
                    loop {
                        match self.peek() {
                            None => return Err(syntax(col, "unterminated string")),
                            Some('\\') => {
                                self.pos += 1;
                                let Some(esc) = self.peek() else {
                                    return Err(syntax(col, "unterminated string"));
                                };
                                s.push(esc);
                                self.pos += 1;
                            }
                            Some(q) if q == c => {
                                self.pos += 1;
                                break;
                            }
                            Some(other) => {
                                s.push(other);
                                self.pos += 1;
                            }
                        }
                    }
                    Tok::Quoted(s)
                }
                '=' | '!' | '<' | '>' | '~' => {
                    let op = self.take_while(|c| matches!(c, '=' | '!' | '<' | '>' | '~'));
                    Tok::Op(match op.as_str() {
                        "==" => Operator::Eq,
                        "!=" => Operator::Neq,
                        "<" => Operator::Lt,
                        "<=" => Operator::Leq,
                        ">" => Operator::Gt,
                        ">=" => Operator::Geq,
                        _ => return Err(PredicateError::UnknownOperator { column: col, op }),
                    })
                }
                c if c.is_ascii_digit() || c == '-' || c == '+' => {
                    let word = self.take_while(|c| is_word_char(c) || matches!(c, '+'));
                    if let Ok(n) = word.parse::<f64>() {
                        Tok::Number(n)
                    } else if let Ok(d) = parse_iso8601(&word) {
                        Tok::Date(d)
                    } else {
                        return Err(syntax(
                            col,
                            format!("`{word}` is neither a number nor a date"),
                        ));
                    }
                }
                c if is_word_char(c) => Tok::Word(self.take_while(is_word_char)),
                other => return Err(syntax(col, format!("unexpected character `{other}`"))),
            };
            out.push((col, tok));
        }
        Ok(out)
    }
}

struct TokenStream {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl TokenStream {
    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<usize, PredicateError> {
        match self.next() {
            Some((col, t)) if &t == want => Ok(col),
            Some((col, _)) => Err(syntax(col, format!("expected {what}"))),
            None => Err(syntax(self.end_col, format!("expected {what}"))),
        }
    }

    fn literal(&mut self) -> Result<(usize, Literal), PredicateError> {
        match self.next() {
            Some((col, Tok::Quoted(s) | Tok::Word(s))) => Ok((col, Literal::Text(s))),
            Some((col, Tok::Number(n))) => Ok((col, Literal::Number(n))),
            Some((col, Tok::Date(d))) => Ok((col, Literal::Date(d))),
            Some((col, _)) => Err(syntax(col, "expected a literal")),
            None => Err(syntax(self.end_col, "expected a literal")),
        }
    }

    fn term(&mut self) -> Result<Term, PredicateError> {
        let attribute = match self.next() {
            Some((_, Tok::Word(w))) => w,
            Some((col, _)) => return Err(syntax(col, "expected an attribute name")),
            None => return Err(syntax(self.end_col, "expected an attribute name")),
        };
        match self.next() {
            Some((_, Tok::Word(w))) if w == "in" => {
                self.expect(&Tok::LBracket, "`[`")?;
                let (lo_col, lo) = self.literal()?;
                self.expect(&Tok::Comma, "`,`")?;
                let (hi_col, hi) = self.literal()?;
                self.expect(&Tok::RBracket, "`]`")?;
                for (col, lit) in [(lo_col, &lo), (hi_col, &hi)] {
                    if !lit.is_ordered() {
                        return Err(PredicateError::LiteralType {
                            column: col,
                            message: format!("range bound {lit} is not a number or date"),
                        });
                    }
                }
                if std::mem::discriminant(&lo) != std::mem::discriminant(&hi) {
                    return Err(PredicateError::LiteralType {
                        column: hi_col,
                        message: "range bounds must have the same type".into(),
                    });
                }
                Ok(Term::new(attribute, Condition::InRange(lo, hi)))
            }
            Some((_, Tok::Op(op))) => {
                let (col, lit) = self.literal()?;
                if lit == Literal::Text("null".into()) {
                    return match op {
                        Operator::Eq => Ok(Term::new(attribute, Condition::Absent)),
                        Operator::Neq => Ok(Term::new(attribute, Condition::Present)),
                        _ => Err(PredicateError::LiteralType {
                            column: col,
                            message: format!("`{}` cannot compare against null", op.symbol()),
                        }),
                    };
                }
                if op.is_ordering() && !lit.is_ordered() {
                    return Err(PredicateError::LiteralType {
                        column: col,
                        message: format!("`{}` needs a number or date, found {lit}", op.symbol()),
                    });
                }
                Ok(Term::new(attribute, Condition::Compare(op, lit)))
            }
            Some((col, _)) => Err(syntax(col, "expected an operator or `in`")),
            None => Err(syntax(self.end_col, "expected an operator or `in`")),
        }
    }
}

/// Parses the textual predicate form described in the module docs.
pub fn parse_predicate(text: &str) -> Result<FilterPredicate, PredicateError> {
    let toks = Lexer::new(text).tokens()?;
    if toks.is_empty() {
        return Err(syntax(1, "empty predicate"));
    }
    let mut stream = TokenStream {
        toks,
        pos: 0,
        end_col: text.chars().count() + 1,
    };
    let mut pred = FilterPredicate::all();
    loop {
        pred.terms.push(stream.term()?);
        match stream.next() {
            None => break,
            Some((_, Tok::Word(w))) if w.eq_ignore_ascii_case("and") => continue,
            Some((col, _)) => return Err(syntax(col, "expected `and` or end of input")),
        }
    }
    Ok(pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::COST;

    #[test]
    fn null_checks() {
        let p = parse_predicate("activity != null").unwrap();
        assert_eq!(p.terms, [Term::new("activity", Condition::Present)]);
        let p = parse_predicate("resource == null").unwrap();
        assert_eq!(p.terms, [Term::new("resource", Condition::Absent)]);
    }

    #[test]
    fn date_range() {
        let p = parse_predicate("timestamp in [2020-01-01, 2020-12-31]").unwrap();
        assert_eq!(
            p.terms,
            [Term::new(
                "timestamp",
                Condition::InRange(
                    Literal::Date(1_577_836_800_000),
                    Literal::Date(1_609_372_800_000)
                )
            )]
        );
    }

    #[test]
    fn ordering_against_text_is_a_type_error() {
        match parse_predicate("cost >= abc").unwrap_err() {
            PredicateError::LiteralType { column, .. } => assert_eq!(column, 9),
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_predicate("cost in [a, 3]"),
            Err(PredicateError::LiteralType { .. })
        ));
    }

    #[test]
    fn conjunctions_and_literals() {
        let p = parse_predicate(r#"activity == "send fine" and cost > -2.5 AND org:group == 'x'"#)
            .unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(
            p.terms[1].condition,
            Condition::Compare(Operator::Gt, Literal::Number(-2.5))
        );
        assert_eq!(
            p.to_string(),
            r#"activity == "send fine" and cost > -2.5 and org:group == "x""#
        );
        assert_eq!(parse_predicate(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse_predicate("cost => 3"),
            Err(PredicateError::UnknownOperator { column: 6, .. })
        ));
        assert!(matches!(
            parse_predicate(""),
            Err(PredicateError::Syntax { .. })
        ));
        assert!(matches!(
            parse_predicate("cost >"),
            Err(PredicateError::Syntax { column: 7, .. })
        ));
        assert!(matches!(
            parse_predicate("cost > 3 or cost < 1"),
            Err(PredicateError::Syntax { column: 10, .. })
        ));
        assert!(parse_predicate("a == \"open").is_err());
        assert!(parse_predicate("timestamp in [2020-01-01 2020-02-01]").is_err());
    }

    #[test]
    fn evaluation() {
        let e = Event::new("e", "c", Some("a"), 1_000)
            .unwrap()
            .with_attribute(COST, 120i64)
            .unwrap();
        let t = |s: &str| parse_predicate(s).unwrap().matches(&e);
        assert!(t("cost >= 100"));
        assert!(!t("cost < 100"));
        assert!(t("cost in [100, 120]"));
        assert!(t("activity == a and cost != 3"));
        assert!(!t("resource == bob"));
        assert!(!t("resource != bob"));
        assert!(t("resource == null"));
        assert!(t("timestamp in [1970-01-01, 1970-01-02]"));
        assert!(t("timestamp < 2000"));
    }

    #[test]
    fn check_against_observed_kinds() {
        let mut kinds = BTreeMap::new();
        kinds.insert("activity", BTreeSet::from([ValueKind::Text]));
        kinds.insert("cost", BTreeSet::from([ValueKind::Real]));
        let p = FilterPredicate::all().with(Term::new(
            "activity",
            Condition::Compare(Operator::Lt, Literal::Number(3.0)),
        ));
        assert!(matches!(
            p.check(&kinds),
            Err(PredicateError::TermType { .. })
        ));
        let p = FilterPredicate::all().with(Term::new(
            "cost",
            Condition::Compare(Operator::Lt, Literal::Text("x".into())),
        ));
        assert!(p.check(&kinds).is_err());
        assert!(parse_predicate("cost >= 3 and activity == x")
            .unwrap()
            .check(&kinds)
            .is_ok());
        assert!(parse_predicate("cost == abc")
            .unwrap()
            .check(&kinds)
            .is_err());
    }
}
