//! Recursive-descent evaluator for the registry expression grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' UINT)?
//! atom  := UINT | NAME | '(' expr ')'
//! ```
//!
//! `n` is the limit variable; every other name is looked up in the
//! [`ParamAssignment`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{parse_rat, rat_to_string, ExactError, Rat, RatFunc};

/// Values for the family parameters `a`, `b`, `zr`, `zi`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, String>",
    into = "BTreeMap<String, String>"
)]
pub struct ParamAssignment(BTreeMap<String, Rat>);

impl ParamAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Rat) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: Rat) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        self.0.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rat)> {
        self.0.iter()
    }

    /// Parses `name=p/q`.
    pub fn parse_binding(s: &str) -> Result<(String, Rat), ExactError> {
        let (k, v) = s.split_once('=').ok_or_else(|| ExactError::Syntax {
            pos: 0,
            msg: format!("expected name=value, got `{s}`"),
        })?;
        Ok((k.trim().to_string(), parse_rat(v)?))
    }
}

impl TryFrom<BTreeMap<String, String>> for ParamAssignment {
    type Error = ExactError;
    fn try_from(m: BTreeMap<String, String>) -> Result<Self, ExactError> {
        m.into_iter()
            .map(|(k, v)| Ok((k, parse_rat(&v)?)))
            .collect::<Result<_, _>>()
            .map(ParamAssignment)
    }
}

impl From<ParamAssignment> for BTreeMap<String, String> {
    fn from(p: ParamAssignment) -> Self {
        p.0.into_iter()
            .map(|(k, v)| (k, rat_to_string(&v)))
            .collect()
    }
}

impl fmt::Display for ParamAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExactError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(s.parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Name(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExactError::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    params: &'a ParamAssignment,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.at) {
            Some((_, Tok::Op(c))) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<RatFunc, ExactError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.at += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc, ExactError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.at += 1;
            let pos = self.pos();
            let rhs = self.unary()?;
            acc = if op == '*' {
                &acc * &rhs
            } else {
                acc.checked_div(&rhs)
                    .map_err(|_| ExactError::DivisionByZero { pos })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc, ExactError> {
        if self.peek_op() == Some('-') {
            self.at += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFunc, ExactError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.at += 1;
            let pos = self.pos();
            match self.toks.get(self.at) {
                Some((_, Tok::Num(e))) => {
                    let e: u32 = e.try_into().map_err(|_| ExactError::Syntax {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    self.at += 1;
                    return Ok(base.pow(e));
                }
                _ => {
                    return Err(ExactError::Syntax {
                        pos,
                        msg: "`^` needs a nonnegative integer exponent".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc, ExactError> {
        let pos = self.pos();
        let tok = self.toks.get(self.at).cloned();
        self.at += 1;
        match tok {
            Some((_, Tok::Num(v))) => Ok(RatFunc::constant(Rat::from_integer(v))),
            Some((_, Tok::Name(name))) => {
                if name == "n" {
                    Ok(RatFunc::var())
                } else {
                    self.params
                        .get(&name)
                        .map(|v| RatFunc::constant(v.clone()))
                        .ok_or(ExactError::UnboundParameter { name, pos })
                }
            }
            Some((_, Tok::Op('('))) => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(ExactError::Syntax {
                        pos: self.pos(),
                        msg: "expected `)`".into(),
                    });
                }
                self.at += 1;
                Ok(inner)
            }
            Some((_, t)) => Err(ExactError::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(ExactError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses and evaluates `text` to a canonical rational function in `n`.
pub fn parse_expr(text: &str, params: &ParamAssignment) -> Result<RatFunc, ExactError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.chars().count(),
        params,
    };
    let v = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ExactError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(v)
}

/// Like [`parse_expr`] but rejects any dependence on `n`.
pub fn parse_constant(text: &str, params: &ParamAssignment) -> Result<Rat, ExactError> {
    parse_expr(text, params)?
        .constant_value()
        .ok_or_else(|| ExactError::NotConstant(text.to_string()))
}
