//! Concrete syntax for terms and equations.
//!
//! ```text
//! term     ::= var | name "(" [ term { "," term } ] ")"
//! var      ::= "x" digits
//! equation ::= [ "[" digits "]" ] term "=" term
//! ```
//!
//! Whitespace is insignificant. Columns in errors are 1-based and counted in
//! characters.

use thiserror::Error;

use crate::term::{Term, TermError, TermInContext};
use crate::theory::{Equation, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("column {column}: {message}")]
    Malformed { column: usize, message: String },
    #[error("column {column}: unknown symbol `{name}`")]
    UnknownSymbol { column: usize, name: String },
    #[error("column {column}: {source}")]
    Term {
        column: usize,
        #[source]
        source: TermError,
    },
}

impl SyntaxError {
    pub fn column(&self) -> usize {
        match self {
            SyntaxError::Malformed { column, .. }
            | SyntaxError::UnknownSymbol { column, .. }
            | SyntaxError::Term { column, .. } => *column,
        }
    }

    fn shifted(self, by: usize) -> SyntaxError {
        match self {
            SyntaxError::Malformed { column, message } => SyntaxError::Malformed {
                column: column + by,
                message,
            },
            SyntaxError::UnknownSymbol { column, name } => SyntaxError::UnknownSymbol {
                column: column + by,
                name,
            },
            SyntaxError::Term { column, source } => SyntaxError::Term {
                column: column + by,
                source,
            },
        }
    }
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    sig: &'a Signature,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

impl<'a> Cursor<'a> {
    fn new(text: &str, sig: &'a Signature) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            sig,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn malformed(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::Malformed {
            column: self.column(),
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += 1;
                Ok(())
            }
            Some(found) => Err(self.malformed(format!("expected `{c}`, found `{found}`"))),
            None => Err(self.malformed(format!("expected `{c}`, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|&c| is_ident_char(c)) {
                    self.pos += 1;
                }
                Ok(self.chars[start..self.pos].iter().collect())
            }
            Some(c) => Err(self.malformed(format!("expected a term, found `{c}`"))),
            None => Err(self.malformed("expected a term, found end of input")),
        }
    }

    fn number(&mut self) -> Result<usize, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| SyntaxError::Malformed {
            column: start + 1,
            message: "expected a number".into(),
        })
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        self.skip_ws();
        let column = self.column();
        let name = self.ident()?;
        if self.peek() != Some('(') {
            return match var_index(&name) {
                Some(0) => Err(SyntaxError::Malformed {
                    column,
                    message: "variables are numbered from x1".into(),
                }),
                Some(i) => Ok(Term::Var(i)),
                None => Err(SyntaxError::Malformed {
                    column,
                    message: format!("`{name}` is not a variable; applications need `(...)`"),
                }),
            };
        }
        self.pos += 1;
        let mut children = Vec::new();
        if self.peek() == Some(')') {
            self.pos += 1;
        } else {
            loop {
                children.push(self.term()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(self.malformed(format!("expected `,` or `)`, found `{c}`"))),
                    None => return Err(self.malformed("unclosed `(`")),
                }
            }
        }
        let symbol = self
            .sig
            .get(&name)
            .ok_or_else(|| SyntaxError::UnknownSymbol {
                column,
                name: name.clone(),
            })?;
        Term::try_app(symbol, children).map_err(|source| SyntaxError::Term { column, source })
    }

    fn finish(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.malformed(format!("unexpected `{c}` after term"))),
        }
    }
}

fn var_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses a bare term against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(text, sig);
    let t = cur.term()?;
    cur.finish()?;
    Ok(t)
}

/// Parses a term and places it in a context of length `context_len`.
pub fn parse_term_in_context(
    text: &str,
    sig: &Signature,
    context_len: usize,
) -> Result<TermInContext, SyntaxError> {
    let t = parse_term(text, sig)?;
    TermInContext::new(t, context_len).map_err(|source| SyntaxError::Term { column: 1, source })
}

/// Parses `[n] lhs = rhs`. Without the `[n]` prefix the context is the
/// largest variable index used on either side.
pub fn parse_equation(text: &str, sig: &Signature) -> Result<Equation, SyntaxError> {
    let mut cur = Cursor::new(text, sig);
    let declared = if cur.peek() == Some('[') {
        cur.pos += 1;
        let n = cur.number()?;
        cur.expect(']')?;
        Some(n)
    } else {
        None
    };
    let lhs_col = {
        cur.skip_ws();
        cur.column()
    };
    let lhs = cur.term()?;
    cur.expect('=')?;
    let rhs_col = {
        cur.skip_ws();
        cur.column()
    };
    let rhs = cur.term()?;
    cur.finish()?;
    let n = declared.unwrap_or_else(|| lhs.max_var().max(rhs.max_var()));
    let lhs = TermInContext::new(lhs, n).map_err(|source| SyntaxError::Term {
        column: lhs_col,
        source,
    })?;
    let rhs = TermInContext::new(rhs, n).map_err(|source| SyntaxError::Term {
        column: rhs_col,
        source,
    })?;
    Ok(Equation::new(lhs, rhs).expect("both sides share the parsed context"))
}

/// Like [`parse_equation`], with columns reported relative to an enclosing
/// line where the equation starts at `offset` characters.
pub(crate) fn parse_equation_at(
    text: &str,
    sig: &Signature,
    offset: usize,
) -> Result<Equation, SyntaxError> {
    parse_equation(text, sig).map_err(|e| e.shifted(offset))
}

pub(crate) fn parse_term_at(
    text: &str,
    sig: &Signature,
    offset: usize,
) -> Result<Term, SyntaxError> {
    parse_term(text, sig).map_err(|e| e.shifted(offset))
}
