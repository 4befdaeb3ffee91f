//! Equational theories: a ranked signature plus an ordered list of axioms.
//!
//! Theory files are line oriented:
//!
//! ```text
//! # T0
//! symbol l 2
//! symbol r 2
//! symbol m 2
//! axiom [2] l(x1,x2) = r(x2,x1)
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{self, SyntaxError};
use crate::term::{Symbol, Term, TermInContext};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("symbol name must not be empty")]
    EmptySymbolName,
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("axiom {axiom}: symbol {symbol} is not in the signature")]
    ForeignSymbol { axiom: usize, symbol: String },
    #[error("equation sides live in contexts {lhs} and {rhs}")]
    ContextMismatch { lhs: usize, rhs: usize },
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: SyntaxError,
    },
    #[error("line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
}

impl TheoryError {
    /// Line and column of a parse error, when known.
    pub fn location(&self) -> Option<(usize, usize)> {
        match self {
            TheoryError::Syntax { line, source } => Some((*line, source.column())),
            TheoryError::Malformed { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }
}

/// Symbols in declaration order, looked up by name.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
    index: HashMap<String, usize>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Signature {}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, TheoryError> {
        let mut sig = Signature::default();
        for s in symbols {
            sig.push(s)?;
        }
        Ok(sig)
    }

    pub fn push(&mut self, symbol: Symbol) -> Result<(), TheoryError> {
        if symbol.name().is_empty() {
            return Err(TheoryError::EmptySymbolName);
        }
        if self.index.contains_key(symbol.name()) {
            return Err(TheoryError::DuplicateSymbol(symbol.name().to_string()));
        }
        self.index.insert(symbol.name().to_string(), self.symbols.len());
        self.symbols.push(symbol);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.index.get(name).map(|&i| &self.symbols[i])
    }

    /// Declaration index of a symbol, used for canonical orderings.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.get(symbol.name()) == Some(symbol)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains_term(&self, t: &Term) -> bool {
        t.symbols().into_iter().all(|s| self.contains(s))
    }
}

/// An equation in context `lhs = rhs : x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    lhs: TermInContext,
    rhs: TermInContext,
}

impl Equation {
    pub fn new(lhs: TermInContext, rhs: TermInContext) -> Result<Self, TheoryError> {
        if lhs.context_len() != rhs.context_len() {
            return Err(TheoryError::ContextMismatch {
                lhs: lhs.context_len(),
                rhs: rhs.context_len(),
            });
        }
        Ok(Equation { lhs, rhs })
    }

    pub fn lhs(&self) -> &TermInContext {
        &self.lhs
    }

    pub fn rhs(&self) -> &TermInContext {
        &self.rhs
    }

    pub fn context_len(&self) -> usize {
        self.lhs.context_len()
    }

    pub fn is_linear_regular(&self) -> bool {
        self.lhs.is_linear_regular() && self.rhs.is_linear_regular()
    }

    pub fn flipped(&self) -> Equation {
        Equation {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} = {}",
            self.context_len(),
            self.lhs.term(),
            self.rhs.term()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    signature: Signature,
    axioms: Vec<Equation>,
}

impl Theory {
    pub fn new(signature: Signature, axioms: Vec<Equation>) -> Result<Self, TheoryError> {
        for (i, ax) in axioms.iter().enumerate() {
            for side in [ax.lhs(), ax.rhs()] {
                if let Some(s) = side
                    .term()
                    .symbols()
                    .into_iter()
                    .find(|s| !signature.contains(s))
                {
                    return Err(TheoryError::ForeignSymbol {
                        axiom: i,
                        symbol: s.to_string(),
                    });
                }
            }
        }
        Ok(Theory { signature, axioms })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn axioms(&self) -> &[Equation] {
        &self.axioms
    }

    pub fn axiom(&self, index: usize) -> Option<&Equation> {
        self.axioms.get(index)
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.signature.get(name)
    }

    /// Indices of axioms with a side that is not linear-regular.
    pub fn validate_linear_regular(&self) -> Vec<usize> {
        self.axioms
            .iter()
            .enumerate()
            .filter(|(_, ax)| !ax.is_linear_regular())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn parse(text: &str) -> Result<Theory, TheoryError> {
        parse_theory(text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in self.signature.symbols() {
            out.push_str(&format!("symbol {} {}\n", s.name(), s.arity()));
        }
        for ax in &self.axioms {
            out.push_str(&format!("axiom {ax}\n"));
        }
        out
    }
}

/// Strips a `#` comment and returns the remaining text.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits off the first whitespace-delimited word. Returns the word, the
/// rest, and the character offset where the rest begins.
pub(crate) fn split_keyword(line: &str) -> Option<(&str, &str, usize)> {
    let trimmed = line.trim_start();
    let lead = line.len() - trimmed.len();
    let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
    if end == 0 {
        return None;
    }
    let rest = &trimmed[end..];
    let offset = line[..lead + end].chars().count();
    Some((&trimmed[..end], rest, offset))
}

/// Parses a theory file. Symbols may be declared anywhere in the file;
/// axioms keep their file order and are indexed from 0.
pub fn parse_theory(text: &str) -> Result<Theory, TheoryError> {
    let mut signature = Signature::default();
    let mut axiom_lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = strip_comment(raw);
        let Some((keyword, rest, offset)) = split_keyword(body) else {
            continue;
        };
        match keyword {
            "symbol" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let malformed = |message: &str| TheoryError::Malformed {
                    line,
                    column: offset + 2,
                    message: message.to_string(),
                };
                if parts.len() != 2 {
                    return Err(malformed("expected `symbol <name> <arity>`"));
                }
                let name = parts[0];
                if !name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
                {
                    return Err(malformed(&format!("`{name}` is not a valid symbol name")));
                }
                let arity: usize = parts[1]
                    .parse()
                    .map_err(|_| malformed(&format!("`{}` is not an arity", parts[1])))?;
                signature
                    .push(Symbol::new(name, arity))
                    .map_err(|e| malformed(&e.to_string()))?;
            }
            "axiom" => axiom_lines.push((line, rest, offset)),
            other => {
                return Err(TheoryError::Malformed {
                    line,
                    column: 1 + body.len() - body.trim_start().len(),
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let mut axioms = Vec::with_capacity(axiom_lines.len());
    for (line, rest, offset) in axiom_lines {
        let eq = syntax::parse_equation_at(rest, &signature, offset)
            .map_err(|source| TheoryError::Syntax { line, source })?;
        axioms.push(eq);
    }
    Theory::new(signature, axioms)
}
