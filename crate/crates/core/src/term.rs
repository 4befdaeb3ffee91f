//! Terms in context, positional variables and simple substitutions.
//!
//! Variables are positional: `Var(i)` stands for `x_i` with `i >= 1`. A
//! [`TermInContext`] pairs a term with the length `n` of its context
//! `x_1, ..., x_n`; variables of the context need not occur in the term.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("variable x{index} lies outside a context of length {context_len}")]
    VarOutOfContext { index: usize, context_len: usize },
    #[error("symbol `{name}` has arity {expected} but was given {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("map expects a context of length {expected}, term has context of length {found}")]
    ContextMismatch { expected: usize, found: usize },
    #[error("image {image} lies outside the codomain (1..={codomain_len})")]
    ImageOutOfRange { image: usize, codomain_len: usize },
    #[error("{0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),
    #[error("argument list has {found} entries, context has length {expected}")]
    ArgumentCount { expected: usize, found: usize },
    #[error("argument lives in context {other}, expected {first}")]
    MixedArgumentContexts { first: usize, other: usize },
}

/// A function symbol with a fixed arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A first-order term over positional variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(index: usize) -> Term {
        assert!(index >= 1, "variables are numbered from 1");
        Term::Var(index)
    }

    /// Builds an application. Panics if the argument count is wrong; use
    /// [`Term::try_app`] for unchecked input.
    pub fn app(symbol: &Symbol, children: Vec<Term>) -> Term {
        Term::try_app(symbol, children).expect("arity mismatch")
    }

    pub fn try_app(symbol: &Symbol, children: Vec<Term>) -> Result<Term, TermError> {
        if children.len() != symbol.arity() {
            return Err(TermError::ArityMismatch {
                name: symbol.name().to_string(),
                expected: symbol.arity(),
                found: children.len(),
            });
        }
        Ok(Term::App(symbol.clone(), children))
    }

    /// Number of nodes, variables included.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, children) => 1 + children.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, children) => 1 + children.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Variable indices in left-to-right order, with multiplicity.
    pub fn var_occurrences(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Var(i) => out.push(*i),
            Term::App(_, children) => children.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            Term::Var(i) => *i,
            Term::App(_, children) => children.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    pub fn count_symbol(&self, name: &str) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(sym, children) => {
                usize::from(sym.name() == name)
                    + children.iter().map(|c| c.count_symbol(name)).sum::<usize>()
            }
        }
    }

    pub fn symbols(&self) -> Vec<&Symbol> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a Symbol>) {
        if let Term::App(sym, children) = self {
            out.push(sym);
            children.iter().for_each(|c| c.collect_symbols(out));
        }
    }

    pub fn subterm_at(&self, position: &[usize]) -> Option<&Term> {
        let mut current = self;
        for &idx in position {
            match current {
                Term::App(_, children) => current = children.get(idx)?,
                Term::Var(_) => return None,
            }
        }
        Some(current)
    }

    /// Returns a copy with the subterm at `position` replaced.
    pub fn replace_at(&self, position: &[usize], replacement: Term) -> Option<Term> {
        match position.split_first() {
            None => Some(replacement),
            Some((&idx, rest)) => match self {
                Term::Var(_) => None,
                Term::App(sym, children) => {
                    let child = children.get(idx)?.replace_at(rest, replacement)?;
                    let mut children = children.clone();
                    children[idx] = child;
                    Some(Term::App(sym.clone(), children))
                }
            },
        }
    }

    /// All positions in pre-order, root first.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        if let Term::App(_, children) = self {
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                c.collect_positions(path, out);
                path.pop();
            }
        }
    }

    /// Replaces every `Var(i)` by `f(i)`.
    pub fn map_vars(&self, f: &impl Fn(usize) -> Term) -> Term {
        match self {
            Term::Var(i) => f(*i),
            Term::App(sym, children) => {
                Term::App(sym.clone(), children.iter().map(|c| c.map_vars(f)).collect())
            }
        }
    }

    /// Simultaneous substitution of `args[i - 1]` for `x_i`. Variables
    /// beyond `args` are left in place.
    pub fn instantiate(&self, args: &[Term]) -> Term {
        self.map_vars(&|i| args.get(i - 1).cloned().unwrap_or(Term::Var(i)))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(sym, children) => {
                write!(f, "{}(", sym.name())?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A term together with the length of its context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermInContext {
    term: Term,
    context_len: usize,
}

impl TermInContext {
    pub fn new(term: Term, context_len: usize) -> Result<Self, TermError> {
        if let Some(index) = term
            .var_occurrences()
            .into_iter()
            .find(|&i| i == 0 || i > context_len)
        {
            return Err(TermError::VarOutOfContext { index, context_len });
        }
        Ok(TermInContext { term, context_len })
    }

    /// Context made of exactly the variables up to the largest one used.
    pub fn minimal(term: Term) -> Self {
        let context_len = term.max_var();
        TermInContext { term, context_len }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn into_term(self) -> Term {
        self.term
    }

    pub fn context_len(&self) -> usize {
        self.context_len
    }

    pub fn size(&self) -> usize {
        self.term.size()
    }

    pub fn var_occurrences(&self) -> Vec<usize> {
        self.term.var_occurrences()
    }

    /// Every context variable occurs exactly once.
    pub fn is_linear_regular(&self) -> bool {
        let occ = self.var_occurrences();
        if occ.len() != self.context_len {
            return false;
        }
        let mut seen = vec![false; self.context_len + 1];
        for i in occ {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    /// Simple substitution along `phi`: each `x_i` becomes `x_{phi(i)}`.
    pub fn substitute_simple(&self, phi: &VarMap) -> Result<TermInContext, TermError> {
        if phi.domain_len() != self.context_len {
            return Err(TermError::ContextMismatch {
                expected: phi.domain_len(),
                found: self.context_len,
            });
        }
        Ok(TermInContext {
            term: self.term.map_vars(&|i| Term::Var(phi.apply(i))),
            context_len: phi.codomain_len(),
        })
    }

    pub fn permute(&self, sigma: &Permutation) -> Result<TermInContext, TermError> {
        self.substitute_simple(sigma.as_var_map())
    }

    /// Simultaneous substitution of `args[i - 1]` for `x_i`. Every argument
    /// must live in `context_len`, which becomes the context of the result.
    pub fn substitute_terms(
        &self,
        args: &[TermInContext],
        context_len: usize,
    ) -> Result<TermInContext, TermError> {
        if args.len() != self.context_len {
            return Err(TermError::ArgumentCount {
                expected: self.context_len,
                found: args.len(),
            });
        }
        if let Some(other) = args.iter().find(|a| a.context_len != context_len) {
            return Err(TermError::MixedArgumentContexts {
                first: context_len,
                other: other.context_len,
            });
        }
        let plain: Vec<Term> = args.iter().map(|a| a.term.clone()).collect();
        Ok(TermInContext {
            term: self.term.instantiate(&plain),
            context_len,
        })
    }

    /// The identity argument list `x_1, ..., x_n` in context `n`.
    pub fn identity_args(n: usize) -> Vec<TermInContext> {
        (1..=n)
            .map(|i| TermInContext {
                term: Term::Var(i),
                context_len: n,
            })
            .collect()
    }
}

impl fmt::Display for TermInContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.context_len, self.term)
    }
}

/// A total function `(n] -> (k]` on variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarMap {
    codomain_len: usize,
    images: Vec<usize>,
}

impl VarMap {
    pub fn new(images: Vec<usize>, codomain_len: usize) -> Result<Self, TermError> {
        if let Some(&image) = images.iter().find(|&&i| i == 0 || i > codomain_len) {
            return Err(TermError::ImageOutOfRange {
                image,
                codomain_len,
            });
        }
        Ok(VarMap {
            codomain_len,
            images,
        })
    }

    pub fn identity(n: usize) -> Self {
        VarMap {
            codomain_len: n,
            images: (1..=n).collect(),
        }
    }

    pub fn domain_len(&self) -> usize {
        self.images.len()
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain_len
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &VarMap) -> Result<VarMap, TermError> {
        if inner.codomain_len != self.domain_len() {
            return Err(TermError::ContextMismatch {
                expected: self.domain_len(),
                found: inner.codomain_len,
            });
        }
        Ok(VarMap {
            codomain_len: self.codomain_len,
            images: inner.images.iter().map(|&i| self.apply(i)).collect(),
        })
    }
}

/// A bijection on `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: VarMap,
}

impl PartialOrd for VarMap {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VarMap {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.codomain_len, &self.images).cmp(&(other.codomain_len, &other.images))
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, TermError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &i in &images {
            if i == 0 || i > n || seen[i] {
                return Err(TermError::NotAPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Permutation {
            map: VarMap {
                codomain_len: n,
                images,
            },
        })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: VarMap::identity(n),
        }
    }

    /// Swaps `i` and `j` in `1..=n`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(i - 1, j - 1);
        Permutation::new(images).expect("transposition indices out of range")
    }

    /// All permutations of `1..=n` in lexicographic order of image lists.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        use itertools::Itertools;
        (1..=n).permutations(n).map(move |images| Permutation {
            map: VarMap {
                codomain_len: n,
                images,
            },
        })
    }

    pub fn size(&self) -> usize {
        self.map.domain_len()
    }

    pub fn images(&self) -> &[usize] {
        self.map.images()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map.apply(i)
    }

    pub fn is_identity(&self) -> bool {
        self.images().iter().enumerate().all(|(k, &i)| i == k + 1)
    }

    pub fn as_var_map(&self) -> &VarMap {
        &self.map
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Permutation) -> Result<Permutation, TermError> {
        Ok(Permutation {
            map: self.map.compose(&inner.map)?,
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.size()];
        for (k, &i) in self.images().iter().enumerate() {
            images[i - 1] = k + 1;
        }
        Permutation {
            map: VarMap {
                codomain_len: self.size(),
                images,
            },
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.images().iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}
