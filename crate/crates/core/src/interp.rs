//! Interpretations between theories.
//!
//! An interpretation sends every `k`-ary source symbol to a target term in
//! context `x_1..x_k` and extends to all source terms by substituting the
//! extended arguments into the image of the head symbol.
//!
//! Interpretation files (`.itp`):
//!
//! ```text
//! source t0.thy
//! target t.thy
//! map l = m(a(b(alpha(x1))),x2)
//! map r = m(b(a(alpha(x1))),x2)
//! map m = m(x1,x2)
//! ```
//!
//! Theory paths are resolved relative to the interpretation file.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rewrite::{bounded_closure, prove_bounded, Derivation, ProofOutcome, SearchBounds, SearchStats};
use crate::rigidity::enumerate_linear_regular;
use crate::syntax::{self, SyntaxError};
use crate::term::{Permutation, Term, TermInContext};
use crate::theory::{split_keyword, strip_comment, Equation, Theory, TheoryError};

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("source symbol `{0}` has no image")]
    MissingImage(String),
    #[error("`{0}` is not a source symbol")]
    UnknownSymbol(String),
    #[error("symbol `{0}` mapped twice")]
    DuplicateImage(String),
    #[error("image of `{symbol}` lives in context {found}, expected {expected}")]
    ImageContext {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("image of `{0}` uses symbols outside the target signature")]
    ForeignImage(String),
    #[error("image of `{0}` is not linear-regular")]
    NotLinearRegular(String),
    #[error("interpretations have different source or target theories")]
    Mismatch,
    #[error("line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: SyntaxError,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("theory `{path}`: {source}")]
    Theory {
        path: String,
        #[source]
        source: TheoryError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    source: Theory,
    target: Theory,
    /// Aligned with the source signature.
    images: Vec<TermInContext>,
    linear_regular: bool,
}

impl Interpretation {
    pub fn new(
        source: Theory,
        target: Theory,
        assignment: Vec<(String, TermInContext)>,
    ) -> Result<Self, InterpError> {
        let sig = source.signature();
        let mut images: Vec<Option<TermInContext>> = vec![None; sig.len()];
        for (name, image) in assignment {
            let pos = sig
                .position(&name)
                .ok_or_else(|| InterpError::UnknownSymbol(name.clone()))?;
            let arity = sig.symbols()[pos].arity();
            if image.context_len() != arity {
                return Err(InterpError::ImageContext {
                    symbol: name,
                    expected: arity,
                    found: image.context_len(),
                });
            }
            if !target.signature().contains_term(image.term()) {
                return Err(InterpError::ForeignImage(name));
            }
            if images[pos].replace(image).is_some() {
                return Err(InterpError::DuplicateImage(name));
            }
        }
        let images = images
            .into_iter()
            .zip(sig.symbols())
            .map(|(img, s)| img.ok_or_else(|| InterpError::MissingImage(s.name().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Interpretation {
            source,
            target,
            images,
            linear_regular: false,
        })
    }

    /// Like [`Interpretation::new`], additionally requiring every image to
    /// be linear-regular.
    pub fn new_linear_regular(
        source: Theory,
        target: Theory,
        assignment: Vec<(String, TermInContext)>,
    ) -> Result<Self, InterpError> {
        let mut i = Interpretation::new(source, target, assignment)?;
        if let Some((s, _)) = i
            .source
            .signature()
            .symbols()
            .iter()
            .zip(&i.images)
            .find(|(_, img)| !img.is_linear_regular())
        {
            return Err(InterpError::NotLinearRegular(s.name().to_string()));
        }
        i.linear_regular = true;
        Ok(i)
    }

    /// The identity interpretation of a theory in itself.
    pub fn identity(th: &Theory) -> Interpretation {
        let assignment = th
            .signature()
            .symbols()
            .iter()
            .map(|s| {
                let args = (1..=s.arity()).map(Term::Var).collect();
                let t = TermInContext::new(Term::app(s, args), s.arity()).expect("vars in context");
                (s.name().to_string(), t)
            })
            .collect();
        Interpretation::new_linear_regular(th.clone(), th.clone(), assignment)
            .expect("identity is well formed")
    }

    pub fn source(&self) -> &Theory {
        &self.source
    }

    pub fn target(&self) -> &Theory {
        &self.target
    }

    pub fn is_declared_linear_regular(&self) -> bool {
        self.linear_regular
    }

    pub fn image(&self, symbol: &str) -> Option<&TermInContext> {
        self.source
            .signature()
            .position(symbol)
            .map(|i| &self.images[i])
    }

    /// `(symbol, image)` pairs in source declaration order.
    pub fn assignment(&self) -> impl Iterator<Item = (&str, &TermInContext)> {
        self.source
            .signature()
            .symbols()
            .iter()
            .map(|s| s.name())
            .zip(&self.images)
    }

    fn extend_term(&self, t: &Term) -> Result<Term, InterpError> {
        match t {
            Term::Var(i) => Ok(Term::Var(*i)),
            Term::App(f, children) => {
                let image = self
                    .source
                    .signature()
                    .position(f.name())
                    .filter(|&p| &self.source.signature().symbols()[p] == f)
                    .map(|p| &self.images[p])
                    .ok_or_else(|| InterpError::UnknownSymbol(f.name().to_string()))?;
                let args = children
                    .iter()
                    .map(|c| self.extend_term(c))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(image.term().instantiate(&args))
            }
        }
    }

    /// The extension to terms: variables are fixed and `f(t_1..t_k)` maps
    /// to the image of `f` with the extended `t_i` substituted for `x_i`.
    pub fn extend(&self, t: &TermInContext) -> Result<TermInContext, InterpError> {
        let term = self.extend_term(t.term())?;
        Ok(TermInContext::new(term, t.context_len()).expect("extension keeps variables"))
    }

    pub fn extend_equation(&self, eq: &Equation) -> Result<Equation, InterpError> {
        Ok(Equation::new(self.extend(eq.lhs())?, self.extend(eq.rhs())?).expect("shared context"))
    }

    /// For each source axiom, a bounded search for its image in the target.
    pub fn check_preserves_axioms(&self, bounds: &SearchBounds) -> Vec<AxiomCheck> {
        self.source
            .axioms()
            .iter()
            .enumerate()
            .map(|(axiom, eq)| {
                let image = self.extend_equation(eq).expect("axioms use source symbols");
                let outcome = prove_bounded(&self.target, &image, bounds);
                AxiomCheck {
                    axiom,
                    image,
                    outcome,
                }
            })
            .collect()
    }

    /// Renders the file format; `source` and `target` are the paths to write
    /// in the header.
    pub fn render(&self, source: &str, target: &str) -> String {
        let mut out = format!("source {source}\ntarget {target}\n");
        for (name, image) in self.assignment() {
            out.push_str(&format!("map {name} = {}\n", image.term()));
        }
        out
    }

    /// Bounded probe for failures of conservativity.
    ///
    /// For every canonical linear-regular source term `s` with at most
    /// `term_size_bound` nodes, the bounded closure of its image in the
    /// target is computed. Every source term `t` of the same size bound and
    /// context (in any variable order) whose image lies in that closure gives
    /// a pair the target proves. The pair is a confirmed failure when the
    /// exact source closure of `s` misses `t`, and a candidate when the
    /// source closure was cut short.
    pub fn probe_conservativity(
        &self,
        term_size_bound: usize,
        bounds: &SearchBounds,
    ) -> ConservativityReport {
        let sources: Vec<TermInContext> =
            enumerate_linear_regular(self.source.signature(), term_size_bound, term_size_bound)
                .collect();
        let mut by_image: HashMap<(usize, Term), Vec<TermInContext>> = HashMap::new();
        let mut per_context: HashMap<usize, usize> = HashMap::new();
        for s in &sources {
            for sigma in Permutation::all(s.context_len()) {
                let t = s.permute(&sigma).expect("permutation matches context");
                let image = self.extend(&t).expect("source symbols only");
                let bucket = by_image
                    .entry((t.context_len(), image.into_term()))
                    .or_default();
                if !bucket.contains(&t) {
                    bucket.push(t);
                    *per_context.entry(s.context_len()).or_default() += 1;
                }
            }
        }
        let probes: Vec<(usize, Vec<ConservativityFailure>, Vec<ConservativityFailure>)> = sources
            .par_iter()
            .map(|s| {
                let image = self.extend(s).expect("source symbols only");
                let target_closure = bounded_closure(&self.target, &image, bounds);
                let mut proved = 0;
                let mut confirmed = Vec::new();
                let mut candidates = Vec::new();
                let mut source_closure = None;
                for member in target_closure.terms() {
                    let Some(bucket) = by_image.get(&(s.context_len(), member.clone())) else {
                        continue;
                    };
                    for t in bucket {
                        if t == s {
                            continue;
                        }
                        proved += 1;
                        let sc = source_closure.get_or_insert_with(|| bounded_closure(&self.source, s, bounds));
                        if sc.contains(t.term()) {
                            continue;
                        }
                        let failure = ConservativityFailure {
                            lhs: s.clone(),
                            rhs: t.clone(),
                            target_derivation: target_closure
                                .derivation_to(member)
                                .expect("member of closure"),
                            source_search: *sc.stats(),
                            source_complete: sc.is_complete(),
                        };
                        if sc.is_exact() {
                            confirmed.push(failure);
                        } else {
                            candidates.push(failure);
                        }
                    }
                }
                (proved, confirmed, candidates)
            })
            .collect();
        let mut report = ConservativityReport {
            term_size_bound,
            bounds: *bounds,
            source_terms: sources.len(),
            pairs_examined: sources
                .iter()
                .map(|s| per_context.get(&s.context_len()).copied().unwrap_or(1) - 1)
                .sum(),
            target_proved: 0,
            confirmed: Vec::new(),
            candidates: Vec::new(),
        };
        for (proved, confirmed, candidates) in probes {
            report.target_proved += proved;
            report.confirmed.extend(confirmed);
            report.candidates.extend(candidates);
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: usize,
    pub image: Equation,
    pub outcome: ProofOutcome,
}

/// A source equation whose image the target proves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservativityFailure {
    pub lhs: TermInContext,
    pub rhs: TermInContext,
    pub target_derivation: Derivation,
    pub source_search: SearchStats,
    pub source_complete: bool,
}

impl ConservativityFailure {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "context": self.lhs.context_len(),
            "lhs": self.lhs.term().to_string(),
            "rhs": self.rhs.term().to_string(),
            "target_derivation": self.target_derivation.to_json(),
            "source_search": self.source_search,
            "source_complete": self.source_complete,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConservativityReport {
    pub term_size_bound: usize,
    pub bounds: SearchBounds,
    /// Canonical source terms whose images were searched from.
    pub source_terms: usize,
    /// Pairs `(s, t)` with `s` canonical, `t` any source term of the same
    /// context, `s != t`.
    pub pairs_examined: usize,
    /// Pairs whose image the target proved within bounds.
    pub target_proved: usize,
    #[serde(skip)]
    pub confirmed: Vec<ConservativityFailure>,
    #[serde(skip)]
    pub candidates: Vec<ConservativityFailure>,
}

impl ConservativityReport {
    pub fn contains_confirmed(&self, lhs: &Term, rhs: &Term) -> bool {
        self.confirmed
            .iter()
            .any(|f| f.lhs.term() == lhs && f.rhs.term() == rhs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["confirmed"] = self.confirmed.iter().map(|f| f.to_json()).collect();
        v["candidates"] = self.candidates.iter().map(|f| f.to_json()).collect();
        v
    }
}

/// Per-symbol bounded check that two interpretations agree up to
/// provability in the target.
pub fn interpretations_equal(
    i1: &Interpretation,
    i2: &Interpretation,
    bounds: &SearchBounds,
) -> Result<Vec<(String, ProofOutcome)>, InterpError> {
    if i1.source != i2.source || i1.target != i2.target {
        return Err(InterpError::Mismatch);
    }
    Ok(i1
        .assignment()
        .zip(i2.assignment())
        .map(|((name, a), (_, b))| {
            let eq = Equation::new(a.clone(), b.clone()).expect("images share arity");
            (name.to_string(), prove_bounded(&i1.target, &eq, bounds))
        })
        .collect())
}

/// Parses an interpretation file, loading the named theories through
/// `load`.
pub fn parse_interpretation(
    text: &str,
    mut load: impl FnMut(&str) -> Result<Theory, InterpError>,
) -> Result<Interpretation, InterpError> {
    let mut source = None;
    let mut target = None;
    let mut maps: Vec<(usize, &str, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = strip_comment(raw);
        let Some((keyword, rest, offset)) = split_keyword(body) else {
            continue;
        };
        match keyword {
            "source" | "target" => {
                let path = rest.trim();
                if path.is_empty() {
                    return Err(InterpError::Malformed {
                        line,
                        message: format!("`{keyword}` needs a theory path"),
                    });
                }
                let th = load(path)?;
                let slot = if keyword == "source" { &mut source } else { &mut target };
                if slot.replace(th).is_some() {
                    return Err(InterpError::Malformed {
                        line,
                        message: format!("`{keyword}` given twice"),
                    });
                }
            }
            "map" => maps.push((line, rest, offset)),
            other => {
                return Err(InterpError::Malformed {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let source = source.ok_or(InterpError::Malformed {
        line: 0,
        message: "missing `source` line".into(),
    })?;
    let target = target.ok_or(InterpError::Malformed {
        line: 0,
        message: "missing `target` line".into(),
    })?;
    let mut assignment = Vec::new();
    for (line, rest, offset) in maps {
        let Some((name, term_text)) = rest.split_once('=') else {
            return Err(InterpError::Malformed {
                line,
                message: "expected `map <symbol> = <term>`".into(),
            });
        };
        let name = name.trim();
        let symbol = source
            .symbol(name)
            .ok_or_else(|| InterpError::UnknownSymbol(name.to_string()))?;
        let term_offset = offset + rest[..rest.find('=').unwrap() + 1].chars().count();
        let term = syntax::parse_term_at(term_text, target.signature(), term_offset)
            .map_err(|source| InterpError::Syntax { line, source })?;
        let image = TermInContext::new(term, symbol.arity()).map_err(|e| InterpError::Syntax {
            line,
            source: SyntaxError::Term {
                column: term_offset + 1,
                source: e,
            },
        })?;
        assignment.push((name.to_string(), image));
    }
    let lr = assignment.iter().all(|(_, t)| t.is_linear_regular());
    if lr {
        Interpretation::new_linear_regular(source, target, assignment)
    } else {
        Interpretation::new(source, target, assignment)
    }
}

/// Reads an interpretation file and the theories it names.
pub fn load_interpretation(path: &Path) -> Result<Interpretation, InterpError> {
    let text = std::fs::read_to_string(path).map_err(|source| InterpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_interpretation(&text, |name| {
        let p = base.join(name);
        let text = std::fs::read_to_string(&p).map_err(|source| InterpError::Io {
            path: p.display().to_string(),
            source,
        })?;
        Theory::parse(&text).map_err(|source| InterpError::Theory {
            path: p.display().to_string(),
            source,
        })
    })
}
