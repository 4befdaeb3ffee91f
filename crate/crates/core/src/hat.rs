//! Normalizing terms of a compiled theory onto special terms.
//!
//! Special terms are the images of `T0` terms under the reduction's
//! interpretation, i.e. the terms generated by
//!
//! ```text
//! s ::= x_i | m(u(alpha(s)), s) | m(v(alpha(s)), s) | m(s, s)
//! ```
//!
//! with `u, v` the goal words. The hat map sends every term to a special
//! term:
//!
//! 1. a variable is kept;
//! 2. a unary generator or `alpha` on top is stripped;
//! 3. `m(w(alpha(t1)), t2)` with `u ~ w` becomes `m(u(alpha(^t1)), ^t2)`;
//! 4. otherwise, if `v ~ w` and not `u ~ v`, it becomes `m(v(alpha(^t1)), ^t2)`;
//! 5. anything else headed by `m` becomes `m(^t1, ^t2)`.
//!
//! Word equivalence is undecidable in general, so it is asked of a
//! [`WordOracle`]. An `Unknown` answer that the chosen clause depends on is
//! reported as a warning; the result is then still special but may differ
//! from the exact hat.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::reduction::{
    compile_reduction, word_semidecide_in, word_term, ReductionError, Word,
    WordOutcome, WordProblemInstance, ALPHA, MUL,
};
use crate::rewrite::{prove_bounded, Derivation, ProofOutcome, SearchBounds};
use crate::term::{Term, TermInContext};
use crate::theory::{Equation, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HatError {
    #[error("symbol `{0}` does not belong to the compiled theory")]
    ForeignSymbol(String),
    #[error("derivation does not replay in the compiled theory")]
    InvalidDerivation,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Answers word equivalence questions `w1 ~ w2` for one instance.
pub trait WordOracle: Sync {
    fn equivalent(&self, w1: &Word, w2: &Word) -> WordOutcome;
}

/// Bounded proof search in the compiled theory, memoized per word pair.
pub struct BoundedWordOracle {
    inst: WordProblemInstance,
    theory: Theory,
    bounds: SearchBounds,
    cache: Mutex<HashMap<(Word, Word), WordOutcome>>,
}

impl BoundedWordOracle {
    pub fn new(inst: &WordProblemInstance, bounds: SearchBounds) -> Self {
        BoundedWordOracle {
            inst: inst.clone(),
            theory: compile_reduction(inst),
            bounds,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn bounds(&self) -> &SearchBounds {
        &self.bounds
    }
}

impl WordOracle for BoundedWordOracle {
    fn equivalent(&self, w1: &Word, w2: &Word) -> WordOutcome {
        let key = (w1.clone(), w2.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let answer = word_semidecide_in(&self.theory, &self.inst, w1, w2, &self.bounds)
            .expect("words come from the compiled signature");
        self.cache.lock().unwrap().insert(key, answer.clone());
        answer
    }
}

/// Which hat clause fired at an `m` node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HatClause {
    /// `w ~ u`: rewritten to the left goal word.
    LeftGoal,
    /// `w ~ v` and not `u ~ v`: rewritten to the right goal word.
    RightGoal,
    /// Neither applied (or no literal `alpha` under a generator chain).
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleQuery {
    pub left: Word,
    pub right: Word,
    pub answer: WordOutcome,
}

/// The oracle consultation behind one `m(w(alpha(..)), ..)` node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HatDecision {
    /// Position of the `m` node in the input term.
    pub position: Vec<usize>,
    pub word: Word,
    pub clause: HatClause,
    pub queries: Vec<OracleQuery>,
    /// Set when the clause chosen rests on an `Unknown` answer.
    pub uncertain: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatResult {
    pub term: TermInContext,
    pub decisions: Vec<HatDecision>,
}

impl HatResult {
    pub fn warnings(&self) -> impl Iterator<Item = &HatDecision> {
        self.decisions.iter().filter(|d| d.uncertain)
    }

    pub fn has_warnings(&self) -> bool {
        self.warnings().next().is_some()
    }
}

/// Result of checking that hat respects one derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CongruenceCheck {
    /// The hats are provably equal; the derivation is attached.
    Found {
        start: TermInContext,
        end: TermInContext,
        derivation: Derivation,
    },
    /// No proof of the hats' equality within the bounds.
    NotFound {
        start: TermInContext,
        end: TermInContext,
        outcome: ProofOutcome,
    },
    /// Some hat decision rested on an `Unknown` oracle answer.
    OracleUncertain { start: HatResult, end: HatResult },
}

impl CongruenceCheck {
    pub fn is_found(&self) -> bool {
        matches!(self, CongruenceCheck::Found { .. })
    }
}

/// Hat and the related checks for one instance.
pub struct HatNormalizer<'a> {
    inst: &'a WordProblemInstance,
    theory: Theory,
    oracle: &'a dyn WordOracle,
}

/// Splits `m(w(alpha(t1)), t2)` into `(w, t1, t2)`.
fn goal_shape<'t>(inst: &WordProblemInstance, first: &'t Term) -> Option<(Word, &'t Term)> {
    let mut letters = Vec::new();
    let mut current = first;
    loop {
        let Term::App(f, cs) = current else {
            return None;
        };
        if f.arity() != 1 {
            return None;
        }
        if f.name() == ALPHA {
            return Some((Word(letters), &cs[0]));
        }
        letters.push(inst.alphabet().iter().position(|n| n == f.name())?);
        current = &cs[0];
    }
}

impl<'a> HatNormalizer<'a> {
    pub fn new(inst: &'a WordProblemInstance, oracle: &'a dyn WordOracle) -> Self {
        HatNormalizer {
            inst,
            theory: compile_reduction(inst),
            oracle,
        }
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn hat(&self, t: &TermInContext) -> Result<HatResult, HatError> {
        if let Some(s) = t
            .term()
            .symbols()
            .into_iter()
            .find(|s| !self.theory.signature().contains(s))
        {
            return Err(HatError::ForeignSymbol(s.to_string()));
        }
        let mut decisions = Vec::new();
        let mut position = Vec::new();
        let term = self.hat_term(t.term(), &mut position, &mut decisions);
        Ok(HatResult {
            term: TermInContext::new(term, t.context_len()).expect("variables are kept"),
            decisions,
        })
    }

    fn hat_term(&self, t: &Term, position: &mut Vec<usize>, log: &mut Vec<HatDecision>) -> Term {
        let Term::App(f, cs) = t else {
            return t.clone();
        };
        if f.arity() == 1 {
            position.push(0);
            let out = self.hat_term(&cs[0], position, log);
            position.pop();
            return out;
        }
        debug_assert_eq!(f.name(), MUL);
        let here = position.clone();
        let (clause, inner, depth) = match goal_shape(self.inst, &cs[0]) {
            Some((w, t1)) => {
                let depth = w.len() + 1;
                let decision = self.decide(here.clone(), w);
                let clause = decision.clause;
                log.push(decision);
                (clause, t1, depth)
            }
            None => (HatClause::Plain, &cs[0], 0),
        };
        position.push(0);
        position.extend(std::iter::repeat_n(0, depth));
        let h1 = self.hat_term(inner, position, log);
        position.truncate(here.len());
        position.push(1);
        let h2 = self.hat_term(&cs[1], position, log);
        position.pop();
        let sig = self.theory.signature();
        let first = match clause {
            HatClause::Plain => h1,
            _ => word_term(
                sig,
                self.inst,
                self.goal_word(clause),
                Term::app(sig.get(ALPHA).unwrap(), vec![h1]),
            ),
        };
        Term::app(f, vec![first, h2])
    }

    fn goal_word(&self, clause: HatClause) -> &Word {
        match clause {
            HatClause::RightGoal => &self.inst.goal().1,
            _ => &self.inst.goal().0,
        }
    }

    fn decide(&self, position: Vec<usize>, w: Word) -> HatDecision {
        let (u, v) = self.inst.goal();
        let mut queries = Vec::new();
        let mut ask = |l: &Word, r: &Word| {
            let answer = self.oracle.equivalent(l, r);
            queries.push(OracleQuery {
                left: l.clone(),
                right: r.clone(),
                answer: answer.clone(),
            });
            answer
        };
        let uw = ask(u, &w);
        let (clause, uncertain) = if uw.is_derivable() {
            (HatClause::LeftGoal, false)
        } else {
            let vw = ask(v, &w);
            let uw_unknown = !uw.is_certified_not_derivable();
            match &vw {
                WordOutcome::Derivable { .. } => {
                    let uv = ask(u, v);
                    match &uv {
                        // v ~ w and not u ~ v also rules out u ~ w.
                        WordOutcome::NotDerivable { .. } => (HatClause::RightGoal, false),
                        // u ~ v ~ w: the left clause applies after all.
                        WordOutcome::Derivable { .. } => (HatClause::LeftGoal, false),
                        WordOutcome::Unknown { .. } => (HatClause::Plain, true),
                    }
                }
                WordOutcome::NotDerivable { .. } => (HatClause::Plain, uw_unknown),
                WordOutcome::Unknown { .. } => (HatClause::Plain, true),
            }
        };
        HatDecision {
            position,
            word: w,
            clause,
            queries,
            uncertain,
        }
    }

    /// The `T0` term a special term comes from, or `None` if the term is
    /// not special. When the goal words coincide, `l` is preferred.
    pub fn special_preimage(&self, t: &TermInContext) -> Option<TermInContext> {
        special_preimage(self.inst, t)
    }

    /// Hats both ends of a derivation and searches for a proof that the
    /// hats are equal.
    pub fn check_congruence(
        &self,
        d: &Derivation,
        bounds: &SearchBounds,
    ) -> Result<CongruenceCheck, HatError> {
        if !d.replay(&self.theory) {
            return Err(HatError::InvalidDerivation);
        }
        let start = self.hat(d.start())?;
        let end = self.hat(d.end())?;
        if start.has_warnings() || end.has_warnings() {
            return Ok(CongruenceCheck::OracleUncertain { start, end });
        }
        let goal = Equation::new(start.term.clone(), end.term.clone()).expect("same context");
        Ok(match prove_bounded(&self.theory, &goal, bounds) {
            ProofOutcome::Proved { derivation, .. } => CongruenceCheck::Found {
                start: start.term,
                end: end.term,
                derivation,
            },
            outcome => CongruenceCheck::NotFound {
                start: start.term,
                end: end.term,
                outcome,
            },
        })
    }
}

pub fn special_preimage(inst: &WordProblemInstance, t: &TermInContext) -> Option<TermInContext> {
    let t0 = crate::reduction::build_t0();
    let sig = t0.signature();
    let (u, v) = inst.goal();
    fn walk(
        inst: &WordProblemInstance,
        sig: &crate::theory::Signature,
        u: &Word,
        v: &Word,
        t: &Term,
    ) -> Option<Term> {
        let Term::App(f, cs) = t else {
            return Some(t.clone());
        };
        if f.name() != MUL || f.arity() != 2 {
            return None;
        }
        let second = walk(inst, sig, u, v, &cs[1])?;
        if let Some((w, inner)) = goal_shape(inst, &cs[0]) {
            let head = if &w == u {
                "l"
            } else if &w == v {
                "r"
            } else {
                return None;
            };
            let first = walk(inst, sig, u, v, inner)?;
            return Some(Term::app(sig.get(head).unwrap(), vec![first, second]));
        }
        let first = walk(inst, sig, u, v, &cs[0])?;
        Some(Term::app(sig.get(MUL).unwrap(), vec![first, second]))
    }
    let pre = walk(inst, sig, u, v, t.term())?;
    Some(TermInContext::new(pre, t.context_len()).expect("variables are kept"))
}

pub fn is_special(inst: &WordProblemInstance, t: &TermInContext) -> bool {
    special_preimage(inst, t).is_some()
}
