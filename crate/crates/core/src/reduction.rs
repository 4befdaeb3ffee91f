//! From word problems for monoids to theories.
//!
//! An instance is a finite alphabet `G`, relations `u_i = v_i` and a goal
//! `u = v`. It compiles to the theory `T` with one unary symbol per
//! generator, a unary `alpha` and a binary `m`, and the axioms
//!
//! ```text
//! u_i(x1) = v_i(x1)                              (one per relation)
//! m(u(alpha(x1)), x2) = m(v(alpha(x2)), x1)      (the goal axiom)
//! ```
//!
//! where a word `g_1 ... g_k` encodes as the chain `g_1(...g_k(x))` and the
//! empty word as the bare variable. Along with `T` come the theory
//! `T0 = { l(x1,x2) = r(x2,x1) }` and the interpretation
//! `l ↦ m(u(alpha(x1)),x2)`, `r ↦ m(v(alpha(x1)),x2)`, `m ↦ m(x1,x2)`.
//!
//! Instance files (`.wp`):
//!
//! ```text
//! alphabet a b
//! rel ab = ba
//! goal ab = ba
//! ```

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::interp::Interpretation;
use crate::rewrite::{
    prove_bounded, step_at, Derivation, Direction, NotFoundReason, ProofOutcome, RewriteStep,
    SearchBounds, SearchStats,
};
use crate::rigidity::FlabbyReport;
use crate::term::{Permutation, Symbol, Term, TermInContext};
use crate::theory::{split_keyword, strip_comment, Equation, Signature, Theory};

pub const ALPHA: &str = "alpha";
pub const MUL: &str = "m";
pub const EMPTY_WORD: &str = "eps";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("`{0}` is reserved and cannot name a generator")]
    ReservedName(String),
    #[error("`{0}` is not a valid generator name")]
    InvalidName(String),
    #[error("generator `{0}` listed twice")]
    DuplicateGenerator(String),
    #[error("word uses letter index {0}, outside the alphabet")]
    ForeignLetter(usize),
    #[error("cannot read `{0}` as a word over the alphabet")]
    UnknownWord(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid word derivation: {0}")]
    InvalidWordDerivation(String),
    #[error("term is not a word chain over the alphabet")]
    NotAWordTerm,
}

/// A word as a sequence of generator indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    fn occurs_at(&self, factor: &Word, offset: usize) -> bool {
        self.0.get(offset..offset + factor.len()) == Some(&factor.0[..])
    }

    fn replace(&self, offset: usize, len: usize, with: &Word) -> Word {
        let mut out = Vec::with_capacity(self.len() - len + with.len());
        out.extend_from_slice(&self.0[..offset]);
        out.extend_from_slice(&with.0);
        out.extend_from_slice(&self.0[offset + len..]);
        Word(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordProblemInstance {
    alphabet: Vec<String>,
    relations: Vec<(Word, Word)>,
    goal: (Word, Word),
}

fn check_generator_name(name: &str) -> Result<(), ReductionError> {
    if [ALPHA, MUL, EMPTY_WORD].contains(&name)
        || name
            .strip_prefix('x')
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(ReductionError::ReservedName(name.to_string()));
    }
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_');
    if !ok {
        return Err(ReductionError::InvalidName(name.to_string()));
    }
    Ok(())
}

impl WordProblemInstance {
    pub fn new(
        alphabet: Vec<String>,
        relations: Vec<(Word, Word)>,
        goal: (Word, Word),
    ) -> Result<Self, ReductionError> {
        for (i, name) in alphabet.iter().enumerate() {
            check_generator_name(name)?;
            if alphabet[..i].contains(name) {
                return Err(ReductionError::DuplicateGenerator(name.clone()));
            }
        }
        let inst = WordProblemInstance {
            alphabet,
            relations,
            goal,
        };
        for w in inst
            .relations
            .iter()
            .flat_map(|(u, v)| [u, v])
            .chain([&inst.goal.0, &inst.goal.1])
        {
            inst.check_word(w)?;
        }
        Ok(inst)
    }

    /// Builds an instance from textual words, e.g.
    /// `from_strs(&["a", "b"], &[("ab", "ba")], ("ab", "ba"))`.
    pub fn from_strs(
        alphabet: &[&str],
        relations: &[(&str, &str)],
        goal: (&str, &str),
    ) -> Result<Self, ReductionError> {
        let shell = WordProblemInstance {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            relations: Vec::new(),
            goal: (Word::empty(), Word::empty()),
        };
        let relations = relations
            .iter()
            .map(|(u, v)| Ok((shell.parse_word(u)?, shell.parse_word(v)?)))
            .collect::<Result<Vec<_>, ReductionError>>()?;
        let goal = (shell.parse_word(goal.0)?, shell.parse_word(goal.1)?);
        WordProblemInstance::new(shell.alphabet, relations, goal)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn relations(&self) -> &[(Word, Word)] {
        &self.relations
    }

    pub fn goal(&self) -> &(Word, Word) {
        &self.goal
    }

    /// Index of the goal axiom in the compiled theory.
    pub fn goal_axiom(&self) -> usize {
        self.relations.len()
    }

    pub fn check_word(&self, w: &Word) -> Result<(), ReductionError> {
        match w.0.iter().find(|&&l| l >= self.alphabet.len()) {
            Some(&l) => Err(ReductionError::ForeignLetter(l)),
            None => Ok(()),
        }
    }

    fn single_char_names(&self) -> bool {
        self.alphabet.iter().all(|n| n.chars().count() == 1)
    }

    /// Reads a word: `eps` is the empty word; otherwise generator names are
    /// matched longest first, with `.` or whitespace as optional
    /// separators.
    pub fn parse_word(&self, text: &str) -> Result<Word, ReductionError> {
        let text = text.trim();
        if text == EMPTY_WORD {
            return Ok(Word::empty());
        }
        if text.is_empty() {
            return Err(ReductionError::UnknownWord(text.to_string()));
        }
        let mut letters = Vec::new();
        for piece in text.split(|c: char| c == '.' || c.is_whitespace()).filter(|p| !p.is_empty()) {
            let mut rest = piece;
            while !rest.is_empty() {
                let best = self
                    .alphabet
                    .iter()
                    .enumerate()
                    .filter(|(_, name)| rest.starts_with(name.as_str()))
                    .max_by_key(|(_, name)| name.len());
                let Some((idx, name)) = best else {
                    return Err(ReductionError::UnknownWord(text.to_string()));
                };
                letters.push(idx);
                rest = &rest[name.len()..];
            }
        }
        Ok(Word(letters))
    }

    pub fn render_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return EMPTY_WORD.to_string();
        }
        let names = w.0.iter().map(|&l| self.alphabet[l].as_str());
        if self.single_char_names() {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(".")
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("alphabet {}\n", self.alphabet.join(" "));
        for (u, v) in &self.relations {
            out.push_str(&format!("rel {} = {}\n", self.render_word(u), self.render_word(v)));
        }
        out.push_str(&format!(
            "goal {} = {}\n",
            self.render_word(&self.goal.0),
            self.render_word(&self.goal.1)
        ));
        out
    }

    /// Parses an instance file. The alphabet must come first; exactly one
    /// goal is required.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut shell: Option<WordProblemInstance> = None;
        let mut relations = Vec::new();
        let mut goal = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let Some((keyword, rest, _)) = split_keyword(strip_comment(raw)) else {
                continue;
            };
            let malformed = |message: String| ReductionError::Malformed { line, message };
            match keyword {
                "alphabet" => {
                    if shell.is_some() {
                        return Err(malformed("alphabet given twice".into()));
                    }
                    let alphabet: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    let s = WordProblemInstance::new(alphabet, Vec::new(), (Word::empty(), Word::empty()))
                        .map_err(|e| malformed(e.to_string()))?;
                    shell = Some(s);
                }
                "rel" | "goal" => {
                    let s = shell
                        .as_ref()
                        .ok_or_else(|| malformed("`alphabet` must come first".into()))?;
                    let (l, r) = rest
                        .split_once('=')
                        .ok_or_else(|| malformed(format!("expected `{keyword} <word> = <word>`")))?;
                    let pair = (
                        s.parse_word(l).map_err(|e| malformed(e.to_string()))?,
                        s.parse_word(r).map_err(|e| malformed(e.to_string()))?,
                    );
                    if keyword == "rel" {
                        relations.push(pair);
                    } else if goal.replace(pair).is_some() {
                        return Err(malformed("goal given twice".into()));
                    }
                }
                other => return Err(malformed(format!("unknown directive `{other}`"))),
            }
        }
        let shell = shell.ok_or(ReductionError::Malformed {
            line: 0,
            message: "missing `alphabet` line".into(),
        })?;
        let goal = goal.ok_or(ReductionError::Malformed {
            line: 0,
            message: "missing `goal` line".into(),
        })?;
        WordProblemInstance::new(shell.alphabet, relations, goal)
    }
}

/// Wraps `inner` in the unary chain of `w`, first letter outermost.
pub fn word_term(sig: &Signature, inst: &WordProblemInstance, w: &Word, inner: Term) -> Term {
    w.0.iter().rev().fold(inner, |acc, &l| {
        let sym = sig.get(&inst.alphabet[l]).expect("generator in signature");
        Term::app(sym, vec![acc])
    })
}

/// Reads a chain of generator symbols ending in `x1` back as a word.
pub fn term_word(inst: &WordProblemInstance, t: &Term) -> Result<Word, ReductionError> {
    let mut letters = Vec::new();
    let mut current = t;
    loop {
        match current {
            Term::Var(1) => return Ok(Word(letters)),
            Term::App(f, cs) if f.arity() == 1 => {
                let idx = inst
                    .alphabet
                    .iter()
                    .position(|n| n == f.name())
                    .ok_or(ReductionError::NotAWordTerm)?;
                letters.push(idx);
                current = &cs[0];
            }
            _ => return Err(ReductionError::NotAWordTerm),
        }
    }
}

/// The theory with binary `l`, `r`, `m` and the single axiom
/// `l(x1,x2) = r(x2,x1)`.
pub fn build_t0() -> Theory {
    let l = Symbol::new("l", 2);
    let r = Symbol::new("r", 2);
    let m = Symbol::new(MUL, 2);
    let axiom = Equation::new(
        TermInContext::new(Term::app(&l, vec![Term::Var(1), Term::Var(2)]), 2).unwrap(),
        TermInContext::new(Term::app(&r, vec![Term::Var(2), Term::Var(1)]), 2).unwrap(),
    )
    .unwrap();
    Theory::new(Signature::new(vec![l, r, m]).unwrap(), vec![axiom]).unwrap()
}

/// Compiles an instance to its theory: generators in alphabet order, then
/// `alpha` and `m`; one axiom per relation followed by the goal axiom.
pub fn compile_reduction(inst: &WordProblemInstance) -> Theory {
    let mut symbols: Vec<Symbol> = inst.alphabet.iter().map(|n| Symbol::new(n.as_str(), 1)).collect();
    symbols.push(Symbol::new(ALPHA, 1));
    symbols.push(Symbol::new(MUL, 2));
    let sig = Signature::new(symbols).expect("names were validated");
    let mut axioms: Vec<Equation> = inst
        .relations
        .iter()
        .map(|(u, v)| {
            Equation::new(
                TermInContext::new(word_term(&sig, inst, u, Term::Var(1)), 1).unwrap(),
                TermInContext::new(word_term(&sig, inst, v, Term::Var(1)), 1).unwrap(),
            )
            .unwrap()
        })
        .collect();
    let (u, v) = &inst.goal;
    let lhs = goal_pattern(&sig, inst, u, 1, 2);
    let rhs = goal_pattern(&sig, inst, v, 2, 1);
    axioms.push(Equation::new(lhs, rhs).unwrap());
    Theory::new(sig, axioms).expect("axioms use declared symbols")
}

/// `m(w(alpha(x_first)), x_second)` in context 2.
fn goal_pattern(sig: &Signature, inst: &WordProblemInstance, w: &Word, first: usize, second: usize) -> TermInContext {
    let alpha = sig.get(ALPHA).unwrap();
    let m = sig.get(MUL).unwrap();
    let chain = word_term(sig, inst, w, Term::app(alpha, vec![Term::Var(first)]));
    TermInContext::new(Term::app(m, vec![chain, Term::Var(second)]), 2).unwrap()
}

/// The interpretation of `T0` in the compiled theory:
/// `l ↦ m(u(alpha(x1)),x2)`, `r ↦ m(v(alpha(x1)),x2)`, `m ↦ m(x1,x2)`.
pub fn build_interpretation(inst: &WordProblemInstance) -> Interpretation {
    let target = compile_reduction(inst);
    let sig = target.signature().clone();
    let (u, v) = &inst.goal;
    let m = sig.get(MUL).unwrap();
    let assignment = vec![
        ("l".to_string(), goal_pattern(&sig, inst, u, 1, 2)),
        ("r".to_string(), goal_pattern(&sig, inst, v, 1, 2)),
        (
            MUL.to_string(),
            TermInContext::new(Term::app(m, vec![Term::Var(1), Term::Var(2)]), 2).unwrap(),
        ),
    ];
    Interpretation::new_linear_regular(build_t0(), target, assignment)
        .expect("images are linear-regular")
}

/// Replaces one occurrence of a relation side at `offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WordStep {
    pub relation: usize,
    pub direction: Direction,
    pub offset: usize,
}

impl WordStep {
    pub fn reversed(&self) -> WordStep {
        WordStep {
            direction: self.direction.flipped(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordDerivation {
    pub start: Word,
    pub steps: Vec<WordStep>,
    pub end: Word,
}

fn relation_sides(inst: &WordProblemInstance, relation: usize, dir: Direction) -> Option<(&Word, &Word)> {
    let (u, v) = inst.relations.get(relation)?;
    Some(match dir {
        Direction::LeftToRight => (u, v),
        Direction::RightToLeft => (v, u),
    })
}

pub fn apply_word_step(
    inst: &WordProblemInstance,
    w: &Word,
    step: &WordStep,
) -> Result<Word, ReductionError> {
    let (from, to) = relation_sides(inst, step.relation, step.direction).ok_or_else(|| {
        ReductionError::InvalidWordDerivation(format!("no relation {}", step.relation))
    })?;
    if !w.occurs_at(from, step.offset) {
        return Err(ReductionError::InvalidWordDerivation(format!(
            "relation {} side {} does not occur at offset {} of {}",
            step.relation,
            inst.render_word(from),
            step.offset,
            inst.render_word(w)
        )));
    }
    Ok(w.replace(step.offset, from.len(), to))
}

impl WordDerivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn trace(&self, inst: &WordProblemInstance) -> Result<Vec<Word>, ReductionError> {
        let mut words = vec![self.start.clone()];
        for step in &self.steps {
            let next = apply_word_step(inst, words.last().unwrap(), step)?;
            words.push(next);
        }
        if words.last() != Some(&self.end) {
            return Err(ReductionError::InvalidWordDerivation("wrong end word".into()));
        }
        Ok(words)
    }

    pub fn replay(&self, inst: &WordProblemInstance) -> bool {
        self.trace(inst).is_ok()
    }

    pub fn reversed(&self) -> WordDerivation {
        WordDerivation {
            start: self.end.clone(),
            steps: self.steps.iter().rev().map(WordStep::reversed).collect(),
            end: self.start.clone(),
        }
    }

    /// The same derivation on the unary chains inside `context`, rooted at
    /// `prefix`: a step at offset `k` becomes a step at `prefix` followed by
    /// `k` zeros.
    pub fn lift(
        &self,
        th: &Theory,
        start: &TermInContext,
        prefix: &[usize],
    ) -> Result<Derivation, ReductionError> {
        let mut current = start.term().clone();
        let mut steps = Vec::with_capacity(self.steps.len());
        for ws in &self.steps {
            let mut position = prefix.to_vec();
            position.extend(std::iter::repeat_n(0, ws.offset));
            let (next, step) = step_at(&current, start.context_len(), th, ws.relation, ws.direction, &position)
                .ok_or_else(|| {
                    ReductionError::InvalidWordDerivation(format!("step at offset {} does not lift", ws.offset))
                })?;
            current = next;
            steps.push(step);
        }
        let end = TermInContext::new(current, start.context_len()).expect("context kept");
        Ok(Derivation::new(start.clone(), steps, end))
    }
}

/// Three-valued answer to "are these words equal in the monoid?".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum WordOutcome {
    /// A derivation exists and is attached.
    Derivable { derivation: WordDerivation },
    /// The reachable set was exhausted without the length cap binding.
    NotDerivable { stats: SearchStats },
    /// Bounds ran out; nothing is known.
    Unknown { reason: NotFoundReason, stats: SearchStats },
}

impl WordOutcome {
    pub fn derivation(&self) -> Option<&WordDerivation> {
        match self {
            WordOutcome::Derivable { derivation } => Some(derivation),
            _ => None,
        }
    }

    pub fn is_derivable(&self) -> bool {
        matches!(self, WordOutcome::Derivable { .. })
    }

    pub fn is_certified_not_derivable(&self) -> bool {
        matches!(self, WordOutcome::NotDerivable { .. })
    }
}

/// Decides `w1 = w2` within bounds by proof search on `w1(x1) = w2(x1)` in
/// the compiled theory. `bounds` apply to the encoded terms, whose size is
/// the word length plus one.
pub fn word_semidecide(
    inst: &WordProblemInstance,
    w1: &Word,
    w2: &Word,
    bounds: &SearchBounds,
) -> Result<WordOutcome, ReductionError> {
    word_semidecide_in(&compile_reduction(inst), inst, w1, w2, bounds)
}

/// [`word_semidecide`] against an already compiled theory.
pub fn word_semidecide_in(
    th: &Theory,
    inst: &WordProblemInstance,
    w1: &Word,
    w2: &Word,
    bounds: &SearchBounds,
) -> Result<WordOutcome, ReductionError> {
    inst.check_word(w1)?;
    inst.check_word(w2)?;
    let sig = th.signature();
    let goal = Equation::new(
        TermInContext::new(word_term(sig, inst, w1, Term::Var(1)), 1).unwrap(),
        TermInContext::new(word_term(sig, inst, w2, Term::Var(1)), 1).unwrap(),
    )
    .unwrap();
    Ok(match prove_bounded(th, &goal, bounds) {
        ProofOutcome::Proved { derivation, .. } => {
            let steps = derivation
                .steps()
                .iter()
                .map(|s| word_step_of(inst, s))
                .collect::<Result<Vec<_>, _>>()?;
            let wd = WordDerivation {
                start: w1.clone(),
                steps,
                end: w2.clone(),
            };
            debug_assert!(wd.replay(inst));
            WordOutcome::Derivable { derivation: wd }
        }
        out @ ProofOutcome::NotFound { reason, stats } => {
            if out.is_certified_unprovable() {
                WordOutcome::NotDerivable { stats }
            } else {
                WordOutcome::Unknown { reason, stats }
            }
        }
    })
}

fn word_step_of(inst: &WordProblemInstance, s: &RewriteStep) -> Result<WordStep, ReductionError> {
    if s.axiom >= inst.relations.len() || s.position.iter().any(|&p| p != 0) {
        return Err(ReductionError::InvalidWordDerivation(
            "term step is not a relation step on a chain".into(),
        ));
    }
    Ok(WordStep {
        relation: s.axiom,
        direction: s.direction,
        offset: s.position.len(),
    })
}

/// Breadth-first search directly on words. Successors are tried in the
/// order (relation, left-to-right first, offset). The length cap is the
/// explicit `size_cap` minus one, or the longer word plus `slack`.
pub fn word_bfs(
    inst: &WordProblemInstance,
    w1: &Word,
    w2: &Word,
    bounds: &SearchBounds,
) -> Result<WordOutcome, ReductionError> {
    inst.check_word(w1)?;
    inst.check_word(w2)?;
    let length_cap = match bounds.size_cap {
        Some(cap) => cap.saturating_sub(1),
        None => w1.len().max(w2.len()) + bounds.slack,
    };
    let mut stats = SearchStats {
        size_cap: length_cap + 1,
        visited: 1,
        ..SearchStats::default()
    };
    let mut parent: HashMap<Word, Option<(Word, WordStep)>> = HashMap::new();
    parent.insert(w1.clone(), None);
    let mut queue: VecDeque<(Word, usize)> = VecDeque::from([(w1.clone(), 0)]);
    let mut depth_limited = false;
    let path = |parent: &HashMap<Word, Option<(Word, WordStep)>>, end: &Word| {
        let mut steps = Vec::new();
        let mut cur = end.clone();
        while let Some(Some((prev, step))) = parent.get(&cur) {
            steps.push(step.clone());
            cur = prev.clone();
        }
        steps.reverse();
        WordDerivation {
            start: w1.clone(),
            steps,
            end: end.clone(),
        }
    };
    if w1 == w2 {
        return Ok(WordOutcome::Derivable {
            derivation: path(&parent, w2),
        });
    }
    while let Some((w, d)) = queue.pop_front() {
        if d >= bounds.depth {
            depth_limited = true;
            continue;
        }
        if stats.expanded >= bounds.node_budget {
            return Ok(WordOutcome::Unknown {
                reason: NotFoundReason::BudgetExhausted,
                stats,
            });
        }
        stats.expanded += 1;
        for relation in 0..inst.relations.len() {
            for direction in [Direction::LeftToRight, Direction::RightToLeft] {
                let (from, to) = relation_sides(inst, relation, direction).unwrap();
                if from.len() > w.len() {
                    continue;
                }
                for offset in 0..=w.len() - from.len() {
                    if !w.occurs_at(from, offset) {
                        continue;
                    }
                    let next = w.replace(offset, from.len(), to);
                    if next.len() > length_cap {
                        stats.cap_hit = true;
                        continue;
                    }
                    if parent.contains_key(&next) {
                        continue;
                    }
                    let step = WordStep {
                        relation,
                        direction,
                        offset,
                    };
                    parent.insert(next.clone(), Some((w.clone(), step)));
                    stats.visited += 1;
                    if &next == w2 {
                        return Ok(WordOutcome::Derivable {
                            derivation: path(&parent, w2),
                        });
                    }
                    queue.push_back((next, d + 1));
                }
            }
        }
    }
    Ok(if depth_limited {
        WordOutcome::Unknown {
            reason: NotFoundReason::DepthLimit,
            stats,
        }
    } else if stats.cap_hit {
        WordOutcome::Unknown {
            reason: NotFoundReason::FrontierExhausted,
            stats,
        }
    } else {
        WordOutcome::NotDerivable { stats }
    })
}

/// The flabby term `t = m(u(alpha(x1)),x2)` with the transposition of
/// `x1, x2` and a derivation of `t = σ·t`: one goal-axiom step to
/// `m(v(alpha(x2)),x1)`, then the reversed word derivation lifted into the
/// first argument to return to `m(u(alpha(x2)),x1)`.
pub fn flabby_witness(
    inst: &WordProblemInstance,
    word_derivation: &WordDerivation,
) -> Result<FlabbyReport, ReductionError> {
    let (u, v) = &inst.goal;
    if &word_derivation.start != u || &word_derivation.end != v {
        return Err(ReductionError::InvalidWordDerivation(
            "derivation does not lead from the goal's left word to its right word".into(),
        ));
    }
    word_derivation.trace(inst)?;
    let th = compile_reduction(inst);
    let t = goal_pattern(th.signature(), inst, u, 1, 2);
    let (swapped, first) = step_at(t.term(), 2, &th, inst.goal_axiom(), Direction::LeftToRight, &[])
        .expect("goal axiom applies at the root");
    let middle = TermInContext::new(swapped, 2).unwrap();
    let rest = word_derivation.reversed().lift(&th, &middle, &[0])?;
    let derivation = Derivation::new(t.clone(), vec![first], middle).then(rest);
    let permutation = Permutation::transposition(2, 1, 2);
    let report = FlabbyReport {
        term: t,
        permutation,
        derivation,
    };
    debug_assert!(crate::rigidity::verify_report(&report, &th));
    Ok(report)
}

impl fmt::Display for WordProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
