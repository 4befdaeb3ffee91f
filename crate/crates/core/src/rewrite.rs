//! Rewrite steps, derivation certificates and bounded proof search.
//!
//! A rewrite step instantiates one side of an axiom with a substitution,
//! finds it at a position of the current term, and replaces it with the
//! instantiated other side. Both directions of every axiom are available,
//! so the one-step relation is symmetric and provability is undirected
//! reachability.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{self, SyntaxError};
use crate::term::{Term, TermInContext};
use crate::theory::{Equation, Signature, Theory};

/// Default bound on expanded terms for a single search.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
/// Default allowance for term growth above the larger goal side.
pub const DEFAULT_SLACK: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("axiom index {0} out of range")]
    AxiomOutOfRange(usize),
    #[error("position {0:?} does not address a subterm")]
    InvalidPosition(Vec<usize>),
    #[error("substitution has {found} entries, axiom context has {expected}")]
    SubstitutionLength { expected: usize, found: usize },
    #[error("substitution entry {0} is not a term of the current context")]
    SubstitutionOutOfContext(usize),
    #[error("subterm at {position:?} is not an instance of the axiom side")]
    NoMatch { position: Vec<usize> },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<RewriteError>,
    },
    #[error("replay ends in {found}, derivation claims {claimed}")]
    WrongEnd { found: String, claimed: String },
    #[error("start and end live in contexts {start} and {end}")]
    ContextMismatch { start: usize, end: usize },
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("malformed derivation record: {0}")]
    Record(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "lr")]
    LeftToRight,
    #[serde(rename = "rl")]
    RightToLeft,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }

    /// The (matched, produced) sides of `axiom` in this direction.
    pub fn sides(self, axiom: &Equation) -> (&Term, &Term) {
        match self {
            Direction::LeftToRight => (axiom.lhs().term(), axiom.rhs().term()),
            Direction::RightToLeft => (axiom.rhs().term(), axiom.lhs().term()),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftToRight => "lr",
            Direction::RightToLeft => "rl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub axiom: usize,
    pub direction: Direction,
    pub position: Vec<usize>,
    /// One term per variable of the axiom's context, in the context of the
    /// rewritten term.
    pub substitution: Vec<Term>,
}

impl RewriteStep {
    /// The same step read backwards: applied to the result it restores the
    /// original term.
    pub fn reversed(&self) -> RewriteStep {
        RewriteStep {
            direction: self.direction.flipped(),
            ..self.clone()
        }
    }

    /// Prefixes the position, for lifting a step into a larger term.
    pub fn lifted(&self, prefix: &[usize]) -> RewriteStep {
        let mut position = prefix.to_vec();
        position.extend_from_slice(&self.position);
        RewriteStep {
            position,
            ..self.clone()
        }
    }
}

/// First-order matching of `pattern` against `subject`. Repeated pattern
/// variables must bind equal subterms.
pub fn match_term(pattern: &Term, subject: &Term, binding: &mut [Option<Term>]) -> bool {
    match pattern {
        Term::Var(i) => match &binding[*i - 1] {
            Some(bound) => bound == subject,
            None => {
                binding[*i - 1] = Some(subject.clone());
                true
            }
        },
        Term::App(f, ps) => match subject {
            Term::App(g, ss) if f == g => ps
                .iter()
                .zip(ss)
                .all(|(p, s)| match_term(p, s, binding)),
            _ => false,
        },
    }
}

/// Applies a single rewrite step. The context of the term is unchanged.
pub fn apply_step(
    t: &TermInContext,
    th: &Theory,
    step: &RewriteStep,
) -> Result<TermInContext, RewriteError> {
    let axiom = th
        .axiom(step.axiom)
        .ok_or(RewriteError::AxiomOutOfRange(step.axiom))?;
    if step.substitution.len() != axiom.context_len() {
        return Err(RewriteError::SubstitutionLength {
            expected: axiom.context_len(),
            found: step.substitution.len(),
        });
    }
    if let Some(k) = step
        .substitution
        .iter()
        .position(|s| s.max_var() > t.context_len() || !th.signature().contains_term(s))
    {
        return Err(RewriteError::SubstitutionOutOfContext(k));
    }
    let target = t
        .term()
        .subterm_at(&step.position)
        .ok_or_else(|| RewriteError::InvalidPosition(step.position.clone()))?;
    let (from, to) = step.direction.sides(axiom);
    if &from.instantiate(&step.substitution) != target {
        return Err(RewriteError::NoMatch {
            position: step.position.clone(),
        });
    }
    let replaced = t
        .term()
        .replace_at(&step.position, to.instantiate(&step.substitution))
        .expect("position was checked");
    Ok(TermInContext::new(replaced, t.context_len()).expect("context is preserved"))
}

/// Builds the step rewriting `t` with `axiom` in `direction` at `position`,
/// if the axiom side matches there and determines every variable it needs.
pub fn step_at(
    t: &Term,
    context_len: usize,
    th: &Theory,
    axiom: usize,
    direction: Direction,
    position: &[usize],
) -> Option<(Term, RewriteStep)> {
    let ax = th.axiom(axiom)?;
    let subject = t.subterm_at(position)?;
    let (from, to) = direction.sides(ax);
    let mut binding = vec![None; ax.context_len()];
    if !match_term(from, subject, &mut binding) {
        return None;
    }
    let needed = to.var_occurrences();
    if needed.iter().any(|&i| binding[i - 1].is_none()) {
        return None;
    }
    // Context variables that appear on neither side still need an entry.
    if context_len == 0 && binding.iter().any(Option::is_none) {
        return None;
    }
    let substitution: Vec<Term> = binding
        .into_iter()
        .map(|b| b.unwrap_or(Term::Var(1)))
        .collect();
    let result = t.replace_at(position, to.instantiate(&substitution))?;
    Some((
        result,
        RewriteStep {
            axiom,
            direction,
            position: position.to_vec(),
            substitution,
        },
    ))
}

/// One-step rewrites of `t` in tie-break order (axiom index, left-to-right
/// before right-to-left, pre-order position). Results equal to `t` and
/// repeated results are dropped. The flag reports whether some rewrite was
/// discarded for exceeding `size_cap`.
pub(crate) fn expand(
    t: &Term,
    context_len: usize,
    th: &Theory,
    size_cap: usize,
) -> (Vec<(Term, RewriteStep)>, bool) {
    let positions = t.positions();
    let mut out: Vec<(Term, RewriteStep)> = Vec::new();
    let mut seen: std::collections::HashSet<Term> = std::collections::HashSet::new();
    let mut cap_hit = false;
    for axiom in 0..th.axioms().len() {
        for direction in [Direction::LeftToRight, Direction::RightToLeft] {
            for pos in &positions {
                let Some((result, step)) = step_at(t, context_len, th, axiom, direction, pos)
                else {
                    continue;
                };
                if &result == t {
                    continue;
                }
                if result.size() > size_cap {
                    cap_hit = true;
                    continue;
                }
                if seen.insert(result.clone()) {
                    out.push((result, step));
                }
            }
        }
    }
    (out, cap_hit)
}

/// All distinct one-step rewrites of `t` of size at most `size_cap`, each
/// with a witnessing step.
pub fn successors(
    t: &TermInContext,
    th: &Theory,
    size_cap: usize,
) -> Vec<(TermInContext, RewriteStep)> {
    expand(t.term(), t.context_len(), th, size_cap)
        .0
        .into_iter()
        .map(|(term, step)| {
            (
                TermInContext::new(term, t.context_len()).expect("context is preserved"),
                step,
            )
        })
        .collect()
}

/// A replayable proof certificate for `start = end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    start: TermInContext,
    steps: Vec<RewriteStep>,
    end: TermInContext,
}

impl Derivation {
    /// Assembles a derivation without checking it; see [`Derivation::replay`].
    pub fn new(start: TermInContext, steps: Vec<RewriteStep>, end: TermInContext) -> Self {
        Derivation { start, steps, end }
    }

    pub fn empty(t: TermInContext) -> Self {
        Derivation {
            start: t.clone(),
            steps: Vec::new(),
            end: t,
        }
    }

    /// Runs `steps` from `start` and records the resulting end term.
    pub fn build(
        th: &Theory,
        start: TermInContext,
        steps: Vec<RewriteStep>,
    ) -> Result<Derivation, RewriteError> {
        let mut current = start.clone();
        for (k, step) in steps.iter().enumerate() {
            current = apply_step(&current, th, step).map_err(|e| RewriteError::AtStep {
                step: k,
                source: Box::new(e),
            })?;
        }
        Ok(Derivation {
            start,
            steps,
            end: current,
        })
    }

    pub fn start(&self) -> &TermInContext {
        &self.start
    }

    pub fn end(&self) -> &TermInContext {
        &self.end
    }

    pub fn steps(&self) -> &[RewriteStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The equation this derivation proves.
    pub fn equation(&self) -> Equation {
        Equation::new(self.start.clone(), self.end.clone()).expect("shared context")
    }

    /// Every term along the derivation, `start` first, or the first error.
    pub fn trace(&self, th: &Theory) -> Result<Vec<TermInContext>, RewriteError> {
        if self.start.context_len() != self.end.context_len() {
            return Err(RewriteError::ContextMismatch {
                start: self.start.context_len(),
                end: self.end.context_len(),
            });
        }
        let mut terms = vec![self.start.clone()];
        for (k, step) in self.steps.iter().enumerate() {
            let next = apply_step(terms.last().unwrap(), th, step).map_err(|e| {
                RewriteError::AtStep {
                    step: k,
                    source: Box::new(e),
                }
            })?;
            terms.push(next);
        }
        let last = terms.last().unwrap();
        if last != &self.end {
            return Err(RewriteError::WrongEnd {
                found: last.term().to_string(),
                claimed: self.end.term().to_string(),
            });
        }
        Ok(terms)
    }

    pub fn check(&self, th: &Theory) -> Result<(), RewriteError> {
        self.trace(th).map(|_| ())
    }

    /// True iff every step applies and the steps lead from start to end.
    pub fn replay(&self, th: &Theory) -> bool {
        self.check(th).is_ok()
    }

    /// The derivation of `end = start`.
    pub fn reversed(&self) -> Derivation {
        Derivation {
            start: self.end.clone(),
            steps: self.steps.iter().rev().map(RewriteStep::reversed).collect(),
            end: self.start.clone(),
        }
    }

    /// Concatenates `self` and `next`; `next` must start where `self` ends.
    pub fn then(mut self, next: Derivation) -> Derivation {
        debug_assert_eq!(self.end, next.start);
        self.steps.extend(next.steps);
        self.end = next.end;
        self
    }

    pub fn to_record(&self) -> DerivationRecord {
        DerivationRecord {
            context: self.start.context_len(),
            start: self.start.term().to_string(),
            end: self.end.term().to_string(),
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord {
                    axiom: s.axiom,
                    direction: s.direction,
                    position: s.position.clone(),
                    substitution: s.substitution.iter().map(Term::to_string).collect(),
                })
                .collect(),
        }
    }

    /// Reads a record against `sig`. The result is not replayed.
    pub fn from_record(record: &DerivationRecord, sig: &Signature) -> Result<Self, RewriteError> {
        let start = syntax::parse_term_in_context(&record.start, sig, record.context)?;
        let end = syntax::parse_term_in_context(&record.end, sig, record.context)?;
        let steps = record
            .steps
            .iter()
            .map(|s| {
                let substitution = s
                    .substitution
                    .iter()
                    .map(|t| syntax::parse_term(t, sig))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RewriteStep {
                    axiom: s.axiom,
                    direction: s.direction,
                    position: s.position.clone(),
                    substitution,
                })
            })
            .collect::<Result<Vec<_>, RewriteError>>()?;
        Ok(Derivation { start, steps, end })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_record()).expect("records serialize")
    }

    pub fn from_json(text: &str, sig: &Signature) -> Result<Self, RewriteError> {
        let record: DerivationRecord =
            serde_json::from_str(text).map_err(|e| RewriteError::Record(e.to_string()))?;
        Derivation::from_record(&record, sig)
    }
}

/// Exchange format for derivations; terms are in concrete syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    pub context: usize,
    pub start: String,
    pub end: String,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub axiom: usize,
    pub direction: Direction,
    pub position: Vec<usize>,
    pub substitution: Vec<String>,
}

/// Number of occurrences of the symbol `name` in each term along `d`.
pub fn symbol_census(d: &Derivation, th: &Theory, name: &str) -> Result<Vec<usize>, RewriteError> {
    Ok(d
        .trace(th)?
        .iter()
        .map(|t| t.term().count_symbol(name))
        .collect())
}

/// Limits for a bounded search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// Maximum number of rewrite steps.
    pub depth: usize,
    /// Added to the largest goal term size when `size_cap` is unset.
    pub slack: usize,
    /// Explicit bound on intermediate term size.
    pub size_cap: Option<usize>,
    /// Maximum number of terms expanded.
    pub node_budget: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            depth: 8,
            slack: DEFAULT_SLACK,
            size_cap: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl SearchBounds {
    pub fn with_depth(depth: usize) -> Self {
        SearchBounds {
            depth,
            ..SearchBounds::default()
        }
    }

    pub fn size_cap_for<'a>(&self, terms: impl IntoIterator<Item = &'a Term>) -> usize {
        self.size_cap.unwrap_or_else(|| {
            terms.into_iter().map(Term::size).max().unwrap_or(0) + self.slack
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Terms whose successors were computed.
    pub expanded: usize,
    /// Distinct terms discovered.
    pub visited: usize,
    /// Whether some successor was discarded by the size cap.
    pub cap_hit: bool,
    pub size_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotFoundReason {
    /// Some search frontier emptied: the reachable set was fully explored
    /// (within the size cap).
    FrontierExhausted,
    /// The step bound was reached with terms left to expand.
    DepthLimit,
    /// The node budget ran out.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofOutcome {
    Proved {
        derivation: Derivation,
        stats: SearchStats,
    },
    NotFound {
        reason: NotFoundReason,
        stats: SearchStats,
    },
}

impl ProofOutcome {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            ProofOutcome::Proved { derivation, .. } => Some(derivation),
            ProofOutcome::NotFound { .. } => None,
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, ProofOutcome::Proved { .. })
    }

    /// Not provable at all: a frontier was exhausted without the size cap
    /// ever discarding a term on that side.
    pub fn is_certified_unprovable(&self) -> bool {
        matches!(
            self,
            ProofOutcome::NotFound {
                reason: NotFoundReason::FrontierExhausted,
                stats: SearchStats { cap_hit: false, .. },
            }
        )
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            ProofOutcome::Proved { stats, .. } | ProofOutcome::NotFound { stats, .. } => stats,
        }
    }
}

struct Node {
    term: Term,
    parent: Option<(usize, RewriteStep)>,
}

/// Breadth-first search tree rooted at one term.
struct SearchTree {
    nodes: Vec<Node>,
    index: HashMap<Term, usize>,
    frontier: Vec<usize>,
    depth: usize,
    cap_hit: bool,
}

impl SearchTree {
    fn new(root: Term) -> Self {
        let mut index = HashMap::new();
        index.insert(root.clone(), 0);
        SearchTree {
            nodes: vec![Node {
                term: root,
                parent: None,
            }],
            index,
            frontier: vec![0],
            depth: 0,
            cap_hit: false,
        }
    }

    fn steps_to(&self, mut idx: usize) -> Vec<RewriteStep> {
        let mut steps = Vec::new();
        while let Some((parent, step)) = &self.nodes[idx].parent {
            steps.push(step.clone());
            idx = *parent;
        }
        steps.reverse();
        steps
    }
}

/// Searches for a derivation of `goal` with at most `bounds.depth` steps,
/// expanding from both sides breadth-first until the two trees meet.
/// Returned derivations are shortest within the size cap and are checked
/// by replay.
pub fn prove_bounded(th: &Theory, goal: &Equation, bounds: &SearchBounds) -> ProofOutcome {
    let n = goal.context_len();
    let lhs = goal.lhs().term();
    let rhs = goal.rhs().term();
    let size_cap = bounds.size_cap_for([lhs, rhs]);
    let mut stats = SearchStats {
        size_cap,
        visited: 1,
        ..SearchStats::default()
    };
    if lhs == rhs {
        return ProofOutcome::Proved {
            derivation: Derivation::empty(goal.lhs().clone()),
            stats,
        };
    }
    stats.visited = 2;
    let mut fwd = SearchTree::new(lhs.clone());
    let mut bwd = SearchTree::new(rhs.clone());
    loop {
        if fwd.depth + bwd.depth >= bounds.depth {
            stats.cap_hit = fwd.cap_hit || bwd.cap_hit;
            return ProofOutcome::NotFound {
                reason: NotFoundReason::DepthLimit,
                stats,
            };
        }
        let forward = fwd.frontier.len() <= bwd.frontier.len();
        let (this, other) = if forward {
            (&mut fwd, &bwd)
        } else {
            (&mut bwd, &fwd)
        };
        let frontier = std::mem::take(&mut this.frontier);
        let mut next = Vec::new();
        for idx in frontier {
            if stats.expanded >= bounds.node_budget {
                stats.cap_hit = fwd.cap_hit || bwd.cap_hit;
                return ProofOutcome::NotFound {
                    reason: NotFoundReason::BudgetExhausted,
                    stats,
                };
            }
            stats.expanded += 1;
            let (succs, cap_hit) = expand(&this.nodes[idx].term, n, th, size_cap);
            this.cap_hit |= cap_hit;
            for (term, step) in succs {
                if this.index.contains_key(&term) {
                    continue;
                }
                let new_idx = this.nodes.len();
                let meet = other.index.get(&term).copied();
                this.index.insert(term.clone(), new_idx);
                this.nodes.push(Node {
                    term,
                    parent: Some((idx, step)),
                });
                stats.visited += 1;
                if let Some(other_idx) = meet {
                    let (f_idx, b_idx) = if forward {
                        (new_idx, other_idx)
                    } else {
                        (other_idx, new_idx)
                    };
                    stats.cap_hit = fwd.cap_hit || bwd.cap_hit;
                    let derivation = join(goal, &fwd, f_idx, &bwd, b_idx);
                    assert!(
                        derivation.replay(th),
                        "search produced an invalid derivation"
                    );
                    return ProofOutcome::Proved { derivation, stats };
                }
                next.push(new_idx);
            }
        }
        this.depth += 1;
        this.frontier = next;
        if this.frontier.is_empty() {
            stats.cap_hit = this.cap_hit;
            return ProofOutcome::NotFound {
                reason: NotFoundReason::FrontierExhausted,
                stats,
            };
        }
    }
}

fn join(goal: &Equation, fwd: &SearchTree, f_idx: usize, bwd: &SearchTree, b_idx: usize) -> Derivation {
    let mut steps = fwd.steps_to(f_idx);
    steps.extend(bwd.steps_to(b_idx).iter().rev().map(RewriteStep::reversed));
    Derivation::new(goal.lhs().clone(), steps, goal.rhs().clone())
}

/// The terms reachable from a start term within bounds, with shortest
/// derivations to each.
pub struct Closure {
    context_len: usize,
    tree: SearchTree,
    complete: bool,
    budget_exhausted: bool,
    stats: SearchStats,
}

impl Closure {
    pub fn contains(&self, t: &Term) -> bool {
        self.tree.index.contains_key(t)
    }

    pub fn len(&self) -> usize {
        self.tree.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.nodes.is_empty()
    }

    /// Terms in discovery order (by distance from the start).
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.tree.nodes.iter().map(|n| &n.term)
    }

    /// The frontier emptied before the depth bound or budget ran out.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn budget_exhausted(&self) -> bool {
        self.budget_exhausted
    }

    pub fn cap_hit(&self) -> bool {
        self.stats.cap_hit
    }

    /// Complete and never limited by the size cap: exactly the equivalence
    /// class of the start term.
    pub fn is_exact(&self) -> bool {
        self.complete && !self.stats.cap_hit
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn derivation_to(&self, t: &Term) -> Option<Derivation> {
        let idx = *self.tree.index.get(t)?;
        let start = TermInContext::new(self.tree.nodes[0].term.clone(), self.context_len).ok()?;
        let end = TermInContext::new(t.clone(), self.context_len).ok()?;
        Some(Derivation::new(start, self.tree.steps_to(idx), end))
    }
}

/// Breadth-first closure of `start` under the one-step relation.
pub fn bounded_closure(th: &Theory, start: &TermInContext, bounds: &SearchBounds) -> Closure {
    let n = start.context_len();
    let size_cap = bounds.size_cap_for([start.term()]);
    let mut tree = SearchTree::new(start.term().clone());
    let mut stats = SearchStats {
        size_cap,
        ..SearchStats::default()
    };
    let mut complete = false;
    let mut budget_exhausted = false;
    'outer: while tree.depth < bounds.depth {
        let frontier = std::mem::take(&mut tree.frontier);
        let mut next = Vec::new();
        for idx in frontier {
            if stats.expanded >= bounds.node_budget {
                budget_exhausted = true;
                break 'outer;
            }
            stats.expanded += 1;
            let (succs, cap_hit) = expand(&tree.nodes[idx].term, n, th, size_cap);
            tree.cap_hit |= cap_hit;
            for (term, step) in succs {
                if tree.index.contains_key(&term) {
                    continue;
                }
                let new_idx = tree.nodes.len();
                tree.index.insert(term.clone(), new_idx);
                tree.nodes.push(Node {
                    term,
                    parent: Some((idx, step)),
                });
                next.push(new_idx);
            }
        }
        tree.depth += 1;
        tree.frontier = next;
        if tree.frontier.is_empty() {
            complete = true;
            break;
        }
    }
    stats.visited = tree.nodes.len();
    stats.cap_hit = tree.cap_hit;
    Closure {
        context_len: n,
        tree,
        complete,
        budget_exhausted,
        stats,
    }
}
