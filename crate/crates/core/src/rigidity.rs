//! Bounded search for flabby terms.
//!
//! A linear-regular term `t : x_1..x_n` is flabby when the theory proves
//! `t = σ·t` for a non-identity permutation `σ`; a theory is rigid when it
//! has no flabby term. Rigidity cannot be decided in general, so this module
//! semi-decides non-rigidity and certifies rigidity of finite fragments
//! only.
//!
//! Enumeration yields terms with variables in first-occurrence order
//! `x_1, x_2, ...`. This loses nothing: `t` is flabby with `σ` iff `τ·t` is
//! flabby with `τστ⁻¹`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::rewrite::{bounded_closure, Derivation, SearchBounds};
use crate::term::{Permutation, Term, TermInContext};
use crate::theory::{Signature, Theory};

#[derive(Clone)]
struct Skeleton {
    term: Term,
    holes: usize,
}

/// Holes are `Var(0)`; constants are leaves with no holes.
fn skeleton_levels(sig: &Signature, max_size: usize, max_holes: usize) -> Vec<Vec<Skeleton>> {
    let mut levels: Vec<Vec<Skeleton>> = vec![Vec::new(); max_size + 1];
    for size in 1..=max_size {
        let mut level = Vec::new();
        if size == 1 && max_holes >= 1 {
            level.push(Skeleton {
                term: Term::Var(0),
                holes: 1,
            });
        }
        for sym in sig.symbols() {
            let k = sym.arity();
            if k == 0 {
                if size == 1 {
                    level.push(Skeleton {
                        term: Term::App(sym.clone(), Vec::new()),
                        holes: 0,
                    });
                }
                continue;
            }
            if size < k + 1 {
                continue;
            }
            for split in compositions(size - 1, k) {
                let mut partial: Vec<(Vec<Term>, usize)> = vec![(Vec::new(), 0)];
                for &part in &split {
                    let mut next = Vec::new();
                    for (children, holes) in &partial {
                        for child in &levels[part] {
                            let h = holes + child.holes;
                            if h > max_holes {
                                continue;
                            }
                            let mut c = children.clone();
                            c.push(child.term.clone());
                            next.push((c, h));
                        }
                    }
                    partial = next;
                }
                for (children, holes) in partial {
                    level.push(Skeleton {
                        term: Term::App(sym.clone(), children),
                        holes,
                    });
                }
            }
        }
        levels[size] = level;
    }
    levels
}

/// Ordered splittings of `total` into `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Pre-order token sequence: variables are 0, symbols `1 + declaration
/// index`. Lexicographic comparison of these keys is the canonical order
/// within one size.
fn order_key(sig: &Signature, t: &Term) -> Vec<usize> {
    fn go(sig: &Signature, t: &Term, out: &mut Vec<usize>) {
        match t {
            Term::Var(_) => out.push(0),
            Term::App(f, cs) => {
                out.push(1 + sig.position(f.name()).unwrap_or(usize::MAX - 1));
                cs.iter().for_each(|c| go(sig, c, out));
            }
        }
    }
    let mut out = Vec::new();
    go(sig, t, &mut out);
    out
}

/// Numbers the holes of a skeleton `1, 2, ...` from left to right.
fn number_holes(t: &Term, next: &mut usize) -> Term {
    match t {
        Term::Var(_) => {
            *next += 1;
            Term::Var(*next)
        }
        Term::App(f, cs) => Term::App(f.clone(), cs.iter().map(|c| number_holes(c, next)).collect()),
    }
}

fn label_holes(t: &Term, labels: &mut impl Iterator<Item = usize>) -> Term {
    match t {
        Term::Var(_) => Term::Var(labels.next().expect("one label per hole")),
        Term::App(f, cs) => Term::App(f.clone(), cs.iter().map(|c| label_holes(c, labels)).collect()),
    }
}

/// Stream of linear-regular terms in canonical variable order, by size and
/// then lexicographically in signature order.
pub struct LinearRegularTerms<'a> {
    sig: &'a Signature,
    levels: Vec<Vec<Skeleton>>,
    size: usize,
    buffer: VecDeque<TermInContext>,
}

impl Iterator for LinearRegularTerms<'_> {
    type Item = TermInContext;

    fn next(&mut self) -> Option<TermInContext> {
        while self.buffer.is_empty() {
            self.size += 1;
            let level = self.levels.get(self.size)?;
            let mut terms: Vec<(Vec<usize>, TermInContext)> = level
                .iter()
                .filter(|s| s.holes >= 1)
                .map(|s| {
                    let term = number_holes(&s.term, &mut 0);
                    let key = order_key(self.sig, &term);
                    (key, TermInContext::new(term, s.holes).expect("holes are numbered"))
                })
                .collect();
            terms.sort_by(|a, b| a.0.cmp(&b.0));
            self.buffer.extend(terms.into_iter().map(|(_, t)| t));
        }
        self.buffer.pop_front()
    }
}

/// Every linear-regular term of size at most `max_size` with a context of
/// length `1..=max_context`, each exactly once up to renaming of
/// variables. Ground terms (empty context) are not produced.
pub fn enumerate_linear_regular(
    sig: &Signature,
    max_size: usize,
    max_context: usize,
) -> LinearRegularTerms<'_> {
    LinearRegularTerms {
        sig,
        levels: skeleton_levels(sig, max_size, max_context),
        size: 0,
        buffer: VecDeque::new(),
    }
}

/// Every term of size at most `max_size` over `sig` whose variables are
/// drawn from `x_1..x_{context_len}`, repetitions allowed, in canonical
/// order.
pub fn enumerate_terms(sig: &Signature, max_size: usize, context_len: usize) -> Vec<TermInContext> {
    let levels = skeleton_levels(sig, max_size, if context_len == 0 { 0 } else { max_size });
    let mut out = Vec::new();
    for level in levels.iter().skip(1) {
        let mut terms: Vec<(Vec<usize>, Vec<usize>, Term)> = Vec::new();
        for s in level {
            let labelings = (0..s.holes)
                .map(|_| 1..=context_len)
                .collect::<Vec<_>>();
            use itertools::Itertools;
            for labels in labelings.into_iter().multi_cartesian_product() {
                let t = label_holes(&s.term, &mut labels.iter().copied());
                terms.push((order_key(sig, &t), labels, t));
            }
            if s.holes == 0 {
                terms.push((order_key(sig, &s.term), Vec::new(), s.term.clone()));
            }
        }
        terms.sort();
        terms.dedup_by(|a, b| a.2 == b.2);
        out.extend(
            terms
                .into_iter()
                .map(|(_, _, t)| TermInContext::new(t, context_len).expect("labels within context")),
        );
    }
    out
}

/// A flabby term, a non-identity permutation and a proof of `t = σ·t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlabbyReport {
    pub term: TermInContext,
    pub permutation: Permutation,
    pub derivation: Derivation,
}

impl FlabbyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "term": self.term.term().to_string(),
            "context": self.term.context_len(),
            "permutation": self.permutation.images(),
            "derivation": self.derivation.to_json(),
        })
    }
}

/// Checks that the term is linear-regular, the permutation is not the
/// identity and the derivation replays from `t` to `σ·t`.
pub fn verify_report(r: &FlabbyReport, th: &Theory) -> bool {
    if !r.term.is_linear_regular()
        || r.permutation.is_identity()
        || r.permutation.size() != r.term.context_len()
    {
        return false;
    }
    let Ok(target) = r.term.permute(&r.permutation) else {
        return false;
    };
    r.derivation.start() == &r.term && r.derivation.end() == &target && r.derivation.replay(th)
}

/// What a search examined, and whether its negative answer is a
/// certificate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchCertificate {
    pub max_size: usize,
    pub max_context: usize,
    pub bounds: Option<SearchBounds>,
    /// Terms produced by the enumeration.
    pub terms_enumerated: usize,
    /// Terms with at least two context variables, whose closures were built.
    pub closures_built: usize,
    pub largest_closure: usize,
    pub total_closure_size: usize,
    /// Some closure discarded a term for exceeding the size cap.
    pub cap_hit: bool,
    /// Closures stopped by the depth bound with terms left to expand.
    pub depth_limited: usize,
    /// Closures stopped by the node budget.
    pub budget_exhausted: usize,
}

impl SearchCertificate {
    /// Every closure was computed exactly.
    pub fn is_exhaustive(&self) -> bool {
        !self.cap_hit && self.depth_limited == 0 && self.budget_exhausted == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlabbyOutcome {
    Found {
        report: Box<FlabbyReport>,
        certificate: SearchCertificate,
    },
    /// No flabby term in the fragment: every closure was exact.
    Exhausted(SearchCertificate),
    /// No witness found, but some closure was cut short.
    Inconclusive(SearchCertificate),
}

impl FlabbyOutcome {
    pub fn report(&self) -> Option<&FlabbyReport> {
        match self {
            FlabbyOutcome::Found { report, .. } => Some(report),
            _ => None,
        }
    }

    pub fn certificate(&self) -> &SearchCertificate {
        match self {
            FlabbyOutcome::Found { certificate, .. }
            | FlabbyOutcome::Exhausted(certificate)
            | FlabbyOutcome::Inconclusive(certificate) => certificate,
        }
    }
}

struct TermResult {
    report: Option<FlabbyReport>,
    closure_size: usize,
    cap_hit: bool,
    depth_limited: bool,
    budget_exhausted: bool,
}

fn examine(th: &Theory, t: &TermInContext, bounds: &SearchBounds) -> TermResult {
    let closure = bounded_closure(th, t, bounds);
    let report = Permutation::all(t.context_len())
        .filter(|p| !p.is_identity())
        .find_map(|sigma| {
            let target = t.permute(&sigma).expect("permutation matches context");
            let derivation = closure.derivation_to(target.term())?;
            Some(FlabbyReport {
                term: t.clone(),
                permutation: sigma,
                derivation,
            })
        });
    TermResult {
        report,
        closure_size: closure.len(),
        cap_hit: closure.cap_hit(),
        depth_limited: !closure.is_complete() && !closure.budget_exhausted(),
        budget_exhausted: closure.budget_exhausted(),
    }
}

const BATCH: usize = 64;

/// Looks for a flabby term among the linear-regular terms of size at most
/// `max_size` with at most `max_context` variables. For each term the
/// bounded closure is built once and every non-identity permutation of it
/// is looked up, in lexicographic order. The first witness in canonical
/// order is returned.
pub fn search_flabby(
    th: &Theory,
    max_size: usize,
    max_context: usize,
    bounds: &SearchBounds,
) -> FlabbyOutcome {
    let mut cert = SearchCertificate {
        max_size,
        max_context,
        bounds: Some(*bounds),
        ..SearchCertificate::default()
    };
    let mut terms = enumerate_linear_regular(th.signature(), max_size, max_context).peekable();
    while terms.peek().is_some() {
        let batch: Vec<TermInContext> = terms.by_ref().take(BATCH).collect();
        let results: Vec<Option<TermResult>> = batch
            .par_iter()
            .map(|t| (t.context_len() >= 2).then(|| examine(th, t, bounds)))
            .collect();
        for result in results {
            cert.terms_enumerated += 1;
            let Some(r) = result else { continue };
            cert.closures_built += 1;
            cert.largest_closure = cert.largest_closure.max(r.closure_size);
            cert.total_closure_size += r.closure_size;
            cert.cap_hit |= r.cap_hit;
            cert.depth_limited += usize::from(r.depth_limited);
            cert.budget_exhausted += usize::from(r.budget_exhausted);
            if let Some(report) = r.report {
                debug_assert!(verify_report(&report, th));
                return FlabbyOutcome::Found {
                    report: Box::new(report),
                    certificate: cert,
                };
            }
        }
    }
    if cert.is_exhaustive() {
        FlabbyOutcome::Exhausted(cert)
    } else {
        FlabbyOutcome::Inconclusive(cert)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::theory::parse_theory;

    fn t0() -> Theory {
        parse_theory("symbol l 2\nsymbol r 2\nsymbol m 2\naxiom [2] l(x1,x2) = r(x2,x1)\n").unwrap()
    }

    fn strings(it: impl Iterator<Item = TermInContext>) -> Vec<String> {
        it.map(|t| t.term().to_string()).collect()
    }

    #[test]
    fn t0_small_terms() {
        let th = t0();
        let terms = strings(enumerate_linear_regular(th.signature(), 3, 2));
        assert_eq!(terms, vec!["x1", "l(x1,x2)", "r(x1,x2)", "m(x1,x2)"]);
    }

    #[test]
    fn smallest_term_is_a_variable() {
        let th = t0();
        assert_eq!(strings(enumerate_linear_regular(th.signature(), 1, 3)), vec!["x1"]);
    }

    #[test]
    fn unary_signature_example() {
        let sig = Signature::new(vec![
            crate::Symbol::new("a", 1),
            crate::Symbol::new("alpha", 1),
            crate::Symbol::new("m", 2),
        ])
        .unwrap();
        let terms = strings(enumerate_linear_regular(&sig, 3, 1));
        assert_eq!(
            terms,
            vec![
                "x1",
                "a(x1)",
                "alpha(x1)",
                "a(a(x1))",
                "a(alpha(x1))",
                "alpha(a(x1))",
                "alpha(alpha(x1))"
            ]
        );
    }

    #[test]
    fn enumeration_counts_match_catalan_times_labels() {
        // Binary trees with k internal nodes: Catalan(k) shapes, 3^k labels.
        let th = t0();
        let counts: Vec<usize> = (1..=9)
            .map(|s| {
                enumerate_linear_regular(th.signature(), 9, 5)
                    .filter(|t| t.size() == s)
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 0, 3, 0, 18, 0, 135, 0, 1134]);
    }

    #[test]
    fn all_terms_include_repeated_variables() {
        let th = t0();
        let terms = strings(enumerate_terms(th.signature(), 3, 2).into_iter());
        assert_eq!(terms.len(), 2 + 3 * 4);
        assert!(terms.contains(&"m(x2,x2)".to_string()));
    }

    #[test]
    fn commutative_theory_has_witness() {
        let th = parse_theory("symbol m 2\naxiom [2] m(x1,x2) = m(x2,x1)\n").unwrap();
        let out = search_flabby(&th, 5, 3, &SearchBounds::with_depth(4));
        let report = out.report().expect("witness");
        assert_eq!(report.term.term().to_string(), "m(x1,x2)");
        assert_eq!(report.derivation.len(), 1);
        assert!(verify_report(report, &th));
    }

    #[test]
    fn verify_rejects_bad_reports() {
        let th = parse_theory("symbol m 2\naxiom [2] m(x1,x2) = m(x2,x1)\n").unwrap();
        let good = search_flabby(&th, 3, 2, &SearchBounds::with_depth(2))
            .report()
            .cloned()
            .unwrap();
        let identity = FlabbyReport {
            permutation: Permutation::identity(2),
            ..good.clone()
        };
        assert!(!verify_report(&identity, &th));
        let nonlinear = TermInContext::new(parse_term("m(x1,x1)", th.signature()).unwrap(), 2).unwrap();
        let bad = FlabbyReport {
            term: nonlinear,
            ..good
        };
        assert!(!verify_report(&bad, &th));
    }

    #[test]
    fn free_theory_fragment_is_exhausted() {
        let th = parse_theory("symbol m 2\n").unwrap();
        let out = search_flabby(&th, 7, 4, &SearchBounds::with_depth(3));
        assert!(matches!(out, FlabbyOutcome::Exhausted(_)), "{out:?}");
    }
}
