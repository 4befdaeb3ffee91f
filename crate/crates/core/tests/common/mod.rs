//! Random terms and random-walk derivations shared by the integration
//! tests. Everything is driven by a seeded ChaCha generator.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use rigidlab::rewrite::successors;
use rigidlab::{Derivation, Signature, Term, TermInContext, Theory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits `total` into `parts` positive summands.
fn split(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<usize> {
    let mut sizes = vec![1; parts];
    for _ in 0..total - parts {
        sizes[rng.gen_range(0..parts)] += 1;
    }
    sizes
}

/// A random term with exactly `size` nodes when the signature allows it,
/// variables drawn from `x1..x_{context_len}`.
pub fn random_term_of_size(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    size: usize,
    context_len: usize,
) -> Term {
    let fitting: Vec<_> = sig
        .symbols()
        .iter()
        .filter(|s| if size == 1 { s.arity() == 0 } else { s.arity() >= 1 && s.arity() < size })
        .collect();
    if size == 1 && context_len > 0 && (fitting.is_empty() || rng.gen_bool(0.8)) {
        return Term::var(rng.gen_range(1..=context_len));
    }
    let Some(f) = fitting.choose(rng) else {
        return Term::var(rng.gen_range(1..=context_len.max(1)));
    };
    let children = split(rng, size - 1, f.arity())
        .into_iter()
        .map(|s| random_term_of_size(rng, sig, s, context_len))
        .collect();
    Term::app(f, children)
}

/// A random term of at most `max_size` nodes. With probability `seeding`
/// an application node is replaced by an instance of a random axiom side,
/// so that rewriting has something to act on.
pub fn random_term(
    rng: &mut ChaCha8Rng,
    th: &Theory,
    max_size: usize,
    context_len: usize,
    seeding: f64,
) -> Term {
    let size = rng.gen_range(1..=max_size);
    seeded(rng, th, size, context_len, seeding)
}

fn seeded(rng: &mut ChaCha8Rng, th: &Theory, size: usize, context_len: usize, seeding: f64) -> Term {
    if size > 1 && !th.axioms().is_empty() && rng.gen_bool(seeding) {
        let ax = th.axioms().choose(rng).unwrap();
        let side = if rng.gen_bool(0.5) { ax.lhs() } else { ax.rhs() };
        let holes = side.term().var_occurrences().len();
        let skeleton = side.term().size() - holes;
        if ax.context_len() > 0 && skeleton + holes <= size {
            let sizes = split(rng, size - skeleton - (holes - ax.context_len()), ax.context_len());
            let args: Vec<Term> = sizes
                .into_iter()
                .map(|s| seeded(rng, th, s, context_len, seeding))
                .collect();
            return side.term().instantiate(&args);
        }
    }
    let sig = th.signature();
    let fitting: Vec<_> = sig
        .symbols()
        .iter()
        .filter(|s| s.arity() >= 1 && s.arity() < size)
        .collect();
    match fitting.choose(rng) {
        Some(f) if size > 1 => {
            let children = split(rng, size - 1, f.arity())
                .into_iter()
                .map(|s| seeded(rng, th, s, context_len, seeding))
                .collect();
            Term::app(f, children)
        }
        _ => random_term_of_size(rng, sig, 1, context_len),
    }
}

/// Takes up to `steps` uniformly random rewrite steps from `start`,
/// keeping terms within `size_cap`. Stops early at a term with no
/// successors.
pub fn random_walk(
    rng: &mut ChaCha8Rng,
    th: &Theory,
    start: TermInContext,
    steps: usize,
    size_cap: usize,
) -> Derivation {
    let mut current = start.clone();
    let mut taken = Vec::new();
    for _ in 0..steps {
        let next = successors(&current, th, size_cap);
        let Some((t, step)) = next.choose(rng).cloned() else {
            break;
        };
        taken.push(step);
        current = t;
    }
    Derivation::new(start, taken, current)
}
