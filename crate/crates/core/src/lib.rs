//! Workbench for linear-regular equational theories.
//!
//! The crate covers terms in context and simple substitutions ([`term`]),
//! theories and their file format ([`theory`], [`syntax`]), rewriting with
//! replayable derivations and bounded proof search ([`rewrite`]),
//! interpretations between theories ([`interp`]), the reduction from the
//! word problem for monoids to rigidity ([`reduction`]), the retraction of
//! terms onto special terms ([`hat`]) and bounded search for flabby terms
//! ([`rigidity`]).

pub mod hat;
pub mod interp;
pub mod reduction;
pub mod rewrite;
pub mod rigidity;
pub mod syntax;
pub mod term;
pub mod theory;

pub use rewrite::{
    apply_step, bounded_closure, prove_bounded, successors, symbol_census, Derivation, Direction,
    ProofOutcome, RewriteStep, SearchBounds,
};
pub use term::{Permutation, Symbol, Term, TermInContext, VarMap};
pub use theory::{parse_theory, Equation, Signature, Theory};
pub use interp::{load_interpretation, parse_interpretation, Interpretation};
pub use reduction::{
    build_interpretation, build_t0, compile_reduction, flabby_witness, word_bfs, word_semidecide,
    Word, WordDerivation, WordOutcome, WordProblemInstance,
};
pub use rigidity::{search_flabby, verify_report, FlabbyOutcome, FlabbyReport};
pub use hat::{is_special, special_preimage, BoundedWordOracle, HatNormalizer, WordOracle};
