//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test --release -p rigidlab --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use rigidlab::hat::{CongruenceCheck, HatNormalizer};
use rigidlab::rewrite::symbol_census;
use rigidlab::syntax::parse_term;
use rigidlab::{
    build_interpretation, build_t0, compile_reduction, flabby_witness, search_flabby,
    verify_report, word_bfs, word_semidecide, BoundedWordOracle, FlabbyOutcome, Permutation,
    SearchBounds, Signature, Term, TermInContext, Word, WordProblemInstance,
};

type Criterion = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn inst(alphabet: &[&str], rels: &[(&str, &str)], goal: (&str, &str)) -> WordProblemInstance {
    WordProblemInstance::from_strs(alphabet, rels, goal).unwrap()
}

fn comm() -> WordProblemInstance {
    inst(&["a", "b"], &[("ab", "ba")], ("ab", "ba"))
}

fn test_instances() -> Vec<WordProblemInstance> {
    vec![
        comm(),
        inst(&["a"], &[("a", "aa")], ("a", "aa")),
        inst(&["a", "b"], &[], ("a", "b")),
        inst(&["a", "b"], &[("ab", "ba")], ("ab", "aa")),
        inst(&["a", "b"], &[("ab", "eps"), ("ba", "eps")], ("aab", "a")),
        inst(&["a", "b", "c"], &[("ab", "c"), ("cc", "eps")], ("eps", "abab")),
    ]
}

/// Renames variables in order of first occurrence.
fn canonical(t: &Term) -> Term {
    let mut order = Vec::new();
    for v in t.var_occurrences() {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    t.map_vars(&|v| Term::var(order.iter().position(|&w| w == v).unwrap() + 1))
}

/// Every term of size at most `max_size` up to renaming of variables:
/// all shapes over `sig`, each leaf sequence labelled by every restricted
/// growth string.
fn all_terms_up_to_renaming(sig: &Signature, max_size: usize) -> Vec<TermInContext> {
    fn shapes(sig: &Signature, size: usize, memo: &mut BTreeMap<usize, Vec<Term>>) -> Vec<Term> {
        if let Some(v) = memo.get(&size) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out.push(Term::var(1));
        }
        for f in sig.symbols() {
            match f.arity() {
                0 if size == 1 => out.push(Term::app(f, vec![])),
                1 if size >= 2 => {
                    for c in shapes(sig, size - 1, memo) {
                        out.push(Term::app(f, vec![c]));
                    }
                }
                2 if size >= 3 => {
                    for left in 1..size - 1 {
                        let ls = shapes(sig, left, memo);
                        let rs = shapes(sig, size - 1 - left, memo);
                        for l in &ls {
                            for r in &rs {
                                out.push(Term::app(f, vec![l.clone(), r.clone()]));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        memo.insert(size, out.clone());
        out
    }
    fn growth_strings(len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for s in out {
                let top = s.iter().copied().max().unwrap_or(0);
                for v in 1..=top + 1 {
                    let mut t = s.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
    let mut memo = BTreeMap::new();
    let mut out = Vec::new();
    for size in 1..=max_size {
        for shape in shapes(sig, size, &mut memo) {
            let leaves = shape.var_occurrences().len();
            for labels in growth_strings(leaves) {
                let mut it = labels.iter();
                let t = relabel(&shape, &mut it);
                let n = labels.iter().copied().max().unwrap_or(0);
                out.push(TermInContext::new(t, n).unwrap());
            }
        }
    }
    out
}

fn relabel(t: &Term, labels: &mut std::slice::Iter<usize>) -> Term {
    match t {
        Term::Var(_) => Term::var(*labels.next().unwrap()),
        Term::App(f, cs) => Term::app(f, cs.iter().map(|c| relabel(c, labels)).collect()),
    }
}

fn catalan(k: usize) -> usize {
    (0..k).fold(1, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

// 1. The theory with l(x1,x2) = r(x2,x1) has no flabby term in the fragment.
fn criterion_1() -> Verdict {
    let t0 = build_t0();
    let bounds = SearchBounds {
        depth: 8,
        slack: 8,
        ..SearchBounds::default()
    };
    let out = search_flabby(&t0, 9, 4, &bounds);
    let cert = out.certificate();
    // linear-regular terms over three binary symbols: k nodes, k+1 leaves
    let expected: usize = (0..=3).map(|k| catalan(k) * 3usize.pow(k as u32)).sum();
    let exhausted = matches!(out, FlabbyOutcome::Exhausted(_));
    verdict(
        exhausted && !cert.cap_hit && cert.terms_enumerated == expected,
        format!(
            "exhausted={exhausted} cap_hit={} terms={} (expected {expected}) largest_closure={}",
            cert.cap_hit, cert.terms_enumerated, cert.largest_closure
        ),
    )
}

// 2. Yes-instances yield a flabby term matching the constructed witness.
fn criterion_2() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for inst in [comm(), inst(&["a"], &[("a", "aa")], ("a", "aa"))] {
        let th = compile_reduction(&inst);
        let (u, v) = inst.goal().clone();
        let wd = word_bfs(&inst, &u, &v, &SearchBounds::with_depth(4)).unwrap();
        let witness = flabby_witness(&inst, wd.derivation().expect("goal words are equal")).unwrap();
        let out = search_flabby(&th, 7, 3, &SearchBounds::with_depth(4));
        match out.report() {
            Some(r) => {
                let valid = verify_report(r, &th) && r.derivation.replay(&th);
                let same = canonical(r.term.term()) == canonical(witness.term.term());
                let short = r.derivation.len() <= 4;
                ok &= valid && same && short && verify_report(&witness, &th);
                notes.push(format!(
                    "{} steps={} matches_witness={same} valid={valid}",
                    r.term.term(),
                    r.derivation.len()
                ));
            }
            None => {
                ok = false;
                notes.push(format!("no witness for goal {}", inst.render_word(&u)));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

// 3. Conservativity fails exactly on the yes-instance.
fn criterion_3() -> Verdict {
    let yes = build_interpretation(&comm());
    let bounds = SearchBounds::with_depth(6);
    let report = yes.probe_conservativity(5, &bounds);
    let t0 = build_t0();
    let l = parse_term("l(x1,x2)", t0.signature()).unwrap();
    let r = parse_term("r(x1,x2)", t0.signature()).unwrap();
    let a = report.contains_confirmed(&l, &r) || report.contains_confirmed(&r, &l);
    let replayed = report
        .confirmed
        .iter()
        .all(|f| f.target_derivation.replay(yes.target()));

    let no = build_interpretation(&inst(&["a", "b"], &[], ("a", "b")));
    let report_b = no.probe_conservativity(7, &bounds);
    let b = report_b.confirmed.is_empty() && report_b.candidates.is_empty();
    verdict(
        a && replayed && b,
        format!(
            "(a) confirmed l/r={a} failures={} replay={replayed}; (b) sources={} pairs={} confirmed={} candidates={}",
            report.confirmed.len(),
            report_b.source_terms,
            report_b.pairs_examined,
            report_b.confirmed.len(),
            report_b.candidates.len()
        ),
    )
}

/// Fewest adjacent swaps turning `w1` into `w2`, matching equal letters
/// in order; `None` if the letter multisets differ.
fn swap_distance(w1: &Word, w2: &Word) -> Option<usize> {
    let mut s1 = w1.0.clone();
    let mut s2 = w2.0.clone();
    s1.sort();
    s2.sort();
    if s1 != s2 {
        return None;
    }
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let targets: Vec<usize> = w1
        .0
        .iter()
        .map(|l| {
            let k = seen.entry(*l).or_default();
            let pos = w2.0.iter().enumerate().filter(|(_, x)| *x == l).nth(*k).unwrap().0;
            *k += 1;
            pos
        })
        .collect();
    let mut inversions = 0;
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            if targets[i] > targets[j] {
                inversions += 1;
            }
        }
    }
    Some(inversions)
}

// 4. Word equality transfers to the compiled theory, with equal certificates.
fn criterion_4() -> Verdict {
    let inst = comm();
    let mut words = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..4 {
        layer = layer
            .iter()
            .flat_map(|w| (0..2).map(move |l| Word([w.0.clone(), vec![l]].concat())))
            .collect();
        words.extend(layer.iter().cloned());
    }
    let bounds = SearchBounds::default();
    let (mut pairs, mut agree, mut derivable) = (0, 0, 0);
    let mut first_bad = None;
    for w1 in &words {
        for w2 in &words {
            pairs += 1;
            let on_terms = word_semidecide(&inst, w1, w2, &bounds).unwrap();
            let on_words = word_bfs(&inst, w1, w2, &bounds).unwrap();
            let oracle = swap_distance(w1, w2);
            let ok = match (&on_terms, &on_words, oracle) {
                (t, w, Some(d)) if t.is_derivable() && w.is_derivable() => {
                    let (dt, dw) = (t.derivation().unwrap(), w.derivation().unwrap());
                    derivable += 1;
                    dt.len() == dw.len() && dt.len() == d && dt.replay(&inst) && dw.replay(&inst)
                }
                (t, w, None) => t.is_certified_not_derivable() && w.is_certified_not_derivable(),
                _ => false,
            };
            if ok {
                agree += 1;
            } else if first_bad.is_none() {
                first_bad = Some(format!("{} vs {}", inst.render_word(w1), inst.render_word(w2)));
            }
        }
    }
    verdict(
        agree == pairs,
        format!(
            "{agree}/{pairs} pairs agree ({derivable} derivable){}",
            first_bad.map(|b| format!(", first disagreement {b}")).unwrap_or_default()
        ),
    )
}

// 5. No derivation changes the number of m or alpha symbols.
fn criterion_5() -> Verdict {
    let mut rng = common::rng(5);
    let instances = test_instances();
    let (mut total, mut constant) = (0, 0);
    let count = |t: &TermInContext, needle: &str| t.term().to_string().matches(needle).count();
    while total < 1200 {
        let inst = &instances[total % instances.len()];
        let th = compile_reduction(inst);
        let n = rng.gen_range(1..=3);
        let start = TermInContext::new(common::random_term(&mut rng, &th, 14, n, 0.35), n).unwrap();
        let steps = rng.gen_range(1..=6);
        let d = common::random_walk(&mut rng, &th, start, steps, 14 + 8);
        if d.is_empty() {
            continue;
        }
        total += 1;
        let terms = d.trace(&th).unwrap();
        let m = symbol_census(&d, &th, "m").unwrap();
        let alpha = symbol_census(&d, &th, "alpha").unwrap();
        let oracle_m: Vec<usize> = terms.iter().map(|t| count(t, "m(")).collect();
        let oracle_alpha: Vec<usize> = terms.iter().map(|t| count(t, "alpha(")).collect();
        if m == oracle_m
            && alpha == oracle_alpha
            && m.windows(2).all(|w| w[0] == w[1])
            && alpha.windows(2).all(|w| w[0] == w[1])
        {
            constant += 1;
        }
    }
    verdict(
        constant == total,
        format!("{constant}/{total} non-empty derivations keep m and alpha counts"),
    )
}

// 6. Hat on the commutation instance.
fn criterion_6() -> Vec<(String, Verdict)> {
    let inst = comm();
    let oracle = BoundedWordOracle::new(&inst, SearchBounds::with_depth(32));
    let h = HatNormalizer::new(&inst, &oracle);
    let i = build_interpretation(&inst);
    let mut out = Vec::new();

    // (a) images of T0 terms are fixed, without warnings
    let sources = all_terms_up_to_renaming(i.source().signature(), 7);
    let mut fixed = 0;
    let mut warned = 0;
    let mut first_moved = None;
    for s in &sources {
        let image = i.extend(s).unwrap();
        let r = h.hat(&image).unwrap();
        if r.has_warnings() {
            warned += 1;
        }
        if r.term == image && !r.has_warnings() {
            fixed += 1;
        } else if first_moved.is_none() {
            first_moved = Some(format!("{} -> {} -> {}", s.term(), image.term(), r.term.term()));
        }
    }
    // Control, not part of the verdict: the same check where the goal
    // words are not equal.
    let apart = WordProblemInstance::from_strs(&["a", "b"], &[("ab", "ba")], ("ab", "aa")).unwrap();
    let apart_oracle = BoundedWordOracle::new(&apart, SearchBounds::with_depth(32));
    let apart_hat = HatNormalizer::new(&apart, &apart_oracle);
    let apart_i = build_interpretation(&apart);
    let control = sources
        .iter()
        .filter(|s| {
            let image = apart_i.extend(s).unwrap();
            let r = apart_hat.hat(&image).unwrap();
            r.term == image && !r.has_warnings()
        })
        .count();
    out.push((
        "6a".to_string(),
        verdict(
            fixed == sources.len() && warned == 0,
            format!(
                "{fixed}/{} images fixed, {warned} with warnings{}; control with goal (ab,aa): {control}/{} fixed",
                sources.len(),
                first_moved.map(|m| format!("; first moved: {m}")).unwrap_or_default(),
                sources.len()
            ),
        ),
    ));

    // (b), (c) over every term of size <= 10 up to renaming
    let terms = all_terms_up_to_renaming(h.theory().signature(), 10);
    let (mut vars_kept, mut idempotent, mut warned) = (0, 0, 0);
    for t in &terms {
        let r = h.hat(t).unwrap();
        warned += usize::from(r.has_warnings());
        if r.term.var_occurrences() == t.var_occurrences()
            && r.term.is_linear_regular() == t.is_linear_regular()
        {
            vars_kept += 1;
        }
        if h.hat(&r.term).unwrap().term == r.term {
            idempotent += 1;
        }
    }
    out.push((
        "6b".to_string(),
        verdict(
            vars_kept == terms.len() && warned == 0,
            format!("{vars_kept}/{} terms keep their variables, {warned} with warnings", terms.len()),
        ),
    ));
    out.push((
        "6c".to_string(),
        verdict(
            idempotent == terms.len(),
            format!("{idempotent}/{} terms idempotent", terms.len()),
        ),
    ));

    // (d) hat respects fuzzed derivations
    let th = compile_reduction(&inst);
    let mut rng = common::rng(6);
    let (mut total, mut found, mut uncertain) = (0, 0, 0);
    let mut first_bad = None;
    while total < 600 {
        let n = rng.gen_range(1..=3);
        let start = TermInContext::new(common::random_term(&mut rng, &th, 12, n, 0.4), n).unwrap();
        let steps = rng.gen_range(1..=5);
        let d = common::random_walk(&mut rng, &th, start, steps, 12 + 8);
        if d.is_empty() {
            continue;
        }
        total += 1;
        let bounds = SearchBounds::with_depth(2 * d.len() + 4);
        match h.check_congruence(&d, &bounds).unwrap() {
            CongruenceCheck::Found { .. } => found += 1,
            CongruenceCheck::OracleUncertain { .. } => uncertain += 1,
            CongruenceCheck::NotFound { start, end, .. } => {
                first_bad.get_or_insert_with(|| format!("{} vs {}", start.term(), end.term()));
            }
        }
    }
    out.push((
        "6d".to_string(),
        verdict(
            found == total,
            format!(
                "{found}/{total} derivations have provably equal hats, {uncertain} uncertain{}",
                first_bad.map(|b| format!("; first miss: {b}")).unwrap_or_default()
            ),
        ),
    ));
    out
}

// 7. Interpretation laws.
fn criterion_7() -> Verdict {
    let mut preserved = 0;
    let instances = test_instances();
    for inst in &instances {
        let i = build_interpretation(inst);
        let checks = i.check_preserves_axioms(&SearchBounds::with_depth(1));
        if checks.len() == 1 && checks.iter().all(|c| c.outcome.is_proved()) {
            preserved += 1;
        }
    }

    let mut rng = common::rng(7);
    let (mut pairs, mut composes, mut permutes) = (0, 0, 0);
    while pairs < 1200 {
        let inst = &instances[pairs % instances.len()];
        let i = build_interpretation(inst);
        let t0 = i.source().clone();
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let t = TermInContext::new(common::random_term(&mut rng, &t0, 11, n, 0.3), n).unwrap();
        let args: Vec<TermInContext> = (0..n)
            .map(|_| TermInContext::new(common::random_term(&mut rng, &t0, 5, m, 0.3), m).unwrap())
            .collect();
        pairs += 1;
        let lhs = i.extend(&t.substitute_terms(&args, m).unwrap()).unwrap();
        let images: Vec<TermInContext> = args.iter().map(|a| i.extend(a).unwrap()).collect();
        let rhs = i.extend(&t).unwrap().substitute_terms(&images, m).unwrap();
        if lhs == rhs {
            composes += 1;
        }
        let perms: Vec<Permutation> = Permutation::all(n).collect();
        let sigma = &perms[rng.gen_range(0..perms.len())];
        if i.extend(&t.permute(sigma).unwrap()).unwrap() == i.extend(&t).unwrap().permute(sigma).unwrap() {
            permutes += 1;
        }
    }
    verdict(
        preserved == instances.len() && composes == pairs && permutes == pairs,
        format!(
            "axiom preserved on {preserved}/{} instances; composition {composes}/{pairs}; permutation {permutes}/{pairs}",
            instances.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, v: Verdict, secs: f64| {
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            secs,
            v.detail
        );
    };
    let runs: [(&str, Criterion); 5] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
    ];
    for (name, f) in runs {
        let start = Instant::now();
        let v = f();
        report(name, v, start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    let sixes = criterion_6();
    let secs = start.elapsed().as_secs_f64();
    for (name, v) in sixes {
        report(&name, v, secs);
    }
    let start = Instant::now();
    report("7", criterion_7(), start.elapsed().as_secs_f64());
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion line(s) failed");
        ExitCode::FAILURE
    }
}
