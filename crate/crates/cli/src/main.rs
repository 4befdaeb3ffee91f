//! `rigidlab`: command-line front end.
//!
//! Every command prints one JSON document on stdout and logs to stderr.
//! Exit codes: 0 positive result, 1 definite negative, 2 bounds exhausted,
//! 3 usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rigidlab::hat::HatNormalizer;
use rigidlab::interp::load_interpretation;
use rigidlab::reduction::{
    build_interpretation, build_t0, compile_reduction, word_bfs, word_semidecide, WordDerivation,
    WordOutcome, WordProblemInstance,
};
use rigidlab::rewrite::{symbol_census, Derivation, ProofOutcome, SearchBounds, DEFAULT_NODE_BUDGET};
use rigidlab::rigidity::{search_flabby, FlabbyOutcome};
use rigidlab::syntax::{parse_equation, parse_term, parse_term_in_context};
use rigidlab::{BoundedWordOracle, Theory};

const EXIT_POSITIVE: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "rigidlab", version, about = "Workbench for linear-regular equational theories")]
struct Cli {
    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct BoundsArgs {
    /// Maximum number of rewrite steps.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Allowed growth of intermediate terms over the largest goal term.
    #[arg(long, default_value_t = 8)]
    slack: usize,
    /// Explicit cap on intermediate term size (overrides --slack).
    #[arg(long)]
    size_cap: Option<usize>,
    /// Maximum number of terms expanded per search.
    #[arg(long, env = "RIGIDLAB_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

impl From<BoundsArgs> for SearchBounds {
    fn from(b: BoundsArgs) -> Self {
        SearchBounds {
            depth: b.depth,
            slack: b.slack,
            size_cap: b.size_cap,
            node_budget: b.node_budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search for a derivation of an equation, e.g. "[2] l(x1,x2) = r(x2,x1)".
    Prove {
        theory: PathBuf,
        equation: String,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Check a derivation exported as JSON.
    Replay { theory: PathBuf, derivation: PathBuf },
    /// Compile a word problem instance into theory and interpretation files.
    Reduce {
        instance: PathBuf,
        /// Directory for the generated files (default: next to the instance).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Search for flabby terms.
    Rigidity {
        #[command(subcommand)]
        command: RigidityCommand,
    },
    /// Map a term of the compiled theory onto a special term.
    Hat {
        instance: PathBuf,
        term: String,
        /// Context length (default: the largest variable index).
        #[arg(long)]
        context: Option<usize>,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Decide equality of two words within bounds.
    Word {
        instance: PathBuf,
        left: String,
        right: String,
        /// Search on words directly instead of on the compiled theory.
        #[arg(long)]
        direct: bool,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Probe whether an interpretation reflects provability.
    Conservativity {
        interpretation: PathBuf,
        /// Largest source term size probed.
        #[arg(long, default_value_t = 5)]
        max_size: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Count a symbol in every term along a derivation.
    Census {
        theory: PathBuf,
        derivation: PathBuf,
        symbol: String,
    },
}

#[derive(Subcommand)]
enum RigidityCommand {
    Search {
        theory: PathBuf,
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long, default_value_t = 3)]
        max_context: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_theory(path: &Path) -> Result<Theory> {
    Theory::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<WordProblemInstance> {
    WordProblemInstance::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_derivation(path: &Path, th: &Theory) -> Result<Derivation> {
    Derivation::from_json(&read(path)?, th.signature())
        .with_context(|| format!("reading derivation {}", path.display()))
}

fn bounds_json(b: &SearchBounds) -> Value {
    serde_json::to_value(b).expect("bounds serialize")
}

fn proof_json(outcome: &ProofOutcome) -> Value {
    match outcome {
        ProofOutcome::Proved { derivation, stats } => json!({
            "result": "proved",
            "derivation": derivation.to_json(),
            "stats": stats,
        }),
        ProofOutcome::NotFound { reason, stats } => json!({
            "result": "not_found",
            "reason": reason,
            "certified_unprovable": outcome.is_certified_unprovable(),
            "stats": stats,
        }),
    }
}

fn proof_exit(outcome: &ProofOutcome) -> u8 {
    if outcome.is_proved() {
        EXIT_POSITIVE
    } else if outcome.is_certified_unprovable() {
        EXIT_NEGATIVE
    } else {
        EXIT_INDETERMINATE
    }
}

fn word_derivation_json(inst: &WordProblemInstance, d: &WordDerivation) -> Value {
    json!({
        "start": inst.render_word(&d.start),
        "end": inst.render_word(&d.end),
        "steps": d.steps,
    })
}

fn word_outcome_json(inst: &WordProblemInstance, out: &WordOutcome) -> Value {
    match out {
        WordOutcome::Derivable { derivation } => json!({
            "answer": "derivable",
            "derivation": word_derivation_json(inst, derivation),
        }),
        WordOutcome::NotDerivable { stats } => json!({ "answer": "not_derivable", "stats": stats }),
        WordOutcome::Unknown { reason, stats } => {
            json!({ "answer": "unknown", "reason": reason, "stats": stats })
        }
    }
}

fn word_exit(out: &WordOutcome) -> u8 {
    match out {
        WordOutcome::Derivable { .. } => EXIT_POSITIVE,
        WordOutcome::NotDerivable { .. } => EXIT_NEGATIVE,
        WordOutcome::Unknown { .. } => EXIT_INDETERMINATE,
    }
}

fn run(cli: Cli) -> Result<(Value, u8)> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Prove {
            theory,
            equation,
            bounds,
        } => {
            let th = load_theory(&theory)?;
            let goal = parse_equation(&equation, th.signature())
                .with_context(|| format!("parsing equation `{equation}`"))?;
            let bounds = SearchBounds::from(bounds);
            eprintln!("proving {goal}");
            let outcome = rigidlab::prove_bounded(&th, &goal, &bounds);
            let mut doc = proof_json(&outcome);
            doc["equation"] = json!(goal.to_string());
            doc["bounds"] = bounds_json(&bounds);
            Ok((doc, proof_exit(&outcome)))
        }
        Command::Replay { theory, derivation } => {
            let th = load_theory(&theory)?;
            let d = load_derivation(&derivation, &th)?;
            Ok(match d.check(&th) {
                Ok(()) => (
                    json!({ "valid": true, "equation": d.equation().to_string(), "steps": d.len() }),
                    EXIT_POSITIVE,
                ),
                Err(e) => {
                    eprintln!("derivation does not replay: {e}");
                    (json!({ "valid": false, "error": e.to_string() }), EXIT_NEGATIVE)
                }
            })
        }
        Command::Reduce { instance, out_dir } => {
            let inst = load_instance(&instance)?;
            let dir = out_dir
                .or_else(|| instance.parent().map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = instance
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("instance")
                .to_string();
            let t_name = format!("{stem}.thy");
            let itp_name = format!("{stem}.itp");
            let th = compile_reduction(&inst);
            let interp = build_interpretation(&inst);
            let files = [
                (t_name.clone(), th.render()),
                ("t0.thy".to_string(), build_t0().render()),
                (itp_name.clone(), interp.render("t0.thy", &t_name)),
            ];
            let mut written = Vec::new();
            for (name, text) in files {
                let path = dir.join(&name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
                written.push(path.display().to_string());
            }
            Ok((
                json!({
                    "theory": dir.join(&t_name).display().to_string(),
                    "interpretation": dir.join(&itp_name).display().to_string(),
                    "files": written,
                    "axioms": th.axioms().len(),
                }),
                EXIT_POSITIVE,
            ))
        }
        Command::Rigidity {
            command:
                RigidityCommand::Search {
                    theory,
                    max_size,
                    max_context,
                    bounds,
                },
        } => {
            let th = load_theory(&theory)?;
            let bounds = SearchBounds::from(bounds);
            eprintln!("searching terms up to size {max_size} with up to {max_context} variables");
            let outcome = search_flabby(&th, max_size, max_context, &bounds);
            let certificate = serde_json::to_value(outcome.certificate())?;
            Ok(match &outcome {
                FlabbyOutcome::Found { report, .. } => (
                    json!({ "result": "flabby", "report": report.to_json(), "certificate": certificate }),
                    EXIT_POSITIVE,
                ),
                FlabbyOutcome::Exhausted(_) => {
                    (json!({ "result": "exhausted", "certificate": certificate }), EXIT_NEGATIVE)
                }
                FlabbyOutcome::Inconclusive(_) => (
                    json!({ "result": "inconclusive", "certificate": certificate }),
                    EXIT_INDETERMINATE,
                ),
            })
        }
        Command::Hat {
            instance,
            term,
            context,
            bounds,
        } => {
            let inst = load_instance(&instance)?;
            let bounds = SearchBounds::from(bounds);
            let oracle = BoundedWordOracle::new(&inst, bounds);
            let normalizer = HatNormalizer::new(&inst, &oracle);
            let sig = normalizer.theory().signature();
            let t = match context {
                Some(n) => parse_term_in_context(&term, sig, n),
                None => parse_term(&term, sig).map(rigidlab::TermInContext::minimal),
            }
            .with_context(|| format!("parsing term `{term}`"))?;
            let result = normalizer.hat(&t)?;
            let preimage = normalizer.special_preimage(&result.term);
            let decisions: Vec<Value> = result
                .decisions
                .iter()
                .map(|d| {
                    json!({
                        "position": d.position,
                        "word": inst.render_word(&d.word),
                        "clause": d.clause,
                        "uncertain": d.uncertain,
                        "queries": d.queries.iter().map(|q| json!({
                            "left": inst.render_word(&q.left),
                            "right": inst.render_word(&q.right),
                            "outcome": word_outcome_json(&inst, &q.answer),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let warnings = result.warnings().count();
            if warnings > 0 {
                eprintln!("{warnings} decision(s) rest on inconclusive word searches");
            }
            Ok((
                json!({
                    "input": t.to_string(),
                    "hat": result.term.to_string(),
                    "preimage": preimage.map(|p| p.to_string()),
                    "warnings": warnings,
                    "decisions": decisions,
                    "bounds": bounds_json(&bounds),
                }),
                if warnings == 0 { EXIT_POSITIVE } else { EXIT_INDETERMINATE },
            ))
        }
        Command::Word {
            instance,
            left,
            right,
            direct,
            bounds,
        } => {
            let inst = load_instance(&instance)?;
            let w1 = inst.parse_word(&left)?;
            let w2 = inst.parse_word(&right)?;
            let bounds = SearchBounds::from(bounds);
            let out = if direct {
                word_bfs(&inst, &w1, &w2, &bounds)?
            } else {
                word_semidecide(&inst, &w1, &w2, &bounds)?
            };
            let mut doc = word_outcome_json(&inst, &out);
            doc["left"] = json!(inst.render_word(&w1));
            doc["right"] = json!(inst.render_word(&w2));
            doc["method"] = json!(if direct { "words" } else { "terms" });
            doc["bounds"] = bounds_json(&bounds);
            Ok((doc, word_exit(&out)))
        }
        Command::Conservativity {
            interpretation,
            max_size,
            bounds,
        } => {
            let interp = load_interpretation(&interpretation)?;
            let bounds = SearchBounds::from(bounds);
            eprintln!("probing source terms up to size {max_size}");
            let report = interp.probe_conservativity(max_size, &bounds);
            let code = if !report.confirmed.is_empty() {
                EXIT_NEGATIVE
            } else if !report.candidates.is_empty() {
                EXIT_INDETERMINATE
            } else {
                EXIT_POSITIVE
            };
            Ok((report.to_json(), code))
        }
        Command::Census {
            theory,
            derivation,
            symbol,
        } => {
            let th = load_theory(&theory)?;
            let d = load_derivation(&derivation, &th)?;
            if th.symbol(&symbol).is_none() {
                bail!("`{symbol}` is not a symbol of {}", theory.display());
            }
            let counts = symbol_census(&d, &th, &symbol)?;
            let constant = counts.windows(2).all(|w| w[0] == w[1]);
            Ok((
                json!({ "symbol": symbol, "counts": counts, "constant": constant }),
                EXIT_POSITIVE,
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((doc, code)) => {
            let text = serde_json::to_string_pretty(&doc).expect("json");
            // a closed stdout (e.g. piped into `head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
