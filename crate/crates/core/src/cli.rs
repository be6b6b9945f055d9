//! Command-line commands and their dispatch.

use crate::corpus::{check_corpus, Corpus, CorpusError};
use crate::lambda::{default_budget, reduce, Strategy};
use crate::logic::Formula;
use crate::positivity::classify;
use crate::report::Report;
use crate::semantics::{completeness_experiment, SyntacticModelConfig};
use crate::subtyping::{check_subproof, parse_subproof, search_subtype};
use crate::syntax::{parse_sexpr, ParseError};
use crate::typing::{
    check_derivation, convert, eta_expand_witness, parse_derivation, search_typing, Context, System, TypingLimits,
};
use crate::verify::{run_criterion, verify_corpus, VerifyConfig, CRITERIA};
use crate::workspace::{DerivationEntry, Workspace};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "af2lab", version, about = "Checker and realizability laboratory for AF2 and its extensions")]
pub struct Cli {
    /// Workspace file; the bundled corpus is used when absent.
    #[arg(short, long, global = true)]
    pub workspace: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Beta,
    Eta,
    Whnf,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Beta => Strategy::BetaNormalOrder,
            StrategyArg::Eta => Strategy::Eta,
            StrategyArg::Whnf => Strategy::WeakHead,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check every subproof and derivation.
    Check,
    /// Reduce a term (a name from the workspace or a literal).
    Reduce {
        #[arg(long, value_enum, default_value = "beta")]
        strategy: StrategyArg,
        #[arg(long)]
        budget: Option<usize>,
        term: String,
    },
    /// Print the ∀₂⁺ and ∀₂⁻ membership of a formula.
    Classify { formula: String },
    /// Check or search a containment proof of `A ⊆ B`.
    Subtype {
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// A proof to check instead of searching.
        #[arg(long, conflicts_with = "search")]
        proof: Option<String>,
        lhs: String,
        rhs: String,
    },
    /// Check or search a typing derivation.
    Typecheck {
        #[arg(long)]
        system: System,
        #[arg(long)]
        search: bool,
        #[arg(long)]
        depth: Option<usize>,
        /// Context name; empty when absent.
        #[arg(long)]
        ctx: Option<String>,
        #[arg(long, conflicts_with = "search")]
        proof: Option<String>,
        term: String,
        formula: String,
    },
    /// Convert a named derivation to another system.
    Transform {
        #[arg(long)]
        to: System,
        derivation: String,
    },
    /// η-expand the subject of a named derivation into a plain AF2 one.
    EtaWitness { derivation: String },
    /// Compare typability and semantic membership on small normal terms.
    Complete {
        #[arg(long = "type")]
        typ: String,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run the acceptance checks over a corpus.
    VerifyCorpus {
        /// Directory of `.af2` files.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
        /// Only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Corpus(#[from] CorpusError),
    #[error("{0}")]
    Usage(String),
}

/// Loads the workspace named on the command line, or the bundled corpus.
pub fn load(workspace: Option<&std::path::Path>) -> Result<Corpus, CliError> {
    match workspace {
        None => Ok(Corpus::bundled()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CorpusError::Io(p.display().to_string(), e))?;
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().to_string());
            Ok(Corpus::from_sources(&[(&name, &text)])?)
        }
    }
}

fn find_derivation<'a>(corpus: &'a Corpus, name: &str) -> Result<(&'a Workspace, &'a DerivationEntry), CliError> {
    corpus
        .files
        .iter()
        .find_map(|(_, ws)| ws.derivation(name).map(|d| (ws, d)))
        .ok_or_else(|| CliError::Usage(format!("no derivation named {name}")))
}

fn defines_any(ws: &Workspace, text: &str) -> bool {
    text.split(|c: char| !c.is_alphanumeric() && c != '_')
        .any(|w| !w.is_empty() && (ws.formula_def(w).is_some() || ws.term(w).is_some() || ws.context(w).is_some()))
}

/// The first workspace in which `accept` succeeds, trying those that
/// define a name occurring in `hint` first; the first error otherwise.
fn first_fit<'a, T>(
    corpus: &'a Corpus,
    hint: &str,
    accept: impl Fn(&'a Workspace) -> Result<T, CliError>,
) -> Result<(&'a Workspace, T), CliError> {
    let mut order: Vec<&Workspace> = corpus.files.iter().map(|(_, ws)| ws).collect();
    order.sort_by_key(|ws| !defines_any(ws, hint));
    let mut first_err = None;
    for ws in order {
        match accept(ws) {
            Ok(x) => return Ok((ws, x)),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| CliError::Usage("empty corpus".into())))
}

/// Resolves formula text, preferring workspaces that define a name in it.
pub fn resolve_formula<'a>(corpus: &'a Corpus, text: &str) -> Result<(&'a Workspace, Formula), CliError> {
    first_fit(corpus, text, |ws| Ok(ws.resolve_formula(text)?))
}

fn judgment(system: System, ctx: &str, e: &DerivationEntry) -> String {
    format!("judgment {system} {ctx} |- {} : {}", e.term, e.formula)
}

pub fn run(corpus: &Corpus, cmd: &Command) -> Result<Report, CliError> {
    let mut r = Report::new();
    match cmd {
        Command::Check => r = check_corpus(corpus),
        Command::Reduce { strategy, budget, term } => {
            let (_, t) = first_fit(corpus, term, |ws| Ok(ws.resolve_term(term)?))?;
            let out = reduce(&t, (*strategy).into(), budget.unwrap_or_else(default_budget));
            r.line(out.result.to_string());
            if out.is_normal() {
                r.pass("reduce", format!("normal after {} steps", out.steps));
            } else {
                r.unknown("reduce", format!("budget exhausted after {} steps", out.steps));
            }
        }
        Command::Classify { formula } => {
            let (_, a) = resolve_formula(corpus, formula)?;
            r.line(classify(&a).to_string());
        }
        Command::Subtype { search, depth, proof, lhs, rhs } => {
            let (ws, (a, b)) = first_fit(corpus, &format!("{lhs} {rhs}"), |ws| Ok((ws.resolve_formula(lhs)?, ws.resolve_formula(rhs)?)))?;
            let name = format!("subtype {a} <= {b}");
            match (proof, search) {
                (Some(p), _) => {
                    let p = parse_subproof(&parse_sexpr(p)?, &ws.sig)?;
                    match check_subproof(&ws.eqs, &p, &a, &b) {
                        Ok(()) => r.pass(name, p.to_string()),
                        Err(e) => r.fail(name, e.to_string()),
                    }
                }
                (None, true) => match search_subtype(&ws.eqs, &a, &b, *depth) {
                    Some(p) => {
                        r.line(p.to_string());
                        r.pass(name, "found");
                    }
                    None => r.unknown(name, format!("not found within depth {depth}")),
                },
                (None, false) => return Err(CliError::Usage("subtype needs --search or --proof".into())),
            }
        }
        Command::Typecheck { system, search, depth, ctx, proof, term, formula } => {
            let hint = format!("{} {term} {formula}", ctx.as_deref().unwrap_or(""));
            let (ws, (g, t, a)) = first_fit(corpus, &hint, |ws| {
                let g = match ctx {
                    Some(n) => ws.context(n).cloned().ok_or_else(|| CliError::Usage(format!("no context named {n}")))?,
                    None => Context::new(),
                };
                Ok((g, ws.resolve_term(term)?, ws.resolve_formula(formula)?))
            })?;
            let name = format!("typecheck {system} {} : {a}", t);
            match (proof, search) {
                (Some(p), _) => {
                    let d = parse_derivation(&parse_sexpr(p)?, &ws.sig)?;
                    match check_derivation(*system, &ws.eqs, &d, &g, &t, &a) {
                        Ok(()) => r.pass(name, "checks"),
                        Err(e) => r.fail(name, e.to_string()),
                    }
                }
                (None, true) => {
                    let mut limits = TypingLimits::default();
                    if let Some(k) = depth {
                        limits.depth = *k;
                    }
                    match search_typing(*system, &ws.eqs, &g, &t, &a, &limits) {
                        Ok(Some(d)) => {
                            r.line(d.to_string());
                            r.pass(name, "found");
                        }
                        Ok(None) => r.unknown(name, format!("not found within depth {}", limits.depth)),
                        Err(e) => r.fail(name, e.to_string()),
                    }
                }
                (None, false) => return Err(CliError::Usage("typecheck needs --search or --proof".into())),
            }
        }
        Command::Transform { to, derivation } => {
            let (ws, e) = find_derivation(corpus, derivation)?;
            let name = format!("transform {derivation} {} -> {to}", e.system);
            let res = convert(&ws.eqs, &e.proof, e.system, *to, &e.ctx, &e.term, &e.formula)
                .map_err(|m| m.to_string())
                .and_then(|d| check_derivation(*to, &ws.eqs, &d, &e.ctx, &e.term, &e.formula).map(|()| d).map_err(|m| m.to_string()));
            match res {
                Ok(d) => {
                    r.line(judgment(*to, &e.ctx_name, e));
                    r.line(d.to_string());
                    r.pass(name, "re-checks");
                }
                Err(m) => r.fail(name, m),
            }
        }
        Command::EtaWitness { derivation } => {
            let (ws, e) = find_derivation(corpus, derivation)?;
            let name = format!("eta-witness {derivation}");
            match eta_expand_witness(&ws.eqs, &e.proof, e.system, &e.ctx, &e.term, &e.formula) {
                Ok(w) => {
                    r.line(format!("judgment {} {} |- {} : {}", System::Af2, e.ctx_name, w.term, e.formula));
                    r.line(w.derivation.to_string());
                    let back = w.replay().is_some_and(|t| t.alpha_eq(&e.term));
                    match check_derivation(System::Af2, &ws.eqs, &w.derivation, &e.ctx, &w.term, &e.formula) {
                        Ok(()) if back => r.pass(name, format!("{} η-steps back to the subject", w.steps.len())),
                        Ok(()) => r.fail(name, "the witness does not η-reduce to the subject"),
                        Err(m) => r.fail(name, m.to_string()),
                    }
                }
                Err(m) => r.fail(name, m.to_string()),
            }
        }
        Command::Complete { typ, size, budget } => {
            let (ws, a) = resolve_formula(corpus, typ)?;
            let mut cfg = SyntacticModelConfig::new(crate::verify::inhabited(&ws.sig), ws.eqs.clone());
            cfg.budget = budget.unwrap_or_else(default_budget);
            let name = format!("complete {typ} size {size}");
            match completeness_experiment(&a, *size, &cfg) {
                Ok(rep) => {
                    r.output.extend(rep.to_string().lines().map(str::to_string));
                    let hard = rep.hard_failures().len();
                    if hard > 0 {
                        r.fail(name, format!("{hard} disagreements"));
                    } else if rep.unknown() > 0 {
                        r.unknown(name, format!("{} unknown cells", rep.unknown()));
                    } else {
                        r.pass(name, "full agreement");
                    }
                }
                Err(m) => r.fail(name, m.to_string()),
            }
        }
        Command::VerifyCorpus { budget, only, .. } => {
            let mut cfg = VerifyConfig::default();
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            if only.is_empty() {
                r = verify_corpus(corpus, &cfg);
            } else {
                for n in only {
                    let Some((label, _)) = CRITERIA.get(n.wrapping_sub(1)) else {
                        return Err(CliError::Usage(format!("no criterion {n}")));
                    };
                    let o = run_criterion(*n, corpus, &cfg);
                    r.push(format!("{n} {label}"), o.status, format!("{} ({:.1}s)", o.detail, o.seconds));
                }
            }
        }
    }
    Ok(r)
}

/// Runs a command line (without the program name) against `corpus`.
/// `--workspace` is ignored; `verify-corpus --dir` still reads the directory.
pub fn run_args<I, T>(corpus: &Corpus, args: I) -> Result<Report, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("af2lab")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string().trim_end().to_string()))?;
    match &cli.command {
        Command::VerifyCorpus { dir: Some(d), .. } => run(&Corpus::load_dir(d)?, &cli.command),
        _ => run(corpus, &cli.command),
    }
}

/// Parses arguments, loads the corpus and runs; returns the process
/// output and exit code.
pub fn main_with_args<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { crate::report::EXIT_USAGE } else { crate::report::EXIT_OK };
            return (e.to_string(), code);
        }
    };
    let corpus = match &cli.command {
        Command::VerifyCorpus { dir: Some(d), .. } => Corpus::load_dir(d).map_err(CliError::from),
        _ => load(cli.workspace.as_deref()),
    };
    let result = corpus.and_then(|c| run(&c, &cli.command));
    match result {
        Ok(r) => {
            let code = r.exit_code();
            (r.to_string(), code)
        }
        Err(e) => (format!("error: {e}\n"), crate::report::EXIT_USAGE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (String, i32) {
        main_with_args(std::iter::once("af2lab").chain(args.iter().copied()))
    }

    #[test]
    fn classify_prints_polarity() {
        let (out, code) = run_args(&["classify", "(!X. X -> X) -> _|_"]);
        assert_eq!((out.as_str(), code), ("pos=false neg=true\n", 0));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["frobnicate"]).1, 2);
        assert_eq!(run_args(&["classify", "!x A"]).1, 2);
        assert_eq!(run_args(&["transform", "--to", "af2", "nothing"]).1, 2);
        assert_eq!(run_args(&["subtype", "P(c)", "P(c)"]).1, 2);
    }

    #[test]
    fn reduce_by_name() {
        let (out, code) = run_args(&["reduce", "redex_bool"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with("\\x y. x\n") || out.contains("PASS reduce"), "{out}");
    }
}
