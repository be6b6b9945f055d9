//! The acceptance checks, run over a corpus of workspaces.

pub mod random;

use crate::corpus::{check_corpus, Corpus};
use crate::lambda::{beta_redexes, contract_at, eta_redexes, normalize_random, reduce, Path, RedexKind, Step, Strategy, Term};
use crate::logic::{EquationSystem, FoTerm, Formula, Signature};
use crate::positivity::classify;
use crate::report::{Report, Status};
use crate::semantics::{
    check_adequacy, completeness_experiment, interpret, syntactic_model, AdequacyOutcome, Family, Interpretation,
    Model, SemanticSet, SyntacticModelConfig, Verdict,
};
use crate::subtyping::{check_subproof, substitute_subproof};
use crate::syntax::{is_upper, parse_formula, parse_term};
use crate::typing::{
    check_derivation, convert, eta_expand_witness, search_typing, subject_reduce, substitute_derivation, Context,
    Derivation, ReductionKind, System, TransformError, TypingLimits,
};
use crate::workspace::{DerivationEntry, Workspace};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Reduction budget for semantic oracles and normalization queries.
    pub budget: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { budget: crate::lambda::default_budget(), seed: 26 }
    }
}

/// Name and wall-clock limit in seconds of each criterion, numbered from 1.
pub const CRITERIA: [(&str, f64); 10] = [
    ("eta-counterexample", 10.0),
    ("subject-reduction", 60.0),
    ("system-equivalence", 60.0),
    ("completeness", 600.0),
    ("adequacy", 300.0),
    ("strong-normalization", 60.0),
    ("substitution-stability", 60.0),
    ("expansion-closure", 60.0),
    ("polarity", 10.0),
    ("commutation", 60.0),
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

/// Runs criterion `n` (1-based).
pub fn run_criterion(n: usize, corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let start = Instant::now();
    let (status, detail) = match n {
        1 => eta_counterexample(corpus),
        2 => subject_reduction(corpus),
        3 => system_equivalence(corpus),
        4 => completeness(corpus, cfg),
        5 => adequacy(corpus, cfg),
        6 => strong_normalization(corpus, cfg),
        7 => substitution_stability(corpus, cfg),
        8 => expansion_closure(corpus, cfg),
        9 => polarity(cfg),
        10 => commutation(cfg),
        _ => (Status::Fail, format!("no criterion {n}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let limit = CRITERIA.get(n.wrapping_sub(1)).map_or(f64::INFINITY, |c| c.1);
    if status == Status::Pass && seconds > limit {
        return Outcome { status: Status::Fail, detail: format!("{detail}; took {seconds:.1}s, limit {limit}s"), seconds };
    }
    Outcome { status, detail, seconds }
}

/// A corpus check line followed by one line per criterion.
pub fn verify_corpus(corpus: &Corpus, cfg: &VerifyConfig) -> Report {
    let mut r = Report::new();
    let checks = check_corpus(corpus);
    match checks.items.iter().find(|i| i.status == Status::Fail) {
        Some(f) => r.fail("0 corpus-check", format!("{}: {}", f.name, f.detail)),
        None => r.pass("0 corpus-check", format!("{} items check", checks.items.len())),
    }
    for (i, (name, _)) in CRITERIA.iter().enumerate() {
        let o = run_criterion(i + 1, corpus, cfg);
        r.push(format!("{} {name}", i + 1), o.status, format!("{} ({:.1}s)", o.detail, o.seconds));
    }
    r
}

#[derive(Default)]
struct Tally {
    total: usize,
    failures: Vec<String>,
    unknown: Vec<String>,
}

impl Tally {
    fn ok(&mut self) {
        self.total += 1;
    }

    fn fail(&mut self, msg: String) {
        self.total += 1;
        self.failures.push(msg);
    }

    fn unknown(&mut self, msg: String) {
        self.total += 1;
        self.unknown.push(msg);
    }

    fn outcome(self, what: &str) -> (Status, String) {
        if let Some(f) = self.failures.first() {
            (Status::Fail, format!("{}/{} {what} failed; first: {f}", self.failures.len(), self.total))
        } else if let Some(u) = self.unknown.first() {
            (Status::Unknown, format!("{}/{} {what} undecided; first: {u}", self.unknown.len(), self.total))
        } else if self.total == 0 {
            (Status::Fail, format!("no {what} in the corpus"))
        } else {
            (Status::Pass, format!("{} {what}", self.total))
        }
    }
}

fn check_in(system: System, ws: &Workspace, d: &Derivation, ctx: &Context, t: &Term, a: &Formula) -> Result<(), String> {
    check_derivation(system, &ws.eqs, d, ctx, t, a).map_err(|e| e.to_string())
}

fn to_system(ws: &Workspace, e: &DerivationEntry, to: System) -> Result<Derivation, TransformError> {
    convert(&ws.eqs, &e.proof, e.system, to, &e.ctx, &e.term, &e.formula)
}

const SEC3: &str = "(!X. X -> X -> X) -> (!X. X) -> !X. X -> X";

fn eta_counterexample(corpus: &Corpus) -> (Status, String) {
    let a = parse_formula(SEC3, &Signature::new()).expect("fixed formula");
    let app = parse_term("\\x y. x y").expect("fixed term");
    let id = parse_term("\\x. x").expect("fixed term");
    let checked = corpus.checked_derivations();
    let find = |sys: System, t: &Term| {
        checked.iter().find(|(_, _, d)| d.system == sys && d.ctx.is_empty() && d.term.alpha_eq(t) && d.formula.alpha_eq(&a))
    };
    let Some((_, ws, _)) = find(System::Af2, &app) else {
        return (Status::Fail, "no checked AF2 derivation of λxλy.(x)y at the type".into());
    };
    if find(System::Af2S, &id).is_none() {
        return (Status::Fail, "no checked AF2S derivation of λx.x at the type".into());
    }
    let limits = TypingLimits::default();
    match search_typing(System::Af2, &ws.eqs, &Context::new(), &id, &a, &limits) {
        Ok(None) => (Status::Pass, format!("AF2 ⊢ λxλy.(x)y and AF2S ⊢ λx.x checked; no AF2 derivation of λx.x within depth {}", limits.depth)),
        Ok(Some(d)) => (Status::Fail, format!("search found an AF2 derivation of λx.x: {d}")),
        Err(e) => (Status::Fail, format!("search failed: {e}")),
    }
}

fn subject_reduction(corpus: &Corpus) -> (Status, String) {
    let mut tally = Tally::default();
    for (f, ws, e) in corpus.checked_derivations() {
        if e.system != System::Af2S {
            continue;
        }
        let redexes = beta_redexes(&e.term)
            .into_iter()
            .map(|p| (ReductionKind::Beta, RedexKind::Beta, p))
            .chain(eta_redexes(&e.term).into_iter().map(|p| (ReductionKind::Eta, RedexKind::Eta, p)));
        for (kind, rk, p) in redexes {
            let label = format!("{f}:{} {kind:?} at {p}", e.name);
            let reduct = contract_at(&e.term, &p, rk).expect("listed redex");
            match subject_reduce(&ws.eqs, &e.proof, &e.ctx, &e.term, &e.formula, kind, &p) {
                Ok(d) => match check_in(System::Af2S, ws, &d, &e.ctx, &reduct, &e.formula) {
                    Ok(()) => tally.ok(),
                    Err(m) => tally.fail(format!("{label}: {m}")),
                },
                Err(m) => tally.fail(format!("{label}: {m}")),
            }
        }
    }
    tally.outcome("one-step reductions")
}

fn system_equivalence(corpus: &Corpus) -> (Status, String) {
    use System::*;
    let mut tally = Tally::default();
    for (f, ws, e) in corpus.checked_derivations() {
        let label = format!("{f}:{}", e.name);
        let routes: Vec<Vec<System>> = match e.system {
            Af2 => vec![vec![Af2S]],
            Af2Sub => vec![vec![Af2S, Af2Sub]],
            Af2S => vec![vec![Af2Sub], vec![Af2Sub, Af2S], vec![Af2Eta]],
            Af2Eta => vec![vec![Af2S]],
        };
        for route in routes {
            let mut cur = (e.system, e.proof.clone());
            let mut ok = true;
            for to in route {
                let next = convert(&ws.eqs, &cur.1, cur.0, to, &e.ctx, &e.term, &e.formula)
                    .map_err(|m| m.to_string())
                    .and_then(|d| check_in(to, ws, &d, &e.ctx, &e.term, &e.formula).map(|()| d));
                match next {
                    Ok(d) => cur = (to, d),
                    Err(m) => {
                        tally.fail(format!("{label} {} → {to}: {m}", cur.0));
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                tally.ok();
            }
        }
        match eta_expand_witness(&ws.eqs, &e.proof, e.system, &e.ctx, &e.term, &e.formula) {
            Ok(w) => {
                let replayed = w.replay().is_some_and(|t| t.alpha_eq(&e.term));
                let checks = check_in(Af2, ws, &w.derivation, &e.ctx, &w.term, &e.formula);
                match (replayed, checks) {
                    (true, Ok(())) => tally.ok(),
                    (false, _) => tally.fail(format!("{label}: witness {} does not η-reduce to the subject", w.term)),
                    (_, Err(m)) => tally.fail(format!("{label}: witness {} fails in AF2: {m}", w.term)),
                }
            }
            Err(m) => tally.fail(format!("{label}: η-witness: {m}")),
        }
    }
    tally.outcome("conversions")
}

/// Formula name, size bound and expected inhabitants.
const EXPERIMENTS: [(&str, usize, &[&str]); 3] = [
    ("Bool", 7, &["\\x y. x", "\\x y. y"]),
    ("Id", 5, &["\\x. x"]),
    ("N(s(s(0)))", 9, &["\\f x. f (f x)"]),
];

fn same_terms(a: &[&Term], b: &[Term]) -> bool {
    a.len() == b.len() && a.iter().all(|t| b.iter().any(|u| u.alpha_eq(t)))
}

fn completeness(corpus: &Corpus, cfg: &VerifyConfig) -> (Status, String) {
    let mut tally = Tally::default();
    let mut summary = Vec::new();
    for (name, size, expected) in EXPERIMENTS {
        let head = name.split('(').next().unwrap_or(name);
        let Some((_, ws)) = corpus.files.iter().find(|(_, ws)| ws.formula_def(head).is_some()) else {
            tally.fail(format!("no workspace defines {head}"));
            continue;
        };
        let a = match ws.resolve_formula(name) {
            Ok(a) => a,
            Err(e) => {
                tally.fail(format!("{name}: {e}"));
                continue;
            }
        };
        let mut mc = SyntacticModelConfig::new(inhabited(&ws.sig), ws.eqs.clone());
        mc.budget = cfg.budget;
        let r = match completeness_experiment(&a, size, &mc) {
            Ok(r) => r,
            Err(e) => {
                tally.fail(format!("{name}: {e}"));
                continue;
            }
        };
        let expected: Vec<Term> = expected.iter().map(|s| parse_term(s).expect("fixed term")).collect();
        let agreed: Vec<&Term> = r.rows.iter().filter(|x| x.typ == Verdict::In && x.sem == Verdict::In).map(|x| &x.term).collect();
        let (agree, rows) = r.agreement();
        summary.push(format!("{name}@{size}: {agree}/{rows} agree"));
        if !r.hard_failures().is_empty() || r.rows.iter().any(|x| x.agree() == Some(false)) {
            tally.fail(format!("{name}: disagreement on {}", r.rows.iter().find(|x| x.agree() == Some(false)).map_or(String::new(), |x| x.term.to_string())));
        } else if r.unknown() > 0 {
            tally.unknown(format!("{name}: {} unknown cells", r.unknown()));
        } else if !same_terms(&agreed, &expected) || !same_terms(&r.typed_in(), &expected) || !same_terms(&r.sem_in(), &expected) {
            let shown: Vec<String> = agreed.iter().map(|t| t.to_string()).collect();
            tally.fail(format!("{name}: agreed on {{{}}}", shown.join(", ")));
        } else if r.rows.iter().any(|x| x.sem == Verdict::In && !x.closed_normalizable) {
            tally.fail(format!("{name}: an In-term is not closed and normalizable"));
        } else {
            tally.ok();
        }
    }
    let (s, d) = tally.outcome("experiments");
    (s, format!("{d} [{}]", summary.join("; ")))
}

fn element(n: usize) -> FoTerm {
    FoTerm::constant(&n.to_string())
}

/// The integers mod `k` with `s`, `add` and constants read arithmetically;
/// every atom is the set of terms weak-head reducing to `atom`, and `∀X`
/// ranges over that set, all of Λ and a set on a fresh head variable.
pub fn modular_model(eqs: &EquationSystem, k: usize, atom: &str, budget: usize) -> (Model, Interpretation) {
    let value = |t: &FoTerm| match t {
        FoTerm::App(n, _) => n.parse::<usize>().unwrap_or(0),
        FoTerm::Var(_) => 0,
    };
    let (a1, a2, a3) = (atom.to_string(), atom.to_string(), atom.to_string());
    let m = Model::new(
        format!("Z/{k}"),
        (0..k).map(element).collect(),
        move |f, args| {
            let v: Vec<usize> = args.iter().map(value).collect();
            element(match f {
                "s" => (v[0] + 1) % k,
                "add" => (v[0] + v[1]) % k,
                _ => 0,
            })
        },
        move |_, _| SemanticSet::weak_head_to(&a1, budget),
    )
    .with_equations(eqs.clone())
    .with_budget(budget)
    .with_candidates(move |n, avoid| {
        let generic = (0..).map(|i| format!("g{i}")).find(|g| !avoid.contains(g) && *g != a2).expect("unbounded");
        vec![
            Family::constant(n, SemanticSet::weak_head_to(&generic, budget)),
            Family::constant(n, SemanticSet::weak_head_to(&a2, budget)),
            Family::constant(n, SemanticSet::everything()),
        ]
    });
    let i = Interpretation::new().with_so_default(move |_, n| Family::constant(n, SemanticSet::weak_head_to(&a3, budget)));
    (m, i)
}

struct NamedModel {
    name: String,
    model: Model,
    interp: Interpretation,
}

/// `sig`, plus a constant when it has no closed term to build a domain from.
pub fn inhabited(sig: &Signature) -> Signature {
    if sig.functions.values().any(|n| *n == 0) {
        return sig.clone();
    }
    let name = (0..).map(|i| format!("o{i}")).find(|n| !sig.is_function(n)).expect("unbounded");
    sig.clone().with_function(&name, 0)
}

fn models_for(ws: &Workspace, cfg: &VerifyConfig) -> Result<Vec<NamedModel>, String> {
    let mut mc = SyntacticModelConfig::new(inhabited(&ws.sig), ws.eqs.clone());
    mc.budget = cfg.budget;
    let (m, i, _) = syntactic_model(&mc).map_err(|e| e.to_string())?;
    let mut out = vec![NamedModel { name: "syntactic".into(), model: m, interp: i }];
    for (k, atom) in [(2, "p"), (3, "q")] {
        let (m, i) = modular_model(&ws.eqs, k, atom, cfg.budget);
        out.push(NamedModel { name: format!("Z/{k}"), model: m, interp: i });
    }
    Ok(out)
}

/// Free first-order variables of a judgment, valued in hand models.
fn fo_free(e: &DerivationEntry) -> BTreeSet<String> {
    let mut fv = e.formula.free_vars();
    fv.extend(e.ctx.free_vars());
    fv.into_iter().filter(|x| !is_upper(x)).collect()
}

/// A term of each context type known to be in its value.
fn witnesses(e: &DerivationEntry, nm: &NamedModel) -> Result<Vec<Term>, String> {
    let mut us = Vec::new();
    for (x, b) in e.ctx.entries() {
        let s = interpret(b, &nm.model, &nm.interp).map_err(|m| m.to_string())?;
        let mut cands = s.probes.clone();
        cands.push(parse_term("\\z. z").expect("fixed term"));
        match cands.into_iter().find(|u| s.verdict(u) == Verdict::In) {
            Some(u) => us.push(u),
            None => return Err(format!("no known element of the type {b} of {x}")),
        }
    }
    Ok(us)
}

fn adequacy(corpus: &Corpus, cfg: &VerifyConfig) -> (Status, String) {
    let mut tally = Tally::default();
    let checked = corpus.checked_derivations();
    for (f, ws) in &corpus.files {
        let entries: Vec<_> = checked.iter().filter(|(g, _, _)| g == f).map(|(_, _, e)| *e).collect();
        if entries.is_empty() {
            continue;
        }
        let models = match models_for(ws, cfg) {
            Ok(m) => m,
            Err(m) => {
                tally.fail(format!("{f}: {m}"));
                continue;
            }
        };
        for e in entries {
            let d = match to_system(ws, e, System::Af2S) {
                Ok(d) => d,
                Err(m) => {
                    tally.fail(format!("{f}:{}: {m}", e.name));
                    continue;
                }
            };
            for nm in &models {
                let label = format!("{f}:{} in {}", e.name, nm.name);
                let mut interp = nm.interp.clone();
                if nm.name != "syntactic" {
                    for x in fo_free(e) {
                        interp.fo.insert(x, element(1));
                    }
                }
                let nm = NamedModel { name: nm.name.clone(), model: nm.model.clone(), interp };
                let us = match witnesses(e, &nm) {
                    Ok(us) => us,
                    Err(m) => {
                        tally.unknown(format!("{label}: {m}"));
                        continue;
                    }
                };
                match check_adequacy(&ws.eqs, &d, &e.ctx, &e.term, &e.term, &e.formula, &nm.model, &nm.interp, &us) {
                    Ok(r) => match r.outcome {
                        AdequacyOutcome::Confirmed => tally.ok(),
                        AdequacyOutcome::Inconclusive => tally.unknown(format!("{label}: {r}")),
                        AdequacyOutcome::Counterexample => tally.fail(format!("{label}: {r}")),
                    },
                    Err(m) => tally.fail(format!("{label}: {m}")),
                }
            }
        }
    }
    tally.outcome("model evaluations")
}

const NORMALIZATION_STEPS: usize = 10_000;

fn strong_normalization(corpus: &Corpus, cfg: &VerifyConfig) -> (Status, String) {
    let mut tally = Tally::default();
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let budget = cfg.budget.min(NORMALIZATION_STEPS);
    let starved = |label: String, tally: &mut Tally| {
        if budget < NORMALIZATION_STEPS {
            tally.unknown(format!("{label}: budget {budget} exhausted"));
        } else {
            tally.fail(format!("{label}: no normal form within {NORMALIZATION_STEPS} steps"));
        }
    };
    for (f, _, e) in corpus.checked_derivations() {
        let label = format!("{f}:{}", e.name);
        if reduce(&e.term, Strategy::BetaNormalOrder, budget).is_normal() {
            tally.ok();
        } else {
            starved(format!("{label} normal order"), &mut tally);
        }
        for k in 0..20 {
            if normalize_random(&e.term, &mut rng, budget).is_normal() {
                tally.ok();
            } else {
                starved(format!("{label} random run {k}"), &mut tally);
            }
        }
    }
    tally.outcome("normalization runs")
}

fn free_split(formulas: &[&Formula]) -> Result<(BTreeSet<String>, BTreeMap<String, usize>), String> {
    let mut fo = BTreeSet::new();
    let mut so = BTreeMap::new();
    for a in formulas {
        fo.extend(a.free_vars().into_iter().filter(|x| !is_upper(x)));
        so.extend(a.so_arities().map_err(|e| e.to_string())?);
    }
    Ok((fo, so))
}

const SUBSTITUTIONS: usize = 200;

fn substitution_stability(corpus: &Corpus, cfg: &VerifyConfig) -> (Status, String) {
    enum Item<'a> {
        Sub(&'a str, &'a Workspace, &'a crate::workspace::SubProofEntry),
        Der(&'a str, &'a Workspace, &'a DerivationEntry),
    }
    let mut items: Vec<Item> = corpus.checked_subproofs().into_iter().map(|(f, w, s)| Item::Sub(f, w, s)).collect();
    items.extend(corpus.checked_derivations().into_iter().map(|(f, w, d)| Item::Der(f, w, d)));
    // Items with free variables come first so that every one of them is hit.
    let is_open = |it: &Item| match it {
        Item::Sub(_, _, s) => !s.lhs.is_closed() || !s.rhs.is_closed(),
        Item::Der(_, _, d) => !d.formula.is_closed() || !d.ctx.free_vars().is_empty(),
    };
    items.sort_by_key(|it| !is_open(it));
    let mut tally = Tally::default();
    if items.is_empty() {
        return tally.outcome("substitutions");
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 7);
    for k in 0..SUBSTITUTIONS {
        match &items[k % items.len()] {
            Item::Sub(f, ws, s) => {
                let (fo, so) = match free_split(&[&s.lhs, &s.rhs]) {
                    Ok(x) => x,
                    Err(m) => {
                        tally.fail(format!("{f}:{}: {m}", s.name));
                        continue;
                    }
                };
                let sigma = random::substitution(&mut rng, &ws.sig, &fo, &so);
                let p = substitute_subproof(&s.proof, &sigma);
                let (a, b) = (s.lhs.apply(&sigma), s.rhs.apply(&sigma));
                if p.skeleton() != s.proof.skeleton() {
                    tally.fail(format!("{f}:{}: skeleton changed", s.name));
                } else if let Err(m) = check_subproof(&ws.eqs, &p, &a, &b) {
                    tally.fail(format!("{f}:{} under {sigma:?}: {m}", s.name));
                } else {
                    tally.ok();
                }
            }
            Item::Der(f, ws, e) => {
                let mut forms: Vec<&Formula> = e.ctx.entries().iter().map(|(_, a)| a).collect();
                forms.push(&e.formula);
                let (fo, so) = match free_split(&forms) {
                    Ok(x) => x,
                    Err(m) => {
                        tally.fail(format!("{f}:{}: {m}", e.name));
                        continue;
                    }
                };
                let sigma = random::substitution(&mut rng, &ws.sig, &fo, &so);
                let result = substitute_derivation(&e.proof, &e.ctx, &e.formula, &sigma).map_err(|m| m.to_string()).and_then(|d| {
                    if d.skeleton() != e.proof.skeleton() {
                        return Err("skeleton changed".to_string());
                    }
                    check_in(e.system, ws, &d, &e.ctx.apply(&sigma), &e.term, &e.formula.apply(&sigma))
                });
                match result {
                    Ok(()) => tally.ok(),
                    Err(m) => tally.fail(format!("{f}:{} under {sigma:?}: {m}", e.name)),
                }
            }
        }
    }
    tally.outcome("substitutions")
}

const EXPANSIONS: usize = 50;

fn expansion_closure(corpus: &Corpus, cfg: &VerifyConfig) -> (Status, String) {
    let mut tally = Tally::default();
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 11);
    let args: Vec<Term> = ["\\q. q", "\\a b. a", "\\a b. b"].iter().map(|s| parse_term(s).expect("fixed term")).collect();
    let checked = corpus.checked_derivations();
    for (f, ws) in &corpus.files {
        let entries: Vec<_> = checked.iter().filter(|(g, _, _)| g == f).map(|(_, _, e)| *e).collect();
        if entries.is_empty() {
            continue;
        }
        let models = match models_for(ws, cfg) {
            Ok(m) => m,
            Err(m) => {
                tally.fail(format!("{f}: {m}"));
                continue;
            }
        };
        for nm in &models {
            let mut seen = HashSet::new();
            for e in &entries {
                let mut interp = nm.interp.clone();
                if nm.name != "syntactic" {
                    for x in fo_free(e) {
                        interp.fo.insert(x, element(1));
                    }
                }
                let mut sets: Vec<(&Formula, Option<&Term>)> = vec![(&e.formula, e.ctx.is_empty().then_some(&e.term))];
                sets.extend(e.ctx.entries().iter().map(|(_, b)| (b, None)));
                for (a, subject) in sets {
                    if !seen.insert(a.key()) && subject.is_none() {
                        continue;
                    }
                    let s = match interpret(a, &nm.model, &interp) {
                        Ok(s) => s,
                        Err(m) => {
                            tally.fail(format!("{f}: {a} in {}: {m}", nm.name));
                            continue;
                        }
                    };
                    let members: Vec<Term> =
                        s.probes.iter().chain(subject).filter(|v| s.verdict(v) == Verdict::In).cloned().collect();
                    for v in members {
                        let mut bad = None;
                        let mut undecided = None;
                        for _ in 0..EXPANSIONS {
                            let k = rng.gen_range(1..=3);
                            let u = random::weak_head_expansion(&mut rng, &v, k, &args);
                            match s.verdict(&u) {
                                Verdict::In => {}
                                Verdict::Out => bad = Some(u),
                                Verdict::Unknown => undecided = Some(u),
                            }
                        }
                        let label = format!("{v} in |{a}| of {}", nm.name);
                        match (bad, undecided) {
                            (Some(u), _) => tally.fail(format!("{label}: expansion {u} is Out")),
                            (None, Some(u)) => tally.unknown(format!("{label}: expansion {u} is Unknown")),
                            (None, None) => tally.ok(),
                        }
                    }
                }
            }
        }
    }
    tally.outcome("In-members expanded 50 times")
}

/// Formula text with its expected (∀₂⁺, ∀₂⁻) labels.
pub const POLARITY_TABLE: [(&str, bool, bool); 20] = [
    ("P(c)", true, true),
    ("!X. X -> X -> X", true, false),
    ("(!X. X -> X) -> P(c)", false, true),
    ("!x. N(x) -> N(s(x))", true, true),
    ("_|_", true, true),
    ("!X. X", true, false),
    ("(!X. X) -> _|_", false, true),
    ("((!X. X) -> !X. X) -> P(c)", false, false),
    ("((!X. X) -> P(c)) -> P(c)", true, false),
    ("!X. X(0) -> X(s(0))", true, false),
    ("!X. (!y. X(y) -> X(s(y))) -> X(0) -> X(s(s(0)))", true, false),
    ("(!X. X -> X -> X) -> (!X. X) -> !X. X -> X", false, false),
    ("P(c) -> N(c) -> P(c)", true, true),
    ("!x. !y. N(x) -> N(y)", true, true),
    ("(P(c) -> !X. X) -> P(c)", false, true),
    ("!X. (X -> P(c)) -> X", true, false),
    ("(((!X. X) -> P(c)) -> P(c)) -> P(c)", false, true),
    ("!X. !Y. X -> Y", true, false),
    ("(!x. !X. X(x)) -> N(c)", false, true),
    ("!X. ((!Y. Y) -> X) -> X", true, false),
];

fn polarity_sig() -> Signature {
    Signature::new()
        .with_function("0", 0)
        .with_function("s", 1)
        .with_function("c", 0)
        .with_predicate("P", 1)
        .with_predicate("N", 1)
}

/// `(∀₂⁺, ∀₂⁻)` read off the sign of each second-order quantifier
/// occurrence: ∀₂⁺ when all sit at even depth to the left of arrows,
/// ∀₂⁻ when all sit at odd depth.
pub fn occurrence_polarity(a: &Formula) -> (bool, bool) {
    fn signs(a: &Formula, positive: bool, out: &mut Vec<bool>) {
        match a {
            Formula::Imp(b, c) => {
                signs(b, !positive, out);
                signs(c, positive, out);
            }
            Formula::AllFo(_, b) => signs(b, positive, out),
            Formula::AllSo(_, _, b) => {
                out.push(positive);
                signs(b, positive, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    signs(a, true, &mut out);
    (out.iter().all(|p| *p), out.iter().all(|p| !*p))
}

const RANDOM_FORMULAS: usize = 200;

fn polarity(cfg: &VerifyConfig) -> (Status, String) {
    let sig = polarity_sig();
    let mut tally = Tally::default();
    for (text, pos, neg) in POLARITY_TABLE {
        let a = parse_formula(text, &sig).expect("table formula parses");
        let p = classify(&a);
        if (p.positive, p.negative) == (pos, neg) {
            tally.ok();
        } else {
            tally.fail(format!("{text}: {p}, labelled pos={pos} neg={neg}"));
        }
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 13);
    for _ in 0..RANDOM_FORMULAS {
        let a = random::formula(&mut rng, &sig, &mut vec![("W".into(), 1)], &mut vec!["n".into()], 5);
        let p = classify(&a);
        let o = occurrence_polarity(&a);
        if (p.positive, p.negative) == o {
            tally.ok();
        } else {
            tally.fail(format!("{a}: {p}, oracle pos={} neg={}", o.0, o.1));
        }
    }
    tally.outcome("formulas classified")
}

/// Every subterm position of `t`.
pub fn positions(t: &Term) -> Vec<Path> {
    fn go(t: &Term, here: Path, out: &mut Vec<Path>) {
        match t {
            Term::Var(_) => {}
            Term::Abs(_, b) => go(b, here.push(Step::Body), out),
            Term::App(f, a) => {
                go(f, here.push(Step::Fun), out);
                go(a, here.push(Step::Arg), out);
            }
        }
        out.push(here);
    }
    let mut out = Vec::new();
    go(t, Path::root(), &mut out);
    out
}

/// Whether `w →η* v`.
pub fn eta_reaches(w: &Term, v: &Term, limit: usize) -> bool {
    let target = v.nameless_key();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([w.clone()]);
    while let Some(t) = queue.pop_front() {
        if !seen.insert(t.nameless_key()) || seen.len() > limit {
            continue;
        }
        if t.nameless_key() == target {
            return true;
        }
        for p in eta_redexes(&t) {
            if let Some(r) = contract_at(&t, &p, RedexKind::Eta) {
                queue.push_back(r);
            }
        }
    }
    false
}

/// Some `w` with `u →β⁺ w →η* v`, searching β-reduction sequences of
/// length at most `depth`.
pub fn commute(u: &Term, v: &Term, depth: usize, limit: usize) -> Option<Term> {
    let mut seen = HashSet::new();
    let mut layer = vec![u.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &layer {
            for p in beta_redexes(t) {
                let Some(w) = contract_at(t, &p, RedexKind::Beta) else { continue };
                if !seen.insert(w.nameless_key()) {
                    continue;
                }
                if eta_reaches(&w, v, limit) {
                    return Some(w);
                }
                next.push(w);
            }
        }
        if next.is_empty() || seen.len() > limit {
            break;
        }
        layer = next;
    }
    None
}

const TRIPLES: usize = 100;

fn commutation(cfg: &VerifyConfig) -> (Status, String) {
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 17);
    let mut tally = Tally::default();
    for _ in 0..TRIPLES {
        let t = random::term_with_redex(&mut rng, 4, &["a", "b"]);
        let redexes = beta_redexes(&t);
        let p = redexes.choose(&mut rng).expect("has a redex");
        let v = contract_at(&t, p, RedexKind::Beta).expect("listed redex");
        let pos = positions(&t);
        let q = pos.choose(&mut rng).expect("root is a position");
        let s = t.subterm(q).expect("listed position").clone();
        let z = crate::lambda::fresh_name("z", &s.free_vars());
        let u = t.replace_at(q, Term::abs(z.clone(), Term::app(s, Term::var(z)))).expect("listed position");
        if !contract_at(&u, q, RedexKind::Eta).is_some_and(|back| back.alpha_eq(&t)) {
            tally.fail(format!("η-expansion of {t} at {q} does not reduce back"));
            continue;
        }
        match commute(&u, &v, 6, 5000) {
            Some(_) => tally.ok(),
            None => tally.fail(format!("u = {u}, t = {t}, v = {v}: no w found")),
        }
    }
    tally.outcome("triples")
}
