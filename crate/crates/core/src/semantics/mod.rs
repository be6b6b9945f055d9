//! Realizability: sets of λ-terms stable by weak-head expansion, models,
//! the syntactic model and the experiments built on it.

mod experiment;
mod refute;
mod syntactic;

pub use experiment::{
    check_adequacy, closed_normal_terms, completeness_experiment, AdequacyOutcome, AdequacyReport, ExperimentReport,
    ExperimentRow,
};
pub use refute::refute_typing;
pub use syntactic::{pair, syntactic_model, unpair, GammaMinus, SyntacticModelConfig};

use crate::lambda::{fresh_name, reduce, Strategy, Term};
use crate::logic::{EquationSystem, FoTerm, Formula, Instance, SoInst, Substitution};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("unassigned variable {0}")]
    Unassigned(String),
    #[error("arity mismatch for {0}")]
    Arity(String),
    #[error("the signature has no closed term")]
    EmptyDomain,
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("premise: {0}")]
    Premise(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    In,
    Out,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::In => "In",
            Verdict::Out => "Out",
            Verdict::Unknown => "Unknown",
        })
    }
}

pub type Oracle = Arc<dyn Fn(&Term) -> Verdict + Send + Sync>;

/// A finitely approximated member of R_f.
#[derive(Clone)]
pub struct SemanticSet {
    oracle: Oracle,
    pub probes: Vec<Term>,
    pub description: String,
    /// A free variable every member weak-head reduces to.
    pub head: Option<String>,
    /// Known to have no members.
    pub empty: bool,
}

impl fmt::Debug for SemanticSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SemanticSet({})", self.description)
    }
}

impl SemanticSet {
    pub fn new(
        description: impl Into<String>,
        probes: Vec<Term>,
        oracle: impl Fn(&Term) -> Verdict + Send + Sync + 'static,
    ) -> Self {
        SemanticSet { oracle: Arc::new(oracle), probes, description: description.into(), head: None, empty: false }
    }

    pub fn verdict(&self, t: &Term) -> Verdict {
        (self.oracle)(t)
    }

    /// All of Λ.
    pub fn everything() -> Self {
        SemanticSet::new("Λ", vec![Term::abs("z", Term::var("z"))], |_| Verdict::In)
    }

    /// Terms whose weak-head reduction ends at the free variable `a`.
    pub fn weak_head_to(a: &str, budget: usize) -> Self {
        let target = a.to_string();
        let mut s = SemanticSet::new(format!("≻f {a}"), vec![Term::var(a)], move |t| {
            let r = reduce(t, Strategy::WeakHead, budget);
            match (r.is_normal(), &r.result) {
                (false, _) => Verdict::Unknown,
                (true, Term::Var(x)) if *x == target => Verdict::In,
                _ => Verdict::Out,
            }
        });
        s.head = Some(a.to_string());
        s
    }
}

fn whnf(t: &Term, budget: usize) -> Option<Term> {
    let r = reduce(t, Strategy::WeakHead, budget);
    r.is_normal().then_some(r.result)
}

fn constant_function(body: &Term) -> Term {
    let z = fresh_name("z", &body.free_vars());
    Term::abs(z, body.clone())
}

/// `G → H`, judged on the probes of `G`. Queries are weak-head normalized
/// first, so the verdict cannot separate a term from its weak-head reducts.
pub fn arrow_set(g: &SemanticSet, h: &SemanticSet, budget: usize) -> SemanticSet {
    if g.empty {
        let mut all = SemanticSet::everything();
        all.description = format!("({} → {})", g.description, h.description);
        return all;
    }
    let (gp, h2) = (g.probes.clone(), h.clone());
    let probes = if g.probes.is_empty() { Vec::new() } else { h.probes.iter().map(constant_function).collect() };
    SemanticSet::new(format!("({} → {})", g.description, h.description), probes, move |u| {
        if gp.is_empty() {
            return Verdict::Unknown;
        }
        let mut all_in = true;
        for t in &gp {
            let v = match whnf(&Term::app(u.clone(), t.clone()), budget) {
                Some(q) => h2.verdict(&q),
                None => Verdict::Unknown,
            };
            match v {
                Verdict::Out => return Verdict::Out,
                Verdict::Unknown => all_in = false,
                Verdict::In => {}
            }
        }
        if all_in {
            Verdict::In
        } else {
            Verdict::Unknown
        }
    })
}

/// Size bound of the closed normal terms tried as probes of an
/// intersection whose members offer none.
const PROBE_SEARCH_SIZE: usize = 5;

pub fn intersection(description: impl Into<String>, sets: Vec<SemanticSet>) -> SemanticSet {
    let members = Arc::new(sets);
    let m2 = members.clone();
    let oracle = move |t: &Term| {
        let mut verdict = Verdict::In;
        for s in m2.iter() {
            match s.verdict(t) {
                Verdict::Out => return Verdict::Out,
                Verdict::Unknown => verdict = Verdict::Unknown,
                Verdict::In => {}
            }
        }
        verdict
    };
    let mut heads = members.iter().filter_map(|s| s.head.clone()).collect::<BTreeSet<_>>().into_iter();
    let head = heads.next();
    let empty = heads.next().is_some() || members.iter().any(|s| s.empty);
    let mut probes: Vec<Term> = Vec::new();
    for s in members.iter() {
        for p in s.probes.iter().take(4) {
            if !probes.iter().any(|q| q.alpha_eq(p)) && oracle(p) == Verdict::In {
                probes.push(p.clone());
            }
        }
    }
    if probes.is_empty() && !empty {
        probes = experiment::closed_normal_terms(PROBE_SEARCH_SIZE).into_iter().filter(|t| oracle(t) == Verdict::In).take(4).collect();
    }
    let mut set = SemanticSet::new(description, probes, oracle);
    set.head = head;
    set.empty = empty;
    set
}

/// A function `|M|^n → R`; `var` names the second-order variable whose
/// syntactic value this is, if any.
#[derive(Clone)]
pub struct Family {
    pub arity: usize,
    pub description: String,
    pub var: Option<String>,
    apply: FamilyFn,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family({}/{})", self.description, self.arity)
    }
}

impl Family {
    pub fn new(
        arity: usize,
        description: impl Into<String>,
        apply: impl Fn(&[FoTerm]) -> SemanticSet + Send + Sync + 'static,
    ) -> Self {
        Family { arity, description: description.into(), var: None, apply: Arc::new(apply) }
    }

    pub fn for_variable(mut self, var: &str) -> Self {
        self.var = Some(var.to_string());
        self
    }

    /// The same set at every argument tuple.
    pub fn constant(arity: usize, set: SemanticSet) -> Self {
        Family::new(arity, set.description.clone(), move |_| set.clone())
    }

    pub fn at(&self, args: &[FoTerm]) -> SemanticSet {
        (self.apply)(args)
    }
}

type FamilyFn = Arc<dyn Fn(&[FoTerm]) -> SemanticSet + Send + Sync>;
type FuncInterp = Arc<dyn Fn(&str, &[FoTerm]) -> FoTerm + Send + Sync>;
type PredInterp = Arc<dyn Fn(&str, &[FoTerm]) -> SemanticSet + Send + Sync>;
type Candidates = Arc<dyn Fn(usize, &BTreeSet<String>) -> Vec<Family> + Send + Sync>;
type ProbeHook = Arc<dyn Fn(&Formula) -> Vec<Term> + Send + Sync>;

/// A finitely presented Λf-model. Domain elements are first-order terms
/// (canonical representatives); `∀X` ranges over `candidates`.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub domain: Vec<FoTerm>,
    pub eqs: EquationSystem,
    pub budget: usize,
    funcs: FuncInterp,
    preds: PredInterp,
    absurd: SemanticSet,
    candidates: Candidates,
    probe_hook: Option<ProbeHook>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Model({}, {} elements)", self.name, self.domain.len())
    }
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<FoTerm>,
        funcs: impl Fn(&str, &[FoTerm]) -> FoTerm + Send + Sync + 'static,
        preds: impl Fn(&str, &[FoTerm]) -> SemanticSet + Send + Sync + 'static,
    ) -> Self {
        Model {
            name: name.into(),
            domain,
            eqs: EquationSystem::default(),
            budget: crate::lambda::default_budget(),
            funcs: Arc::new(funcs),
            preds: Arc::new(preds),
            absurd: SemanticSet::weak_head_to("bot", crate::lambda::default_budget()),
            candidates: Arc::new(|_, _| Vec::new()),
            probe_hook: None,
        }
    }

    pub fn with_equations(mut self, eqs: EquationSystem) -> Self {
        self.eqs = eqs;
        self
    }

    pub fn with_absurd(mut self, s: SemanticSet) -> Self {
        self.absurd = s;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_candidates(
        mut self,
        c: impl Fn(usize, &BTreeSet<String>) -> Vec<Family> + Send + Sync + 'static,
    ) -> Self {
        self.candidates = Arc::new(c);
        self
    }

    pub fn with_probe_hook(mut self, h: impl Fn(&Formula) -> Vec<Term> + Send + Sync + 'static) -> Self {
        self.probe_hook = Some(Arc::new(h));
        self
    }

    pub fn func(&self, f: &str, args: &[FoTerm]) -> FoTerm {
        (self.funcs)(f, args)
    }

    pub fn pred(&self, p: &str, args: &[FoTerm]) -> SemanticSet {
        (self.preds)(p, args)
    }

    pub fn candidates(&self, arity: usize, avoid: &BTreeSet<String>) -> Vec<Family> {
        (self.candidates)(arity, avoid)
    }

    /// Checks `u_{M,I} = v_{M,I}` for each equation under every assignment
    /// of its variables drawn from `samples`. Returns the failing equations.
    pub fn equation_failures(&self, samples: &[FoTerm]) -> Vec<String> {
        let mut bad = Vec::new();
        for e in &self.eqs.equations {
            let vars: Vec<String> = e.vars().into_iter().collect();
            let mut idx = vec![0usize; vars.len()];
            'outer: loop {
                let mut i = Interpretation::new();
                for (v, k) in vars.iter().zip(&idx) {
                    i.fo.insert(v.clone(), samples[*k].clone());
                }
                let (l, r) = (eval_term(&e.left, self, &i), eval_term(&e.right, self, &i));
                if l.is_err() || l != r {
                    bad.push(format!("{} = {}", e.left, e.right));
                    break;
                }
                for j in (0..idx.len()).rev() {
                    idx[j] += 1;
                    if idx[j] < samples.len() {
                        continue 'outer;
                    }
                    idx[j] = 0;
                }
                break;
            }
        }
        bad
    }
}

type SoDefault = Arc<dyn Fn(&str, usize) -> Family + Send + Sync>;

#[derive(Clone, Default)]
pub struct Interpretation {
    pub fo: BTreeMap<String, FoTerm>,
    pub so: BTreeMap<String, Family>,
    /// `I(x) = x̄` for unassigned first-order variables.
    pub fo_identity: bool,
    so_default: Option<SoDefault>,
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interpretation").field("fo", &self.fo).field("so", &self.so).finish()
    }
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_so_default(mut self, d: impl Fn(&str, usize) -> Family + Send + Sync + 'static) -> Self {
        self.so_default = Some(Arc::new(d));
        self
    }

    pub fn fo_value(&self, x: &str) -> Option<FoTerm> {
        self.fo.get(x).cloned().or_else(|| self.fo_identity.then(|| FoTerm::var(x)))
    }

    pub fn so_value(&self, x: &str, arity: usize) -> Option<Family> {
        self.so.get(x).cloned().or_else(|| self.so_default.as_ref().map(|d| d(x, arity)))
    }

    fn set_fo(&self, x: &str, a: FoTerm) -> Interpretation {
        let mut j = self.clone();
        j.fo.insert(x.to_string(), a);
        j
    }

    fn set_so(&self, x: &str, f: Family) -> Interpretation {
        let mut j = self.clone();
        j.so.insert(x.to_string(), f);
        j
    }
}

pub fn eval_term(t: &FoTerm, m: &Model, i: &Interpretation) -> Result<FoTerm, SemanticsError> {
    match t {
        FoTerm::Var(x) => i.fo_value(x).ok_or_else(|| SemanticsError::Unassigned(x.clone())),
        FoTerm::App(f, args) => {
            let vals = args.iter().map(|a| eval_term(a, m, i)).collect::<Result<Vec<_>, _>>()?;
            Ok(m.func(f, &vals))
        }
    }
}

/// `|A|_{M,I}`.
pub fn interpret(a: &Formula, m: &Model, i: &Interpretation) -> Result<SemanticSet, SemanticsError> {
    let syn = syntactic_instance(a, i);
    interp(a, syn.as_ref(), m, i)
}

/// `A` with each first-order variable replaced by its value and each
/// second-order variable by the variable whose syntactic value it carries;
/// `None` when some variable has another kind of value.
fn syntactic_instance(a: &Formula, i: &Interpretation) -> Option<Formula> {
    let mut sigma = Substitution::default();
    for x in a.free_vars() {
        if crate::syntax::is_upper(&x) {
            let arity = a.so_arities().ok()?.get(&x).copied()?;
            let fam = i.so_value(&x, arity)?;
            let y = fam.var?;
            let params: Vec<String> = (1..=arity).map(|k| format!("p_{k}")).collect();
            let args = params.iter().map(|p| FoTerm::var(p)).collect();
            sigma.so.insert(x, SoInst { params, body: Formula::Var(y, args) });
        } else {
            sigma.fo.insert(x.clone(), i.fo_value(&x)?);
        }
    }
    Some(a.apply(&sigma))
}

fn interp(a: &Formula, syn: Option<&Formula>, m: &Model, i: &Interpretation) -> Result<SemanticSet, SemanticsError> {
    let set = match a {
        Formula::Absurd => m.absurd.clone(),
        Formula::Pred(p, args) => {
            let vals = args.iter().map(|t| eval_term(t, m, i)).collect::<Result<Vec<_>, _>>()?;
            m.pred(p, &vals)
        }
        Formula::Var(x, args) => {
            let fam = i.so_value(x, args.len()).ok_or_else(|| SemanticsError::Unassigned(x.clone()))?;
            if fam.arity != args.len() {
                return Err(SemanticsError::Arity(x.clone()));
            }
            let vals = args.iter().map(|t| eval_term(t, m, i)).collect::<Result<Vec<_>, _>>()?;
            fam.at(&vals)
        }
        Formula::Imp(b, c) => {
            let (sb, sc) = match syn.and_then(|s| s.as_imp()) {
                Some((sb, sc)) => (Some(sb), Some(sc)),
                None => (None, None),
            };
            arrow_set(&interp(b, sb, m, i)?, &interp(c, sc, m, i)?, m.budget)
        }
        Formula::AllFo(x, b) => {
            let mut members = Vec::new();
            for e in &m.domain {
                let s = syn.and_then(|s| s.as_forall()).map(|(bx, body)| body.instantiate(&bx, &Instance::Term(e.clone())));
                members.push(interp(b, s.as_ref(), m, &i.set_fo(x, e.clone()))?);
            }
            intersection(format!("∩{x}"), members)
        }
        Formula::AllSo(x, n, b) => {
            let mut avoid = a.free_vars();
            if let Some(s) = syn {
                avoid.extend(s.free_vars());
            }
            b.all_names(&mut avoid);
            let mut members = Vec::new();
            for fam in m.candidates(*n, &avoid) {
                let s = match (&fam.var, syn.and_then(|s| s.as_forall())) {
                    (Some(y), Some((bx, body))) => Some(body.apply(&Substitution::rename(&bx, y))),
                    _ => None,
                };
                members.push(interp(b, s.as_ref(), m, &i.set_so(x, fam))?);
            }
            intersection(format!("∩{x}"), members)
        }
    };
    Ok(match (syn, &m.probe_hook) {
        (Some(s), Some(h)) => with_probes(set, h(s)),
        _ => set,
    })
}

fn with_probes(mut set: SemanticSet, extra: Vec<Term>) -> SemanticSet {
    for p in extra {
        if !set.probes.iter().any(|q| q.alpha_eq(&p)) && set.verdict(&p) == Verdict::In {
            set.probes.push(p);
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::tests::{f, t};

    fn var_model() -> Model {
        Model::new("heads", vec![FoTerm::constant("c")], |f, args| FoTerm::App(f.to_string(), args.to_vec()), |_, _| {
            SemanticSet::weak_head_to("a", 100)
        })
        .with_candidates(|n, _| {
            vec![Family::constant(n, SemanticSet::weak_head_to("a", 100)), Family::constant(n, SemanticSet::everything())]
        })
    }

    #[test]
    fn arrow_on_head_variable_sets() {
        let g = SemanticSet::weak_head_to("a", 100);
        let gg = arrow_set(&g, &g, 100);
        assert_eq!(gg.verdict(&t("\\y. y")), Verdict::In);
        assert_eq!(gg.verdict(&t("\\x y. y")), Verdict::Out);
        let empty = SemanticSet::new("∅-probes", vec![], |_| Verdict::Unknown);
        assert_eq!(arrow_set(&empty, &g, 100).verdict(&t("\\y. y")), Verdict::Unknown);
        for p in &gg.probes {
            assert_eq!(gg.verdict(p), Verdict::In);
        }
    }

    #[test]
    fn atomic_and_quantified_values() {
        let m = var_model();
        let i = Interpretation::new();
        let pc = interpret(&f("P(c)"), &m, &i).unwrap();
        assert_eq!(pc.verdict(&t("a")), Verdict::In);
        assert_eq!(pc.verdict(&t("(\\x. x) a")), Verdict::In);
        let id = interpret(&f("!X. X -> X"), &m, &i).unwrap();
        assert_eq!(id.verdict(&t("\\x. x")), Verdict::In);
        assert_eq!(id.verdict(&t("\\x y. x")), Verdict::Out);
        assert!(matches!(interpret(&f("X"), &m, &i), Err(SemanticsError::Unassigned(_))));
    }
}
