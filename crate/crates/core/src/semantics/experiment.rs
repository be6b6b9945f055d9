use super::{interpret, refute_typing, syntactic_model, Interpretation, Model, SemanticsError, SyntacticModelConfig, Verdict};
use crate::lambda::{beta_equiv, reduce, Equivalence, Strategy, Term};
use crate::logic::{EquationSystem, Formula};
use crate::positivity::classify;
use crate::typing::{check_derivation, search_typing, Context, Derivation, System};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdequacyOutcome {
    Confirmed,
    Inconclusive,
    /// The substituted subject is outside the value of its type.
    Counterexample,
}

#[derive(Clone, Debug)]
pub struct AdequacyReport {
    pub subject: Term,
    pub verdict: Verdict,
    pub outcome: AdequacyOutcome,
}

impl fmt::Display for AdequacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ADEQUACY {} VERDICT {} {:?}", self.subject, self.verdict, self.outcome)
    }
}

/// Evaluates `t[u1/x1, …, un/xn]` in `|A|_{M,I}` given a derivation of
/// `x1 : B1, …, xn : Bn ⊢ t' : A` with `t ≃β t'` and each `ui ∈ |Bi|`.
#[allow(clippy::too_many_arguments)]
pub fn check_adequacy(
    eqs: &EquationSystem,
    d: &Derivation,
    ctx: &Context,
    t_prime: &Term,
    t: &Term,
    a: &Formula,
    m: &Model,
    i: &Interpretation,
    us: &[Term],
) -> Result<AdequacyReport, SemanticsError> {
    check_derivation(System::Af2S, eqs, d, ctx, t_prime, a).map_err(|e| SemanticsError::Premise(e.to_string()))?;
    if beta_equiv(t, t_prime, m.budget) != Equivalence::Yes {
        return Err(SemanticsError::Premise(format!("{t} and {t_prime} are not shown β-equivalent")));
    }
    let failures = m.equation_failures(&m.domain);
    if !failures.is_empty() {
        return Err(SemanticsError::Premise(format!("model violates {}", failures.join(", "))));
    }
    if ctx.entries().len() != us.len() {
        return Err(SemanticsError::Premise(format!("{} terms for {} context entries", us.len(), ctx.entries().len())));
    }
    let mut pairs = Vec::new();
    for ((x, b), u) in ctx.entries().iter().zip(us) {
        let v = interpret(b, m, i)?.verdict(u);
        if v != Verdict::In {
            return Err(SemanticsError::Premise(format!("{u} is {v} for the type {b} of {x}")));
        }
        pairs.push((x.clone(), u.clone()));
    }
    let subject = t.substitute_all(&pairs);
    let verdict = interpret(a, m, i)?.verdict(&subject);
    let outcome = match verdict {
        Verdict::In => AdequacyOutcome::Confirmed,
        Verdict::Unknown => AdequacyOutcome::Inconclusive,
        Verdict::Out => AdequacyOutcome::Counterexample,
    };
    Ok(AdequacyReport { subject, verdict, outcome })
}

const NAMES: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

fn binder(depth: usize) -> String {
    NAMES.get(depth).map(|s| s.to_string()).unwrap_or_else(|| format!("x{depth}"))
}

/// All closed β-normal terms with at most `n` nodes, binders named by depth.
pub fn closed_normal_terms(n: usize) -> Vec<Term> {
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    for s in 1..=n {
        out.extend(normal(s, 0, &mut memo));
    }
    out
}

fn normal(s: usize, depth: usize, memo: &mut HashMap<(usize, usize, bool), Vec<Term>>) -> Vec<Term> {
    if let Some(v) = memo.get(&(s, depth, true)) {
        return v.clone();
    }
    let mut out = neutral(s, depth, memo);
    if s >= 2 {
        for b in normal(s - 1, depth + 1, memo) {
            out.push(Term::abs(binder(depth), b));
        }
    }
    memo.insert((s, depth, true), out.clone());
    out
}

fn neutral(s: usize, depth: usize, memo: &mut HashMap<(usize, usize, bool), Vec<Term>>) -> Vec<Term> {
    if let Some(v) = memo.get(&(s, depth, false)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if s == 1 {
        out.extend((0..depth).map(|d| Term::var(binder(d))));
    }
    for s1 in 1..s.saturating_sub(1) {
        let s2 = s - 1 - s1;
        let fs = neutral(s1, depth, memo);
        let args = normal(s2, depth, memo);
        for f in &fs {
            for a in &args {
                out.push(Term::app(f.clone(), a.clone()));
            }
        }
    }
    memo.insert((s, depth, false), out.clone());
    out
}

#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub term: Term,
    /// In: a derivation was found; Out: refuted; Unknown otherwise.
    pub typ: Verdict,
    pub sem: Verdict,
    /// Normalizable and β-equivalent to a closed term.
    pub closed_normalizable: bool,
}

impl ExperimentRow {
    pub fn agree(&self) -> Option<bool> {
        match (self.typ, self.sem) {
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => None,
            (a, b) => Some(a == b),
        }
    }

    /// Typable but Out, or In but refutably untypable.
    pub fn is_hard_failure(&self) -> bool {
        self.agree() == Some(false)
    }
}

impl fmt::Display for ExperimentRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let agree = match self.agree() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "moot",
        };
        write!(f, "TERM {} TYPE {} SEM {} AGREE {}", self.term, self.typ, self.sem, agree)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub formula: Formula,
    pub size_bound: usize,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    pub fn agreement(&self) -> (usize, usize) {
        (self.rows.iter().filter(|r| r.agree() == Some(true)).count(), self.rows.len())
    }

    pub fn unknown(&self) -> usize {
        self.rows.iter().filter(|r| r.agree().is_none()).count()
    }

    pub fn hard_failures(&self) -> Vec<&ExperimentRow> {
        self.rows.iter().filter(|r| r.is_hard_failure()).collect()
    }

    pub fn typed_in(&self) -> Vec<&Term> {
        self.rows.iter().filter(|r| r.typ == Verdict::In).map(|r| &r.term).collect()
    }

    pub fn sem_in(&self) -> Vec<&Term> {
        self.rows.iter().filter(|r| r.sem == Verdict::In).map(|r| &r.term).collect()
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        let (k, n) = self.agreement();
        write!(f, "AGREEMENT {k}/{n} UNKNOWN {}", self.unknown())
    }
}

/// Compares bounded typability of every closed normal term of size ≤ `n`
/// with membership in the value of `a` in the syntactic model.
pub fn completeness_experiment(a: &Formula, n: usize, cfg: &SyntacticModelConfig) -> Result<ExperimentReport, SemanticsError> {
    if !a.free_vars().is_empty() {
        return Err(SemanticsError::Precondition(format!("{a} is not closed")));
    }
    if !classify(a).positive {
        return Err(SemanticsError::Precondition(format!("{a} is not ∀₂⁺")));
    }
    let (m, i, _) = syntactic_model(cfg)?;
    let set = interpret(a, &m, &i)?;
    let empty = Context::new();
    let mut rows = Vec::new();
    for t in closed_normal_terms(n) {
        let typ = match search_typing(System::Af2S, &cfg.eqs, &empty, &t, a, &cfg.limits) {
            Ok(Some(_)) => Verdict::In,
            _ if refute_typing(&cfg.eqs, &empty, &t, a, cfg.budget) => Verdict::Out,
            _ => Verdict::Unknown,
        };
        let sem = set.verdict(&t);
        let r = reduce(&t, Strategy::BetaNormalOrder, cfg.budget);
        let closed_normalizable = r.is_normal() && r.result.free_vars().is_empty();
        rows.push(ExperimentRow { term: t, typ, sem, closed_normalizable });
    }
    Ok(ExperimentReport { formula: a.clone(), size_bound: n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{Family, SemanticSet};
    use crate::typing::tests::{ctx, d, f, none, sig, t};

    fn cfg() -> SyntacticModelConfig {
        SyntacticModelConfig::new(sig(), EquationSystem::default())
    }

    #[test]
    fn enumeration_counts() {
        // size 4: λxλyλz.{x,y,z} and λx.(x)x; size 5: λ⁴.v (4), λxλy.(a)b (4),
        // λx.(x)λy.x and λx.(x)λy.y
        let all = closed_normal_terms(5);
        let by = |s| all.iter().filter(|t| t.size() == s).count();
        assert_eq!((by(1), by(2), by(3), by(4), by(5)), (0, 1, 2, 4, 10));
        assert!(all.iter().all(|t| t.is_beta_normal() && t.free_vars().is_empty()));
    }

    #[test]
    fn bool_and_identity() {
        let r = completeness_experiment(&f("!X. X -> X -> X"), 7, &cfg()).unwrap();
        let want = [t("\\x y. x"), t("\\x y. y")];
        for col in [r.typed_in(), r.sem_in()] {
            assert_eq!(col.len(), 2, "{r}");
            assert!(want.iter().all(|w| col.iter().any(|c| c.alpha_eq(w))));
        }
        assert!(r.hard_failures().is_empty());
        assert_eq!(r.unknown(), 0, "{r}");
        let r = completeness_experiment(&f("!X. X -> X"), 5, &cfg()).unwrap();
        assert_eq!(r.unknown(), 0, "{r}");
        assert_eq!(r.typed_in().len(), 1);
        assert_eq!(r.sem_in().len(), 1);
        assert!(r.typed_in()[0].alpha_eq(&t("\\x. x")));
    }

    #[test]
    fn church_two() {
        let a = f("!X. (!y. X(y) -> X(s(y))) -> X(0) -> X(s(s(0)))");
        let r = completeness_experiment(&a, 9, &cfg()).unwrap();
        println!("{r}");
        assert_eq!(r.unknown(), 0);
        assert!(r.hard_failures().is_empty());
        for col in [r.typed_in(), r.sem_in()] {
            assert_eq!(col.len(), 1);
            assert!(col[0].alpha_eq(&t("\\x y. x (x y)")));
        }
    }

    #[test]
    fn precondition() {
        let e = completeness_experiment(&f("(!X. X -> X) -> P(c)"), 3, &cfg());
        assert!(matches!(e, Err(SemanticsError::Precondition(_))));
    }

    #[test]
    fn adequacy_cases() {
        let (m, i, gm) = syntactic_model(&cfg()).unwrap();
        let bool_ = f("!X. X -> X -> X");
        let k = d("(s2 (X) {X} {X -> X} (s2 () {X} {X} (s1 x () (ax)) (ax)) (ax))");
        let e = Context::new();
        let r = check_adequacy(&none(), &k, &e, &t("\\x y. x"), &t("\\x y. x"), &bool_, &m, &i, &[]).unwrap();
        assert_eq!(r.outcome, AdequacyOutcome::Confirmed);
        let r = check_adequacy(&none(), &k, &e, &t("\\x y. x"), &t("(\\z. z) (\\x y. x)"), &bool_, &m, &i, &[]).unwrap();
        assert_eq!(r.outcome, AdequacyOutcome::Confirmed);
        let u = gm.probes(&f("P(c)"), 1);
        let ax = d("(s1 x () (ax))");
        let r = check_adequacy(&none(), &ax, &ctx("x : P(c)"), &t("x"), &t("x"), &f("P(c)"), &m, &i, &u).unwrap();
        assert_eq!(r.outcome, AdequacyOutcome::Confirmed);
        let bad = check_adequacy(&none(), &ax, &ctx("x : P(c)"), &t("x"), &t("x"), &f("P(c)"), &m, &i, &[t("\\z. z")]);
        assert!(matches!(bad, Err(SemanticsError::Premise(_))));
    }

    #[test]
    fn adequacy_in_a_head_model() {
        let m = Model::new("heads", vec![crate::logic::FoTerm::constant("c")], |f, a| {
            crate::logic::FoTerm::App(f.to_string(), a.to_vec())
        }, |_, _| SemanticSet::weak_head_to("a", 100))
        .with_candidates(|n, _| vec![Family::constant(n, SemanticSet::weak_head_to("a", 100))]);
        let i = Interpretation::new();
        let k = d("(s2 (X) {X} {X -> X} (s2 () {X} {X} (s1 x () (ax)) (ax)) (ax))");
        let r = check_adequacy(&none(), &k, &Context::new(), &t("\\x y. x"), &t("\\x y. x"), &f("!X. X -> X -> X"), &m, &i, &[])
            .unwrap();
        assert_eq!(r.outcome, AdequacyOutcome::Confirmed);
    }
}
