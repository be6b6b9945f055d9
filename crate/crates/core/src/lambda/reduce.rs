use super::{Path, Step, Term};
use rand::Rng;

pub const DEFAULT_BUDGET: usize = 10_000;

/// The step budget, overridable through `AF2LAB_BUDGET`.
pub fn default_budget() -> usize {
    std::env::var("AF2LAB_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Leftmost-outermost β.
    BetaNormalOrder,
    /// Leftmost-outermost η.
    Eta,
    /// Contract the weak-head redex only.
    WeakHead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionStatus {
    NormalForm,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub result: Term,
    pub steps: usize,
    pub status: ReductionStatus,
}

impl ReductionResult {
    pub fn is_normal(&self) -> bool {
        self.status == ReductionStatus::NormalForm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Yes,
    No,
    Unknown,
}

pub fn reduce(t: &Term, strategy: Strategy, budget: usize) -> ReductionResult {
    let step: fn(&Term) -> Option<Term> = match strategy {
        Strategy::BetaNormalOrder => normal_order_step,
        Strategy::Eta => eta_step,
        Strategy::WeakHead => weak_head_step,
    };
    let mut current = t.clone();
    let mut steps = 0;
    loop {
        if steps == budget {
            // Report NormalForm only if no further step applies.
            let status = if step(&current).is_some() {
                ReductionStatus::BudgetExhausted
            } else {
                ReductionStatus::NormalForm
            };
            return ReductionResult { result: current, steps, status };
        }
        match step(&current) {
            Some(next) => {
                current = next;
                steps += 1;
            }
            None => {
                return ReductionResult { result: current, steps, status: ReductionStatus::NormalForm }
            }
        }
    }
}

fn contract_beta(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => match &**f {
            Term::Abs(x, body) => Some(body.substitute(x, a)),
            _ => None,
        },
        _ => None,
    }
}

fn contract_eta(t: &Term) -> Option<Term> {
    match t {
        Term::Abs(x, body) => match &**body {
            Term::App(f, a) if matches!(&**a, Term::Var(y) if y == x) && !f.is_free(x) => Some((**f).clone()),
            _ => None,
        },
        _ => None,
    }
}

fn normal_order_step(t: &Term) -> Option<Term> {
    if let Some(r) = contract_beta(t) {
        return Some(r);
    }
    match t {
        Term::Var(_) => None,
        Term::Abs(x, b) => normal_order_step(b).map(|b| Term::abs(x.clone(), b)),
        Term::App(f, a) => match normal_order_step(f) {
            Some(f2) => Some(Term::app(f2, (**a).clone())),
            None => normal_order_step(a).map(|a2| Term::app((**f).clone(), a2)),
        },
    }
}

fn eta_step(t: &Term) -> Option<Term> {
    if let Some(r) = contract_eta(t) {
        return Some(r);
    }
    match t {
        Term::Var(_) => None,
        Term::Abs(x, b) => eta_step(b).map(|b| Term::abs(x.clone(), b)),
        Term::App(f, a) => match eta_step(f) {
            Some(f2) => Some(Term::app(f2, (**a).clone())),
            None => eta_step(a).map(|a2| Term::app((**f).clone(), a2)),
        },
    }
}

fn weak_head_step(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => match contract_beta(t) {
            Some(r) => Some(r),
            None => weak_head_step(f).map(|f2| Term::app(f2, (**a).clone())),
        },
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RedexKind {
    Beta,
    Eta,
}

fn collect_redexes(t: &Term, kind: RedexKind, here: &Path, out: &mut Vec<Path>) {
    let is_redex = match kind {
        RedexKind::Beta => contract_beta(t).is_some(),
        RedexKind::Eta => contract_eta(t).is_some(),
    };
    if is_redex {
        out.push(here.clone());
    }
    match t {
        Term::Var(_) => {}
        Term::Abs(_, b) => collect_redexes(b, kind, &here.push(Step::Body), out),
        Term::App(f, a) => {
            collect_redexes(f, kind, &here.push(Step::Fun), out);
            collect_redexes(a, kind, &here.push(Step::Arg), out);
        }
    }
}

/// Positions of all β-redexes, in leftmost-outermost order.
pub fn beta_redexes(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    collect_redexes(t, RedexKind::Beta, &Path::root(), &mut out);
    out
}

/// Positions of all η-redexes `\x. t x` with `x` not free in `t`.
pub fn eta_redexes(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    collect_redexes(t, RedexKind::Eta, &Path::root(), &mut out);
    out
}

/// Contracts the redex of the given kind at `path`; `None` if there is none.
pub fn contract_at(t: &Term, path: &Path, kind: RedexKind) -> Option<Term> {
    let sub = t.subterm(path)?;
    let contracted = match kind {
        RedexKind::Beta => contract_beta(sub)?,
        RedexKind::Eta => contract_eta(sub)?,
    };
    t.replace_at(path, contracted)
}

/// β-normalization contracting a uniformly random redex at every step.
pub fn normalize_random<R: Rng>(t: &Term, rng: &mut R, budget: usize) -> ReductionResult {
    let mut current = t.clone();
    for steps in 0..=budget {
        let redexes = beta_redexes(&current);
        if redexes.is_empty() {
            return ReductionResult { result: current, steps, status: ReductionStatus::NormalForm };
        }
        if steps == budget {
            break;
        }
        let p = &redexes[rng.gen_range(0..redexes.len())];
        current = contract_at(&current, p, RedexKind::Beta).expect("listed redex");
    }
    ReductionResult { result: current, steps: budget, status: ReductionStatus::BudgetExhausted }
}

pub fn beta_equiv(t: &Term, u: &Term, budget: usize) -> Equivalence {
    if t.alpha_eq(u) {
        return Equivalence::Yes;
    }
    let a = reduce(t, Strategy::BetaNormalOrder, budget);
    let b = reduce(u, Strategy::BetaNormalOrder, budget);
    if !a.is_normal() || !b.is_normal() {
        Equivalence::Unknown
    } else if a.result.alpha_eq(&b.result) {
        Equivalence::Yes
    } else {
        Equivalence::No
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::HeadShape;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    const OMEGA: &str = "(\\x. x x) (\\x. x x)";

    #[test]
    fn weak_head_trace() {
        let r = reduce(&t("(\\x. x) ((\\y. y) z)"), Strategy::WeakHead, 100);
        assert_eq!(r.result, t("z"));
        assert_eq!(r.steps, 2);
        assert!(r.is_normal());
    }

    #[test]
    fn weak_head_stops_at_whnf() {
        let r = reduce(&t("\\x. (\\y. y) x"), Strategy::WeakHead, 100);
        assert_eq!(r.steps, 0);
        let r = reduce(&t("x ((\\y. y) z)"), Strategy::WeakHead, 100);
        assert_eq!(r.steps, 0);
        assert_eq!(r.result.head_shape(), HeadShape::HeadVariable);
    }

    #[test]
    fn eta_example() {
        let r = reduce(&t("\\x. \\y. x y"), Strategy::Eta, 100);
        assert_eq!(r.result, t("\\x. x"));
        assert!(r.is_normal());
        // \x. x x is not an η-redex
        assert_eq!(reduce(&t("\\x. x x"), Strategy::Eta, 10).steps, 0);
    }

    #[test]
    fn omega_exhausts_budget() {
        let r = reduce(&t(OMEGA), Strategy::BetaNormalOrder, 10);
        assert_eq!(r.status, ReductionStatus::BudgetExhausted);
        assert_eq!(r.steps, 10);
    }

    #[test]
    fn normal_order_finds_normal_form_past_divergent_argument() {
        let r = reduce(&t(&format!("(\\x. \\y. y) ({OMEGA})")), Strategy::BetaNormalOrder, 50);
        assert!(r.is_normal());
        assert_eq!(r.result, t("\\y. y"));
    }

    #[test]
    fn beta_equiv_examples() {
        assert_eq!(beta_equiv(&t("(\\x. x) y"), &t("y"), 100), Equivalence::Yes);
        assert_eq!(beta_equiv(&t("\\x. x"), &t("\\x. \\y. y"), 100), Equivalence::No);
        assert_eq!(beta_equiv(&t(OMEGA), &t("y"), 10), Equivalence::Unknown);
    }

    #[test]
    fn redex_positions() {
        let term = t("\\z. (\\x. x) ((\\y. y) z)");
        let ps = beta_redexes(&term);
        assert_eq!(ps.iter().map(|p| p.to_string()).collect::<Vec<_>>(), vec!["@b", "@ba"]);
        assert_eq!(contract_at(&term, &ps[1], RedexKind::Beta).unwrap(), t("\\z. (\\x. x) z"));
        assert_eq!(eta_redexes(&t("\\z. (\\x. y x) z")).len(), 2);
    }

    #[test]
    fn budget_zero_is_honest() {
        let r = reduce(&t("(\\x. x) y"), Strategy::BetaNormalOrder, 0);
        assert_eq!(r.status, ReductionStatus::BudgetExhausted);
        let r = reduce(&t("y"), Strategy::BetaNormalOrder, 0);
        assert!(r.is_normal());
    }
}
