use super::{FoTerm, Formula};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

/// A schema `t = t'`; its free variables are implicitly universal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub left: FoTerm,
    pub right: FoTerm,
}

impl Equation {
    pub fn new(left: FoTerm, right: FoTerm) -> Self {
        Equation { left, right }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.left.free_vars();
        v.extend(self.right.free_vars());
        v
    }

    /// `∀X(X(t) → X(t'))`
    pub fn as_formula(&self) -> Formula {
        equation_as_formula(&self.left, &self.right)
    }

    fn sides(&self, o: Orientation) -> (&FoTerm, &FoTerm) {
        match o {
            Orientation::Forward => (&self.left, &self.right),
            Orientation::Backward => (&self.right, &self.left),
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

pub fn equation_as_formula(t: &FoTerm, t2: &FoTerm) -> Formula {
    let mut avoid = t.free_vars();
    avoid.extend(t2.free_vars());
    let x = crate::lambda::fresh_name("X", &avoid);
    Formula::all_so(
        &x,
        1,
        Formula::imp(Formula::Var(x.clone(), vec![t.clone()]), Formula::Var(x.clone(), vec![t2.clone()])),
    )
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquationSystem {
    pub equations: Vec<Equation>,
}

impl EquationSystem {
    pub fn new(equations: Vec<Equation>) -> Self {
        EquationSystem { equations }
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `u` is an instance of the left side.
    Forward,
    /// `u` is an instance of the right side.
    Backward,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Backward,
            Orientation::Backward => Orientation::Forward,
        }
    }
}

/// Witness that `(u, v)` is a particular case of an equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticularCase {
    pub equation: usize,
    pub orientation: Orientation,
    pub sigma: BTreeMap<String, FoTerm>,
}

fn match_into(pattern: &FoTerm, target: &FoTerm, sigma: &mut BTreeMap<String, FoTerm>) -> bool {
    match (pattern, target) {
        (FoTerm::Var(x), _) => match sigma.get(x) {
            Some(bound) => bound == target,
            None => {
                sigma.insert(x.clone(), target.clone());
                true
            }
        },
        (FoTerm::App(f, xs), FoTerm::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, t)| match_into(p, t, sigma))
        }
        _ => false,
    }
}

/// First-order matching of `pattern` against `target`.
pub fn match_term(pattern: &FoTerm, target: &FoTerm) -> Option<BTreeMap<String, FoTerm>> {
    let mut sigma = BTreeMap::new();
    match_into(pattern, target, &mut sigma).then_some(sigma)
}

/// Finds an equation `t = t'` and σ with `(u, v) = (t[σ], t'[σ])` or the
/// flipped pair; the first equation in order wins.
pub fn match_particular_case(e: &EquationSystem, u: &FoTerm, v: &FoTerm) -> Option<ParticularCase> {
    for (i, eq) in e.equations.iter().enumerate() {
        for o in [Orientation::Forward, Orientation::Backward] {
            let (l, r) = eq.sides(o);
            let mut sigma = BTreeMap::new();
            if match_into(l, u, &mut sigma) && match_into(r, v, &mut sigma) {
                return Some(ParticularCase { equation: i, orientation: o, sigma });
            }
        }
    }
    None
}

/// One rewrite of the subterm at `site` (argument indices from the root).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub site: Vec<usize>,
    pub equation: usize,
    pub orientation: Orientation,
    pub before: FoTerm,
    pub after: FoTerm,
    /// The rewritten subterm before and after.
    pub redex: FoTerm,
    pub contractum: FoTerm,
}

impl RewriteStep {
    pub fn reversed(&self) -> RewriteStep {
        RewriteStep {
            site: self.site.clone(),
            equation: self.equation,
            orientation: self.orientation.flip(),
            before: self.after.clone(),
            after: self.before.clone(),
            redex: self.contractum.clone(),
            contractum: self.redex.clone(),
        }
    }
}

pub fn subterm_at<'a>(t: &'a FoTerm, site: &[usize]) -> Option<&'a FoTerm> {
    match site.split_first() {
        None => Some(t),
        Some((&i, rest)) => match t {
            FoTerm::App(_, args) => subterm_at(args.get(i)?, rest),
            FoTerm::Var(_) => None,
        },
    }
}

pub fn replace_subterm(t: &FoTerm, site: &[usize], new: FoTerm) -> Option<FoTerm> {
    match site.split_first() {
        None => Some(new),
        Some((&i, rest)) => match t {
            FoTerm::App(f, args) => {
                let mut args = args.clone();
                let slot = args.get_mut(i)?;
                *slot = replace_subterm(slot, rest, new)?;
                Some(FoTerm::App(f.clone(), args))
            }
            FoTerm::Var(_) => None,
        },
    }
}

fn sites(t: &FoTerm, here: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(here.clone());
    if let FoTerm::App(_, args) = t {
        for (i, a) in args.iter().enumerate() {
            here.push(i);
            sites(a, here, out);
            here.pop();
        }
    }
}

/// Every single rewrite of `t` by an equation in either direction. Rewrites
/// whose result would need variables not bound by the match are skipped.
pub fn rewrite_step_sites(e: &EquationSystem, t: &FoTerm, orientations: &[Orientation]) -> Vec<RewriteStep> {
    let mut all = Vec::new();
    sites(t, &mut Vec::new(), &mut all);
    let mut out = Vec::new();
    for site in all {
        let sub = subterm_at(t, &site).expect("enumerated site");
        for (i, eq) in e.equations.iter().enumerate() {
            for &o in orientations {
                let (l, r) = eq.sides(o);
                let Some(sigma) = match_term(l, sub) else { continue };
                if !r.free_vars().iter().all(|v| sigma.contains_key(v)) {
                    continue;
                }
                let contractum = r.subst(&sigma);
                let after = replace_subterm(t, &site, contractum.clone()).expect("enumerated site");
                out.push(RewriteStep {
                    site: site.clone(),
                    equation: i,
                    orientation: o,
                    before: t.clone(),
                    after,
                    redex: sub.clone(),
                    contractum,
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Congruence {
    Yes,
    Unknown,
}

/// Size slack of the rewrite universe above the larger endpoint.
const UNIVERSE_SLACK: usize = 4;

/// A chain of single rewrites joining `a` to `b`, found by bidirectional
/// breadth-first search; `budget` bounds the number of terms expanded.
pub fn equational_trace(e: &EquationSystem, a: &FoTerm, b: &FoTerm, budget: usize) -> Option<Vec<RewriteStep>> {
    if a == b {
        return Some(Vec::new());
    }
    if e.is_empty() {
        return None;
    }
    let cap = a.size().max(b.size()) + UNIVERSE_SLACK;
    let both = [Orientation::Forward, Orientation::Backward];
    // parent[t] = step that produced t from its parent, per side.
    let mut parents: [HashMap<FoTerm, Option<RewriteStep>>; 2] = [HashMap::new(), HashMap::new()];
    let mut queues: [VecDeque<FoTerm>; 2] = [VecDeque::new(), VecDeque::new()];
    parents[0].insert(a.clone(), None);
    parents[1].insert(b.clone(), None);
    queues[0].push_back(a.clone());
    queues[1].push_back(b.clone());
    let mut expanded = 0;
    while expanded < budget && (!queues[0].is_empty() || !queues[1].is_empty()) {
        let side = if queues[1].is_empty() || (!queues[0].is_empty() && queues[0].len() <= queues[1].len()) {
            0
        } else {
            1
        };
        let t = queues[side].pop_front().expect("nonempty");
        expanded += 1;
        for step in rewrite_step_sites(e, &t, &both) {
            if step.after.size() > cap || parents[side].contains_key(&step.after) {
                continue;
            }
            let next = step.after.clone();
            parents[side].insert(next.clone(), Some(step));
            if parents[1 - side].contains_key(&next) {
                return Some(join(&parents, &next));
            }
            queues[side].push_back(next);
        }
    }
    None
}

fn join(parents: &[HashMap<FoTerm, Option<RewriteStep>>; 2], meet: &FoTerm) -> Vec<RewriteStep> {
    let mut left = Vec::new();
    let mut cur = meet.clone();
    while let Some(Some(step)) = parents[0].get(&cur) {
        left.push(step.clone());
        cur = step.before.clone();
    }
    left.reverse();
    let mut cur = meet.clone();
    while let Some(Some(step)) = parents[1].get(&cur) {
        left.push(step.reversed());
        cur = step.before.clone();
    }
    left
}

/// `a ≈_E b`, decided within the bounded rewrite universe.
pub fn eq_congruent(e: &EquationSystem, a: &FoTerm, b: &FoTerm, budget: usize) -> Congruence {
    match equational_trace(e, a, b, budget) {
        Some(_) => Congruence::Yes,
        None => Congruence::Unknown,
    }
}

/// Rewrites left to right, innermost first, until no equation applies or the
/// budget runs out. Returns the final term and whether it is irreducible.
pub fn canonical_form(e: &EquationSystem, t: &FoTerm, budget: usize) -> (FoTerm, bool) {
    let mut cur = t.clone();
    for _ in 0..budget {
        let steps = rewrite_step_sites(e, &cur, &[Orientation::Forward]);
        // innermost: the deepest site, leftmost among equals
        match steps.into_iter().max_by_key(|s| (s.site.len(), std::cmp::Reverse(s.site.clone()))) {
            Some(s) => cur = s.after,
            None => return (cur, true),
        }
    }
    let done = rewrite_step_sites(e, &cur, &[Orientation::Forward]).is_empty();
    (cur, done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Signature;
    use crate::syntax::Parser;

    fn sig() -> Signature {
        Signature::new().with_function("0", 0).with_function("s", 1).with_function("add", 2)
    }

    fn ft(s: &str) -> FoTerm {
        Parser::new(s, &sig()).fo_term_complete().unwrap()
    }

    fn e_add() -> EquationSystem {
        EquationSystem::new(vec![
            Equation::new(ft("add(0, y)"), ft("y")),
            Equation::new(ft("add(s(x), y)"), ft("s(add(x, y))")),
        ])
    }

    #[test]
    fn particular_case_both_orientations() {
        let e = EquationSystem::new(vec![Equation::new(ft("add(0, y)"), ft("y"))]);
        let m = match_particular_case(&e, &ft("add(0, s(0))"), &ft("s(0)")).unwrap();
        assert_eq!(m.orientation, Orientation::Forward);
        assert_eq!(m.sigma, BTreeMap::from([("y".to_string(), ft("s(0)"))]));
        let m = match_particular_case(&e, &ft("s(0)"), &ft("add(0, s(0))")).unwrap();
        assert_eq!(m.orientation, Orientation::Backward);
        assert!(match_particular_case(&e, &ft("add(s(0), 0)"), &ft("0")).is_none());
    }

    #[test]
    fn nonlinear_pattern_requires_equal_instances() {
        let e = EquationSystem::new(vec![Equation::new(ft("add(x, x)"), ft("x"))]);
        assert!(match_particular_case(&e, &ft("add(0, 0)"), &ft("0")).is_some());
        assert!(match_particular_case(&e, &ft("add(0, s(0))"), &ft("0")).is_none());
    }

    #[test]
    fn congruence_examples() {
        let e = e_add();
        assert_eq!(eq_congruent(&e, &ft("add(s(0), s(0))"), &ft("s(s(0))"), 1000), Congruence::Yes);
        assert_eq!(eq_congruent(&e, &ft("s(0)"), &ft("s(0)"), 0), Congruence::Yes);
        assert_eq!(eq_congruent(&e, &ft("s(add(0, 0))"), &ft("s(0)"), 100), Congruence::Yes);
        assert_eq!(eq_congruent(&e, &ft("s(0)"), &ft("0"), 200), Congruence::Unknown);
    }

    #[test]
    fn trace_is_a_valid_chain() {
        let e = e_add();
        let (a, b) = (ft("add(s(0), s(0))"), ft("s(s(0))"));
        let chain = equational_trace(&e, &a, &b, 1000).unwrap();
        let mut cur = a.clone();
        for st in &chain {
            assert_eq!(st.before, cur);
            assert_eq!(subterm_at(&cur, &st.site), Some(&st.redex));
            assert!(match_particular_case(&e, &st.redex, &st.contractum).is_some());
            cur = st.after.clone();
        }
        assert_eq!(cur, b);
    }

    #[test]
    fn canonical_forms_of_additions() {
        let e = e_add();
        assert_eq!(canonical_form(&e, &ft("add(s(s(0)), s(0))"), 100), (ft("s(s(s(0)))"), true));
        assert_eq!(canonical_form(&e, &ft("add(x, 0)"), 100), (ft("add(x, 0)"), true));
    }

    #[test]
    fn equation_formula_shape() {
        let a = equation_as_formula(&ft("0"), &ft("0"));
        assert_eq!(a.to_string(), "!X. X(0) -> X(0)");
        let b = equation_as_formula(&ft("add(x, y)"), &ft("y"));
        let c = equation_as_formula(&ft("y"), &ft("add(x, y)"));
        assert_ne!(b, c);
    }
}
